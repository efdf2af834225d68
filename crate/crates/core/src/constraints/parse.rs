//! Parser for the line-oriented constraint language.
//!
//! One constraint per line, `#` starts a comment:
//!
//! ```text
//! grouping count (<=|>=) INT
//! class count (<=|>=) INT
//! class cannot-link NAME NAME
//! class must-link NAME NAME
//! class distinct(ATTR) <= INT
//! instance (distinct|sum|avg)(ATTR) (<=|>=) NUMBER
//! instance (duration|maxgap) <= NUMBER_SECONDS
//! instance perclass <= INT
//! atleast FRACTION: <instance-constraint>
//! ```
//!
//! Names and attributes may be double-quoted when they contain whitespace.

use super::{Constraint, ConstraintError, ConstraintKind, ConstraintSet};

pub fn parse_constraints_file(path: &std::path::Path) -> Result<ConstraintSet, ConstraintError> {
    parse_constraints(&std::fs::read_to_string(path)?)
}

pub fn parse_constraints(text: &str) -> Result<ConstraintSet, ConstraintError> {
    let mut constraints = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        let mut cursor = Cursor::new(line, line_no);
        let constraint = parse_line(&mut cursor)?;
        cursor.expect_end()?;
        constraints.push(constraint);
    }
    Ok(ConstraintSet::new(constraints))
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

struct Cursor<'a> {
    line: &'a str,
    line_no: usize,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a str, line_no: usize) -> Self {
        Cursor {
            line,
            line_no,
            pos: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> ConstraintError {
        ConstraintError::Syntax {
            line: self.line_no,
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn semantic(&self, message: impl Into<String>) -> ConstraintError {
        ConstraintError::Semantic {
            line: Some(self.line_no),
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with([' ', '\t']) {
            self.pos += 1;
        }
    }

    fn rest(&self) -> &'a str {
        &self.line[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ConstraintError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{token}'")))
        }
    }

    fn expect_end(&mut self) -> Result<(), ConstraintError> {
        self.skip_ws();
        if self.rest().is_empty() {
            Ok(())
        } else {
            Err(self.error(format!(
                "unexpected trailing input '{}'",
                self.rest().trim_end()
            )))
        }
    }

    /// `<=` or `>=`; true means `<=`.
    fn comparator(&mut self) -> Result<bool, ConstraintError> {
        if self.eat("<=") {
            Ok(true)
        } else if self.eat(">=") {
            Ok(false)
        } else {
            Err(self.error("expected '<=' or '>='"))
        }
    }

    /// A bare word (letters, digits, `_`, `-`, `.`) or a double-quoted string.
    fn name(&mut self) -> Result<String, ConstraintError> {
        self.skip_ws();
        let rest = self.rest();
        if let Some(stripped) = rest.strip_prefix('"') {
            match stripped.find('"') {
                Some(end) => {
                    let value = &stripped[..end];
                    self.pos += end + 2;
                    Ok(value.to_string())
                }
                None => Err(self.error("unterminated quoted name")),
            }
        } else {
            let len = rest
                .char_indices()
                .take_while(|(_, c)| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
                .map(|(i, c)| i + c.len_utf8())
                .last()
                .unwrap_or(0);
            if len == 0 {
                return Err(self.error("expected a name"));
            }
            let value = &rest[..len];
            self.pos += len;
            Ok(value.to_string())
        }
    }

    fn number(&mut self) -> Result<f64, ConstraintError> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .take_while(|(_, c)| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
            .map(|(i, c)| i + c.len_utf8())
            .last()
            .unwrap_or(0);
        let token = &rest[..len];
        let value: f64 = token.parse().map_err(|_| self.error("expected a number"))?;
        self.pos += len;
        Ok(value)
    }

    fn count(&mut self) -> Result<usize, ConstraintError> {
        let v = self.number()?;
        if v < 0.0 {
            return Err(self.semantic("bound must be non-negative"));
        }
        if v.fract() != 0.0 {
            return Err(self.error("expected an integer"));
        }
        Ok(v as usize)
    }

    fn non_negative(&mut self, v: f64) -> Result<f64, ConstraintError> {
        if v < 0.0 {
            Err(self.semantic("bound must be non-negative"))
        } else {
            Ok(v)
        }
    }
}

fn parse_line(c: &mut Cursor) -> Result<Constraint, ConstraintError> {
    if c.eat("grouping") {
        c.expect("count")?;
        let le = c.comparator()?;
        let n = c.count()?;
        Ok(Constraint::new(if le {
            ConstraintKind::GroupCountMax(n)
        } else {
            ConstraintKind::GroupCountMin(n)
        }))
    } else if c.eat("class") {
        parse_class(c)
    } else if c.eat("instance") {
        parse_instance(c)
    } else if c.eat("atleast") {
        let quota = c.number()?;
        if !(quota > 0.0 && quota <= 1.0) {
            return Err(c.semantic(format!("coverage fraction {quota} outside (0, 1]")));
        }
        c.expect(":")?;
        c.expect("instance")?;
        let inner = parse_instance(c)?;
        Ok(Constraint::new(ConstraintKind::CoverageFraction {
            quota,
            inner: Box::new(inner),
        }))
    } else {
        Err(c.error("expected 'grouping', 'class', 'instance', or 'atleast'"))
    }
}

fn parse_class(c: &mut Cursor) -> Result<Constraint, ConstraintError> {
    if c.eat("count") {
        let le = c.comparator()?;
        let n = c.count()?;
        Ok(Constraint::new(if le {
            ConstraintKind::ClassCountMax(n)
        } else {
            ConstraintKind::ClassCountMin(n)
        }))
    } else if c.eat("cannot-link") {
        let a = c.name()?;
        let b = c.name()?;
        Ok(Constraint::new(ConstraintKind::CannotLink(
            a.into(),
            b.into(),
        )))
    } else if c.eat("must-link") {
        let a = c.name()?;
        let b = c.name()?;
        Ok(Constraint::new(ConstraintKind::MustLink(
            a.into(),
            b.into(),
        )))
    } else if c.eat("distinct") {
        c.expect("(")?;
        let attr = c.name()?;
        c.expect(")")?;
        c.expect("<=")?;
        let n = c.count()?;
        Ok(Constraint::new(ConstraintKind::ClassAttrDistinctMax {
            attr,
            max: n,
        }))
    } else {
        Err(c.error("expected 'count', 'cannot-link', 'must-link', or 'distinct'"))
    }
}

fn parse_instance(c: &mut Cursor) -> Result<Constraint, ConstraintError> {
    for agg in ["distinct", "sum", "avg"] {
        // peek: aggregate must be followed by '('
        let saved = c.pos;
        if c.eat(agg) {
            if c.eat("(") {
                let attr = c.name()?;
                c.expect(")")?;
                let le = c.comparator()?;
                let v = c.number()?;
                let v = c.non_negative(v)?;
                let kind = match (agg, le) {
                    ("distinct", true) => ConstraintKind::InstanceDistinctMax {
                        attr,
                        max: to_count(c, v)?,
                    },
                    ("distinct", false) => ConstraintKind::InstanceDistinctMin {
                        attr,
                        min: to_count(c, v)?,
                    },
                    ("sum", true) => ConstraintKind::InstanceSumMax { attr, max: v },
                    ("sum", false) => ConstraintKind::InstanceSumMin { attr, min: v },
                    ("avg", true) => ConstraintKind::InstanceAvgMax { attr, max: v },
                    ("avg", false) => ConstraintKind::InstanceAvgMin { attr, min: v },
                    _ => unreachable!(),
                };
                return Ok(Constraint::new(kind));
            }
            c.pos = saved;
        }
    }
    if c.eat("duration") {
        c.expect("<=")?;
        let v = c.number()?;
        let v = c.non_negative(v)?;
        Ok(Constraint::new(ConstraintKind::InstanceDurationMax {
            seconds: v,
        }))
    } else if c.eat("maxgap") {
        c.expect("<=")?;
        let v = c.number()?;
        let v = c.non_negative(v)?;
        Ok(Constraint::new(ConstraintKind::InstanceMaxGap {
            seconds: v,
        }))
    } else if c.eat("perclass") {
        c.expect("<=")?;
        let n = c.count()?;
        if n == 0 {
            return Err(c.semantic("per-class cardinality must be at least 1"));
        }
        Ok(Constraint::new(
            ConstraintKind::InstanceClassCardinalityMax(n),
        ))
    } else {
        Err(c.error("expected 'distinct', 'sum', 'avg', 'duration', 'maxgap', or 'perclass'"))
    }
}

fn to_count(c: &Cursor, v: f64) -> Result<usize, ConstraintError> {
    if v.fract() != 0.0 {
        Err(ConstraintError::Syntax {
            line: c.line_no,
            column: c.pos,
            message: "expected an integer".into(),
        })
    } else {
        Ok(v as usize)
    }
}
