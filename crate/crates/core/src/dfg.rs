//! Directly-follows graph construction, pre/post set queries, exclusivity
//! checks, and DOT export.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::log::{ClassSet, EventClass, EventLog};

/// Directed graph over event classes with directly-follows frequencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfg {
    nodes: ClassSet,
    edges: BTreeMap<(EventClass, EventClass), u64>,
    start_classes: ClassSet,
    end_classes: ClassSet,
}

impl Dfg {
    /// Builds the DFG of a log: edge `(a, b)` with count `n` iff events of
    /// class `a` are immediately followed by class `b` exactly `n` times.
    pub fn from_log(log: &EventLog) -> Dfg {
        let mut edges: BTreeMap<(EventClass, EventClass), u64> = BTreeMap::new();
        let mut start_classes = ClassSet::new();
        let mut end_classes = ClassSet::new();
        for trace in log.traces() {
            let events = trace.events();
            start_classes.insert(events[0].class.clone());
            end_classes.insert(events[events.len() - 1].class.clone());
            for pair in events.windows(2) {
                let key = (pair[0].class.clone(), pair[1].class.clone());
                *edges.entry(key).or_insert(0) += 1;
            }
        }
        Dfg {
            nodes: log.classes().clone(),
            edges,
            start_classes,
            end_classes,
        }
    }

    pub fn nodes(&self) -> &ClassSet {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<(EventClass, EventClass), u64> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn start_classes(&self) -> &ClassSet {
        &self.start_classes
    }

    pub fn end_classes(&self) -> &ClassSet {
        &self.end_classes
    }

    pub fn has_edge(&self, from: &EventClass, to: &EventClass) -> bool {
        self.edges.contains_key(&(from.clone(), to.clone()))
    }

    pub fn successors<'s>(
        &'s self,
        class: &'s EventClass,
    ) -> impl Iterator<Item = &'s EventClass> + 's {
        self.edges
            .iter()
            .filter(move |((a, _), _)| a == class)
            .map(|((_, b), _)| b)
    }

    pub fn predecessors<'s>(
        &'s self,
        class: &'s EventClass,
    ) -> impl Iterator<Item = &'s EventClass> + 's {
        self.edges
            .iter()
            .filter(move |((_, b), _)| b == class)
            .map(|((a, _), _)| a)
    }

    fn check_subset(&self, set: &ClassSet) -> Result<(), DfgError> {
        for c in set {
            if !self.nodes.contains(c) {
                return Err(DfgError::UnknownClass {
                    class: c.name().to_string(),
                });
            }
        }
        Ok(())
    }

    /// External predecessors of a class set: `{c ∉ g | ∃ x ∈ g: edge (c, x)}`.
    pub fn pre_set(&self, set: &ClassSet) -> Result<ClassSet, DfgError> {
        self.check_subset(set)?;
        Ok(self
            .edges
            .keys()
            .filter(|(a, b)| set.contains(b) && !set.contains(a))
            .map(|(a, _)| a.clone())
            .collect())
    }

    /// External successors, mirroring [`Dfg::pre_set`] over outgoing edges.
    pub fn post_set(&self, set: &ClassSet) -> Result<ClassSet, DfgError> {
        self.check_subset(set)?;
        Ok(self
            .edges
            .keys()
            .filter(|(a, b)| set.contains(a) && !set.contains(b))
            .map(|(_, b)| b.clone())
            .collect())
    }

    /// Edge-level exclusivity: no directly-follows edge connects the two
    /// disjoint sets in either direction. This is the fast check used when
    /// merging behavioral alternatives.
    pub fn edge_exclusive(&self, g1: &ClassSet, g2: &ClassSet) -> Result<bool, DfgError> {
        self.check_subset(g1)?;
        self.check_subset(g2)?;
        if !g1.is_disjoint(g2) {
            return Err(DfgError::NotDisjoint);
        }
        Ok(!self
            .edges
            .keys()
            .any(|(a, b)| (g1.contains(a) && g2.contains(b)) || (g2.contains(a) && g1.contains(b))))
    }

    /// Trace-level exclusivity: no trace contains events of classes from both
    /// sets. Strictly stronger than [`Dfg::edge_exclusive`] on most logs; the
    /// request-handling sample log has class pairs that are
    /// edge-exclusive yet co-occur within a restarted trace.
    pub fn exclusive(
        &self,
        log: &EventLog,
        g1: &ClassSet,
        g2: &ClassSet,
    ) -> Result<bool, DfgError> {
        self.check_subset(g1)?;
        self.check_subset(g2)?;
        if !g1.is_disjoint(g2) {
            return Err(DfgError::NotDisjoint);
        }
        Ok(!log
            .traces()
            .iter()
            .any(|trace| !trace.classes().is_disjoint(g1) && !trace.classes().is_disjoint(g2)))
    }

    /// Renders the graph as deterministic DOT text. With `keep_fraction = f`,
    /// only the `⌈f·|E|⌉` most frequent edges are kept; frequency ties are
    /// broken by lexicographic edge name so the output is stable.
    pub fn to_dot(&self, keep_fraction: Option<f64>) -> String {
        let mut edges: Vec<(&(EventClass, EventClass), &u64)> = self.edges.iter().collect();
        if let Some(f) = keep_fraction {
            let f = f.clamp(f64::MIN_POSITIVE, 1.0);
            let keep = ((f * edges.len() as f64).ceil() as usize).min(edges.len());
            edges.sort_by(|(ka, va), (kb, vb)| vb.cmp(va).then_with(|| ka.cmp(kb)));
            edges.truncate(keep);
            edges.sort_by_key(|(ka, _)| *ka);
        }
        let mut out = String::from("digraph dfg {\n  rankdir=LR;\n");
        for node in &self.nodes {
            out.push_str(&format!("  \"{}\";\n", node.name()));
        }
        for ((a, b), freq) in edges {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                a.name(),
                b.name(),
                freq
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn write_dot(&self, path: &Path, keep_fraction: Option<f64>) -> Result<(), DfgError> {
        let mut writer = BufWriter::new(File::create(path)?);
        writer.write_all(self.to_dot(keep_fraction).as_bytes())?;
        Ok(())
    }
}

/// Lookup index over registered candidate class sets, keyed by their DFG
/// pre/post sets. Maintained by the candidate search so that behavioral
/// alternatives (equal pre and post sets) can be found in one query.
#[derive(Debug)]
pub struct PrePostIndex<'a> {
    dfg: &'a Dfg,
    buckets: BTreeMap<(ClassSet, ClassSet), Vec<ClassSet>>,
}

impl<'a> PrePostIndex<'a> {
    pub fn new(dfg: &'a Dfg) -> Self {
        PrePostIndex {
            dfg,
            buckets: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, set: ClassSet) -> Result<(), DfgError> {
        let key = (self.dfg.pre_set(&set)?, self.dfg.post_set(&set)?);
        let bucket = self.buckets.entry(key).or_default();
        if !bucket.contains(&set) {
            bucket.push(set);
        }
        Ok(())
    }

    /// All previously registered sets whose pre and post sets both equal
    /// those of `set`, excluding `set` itself.
    pub fn equal_pre_post(&self, set: &ClassSet) -> Result<Vec<ClassSet>, DfgError> {
        let key = (self.dfg.pre_set(set)?, self.dfg.post_set(set)?);
        Ok(self
            .buckets
            .get(&key)
            .map(|bucket| bucket.iter().filter(|s| *s != set).cloned().collect())
            .unwrap_or_default())
    }
}

#[derive(Debug, Error)]
pub enum DfgError {
    #[error("unknown event class '{class}'")]
    UnknownClass { class: String },
    #[error("class sets must be disjoint")]
    NotDisjoint,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Parses node/edge sets back out of DOT text produced by [`Dfg::to_dot`].
/// Only used by tests to check the export is faithful.
pub fn parse_dot(text: &str) -> (ClassSet, BTreeMap<(EventClass, EventClass), u64>) {
    let mut nodes = ClassSet::new();
    let mut edges = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim().trim_end_matches(';');
        if let Some((lhs, rhs)) = line.split_once(" -> ") {
            let from = lhs.trim_matches('"');
            let (to, label) = rhs.split_once(" [label=\"").unwrap();
            let freq: u64 = label.trim_end_matches("\"]").parse().unwrap();
            edges.insert(
                (EventClass::new(from), EventClass::new(to.trim_matches('"'))),
                freq,
            );
        } else if line.starts_with('"') {
            nodes.insert(EventClass::new(line.trim_matches('"')));
        }
    }
    (nodes, edges)
}
