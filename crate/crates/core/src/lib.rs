//! Constraint-driven abstraction of event logs.
//!
//! Low-level event logs are lifted to high-level activity logs in three
//! steps: compute candidate groups of event classes that satisfy user
//! constraints (exhaustively or guided by the directly-follows graph),
//! select the exact cover of the class set minimizing a behavioral distance,
//! and rewrite every trace against the chosen grouping.

pub mod abstraction;
pub mod candidates;
pub mod constraints;
pub mod cover;
pub mod dfg;
pub mod distance;
pub mod instances;
pub mod io;
pub mod log;
pub mod metrics;
pub mod sample;

pub use abstraction::{abstract_log, default_names, AbstractionStrategy};
pub use candidates::{
    dfg_candidates, exhaustive_candidates, merge_exclusive, occurs, Beam, Candidate, CandidateSet,
    Provenance,
};
pub use constraints::{
    holds_group, holds_grouping, parse_constraints, parse_constraints_file, CheckingMode,
    Constraint, ConstraintError, ConstraintKind, ConstraintScope, ConstraintSet, Monotonicity,
};
pub use cover::{
    diagnose, solve_exact, solve_greedy, Bounds, CoverProblem, Grouping, InfeasibilityReport,
    SolveError, SolveOutcome, SolveResult,
};
pub use dfg::{Dfg, DfgError, PrePostIndex};
pub use distance::{group_distance, grouping_distance, DistanceCache, DistanceError};
pub use instances::{instances, Group, GroupInstance, SplitRule};
pub use io::{load_log, write_log, ColumnMap, LogFormat};
pub use log::{
    class_set, set_signature, AttributeValue, ClassSet, Event, EventClass, EventLog, LogError,
    Trace,
};
pub use metrics::{dfg_edge_reduction, quality_report, silhouette, size_reduction, QualityReport};
