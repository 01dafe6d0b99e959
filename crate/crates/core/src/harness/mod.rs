//! Experiment orchestration around the engine.

pub mod constants;
pub mod grid;
pub mod hetero;
pub mod monitor;
pub mod partition;
pub mod trajectory;

pub use constants::{smoothness_constants_ab, theorem1_hyperparams, ProblemConstants, TheoremConstants, TheoremHyperParams};
pub use grid::{grid_search, GridCell, GridReport, Selection, TuningGrid};
pub use hetero::{heterogeneity_check, HeteroReport, ScanGrid};
pub use monitor::{clipped_drift_monitor, discrepancy_monitor, lemma_premise, MonitorReport, MonitorStatus, RoundClip, RoundTrace, Violation};
pub use partition::{partition_by_similarity, PartitionSpec};
pub use trajectory::{stationarity_metric, RoundRecord, RunStatus, Stationarity, Trajectory};
