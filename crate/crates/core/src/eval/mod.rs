//! Downstream evaluation on score matrices: zero-shot classification,
//! cross-modal retrieval, ROC detection, label-shuffle robustness and
//! retained-dimension sweeps.

mod classify;
mod misinfo;
mod report;
mod retrieval;
mod robustness;
mod roc;
mod shuffle;
mod sweep;

pub use classify::{argmax_rows, classify, Classification};
pub use misinfo::{misinfo_decision, two_threshold_roc, TwoThresholdRoc};
pub use report::{EvalReport, Metrics, Provenance, Table};
pub use retrieval::{retrieval_metrics, QueryResult, RetrievalReport};
pub use robustness::{robustness_sweep, RobustnessPoint};
pub use roc::{mann_whitney_auc, roc_curve, trapezoid_area, LabeledScores, RocCurve};
pub use shuffle::{shuffle_indices, shuffle_labels, shuffle_plan, ShufflePlan};
pub use sweep::{sweep_s, SweepReport, SweepRow};
