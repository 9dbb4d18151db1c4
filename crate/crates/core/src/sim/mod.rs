//! Event-driven simulation of a distributed multiply and the floating-point
//! decoder that reconstructs `A x` from partial results.

pub mod cost;
pub mod experiment;
pub mod matrix_io;
pub mod numeric;
pub mod speed;
pub mod trial;

pub use cost::CostModel;
pub use experiment::{
    run_experiment, Experiment, ExperimentConfig, ExperimentResult, LabeledPlan, PlanSummary,
    TrialRecord,
};
pub use matrix_io::SparseMatrix;
pub use numeric::{numeric_decode, split_matrix, worker_products, BlockLayout, BlockProduct};
pub use speed::SpeedModel;
pub use trial::{run_trial, TrialResult};
