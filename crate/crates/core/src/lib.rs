//! Task assignment for straggler-tolerant distributed matrix-vector
//! multiplication.
//!
//! The matrix `A` is split into `delta` block rows. Each of `n` workers gets
//! an ordered list of `l` tasks, each either an uncoded block `A_j` or a
//! linear combination of blocks, and works through it top to bottom,
//! reporting every block product as it finishes. The master is done as soon
//! as the products received so far determine `A x`.
//!
//! - [`plan`] and [`state`]: the data model and the exact decodability test.
//! - [`schemes`]: cyclic uncoded, cyclic coded-bottom / coded-top, and MDS plans.
//! - [`bounds`]: closed-form thresholds and resilience values.
//! - [`oracle`]: brute-force ground truth for all of the above.
//! - [`sim`]: timing simulation and a floating-point decoder.

pub mod bounds;
pub mod error;
pub mod field;
pub mod gen;
pub mod linalg;
pub mod oracle;
pub mod plan;
pub mod schemes;
pub mod sim;
pub mod state;

pub use bounds::{BoundReport, Witness};
pub use error::{Error, Result};
pub use field::Fp;
pub use oracle::{OracleReport, ResilienceReport, ThresholdReport};
pub use plan::{validate_plan, AssignmentPlan, Placement, SystemParams, Task, Violation};
pub use schemes::{cauchy, cyclic_coded, cyclic_uncoded, mds_plan, CauchyMatrix, CodedSupport};
pub use state::{is_decodable, processed_equations, EquationSet, StateVector};
