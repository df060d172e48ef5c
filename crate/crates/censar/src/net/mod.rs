//! Network linear algebra: the edge vectorization scheme, the endogenous
//! weight matrices, and the `A(rho)` / `B(rho)` operators.

mod edge;
mod sar;
mod weights;

pub use edge::EdgeIndex;
pub use sar::{apply_b, dense_a, logdet_a, SarOperator};
pub use weights::{build_weights, SparseWeights, WeightSet};
