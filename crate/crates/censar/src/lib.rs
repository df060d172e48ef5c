//! Censored spatial-autoregressive (SAR) network models with multiple
//! endogenous weight matrices.
//!
//! The crate fits the model
//!
//! ```text
//! y = rho_1 W_1 y + ... + rho_q W_q y + X beta + eps,   eps ~ N(0, sigma^2 I)
//! ```
//!
//! on the row-wise vectorization of a directed dyadic network, where the
//! response is censored from below at a common threshold `c` (edges below the
//! threshold are recorded as absent). Estimation is by Monte Carlo EM: the
//! E-step computes first and second moments of the latent edges under a
//! truncated multivariate normal, the M-step maximizes a profile likelihood in
//! `rho` with an analytic gradient, and standard errors come from a Monte
//! Carlo approximation of Louis' observed-information identity.
//!
//! On top of the fitted model, [`forensic`] screens every dyad for
//! under-reporting (the model predicts an edge the data lacks) and
//! over-reporting (the data has an edge the model does not predict), and
//! [`simlab`] provides the synthetic data-generating processes used to
//! validate both the estimator and the screening step.
//!
//! Module map:
//!
//! * [`net`] – edge vectorization, the endogenous weight matrices, and the
//!   `A(rho) = I - sum_k rho_k W_k` operator with a stable log-determinant.
//! * [`tmvn`] – Gaussian conditionals and Gibbs sampling of upper-truncated
//!   multivariate normals.
//! * [`mcem`] – the estimator: complete-data likelihood algebra, E/M steps,
//!   Tobit initialization, the EM driver, and Louis standard errors.
//! * [`forensic`] – edge probabilities, Youden threshold, the
//!   under-/over-reporting networks, and node-level summaries.
//! * [`simlab`] – simulation studies (estimator validation and detection
//!   power) with their evaluation metrics.

pub mod error;
pub mod forensic;
pub mod gauss;
pub mod mcem;
pub mod net;
pub mod optim;
pub mod seed;
pub mod simlab;
pub mod tmvn;

pub use error::{Error, Result};
pub use mcem::{CensoredNetwork, FitConfig, FitResult, Theta};
pub use net::{build_weights, EdgeIndex, SarOperator, WeightSet};
pub use seed::derive_seed;
