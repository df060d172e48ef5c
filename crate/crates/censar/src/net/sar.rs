use ndarray::{Array1, Array2, ArrayView1, OwnedRepr};
use ndarray_linalg::solve::LUFactorized;
use ndarray_linalg::{Determinant, FactorizeInto, Inverse, ReciprocalConditionNum, Solve};

use crate::error::{Error, Result};
use crate::net::WeightSet;

/// Reciprocal-condition threshold below which `A(rho)` is treated as
/// singular (a pivot has effectively underflowed).
const RCOND_FLOOR: f64 = 1e-13;

/// Factorized `A(rho) = I - sum_k rho_k W_k`, guaranteed feasible:
/// the pivoted LU succeeded, the determinant is strictly positive, and the
/// factorization is not numerically rank-deficient.
pub struct SarOperator {
    rho: Array1<f64>,
    lu: LUFactorized<OwnedRepr<f64>>,
    logdet: f64,
}

/// Materialize `A(rho)` densely.
pub fn dense_a(ws: &WeightSet, rho: &ArrayView1<f64>) -> Array2<f64> {
    assert_eq!(rho.len(), ws.q(), "one rho per weight matrix");
    let mut a = Array2::eye(ws.dim());
    for (k, w) in ws.weights().iter().enumerate() {
        w.add_scaled_to_dense(&mut a, -rho[k]);
    }
    a
}

impl SarOperator {
    /// Factorize `A(rho)` by pivoted LU with sign tracking.
    ///
    /// Returns `Error::InfeasibleRho` when the factorization fails, the
    /// determinant is non-positive, or a pivot underflows; the caller is
    /// expected to shrink the step toward `rho = 0`.
    pub fn factorize(ws: &WeightSet, rho: &ArrayView1<f64>) -> Result<Self> {
        if rho.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidArgument("rho must be finite".into()));
        }
        let infeasible = |reason: String| Error::InfeasibleRho {
            rho: rho.to_vec(),
            reason,
        };
        let a = dense_a(ws, rho);
        let lu = a
            .factorize_into()
            .map_err(|e| infeasible(format!("LU factorization failed: {e}")))?;
        let (sign, ln_det) = lu
            .sln_det()
            .map_err(|e| infeasible(format!("determinant evaluation failed: {e}")))?;
        if sign <= 0.0 || !ln_det.is_finite() {
            return Err(infeasible(format!(
                "determinant is not strictly positive (sign {sign}, log|det| {ln_det})"
            )));
        }
        let rcond = lu
            .rcond()
            .map_err(|e| infeasible(format!("condition estimate failed: {e}")))?;
        if rcond < RCOND_FLOOR {
            return Err(infeasible(format!(
                "factorization is numerically rank-deficient (rcond {rcond:.3e})"
            )));
        }
        Ok(Self {
            rho: rho.to_owned(),
            lu,
            logdet: ln_det,
        })
    }

    #[inline]
    pub fn rho(&self) -> &Array1<f64> {
        &self.rho
    }

    /// `log |A(rho)|`.
    #[inline]
    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    /// `B(rho) v = A(rho)^{-1} v` through the factorized solve.
    pub fn solve(&self, v: &ArrayView1<f64>) -> Result<Array1<f64>> {
        Ok(self.lu.solve(&v.to_owned())?)
    }

    /// Materialize `B(rho)` densely (needed for the `tr(B W_k)` terms).
    pub fn inverse(&self) -> Result<Array2<f64>> {
        Ok(self.lu.inv()?)
    }
}

/// `log |A(rho)|`, or `InfeasibleRho` when the determinant is non-positive
/// or a pivot underflows.
pub fn logdet_a(ws: &WeightSet, rho: &ArrayView1<f64>) -> Result<f64> {
    SarOperator::factorize(ws, rho).map(|op| op.logdet())
}

/// `B(rho) v` via the factorized solve; `B` is never formed densely here.
pub fn apply_b(ws: &WeightSet, rho: &ArrayView1<f64>, v: &ArrayView1<f64>) -> Result<Array1<f64>> {
    SarOperator::factorize(ws, rho)?.solve(v)
}
