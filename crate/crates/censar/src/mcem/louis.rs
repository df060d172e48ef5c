//! Louis-formula observed information, approximated by Monte Carlo.
//!
//! The observed information decomposes into the conditional expectation of
//! the complete-data information minus the conditional covariance of the
//! complete-data score. Both expectations are approximated by `w` completed
//! responses drawn from the truncated conditional of the missing block at
//! the fitted parameters:
//!
//! ```text
//! I_obs ~= (1/w) sum_s [ -H_s - (g_s - gbar)(g_s - gbar)' ]
//! ```
//!
//! The `rho`-trace terms of score and Hessian do not depend on the
//! response, so they are computed once and shared across draws.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mcem::complete::{hessian_with_traces, score_with_traces};
use crate::mcem::{CensoredNetwork, LatentConditional, SarTraces, Theta};
use crate::net::{SarOperator, WeightSet};
use crate::seed::{derive_seed, tags};
use crate::tmvn::{sample_truncated, GibbsConfig, TruncSpec};

/// Louis-approximation output.
#[derive(Debug, Clone)]
pub struct LouisOutcome {
    /// Square roots of the diagonal of `vcov`; NaN when the Louis matrix is
    /// not positive definite.
    pub std_errors: Array1<f64>,
    pub vcov: Array2<f64>,
    /// The approximated observed information.
    pub louis_matrix: Array2<f64>,
    /// Its eigenvalues (ascending), reported for diagnostics.
    pub eigenvalues: Array1<f64>,
    /// False when the information matrix was not positive definite, which
    /// signals non-convergence or too few draws.
    pub positive_definite: bool,
    pub draws_used: usize,
}

/// Monte Carlo Louis standard errors at `theta_hat` with `w` completed
/// draws.
pub fn louis_se(
    theta_hat: &Theta,
    data: &CensoredNetwork,
    ws: &WeightSet,
    w: usize,
    gibbs: &GibbsConfig,
    seed: u64,
) -> Result<LouisOutcome> {
    if w < 2 {
        return Err(Error::InvalidArgument(
            "Louis approximation needs at least two draws".into(),
        ));
    }
    let op = SarOperator::factorize(ws, &theta_hat.rho.view())?;
    let traces = SarTraces::compute(&op, ws)?;
    let d = ws.q() + data.design().ncols() + 1;
    let nm = data.n_missing();

    if nm == 0 {
        // No censoring: every completed draw is the data itself, the score
        // covariance vanishes, and the Louis matrix is the complete-data
        // observed information exactly.
        let y = data.response();
        let h = hessian_with_traces(theta_hat, &y.view(), data, ws, &traces);
        let louis = h.mapv(|v| -v);
        return finalize(louis, 1);
    }

    let cond = LatentConditional::build(theta_hat, data, ws)?;
    let spec = TruncSpec::from_precision(
        cond.mu_cond.clone(),
        cond.ata_mm.mapv(|v| v / theta_hat.sigma2),
        data.threshold(),
    )?;
    let draws = sample_truncated(&spec, w, gibbs, derive_seed(seed, &[tags::LOUIS]))?;

    // Per-draw score and Hessian, accumulated in fixed chunk order so the
    // result does not depend on thread scheduling.
    let chunk = 64usize;
    let n_chunks = w.div_ceil(chunk);
    let partials: Vec<(Array1<f64>, Array2<f64>, Array2<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * chunk;
            let hi = ((ci + 1) * chunk).min(w);
            let mut sum_g = Array1::<f64>::zeros(d);
            let mut sum_gg = Array2::<f64>::zeros((d, d));
            let mut sum_negh = Array2::<f64>::zeros((d, d));
            let mut y_s = data.response().clone();
            for s in lo..hi {
                for (r, &slot) in cond.missing_idx.iter().enumerate() {
                    y_s[slot] = draws[[s, r]];
                }
                let g = score_with_traces(theta_hat, &y_s.view(), data, ws, &traces);
                let h = hessian_with_traces(theta_hat, &y_s.view(), data, ws, &traces);
                for i in 0..d {
                    for j in 0..d {
                        sum_gg[[i, j]] += g[i] * g[j];
                        sum_negh[[i, j]] -= h[[i, j]];
                    }
                }
                sum_g += &g;
            }
            (sum_g, sum_gg, sum_negh)
        })
        .collect();

    let mut sum_g = Array1::<f64>::zeros(d);
    let mut sum_gg = Array2::<f64>::zeros((d, d));
    let mut sum_negh = Array2::<f64>::zeros((d, d));
    for (g, gg, nh) in partials {
        sum_g += &g;
        sum_gg += &gg;
        sum_negh += &nh;
    }
    let wf = w as f64;
    let gbar = sum_g.mapv(|v| v / wf);
    let mut louis = Array2::<f64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            louis[[i, j]] = sum_negh[[i, j]] / wf - (sum_gg[[i, j]] / wf - gbar[i] * gbar[j]);
        }
    }
    // Exact symmetry for the eigendecomposition.
    let louis = (&louis + &louis.t()) * 0.5;
    finalize(louis, w)
}

fn finalize(louis: Array2<f64>, draws_used: usize) -> Result<LouisOutcome> {
    let d = louis.nrows();
    let (vals, vecs) = louis.eigh(UPLO::Lower).map_err(Error::Linalg)?;
    let positive_definite = vals.iter().all(|&l| l > 0.0);
    if !positive_definite {
        return Ok(LouisOutcome {
            std_errors: Array1::from_elem(d, f64::NAN),
            vcov: Array2::from_elem((d, d), f64::NAN),
            louis_matrix: louis,
            eigenvalues: vals,
            positive_definite,
            draws_used,
        });
    }
    let inv_vals = vals.mapv(|l| 1.0 / l);
    let scaled = &vecs * &inv_vals;
    let vcov_raw = scaled.dot(&vecs.t());
    let vcov = (&vcov_raw + &vcov_raw.t()) * 0.5;
    let std_errors = Array1::from_shape_fn(d, |i| vcov[[i, i]].max(0.0).sqrt());
    Ok(LouisOutcome {
        std_errors,
        vcov,
        louis_matrix: louis,
        eigenvalues: vals,
        positive_definite,
        draws_used,
    })
}
