//! Upper-truncated multivariate normal: Gaussian conditionals, Gibbs
//! sampling, and moment estimation.

mod gibbs;

pub use gibbs::{sample_truncated, GibbsConfig};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use ndarray_linalg::{Cholesky, Eigh, FactorizeC, InverseC, SolveC, UPLO};

use crate::error::{Error, Result};

/// Specification of a multivariate normal truncated componentwise from
/// above at a common scalar bound.
#[derive(Debug, Clone)]
pub struct TruncSpec {
    mean: Array1<f64>,
    precision: Array2<f64>,
    upper: f64,
}

impl TruncSpec {
    /// Build from a covariance matrix.
    ///
    /// Validates symmetry (to 1e-12 relative), positive definiteness, and
    /// that every marginal keeps non-negligible mass below the bound.
    pub fn new(mean: Array1<f64>, cov: Array2<f64>, upper: f64) -> Result<Self> {
        let d = mean.len();
        if cov.shape() != [d, d] {
            return Err(Error::InvalidSize(format!(
                "covariance is {:?}, expected {d}x{d}",
                cov.shape()
            )));
        }
        let scale = cov.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..d {
            for j in (i + 1)..d {
                if (cov[[i, j]] - cov[[j, i]]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidArgument(format!(
                        "covariance is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        for i in 0..d {
            let sd = cov[[i, i]].sqrt();
            if !(sd > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "non-positive marginal variance at coordinate {i}"
                )));
            }
            let alpha = (upper - mean[i]) / sd;
            if alpha <= -8.0 {
                return Err(Error::DegenerateTruncation(format!(
                    "marginal {i} has (c - mean)/sd = {alpha:.2} <= -8"
                )));
            }
        }
        let factor = cov
            .factorizec(UPLO::Lower)
            .map_err(|_| Error::Singular {
                context: "TruncSpec covariance Cholesky".into(),
                cond: condition_estimate(&cov.view()),
            })?;
        let precision = factor.invc().map_err(Error::Linalg)?;
        Ok(Self {
            mean,
            precision: symmetrize(precision),
            upper,
        })
    }

    /// Build directly from a precision matrix (the natural parameterization
    /// for Gibbs full conditionals). Validates positive definiteness and
    /// that the conditional scales keep the bound reachable.
    pub fn from_precision(mean: Array1<f64>, precision: Array2<f64>, upper: f64) -> Result<Self> {
        let d = mean.len();
        if precision.shape() != [d, d] {
            return Err(Error::InvalidSize(format!(
                "precision is {:?}, expected {d}x{d}",
                precision.shape()
            )));
        }
        precision.cholesky(UPLO::Lower).map_err(|_| Error::Singular {
            context: "TruncSpec precision Cholesky".into(),
            cond: condition_estimate(&precision.view()),
        })?;
        for i in 0..d {
            let sd_cond = (1.0 / precision[[i, i]]).sqrt();
            let alpha = (upper - mean[i]) / sd_cond;
            if alpha <= -30.0 {
                return Err(Error::DegenerateTruncation(format!(
                    "conditional scale at coordinate {i} puts the bound {alpha:.1} sd away"
                )));
            }
        }
        Ok(Self {
            mean,
            precision: symmetrize(precision),
            upper,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    #[inline]
    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    #[inline]
    pub fn precision(&self) -> &Array2<f64> {
        &self.precision
    }

    #[inline]
    pub fn upper(&self) -> f64 {
        self.upper
    }
}

/// First two moments estimated from truncated draws.
#[derive(Debug, Clone)]
pub struct MomentEstimate {
    /// Sample mean.
    pub mu_c: Array1<f64>,
    /// Sample covariance (denominator = draw count), symmetrized and
    /// projected onto the PSD cone.
    pub sigma_c: Array2<f64>,
    pub draws_used: usize,
    /// Batch-means Monte Carlo standard errors of `mu_c`.
    pub mc_se: Array1<f64>,
}

/// Gaussian conditional of the missing block given the observed block.
///
/// `observed_idx` indexes the observed coordinates of `mu`/`sigma`; the
/// remaining coordinates form the missing block, kept in ascending index
/// order. Returns the conditional mean and the symmetrized Schur
/// complement.
pub fn conditional_normal(
    mu: &ArrayView1<f64>,
    sigma: &ArrayView2<f64>,
    observed_idx: &[usize],
    y_o: &ArrayView1<f64>,
) -> Result<(Array1<f64>, Array2<f64>)> {
    let d = mu.len();
    assert_eq!(sigma.shape(), [d, d]);
    assert_eq!(observed_idx.len(), y_o.len());
    let mut is_obs = vec![false; d];
    for &i in observed_idx {
        assert!(i < d, "observed index {i} out of range");
        is_obs[i] = true;
    }
    let missing_idx: Vec<usize> = (0..d).filter(|&i| !is_obs[i]).collect();
    let (no, nm) = (observed_idx.len(), missing_idx.len());

    let gather = |rows: &[usize], cols: &[usize]| {
        Array2::from_shape_fn((rows.len(), cols.len()), |(a, b)| {
            sigma[[rows[a], cols[b]]]
        })
    };
    let s_oo = gather(observed_idx, observed_idx);
    let factor = s_oo.factorizec(UPLO::Lower).map_err(|_| Error::Singular {
        context: "conditional_normal Sigma_oo".into(),
        cond: condition_estimate(&s_oo.view()),
    })?;
    let resid = Array1::from_shape_fn(no, |a| y_o[a] - mu[observed_idx[a]]);
    let w = factor.solvec(&resid).map_err(Error::Linalg)?;

    let s_mo = gather(&missing_idx, observed_idx);
    let mean_m =
        Array1::from_shape_fn(nm, |a| mu[missing_idx[a]]) + s_mo.dot(&w);

    // Schur complement: Sigma_mm - Sigma_mo Sigma_oo^{-1} Sigma_om.
    let s_oo_inv = factor.invc().map_err(Error::Linalg)?;
    let s_mm = gather(&missing_idx, &missing_idx);
    let cov = &s_mm - &s_mo.dot(&s_oo_inv).dot(&s_mo.t());
    Ok((mean_m, symmetrize(cov)))
}

/// Sample mean, sample covariance (denominator = count), and batch-means
/// Monte Carlo standard errors of the mean.
///
/// Requires at least two draws. The covariance is symmetrized and any
/// negative eigenvalues introduced by rounding are clipped to zero, so the
/// result is safe to reuse inside quadratic forms and traces.
pub fn estimate_moments(draws: &ArrayView2<f64>) -> MomentEstimate {
    let m = draws.nrows();
    let d = draws.ncols();
    assert!(m >= 2, "at least two draws required");
    let mu_c = draws.mean_axis(Axis(0)).unwrap();
    let centered = draws - &mu_c;
    let sigma_raw = centered.t().dot(&centered) / m as f64;
    let sigma_c = psd_project(symmetrize(sigma_raw));

    // Batch means over the draw sequence.
    let nb = if m >= 4 {
        ((m as f64).sqrt().floor() as usize).max(2).min(m / 2)
    } else {
        0
    };
    let b = if nb > 0 { m / nb } else { 0 };
    let mut mc_se = Array1::zeros(d);
    if b >= 1 && nb >= 2 {
        let mut batch_means = Array2::zeros((nb, d));
        for k in 0..nb {
            let block = draws.slice(ndarray::s![k * b..(k + 1) * b, ..]);
            batch_means
                .row_mut(k)
                .assign(&block.mean_axis(Axis(0)).unwrap());
        }
        let bm_mean = batch_means.mean_axis(Axis(0)).unwrap();
        for j in 0..d {
            let var: f64 = batch_means
                .column(j)
                .iter()
                .map(|v| (v - bm_mean[j]).powi(2))
                .sum::<f64>()
                / (nb as f64 - 1.0);
            mc_se[j] = (var / nb as f64).sqrt();
        }
    }
    MomentEstimate {
        mu_c,
        sigma_c,
        draws_used: m,
        mc_se,
    }
}

pub(crate) fn symmetrize(m: Array2<f64>) -> Array2<f64> {
    let mt = m.t().to_owned();
    (&m + &mt) * 0.5
}

/// Clip negative eigenvalues to zero. Skips the reconstruction when the
/// matrix is already PSD.
pub(crate) fn psd_project(m: Array2<f64>) -> Array2<f64> {
    if m.nrows() == 0 {
        return m;
    }
    if m.nrows() == 1 {
        let mut m = m;
        m[[0, 0]] = m[[0, 0]].max(0.0);
        return m;
    }
    let (vals, vecs) = match m.eigh(UPLO::Lower) {
        Ok(v) => v,
        Err(_) => return m,
    };
    if vals.iter().all(|&l| l >= 0.0) {
        return m;
    }
    let clipped = vals.mapv(|l| l.max(0.0));
    let scaled = &vecs * &clipped;
    symmetrize(scaled.dot(&vecs.t()))
}

fn condition_estimate(m: &ArrayView2<f64>) -> f64 {
    match m.eigh(UPLO::Lower) {
        Ok((vals, _)) => {
            let max = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            let min = vals.iter().fold(f64::INFINITY, |a, &b| a.min(b.abs()));
            if min > 0.0 {
                max / min
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::NAN,
    }
}
