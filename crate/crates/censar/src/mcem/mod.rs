//! The estimator: complete-data likelihood algebra, Monte Carlo E-step,
//! profile-likelihood M-step, Tobit initialization, the EM driver, and
//! Louis-formula standard errors.

mod complete;
mod estep;
mod fit;
mod louis;
mod mstep;
mod profile;
mod tobit;

pub use complete::{complete_hessian, complete_loglik, complete_score};
pub use estep::{e_step, EStepConfig};
pub use fit::{fit, FitConfig, FitIterRecord, FitResult};
pub use louis::{louis_se, LouisOutcome};
pub use mstep::{m_step, MStepOutcome};
pub use profile::{q_function, DesignQr, ProfileObjective};
pub use tobit::{fit_tobit, tobit_init, TobitFit, TobitInit};

pub(crate) use complete::SarTraces;
pub(crate) use estep::LatentConditional;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use ndarray_linalg::QR;

use crate::error::{Error, Result};
use crate::net::{EdgeIndex, SarOperator, WeightSet};

/// One year's vectorized flows: log-responses where observed, a censoring
/// mask, the common threshold, and the design matrix.
#[derive(Debug, Clone)]
pub struct CensoredNetwork {
    edge_index: EdgeIndex,
    /// Full `N`-vector; censored slots hold the threshold `c`.
    y: Array1<f64>,
    observed: Vec<bool>,
    c: f64,
    x: Array2<f64>,
    labels: Vec<String>,
}

impl CensoredNetwork {
    /// Validate and normalize the pieces of a censored network.
    ///
    /// `y` must be at least `c` on every observed slot; censored slots are
    /// overwritten with `c`. The design matrix must have full column rank
    /// with fewer columns than observed slots.
    pub fn new(
        edge_index: EdgeIndex,
        mut y: Array1<f64>,
        observed: Vec<bool>,
        c: f64,
        x: Array2<f64>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let n_edges = edge_index.num_edges();
        if y.len() != n_edges || observed.len() != n_edges || x.nrows() != n_edges {
            return Err(Error::InvalidSize(format!(
                "expected {n_edges} slots; got y={}, mask={}, X rows={}",
                y.len(),
                observed.len(),
                x.nrows()
            )));
        }
        let p = x.ncols();
        if labels.len() != p {
            return Err(Error::InvalidSize(format!(
                "{p} covariates but {} labels",
                labels.len()
            )));
        }
        if !c.is_finite() {
            return Err(Error::InvalidArgument("threshold c must be finite".into()));
        }
        let n_obs = observed.iter().filter(|&&o| o).count();
        if n_obs == 0 {
            return Err(Error::InvalidArgument(
                "all slots are censored; no observed rows to fit".into(),
            ));
        }
        if p >= n_obs {
            return Err(Error::InvalidSize(format!(
                "design has p={p} columns but only {n_obs} observed slots"
            )));
        }
        for (s, (&obs, v)) in observed.iter().zip(y.iter()).enumerate() {
            if obs {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "non-finite response at slot {s}"
                    )));
                }
                if *v < c {
                    return Err(Error::InvalidArgument(format!(
                        "observed response {v} at slot {s} lies below the threshold {c}"
                    )));
                }
            }
        }
        for (s, &obs) in observed.iter().enumerate() {
            if !obs {
                y[s] = c;
            }
        }
        check_full_column_rank(&x.view())?;
        Ok(Self {
            edge_index,
            y,
            observed,
            c,
            x,
            labels,
        })
    }

    #[inline]
    pub fn edge_index(&self) -> &EdgeIndex {
        &self.edge_index
    }

    /// Full response vector (threshold value at censored slots).
    #[inline]
    pub fn response(&self) -> &Array1<f64> {
        &self.y
    }

    #[inline]
    pub fn mask(&self) -> &[bool] {
        &self.observed
    }

    #[inline]
    pub fn threshold(&self) -> f64 {
        self.c
    }

    #[inline]
    pub fn design(&self) -> &Array2<f64> {
        &self.x
    }

    #[inline]
    pub fn covariate_labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edge_index.num_edges()
    }

    pub fn n_observed(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    pub fn n_missing(&self) -> usize {
        self.num_edges() - self.n_observed()
    }

    pub fn observed_idx(&self) -> Vec<usize> {
        (0..self.num_edges())
            .filter(|&s| self.observed[s])
            .collect()
    }

    pub fn missing_idx(&self) -> Vec<usize> {
        (0..self.num_edges())
            .filter(|&s| !self.observed[s])
            .collect()
    }
}

fn check_full_column_rank(x: &ArrayView2<f64>) -> Result<()> {
    let (_, r) = x.qr().map_err(Error::Linalg)?;
    let diag: Vec<f64> = r.diag().iter().map(|v| v.abs()).collect();
    let max = diag.iter().fold(0.0f64, |a, &b| a.max(b));
    if max == 0.0 || diag.iter().any(|&d| d < 1e-10 * max) {
        return Err(Error::InvalidArgument(
            "design matrix is rank deficient".into(),
        ));
    }
    Ok(())
}

/// Parameter vector `(rho, beta, sigma^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta {
    pub rho: Array1<f64>,
    pub beta: Array1<f64>,
    pub sigma2: f64,
}

impl Theta {
    pub fn dim(&self) -> usize {
        self.rho.len() + self.beta.len() + 1
    }

    /// Flatten as `[rho..., beta..., sigma2]`.
    pub fn to_vector(&self) -> Array1<f64> {
        let mut v = Array1::zeros(self.dim());
        let q = self.rho.len();
        let p = self.beta.len();
        v.slice_mut(ndarray::s![..q]).assign(&self.rho);
        v.slice_mut(ndarray::s![q..q + p]).assign(&self.beta);
        v[q + p] = self.sigma2;
        v
    }

    pub fn from_vector(v: &ArrayView1<f64>, q: usize, p: usize) -> Self {
        assert_eq!(v.len(), q + p + 1);
        Theta {
            rho: v.slice(ndarray::s![..q]).to_owned(),
            beta: v.slice(ndarray::s![q..q + p]).to_owned(),
            sigma2: v[q + p],
        }
    }

    /// Feasibility: positive variance and nonsingular `A(rho)` with
    /// positive determinant.
    pub fn validate(&self, ws: &WeightSet) -> Result<()> {
        if !(self.sigma2 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma2 must be positive, got {}",
                self.sigma2
            )));
        }
        SarOperator::factorize(ws, &self.rho.view())?;
        Ok(())
    }

    /// Report labels in vector order: `rho_<effect>`, covariates, `sigma2`.
    pub fn parameter_labels(ws: &WeightSet, data: &CensoredNetwork) -> Vec<String> {
        let mut out: Vec<String> = ws.labels().iter().map(|l| format!("rho_{l}")).collect();
        out.extend(data.covariate_labels().iter().cloned());
        out.push("sigma2".into());
        out
    }
}

/// E-step output: the completed response and the truncated conditional
/// covariance of the missing block, plus the ordering metadata that maps
/// missing slots to covariance rows.
#[derive(Debug, Clone)]
pub struct EStepMoments {
    /// Observed values where observed, truncated conditional means where
    /// missing.
    pub y_star: Array1<f64>,
    /// `N_m x N_m` truncated conditional covariance.
    pub sigma_c: Array2<f64>,
    /// Slots of the missing block, ascending; row `r` of `sigma_c`
    /// corresponds to slot `missing_idx[r]`.
    pub missing_idx: Vec<usize>,
    pub observed_idx: Vec<usize>,
    pub draws_used: usize,
    /// Monte Carlo standard errors of the imputed means.
    pub mc_se: Array1<f64>,
}

impl EStepMoments {
    /// Map slot -> position within the missing block.
    pub fn missing_positions(&self, n_edges: usize) -> Vec<Option<usize>> {
        let mut pos = vec![None; n_edges];
        for (r, &s) in self.missing_idx.iter().enumerate() {
            pos[s] = Some(r);
        }
        pos
    }
}
