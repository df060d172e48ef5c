//! Profile likelihood in `rho` after substituting the closed-form optima of
//! `beta` and `sigma^2`.
//!
//! With `y* = y_star`, `H` the hat matrix of `X`, and the expected quadratic
//! form
//!
//! ```text
//! S(rho)  = tr((A'A)_mm Sigma_c) + y*' A'A y*
//! D(rho)  = S(rho) - y*' A'H A y*               (= N sigma2_hat(rho))
//! Qt(rho) = log|A(rho)| - (N/2) log D(rho)  (+ constant)
//! ```
//!
//! Everything except `log|A|` and `tr(B W_k)` reduces to polynomials in
//! `rho` whose coefficients are assembled once per E-step: traces of the
//! weight products against `Sigma_c`, and Gram matrices of
//! `[y*, W_1 y*, ..., W_q y*]`, plain and projected through the thin QR of
//! `X`. The hat matrix itself is never materialized.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use ndarray_linalg::{Diag, SolveTriangular, UPLO, QR};

use crate::error::{Error, Result};
use crate::mcem::{CensoredNetwork, EStepMoments, Theta};
use crate::net::{SarOperator, WeightSet};

/// Thin QR of the design matrix, computed once per fit.
pub struct DesignQr {
    q1: Array2<f64>,
    r: Array2<f64>,
}

impl DesignQr {
    pub fn new(x: &ArrayView2<f64>) -> Result<Self> {
        let (q1, r) = x.qr().map_err(Error::Linalg)?;
        let diag_min = r.diag().iter().fold(f64::INFINITY, |a, &b| a.min(b.abs()));
        let diag_max = r.diag().iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if diag_max == 0.0 || diag_min < 1e-12 * diag_max {
            return Err(Error::InvalidArgument(
                "design matrix is rank deficient".into(),
            ));
        }
        Ok(Self { q1, r })
    }

    /// `Q1' v` (coordinates of the projection onto the column space).
    pub fn project(&self, v: &ArrayView1<f64>) -> Array1<f64> {
        self.q1.t().dot(v)
    }

    /// Solve `R beta = Q1' v`, i.e. the least-squares coefficients of `v`.
    pub fn solve_coef(&self, v: &ArrayView1<f64>) -> Result<Array1<f64>> {
        let rhs = self.project(v);
        self.r
            .solve_triangular(UPLO::Upper, Diag::NonUnit, &rhs)
            .map_err(Error::Linalg)
    }
}

/// The profiled EM objective for one E-step's moments.
pub struct ProfileObjective<'a> {
    ws: &'a WeightSet,
    qr: &'a DesignQr,
    n_edges: f64,
    /// `u[0] = y*`, `u[k] = W_k y*`.
    u: Vec<Array1<f64>>,
    /// Gram matrix of `u` minus Gram matrix of the projections `Q1'u`.
    resid_gram: Array2<f64>,
    /// `tr(Sigma_c)`.
    tr_sigma: f64,
    /// `t[k] = tr((W_k)_mm Sigma_c)`.
    t_lin: Array1<f64>,
    /// `t_quad[[k, l]] = tr((W_k' W_l)_mm Sigma_c)` (symmetric).
    t_quad: Array2<f64>,
}

impl<'a> ProfileObjective<'a> {
    pub fn new(
        moments: &EStepMoments,
        data: &'a CensoredNetwork,
        ws: &'a WeightSet,
        qr: &'a DesignQr,
    ) -> Result<Self> {
        let q = ws.q();
        let y_star = &moments.y_star;
        let mut u: Vec<Array1<f64>> = Vec::with_capacity(q + 1);
        u.push(y_star.clone());
        for w in ws.weights() {
            u.push(w.matvec(&y_star.view()));
        }
        let proj: Vec<Array1<f64>> = u.iter().map(|v| qr.project(&v.view())).collect();
        let mut resid_gram = Array2::zeros((q + 1, q + 1));
        for i in 0..=q {
            for j in 0..=i {
                let g = u[i].dot(&u[j]) - proj[i].dot(&proj[j]);
                resid_gram[[i, j]] = g;
                resid_gram[[j, i]] = g;
            }
        }

        let nm = moments.missing_idx.len();
        let (tr_sigma, t_lin, t_quad) = if nm == 0 {
            (0.0, Array1::zeros(q), Array2::zeros((q, q)))
        } else {
            let sigma = &moments.sigma_c;
            let pos = moments.missing_positions(data.num_edges());
            let tr_sigma = sigma.diag().sum();
            let mut t_lin = Array1::zeros(q);
            for (k, w) in ws.weights().iter().enumerate() {
                let mut acc = 0.0;
                for (r, c, v) in w.iter_entries() {
                    if let (Some(pr), Some(pc)) = (pos[r], pos[c]) {
                        acc += v * sigma[[pc, pr]];
                    }
                }
                t_lin[k] = acc;
            }
            // t_quad[k][l] = sum over entries (r,c,v) of W_k with c missing
            // of v * (W_l[:, m] Sigma_c)[r, pos(c)].
            let mut t_quad = Array2::zeros((q, q));
            for (l, wl) in ws.weights().iter().enumerate() {
                let mut g_l = Array2::<f64>::zeros((data.num_edges(), nm));
                for (r, c, v) in wl.iter_entries() {
                    if let Some(pc) = pos[c] {
                        let mut row = g_l.row_mut(r);
                        row.scaled_add(v, &sigma.row(pc));
                    }
                }
                for (k, wk) in ws.weights().iter().enumerate() {
                    let mut acc = 0.0;
                    for (r, c, v) in wk.iter_entries() {
                        if let Some(pc) = pos[c] {
                            acc += v * g_l[[r, pc]];
                        }
                    }
                    t_quad[[k, l]] = acc;
                }
            }
            let t_sym = (&t_quad + &t_quad.t()) * 0.5;
            (tr_sigma, t_lin, t_sym)
        };

        Ok(Self {
            ws,
            qr,
            n_edges: data.num_edges() as f64,
            u,
            resid_gram,
            tr_sigma,
            t_lin,
            t_quad,
        })
    }

    /// Expected quadratic form `S(rho)`.
    pub fn s_star(&self, rho: &ArrayView1<f64>) -> f64 {
        let q = self.ws.q();
        let mut trace = self.tr_sigma;
        for k in 0..q {
            trace -= 2.0 * rho[k] * self.t_lin[k];
            for l in 0..q {
                trace += rho[k] * rho[l] * self.t_quad[[k, l]];
            }
        }
        let mut mean = self.u[0].dot(&self.u[0]);
        for k in 0..q {
            mean -= 2.0 * rho[k] * self.u[0].dot(&self.u[k + 1]);
            for l in 0..q {
                mean += rho[k] * rho[l] * self.u[k + 1].dot(&self.u[l + 1]);
            }
        }
        trace + mean
    }

    /// `D(rho) = S(rho) - y*' A'HA y*`, which is `N` times the profiled
    /// variance; positive at every feasible point.
    pub fn profiled_deviance(&self, rho: &ArrayView1<f64>) -> f64 {
        let q = self.ws.q();
        let mut trace = self.tr_sigma;
        for k in 0..q {
            trace -= 2.0 * rho[k] * self.t_lin[k];
            for l in 0..q {
                trace += rho[k] * rho[l] * self.t_quad[[k, l]];
            }
        }
        let mut resid = self.resid_gram[[0, 0]];
        for k in 0..q {
            resid -= 2.0 * rho[k] * self.resid_gram[[0, k + 1]];
            for l in 0..q {
                resid += rho[k] * rho[l] * self.resid_gram[[k + 1, l + 1]];
            }
        }
        trace + resid
    }

    fn deviance_gradient(&self, rho: &ArrayView1<f64>) -> Array1<f64> {
        let q = self.ws.q();
        Array1::from_shape_fn(q, |k| {
            let mut d = -2.0 * (self.t_lin[k] + self.resid_gram[[0, k + 1]]);
            for l in 0..q {
                d += 2.0 * rho[l] * (self.t_quad[[k, l]] + self.resid_gram[[k + 1, l + 1]]);
            }
            d
        })
    }

    /// Profiled objective (up to an additive constant); `None` when `rho`
    /// is infeasible or the deviance is non-positive.
    pub fn value(&self, rho: &ArrayView1<f64>) -> Option<f64> {
        let op = SarOperator::factorize(self.ws, rho).ok()?;
        let d = self.profiled_deviance(rho);
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        Some(op.logdet() - 0.5 * self.n_edges * d.ln())
    }

    /// Analytic gradient of [`Self::value`]; `None` under the same
    /// conditions.
    pub fn grad(&self, rho: &ArrayView1<f64>) -> Option<Array1<f64>> {
        self.value_and_grad(rho).map(|(_, g)| g)
    }

    /// Objective and gradient from a single factorization.
    pub fn value_and_grad(&self, rho: &ArrayView1<f64>) -> Option<(f64, Array1<f64>)> {
        let op = SarOperator::factorize(self.ws, rho).ok()?;
        let d = self.profiled_deviance(rho);
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let value = op.logdet() - 0.5 * self.n_edges * d.ln();
        let b = op.inverse().ok()?;
        let dgrad = self.deviance_gradient(rho);
        let q = self.ws.q();
        let mut g = Array1::zeros(q);
        for (k, w) in self.ws.weights().iter().enumerate() {
            let mut tr_bw = 0.0;
            for (r, c, v) in w.iter_entries() {
                tr_bw += v * b[[c, r]];
            }
            g[k] = -tr_bw - 0.5 * self.n_edges * dgrad[k] / d;
        }
        Some((value, g))
    }

    /// Closed-form `beta(rho)` through the QR of `X`.
    pub fn beta_hat(&self, rho: &ArrayView1<f64>) -> Result<Array1<f64>> {
        let q = self.ws.q();
        let mut ay = self.u[0].clone();
        for k in 0..q {
            ay.scaled_add(-rho[k], &self.u[k + 1]);
        }
        self.qr.solve_coef(&ay.view())
    }

    /// Closed-form `sigma2(rho) = D(rho) / N`.
    pub fn sigma2_hat(&self, rho: &ArrayView1<f64>) -> f64 {
        self.profiled_deviance(rho) / self.n_edges
    }
}

/// The EM objective `Q(theta | theta0)` evaluated directly (the unprofiled
/// form), used to validate the profile algebra.
pub fn q_function(
    theta: &Theta,
    moments: &EStepMoments,
    data: &CensoredNetwork,
    ws: &WeightSet,
) -> Result<f64> {
    let op = SarOperator::factorize(ws, &theta.rho.view())?;
    let a = crate::net::dense_a(ws, &theta.rho.view());
    let ata = a.t().dot(&a);
    let nm = moments.missing_idx.len();
    let y_star = &moments.y_star;
    let n = data.num_edges() as f64;

    let mut trace = 0.0;
    for r in 0..nm {
        for c in 0..nm {
            trace +=
                ata[[moments.missing_idx[r], moments.missing_idx[c]]] * moments.sigma_c[[c, r]];
        }
    }
    let ay = a.dot(y_star);
    let s_star = trace + ay.dot(&ay);
    let xb = data.design().dot(&theta.beta);
    let cross = xb.dot(&ay);
    let bb = xb.dot(&xb);
    Ok(
        -0.5 * n * (2.0 * std::f64::consts::PI * theta.sigma2).ln() + op.logdet()
            - (s_star - 2.0 * cross + bb) / (2.0 * theta.sigma2),
    )
}
