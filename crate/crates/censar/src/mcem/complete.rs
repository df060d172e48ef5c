//! Complete-data log-likelihood of the censored SAR model and its analytic
//! score and Hessian.
//!
//! With `A = A(rho)` and residual `r = A y - X beta`:
//!
//! ```text
//! l(theta) = -(N/2) log(2 pi sigma^2) + log|A| - r'r / (2 sigma^2)
//! ```
//!
//! The determinant derivatives enter through Jacobi's formula,
//! `d log|A| / d rho_k = -tr(B W_k)` and
//! `d tr(B W_k) / d rho_l = tr(B W_l B W_k)` with `B = A^{-1}`.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::Result;
use crate::mcem::{CensoredNetwork, Theta};
use crate::net::{SarOperator, WeightSet};

/// Trace terms that depend on `rho` only: `tr(B W_k)` and
/// `tr(B W_l B W_k)`. Computed once per evaluation point and shared across
/// the Monte Carlo draws of the Louis approximation.
pub(crate) struct SarTraces {
    pub tr_bw: Array1<f64>,
    /// `tr_bwbw[[k, l]] = tr(B W_l B W_k)` (symmetric in `(k, l)`).
    pub tr_bwbw: Array2<f64>,
}

impl SarTraces {
    pub fn compute(op: &SarOperator, ws: &WeightSet) -> Result<Self> {
        let q = ws.q();
        let b = op.inverse()?;
        let mut tr_bw = Array1::zeros(q);
        for (k, w) in ws.weights().iter().enumerate() {
            let mut acc = 0.0;
            for (r, c, v) in w.iter_entries() {
                acc += v * b[[c, r]];
            }
            tr_bw[k] = acc;
        }
        // Dense products P_k = B W_k, then tr(B W_l B W_k) = <P_l, P_k^T>.
        let n = ws.dim();
        let mut prods: Vec<Array2<f64>> = Vec::with_capacity(q);
        for w in ws.weights() {
            let mut p = Array2::zeros((n, n));
            for (r, c, v) in w.iter_entries() {
                let col_b = b.index_axis(Axis(1), r);
                let mut col_p = p.index_axis_mut(Axis(1), c);
                col_p.scaled_add(v, &col_b);
            }
            prods.push(p);
        }
        let mut tr_bwbw = Array2::zeros((q, q));
        for k in 0..q {
            for l in 0..=k {
                let mut acc = 0.0;
                for i in 0..n {
                    let row_l = prods[l].row(i);
                    let col_k = prods[k].index_axis(Axis(1), i);
                    acc += row_l.dot(&col_k);
                }
                tr_bwbw[[k, l]] = acc;
                tr_bwbw[[l, k]] = acc;
            }
        }
        Ok(Self { tr_bw, tr_bwbw })
    }
}

fn residual(
    theta: &Theta,
    y: &ArrayView1<f64>,
    data: &CensoredNetwork,
    ws: &WeightSet,
) -> (Array1<f64>, Vec<Array1<f64>>) {
    let wy: Vec<Array1<f64>> = ws.apply_all(y);
    let mut ay = y.to_owned();
    for (k, w) in wy.iter().enumerate() {
        ay.scaled_add(-theta.rho[k], w);
    }
    let r = &ay - &data.design().dot(&theta.beta);
    (r, wy)
}

/// Complete-data log-likelihood at `theta` for the completed response `y`.
pub fn complete_loglik(
    theta: &Theta,
    y: &ArrayView1<f64>,
    data: &CensoredNetwork,
    ws: &WeightSet,
) -> Result<f64> {
    let op = SarOperator::factorize(ws, &theta.rho.view())?;
    let n = data.num_edges() as f64;
    let (r, _) = residual(theta, y, data, ws);
    let rss = r.dot(&r);
    Ok(-0.5 * n * (2.0 * std::f64::consts::PI * theta.sigma2).ln() + op.logdet()
        - rss / (2.0 * theta.sigma2))
}

/// Score of the complete-data log-likelihood, ordered `[rho, beta, sigma2]`.
pub fn complete_score(
    theta: &Theta,
    y: &ArrayView1<f64>,
    data: &CensoredNetwork,
    ws: &WeightSet,
) -> Result<Array1<f64>> {
    let op = SarOperator::factorize(ws, &theta.rho.view())?;
    let traces = SarTraces::compute(&op, ws)?;
    Ok(score_with_traces(theta, y, data, ws, &traces))
}

pub(crate) fn score_with_traces(
    theta: &Theta,
    y: &ArrayView1<f64>,
    data: &CensoredNetwork,
    ws: &WeightSet,
    traces: &SarTraces,
) -> Array1<f64> {
    let (q, p) = (ws.q(), data.design().ncols());
    let n = data.num_edges() as f64;
    let s2 = theta.sigma2;
    let (r, wy) = residual(theta, y, data, ws);
    let mut g = Array1::zeros(q + p + 1);
    for k in 0..q {
        g[k] = -traces.tr_bw[k] + r.dot(&wy[k]) / s2;
    }
    let gb = data.design().t().dot(&r) / s2;
    g.slice_mut(ndarray::s![q..q + p]).assign(&gb);
    g[q + p] = -0.5 * n / s2 + r.dot(&r) / (2.0 * s2 * s2);
    g
}

/// Hessian of the complete-data log-likelihood, ordered `[rho, beta,
/// sigma2]`. Symmetric by construction.
pub fn complete_hessian(
    theta: &Theta,
    y: &ArrayView1<f64>,
    data: &CensoredNetwork,
    ws: &WeightSet,
) -> Result<Array2<f64>> {
    let op = SarOperator::factorize(ws, &theta.rho.view())?;
    let traces = SarTraces::compute(&op, ws)?;
    Ok(hessian_with_traces(theta, y, data, ws, &traces))
}

pub(crate) fn hessian_with_traces(
    theta: &Theta,
    y: &ArrayView1<f64>,
    data: &CensoredNetwork,
    ws: &WeightSet,
    traces: &SarTraces,
) -> Array2<f64> {
    let (q, p) = (ws.q(), data.design().ncols());
    let n = data.num_edges() as f64;
    let s2 = theta.sigma2;
    let x = data.design();
    let (r, wy) = residual(theta, y, data, ws);
    let d = q + p + 1;
    let mut h = Array2::zeros((d, d));

    for k in 0..q {
        for l in 0..=k {
            let v = -traces.tr_bwbw[[k, l]] - wy[k].dot(&wy[l]) / s2;
            h[[k, l]] = v;
            h[[l, k]] = v;
        }
    }
    for k in 0..q {
        let xw = x.t().dot(&wy[k]) / s2;
        for j in 0..p {
            h[[k, q + j]] = -xw[j];
            h[[q + j, k]] = -xw[j];
        }
        let v = -r.dot(&wy[k]) / (s2 * s2);
        h[[k, q + p]] = v;
        h[[q + p, k]] = v;
    }
    let xtx = x.t().dot(x);
    for i in 0..p {
        for j in 0..p {
            h[[q + i, q + j]] = -xtx[[i, j]] / s2;
        }
    }
    let xr = x.t().dot(&r) / (s2 * s2);
    for j in 0..p {
        h[[q + j, q + p]] = -xr[j];
        h[[q + p, q + j]] = -xr[j];
    }
    h[[q + p, q + p]] = 0.5 * n / (s2 * s2) - r.dot(&r) / (s2 * s2 * s2);
    h
}
