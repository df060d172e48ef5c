//! Shared oracles for the integration suites. Everything here is an
//! independent route to a quantity the library computes some other way:
//! joint BFGS over all parameters instead of the profiled EM path,
//! accept/reject sampling instead of Gibbs, quadrature instead of the Louis
//! identity.

use censar::mcem::{complete_loglik, complete_score, CensoredNetwork, Theta};
use censar::net::{dense_a, WeightSet};
use censar::optim::{maximize, BfgsOptions};
use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::{Cholesky, Inverse, Solve, UPLO};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Direct SAR maximum likelihood: joint BFGS over `(rho, beta, log sigma2)`
/// on the complete-data likelihood, bypassing the profile/EM machinery.
pub fn direct_mle(data: &CensoredNetwork, ws: &WeightSet, start: &Theta) -> Theta {
    let q = ws.q();
    let p = data.design().ncols();
    let y = data.response().clone();
    let pack = |t: &Theta| {
        let mut v = t.to_vector();
        v[q + p] = t.sigma2.ln();
        v
    };
    let unpack = |v: &Array1<f64>| {
        let mut t = Theta::from_vector(&v.view(), q, p);
        t.sigma2 = v[q + p].exp();
        t
    };
    let f = |v: &Array1<f64>| {
        let t = unpack(v);
        complete_loglik(&t, &y.view(), data, ws).ok()
    };
    let g = |v: &Array1<f64>| {
        let t = unpack(v);
        complete_score(&t, &y.view(), data, ws).ok().map(|mut s| {
            // chain rule for the log-variance coordinate
            s[q + p] *= t.sigma2;
            s
        })
    };
    let out = maximize(
        f,
        g,
        &pack(start),
        &BfgsOptions {
            max_iter: 500,
            grad_tol: 1e-9 * data.num_edges() as f64,
            ..BfgsOptions::default()
        },
    );
    unpack(&out.x)
}

/// Accept/reject draws from an upper-truncated multivariate normal.
pub fn rejection_sample(
    mean: &ArrayView1<f64>,
    cov: &Array2<f64>,
    upper: f64,
    count: usize,
    seed: u64,
) -> Array2<f64> {
    let d = mean.len();
    let l = cov.cholesky(UPLO::Lower).expect("SPD covariance");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Array2::zeros((count, d));
    let mut kept = 0;
    let mut attempts: u64 = 0;
    while kept < count {
        attempts += 1;
        assert!(
            attempts < 200_000_000,
            "rejection sampler starving; pick a milder truncation"
        );
        let z = Array1::from_shape_fn(d, |_| {
            let u: f64 = rand_distr::StandardNormal.sample(&mut rng);
            u
        });
        let x = mean + &l.dot(&z);
        if x.iter().all(|&v| v < upper) {
            out.row_mut(kept).assign(&x);
            kept += 1;
        }
    }
    out
}

/// `P(X1 < c, X2 < c)` for a bivariate normal, by composite Simpson over
/// the conditional representation.
pub fn bivariate_rect_cdf(mu: &ArrayView1<f64>, sigma: &Array2<f64>, c: f64) -> f64 {
    let s1 = sigma[[0, 0]].sqrt();
    let s2 = sigma[[1, 1]].sqrt();
    let r = sigma[[0, 1]] / (s1 * s2);
    let a = (c - mu[0]) / s1;
    let b = (c - mu[1]) / s2;
    if r.abs() > 1.0 - 1e-12 {
        // Degenerate correlation: one-dimensional limit.
        return censar::gauss::cdf(a.min(b));
    }
    let denom = (1.0 - r * r).sqrt();
    let lo = (-9.0f64).min(a - 1.0);
    let n = 40_000usize; // even
    let h = (a - lo) / n as f64;
    let f = |z: f64| censar::gauss::phi(z) * censar::gauss::cdf((b - r * z) / denom);
    let mut acc = f(lo) + f(a);
    for k in 1..n {
        let z = lo + k as f64 * h;
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(z);
    }
    (acc * h / 3.0).clamp(1e-300, 1.0)
}

/// Observed-data log-likelihood for an instance with exactly two censored
/// slots, evaluated by explicit block partitioning and 2-d quadrature.
pub fn observed_loglik_2cens(theta: &Theta, data: &CensoredNetwork, ws: &WeightSet) -> f64 {
    let ne = data.num_edges();
    let a = dense_a(ws, &theta.rho.view());
    let b = a.inv().expect("feasible rho");
    let mu = b.dot(&data.design().dot(&theta.beta));
    let sigma = b.dot(&b.t()) * theta.sigma2;

    let obs = data.observed_idx();
    let mis = data.missing_idx();
    assert_eq!(mis.len(), 2, "oracle requires exactly two censored slots");
    let no = obs.len();

    let gather = |rows: &[usize], cols: &[usize]| {
        Array2::from_shape_fn((rows.len(), cols.len()), |(x, yv)| {
            sigma[[rows[x], cols[yv]]]
        })
    };
    let s_oo = gather(&obs, &obs);
    let s_oo_inv = s_oo.inv().unwrap();
    let resid = Array1::from_shape_fn(no, |k| data.response()[obs[k]] - mu[obs[k]]);

    // log N(y_o; mu_o, Sigma_oo)
    use ndarray_linalg::Determinant;
    let (sign, logdet_oo) = s_oo.sln_det().unwrap();
    assert!(sign > 0.0);
    let quad = resid.dot(&s_oo_inv.dot(&resid));
    let ll_obs = -0.5 * no as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * logdet_oo
        - 0.5 * quad;

    // Conditional of the censored pair, then the rectangle probability.
    let s_mo = gather(&mis, &obs);
    let s_mm = gather(&mis, &mis);
    let mu_c = Array1::from_shape_fn(2, |k| mu[mis[k]]) + s_mo.dot(&s_oo_inv.dot(&resid));
    let s_c = &s_mm - &s_mo.dot(&s_oo_inv).dot(&s_mo.t());
    let prob = bivariate_rect_cdf(&mu_c.view(), &s_c, data.threshold());
    let _ = ne;
    ll_obs + prob.ln()
}

/// Central-difference Hessian of a scalar function of `Theta`.
pub fn numeric_hessian<F>(f: F, theta: &Theta, q: usize, p: usize, rel_step: f64) -> Array2<f64>
where
    F: Fn(&Theta) -> f64,
{
    let v0 = theta.to_vector();
    let d = v0.len();
    let mut h = Array2::zeros((d, d));
    let step = |i: usize| rel_step * v0[i].abs().max(0.1);
    for i in 0..d {
        for j in 0..=i {
            let (hi, hj) = (step(i), step(j));
            let eval = |si: f64, sj: f64| {
                let mut v = v0.clone();
                v[i] += si;
                v[j] += sj;
                f(&Theta::from_vector(&v.view(), q, p))
            };
            let val = if i == j {
                let f0 = eval(0.0, 0.0);
                (eval(hi, 0.0) - 2.0 * f0 + eval(-hi, 0.0)) / (hi * hi)
            } else {
                (eval(hi, hj) - eval(hi, -hj) - eval(-hi, hj) + eval(-hi, -hj))
                    / (4.0 * hi * hj)
            };
            h[[i, j]] = val;
            h[[j, i]] = val;
        }
    }
    h
}

/// Simulate a SAR response on the standard weights with design rows
/// `N(1, I)`, returning `(X, latent)`.
pub fn simulate_latent(
    ws: &WeightSet,
    rho: &Array1<f64>,
    beta: &Array1<f64>,
    sigma: f64,
    seed: u64,
) -> (Array2<f64>, Array1<f64>) {
    let ne = ws.dim();
    let p = beta.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((ne, p), |_| {
        let u: f64 = rand_distr::StandardNormal.sample(&mut rng);
        1.0 + u
    });
    let eps = Array1::from_shape_fn(ne, |_| {
        let u: f64 = rand_distr::StandardNormal.sample(&mut rng);
        sigma * u
    });
    let a = dense_a(ws, &rho.view());
    let z = a.solve(&(x.dot(beta) + &eps)).unwrap();
    (x, z)
}

/// Censor everything at or below the empirical `frac` quantile.
pub fn censor_at_quantile(
    ws: &WeightSet,
    x: Array2<f64>,
    z: &Array1<f64>,
    frac: f64,
    labels: Vec<String>,
) -> CensoredNetwork {
    let ne = z.len();
    let n_cens = ((ne as f64) * frac).round() as usize;
    let mut sorted: Vec<f64> = z.to_vec();
    sorted.sort_by(f64::total_cmp);
    let c = if n_cens == 0 {
        sorted[0] - 1.0
    } else {
        sorted[n_cens - 1]
    };
    let observed: Vec<bool> = z.iter().map(|&v| v > c).collect();
    CensoredNetwork::new(*ws.edge_index(), z.clone(), observed, c, x, labels).unwrap()
}
