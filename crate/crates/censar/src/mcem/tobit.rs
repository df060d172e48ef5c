//! Left-censored univariate Tobit regression by direct likelihood
//! maximization, used as the pseudolikelihood starting value for the EM
//! loop (the lagged network effects enter as exogenous regressors).
//!
//! The likelihood is maximized in Olsen's reparameterization
//! `(gamma, h) = (beta / sigma, 1 / sigma)`, under which it is globally
//! concave, with a damped Newton iteration.

use ndarray::{concatenate, Array1, Array2, ArrayView1, ArrayView2, Axis};
use ndarray_linalg::{FactorizeC, Solve, SolveC, UPLO};

use crate::error::{Error, Result};
use crate::gauss;
use crate::mcem::{CensoredNetwork, Theta};
use crate::net::{SarOperator, WeightSet};

/// Maximum-likelihood fit of the univariate Tobit model.
#[derive(Debug, Clone)]
pub struct TobitFit {
    pub coef: Array1<f64>,
    pub sigma2: f64,
    pub loglik: f64,
    pub converged: bool,
}

fn log_phi_cdf(z: f64) -> f64 {
    if z > -8.0 {
        gauss::cdf(z).ln()
    } else {
        // log Phi(z) = log phi(z) - log lambda(z), stable in the deep tail.
        -0.5 * z * z - gauss::SQRT_2PI.ln() - gauss::mills_lambda(z).ln()
    }
}

/// Fit a Tobit model with responses `y`, censoring mask `observed`, and
/// left-censoring point `c`, by Newton iteration on the Olsen
/// parameterization.
pub fn fit_tobit(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    observed: &[bool],
    c: f64,
) -> Result<TobitFit> {
    let n = x.nrows();
    let p = x.ncols();
    assert_eq!(y.len(), n);
    assert_eq!(observed.len(), n);
    let n_obs = observed.iter().filter(|&&o| o).count();
    if n_obs == 0 {
        return Err(Error::InvalidArgument(
            "Tobit fit requires at least one observed row".into(),
        ));
    }
    if n_obs <= p {
        return Err(Error::InvalidSize(format!(
            "Tobit fit needs more observed rows ({n_obs}) than regressors ({p})"
        )));
    }

    // Start from least squares on the censored-imputed response.
    let xtx = x.t().dot(x) + Array2::<f64>::eye(p) * 1e-10;
    let xty = x.t().dot(y);
    let b0 = xtx
        .solve(&xty)
        .map_err(|e| Error::Numerical(format!("Tobit start failed: {e}")))?;
    let resid = y - &x.dot(&b0);
    let s0 = (resid.dot(&resid) / n as f64).sqrt().max(1e-3);

    // params = [gamma, h] with gamma = b / sigma, h = 1 / sigma.
    let mut gamma = b0.mapv(|v| v / s0);
    let mut h = 1.0 / s0;

    let loglik = |gamma: &Array1<f64>, h: f64| -> f64 {
        let mut ll = 0.0;
        for i in 0..n {
            let xg = x.row(i).dot(gamma);
            if observed[i] {
                let r = h * y[i] - xg;
                ll += h.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * r * r;
            } else {
                ll += log_phi_cdf(h * c - xg);
            }
        }
        ll
    };

    let mut ll = loglik(&gamma, h);
    let mut converged = false;
    for _ in 0..200 {
        let mut g = Array1::<f64>::zeros(p + 1);
        let mut hess = Array2::<f64>::zeros((p + 1, p + 1));
        for i in 0..n {
            let xi = x.row(i);
            let xg = xi.dot(&gamma);
            if observed[i] {
                let r = h * y[i] - xg;
                for a in 0..p {
                    g[a] += r * xi[a];
                    for b in 0..=a {
                        hess[[a, b]] -= xi[a] * xi[b];
                    }
                    hess[[p, a]] += y[i] * xi[a];
                }
                g[p] += 1.0 / h - r * y[i];
                hess[[p, p]] -= 1.0 / (h * h) + y[i] * y[i];
            } else {
                let z = h * c - xg;
                let lam = gauss::mills_lambda(z);
                let dlam = -lam * (z + lam); // lambda'(z), always in (-1, 0)
                for a in 0..p {
                    g[a] -= lam * xi[a];
                    for b in 0..=a {
                        hess[[a, b]] += dlam * xi[a] * xi[b];
                    }
                    hess[[p, a]] -= dlam * c * xi[a];
                }
                g[p] += lam * c;
                hess[[p, p]] += dlam * c * c;
            }
        }
        for a in 0..=p {
            for b in 0..a {
                hess[[b, a]] = hess[[a, b]];
            }
        }
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm < 1e-9 * (1.0 + ll.abs()) {
            converged = true;
            break;
        }
        // Newton step: solve (-H) delta = g; -H is positive definite under
        // the Olsen parameterization, fall back to a damped solve if the
        // Cholesky fails numerically.
        let neg_h = hess.mapv(|v| -v);
        let delta = match neg_h.factorizec(UPLO::Lower) {
            Ok(f) => f.solvec(&g).map_err(Error::Linalg)?,
            Err(_) => {
                let damped = &neg_h + &(Array2::<f64>::eye(p + 1) * (1e-6 * neg_h[[0, 0]].abs().max(1.0)));
                damped
                    .solve(&g)
                    .map_err(|e| Error::Numerical(format!("Tobit Newton solve failed: {e}")))?
            }
        };
        let mut t = 1.0f64;
        let mut improved = false;
        for _ in 0..40 {
            let gamma_t = &gamma + &(t * &delta.slice(ndarray::s![..p]));
            let h_t = h + t * delta[p];
            if h_t > 1e-12 {
                let ll_t = loglik(&gamma_t, h_t);
                if ll_t.is_finite() && ll_t >= ll - 1e-12 {
                    let step = delta.iter().fold(0.0f64, |m, v| m.max((t * v).abs()));
                    gamma = gamma_t;
                    h = h_t;
                    ll = ll_t;
                    improved = true;
                    if step < 1e-11 * (1.0 + h.abs()) {
                        converged = true;
                    }
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
        if converged {
            break;
        }
    }
    if !(h > 0.0) || !ll.is_finite() {
        return Err(Error::Numerical("Tobit iteration diverged".into()));
    }
    let sigma = 1.0 / h;
    Ok(TobitFit {
        coef: gamma.mapv(|v| v * sigma),
        sigma2: sigma * sigma,
        loglik: ll,
        converged,
    })
}

/// Starting value for the EM loop.
#[derive(Debug, Clone)]
pub struct TobitInit {
    pub theta: Theta,
    /// Tobit failed and the start fell back to censored least squares.
    pub fallback: bool,
    /// `rho` was scaled toward zero to enter the feasible region.
    pub clipped: bool,
}

/// Maximum pseudolikelihood start: a univariate Tobit of the censored
/// response on `[X | W_1 ybar ... W_q ybar]` where `ybar` imputes the
/// threshold at censored slots. `rho` is scaled toward zero if the Tobit
/// point is infeasible for the SAR operator.
pub fn tobit_init(data: &CensoredNetwork, ws: &WeightSet) -> Result<TobitInit> {
    let p = data.design().ncols();
    let q = ws.q();
    // data.response() already holds c at censored slots.
    let ybar = data.response().clone();
    let wy: Vec<Array1<f64>> = ws.apply_all(&ybar.view());
    let mut cols: Vec<ArrayView2<f64>> = vec![data.design().view()];
    let wy_mats: Vec<Array2<f64>> = wy
        .iter()
        .map(|v| v.clone().insert_axis(Axis(1)))
        .collect();
    for m in &wy_mats {
        cols.push(m.view());
    }
    let z = concatenate(Axis(1), &cols).expect("regressor stack");

    let (mut theta, fallback) = match fit_tobit(&z.view(), &ybar.view(), data.mask(), data.threshold())
    {
        Ok(fit) if fit.converged => {
            let beta = fit.coef.slice(ndarray::s![..p]).to_owned();
            let rho = fit.coef.slice(ndarray::s![p..p + q]).to_owned();
            (
                Theta {
                    rho,
                    beta,
                    sigma2: fit.sigma2,
                },
                false,
            )
        }
        _ => {
            // Censored least squares with rho = 0.
            let xtx = data.design().t().dot(data.design());
            let xty = data.design().t().dot(&ybar);
            let beta = xtx
                .solve(&xty)
                .map_err(|e| Error::Numerical(format!("fallback least squares failed: {e}")))?;
            let r = &ybar - &data.design().dot(&beta);
            let sigma2 = (r.dot(&r) / data.num_edges() as f64).max(1e-8);
            (
                Theta {
                    rho: Array1::zeros(q),
                    beta,
                    sigma2,
                },
                true,
            )
        }
    };

    let mut clipped = false;
    for _ in 0..200 {
        if SarOperator::factorize(ws, &theta.rho.view()).is_ok() {
            break;
        }
        theta.rho.mapv_inplace(|r| r * 0.9);
        clipped = true;
    }
    if SarOperator::factorize(ws, &theta.rho.view()).is_err() {
        theta.rho.fill(0.0);
        clipped = true;
    }
    Ok(TobitInit {
        theta,
        fallback,
        clipped,
    })
}
