//! The Monte Carlo E-step: conditional moments of the censored block under
//! the current parameter value, truncated at the threshold.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gauss;
use crate::mcem::{CensoredNetwork, EStepMoments, Theta};
use crate::net::{dense_a, SarOperator, WeightSet};
use crate::seed::{derive_seed, tags};
use crate::tmvn::{estimate_moments, sample_truncated, GibbsConfig, TruncSpec};

/// Monte Carlo settings for one E-step call.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EStepConfig {
    pub draws: usize,
    pub gibbs: GibbsConfig,
}

impl Default for EStepConfig {
    fn default() -> Self {
        Self {
            draws: 500,
            gibbs: GibbsConfig::default(),
        }
    }
}

/// Gaussian conditional of the missing block given the observed block at a
/// fixed parameter value, in precision form.
///
/// The latent vector has mean `mu = B(rho) X beta` and covariance
/// `B B' sigma^2`, so its precision is `A'A / sigma^2`; conditioning on the
/// observed block reduces to the `mm` block of `A'A` and one symmetric
/// solve. Shared by the E-step, the Louis draws, and the forensic screen.
pub(crate) struct LatentConditional {
    /// Marginal mean of the full latent vector.
    pub mu: Array1<f64>,
    /// `A'A` (the latent precision scaled by `sigma^2`).
    pub ata: Array2<f64>,
    /// Untruncated conditional mean of the missing block.
    pub mu_cond: Array1<f64>,
    /// `(A'A)_mm`, rows/cols in `missing_idx` order.
    pub ata_mm: Array2<f64>,
    pub missing_idx: Vec<usize>,
    pub observed_idx: Vec<usize>,
}

impl LatentConditional {
    pub fn build(theta: &Theta, data: &CensoredNetwork, ws: &WeightSet) -> Result<Self> {
        let op = SarOperator::factorize(ws, &theta.rho.view())?;
        let xb = data.design().dot(&theta.beta);
        let mu = op.solve(&xb.view())?;
        let a = dense_a(ws, &theta.rho.view());
        let ata = a.t().dot(&a);

        let missing_idx = data.missing_idx();
        let observed_idx = data.observed_idx();
        let nm = missing_idx.len();

        // rhs = (A'A)_mo (y_o - mu_o) via one full product against the
        // observed-masked residual.
        let mut v = Array1::<f64>::zeros(data.num_edges());
        for &s in &observed_idx {
            v[s] = data.response()[s] - mu[s];
        }
        let w = ata.dot(&v);

        let ata_mm = Array2::from_shape_fn((nm, nm), |(r, c)| {
            ata[[missing_idx[r], missing_idx[c]]]
        });
        let mu_cond = if nm == 0 {
            Array1::zeros(0)
        } else {
            use ndarray_linalg::{FactorizeC, SolveC, UPLO};
            let rhs = Array1::from_shape_fn(nm, |r| w[missing_idx[r]]);
            let factor = ata_mm
                .factorizec(UPLO::Lower)
                .map_err(crate::error::Error::Linalg)?;
            let corr = factor.solvec(&rhs).map_err(crate::error::Error::Linalg)?;
            Array1::from_shape_fn(nm, |r| mu[missing_idx[r]]) - corr
        };
        Ok(Self {
            mu,
            ata,
            mu_cond,
            ata_mm,
            missing_idx,
            observed_idx,
        })
    }
}

/// Compute the E-step moments at `theta0`.
///
/// The missing block's Gaussian conditional is truncated componentwise at
/// the threshold; its first two moments come from Gibbs draws, except when
/// `rho = 0`, where the conditional factorizes and the exact univariate
/// truncated moments are used instead (this keeps the independence collapse
/// exact).
pub fn e_step(
    theta0: &Theta,
    data: &CensoredNetwork,
    ws: &WeightSet,
    cfg: &EStepConfig,
    seed: u64,
) -> Result<EStepMoments> {
    let missing_idx = data.missing_idx();
    let observed_idx = data.observed_idx();
    let nm = missing_idx.len();
    let c = data.threshold();

    if nm == 0 {
        SarOperator::factorize(ws, &theta0.rho.view())?;
        return Ok(EStepMoments {
            y_star: data.response().clone(),
            sigma_c: Array2::zeros((0, 0)),
            missing_idx,
            observed_idx,
            draws_used: 0,
            mc_se: Array1::zeros(0),
        });
    }

    if theta0.rho.iter().all(|&r| r == 0.0) {
        // Independent censored regression: the conditional of each missing
        // slot is its marginal, and the truncated moments are closed form.
        let xb = data.design().dot(&theta0.beta);
        let sd = theta0.sigma2.sqrt();
        let mut y_star = data.response().clone();
        let mut sigma_c = Array2::zeros((nm, nm));
        for (r, &s) in missing_idx.iter().enumerate() {
            let (m, v) = gauss::truncated_moments(xb[s], sd, c);
            y_star[s] = m;
            sigma_c[[r, r]] = v;
        }
        return Ok(EStepMoments {
            y_star,
            sigma_c,
            missing_idx,
            observed_idx,
            draws_used: 0,
            mc_se: Array1::zeros(nm),
        });
    }

    let cond = LatentConditional::build(theta0, data, ws)?;
    let spec = TruncSpec::from_precision(
        cond.mu_cond.clone(),
        cond.ata_mm.mapv(|v| v / theta0.sigma2),
        c,
    )?;
    let draws = sample_truncated(
        &spec,
        cfg.draws.max(2),
        &cfg.gibbs,
        derive_seed(seed, &[tags::E_STEP]),
    )?;
    let est = estimate_moments(&draws.view());

    let mut y_star = data.response().clone();
    for (r, &s) in cond.missing_idx.iter().enumerate() {
        debug_assert!(est.mu_c[r] < c);
        y_star[s] = est.mu_c[r];
    }
    Ok(EStepMoments {
        y_star,
        sigma_c: est.sigma_c,
        missing_idx: cond.missing_idx,
        observed_idx: cond.observed_idx,
        draws_used: est.draws_used,
        mc_se: est.mc_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::build_weights;
    use ndarray::{array, Array};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn instance(n: usize, censored: &[usize], seed: u64) -> (CensoredNetwork, WeightSet) {
        let ws = build_weights(n).unwrap();
        let ne = ws.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array::from_shape_fn((ne, 2), |(_, j)| {
            if j == 0 {
                1.0
            } else {
                rng.random::<f64>()
            }
        });
        let y = Array::from_shape_fn(ne, |_| rng.random::<f64>() + 0.5);
        let mut observed = vec![true; ne];
        for &s in censored {
            observed[s] = true;
        }
        let c = y.iter().cloned().fold(f64::INFINITY, f64::min) - 0.2;
        let mut yy = y;
        let mut mask = observed;
        for &s in censored {
            mask[s] = false;
            yy[s] = c;
        }
        let data = CensoredNetwork::new(
            *ws.edge_index(),
            yy,
            mask,
            c,
            x,
            vec!["intercept".into(), "x1".into()],
        )
        .unwrap();
        (data, ws)
    }

    #[test]
    fn no_censoring_passes_data_through() {
        let (data, ws) = instance(5, &[], 3);
        let theta = Theta {
            rho: array![0.1, 0.1, 0.1],
            beta: array![0.5, 0.2],
            sigma2: 1.0,
        };
        let m = e_step(&theta, &data, &ws, &EStepConfig::default(), 11).unwrap();
        assert_eq!(m.y_star, *data.response());
        assert_eq!(m.sigma_c.shape(), [0, 0]);
        assert_eq!(m.draws_used, 0);
    }

    #[test]
    fn single_censored_slot_matches_univariate_truncation() {
        let (data, ws) = instance(5, &[7], 21);
        let theta = Theta {
            rho: array![0.15, 0.1, 0.05],
            beta: array![0.4, 0.3],
            sigma2: 0.6,
        };
        let cfg = EStepConfig {
            draws: 20_000,
            gibbs: GibbsConfig {
                burn_in: 100,
                thinning: 1,
                chains: 2,
            },
        };
        let m = e_step(&theta, &data, &ws, &cfg, 5).unwrap();

        // Closed form from the univariate Gaussian conditional.
        let cond = LatentConditional::build(&theta, &data, &ws).unwrap();
        let var_cond = theta.sigma2 / cond.ata_mm[[0, 0]];
        let (mean_t, var_t) =
            gauss::truncated_moments(cond.mu_cond[0], var_cond.sqrt(), data.threshold());
        let se = m.mc_se[0].max(1e-4);
        assert!(
            (m.y_star[7] - mean_t).abs() < 4.0 * se,
            "mean {} vs {mean_t} (se {se})",
            m.y_star[7]
        );
        assert!(
            (m.sigma_c[[0, 0]] - var_t).abs() < 0.15 * var_t,
            "var {} vs {var_t}",
            m.sigma_c[[0, 0]]
        );
        assert!(m.y_star[7] < data.threshold());
    }

    #[test]
    fn zero_rho_path_is_exact_and_deterministic() {
        let (data, ws) = instance(4, &[2, 5], 9);
        let theta = Theta {
            rho: Array1::zeros(3),
            beta: array![0.6, 0.1],
            sigma2: 0.9,
        };
        let m1 = e_step(&theta, &data, &ws, &EStepConfig::default(), 1).unwrap();
        let m2 = e_step(&theta, &data, &ws, &EStepConfig::default(), 2).unwrap();
        assert_eq!(m1.y_star, m2.y_star);
        let xb = data.design().dot(&theta.beta);
        let (want, wvar) =
            gauss::truncated_moments(xb[2], theta.sigma2.sqrt(), data.threshold());
        assert!((m1.y_star[2] - want).abs() < 1e-13);
        assert!((m1.sigma_c[[0, 0]] - wvar).abs() < 1e-13);
        assert_eq!(m1.sigma_c[[0, 1]], 0.0);
    }
}
