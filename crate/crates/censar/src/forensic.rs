//! Forensic screening of a fitted model: per-edge probabilities that the
//! latent utility clears the censoring threshold, a Youden-optimal cut, the
//! under-/over-reporting networks, their multi-year aggregation, and
//! node-level summaries.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss;
use crate::mcem::{e_step, CensoredNetwork, EStepConfig, LatentConditional, Theta};
use crate::net::{EdgeIndex, WeightSet};

/// How the unobserved entries of the conditioning vector are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CondMeanMode {
    /// Plain Gaussian conditional means given the observed block (no
    /// truncation) — the latent state the model would predict if edges were
    /// free to exceed the threshold.
    Untruncated,
    /// Truncated conditional means (the E-step imputation).
    Truncated,
}

/// Settings for [`edge_probabilities`] when the truncated mode is used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForensicOptions {
    pub mode: CondMeanMode,
    /// Gibbs draws for the truncated mode.
    pub draws: usize,
    pub gibbs: crate::tmvn::GibbsConfig,
    pub seed: u64,
}

impl Default for ForensicOptions {
    fn default() -> Self {
        Self {
            mode: CondMeanMode::Untruncated,
            draws: 1000,
            gibbs: crate::tmvn::GibbsConfig::default(),
            seed: 0,
        }
    }
}

/// For every slot `(i, j)`, the probability that the latent utility exceeds
/// the threshold given the covariates and the rest of the network.
///
/// The conditioning vector holds the observed values and conditional means
/// at missing slots; each leave-one-out univariate conditional comes from
/// the latent precision matrix `A'A / sigma^2`, so no separate
/// `(N-1) x (N-1)` inversions are performed.
pub fn edge_probabilities(
    theta_hat: &Theta,
    data: &CensoredNetwork,
    ws: &WeightSet,
    opts: &ForensicOptions,
) -> Result<Array1<f64>> {
    let cond = LatentConditional::build(theta_hat, data, ws)?;
    let n_edges = data.num_edges();
    let c = data.threshold();

    // Conditioning state: observed values plus conditional means.
    let mut z_tilde = data.response().clone();
    match opts.mode {
        CondMeanMode::Untruncated => {
            for (r, &s) in cond.missing_idx.iter().enumerate() {
                z_tilde[s] = cond.mu_cond[r];
            }
        }
        CondMeanMode::Truncated => {
            let moments = e_step(
                theta_hat,
                data,
                ws,
                &EStepConfig {
                    draws: opts.draws,
                    gibbs: opts.gibbs.clone(),
                },
                crate::seed::derive_seed(opts.seed, &[crate::seed::tags::FORENSIC]),
            )?;
            z_tilde = moments.y_star;
        }
    }

    // Latent precision K = A'A / sigma^2; the full conditional of slot e is
    // N(z_e - r_e / K_ee, 1 / K_ee) with r = K (z - mu).
    let k = cond.ata.mapv(|v| v / theta_hat.sigma2);
    let resid = &z_tilde - &cond.mu;
    let r = k.dot(&resid);
    let mut pi = Array1::zeros(n_edges);
    for e in 0..n_edges {
        let kee = k[[e, e]];
        if !(kee > 0.0) {
            return Err(Error::Numerical(format!(
                "leave-one-out conditional variance at slot {e} is not positive"
            )));
        }
        let cond_mean = z_tilde[e] - r[e] / kee;
        let cond_sd = (1.0 / kee).sqrt();
        pi[e] = 1.0 - gauss::cdf((c - cond_mean) / cond_sd);
    }
    Ok(pi)
}

/// Youden threshold search result.
#[derive(Debug, Clone, Copy)]
pub struct YoudenResult {
    /// Chosen cut, strictly inside (0, 1).
    pub j: f64,
    /// Attained `sensitivity + specificity - 1`.
    pub statistic: f64,
}

/// Threshold maximizing `sensitivity + specificity - 1` for classifying the
/// binary labels `gamma` by `score > J`.
///
/// Candidate cuts are midpoints between adjacent distinct scores (plus the
/// all-positive and all-negative sentinels when they stay inside `(0, 1)`);
/// ties break toward the larger cut, which flags fewer positives.
pub fn youden_threshold(pi: &ArrayView1<f64>, gamma: &[bool]) -> Result<YoudenResult> {
    let n = pi.len();
    assert_eq!(gamma.len(), n);
    let pos_total = gamma.iter().filter(|&&g| g).count();
    let neg_total = n - pos_total;
    if pos_total == 0 || neg_total == 0 {
        return Err(Error::InvalidArgument(
            "Youden threshold needs both classes present".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pi[a].total_cmp(&pi[b]));

    // Distinct values ascending with class counts per value.
    let mut vals: Vec<f64> = Vec::new();
    let mut pos_at: Vec<usize> = Vec::new();
    let mut neg_at: Vec<usize> = Vec::new();
    for &i in &order {
        if vals.last().is_some_and(|&v| v == pi[i]) {
            let last = vals.len() - 1;
            if gamma[i] {
                pos_at[last] += 1;
            } else {
                neg_at[last] += 1;
            }
        } else {
            vals.push(pi[i]);
            pos_at.push(usize::from(gamma[i]));
            neg_at.push(usize::from(!gamma[i]));
        }
    }
    let u = vals.len();

    // Cut below vals[k] classifies values >= vals[k] positive. Walk cuts
    // from "all positive" upward, maintaining counts above the cut.
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new(); // (cut, TP, FP)
    let mut tp = pos_total;
    let mut fp = neg_total;
    if vals[0] > 0.0 {
        candidates.push((vals[0] / 2.0, tp, fp));
    }
    for k in 0..u {
        tp -= pos_at[k];
        fp -= neg_at[k];
        let cut = if k + 1 < u {
            0.5 * (vals[k] + vals[k + 1])
        } else if vals[u - 1] < 1.0 {
            0.5 * (vals[u - 1] + 1.0)
        } else {
            continue;
        };
        candidates.push((cut, tp, fp));
    }

    let mut best: Option<YoudenResult> = None;
    for (cut, tp, fp) in candidates {
        let sens = tp as f64 / pos_total as f64;
        let spec = 1.0 - fp as f64 / neg_total as f64;
        let stat = sens + spec - 1.0;
        let better = match best {
            None => true,
            Some(b) => stat > b.statistic || (stat == b.statistic && cut > b.j),
        };
        if better {
            best = Some(YoudenResult {
                j: cut,
                statistic: stat,
            });
        }
    }
    Ok(best.expect("at least one candidate cut"))
}

/// Edge-level screening output for one year.
#[derive(Debug, Clone)]
pub struct ForensicBundle {
    /// Exceedance probabilities per slot.
    pub pi: Array1<f64>,
    pub youden_j: f64,
    /// Model-predicted network `I(pi > J)`.
    pub pi_net: Vec<bool>,
    /// Observed network.
    pub gamma: Vec<bool>,
    /// `Pi - Gamma` elementwise, in `{-1, 0, +1}`.
    pub omega: Vec<i8>,
    /// Predicted-but-unobserved edges (potential under-reporting).
    pub omega_plus: Vec<bool>,
    /// Observed-but-unpredicted edges (potential over-reporting).
    pub omega_minus: Vec<bool>,
}

/// Build the screening networks from probabilities, observations, and a
/// cut.
pub fn forensic_networks(pi: &ArrayView1<f64>, gamma: &[bool], j: f64) -> ForensicBundle {
    assert_eq!(pi.len(), gamma.len());
    let pi_net: Vec<bool> = pi.iter().map(|&p| p > j).collect();
    let omega: Vec<i8> = pi_net
        .iter()
        .zip(gamma.iter())
        .map(|(&p, &g)| i8::from(p) - i8::from(g))
        .collect();
    let omega_plus: Vec<bool> = omega.iter().map(|&o| o == 1).collect();
    let omega_minus: Vec<bool> = omega.iter().map(|&o| o == -1).collect();
    ForensicBundle {
        pi: pi.to_owned(),
        youden_j: j,
        pi_net,
        gamma: gamma.to_vec(),
        omega,
        omega_plus,
        omega_minus,
    }
}

/// Elementwise counts of flagged years.
#[derive(Debug, Clone)]
pub struct AggregateForensic {
    pub omega_plus_sum: Vec<u32>,
    pub omega_minus_sum: Vec<u32>,
    pub years: usize,
}

/// Sum yearly screening networks elementwise.
pub fn aggregate<'a, I>(bundles: I) -> AggregateForensic
where
    I: IntoIterator<Item = &'a ForensicBundle>,
{
    let mut plus: Vec<u32> = Vec::new();
    let mut minus: Vec<u32> = Vec::new();
    let mut years = 0;
    for b in bundles {
        if plus.is_empty() {
            plus = vec![0; b.omega_plus.len()];
            minus = vec![0; b.omega_minus.len()];
        }
        assert_eq!(plus.len(), b.omega_plus.len(), "bundles must share one edge index");
        for (acc, &f) in plus.iter_mut().zip(&b.omega_plus) {
            *acc += u32::from(f);
        }
        for (acc, &f) in minus.iter_mut().zip(&b.omega_minus) {
            *acc += u32::from(f);
        }
        years += 1;
    }
    AggregateForensic {
        omega_plus_sum: plus,
        omega_minus_sum: minus,
        years,
    }
}

/// Node-level summaries of a binary edge vector, each min-max scaled to
/// `[0, 1]`.
#[derive(Debug, Clone)]
pub struct NodeMetrics {
    pub eigencentrality: Array1<f64>,
    pub outdegree: Array1<f64>,
    pub indegree: Array1<f64>,
    /// Per-metric degeneracy flags (empty network, or constant metric where
    /// min-max scaling is undefined and the output is all zeros).
    pub eigencentrality_degenerate: bool,
    pub outdegree_degenerate: bool,
    pub indegree_degenerate: bool,
}

/// Eigenvector centrality (undirected, power iteration on the symmetrized
/// adjacency), outdegree, and indegree, min-max scaled per metric.
pub fn node_metrics(network: &[bool], edge_index: &EdgeIndex) -> NodeMetrics {
    let n = edge_index.n();
    assert_eq!(network.len(), edge_index.num_edges());
    let mut adj = Array2::<f64>::zeros((n, n));
    for (s, (i, j)) in edge_index.iter_pairs() {
        if network[s] {
            adj[[i, j]] = 1.0;
        }
    }
    let empty = adj.iter().all(|&v| v == 0.0);
    let outdeg = Array1::from_shape_fn(n, |i| adj.row(i).sum());
    let indeg = Array1::from_shape_fn(n, |j| adj.column(j).sum());

    let eigen = if empty {
        Array1::zeros(n)
    } else {
        // Undirected: symmetrize as the union of the two directions, then
        // power-iterate. The +I shift preserves the principal eigenvector
        // and rules out sign oscillation on bipartite components.
        let sym = Array2::from_shape_fn((n, n), |(i, j)| {
            if adj[[i, j]] > 0.0 || adj[[j, i]] > 0.0 {
                1.0
            } else {
                0.0
            }
        });
        let mut v = Array1::from_elem(n, 1.0 / (n as f64).sqrt());
        for _ in 0..100_000 {
            let mut w = sym.dot(&v) + &v;
            let norm = w.dot(&w).sqrt();
            w.mapv_inplace(|x| x / norm);
            let delta = w
                .iter()
                .zip(v.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            v = w;
            if delta < 1e-10 {
                break;
            }
        }
        v.mapv(f64::abs)
    };

    let (eigen_scaled, eigen_degenerate) = min_max_scale(&eigen, empty);
    let (out_scaled, out_degenerate) = min_max_scale(&outdeg, empty);
    let (in_scaled, in_degenerate) = min_max_scale(&indeg, empty);
    NodeMetrics {
        eigencentrality: eigen_scaled,
        outdegree: out_scaled,
        indegree: in_scaled,
        eigencentrality_degenerate: eigen_degenerate,
        outdegree_degenerate: out_degenerate,
        indegree_degenerate: in_degenerate,
    }
}

fn min_max_scale(v: &Array1<f64>, empty: bool) -> (Array1<f64>, bool) {
    if empty {
        return (Array1::zeros(v.len()), true);
    }
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return (Array1::zeros(v.len()), true);
    }
    (v.mapv(|x| (x - min) / (max - min)), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::build_weights;
    use ndarray::{array, Array};
    use ndarray_linalg::{Eigh, UPLO};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tobit_exceedance_under_independence() {
        // With rho = 0 the conditioning is vacuous and pi is the plain Tobit
        // exceedance probability 1 - Phi((c - x'beta)/sigma).
        let ws = build_weights(4).unwrap();
        let ne = ws.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array::from_shape_fn((ne, 2), |(_, j)| {
            if j == 0 {
                1.0
            } else {
                rng.random::<f64>()
            }
        });
        let z = Array::from_shape_fn(ne, |_| rng.random::<f64>() * 2.0);
        let c = 1.0;
        let observed: Vec<bool> = z.iter().map(|&v| v > c).collect();
        let y = z.mapv(|v| if v > c { v } else { c });
        let data = CensoredNetwork::new(
            *ws.edge_index(),
            y,
            observed,
            c,
            x.clone(),
            vec!["intercept".into(), "x1".into()],
        )
        .unwrap();
        let theta = Theta {
            rho: Array1::zeros(3),
            beta: array![0.7, 0.4],
            sigma2: 0.5,
        };
        let pi =
            edge_probabilities(&theta, &data, &ws, &ForensicOptions::default()).unwrap();
        let sd = theta.sigma2.sqrt();
        for e in 0..ne {
            let want = 1.0 - crate::gauss::cdf((c - x.row(e).dot(&theta.beta)) / sd);
            assert!(
                (pi[e] - want).abs() < 1e-12,
                "slot {e}: {} vs {want}",
                pi[e]
            );
        }
    }

    #[test]
    fn leave_one_out_matches_block_inversion() {
        // Precision-based leave-one-out conditionals against the explicit
        // 3x3 partition of a 4-dimensional covariance.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = Array::from_shape_fn((4, 4), |_| rng.random::<f64>() - 0.5);
        let sigma = a.dot(&a.t()) + Array2::<f64>::eye(4);
        let mu = array![0.1, -0.2, 0.3, 0.05];
        let z = array![0.5, 0.1, -0.4, 0.2];
        use ndarray_linalg::Inverse;
        let k = sigma.inv().unwrap();
        let r = k.dot(&(&z - &mu));
        for e in 0..4 {
            let got_var = 1.0 / k[[e, e]];
            let got_mean = z[e] - r[e] / k[[e, e]];
            // Oracle: explicit partition.
            let others: Vec<usize> = (0..4).filter(|&i| i != e).collect();
            let s_oo = Array2::from_shape_fn((3, 3), |(x, yv)| sigma[[others[x], others[yv]]]);
            let s_eo = Array1::from_shape_fn(3, |x| sigma[[e, others[x]]]);
            let diff = Array1::from_shape_fn(3, |x| z[others[x]] - mu[others[x]]);
            let s_oo_inv = s_oo.inv().unwrap();
            let want_mean = mu[e] + s_eo.dot(&s_oo_inv.dot(&diff));
            let want_var = sigma[[e, e]] - s_eo.dot(&s_oo_inv.dot(&s_eo));
            assert!((got_mean - want_mean).abs() < 1e-10);
            assert!((got_var - want_var).abs() < 1e-10);
        }
    }

    fn scan_oracle(pi: &Array1<f64>, gamma: &[bool]) -> (f64, f64) {
        // Brute force: recount the confusion at every candidate cut.
        let mut vals: Vec<f64> = pi.to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let mut cuts = Vec::new();
        if vals[0] > 0.0 {
            cuts.push(vals[0] / 2.0);
        }
        for w in vals.windows(2) {
            cuts.push(0.5 * (w[0] + w[1]));
        }
        if *vals.last().unwrap() < 1.0 {
            cuts.push(0.5 * (vals.last().unwrap() + 1.0));
        }
        let pos = gamma.iter().filter(|&&g| g).count() as f64;
        let neg = gamma.len() as f64 - pos;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for cut in cuts {
            let tp = pi
                .iter()
                .zip(gamma)
                .filter(|(&p, &g)| p > cut && g)
                .count() as f64;
            let fp = pi
                .iter()
                .zip(gamma)
                .filter(|(&p, &g)| p > cut && !g)
                .count() as f64;
            let stat = tp / pos + (1.0 - fp / neg) - 1.0;
            if stat > best.0 || (stat == best.0 && cut > best.1) {
                best = (stat, cut);
            }
        }
        (best.1, best.0)
    }

    #[test]
    fn perfectly_separated_scores() {
        let pi = array![0.9, 0.8, 0.85, 0.2, 0.1, 0.15];
        let gamma = vec![true, true, true, false, false, false];
        let res = youden_threshold(&pi.view(), &gamma).unwrap();
        assert_eq!(res.statistic, 1.0);
        assert!(res.j > 0.2 && res.j < 0.8);
    }

    #[test]
    fn binary_scores_split_at_half() {
        let pi = array![1.0, 0.0, 1.0, 0.0];
        let gamma = vec![true, false, true, false];
        let res = youden_threshold(&pi.view(), &gamma).unwrap();
        assert_eq!(res.statistic, 1.0);
        assert!(res.j > 0.0 && res.j < 1.0);
    }

    #[test]
    fn matches_exhaustive_scan_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let n = 200;
            let gamma: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.4).collect();
            if gamma.iter().all(|&g| g) || gamma.iter().all(|&g| !g) {
                continue;
            }
            let pi = Array::from_shape_fn(n, |i| {
                let base: f64 = if gamma[i] { 0.6 } else { 0.4 };
                (base + 0.4 * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0)
            });
            let got = youden_threshold(&pi.view(), &gamma).unwrap();
            let (want_j, want_stat) = scan_oracle(&pi, &gamma);
            assert_eq!(got.statistic, want_stat);
            assert_eq!(got.j, want_j);
        }
    }

    #[test]
    fn single_class_rejected() {
        let pi = array![0.5, 0.6];
        assert!(youden_threshold(&pi.view(), &[true, true]).is_err());
    }

    #[test]
    fn identical_networks_have_empty_omega() {
        let pi = array![0.9, 0.1, 0.8, 0.2];
        let gamma = vec![true, false, true, false];
        let b = forensic_networks(&pi.view(), &gamma, 0.5);
        assert!(b.omega.iter().all(|&o| o == 0));
        assert!(!b.omega_plus.iter().any(|&f| f));
        assert!(!b.omega_minus.iter().any(|&f| f));
    }

    #[test]
    fn flipped_edge_flags_exactly_one_slot() {
        // Four nodes; one edge the model predicts but the data lacks.
        let idx = crate::net::EdgeIndex::new(4).unwrap();
        let ne = idx.num_edges();
        let mut pi = Array1::from_elem(ne, 0.1);
        let mut gamma = vec![false; ne];
        gamma[3] = true;
        pi[3] = 0.9; // agrees
        pi[7] = 0.95; // predicted, unobserved
        let b = forensic_networks(&pi.view(), &gamma, 0.5);
        assert_eq!(b.omega.iter().filter(|&&o| o != 0).count(), 1);
        assert!(b.omega_plus[7]);
        let agg = aggregate([&b, &b]);
        assert_eq!(agg.omega_plus_sum[7], 2);
        assert_eq!(agg.years, 2);
        assert!(agg.omega_plus_sum.iter().all(|&v| v <= 2));
    }

    #[test]
    fn omega_networks_are_disjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let n = 100;
        let pi = Array::from_shape_fn(n, |_| rng.random::<f64>());
        let gamma: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.5).collect();
        let b = forensic_networks(&pi.view(), &gamma, 0.5);
        for s in 0..n {
            assert!(!(b.omega_plus[s] && b.omega_minus[s]));
            assert_eq!(
                b.omega[s],
                i8::from(b.pi_net[s]) - i8::from(b.gamma[s])
            );
        }
    }

    #[test]
    fn raising_the_cut_shrinks_the_predicted_network() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let n = 150;
        let pi = Array::from_shape_fn(n, |_| rng.random::<f64>());
        let gamma: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.5).collect();
        let lo = forensic_networks(&pi.view(), &gamma, 0.3);
        let hi = forensic_networks(&pi.view(), &gamma, 0.7);
        for s in 0..n {
            // Pi(J2) subset of Pi(J1) for J2 > J1, hence Omega+ shrinks and
            // Omega- grows.
            assert!(!hi.pi_net[s] || lo.pi_net[s]);
            assert!(!hi.omega_plus[s] || lo.omega_plus[s]);
            assert!(!lo.omega_minus[s] || hi.omega_minus[s]);
        }
    }

    #[test]
    fn star_graph_centrality() {
        let idx = crate::net::EdgeIndex::new(5).unwrap();
        let mut network = vec![false; idx.num_edges()];
        for leaf in 1..5 {
            network[idx.slot(0, leaf)] = true;
        }
        let m = node_metrics(&network, &idx);
        assert_eq!(m.eigencentrality[0], 1.0);
        for leaf in 1..5 {
            assert!((m.eigencentrality[leaf] - m.eigencentrality[1]).abs() < 1e-12);
        }
        assert!(!m.eigencentrality_degenerate);
        // Outdegree: hub 4, leaves 0.
        assert_eq!(m.outdegree[0], 1.0);
        assert!(m.outdegree.iter().skip(1).all(|&v| v == 0.0));
    }

    #[test]
    fn complete_graph_degenerates_to_zeros() {
        let idx = crate::net::EdgeIndex::new(4).unwrap();
        let network = vec![true; idx.num_edges()];
        let m = node_metrics(&network, &idx);
        assert!(m.eigencentrality_degenerate);
        assert!(m.outdegree_degenerate);
        assert!(m.eigencentrality.iter().all(|&v| v == 0.0));
        assert!(m.outdegree.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_network_flagged() {
        let idx = crate::net::EdgeIndex::new(4).unwrap();
        let m = node_metrics(&vec![false; idx.num_edges()], &idx);
        assert!(m.eigencentrality_degenerate && m.outdegree_degenerate && m.indegree_degenerate);
        assert!(m.eigencentrality.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn power_iteration_matches_dense_eigensolver() {
        let n = 10;
        let idx = crate::net::EdgeIndex::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let network: Vec<bool> = (0..idx.num_edges())
            .map(|_| rng.random::<f64>() < 0.3)
            .collect();
        let m = node_metrics(&network, &idx);

        // Dense oracle on the symmetrized adjacency.
        let mut sym = Array2::<f64>::zeros((n, n));
        for (s, (i, j)) in idx.iter_pairs() {
            if network[s] {
                sym[[i, j]] = 1.0;
                sym[[j, i]] = 1.0;
            }
        }
        let (_, vecs) = sym.eigh(UPLO::Lower).unwrap();
        let principal = vecs.column(n - 1).mapv(f64::abs);
        let min = principal.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = principal.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scaled = principal.mapv(|v| (v - min) / (max - min));
        for i in 0..n {
            assert!(
                (m.eigencentrality[i] - scaled[i]).abs() < 1e-8,
                "node {i}: {} vs {}",
                m.eigencentrality[i],
                scaled[i]
            );
        }
    }
}
