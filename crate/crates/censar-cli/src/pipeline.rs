//! Per-year orchestration: fit, Louis standard errors, forensic screening,
//! node metrics, and the multi-year aggregate. Years fan out to a bounded
//! worker pool; a failed year is isolated and recorded rather than fatal.

use censar::forensic::{
    aggregate, edge_probabilities, forensic_networks, node_metrics, youden_threshold,
    AggregateForensic, ForensicBundle, ForensicOptions, NodeMetrics,
};
use censar::mcem::{fit, louis_se, FitResult};
use censar::net::build_weights;
use censar::seed::tags;
use censar::{derive_seed, WeightSet};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::panel::DyadicPanel;
use crate::{CliError, CliResult};

/// Everything computed for one year.
pub struct YearResult {
    pub year: i64,
    pub fit: FitResult,
    pub bundle: Option<ForensicBundle>,
    pub metrics_plus: Option<NodeMetrics>,
    pub metrics_minus: Option<NodeMetrics>,
}

/// Pipeline output across years.
pub struct PipelineResult {
    pub years: Vec<YearResult>,
    pub failures: Vec<(i64, String)>,
    pub aggregate: Option<AggregateForensic>,
    pub parameter_labels: Vec<String>,
}

/// Scope of a run: estimation only, or estimation plus screening.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    FitOnly,
    Forensic,
}

/// Per-year seed, derived from the master seed and the year label.
pub fn year_seed(master: u64, year: i64) -> u64 {
    derive_seed(master, &[tags::FIT, year as u64])
}

fn run_year(
    panel: &DyadicPanel,
    ws: &WeightSet,
    cfg: &RunConfig,
    master_seed: u64,
    year: i64,
    stage: Stage,
) -> CliResult<YearResult> {
    let data = panel.censored_network(year)?;
    let seed = year_seed(master_seed, year);
    let mut fit_result = fit(&data, ws, &cfg.fit_config(), seed)?;
    let louis = louis_se(
        &fit_result.theta,
        &data,
        ws,
        cfg.louis.draws,
        &cfg.gibbs(),
        derive_seed(seed, &[tags::LOUIS]),
    )?;
    fit_result.std_errors = Some(louis.std_errors.clone());
    fit_result.vcov = Some(louis.vcov.clone());
    if !louis.positive_definite {
        fit_result.warnings.push(format!(
            "Louis information is not positive definite (min eigenvalue {:.3e}); \
             standard errors are NaN",
            louis.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
        ));
    }

    let (bundle, metrics_plus, metrics_minus) = if stage == Stage::Forensic {
        let opts = ForensicOptions {
            mode: cfg.forensic.conditional_mean,
            draws: cfg.forensic.draws,
            gibbs: cfg.gibbs(),
            seed: derive_seed(seed, &[tags::FORENSIC]),
        };
        let pi = edge_probabilities(&fit_result.theta, &data, ws, &opts)?;
        let youden = youden_threshold(&pi.view(), data.mask())?;
        let bundle = forensic_networks(&pi.view(), data.mask(), youden.j);
        let idx = panel.edge_index();
        let mp = node_metrics(&bundle.omega_plus, &idx);
        let mm = node_metrics(&bundle.omega_minus, &idx);
        (Some(bundle), Some(mp), Some(mm))
    } else {
        (None, None, None)
    };
    Ok(YearResult {
        year,
        fit: fit_result,
        bundle,
        metrics_plus,
        metrics_minus,
    })
}

/// Run the pipeline over every year of the panel.
pub fn run_pipeline(
    panel: &DyadicPanel,
    cfg: &RunConfig,
    master_seed: u64,
    stage: Stage,
) -> CliResult<PipelineResult> {
    let ws = build_weights(panel.n()).map_err(CliError::from)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.parallel_years.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("cannot build worker pool: {e}")))?;

    let outcomes: Vec<(i64, CliResult<YearResult>)> = pool.install(|| {
        panel
            .years
            .par_iter()
            .map(|&year| (year, run_year(panel, &ws, cfg, master_seed, year, stage)))
            .collect()
    });

    let mut years = Vec::new();
    let mut failures = Vec::new();
    for (year, outcome) in outcomes {
        match outcome {
            Ok(y) => years.push(y),
            Err(e) => failures.push((year, e.to_string())),
        }
    }
    if years.is_empty() {
        return Err(CliError::Numerical(format!(
            "every year failed (first: {})",
            failures
                .first()
                .map(|(y, e)| format!("{y}: {e}"))
                .unwrap_or_default()
        )));
    }
    let agg = if stage == Stage::Forensic {
        Some(aggregate(years.iter().filter_map(|y| y.bundle.as_ref())))
    } else {
        None
    };
    let labels = {
        let data = panel.censored_network(years[0].year)?;
        censar::Theta::parameter_labels(&ws, &data)
    };
    Ok(PipelineResult {
        years,
        failures,
        aggregate: agg,
        parameter_labels: labels,
    })
}
