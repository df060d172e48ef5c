//! Report emission: CSV tables plus a JSON manifest. Floating-point values
//! are written with 17 significant digits so they round-trip exactly; no
//! timestamps or machine identifiers enter the outputs, keeping reruns
//! byte-identical.

use std::fs;
use std::io::Write;
use std::path::Path;

use censar::gauss;
use serde::Serialize;

use crate::config::RunConfig;
use crate::panel::DyadicPanel;
use crate::pipeline::{PipelineResult, Stage};
use crate::{CliError, CliResult};

/// 17 significant digits, enough to reconstruct the exact double.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Verify the output directory is writable before any computation starts.
pub fn prepare_outdir(outdir: &Path) -> CliResult<()> {
    fs::create_dir_all(outdir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", outdir.display())))?;
    let probe = outdir.join(".write-probe");
    fs::write(&probe, b"ok")
        .map_err(|e| CliError::Io(format!("output directory not writable: {e}")))?;
    let _ = fs::remove_file(&probe);
    Ok(())
}

fn create(outdir: &Path, name: &str) -> CliResult<std::io::BufWriter<fs::File>> {
    let path = outdir.join(name);
    let f = fs::File::create(&path)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(std::io::BufWriter::new(f))
}

#[derive(Serialize)]
struct YearManifest {
    year: i64,
    converged: bool,
    em_iterations: usize,
    draws_final: usize,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    stage: &'a str,
    nodes: &'a [String],
    years: Vec<i64>,
    failed_years: Vec<FailedYear<'a>>,
    config: &'a RunConfig,
    parameters: &'a [String],
}

#[derive(Serialize)]
struct FailedYear<'a> {
    year: i64,
    error: &'a str,
}

/// Write every report table and the manifest.
pub fn emit_reports(
    panel: &DyadicPanel,
    result: &PipelineResult,
    cfg: &RunConfig,
    seed: u64,
    stage: Stage,
    outdir: &Path,
) -> CliResult<()> {
    let idx = panel.edge_index();

    // coefficients.csv: year, parameter, estimate, std_error, z, p
    let mut w = create(outdir, "coefficients.csv")?;
    writeln!(w, "year,parameter,estimate,std_error,z,p").map_err(io_err)?;
    for y in &result.years {
        let est = y.fit.theta.to_vector();
        let se = y.fit.std_errors.clone();
        for (k, label) in result.parameter_labels.iter().enumerate() {
            let (se_s, z_s, p_s) = match &se {
                Some(se) if se[k].is_finite() && se[k] > 0.0 => {
                    let z = est[k] / se[k];
                    let p = 2.0 * (1.0 - gauss::cdf(z.abs()));
                    (fmt_f64(se[k]), fmt_f64(z), fmt_f64(p))
                }
                _ => ("NaN".into(), "NaN".into(), "NaN".into()),
            };
            writeln!(
                w,
                "{},{},{},{},{},{}",
                y.year,
                label,
                fmt_f64(est[k]),
                se_s,
                z_s,
                p_s
            )
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;

    if stage == Stage::Forensic {
        // forensic_edges.csv: year, exporter, importer, pi, observed, omega
        let mut w = create(outdir, "forensic_edges.csv")?;
        writeln!(w, "year,exporter,importer,pi,observed,omega").map_err(io_err)?;
        for y in &result.years {
            if let Some(b) = &y.bundle {
                for (s, (i, j)) in idx.iter_pairs() {
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        y.year,
                        panel.nodes[i],
                        panel.nodes[j],
                        fmt_f64(b.pi[s]),
                        u8::from(b.gamma[s]),
                        b.omega[s]
                    )
                    .map_err(io_err)?;
                }
            }
        }
        w.flush().map_err(io_err)?;

        // aggregate_forensic.csv
        let mut w = create(outdir, "aggregate_forensic.csv")?;
        writeln!(
            w,
            "exporter,importer,n_years_underreported,n_years_overreported"
        )
        .map_err(io_err)?;
        if let Some(agg) = &result.aggregate {
            for (s, (i, j)) in idx.iter_pairs() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    panel.nodes[i], panel.nodes[j], agg.omega_plus_sum[s], agg.omega_minus_sum[s]
                )
                .map_err(io_err)?;
            }
        }
        w.flush().map_err(io_err)?;

        // node_metrics.csv: year, node, network, eigencentrality, outdegree, indegree
        let mut w = create(outdir, "node_metrics.csv")?;
        writeln!(w, "year,node,network,eigencentrality,outdegree,indegree").map_err(io_err)?;
        for y in &result.years {
            for (net_name, metrics) in [("plus", &y.metrics_plus), ("minus", &y.metrics_minus)] {
                if let Some(m) = metrics {
                    for (node_i, node) in panel.nodes.iter().enumerate() {
                        writeln!(
                            w,
                            "{},{},{},{},{},{}",
                            y.year,
                            node,
                            net_name,
                            fmt_f64(m.eigencentrality[node_i]),
                            fmt_f64(m.outdegree[node_i]),
                            fmt_f64(m.indegree[node_i])
                        )
                        .map_err(io_err)?;
                    }
                }
            }
        }
        w.flush().map_err(io_err)?;
    }

    // manifest.json
    let manifest = Manifest {
        tool: "censar",
        version: env!("CARGO_PKG_VERSION"),
        seed,
        stage: match stage {
            Stage::FitOnly => "fit",
            Stage::Forensic => "forensic",
        },
        nodes: &panel.nodes,
        years: result.years.iter().map(|y| y.year).collect(),
        failed_years: result
            .failures
            .iter()
            .map(|(year, error)| FailedYear {
                year: *year,
                error,
            })
            .collect(),
        config: cfg,
        parameters: &result.parameter_labels,
    };
    let mut w = create(outdir, "manifest.json")?;
    let mut value = serde_json::to_value(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    // Attach per-year diagnostics in year order.
    let per_year: Vec<YearManifest> = result
        .years
        .iter()
        .map(|y| YearManifest {
            year: y.year,
            converged: y.fit.converged,
            em_iterations: y.fit.em_iterations,
            draws_final: y.fit.trace.last().map_or(0, |t| t.draws),
            warnings: y.fit.warnings.clone(),
        })
        .collect();
    value["per_year"] = serde_json::to_value(per_year).map_err(|e| CliError::Io(e.to_string()))?;
    serde_json::to_writer_pretty(&mut w, &value).map_err(|e| CliError::Io(e.to_string()))?;
    w.write_all(b"\n").map_err(io_err)?;
    w.flush().map_err(io_err)?;
    Ok(())
}

/// Write a simulation study report as tidy CSV files plus a manifest.
pub fn emit_study(
    report: &censar::simlab::SimReport,
    cfg_echo: &crate::config::SimConfig,
    outdir: &Path,
) -> CliResult<()> {
    let mut w = create(outdir, "study_estimates.csv")?;
    writeln!(w, "replication,parameter,truth,estimate").map_err(io_err)?;
    for rec in &report.records {
        for (k, v) in rec.rho_hat.iter().enumerate() {
            writeln!(
                w,
                "{},rho_{},{},{}",
                rec.rep,
                k + 1,
                fmt_f64(report.config.rho_true[k]),
                fmt_f64(*v)
            )
            .map_err(io_err)?;
        }
        for (k, v) in rec.beta_hat.iter().enumerate() {
            writeln!(
                w,
                "{},beta_{},{},{}",
                rec.rep,
                k + 1,
                fmt_f64(report.config.beta_true[k]),
                fmt_f64(*v)
            )
            .map_err(io_err)?;
        }
        writeln!(
            w,
            "{},sigma2,{},{}",
            rec.rep,
            fmt_f64(1.0),
            fmt_f64(rec.sigma2_hat)
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    let mut w = create(outdir, "study_rates.csv")?;
    writeln!(
        w,
        "replication,converged,em_iterations,youden_j,tp,fp,fn,tn,fpr,tpr,fdr"
    )
    .map_err(io_err)?;
    for rec in &report.records {
        let opt = |v: Option<f64>| v.map_or("NA".to_string(), fmt_f64);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            rec.rep,
            rec.converged,
            rec.em_iterations,
            fmt_f64(rec.youden_j),
            rec.rates.tp,
            rec.rates.fp,
            rec.rates.fn_,
            rec.rates.tn,
            fmt_f64(rec.rates.fpr),
            opt(rec.rates.tpr),
            opt(rec.rates.fdr)
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    let mut w = create(outdir, "study_imputation.csv")?;
    writeln!(w, "replication,true_latent,imputed_mean").map_err(io_err)?;
    for rec in &report.records {
        for &(t, i) in &rec.imputation {
            writeln!(w, "{},{},{}", rec.rep, fmt_f64(t), fmt_f64(i)).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;

    #[derive(Serialize)]
    struct StudyManifest<'a> {
        tool: &'static str,
        version: &'static str,
        which: censar::simlab::Dgp,
        config: &'a crate::config::SimConfig,
        summary: &'a censar::simlab::StudySummary,
        failures: &'a [censar::simlab::RepFailure],
    }
    let mut w = create(outdir, "manifest.json")?;
    serde_json::to_writer_pretty(
        &mut w,
        &StudyManifest {
            tool: "censar",
            version: env!("CARGO_PKG_VERSION"),
            which: report.which,
            config: cfg_echo,
            summary: &report.summary,
            failures: &report.failures,
        },
    )
    .map_err(|e| CliError::Io(e.to_string()))?;
    w.write_all(b"\n").map_err(io_err)?;
    w.flush().map_err(io_err)?;
    Ok(())
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}
