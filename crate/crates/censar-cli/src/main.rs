use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use censar_cli::config::{RunConfig, SimConfig};
use censar_cli::panel::load_panel;
use censar_cli::pipeline::{run_pipeline, Stage};
use censar_cli::report::{emit_reports, emit_study, prepare_outdir};
use censar_cli::{CliError, CliResult};

/// Censored spatial-autoregressive network models: estimation and forensic
/// screening of dyadic flow panels.
#[derive(Parser)]
#[command(name = "censar", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct PanelArgs {
    /// Flows CSV: year,exporter,importer,value (absent pairs are censored).
    #[arg(long)]
    flows: PathBuf,
    /// Covariates CSV: year,exporter,importer,<names...>, complete per year.
    #[arg(long)]
    covariates: PathBuf,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if absent).
    #[arg(long)]
    out: PathBuf,
    /// Master seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Copy, Clone, ValueEnum)]
enum DgpArg {
    Dgp1,
    Dgp2,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model year by year and write coefficient tables.
    Fit(PanelArgs),
    /// Full pipeline: fit, standard errors, forensic screening, aggregates.
    Forensic(PanelArgs),
    /// Run a simulation study.
    Simulate {
        /// Data-generating process.
        #[arg(value_enum)]
        dgp: DgpArg,
        /// TOML study configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Master seed; overrides the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Validate the input files and print a panel summary.
    ValidateData {
        #[arg(long)]
        flows: PathBuf,
        #[arg(long)]
        covariates: PathBuf,
    },
}

fn run_panel_command(args: &PanelArgs, stage: Stage) -> CliResult<()> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    let seed = cfg.seed.unwrap_or(0);
    prepare_outdir(&args.out)?;
    let panel = load_panel(&args.flows, &args.covariates)?;
    let result = run_pipeline(&panel, &cfg, seed, stage)?;
    emit_reports(&panel, &result, &cfg, seed, stage, &args.out)?;
    for (year, error) in &result.failures {
        eprintln!("warning: year {year} failed: {error}");
    }
    eprintln!(
        "{} year(s) processed, {} failed; reports in {}",
        result.years.len(),
        result.failures.len(),
        args.out.display()
    );
    Ok(())
}

fn run_simulate(
    dgp: DgpArg,
    config: Option<&PathBuf>,
    out: &PathBuf,
    seed: Option<u64>,
) -> CliResult<()> {
    let mut cfg = match config {
        Some(path) => SimConfig::from_path(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    prepare_outdir(out)?;
    let which = match dgp {
        DgpArg::Dgp1 => censar::simlab::Dgp::Dgp1,
        DgpArg::Dgp2 => censar::simlab::Dgp::Dgp2,
    };
    let report = censar::simlab::run_study(&cfg.dgp_config(), which, &cfg.fit_config())
        .map_err(CliError::from)?;
    emit_study(&report, &cfg, out)?;
    eprintln!(
        "{} replication(s) done ({} failed); reports in {}",
        report.records.len(),
        report.failures.len(),
        out.display()
    );
    Ok(())
}

fn validate_data(flows: &PathBuf, covariates: &PathBuf) -> CliResult<()> {
    let panel = load_panel(flows, covariates)?;
    println!(
        "panel ok: {} nodes, {} slots per year, {} covariate(s), years {}..{}",
        panel.n(),
        panel.num_edges(),
        panel.covariate_names.len(),
        panel.years.first().unwrap(),
        panel.years.last().unwrap()
    );
    for &year in &panel.years {
        let net = panel.censored_network(year)?;
        println!(
            "  {year}: observed {} / {} (density {:.3}), threshold c = {:.6}",
            net.n_observed(),
            net.num_edges(),
            net.n_observed() as f64 / net.num_edges() as f64,
            net.threshold()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Fit(args) => run_panel_command(args, Stage::FitOnly),
        Command::Forensic(args) => run_panel_command(args, Stage::Forensic),
        Command::Simulate {
            dgp,
            config,
            out,
            seed,
        } => run_simulate(*dgp, config.as_ref(), out, *seed),
        Command::ValidateData { flows, covariates } => validate_data(flows, covariates),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
