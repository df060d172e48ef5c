//! Run configuration: a TOML file with nested sections, every field
//! optional with documented defaults, plus CLI flag overrides.

use censar::forensic::CondMeanMode;
use censar::mcem::FitConfig;
use censar::tmvn::GibbsConfig;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    /// E-step draws at the first EM iteration.
    pub initial_draws: usize,
    /// Geometric growth factor of the draw schedule.
    pub growth: f64,
    /// Draw-count cap.
    pub max_draws: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub chains: usize,
}

impl Default for McSection {
    fn default() -> Self {
        let g = GibbsConfig::default();
        Self {
            initial_draws: 500,
            growth: 1.2,
            max_draws: 5000,
            burn_in: g.burn_in,
            thinning: g.thinning,
            chains: g.chains,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmSection {
    /// Stop when the squared parameter change falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EmSection {
    fn default() -> Self {
        Self {
            tol: 0.1,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LouisSection {
    /// Completed draws for the observed-information approximation.
    pub draws: usize,
}

impl Default for LouisSection {
    fn default() -> Self {
        Self { draws: 1000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForensicSection {
    /// Conditioning mode for missing slots: untruncated | truncated.
    pub conditional_mean: CondMeanMode,
    /// Gibbs draws when the truncated mode is selected.
    pub draws: usize,
}

impl Default for ForensicSection {
    fn default() -> Self {
        Self {
            conditional_mean: CondMeanMode::Untruncated,
            draws: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Upper bound on years processed concurrently.
    pub parallel_years: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { parallel_years: 4 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub mc: McSection,
    pub em: EmSection,
    pub louis: LouisSection,
    pub forensic: ForensicSection,
    pub run: RunSection,
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Io(format!("cannot parse config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let positive = [
            ("mc.initial_draws", self.mc.initial_draws),
            ("mc.max_draws", self.mc.max_draws),
            ("mc.thinning", self.mc.thinning),
            ("mc.chains", self.mc.chains),
            ("em.max_iter", self.em.max_iter),
            ("louis.draws", self.louis.draws),
            ("run.parallel_years", self.run.parallel_years),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(CliError::Io(format!("config: {name} must be positive")));
            }
        }
        if !(self.em.tol > 0.0) {
            return Err(CliError::Io("config: em.tol must be positive".into()));
        }
        if !(self.mc.growth >= 1.0) {
            return Err(CliError::Io("config: mc.growth must be at least 1".into()));
        }
        if self.mc.max_draws < self.mc.initial_draws {
            return Err(CliError::Io(
                "config: mc.max_draws must not be below mc.initial_draws".into(),
            ));
        }
        Ok(())
    }

    pub fn gibbs(&self) -> GibbsConfig {
        GibbsConfig {
            burn_in: self.mc.burn_in,
            thinning: self.mc.thinning,
            chains: self.mc.chains,
        }
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            tol: self.em.tol,
            max_iter: self.em.max_iter,
            mc_initial: self.mc.initial_draws,
            mc_growth: self.mc.growth,
            mc_cap: self.mc.max_draws,
            gibbs: self.gibbs(),
            fix_rho_zero: false,
        }
    }
}

/// Configuration of a `simulate` run: the data-generating process plus the
/// fit settings used inside each replication.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub rho_true: Vec<f64>,
    pub beta_true: Vec<f64>,
    pub censor_frac: f64,
    pub underreport_frac: f64,
    pub replications: usize,
    pub seed: u64,
    pub mc: McSection,
    pub em: EmSection,
}

impl Default for SimConfig {
    fn default() -> Self {
        let d = censar::simlab::DgpConfig::default();
        Self {
            n: d.n,
            rho_true: d.rho_true,
            beta_true: d.beta_true,
            censor_frac: d.censor_frac,
            underreport_frac: d.underreport_frac,
            replications: d.replications,
            seed: d.seed,
            mc: McSection::default(),
            em: EmSection {
                tol: 1e-3,
                max_iter: 100,
            },
        }
    }
}

impl SimConfig {
    pub fn from_path(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Io(format!("cannot parse config {}: {e}", path.display())))
    }

    pub fn dgp_config(&self) -> censar::simlab::DgpConfig {
        censar::simlab::DgpConfig {
            n: self.n,
            rho_true: self.rho_true.clone(),
            beta_true: self.beta_true.clone(),
            censor_frac: self.censor_frac,
            underreport_frac: self.underreport_frac,
            replications: self.replications,
            seed: self.seed,
        }
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            tol: self.em.tol,
            max_iter: self.em.max_iter,
            mc_initial: self.mc.initial_draws,
            mc_growth: self.mc.growth,
            mc_cap: self.mc.max_draws,
            gibbs: GibbsConfig {
                burn_in: self.mc.burn_in,
                thinning: self.mc.thinning,
                chains: self.mc.chains,
            },
            fix_rho_zero: false,
        }
    }
}
