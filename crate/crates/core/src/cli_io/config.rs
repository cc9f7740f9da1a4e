//! Strict TOML run configuration.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::catalog::TheoremId;
use crate::analysis::oracle::RadialSpectrum;
use crate::evolution::{validate_alpha, SimConfig};
use crate::initial_data::ProfileSpec;
use crate::kernels::{MultiIndex, TestFunction};
use crate::spectral::GridSpec;
use crate::{Result, SqgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    LinearOracle,
    KernelProbe,
    Splitting,
    DecayFit,
    SlowDecay,
    Picard,
    RateCatalog,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Experiment::Simulate => "simulate",
            Experiment::LinearOracle => "linear-oracle",
            Experiment::KernelProbe => "kernel-probe",
            Experiment::Splitting => "splitting",
            Experiment::DecayFit => "decay-fit",
            Experiment::SlowDecay => "slow-decay",
            Experiment::Picard => "picard",
            Experiment::RateCatalog => "rate-catalog",
        };
        f.write_str(s)
    }
}

/// Grid as written in the file; exactly one of the two lengths is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_length: Option<f64>,
    /// Box length in units of `π`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_length_pi: Option<f64>,
}

impl GridConfig {
    pub fn to_grid(&self) -> Result<GridSpec> {
        let l = match (self.box_length, self.box_length_pi) {
            (Some(l), None) => l,
            (None, Some(m)) => m * PI,
            _ => {
                return Err(SqgError::config(
                    "grid.box_length",
                    "give exactly one of box_length and box_length_pi",
                ))
            }
        };
        GridSpec::new(self.n, l).map_err(|e| SqgError::config("grid", e.to_string()))
    }
}

/// Log-spaced sample times `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogTimes {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRequest {
    pub q: f64,
    pub theorem: TheoremId,
    /// Catalog parameter when it differs from `q` (data exponent `p`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelScalingRequest {
    #[serde(default)]
    pub gamma: MultiIndex,
    #[serde(default)]
    pub beta: MultiIndex,
    #[serde(default)]
    pub j: u32,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingRequest {
    pub p: f64,
    pub q: f64,
}

/// Experiment-specific parameters; each experiment reads its own subset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Overrides `sim.alpha` for the simulation-free experiments.
    pub alpha: Option<f64>,
    pub times: Option<LogTimes>,
    #[serde(default)]
    pub fits: Vec<FitRequest>,
    pub fit_window: Option<(f64, f64)>,
    /// Empirical smallness threshold on `‖θ‖_{L^m}` that starts large-`q` fits.
    pub kappa: Option<f64>,
    /// Fourier-splitting weight exponent.
    pub k: Option<f64>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    pub iterations: Option<usize>,
    pub q: Option<f64>,
    pub spectrum: Option<RadialSpectrum>,
    #[serde(default)]
    pub kernel_scaling: Vec<KernelScalingRequest>,
    #[serde(default)]
    pub smoothing: Vec<SmoothingRequest>,
    #[serde(default)]
    pub test_functions: Vec<TestFunction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must agree with the experiment named on the command line when present.
    pub experiment: Option<Experiment>,
    pub output_dir: Option<PathBuf>,
    pub grid: Option<GridConfig>,
    pub sim: Option<SimConfig>,
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

fn missing(key: &str, exp: Experiment) -> SqgError {
    SqgError::config(key, format!("required by the {exp} experiment"))
}

impl RunConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        self.grid
            .as_ref()
            .ok_or_else(|| SqgError::config("grid", "missing"))?
            .to_grid()
    }

    pub fn sim(&self) -> Result<&SimConfig> {
        self.sim
            .as_ref()
            .ok_or_else(|| SqgError::config("sim", "missing"))
    }

    pub fn profile(&self) -> Result<&ProfileSpec> {
        self.profile
            .as_ref()
            .ok_or_else(|| SqgError::config("profile", "missing"))
    }

    /// `analysis.alpha`, falling back to `sim.alpha`.
    pub fn alpha(&self) -> Option<f64> {
        self.analysis.alpha.or(self.sim.as_ref().map(|s| s.alpha))
    }

    /// Enforce every nested invariant and the fields `exp` needs.
    pub fn validate(&self, exp: Experiment) -> Result<()> {
        if let Some(e) = self.experiment {
            if e != exp {
                return Err(SqgError::config(
                    "experiment",
                    format!("file declares {e} but {exp} was requested"),
                ));
            }
        }
        let grid = self.grid.as_ref().map(GridConfig::to_grid).transpose()?;
        if let Some(sim) = &self.sim {
            sim.validate()?;
        }
        if let Some(a) = self.analysis.alpha {
            validate_alpha(a)
                .map_err(|_| SqgError::config("analysis.alpha", "alpha must lie in (0.5, 1]"))?;
        }
        if let (Some(p), Some(g)) = (&self.profile, &grid) {
            p.validate(g)?;
        }
        self.validate_analysis()?;

        use Experiment::*;
        let needs_field = matches!(exp, Simulate | Splitting | DecayFit | SlowDecay | Picard);
        if needs_field {
            for (key, present) in [
                ("grid", self.grid.is_some()),
                ("sim", self.sim.is_some()),
                ("profile", self.profile.is_some()),
            ] {
                if !present {
                    return Err(missing(key, exp));
                }
            }
        }
        let min_records = match exp {
            Simulate => 1,
            DecayFit => 8,
            Splitting => crate::analysis::splitting::MIN_SAMPLES,
            _ => 0,
        };
        if let Some(sim) = &self.sim {
            if sim.record_times.len() < min_records {
                return Err(SqgError::config(
                    "sim.record_times",
                    format!("the {exp} experiment needs at least {min_records} record times"),
                ));
            }
        }
        let a = &self.analysis;
        match exp {
            LinearOracle => {
                self.alpha().ok_or_else(|| missing("analysis.alpha", exp))?;
                a.spectrum
                    .ok_or_else(|| missing("analysis.spectrum", exp))?;
                a.times.ok_or_else(|| missing("analysis.times", exp))?;
            }
            KernelProbe => {
                self.alpha().ok_or_else(|| missing("analysis.alpha", exp))?;
                a.times.ok_or_else(|| missing("analysis.times", exp))?;
                if a.kernel_scaling.is_empty() && a.smoothing.is_empty() {
                    return Err(missing("analysis.kernel_scaling", exp));
                }
                if !a.smoothing.is_empty() && a.test_functions.is_empty() {
                    return Err(missing("analysis.test_functions", exp));
                }
            }
            Splitting => {
                a.k.ok_or_else(|| missing("analysis.k", exp))?;
            }
            DecayFit => {
                if a.fits.is_empty() {
                    return Err(missing("analysis.fits", exp));
                }
            }
            SlowDecay => {
                if a.lambdas.is_empty() {
                    return Err(missing("analysis.lambdas", exp));
                }
            }
            Picard => {
                a.iterations
                    .ok_or_else(|| missing("analysis.iterations", exp))?;
            }
            Simulate | RateCatalog => {}
        }
        Ok(())
    }

    fn validate_analysis(&self) -> Result<()> {
        let a = &self.analysis;
        if let Some(t) = a.times {
            if !(t.lo > 0.0 && t.hi > t.lo && t.count >= 2) {
                return Err(SqgError::config(
                    "analysis.times",
                    "needs 0 < lo < hi and count >= 2",
                ));
            }
        }
        if let Some((lo, hi)) = a.fit_window {
            if !(lo > 0.0 && hi > lo) {
                return Err(SqgError::config("analysis.fit_window", "needs 0 < lo < hi"));
            }
        }
        if let Some(k) = a.k {
            if !(k > 2.0) {
                return Err(SqgError::config(
                    "analysis.k",
                    format!("must exceed 2, got {k}"),
                ));
            }
        }
        if let Some(k) = a.kappa {
            if !(k > 0.0) {
                return Err(SqgError::config("analysis.kappa", "must be positive"));
            }
        }
        if a.lambdas.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) {
            return Err(SqgError::config(
                "analysis.lambdas",
                "each lambda must lie in (0, 1]",
            ));
        }
        if a.lambdas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(SqgError::config(
                "analysis.lambdas",
                "must be strictly decreasing",
            ));
        }
        if a.iterations == Some(0) {
            return Err(SqgError::config("analysis.iterations", "must be >= 1"));
        }
        if let Some(s) = &a.spectrum {
            s.validate()
                .map_err(|e| SqgError::config("analysis.spectrum", e.to_string()))?;
        }
        Ok(())
    }
}

/// Parse and validate a TOML document for `exp`.
pub fn parse_config(text: &str, exp: Experiment) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        let key = unknown_key(&msg).unwrap_or_else(|| "document".to_string());
        SqgError::config(key, msg)
    })?;
    cfg.validate(exp)?;
    Ok(cfg)
}

/// Pull the offending key out of serde's "unknown field `x`" messages.
fn unknown_key(msg: &str) -> Option<String> {
    let start = msg.strip_prefix("unknown field `")?.len();
    let start = msg.len() - start;
    let end = start + msg[start..].find('`')?;
    Some(msg[start..end].to_string())
}
