//! Run configuration: a problem plus per-command options.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use qpresponse::problem::ProblemSpec;

use crate::exit::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub solve: SolveOptions,
    #[serde(default)]
    pub diagnose: DiagnoseOptions,
    #[serde(default)]
    pub sweep: SweepOptions,
    #[serde(default)]
    pub verify: VerifyOptions,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    pub bracket: Option<(f64, f64)>,
    pub samples: usize,
    pub max_iterations: usize,
    pub continuity_probe: bool,
    /// `A / C0` used for the advisory `eps_bar`.
    pub a_fraction: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            bracket: None,
            samples: 9,
            max_iterations: 200,
            continuity_probe: true,
            a_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnoseOptions {
    pub n_max: Option<u32>,
    pub n_list: Vec<u64>,
    pub radius_limit: Option<u64>,
    pub a_fraction: f64,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        DiagnoseOptions {
            n_max: None,
            n_list: Vec::new(),
            radius_limit: None,
            a_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    /// Highest order compared against the tree expansion (at most 5).
    pub tree_order: usize,
    pub direct_tolerance: f64,
    pub tree_tolerance: f64,
    pub range_tolerance: f64,
    pub ode: OdeOptions,
    /// Fault injection: add `corrupt_by` to the solution at `corrupt_mode`
    /// (and its conjugate at the opposite mode) before checking.
    pub corrupt_mode: Option<Vec<i32>>,
    pub corrupt_by: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tree_order: 4,
            direct_tolerance: 1e-10,
            tree_tolerance: 1e-12,
            range_tolerance: 1e-10,
            ode: OdeOptions::default(),
            corrupt_mode: None,
            corrupt_by: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdeOptions {
    pub enabled: bool,
    /// Transient `T0`; defaults to `20 / (a eps)`.
    pub transient: Option<f64>,
    pub window: f64,
    pub dt_out: f64,
    pub tol: f64,
    /// Offsets from `(c0, 0)`.
    pub offsets: Vec<(f64, f64)>,
    pub sup_tolerance: f64,
    pub pairwise_tolerance: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            enabled: true,
            transient: None,
            window: 50.0,
            dt_out: 0.05,
            tol: 1e-11,
            offsets: vec![(0.0, 0.0), (0.1, 0.0), (-0.07, 0.07)],
            sup_tolerance: 1e-5,
            pairwise_tolerance: 1e-8,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))?;
        cfg.problem
            .validate()
            .map_err(|e| CliError::usage(format!("invalid problem: {e}")))?;
        if cfg.verify.tree_order == 0 || cfg.verify.tree_order > qpresponse::trees::MAX_TREE_ORDER {
            return Err(CliError::usage(format!(
                "verify.tree_order must lie in 1..={}",
                qpresponse::trees::MAX_TREE_ORDER
            )));
        }
        if let Some(mode) = &cfg.verify.corrupt_mode {
            if mode.len() != cfg.problem.dimension {
                return Err(CliError::usage("verify.corrupt_mode has the wrong dimension"));
            }
        }
        if cfg.sweep.epsilons.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(CliError::usage("sweep.epsilons must be finite and >= 0"));
        }
        Ok(cfg)
    }
}
