//! Configuration files.
//!
//! Keys mirror the field names of [`SystemConfig`] and [`ExperimentSpec`].
//! Quantities given in decibels carry a `_db` or `_dbm` suffix and are
//! converted to linear units on load. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, dbm_to_watts, Geometry, PathLossModel, SystemConfig};
use crate::jbrd::{InitPolicy, JbrdConfig, RhoPolicy, Scheme};
use crate::solvers::SolverParams;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON at byte {offset} (line {line}, column {column}): {message}")]
    Syntax {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("key `{key}`: {message}")]
    Schema { key: String, message: String },
    #[error("key `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub system: SystemDocument,
    pub experiment: ExperimentDocument,
    #[serde(default)]
    pub algorithm: AlgorithmDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    pub users: usize,
    pub antennas: usize,
    pub ris_elements: usize,
    pub bs_power_dbm: f64,
    pub jam_power_dbm: f64,
    pub gamma_echo_db: f64,
    pub noise_user_dbm: f64,
    pub noise_ae_dbm: f64,
    pub noise_pe_dbm: f64,
    pub noise_sensing_dbm: f64,
    pub rcs: f64,
    pub rician_factor_db: f64,
    /// Fixed penalty weight; `null` selects it from the objective scale.
    pub rho: Option<f64>,
    pub delta: f64,
    pub geometry: GeometryDocument,
    pub path_loss: PathLossDocument,
    pub element_spacing_ratio: f64,
    pub resample_users: bool,
    pub placement_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDocument {
    pub bs: [f64; 2],
    pub ris: [f64; 2],
    pub target: [f64; 2],
    pub pe: [f64; 2],
    pub user_circle_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_center: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossDocument {
    pub c0_db: f64,
    pub d0: f64,
    pub exp_bs_target: f64,
    pub exp_bs_ris: f64,
    pub exp_ris_user: f64,
    pub exp_bs_user: f64,
    pub exp_ae_user: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDocument {
    pub variable: String,
    pub values: Vec<f64>,
}

fn default_trials() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentDocument {
    /// Optional; the command line picks the variable when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepDocument>,
    pub schemes: Vec<String>,
    pub antenna_counts: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed_base: u64,
    pub output: String,
    /// Wall-clock columns are zero unless enabled, which keeps output
    /// byte-reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub write_traces: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverDocument {
    pub max_inner_steps: usize,
    pub step_init: f64,
    pub backtrack: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
    pub tolerance: f64,
    pub dykstra_iters: usize,
    pub dykstra_tol: f64,
    pub smoothing: f64,
}

impl Default for SolverDocument {
    fn default() -> Self {
        let p = SolverParams::default();
        Self {
            max_inner_steps: p.max_inner_steps,
            step_init: p.step_init,
            backtrack: p.backtrack,
            armijo: p.armijo,
            max_backtracks: p.max_backtracks,
            tolerance: p.tolerance,
            dykstra_iters: p.dykstra_iters,
            dykstra_tol: p.dykstra_tol,
            smoothing: p.smoothing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmDocument {
    pub max_outer: usize,
    pub max_inner_w: usize,
    pub max_inner_phi: usize,
    pub rho_factor: f64,
    pub init: String,
    pub scnr_margin: f64,
    pub init_radar_fraction: f64,
    pub solver: SolverDocument,
}

impl Default for AlgorithmDocument {
    fn default() -> Self {
        let c = JbrdConfig::default();
        let rho_factor = match c.rho {
            RhoPolicy::Auto { factor } => factor,
            RhoPolicy::Fixed(_) => 1.0,
        };
        Self {
            max_outer: c.max_outer,
            max_inner_w: c.max_inner_w,
            max_inner_phi: c.max_inner_phi,
            rho_factor,
            init: "mrt_aligned".into(),
            scnr_margin: c.scnr_margin,
            init_radar_fraction: c.init_radar_fraction,
            solver: SolverDocument::default(),
        }
    }
}

/// Quantity varied across the rows of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    /// dBm
    BsPower,
    /// dB
    GammaEcho,
    /// dBm
    PePower,
    /// element count
    RisElements,
    /// meters; the user circle stays at the base RIS position
    RisXPosition,
    /// single point, used for convergence traces
    None,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 6] = [
        SweepVariable::BsPower,
        SweepVariable::GammaEcho,
        SweepVariable::PePower,
        SweepVariable::RisElements,
        SweepVariable::RisXPosition,
        SweepVariable::None,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::BsPower => "bs_power",
            SweepVariable::GammaEcho => "gamma_echo",
            SweepVariable::PePower => "pe_power",
            SweepVariable::RisElements => "ris_elements",
            SweepVariable::RisXPosition => "ris_x_position",
            SweepVariable::None => "none",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }

    /// Values used when the configuration does not list any.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepVariable::BsPower => vec![45.0, 47.0, 49.0],
            SweepVariable::GammaEcho => vec![-24.0, -20.0, -16.0, -12.0],
            SweepVariable::PePower => vec![1.0, 4.0, 7.0, 10.0],
            SweepVariable::RisElements => vec![8.0, 16.0, 32.0, 64.0],
            SweepVariable::RisXPosition => vec![0.0, 10.0, 25.0, 40.0, 50.0],
            SweepVariable::None => vec![0.0],
        }
    }

    /// Writes `value` into `config`.
    pub fn apply(self, config: &mut SystemConfig, base_ris: [f64; 2], value: f64) -> Result<(), ConfigError> {
        match self {
            SweepVariable::BsPower => config.bs_power = dbm_to_watts(value),
            SweepVariable::GammaEcho => config.gamma_echo = db_to_linear(value),
            SweepVariable::PePower => config.jam_power = dbm_to_watts(value),
            SweepVariable::RisElements => {
                if !(value >= 0.0 && value.fract() == 0.0) {
                    return Err(invalid("experiment.sweep.values", format!("{value} is not an element count")));
                }
                config.ris_elements = value as usize;
            }
            SweepVariable::RisXPosition => {
                config.geometry.user_center.get_or_insert(base_ris);
                config.geometry.ris[0] = value;
            }
            SweepVariable::None => {}
        }
        Ok(())
    }
}

/// Parsed and validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SystemConfig,
    pub sweep: SweepVariable,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub antenna_counts: Vec<usize>,
    pub trials: usize,
    pub seed_base: u64,
    pub output: PathBuf,
    pub jbrd: JbrdConfig,
    pub record_wall_time: bool,
    pub write_traces: bool,
    /// The document this spec was built from, kept for lossless dumps.
    pub document: ConfigDocument,
}

impl ExperimentSpec {
    /// Fixes the sweep variable. A file that already names a different one
    /// is a conflict; a file without values gets the built-in defaults.
    pub fn with_sweep(mut self, variable: SweepVariable) -> Result<Self, ConfigError> {
        match &self.document.experiment.sweep {
            Some(s) if s.variable != variable.name() => {
                return Err(invalid(
                    "experiment.sweep.variable",
                    format!("file sweeps `{}` but `{}` was requested", s.variable, variable.name()),
                ))
            }
            Some(_) => {}
            None => {
                self.sweep = variable;
                self.values = variable.default_values();
                self.document.experiment.sweep =
                    Some(SweepDocument { variable: variable.name().into(), values: self.values.clone() });
            }
        }
        Ok(self)
    }

    /// System configuration of one trial.
    pub fn trial_config(&self, value: f64, antennas: usize, trial: usize) -> Result<SystemConfig, ConfigError> {
        let mut cfg = self.base.clone();
        cfg.antennas = antennas;
        cfg.seed = self.seed_base.wrapping_add(trial as u64);
        self.sweep.apply(&mut cfg, self.base.geometry.ris, value)?;
        Ok(cfg)
    }
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Parses a configuration from JSON text.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, ConfigError> {
    // Syntax first, so malformed input reports a position rather than a key.
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        offset: byte_offset(text, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let document: ConfigDocument = serde_path_to_error::deserialize(value).map_err(|e| {
        let mut key = e.path().to_string();
        let message = e.into_inner().to_string();
        // A missing field is reported at its parent; name the field itself.
        if let Some(field) = message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
            key = if key == "." { field.to_string() } else { format!("{key}.{field}") };
        }
        ConfigError::Schema { key, message }
    })?;
    spec_from_document(document)
}

/// Reads and parses a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentSpec, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

/// Serializes the document behind `spec` as pretty JSON.
pub fn dump_config(spec: &ExperimentSpec) -> String {
    let mut out = serde_json::to_string_pretty(&spec.document).expect("document serializes");
    out.push('\n');
    out
}

fn finite(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, "must be finite"))
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be positive, got {v}")))
    }
}

fn spec_from_document(document: ConfigDocument) -> Result<ExperimentSpec, ConfigError> {
    let s = &document.system;
    if s.users == 0 {
        return Err(invalid("system.users", "must be at least 1"));
    }
    if s.antennas == 0 {
        return Err(invalid("system.antennas", "must be at least 1"));
    }
    let g = &s.geometry;
    let p = &s.path_loss;
    for (key, v) in [
        ("system.bs_power_dbm", s.bs_power_dbm),
        ("system.jam_power_dbm", s.jam_power_dbm),
        ("system.gamma_echo_db", s.gamma_echo_db),
        ("system.noise_user_dbm", s.noise_user_dbm),
        ("system.noise_ae_dbm", s.noise_ae_dbm),
        ("system.noise_pe_dbm", s.noise_pe_dbm),
        ("system.noise_sensing_dbm", s.noise_sensing_dbm),
        ("system.rician_factor_db", s.rician_factor_db),
        ("system.path_loss.c0_db", p.c0_db),
    ] {
        finite(key, v)?;
    }
    positive("system.rcs", s.rcs)?;
    positive("system.delta", s.delta)?;
    positive("system.geometry.user_circle_radius", g.user_circle_radius)?;
    positive("system.path_loss.d0", p.d0)?;
    positive("system.element_spacing_ratio", s.element_spacing_ratio)?;
    if let Some(rho) = s.rho {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(invalid("system.rho", "must be non-negative"));
        }
    }

    let base = SystemConfig {
        users: s.users,
        antennas: s.antennas,
        ris_elements: s.ris_elements,
        bs_power: dbm_to_watts(s.bs_power_dbm),
        jam_power: dbm_to_watts(s.jam_power_dbm),
        gamma_echo: db_to_linear(s.gamma_echo_db),
        noise_user: dbm_to_watts(s.noise_user_dbm),
        noise_ae: dbm_to_watts(s.noise_ae_dbm),
        noise_pe: dbm_to_watts(s.noise_pe_dbm),
        noise_sensing: dbm_to_watts(s.noise_sensing_dbm),
        rcs: s.rcs,
        rician_factor: db_to_linear(s.rician_factor_db),
        rho: s.rho,
        delta: s.delta,
        geometry: Geometry {
            bs: g.bs,
            ris: g.ris,
            target: g.target,
            pe: g.pe,
            user_circle_radius: g.user_circle_radius,
            user_center: g.user_center,
        },
        path_loss: PathLossModel {
            c0: db_to_linear(p.c0_db),
            d0: p.d0,
            exp_bs_target: p.exp_bs_target,
            exp_bs_ris: p.exp_bs_ris,
            exp_ris_user: p.exp_ris_user,
            exp_bs_user: p.exp_bs_user,
            exp_ae_user: p.exp_ae_user,
        },
        element_spacing_ratio: s.element_spacing_ratio,
        seed: 0,
        resample_users: s.resample_users,
        placement_seed: s.placement_seed,
    };
    base.validate().map_err(|e| invalid("system", e.to_string()))?;

    let e = &document.experiment;
    let (sweep, values) = match &e.sweep {
        None => (SweepVariable::None, SweepVariable::None.default_values()),
        Some(sd) => {
            let v = SweepVariable::from_name(&sd.variable)
                .ok_or_else(|| invalid("experiment.sweep.variable", format!("unknown variable `{}`", sd.variable)))?;
            if sd.values.is_empty() {
                return Err(invalid("experiment.sweep.values", "must not be empty"));
            }
            for &x in &sd.values {
                finite("experiment.sweep.values", x)?;
                v.apply(&mut base.clone(), base.geometry.ris, x)?;
            }
            (v, sd.values.clone())
        }
    };
    let schemes = e
        .schemes
        .iter()
        .map(|name| Scheme::from_name(name).ok_or_else(|| invalid("experiment.schemes", format!("unknown scheme `{name}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if schemes.is_empty() {
        return Err(invalid("experiment.schemes", "must not be empty"));
    }
    if e.antenna_counts.is_empty() || e.antenna_counts.contains(&0) {
        return Err(invalid("experiment.antenna_counts", "must be a non-empty list of positive counts"));
    }
    if e.trials == 0 {
        return Err(invalid("experiment.trials", "must be at least 1"));
    }

    let a = &document.algorithm;
    let init = match a.init.as_str() {
        "mrt_aligned" => InitPolicy::MrtAligned,
        "random" => InitPolicy::Random,
        other => return Err(invalid("algorithm.init", format!("unknown policy `{other}`"))),
    };
    let sd = &a.solver;
    let jbrd = JbrdConfig {
        delta: s.delta,
        max_outer: a.max_outer,
        max_inner_w: a.max_inner_w,
        max_inner_phi: a.max_inner_phi,
        rho: match s.rho {
            Some(r) => RhoPolicy::Fixed(r),
            None => RhoPolicy::Auto { factor: a.rho_factor },
        },
        init,
        solver: SolverParams {
            max_inner_steps: sd.max_inner_steps,
            step_init: sd.step_init,
            backtrack: sd.backtrack,
            armijo: sd.armijo,
            max_backtracks: sd.max_backtracks,
            tolerance: sd.tolerance,
            dykstra_iters: sd.dykstra_iters,
            dykstra_tol: sd.dykstra_tol,
            smoothing: sd.smoothing,
        },
        scnr_margin: a.scnr_margin,
        init_radar_fraction: a.init_radar_fraction,
    };
    jbrd.validate().map_err(|err| invalid("algorithm", err.to_string()))?;

    Ok(ExperimentSpec {
        base,
        sweep,
        values,
        schemes,
        antenna_counts: e.antenna_counts.clone(),
        trials: e.trials,
        seed_base: e.seed_base,
        output: PathBuf::from(&e.output),
        jbrd,
        record_wall_time: e.record_wall_time,
        write_traces: e.write_traces,
        document,
    })
}
