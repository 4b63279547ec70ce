//! Run configuration: TOML sections [model], [grid], [initial], [sde],
//! [output] and [validity], layered as defaults ← preset ← file ← flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Table;

use cqsim_core::unravel::Scheme;
use cqsim_core::validity::DEFAULT_SEPARATION;
use cqsim_core::{
    ComplexMat2, EnsembleSpec, InitialCondition, ModelParams, MomentumGrid, Observable, PDist, QubitDensity, SdeConfig,
};

use crate::presets;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub model: ModelSection,
    pub grid: GridSection,
    pub initial: InitialSection,
    pub sde: SdeSection,
    pub output: OutputSection,
    pub validity: ValiditySection,
}

/// The coupling observable: a named Pauli matrix or c0·I + cx·σ_x + cy·σ_y + cz·σ_z.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Named(String),
    Pauli { c0: f64, cx: f64, cy: f64, cz: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub lambda: f64,
    pub gamma_c: f64,
    pub gamma_q: f64,
    pub q: f64,
    pub hbar: f64,
    pub observable: ObservableSpec,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            gamma_c: 0.25,
            gamma_q: 0.25,
            q: 0.0,
            hbar: 1.0,
            observable: ObservableSpec::Named("sigma_z".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub p_min: f64,
    pub p_max: f64,
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            p_min: -20.0,
            p_max: 20.0,
            n: 1024,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Bloch([f64; 3]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PDistKind {
    Gaussian,
    Delta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    /// "zero", "one", "plus", "minus", "mixed", or a Bloch vector.
    pub state: StateSpec,
    pub p_dist: PDistKind,
    pub p0: f64,
    pub sigma: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            state: StateSpec::Named("plus".into()),
            p_dist: PDistKind::Gaussian,
            p0: 0.0,
            sigma: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SdeSection {
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
    pub renormalize: bool,
    pub positivity_abort_threshold: f64,
    pub scheme: Scheme,
    pub n_traj: usize,
    pub seed: u64,
    pub allow_tradeoff_violation: bool,
    pub born_threshold: f64,
}

impl Default for SdeSection {
    fn default() -> Self {
        let d = SdeConfig::default();
        Self {
            dt: d.dt,
            t_final: d.t_final,
            record_stride: d.record_stride,
            renormalize: d.renormalize,
            positivity_abort_threshold: d.positivity_abort_threshold,
            scheme: d.scheme,
            n_traj: 1000,
            seed: 0,
            allow_tradeoff_violation: false,
            born_threshold: 0.99,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Snapshot times for field output. Empty means `snapshots` evenly spaced
    /// times on [0, t_final].
    pub times: Vec<f64>,
    pub snapshots: usize,
    /// Number of points in the negativity / positivity series on [0, t_final].
    pub series_points: usize,
    /// Trajectories written to individual CSV files.
    pub trajectories: usize,
    /// Points of the coarse grid used for histogram reconstruction.
    pub reconstruct_n: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            times: Vec::new(),
            snapshots: 5,
            series_points: 51,
            trajectories: 8,
            reconstruct_n: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValiditySection {
    pub chi: f64,
    /// Polar angles in the window sweep, evenly spaced on [0, π].
    pub sweep_points: usize,
}

impl Default for ValiditySection {
    fn default() -> Self {
        Self {
            chi: DEFAULT_SEPARATION,
            sweep_points: 13,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_table(text: &str, origin: &str) -> Result<Table, ConfigError> {
    text.parse::<Table>().map_err(|e| ConfigError(format!("{origin}: {e}")))
}

impl Config {
    /// Preset (if any) overlaid by the file (if any).
    pub fn load(file: Option<&Path>, preset: Option<&str>) -> Result<Self, ConfigError> {
        let mut table = Table::new();
        if let Some(name) = preset {
            let text = presets::get(name).ok_or_else(|| {
                ConfigError(format!(
                    "unknown preset `{name}` (available: {})",
                    presets::NAMES.join(", ")
                ))
            })?;
            merge(&mut table, parse_table(text, &format!("preset {name}"))?);
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            merge(&mut table, parse_table(&text, &path.display().to_string())?);
        }
        if preset.is_none() && file.is_none() {
            return Err(ConfigError("need --config FILE or --preset NAME".into()));
        }
        Config::deserialize(table).map_err(|e| ConfigError(format!("invalid configuration: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn observable(&self) -> Result<Observable, ConfigError> {
        let m = match &self.model.observable {
            ObservableSpec::Named(name) => match name.as_str() {
                "sigma_x" => ComplexMat2::pauli_x(),
                "sigma_y" => ComplexMat2::pauli_y(),
                "sigma_z" => ComplexMat2::pauli_z(),
                other => return Err(ConfigError(format!("unknown observable `{other}`"))),
            },
            ObservableSpec::Pauli { c0, cx, cy, cz } => {
                ComplexMat2::identity() * *c0
                    + ComplexMat2::pauli_x() * *cx
                    + ComplexMat2::pauli_y() * *cy
                    + ComplexMat2::pauli_z() * *cz
            }
        };
        Observable::new(m).map_err(|e| ConfigError(format!("[model] observable: {e}")))
    }

    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        let m = &self.model;
        ModelParams::new(m.lambda, m.gamma_c, m.gamma_q, m.q, self.observable()?)
            .and_then(|p| p.with_hbar(m.hbar))
            .map_err(|e| ConfigError(format!("[model] {e}")))
    }

    pub fn grid(&self) -> Result<MomentumGrid, ConfigError> {
        MomentumGrid::new(self.grid.p_min, self.grid.p_max, self.grid.n).map_err(|e| ConfigError(format!("[grid] {e}")))
    }

    pub fn coarse_grid(&self) -> Result<MomentumGrid, ConfigError> {
        MomentumGrid::new(self.grid.p_min, self.grid.p_max, self.output.reconstruct_n)
            .map_err(|e| ConfigError(format!("[output] reconstruct_n: {e}")))
    }

    pub fn rho0(&self) -> Result<QubitDensity, ConfigError> {
        let rho = match &self.initial.state {
            StateSpec::Named(name) => match name.as_str() {
                "zero" => QubitDensity::zero(),
                "one" => QubitDensity::one(),
                "plus" => QubitDensity::plus(),
                "minus" => QubitDensity::minus(),
                "mixed" => QubitDensity::maximally_mixed(),
                other => return Err(ConfigError(format!("[initial] unknown state `{other}`"))),
            },
            StateSpec::Bloch(r) => {
                QubitDensity::from_bloch(*r).map_err(|e| ConfigError(format!("[initial] state: {e}")))?
            }
        };
        Ok(rho)
    }

    pub fn initial(&self) -> Result<InitialCondition, ConfigError> {
        let rho = self.rho0()?;
        let i = &self.initial;
        let dist = match i.p_dist {
            PDistKind::Gaussian => PDist::Gaussian {
                p0: i.p0,
                sigma: i.sigma,
            },
            PDistKind::Delta => PDist::Delta { p0: i.p0 },
        };
        InitialCondition::new(rho, dist).map_err(|e| ConfigError(format!("[initial] {e}")))
    }

    pub fn sde(&self) -> Result<SdeConfig, ConfigError> {
        let s = &self.sde;
        let cfg = SdeConfig {
            dt: s.dt,
            t_final: s.t_final,
            record_stride: s.record_stride,
            renormalize: s.renormalize,
            positivity_abort_threshold: s.positivity_abort_threshold,
            scheme: s.scheme,
        };
        cfg.validate().map_err(|e| ConfigError(format!("[sde] {e}")))?;
        Ok(cfg)
    }

    pub fn ensemble(&self) -> Result<EnsembleSpec, ConfigError> {
        if self.sde.n_traj == 0 {
            return Err(ConfigError("[sde] n_traj must be >= 1".into()));
        }
        Ok(EnsembleSpec {
            n_traj: self.sde.n_traj,
            seed: self.sde.seed,
            config: self.sde()?,
            allow_tradeoff_violation: self.sde.allow_tradeoff_violation,
        })
    }

    /// Field snapshot times.
    pub fn snapshot_times(&self) -> Result<Vec<f64>, ConfigError> {
        let times = if !self.output.times.is_empty() {
            self.output.times.clone()
        } else {
            evenly_spaced(self.sde.t_final, self.output.snapshots)
        };
        if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(ConfigError("[output] times must be finite and >= 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError("[output] times must be strictly increasing".into()));
        }
        Ok(times)
    }

    pub fn series_times(&self) -> Vec<f64> {
        evenly_spaced(self.sde.t_final, self.output.series_points)
    }
}

/// `count` points on [0, t_final]; a single point when t_final = 0.
pub fn evenly_spaced(t_final: f64, count: usize) -> Vec<f64> {
    if t_final == 0.0 || count <= 1 {
        return vec![0.0];
    }
    (0..count).map(|k| t_final * k as f64 / (count - 1) as f64).collect()
}
