use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hammersley::{HammersleyInitial, TightnessSetup, DEFAULT_CELL};
use crate::kernel::JumpKernel;
use crate::limits::CovKernel;
use crate::profiles::Profile;
use crate::walks::{brownian_halfwidth, InitialSpec, SimConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RwCovariance,
    RwScaling,
    RwIndependence,
    RwHydro,
    BrownianCurrent,
    FbmSample,
    HammersleyTightness,
    HopfLaxMap,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::RwCovariance => "rw-covariance",
            ExperimentKind::RwScaling => "rw-scaling",
            ExperimentKind::RwIndependence => "rw-independence",
            ExperimentKind::RwHydro => "rw-hydro",
            ExperimentKind::BrownianCurrent => "brownian-current",
            ExperimentKind::FbmSample => "fbm-sample",
            ExperimentKind::HammersleyTightness => "hammersley-tightness",
            ExperimentKind::HopfLaxMap => "hopf-lax-map",
        }
    }

    fn is_walks(&self) -> bool {
        matches!(
            self,
            ExperimentKind::RwCovariance
                | ExperimentKind::RwScaling
                | ExperimentKind::RwIndependence
                | ExperimentKind::RwHydro
        )
    }
}

/// Random-walk experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalksSection {
    pub n: Vec<u64>,
    pub time_grid: Vec<f64>,
    #[serde(default)]
    pub base_points: Vec<f64>,
    #[serde(default)]
    pub height_points: Vec<f64>,
    pub kernel: JumpKernel,
    pub profile: Profile,
    pub initial: InitialSpec,
    #[serde(default)]
    pub window_radius: Option<u64>,
    #[serde(default)]
    pub force_window: bool,
}

impl WalksSection {
    pub fn sim_config(&self, n: u64) -> SimConfig {
        SimConfig {
            n,
            time_grid: self.time_grid.clone(),
            base_points: self.base_points.clone(),
            kernel: self.kernel.clone(),
            profile: self.profile.clone(),
            initial: self.initial,
            window_radius: self.window_radius,
            force_window: self.force_window,
            height_points: self.height_points.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrownianSection {
    pub lambda: f64,
    #[serde(default)]
    pub y: f64,
    pub time_grid: Vec<f64>,
    /// Half-width of the initial field around `y`; defaults to the smallest
    /// accepted value.
    #[serde(default)]
    pub halfwidth: Option<f64>,
}

impl BrownianSection {
    pub fn halfwidth(&self) -> f64 {
        self.halfwidth.unwrap_or_else(|| {
            brownian_halfwidth(self.time_grid.last().copied().unwrap_or(0.0))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbmSection {
    pub kernel: CovKernel,
    pub time_grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HammersleySection {
    pub n: Vec<u64>,
    pub x: f64,
    pub t: f64,
    #[serde(default = "bdj")]
    pub initial: HammersleyInitial,
    #[serde(default = "default_cell")]
    pub cell: f64,
}

fn bdj() -> HammersleyInitial {
    HammersleyInitial::Bdj
}

fn default_cell() -> f64 {
    DEFAULT_CELL
}

impl HammersleySection {
    pub fn setup(&self) -> TightnessSetup {
        TightnessSetup {
            x: self.x,
            t: self.t,
            initial: self.initial.clone(),
            cell: self.cell,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopfLaxSection {
    pub initial: HammersleyInitial,
    pub times: Vec<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    /// Neighbourhood radius for the quadratic-minimum constant.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_delta() -> f64 {
    0.25
}

impl HopfLaxSection {
    pub fn xs(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.x_min];
        }
        let h = (self.x_max - self.x_min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.x_min + h * i as f64).collect()
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub replicates: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub raw: bool,
    /// Replicates per checkpoint.
    #[serde(default)]
    pub chunk: Option<u64>,
    #[serde(default)]
    pub walks: Option<WalksSection>,
    #[serde(default)]
    pub brownian: Option<BrownianSection>,
    #[serde(default)]
    pub fbm: Option<FbmSection>,
    #[serde(default)]
    pub hammersley: Option<HammersleySection>,
    #[serde(default)]
    pub hopf_lax: Option<HopfLaxSection>,
}

fn config_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

fn check<T>(field: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| config_err(field, e))
}

fn section<'a, T>(s: &'a Option<T>, name: &str, kind: ExperimentKind) -> Result<&'a T> {
    s.as_ref()
        .ok_or_else(|| config_err(name, format!("section required by kind {}", kind.name())))
}

fn check_grid(field: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(config_err(field, "empty"));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(config_err(field, "entries must be finite and nonnegative"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config_err(field, "must be strictly increasing"));
    }
    Ok(())
}

fn check_ns(field: &str, ns: &[u64], min: usize) -> Result<()> {
    if ns.contains(&0) {
        return Err(config_err(field, "entries must be at least 1"));
    }
    let mut d = ns.to_vec();
    d.sort_unstable();
    d.dedup();
    if d.len() != ns.len() {
        return Err(config_err(field, "duplicate entries"));
    }
    if ns.len() < min {
        return Err(config_err(field, format!("need at least {min} values")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parse TOML, or JSON when the file name ends in `.json`.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Replace the list of `n` values of whichever section uses one.
    pub fn set_ns(&mut self, ns: Vec<u64>) {
        if let Some(w) = self.walks.as_mut() {
            w.n = ns.clone();
        }
        if let Some(h) = self.hammersley.as_mut() {
            h.n = ns;
        }
    }

    pub fn chunk_size(&self) -> u64 {
        self.chunk.unwrap_or(1000).max(1)
    }

    /// Every module precondition, checked before anything is simulated.
    pub fn validate(&self) -> Result<()> {
        let kind = self.kind;
        if kind != ExperimentKind::HopfLaxMap && self.replicates == 0 {
            return Err(config_err("replicates", "must be at least 1"));
        }
        if self.chunk == Some(0) {
            return Err(config_err("chunk", "must be at least 1"));
        }
        if kind.is_walks() {
            let w = section(&self.walks, "walks", kind)?;
            let min_ns = match kind {
                ExperimentKind::RwScaling | ExperimentKind::RwHydro => 3,
                _ => 1,
            };
            check_ns("walks.n", &w.n, min_ns)?;
            check_grid("walks.time_grid", &w.time_grid)?;
            match kind {
                ExperimentKind::RwHydro if w.height_points.is_empty() => {
                    return Err(config_err("walks.height_points", "rw-hydro needs height points"));
                }
                ExperimentKind::RwIndependence if w.base_points.len() < 2 => {
                    return Err(config_err(
                        "walks.base_points",
                        "rw-independence needs at least two base points",
                    ));
                }
                ExperimentKind::RwCovariance | ExperimentKind::RwScaling
                    if w.base_points.is_empty() =>
                {
                    return Err(config_err("walks.base_points", "empty"));
                }
                _ => {}
            }
            if kind == ExperimentKind::RwIndependence && self.replicates < 4 {
                return Err(config_err("replicates", "rw-independence needs at least 4"));
            }
            check("walks.profile", w.profile.validate())?;
            for &n in &w.n {
                check("walks", w.sim_config(n).validate())?;
            }
        }
        match kind {
            ExperimentKind::BrownianCurrent => {
                let b = section(&self.brownian, "brownian", kind)?;
                if !(b.lambda > 0.0 && b.lambda.is_finite()) {
                    return Err(config_err("brownian.lambda", "must be positive"));
                }
                if !b.y.is_finite() {
                    return Err(config_err("brownian.y", "must be finite"));
                }
                check_grid("brownian.time_grid", &b.time_grid)?;
                let need = brownian_halfwidth(*b.time_grid.last().unwrap());
                if !(b.halfwidth() >= need) {
                    return Err(config_err(
                        "brownian.halfwidth",
                        format!("{} below the minimum {need}", b.halfwidth()),
                    ));
                }
            }
            ExperimentKind::FbmSample => {
                let f = section(&self.fbm, "fbm", kind)?;
                check_grid("fbm.time_grid", &f.time_grid)?;
                check(
                    "fbm.kernel",
                    crate::limits::GaussianSampler::new(&f.kernel, &f.time_grid).map(|_| ()),
                )?;
            }
            ExperimentKind::HammersleyTightness => {
                let h = section(&self.hammersley, "hammersley", kind)?;
                check_ns("hammersley.n", &h.n, 1)?;
                if h.n.iter().any(|&n| n < 2) {
                    return Err(config_err("hammersley.n", "entries must be at least 2"));
                }
                let setup = h.setup();
                check("hammersley", setup.validate())?;
                check("hammersley", setup.solve().map(|_| ()))?;
            }
            ExperimentKind::HopfLaxMap => {
                let h = section(&self.hopf_lax, "hopf_lax", kind)?;
                if h.points == 0 {
                    return Err(config_err("hopf_lax.points", "must be at least 1"));
                }
                if !(h.x_min.is_finite() && h.x_max.is_finite() && h.x_min <= h.x_max) {
                    return Err(config_err("hopf_lax.x_min", "need finite x_min <= x_max"));
                }
                if h.times.is_empty() || h.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                    return Err(config_err("hopf_lax.times", "need positive finite times"));
                }
                if !(h.delta > 0.0 && h.delta.is_finite()) {
                    return Err(config_err("hopf_lax.delta", "must be positive"));
                }
                match &h.initial {
                    HammersleyInitial::Bdj if h.x_min <= 0.0 => {
                        return Err(config_err("hopf_lax.x_min", "bdj needs x > 0"));
                    }
                    HammersleyInitial::Profile { profile } => {
                        check("hopf_lax.initial", profile.validate())?
                    }
                    _ => {}
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// The config with run-local fields cleared, as recorded in summaries
    /// and checkpoints.
    pub fn canonical(&self) -> Self {
        Self {
            workers: 0,
            out: PathBuf::new(),
            raw: false,
            chunk: None,
            ..self.clone()
        }
    }
}

/// Exit status for an error: 1 for configuration problems, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::InvalidConfig(_)
        | Error::InvalidKernel(_)
        | Error::InvalidProfile(_)
        | Error::Unrealizable { .. } => 1,
        _ => 2,
    }
}
