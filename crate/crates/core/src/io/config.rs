//! JSON run configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::PartialAnalyticVector;
use crate::assembly::Grid;
use crate::eigen::{EigenMode, EigenRequest, DEFAULT_DENSE_CAP, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::geometry::{EndMap, EndPreset};
use crate::scaling::ProfileParams;
use crate::spectral::Window;
use crate::{Error, Result, C64};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub geometry: EndPreset,
    /// First entry is the reference profile; further entries are variants.
    pub profiles: Vec<ProfileParams>,
    pub lambdas: Vec<C64>,
    pub grid: Grid,
    #[serde(default)]
    pub analysis: Analysis,
    #[serde(default)]
    pub eigen: EigenBlock,
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default)]
    pub resolvent: Option<ResolventBlock>,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Analysis {
    pub modes: usize,
    pub angular_tol: f64,
    pub radial_margin: f64,
    pub stability_tol: f64,
    pub real_tol: f64,
    pub agreement_tol: f64,
    pub sector_trials: usize,
    pub sector_sigma: f64,
}

impl Default for Analysis {
    fn default() -> Self {
        Self {
            modes: 3,
            angular_tol: 0.05,
            radial_margin: 0.5,
            stability_tol: 1e-3,
            real_tol: 1e-6,
            agreement_tol: 0.05,
            sector_trials: 200,
            sector_sigma: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenBlock {
    #[serde(default)]
    pub shift: Option<C64>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_cap")]
    pub dense_cap: usize,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

fn default_cap() -> usize {
    DEFAULT_DENSE_CAP
}

impl Default for EigenBlock {
    fn default() -> Self {
        Self {
            shift: None,
            count: None,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

impl EigenBlock {
    /// Dense mode unless both `shift` and `count` are given.
    pub fn request(&self) -> EigenRequest {
        let mode = match (self.shift, self.count) {
            (Some(shift), Some(k)) => EigenMode::Near { shift, k },
            _ => EigenMode::All,
        };
        EigenRequest {
            mode,
            tol: self.tol,
            max_iter: self.max_iter,
            dense_cap: self.dense_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MuPath {
    Segment { from: C64, to: C64, samples: usize },
    Points(Vec<C64>),
}

impl MuPath {
    pub fn points(&self) -> Vec<C64> {
        match self {
            MuPath::Points(p) => p.clone(),
            MuPath::Segment { from, to, samples } => {
                let n = (*samples).max(1);
                if n == 1 {
                    return vec![*from];
                }
                (0..n)
                    .map(|i| from + (to - from) * (i as f64 / (n - 1) as f64))
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventBlock {
    pub path: MuPath,
    pub f: PartialAnalyticVector,
    pub g: PartialAnalyticVector,
}

fn check_positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::config("<root>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn end_map(&self) -> Result<EndMap> {
        EndMap::new(self.geometry).map_err(|e| Error::config("geometry", e.to_string()))
    }

    pub fn profile(&self) -> ProfileParams {
        self.profiles[0]
    }

    /// Checks every invariant, reporting the offending field path.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let end = self.end_map()?;
        if self.grid.nx < 2 || self.grid.ny < 2 {
            return Err(Error::config(
                "grid",
                format!("needs at least 2 cells per direction, got {}×{}", self.grid.nx, self.grid.ny),
            ));
        }
        check_positive("grid.x_max", self.grid.x_max)?;
        if self.profiles.is_empty() {
            return Err(Error::config("profiles", "at least one (r, r_tilde) pair is required"));
        }
        for (i, p) in self.profiles.iter().enumerate() {
            let path = format!("profiles[{i}]");
            if !(p.r > 0.0 && p.r.is_finite()) {
                return Err(Error::config(format!("{path}.r"), format!("must be positive, got {}", p.r)));
            }
            if !(p.r < p.r_tilde) {
                return Err(Error::config(
                    format!("{path}.r_tilde"),
                    format!("must exceed r = {}, got {}", p.r, p.r_tilde),
                ));
            }
            if !(p.r_tilde < self.grid.x_max - 2.0) {
                return Err(Error::config(
                    format!("{path}.r_tilde"),
                    format!("must be below grid.x_max − 2 = {}, got {}", self.grid.x_max - 2.0, p.r_tilde),
                ));
            }
        }
        if self.lambdas.is_empty() {
            return Err(Error::config("lambdas", "at least one scaling parameter is required"));
        }
        let radius = end.alpha.sin();
        for (i, l) in self.lambdas.iter().enumerate() {
            if !(l.norm() < radius) {
                return Err(Error::config(
                    format!("lambdas[{i}]"),
                    format!("|λ| = {} must be below sin α = {radius} for {}", l.norm(), self.geometry.label()),
                ));
            }
        }
        let a = &self.analysis;
        if a.modes == 0 {
            return Err(Error::config("analysis.modes", "must be at least 1"));
        }
        check_positive("analysis.angular_tol", a.angular_tol)?;
        check_positive("analysis.radial_margin", a.radial_margin)?;
        check_positive("analysis.stability_tol", a.stability_tol)?;
        check_positive("analysis.real_tol", a.real_tol)?;
        check_positive("analysis.agreement_tol", a.agreement_tol)?;
        check_positive("analysis.sector_sigma", a.sector_sigma)?;
        if a.sector_trials == 0 {
            return Err(Error::config("analysis.sector_trials", "must be at least 1"));
        }
        check_positive("eigen.tol", self.eigen.tol)?;
        if self.eigen.shift.is_some() != self.eigen.count.is_some() {
            return Err(Error::config("eigen", "shift and count must be given together"));
        }
        if let Some(k) = self.eigen.count {
            if k == 0 || k > self.grid.dofs() {
                return Err(Error::config(
                    "eigen.count",
                    format!("must lie in 1..={}, got {k}", self.grid.dofs()),
                ));
            }
        }
        if let Some(w) = &self.window {
            if !(w.re_min < w.re_max && w.im_min < w.im_max) {
                return Err(Error::config("window", "bounds must satisfy min < max"));
            }
        }
        if let Some(r) = &self.resolvent {
            if r.path.points().is_empty() {
                return Err(Error::config("resolvent.path", "must contain at least one point"));
            }
            if let MuPath::Segment { samples: 0, .. } = r.path {
                return Err(Error::config("resolvent.path.samples", "must be at least 1"));
            }
            r.f.validate().map_err(|e| Error::config("resolvent.f", e.to_string()))?;
            r.g.validate().map_err(|e| Error::config("resolvent.g", e.to_string()))?;
        }
        Ok(())
    }
}
