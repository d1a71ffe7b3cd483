//! Run configuration shared by all subcommands. Every field has a default;
//! a JSON file supplies overrides, and command-line flags override the file.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fourier::ContourConfig;
use crate::hyperfunction::BoundaryOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// `steps` equally spaced points from `min` to `max` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        GridSpec { min, max, steps }
    }

    pub fn points(&self) -> Vec<f64> {
        match self.steps {
            0 => vec![],
            1 => vec![0.5 * (self.min + self.max)],
            s => (0..s)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (s - 1) as f64)
                .collect(),
        }
    }

    fn validate(&self, name: &str) -> Result<(), ConfigError> {
        if self.steps == 0 || !self.min.is_finite() || !self.max.is_finite() || self.max < self.min {
            return Err(ConfigError::Invalid(format!("grid {name} = {self:?} is empty or malformed")));
        }
        Ok(())
    }
}

/// `ε = 2^{-k}` for `k = first..=last`, extrapolated over `levels` levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub first: i32,
    pub last: i32,
    pub levels: usize,
}

impl BoundarySpec {
    pub fn options(&self) -> BoundaryOptions {
        BoundaryOptions::halving(self.first, self.last, self.levels)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Pass/fail tolerance; each subcommand has its own default.
    pub tolerance: Option<f64>,
    pub output: Option<PathBuf>,
    /// Real axis of the evaluation grid (`ξ` for `dh-s2`, `Re w` for `su2-euler`).
    pub grid: Option<GridSpec>,
    /// Imaginary axis for `su2-euler`.
    pub grid_im: Option<GridSpec>,
    /// Truncation order `K` of Euler products.
    pub euler_order: u64,
    /// Truncation `N` of the `ΩSU(2)` fixed-point sum; chosen from the tail
    /// bound when absent.
    pub truncation: Option<u64>,
    pub contour: ContourConfig,
    /// Contour settings for the two-dimensional `dh-su2-probe` integrals.
    pub probe_contour: ContourConfig,
    pub boundary: BoundarySpec,
    /// Polarization of the `S²` example.
    pub s2_polarization: i64,
    pub n: i64,
    pub m: i64,
    /// Mode pair for `su2-fixed`; `a`/`beta0` are used instead when set.
    pub modes: [i64; 2],
    pub phi: f64,
    pub psi: f64,
    pub a: Option<f64>,
    pub beta0: Option<[f64; 2]>,
    pub samples: usize,
    /// Evaluation points `x` for `picken-eval`.
    pub points: Vec<[f64; 2]>,
    /// Contour height inside `γ≠0`; the default is the scaled witness.
    pub height: Option<[f64; 2]>,
    /// Use the per-`n` denominators in the `ΩSU(2)` Picken sum.
    pub per_n_closed_form: bool,
    pub piece: String,
    /// `ζ` for `dh-su2-probe` as `[[re, im], [re, im]]`.
    pub zeta: [[f64; 2]; 2],
    /// Contour heights for `dh-su2-probe`.
    pub heights: Option<[[f64; 2]; 2]>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: None,
            output: None,
            grid: None,
            grid_im: None,
            euler_order: 10_000,
            truncation: None,
            contour: ContourConfig::default(),
            probe_contour: ContourConfig {
                r0: 8.0,
                tol: 1e-6,
                order: 32,
                ..ContourConfig::default()
            },
            boundary: BoundarySpec {
                first: 3,
                last: 8,
                levels: 3,
            },
            s2_polarization: -1,
            n: 1,
            m: 2,
            modes: [0, 1],
            phi: 1.1,
            psi: 0.4,
            a: None,
            beta0: None,
            samples: 256,
            points: vec![[0.13, 1.7]],
            height: None,
            per_n_closed_form: false,
            piece: "--".into(),
            zeta: [[0.3, 0.5], [0.2, 0.5]],
            heights: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(t) = self.tolerance {
            if !(t > 0.0) {
                return Err(ConfigError::Invalid(format!("tolerance {t} must be positive")));
            }
        }
        if let Some(g) = &self.grid {
            g.validate("grid")?;
        }
        if let Some(g) = &self.grid_im {
            g.validate("grid_im")?;
        }
        if self.euler_order == 0 {
            return Err(ConfigError::Invalid("euler_order must be positive".into()));
        }
        for c in [&self.contour, &self.probe_contour] {
            if !(c.delta > 0.0 && c.r0 > 0.0 && c.r_max >= c.r0 && c.tol > 0.0 && c.order >= 2 && c.panel_width > 0.0) {
                return Err(ConfigError::Invalid(format!("contour settings {c:?}")));
            }
        }
        let b = &self.boundary;
        if b.last - b.first + 1 < b.levels as i32 + 2 {
            return Err(ConfigError::Invalid(format!("boundary {b:?}: need levels + 2 values of eps")));
        }
        if self.s2_polarization == 0 {
            return Err(ConfigError::Invalid("s2_polarization must be nonzero".into()));
        }
        if self.samples == 0 {
            return Err(ConfigError::Invalid("samples must be positive".into()));
        }
        if self.points.is_empty() {
            return Err(ConfigError::Invalid("points is empty".into()));
        }
        Ok(())
    }

    pub fn tolerance_or(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    pub fn zeta(&self) -> [Complex64; 2] {
        self.zeta.map(|[re, im]| Complex64::new(re, im))
    }
}
