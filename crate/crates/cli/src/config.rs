use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use surface_poisson::lie_core::LieGroupSpec;
use surface_poisson::surface_words::SurfaceData;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("unknown group {0:?}")]
    Group(String),
    #[error("invalid surface: genus {genus}, {boundaries} boundary circles")]
    Surface { genus: usize, boundaries: usize },
    #[error("tolerance {name} must be positive, got {value}")]
    Tolerance { name: &'static str, value: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Check thresholds. Every numeric record in a report carries the one it was
/// compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub relation: f64,
    pub complex: f64,
    pub diagram: f64,
    pub closed: f64,
    pub invariance: f64,
    pub momentum: f64,
    pub casimir: f64,
    pub jacobi: f64,
    pub flow: f64,
    pub self_bracket: f64,
    pub slope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            relation: 1e-10,
            complex: 1e-9,
            diagram: 1e-6,
            closed: 1e-5,
            invariance: 1e-9,
            momentum: 1e-6,
            casimir: 1e-6,
            jacobi: 1e-3,
            flow: 1e-4,
            self_bracket: 1e-10,
            slope: 1e3,
        }
    }
}

impl Tolerances {
    fn entries(&self) -> [(&'static str, f64); 11] {
        [
            ("relation", self.relation),
            ("complex", self.complex),
            ("diagram", self.diagram),
            ("closed", self.closed),
            ("invariance", self.invariance),
            ("momentum", self.momentum),
            ("casimir", self.casimir),
            ("jacobi", self.jacobi),
            ("flow", self.flow),
            ("self_bracket", self.self_bracket),
            ("slope", self.slope),
        ]
    }
}

/// A path of class targets for `bracket`: per boundary circle, torus
/// coordinates `nu` at the start and the end, joined linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BracketConfig {
    pub f: String,
    pub g: String,
    pub start: Vec<Vec<f64>>,
    pub end: Vec<Vec<f64>>,
    pub steps: usize,
}

impl Default for BracketConfig {
    fn default() -> Self {
        Self {
            f: "x1".into(),
            g: "y1".into(),
            start: Vec::new(),
            end: Vec::new(),
            steps: 11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub group: String,
    pub genus: usize,
    pub boundaries: usize,
    pub seed: u64,
    pub samples: usize,
    /// Class targets `nu` per boundary circle; empty means free sampling.
    pub classes: Vec<Vec<f64>>,
    /// Use the wrong sign on the beta term of the total form.
    pub tamper_beta: bool,
    pub tolerances: Tolerances,
    pub bracket: BracketConfig,
    // Output locations are not part of the echo so that reruns into
    // different files compare equal.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            group: "SU(2)".into(),
            genus: 1,
            boundaries: 2,
            seed: 0,
            samples: 20,
            classes: Vec::new(),
            tamper_beta: false,
            tolerances: Tolerances::default(),
            bracket: BracketConfig::default(),
            out: None,
            csv: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn spec(&self) -> Result<LieGroupSpec, ConfigError> {
        self.group.parse().map_err(|_| ConfigError::Group(self.group.clone()))
    }

    pub fn surface(&self) -> Result<SurfaceData, ConfigError> {
        SurfaceData::new(self.genus, self.boundaries).map_err(|_| ConfigError::Surface {
            genus: self.genus,
            boundaries: self.boundaries,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let spec = self.spec()?;
        self.surface()?;
        for (name, value) in self.tolerances.entries() {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::Tolerance { name, value });
            }
        }
        for nu in self.classes.iter().chain(&self.bracket.start).chain(&self.bracket.end) {
            if nu.len() != spec.n() {
                return Err(ConfigError::Invalid(format!(
                    "class target {nu:?} needs {} coordinates for {spec}",
                    spec.n()
                )));
            }
        }
        if !self.classes.is_empty() && self.classes.len() != self.boundaries {
            return Err(ConfigError::Invalid(format!(
                "{} class targets for {} boundary circles",
                self.classes.len(),
                self.boundaries
            )));
        }
        if self.bracket.steps < 2 {
            return Err(ConfigError::Invalid("a bracket path needs at least 2 steps".into()));
        }
        Ok(())
    }
}
