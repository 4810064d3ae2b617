//! Run configuration file (JSON). Command-line flags override it.

use std::path::{Path, PathBuf};

use freqalloc_core::{Architecture, LatticeKind, LatticeSpec, SolveConfig};
use serde::{Deserialize, Serialize};

use crate::io::IoError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub kind: LatticeKind,
    pub cells: usize,
    #[serde(default)]
    pub periodic: bool,
}

impl LatticeSection {
    pub fn spec(&self) -> LatticeSpec {
        LatticeSpec::new(self.kind, self.cells, self.periodic)
    }
}

/// Per-key threshold overrides, MHz.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdOverrides {
    #[serde(rename = "A1")]
    pub a1: Option<f64>,
    #[serde(rename = "A2")]
    pub a2: Option<f64>,
    #[serde(rename = "C1")]
    pub c1: Option<f64>,
    #[serde(rename = "E1")]
    pub e1: Option<f64>,
    #[serde(rename = "E2")]
    pub e2: Option<f64>,
    #[serde(rename = "D1")]
    pub d1: Option<f64>,
    #[serde(rename = "S1")]
    pub s1: Option<f64>,
    #[serde(rename = "S2")]
    pub s2: Option<f64>,
    #[serde(rename = "T1")]
    pub t1: Option<f64>,
}

impl ThresholdOverrides {
    pub fn apply(&self, t: &mut freqalloc_core::ThresholdTable) {
        let pairs = [
            (self.a1, &mut t.delta_a1),
            (self.a2, &mut t.delta_a2),
            (self.c1, &mut t.delta_c1),
            (self.e1, &mut t.delta_e1),
            (self.e2, &mut t.delta_e2),
            (self.d1, &mut t.delta_d1),
            (self.s1, &mut t.delta_s1),
            (self.s2, &mut t.delta_s2),
            (self.t1, &mut t.delta_t1),
        ];
        for (v, slot) in pairs {
            if let Some(v) = v {
                *slot = v;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionSection {
    pub sigmas: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self {
            sigmas: vec![10.0, 20.0, 30.0, 40.0, 50.0, 60.0],
            trials: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: Option<LatticeSection>,
    /// Custom graph JSON; relative paths resolve against the config file.
    pub graph: Option<PathBuf>,
    pub architecture: Option<Architecture>,
    pub thresholds: ThresholdOverrides,
    pub solver: SolveConfig,
    pub dispersion: DispersionSection,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|err| IoError::Io {
            path: path.into(),
            err,
        })?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|err| IoError::Json {
            path: path.into(),
            err,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(g) = &cfg.graph {
            let resolved = if g.is_relative() { base.join(g) } else { g.clone() };
            if !resolved.exists() {
                return Err(IoError::Invalid {
                    path: path.into(),
                    message: format!("graph file {} does not exist", resolved.display()),
                });
            }
            cfg.graph = Some(resolved);
        }
        let mut table = freqalloc_core::ThresholdTable::default();
        cfg.thresholds.apply(&mut table);
        table.validate().map_err(|e| IoError::Invalid {
            path: path.into(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }
}
