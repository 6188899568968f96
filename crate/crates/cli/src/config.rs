//! The single JSON run configuration.

use std::path::Path;

use serde::Deserialize;
use viscokit::calibration::{FreeParameter, OptimizerSettings};
use viscokit::driver::LoadingProgram;
use viscokit::model::ViscoModel;
use viscokit::volumetric::{VolumetricFamily, VolumetricModel};

use crate::error::{io_err, CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ViscoModel>,
    pub program: Option<LoadingProgram>,
    pub fit: Option<FitSection>,
    pub tabulate: Option<TabulateSection>,
    pub verify: Option<VerifySection>,
    pub seed: Option<u64>,
    /// Worker threads for independent model evaluations; defaults to the
    /// available parallelism.
    pub threads: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub parameters: Vec<FreeParameter>,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TabulateSection {
    pub families: Vec<VolumetricModel>,
    pub j_min: f64,
    pub j_max: f64,
    /// Pressure range in units of κ.
    pub p_min: f64,
    pub p_max: f64,
    pub points: usize,
}

impl Default for TabulateSection {
    fn default() -> Self {
        let fams = [
            VolumetricFamily::Incompressible,
            VolumetricFamily::Quadratic,
            VolumetricFamily::St91,
            VolumetricFamily::M94,
            VolumetricFamily::L94,
            VolumetricFamily::Ansys2000,
            VolumetricFamily::Hn03,
            VolumetricFamily::O72 { gamma: 2.0 },
        ];
        TabulateSection {
            families: fams.into_iter().map(|f| VolumetricModel::new(f, 1.0)).collect(),
            j_min: 0.5,
            j_max: 2.0,
            p_min: -0.9,
            p_max: 0.9,
            points: 61,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub samples: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection { samples: 20 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn require_model(&self) -> CliResult<&ViscoModel> {
        let m = self.model.as_ref().ok_or_else(|| CliError::Config("missing `model` section".into()))?;
        m.validate().map_err(|e| CliError::Config(format!("model: {e}")))?;
        Ok(m)
    }
}
