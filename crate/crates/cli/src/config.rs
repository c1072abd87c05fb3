//! Declarative run configuration. Every table rejects unknown keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use telefock::teleporter::{ExperimentConfig, GridSpec, Radius};
use telefock::tomography::TomographyOptions;
use telefock::{DensityOperator, StateVector, C64};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; `--seed` takes precedence.
    pub seed: Option<u64>,
    pub experiment: Option<ExperimentConfig>,
    pub input: Option<InputSpec>,
    pub teleport: Option<TeleportSection>,
    pub curve: Option<CurveSection>,
    pub tomo: Option<TomoSection>,
    pub filter: Option<FilterSection>,
}

/// Single-mode input state.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InputSpec {
    /// Diagonal mixture `Σ p_n |n⟩⟨n|`.
    Populations {
        populations: Vec<f64>,
        dim: Option<usize>,
    },
    Fock {
        n: usize,
        dim: Option<usize>,
    },
    Coherent {
        re: f64,
        im: f64,
        dim: usize,
    },
    Vacuum {
        dim: Option<usize>,
    },
    /// State JSON file, relative to the config file.
    File {
        path: PathBuf,
    },
}

impl InputSpec {
    pub fn build(&self, base: &Path) -> CliResult<DensityOperator> {
        Ok(match self {
            Self::Populations { populations, dim } => {
                DensityOperator::diagonal(populations, dim.unwrap_or(populations.len().max(2)))?
            }
            Self::Fock { n, dim } => DensityOperator::fock(*n, dim.unwrap_or(n + 2))?,
            Self::Coherent { re, im, dim } => {
                StateVector::coherent(C64::new(*re, *im), *dim)?.density()
            }
            Self::Vacuum { dim } => DensityOperator::vacuum(&[dim.unwrap_or(2)])?,
            Self::File { path } => {
                let path = base.join(path);
                DensityOperator::from_json(&read_text(&path)?)?
            }
        })
    }

    pub fn referenced_file(&self, base: &Path) -> Option<PathBuf> {
        match self {
            Self::File { path } => Some(base.join(path)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerSpec {
    pub enabled: bool,
    pub half: f64,
    pub step: f64,
}

impl Default for WignerSpec {
    fn default() -> Self {
        Self {
            enabled: true,
            half: 5.0,
            step: 0.1,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TeleportSection {
    /// Conditioning radii; `experiment.radius_L` when absent.
    pub radii: Option<Vec<Radius>>,
    pub wigner: WignerSpec,
    /// Also run `experiment.shots` Monte Carlo shots per radius.
    pub monte_carlo: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveSection {
    /// Explicit radii; otherwise `0, step, .., l_max`.
    pub radii: Option<Vec<f64>>,
    pub l_max: f64,
    pub l_step: f64,
}

impl Default for CurveSection {
    fn default() -> Self {
        Self {
            radii: None,
            l_max: 4.0,
            l_step: 0.1,
        }
    }
}

impl CurveSection {
    pub fn grid(&self) -> Vec<f64> {
        match &self.radii {
            Some(r) => r.clone(),
            None => {
                let n = (self.l_max / self.l_step).round() as usize;
                (0..=n).map(|i| i as f64 * self.l_step).collect()
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomoSection {
    /// Records CSV, relative to the config file.
    pub records: Option<PathBuf>,
    /// Sample records from `[input]` instead of reading them.
    pub simulate: bool,
    pub events: usize,
    pub phases: usize,
    pub options: TomographyOptions,
}

impl Default for TomoSection {
    fn default() -> Self {
        Self {
            records: None,
            simulate: false,
            events: 100_000,
            phases: 12,
            options: TomographyOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProgramSpec {
    /// Coefficient-matrix JSON file, relative to the config file.
    File {
        path: PathBuf,
    },
    Scissors,
    Tmsv {
        g: f64,
        dim: usize,
    },
    Amplifier {
        gamma: f64,
        dim: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub program: ProgramSpec,
    #[serde(rename = "radius_L")]
    pub radius: Radius,
    #[serde(default = "unit_gain")]
    pub gain_g: f64,
    #[serde(default)]
    pub grid: GridSpec,
}

fn unit_gain() -> f64 {
    1.0
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parsed config with its location.
pub struct LoadedConfig {
    pub path: PathBuf,
    pub base: PathBuf,
    pub config: RunConfig,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_text(path)?;
        let config: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::config(path, e.to_string()))?;
        if let (Some(top), Some(exp)) = (config.seed, config.experiment.as_ref()) {
            if exp.seed != 0 && exp.seed != top {
                return Err(CliError::config(
                    path,
                    "`seed` and `experiment.seed` disagree",
                ));
            }
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self {
            path: path.to_path_buf(),
            base,
            config,
        })
    }

    /// `--seed`, then the top-level seed, then `experiment.seed`.
    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.config.seed)
            .or(self.config.experiment.as_ref().map(|e| e.seed))
            .unwrap_or(0)
    }

    pub fn require<'a, T>(&self, section: &'a Option<T>, name: &str) -> CliResult<&'a T> {
        section
            .as_ref()
            .ok_or_else(|| CliError::config(&self.path, format!("missing `[{name}]` section")))
    }

    pub fn input(&self) -> CliResult<DensityOperator> {
        self.require(&self.config.input, "input")?.build(&self.base)
    }

    /// Files other than the config that feed the run.
    pub fn referenced_files(&self) -> Vec<PathBuf> {
        let mut files = Vec::new();
        if let Some(f) = self
            .config
            .input
            .as_ref()
            .and_then(|i| i.referenced_file(&self.base))
        {
            files.push(f);
        }
        if let Some(p) = self.config.tomo.as_ref().and_then(|t| t.records.as_ref()) {
            files.push(self.base.join(p));
        }
        if let Some(FilterSection {
            program: ProgramSpec::File { path },
            ..
        }) = &self.config.filter
        {
            files.push(self.base.join(path));
        }
        files
    }
}
