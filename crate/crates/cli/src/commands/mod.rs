//! One module per subcommand. Each returns a JSON diagnostics block for the
//! manifest.

pub mod curve;
pub mod filter;
pub mod teleport;
pub mod tomo;

use serde::Serialize;
use telefock::analysis::{photon_number_distribution, uniform_axis, wigner_grid, wigner_origin};
use telefock::teleporter::ExperimentConfig;
use telefock::DensityOperator;

use crate::config::{LoadedConfig, WignerSpec};
use crate::error::CliResult;
use crate::manifest::OutputDir;

pub struct Context<'a> {
    pub loaded: LoadedConfig,
    pub seed: u64,
    pub out: &'a mut OutputDir,
}

impl Context<'_> {
    /// `[experiment]` with the effective seed applied.
    pub fn experiment(&self) -> CliResult<ExperimentConfig> {
        let mut exp = self
            .loaded
            .require(&self.loaded.config.experiment, "experiment")?
            .clone();
        exp.seed = self.seed;
        exp.validate()?;
        Ok(exp)
    }
}

/// Summary statistics of one state written by a command.
#[derive(Debug, Serialize)]
pub struct StateSummary {
    pub file: String,
    pub w00: f64,
    pub populations: Vec<f64>,
    pub odd_sum: f64,
    pub odd_exceeds_half: bool,
    pub wigner_file: Option<String>,
}

/// Writes `<stem>.json` and, if enabled, `wigner_<stem>.csv`.
pub fn write_state(
    out: &mut OutputDir,
    stem: &str,
    rho: &DensityOperator,
    wigner: &WignerSpec,
) -> CliResult<StateSummary> {
    let file = format!("{stem}.json");
    out.write(&file, &(rho.to_json()? + "\n"))?;
    let dist = photon_number_distribution(rho)?;
    let wigner_file = if wigner.enabled {
        let axis = uniform_axis(wigner.half, wigner.step)?;
        let grid = wigner_grid(rho, &axis, &axis)?;
        let name = format!("wigner_{stem}.csv");
        out.write(&name, &grid.to_csv())?;
        Some(name)
    } else {
        None
    };
    Ok(StateSummary {
        file,
        w00: wigner_origin(rho)?,
        populations: dist.populations,
        odd_sum: dist.odd_sum,
        odd_exceeds_half: dist.odd_exceeds_half,
        wigner_file,
    })
}
