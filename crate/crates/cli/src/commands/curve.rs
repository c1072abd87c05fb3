use std::fmt::Write as _;

use serde_json::{json, Value};
use telefock::fock::TruncationPolicy;
use telefock::teleporter::{build_resource, GridSpec, LossPlacement, Radius, Teleporter};
use telefock::DensityOperator;

use super::Context;
use crate::error::{CliError, CliResult};

/// `P(L)` of the configured experiment next to the two-mode-vacuum curve.
pub fn run(ctx: &mut Context<'_>) -> CliResult<Value> {
    let exp = ctx.experiment()?;
    let section = ctx.loaded.config.curve.clone().unwrap_or_default();
    let input = ctx.loaded.input()?;
    let grid = section.grid();
    if grid.is_empty() {
        return Err(CliError::config(&ctx.loaded.path, "empty radius grid"));
    }
    let radii = grid
        .iter()
        .map(|&l| Radius::new(l))
        .collect::<telefock::Result<Vec<_>>>()?;
    let model = Teleporter::new(&exp)?.success_probability(&input, &radii)?;
    let vacuum_resource = build_resource(
        0.0,
        0.0,
        2,
        LossPlacement::Both,
        &TruncationPolicy::default(),
    )?;
    let vacuum_tele = Teleporter::with_resource(vacuum_resource, 1.0, 2, GridSpec::default())?;
    let vacuum = vacuum_tele.success_probability(&DensityOperator::vacuum(&[2])?, &radii)?;
    let mut csv = String::from("L,P_model,P_vacuum\n");
    let mut worst_vacuum = 0.0_f64;
    for ((l, p), (_, v)) in model.iter().zip(&vacuum) {
        let lv = l.value();
        worst_vacuum = worst_vacuum.max((v - (1.0 - (-lv * lv).exp())).abs());
        let _ = writeln!(csv, "{lv:.15e},{p:.15e},{v:.15e}");
    }
    ctx.out.write("curve.csv", &csv)?;
    let monotone = model
        .windows(2)
        .all(|w| w[1].1 >= w[0].1 || w[1].0.value() < w[0].0.value());
    Ok(json!({
        "points": model.len(),
        "vacuum_max_deviation_from_closed_form": worst_vacuum,
        "model_monotone": monotone,
    }))
}
