use serde::Serialize;
use serde_json::{json, Value};
use telefock::filters::{apply_program_filter, ProgramState};
use telefock::fock::{fidelity, trace_distance};
use telefock::teleporter::{Diagnostics, Radius};

use super::{write_state, Context, StateSummary};
use crate::config::{read_text, ProgramSpec, WignerSpec};
use crate::error::CliResult;

#[derive(Debug, Serialize)]
struct Report {
    radius: Radius,
    probability: f64,
    /// `L² Tr[FρF†]/‖f‖²`, the small-radius estimate of the probability.
    small_radius_probability: Option<f64>,
    heralding_weight: f64,
    fidelity_to_target: f64,
    trace_distance_to_target: f64,
    filtered: StateSummary,
    target: StateSummary,
    diagnostics: Diagnostics,
}

pub fn run(ctx: &mut Context<'_>) -> CliResult<Value> {
    let section = ctx
        .loaded
        .require(&ctx.loaded.config.filter, "filter")?
        .clone();
    let program = match &section.program {
        ProgramSpec::File { path } => {
            ProgramState::from_json(&read_text(&ctx.loaded.base.join(path))?)?
        }
        ProgramSpec::Scissors => ProgramState::scissors(),
        ProgramSpec::Tmsv { g, dim } => ProgramState::tmsv(*g, *dim)?,
        ProgramSpec::Amplifier { gamma, dim } => ProgramState::amplifier(*gamma, *dim)?,
    };
    let input = ctx.loaded.input()?;
    let target = program.target(&input)?;
    let res = apply_program_filter(
        &program,
        &input,
        section.radius,
        section.gain_g,
        &section.grid,
    )?;
    let wigner = WignerSpec {
        enabled: false,
        ..WignerSpec::default()
    };
    let filtered = write_state(ctx.out, "filtered", &res.state, &wigner)?;
    let target_summary = write_state(ctx.out, "target", &target.state, &wigner)?;
    let small_radius_probability = if section.radius.is_infinite() {
        None
    } else {
        Some(program.small_radius_probability(&input, section.radius.value())?)
    };
    let report = Report {
        radius: section.radius,
        probability: res.probability,
        small_radius_probability,
        heralding_weight: target.weight,
        fidelity_to_target: fidelity(&res.state, &target.state)?,
        trace_distance_to_target: trace_distance(&res.state, &target.state)?,
        filtered,
        target: target_summary,
        diagnostics: res.diagnostics,
    };
    ctx.out.write_json("report.json", &report)?;
    Ok(json!({
        "probability": report.probability,
        "fidelity_to_target": report.fidelity_to_target,
        "grid": report.diagnostics,
    }))
}
