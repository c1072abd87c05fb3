use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use telefock::fock::fidelity;
use telefock::teleporter::{Diagnostics, Radius, SampleSummary, Teleporter};

use super::{write_state, Context, StateSummary};
use crate::error::CliResult;

#[derive(Debug, Serialize)]
struct MonteCarlo {
    shots: usize,
    accepted: usize,
    acceptance: f64,
    standard_error: f64,
    /// Fidelity of the accepted-shot ensemble to the integrated state.
    ensemble_fidelity: Option<f64>,
}

#[derive(Debug, Serialize)]
struct OutputReport {
    radius: Radius,
    probability: f64,
    #[serde(flatten)]
    state: StateSummary,
    diagnostics: Diagnostics,
    monte_carlo: Option<MonteCarlo>,
}

#[derive(Debug, Serialize)]
struct Summary {
    input: StateSummary,
    outputs: Vec<OutputReport>,
}

pub fn run(ctx: &mut Context<'_>) -> CliResult<Value> {
    let exp = ctx.experiment()?;
    let section = ctx.loaded.config.teleport.clone().unwrap_or_default();
    let input = ctx.loaded.input()?;
    let tele = Teleporter::new(&exp)?;
    let radii = section.radii.clone().unwrap_or_else(|| vec![exp.radius]);
    let input_summary = write_state(ctx.out, "input", &input, &section.wigner)?;
    let mut seeds = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut outputs = Vec::new();
    for radius in radii {
        log::info!("teleporting at L = {radius}");
        let res = tele.teleport(&input, radius)?;
        let state = write_state(
            ctx.out,
            &format!("output_L{radius}"),
            &res.state,
            &section.wigner,
        )?;
        let shot_seed = seeds.next_u64();
        let monte_carlo = if section.monte_carlo {
            let shots = tele
                .sampler(&input)?
                .run_shots(radius, exp.shots, shot_seed)?;
            let summary = SampleSummary::from_records(&shots)?;
            let ensemble_fidelity = match &summary.state {
                Some(s) => Some(fidelity(s, &res.state)?),
                None => None,
            };
            Some(MonteCarlo {
                shots: summary.shots,
                accepted: summary.accepted,
                acceptance: summary.acceptance(),
                standard_error: summary.standard_error(),
                ensemble_fidelity,
            })
        } else {
            None
        };
        outputs.push(OutputReport {
            radius,
            probability: res.probability,
            state,
            diagnostics: res.diagnostics,
            monte_carlo,
        });
    }
    let summary = Summary {
        input: input_summary,
        outputs,
    };
    ctx.out.write_json("summary.json", &summary)?;
    let per_radius: Vec<Value> = summary
        .outputs
        .iter()
        .map(|o| json!({"radius": o.radius, "probability": o.probability, "w00": o.state.w00, "grid": o.diagnostics}))
        .collect();
    Ok(json!({
        "resource_truncation": tele.resource().truncation_weight(),
        "input_w00": summary.input.w00,
        "outputs": per_radius,
    }))
}
