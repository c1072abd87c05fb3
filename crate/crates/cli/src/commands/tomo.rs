use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use telefock::analysis::{photon_number_distribution, wigner_origin};
use telefock::fock::fidelity;
use telefock::tomography::{
    bootstrap_errors, mle_reconstruct, read_records, sample_homodyne, uniform_phases, write_records,
};
use telefock::Error;

use super::Context;
use crate::config::read_text;
use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
struct Report {
    events: usize,
    discarded: usize,
    iterations: usize,
    converged: bool,
    log_likelihood: f64,
    w00: f64,
    w00_bootstrap_stddev: Option<f64>,
    bootstrap_replicas: usize,
    populations: Vec<f64>,
    /// Fidelity to the simulated input, when records were simulated.
    fidelity_to_input: Option<f64>,
}

pub fn run(ctx: &mut Context<'_>) -> CliResult<Value> {
    let section = ctx.loaded.require(&ctx.loaded.config.tomo, "tomo")?.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (records, truth) = match (&section.records, section.simulate) {
        (Some(path), false) => (
            read_records(&read_text(&ctx.loaded.base.join(path))?)?,
            None,
        ),
        (None, true) => {
            let truth = ctx.loaded.input()?;
            if section.phases == 0 || section.events < section.phases {
                return Err(CliError::config(
                    &ctx.loaded.path,
                    "need at least one event per phase",
                ));
            }
            let per_phase = section.events / section.phases;
            let records =
                sample_homodyne(&truth, &uniform_phases(section.phases), per_phase, &mut rng)?;
            ctx.out.write("records.csv", &write_records(&records))?;
            (records, Some(truth))
        }
        _ => {
            return Err(CliError::config(
                &ctx.loaded.path,
                "`[tomo]` needs exactly one of `records` or `simulate = true`",
            ))
        }
    };
    let opts = &section.options;
    let rec = mle_reconstruct(&records, opts)?;
    ctx.out
        .write("reconstruction.json", &(rec.state.to_json()? + "\n"))?;
    if !rec.converged {
        return Err(Error::Tomography(format!(
            "likelihood still rising after {} iterations (tol {})",
            rec.iterations, opts.tol
        ))
        .into());
    }
    let boot = match opts.n_bootstrap {
        0 => None,
        b => Some(bootstrap_errors(
            &records,
            wigner_origin,
            b,
            opts,
            &mut rng,
        )?),
    };
    let fidelity_to_input = match &truth {
        Some(t) => {
            let d = rec.state.dim();
            let t = if t.dim() >= d {
                t.resized(d)?
            } else {
                t.clone()
            };
            let r = if t.dim() < d {
                rec.state.resized(t.dim())?
            } else {
                rec.state.clone()
            };
            Some(fidelity(&r, &t)?)
        }
        None => None,
    };
    let report = Report {
        events: records.len(),
        discarded: rec.discarded,
        iterations: rec.iterations,
        converged: rec.converged,
        log_likelihood: rec.log_likelihood,
        w00: wigner_origin(&rec.state)?,
        w00_bootstrap_stddev: boot.as_ref().map(|b| b.stddev),
        bootstrap_replicas: opts.n_bootstrap,
        populations: photon_number_distribution(&rec.state)?.populations,
        fidelity_to_input,
    };
    ctx.out.write_json("report.json", &report)?;
    Ok(json!({
        "iterations": report.iterations,
        "log_likelihood": report.log_likelihood,
        "w00": report.w00,
        "w00_bootstrap_stddev": report.w00_bootstrap_stddev,
    }))
}
