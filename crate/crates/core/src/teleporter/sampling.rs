use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{Radius, Teleporter};
use crate::fock::{CMatrix, LnFactorials, C64};
use crate::{BellOutcome, DensityOperator, Error, Result};

/// Proposal variance relative to the analytic outcome variance.
const INFLATION: f64 = 1.5;
/// Safety factor on the scanned maximum of density / proposal.
const ENVELOPE_MARGIN: f64 = 1.2;
const SCAN_POINTS: usize = 61;
const SCAN_SDS: f64 = 6.0;
const REJECTION_CAP: usize = 100_000;

/// Result of one heralding attempt.
#[derive(Clone, Debug)]
pub struct ShotRecord {
    pub outcome: BellOutcome,
    pub accepted: bool,
    /// Normalized feed-forward-corrected output when accepted.
    pub state: Option<DensityOperator>,
}

/// Acceptance statistics and ensemble-averaged output of many shots.
#[derive(Clone, Debug)]
pub struct SampleSummary {
    pub shots: usize,
    pub accepted: usize,
    pub state: Option<DensityOperator>,
}

impl SampleSummary {
    pub fn from_records(records: &[ShotRecord]) -> Result<Self> {
        let mut sum: Option<CMatrix> = None;
        let mut accepted = 0;
        for s in records.iter().filter_map(|r| r.state.as_ref()) {
            accepted += 1;
            match &mut sum {
                Some(m) => *m += s.matrix(),
                None => sum = Some(s.matrix().clone()),
            }
        }
        let state = match sum {
            Some(m) => Some(DensityOperator::single(m)?.normalized()?),
            None => None,
        };
        Ok(Self {
            shots: records.len(),
            accepted,
            state,
        })
    }

    pub fn acceptance(&self) -> f64 {
        self.accepted as f64 / self.shots.max(1) as f64
    }

    /// Binomial standard error of [`acceptance`](Self::acceptance).
    pub fn standard_error(&self) -> f64 {
        let p = self.acceptance();
        (p * (1.0 - p) / self.shots.max(1) as f64).sqrt()
    }
}

/// Rejection sampler of Bell outcomes against an independent Gaussian
/// proposal built from the analytic outcome moments.
pub struct Sampler<'a> {
    tele: &'a Teleporter,
    rho: CMatrix,
    lnf: LnFactorials,
    mean: (f64, f64),
    sd: (f64, f64),
    envelope: f64,
}

fn gauss(x: f64, mu: f64, sd: f64) -> f64 {
    let z = (x - mu) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

impl<'a> Sampler<'a> {
    pub(super) fn new(tele: &'a Teleporter, rho: CMatrix) -> Result<Self> {
        let m = tele.moments_of(&rho);
        if !(m.var_x > 0.0 && m.var_p > 0.0) {
            return Err(Error::Sampling("degenerate outcome variance".into()));
        }
        let sd = ((INFLATION * m.var_x).sqrt(), (INFLATION * m.var_p).sqrt());
        let mean = (m.mean.re, m.mean.im);
        let lnf = tele.factorials(rho.ncols());
        let mut s = Self {
            tele,
            rho,
            lnf,
            mean,
            sd,
            envelope: 0.0,
        };
        let axis = |mu: f64, sd: f64| -> Vec<f64> {
            (0..SCAN_POINTS)
                .map(|i| mu + sd * SCAN_SDS * (2.0 * i as f64 / (SCAN_POINTS - 1) as f64 - 1.0))
                .collect()
        };
        let xs = axis(mean.0, sd.0);
        let ps = axis(mean.1, sd.1);
        let ratio = xs
            .par_iter()
            .map(|&x| ps.iter().map(|&p| s.ratio(x, p)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max);
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::Sampling(
                "outcome density vanishes on the scan grid".into(),
            ));
        }
        s.envelope = ENVELOPE_MARGIN * ratio;
        Ok(s)
    }

    fn proposal(&self, x: f64, p: f64) -> f64 {
        gauss(x, self.mean.0, self.sd.0) * gauss(p, self.mean.1, self.sd.1)
    }

    fn ratio(&self, x: f64, p: f64) -> f64 {
        self.tele.density_at(&self.rho, C64::new(x, p), &self.lnf) / self.proposal(x, p)
    }

    /// Envelope constant `M` with `f ≤ M q`.
    pub fn envelope(&self) -> f64 {
        self.envelope
    }

    /// Draws one outcome from the joint outcome density.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BellOutcome> {
        for _ in 0..REJECTION_CAP {
            let x = self.mean.0 + self.sd.0 * rng.sample::<f64, _>(StandardNormal);
            let p = self.mean.1 + self.sd.1 * rng.sample::<f64, _>(StandardNormal);
            let r = self.ratio(x, p);
            if r > self.envelope {
                return Err(Error::Sampling(format!(
                    "density/proposal ratio {r:.3e} exceeds envelope {:.3e} at ({x:.3}, {p:.3})",
                    self.envelope
                )));
            }
            if rng.random::<f64>() * self.envelope < r {
                return BellOutcome::new(x, p);
            }
        }
        Err(Error::Sampling(format!(
            "no acceptance in {REJECTION_CAP} proposals"
        )))
    }

    /// Draws an outcome, applies the acceptance test and, when accepted,
    /// returns the normalized output.
    pub fn run<R: Rng + ?Sized>(&self, radius: Radius, rng: &mut R) -> Result<ShotRecord> {
        let outcome = self.draw(rng)?;
        let accepted = radius.contains(&outcome);
        let state = if accepted {
            let (out, _) = self.tele.node(
                std::slice::from_ref(&self.rho),
                outcome.amplitude(),
                &self.lnf,
            );
            let out = super::hermitian_part(&out[0]);
            Some(DensityOperator::new(vec![self.tele.output_dim], out)?.normalized()?)
        } else {
            None
        };
        Ok(ShotRecord {
            outcome,
            accepted,
            state,
        })
    }

    /// `shots` independent runs; shot `i` uses ChaCha8 seeded with `seed` on
    /// stream `i`, so results do not depend on scheduling.
    pub fn run_shots(&self, radius: Radius, shots: usize, seed: u64) -> Result<Vec<ShotRecord>> {
        (0..shots)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                self.run(radius, &mut rng)
            })
            .collect()
    }
}
