//! Simulated homodyne tomography: quadrature sampling, binned
//! maximum-likelihood reconstruction and bootstrap error bars.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fock::{CMatrix, CVector, C64};
use crate::{DensityOperator, Error, Result};

/// One homodyne event: local-oscillator phase and measured quadrature.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRecord {
    pub theta: f64,
    pub value: f64,
}

impl QuadratureRecord {
    pub fn new(theta: f64, value: f64) -> Result<Self> {
        if !(theta.is_finite() && value.is_finite()) {
            return Err(Error::Domain("record fields must be finite".into()));
        }
        if !(0.0..PI).contains(&theta) {
            return Err(Error::Domain(format!("phase {theta} outside [0, π)")));
        }
        Ok(Self { theta, value })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomographyOptions {
    /// Reconstruction cutoff (levels).
    pub dim: usize,
    pub bin_width: f64,
    /// Bins cover `[-range, range]`.
    pub range: f64,
    pub max_iters: usize,
    /// Stop when the relative log-likelihood gain falls below this.
    pub tol: f64,
    pub n_bootstrap: usize,
    /// More distinct phases than this are grouped into equal-width bins.
    pub max_phases: usize,
}

impl Default for TomographyOptions {
    fn default() -> Self {
        Self {
            dim: 8,
            bin_width: 0.05,
            range: 6.0,
            max_iters: 500,
            tol: 1e-9,
            n_bootstrap: 100,
            max_phases: 64,
        }
    }
}

impl TomographyOptions {
    fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidDimension(format!(
                "reconstruction dimension {}",
                self.dim
            )));
        }
        if !(self.bin_width > 0.0 && self.range > 0.0 && self.tol >= 0.0) {
            return Err(Error::Domain(
                "bin width and range must be > 0, tol ≥ 0".into(),
            ));
        }
        if self.max_iters == 0 || self.max_phases == 0 {
            return Err(Error::Domain("max_iters and max_phases must be ≥ 1".into()));
        }
        Ok(())
    }

    fn bins(&self) -> usize {
        (2.0 * self.range / self.bin_width).round() as usize
    }

    fn bin_center(&self, j: usize) -> f64 {
        -self.range + (j as f64 + 0.5) * self.bin_width
    }
}

/// Equally spaced phases `kπ/count`.
pub fn uniform_phases(count: usize) -> Vec<f64> {
    (0..count).map(|k| PI * k as f64 / count as f64).collect()
}

/// Oscillator eigenfunctions `ψ_0..ψ_{dim−1}` at `x` (vacuum variance 1/2).
pub fn eigenfunctions(x: f64, dim: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(dim);
    psi.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if dim > 1 {
        psi.push(std::f64::consts::SQRT_2 * x * psi[0]);
    }
    for n in 1..dim.saturating_sub(1) {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * psi[n] - (nf / (nf + 1.0)).sqrt() * psi[n - 1];
        psi.push(next);
    }
    psi
}

/// `u_n = e^{inθ} ψ_n(x)`, so that `p_θ(x) = u† ρ u`.
fn rotated(x: f64, theta: f64, dim: usize) -> CVector {
    let psi = eigenfunctions(x, dim);
    CVector::from_iterator(
        dim,
        psi.iter()
            .enumerate()
            .map(|(n, v)| C64::from_polar(*v, n as f64 * theta)),
    )
}

/// Marginal density of the quadrature `x_θ = x cos θ + p sin θ`.
pub fn quadrature_pdf(rho: &DensityOperator, theta: f64) -> Result<impl Fn(f64) -> f64 + '_> {
    let d = rho.require_single_mode("quadrature distribution")?;
    let m = rho.matrix();
    Ok(move |x: f64| {
        let u = rotated(x, theta, d);
        (u.adjoint() * m * &u)[(0, 0)].re
    })
}

const SAMPLE_GRID: usize = 40_001;
const COVERAGE_TOL: f64 = 1e-6;

/// `n_per_theta` independent samples for each phase by inverse-CDF on a
/// dense grid. Each phase draws from its own generator, seeded from `rng` in
/// phase order.
pub fn sample_homodyne<R: RngCore + ?Sized>(
    rho: &DensityOperator,
    thetas: &[f64],
    n_per_theta: usize,
    rng: &mut R,
) -> Result<Vec<QuadratureRecord>> {
    let d = rho.require_single_mode("homodyne sampling")?;
    let rho = rho.normalized()?;
    for &t in thetas {
        QuadratureRecord::new(t, 0.0)?;
    }
    let half = (2.0 * d as f64 - 1.0).sqrt() + 6.0;
    let h = 2.0 * half / (SAMPLE_GRID - 1) as f64;
    let seeds: Vec<u64> = thetas.iter().map(|_| rng.next_u64()).collect();
    let per_phase: Vec<Vec<QuadratureRecord>> = thetas
        .par_iter()
        .zip(seeds)
        .map(|(&theta, seed)| {
            let pdf = quadrature_pdf(&rho, theta)?;
            let xs: Vec<f64> = (0..SAMPLE_GRID).map(|i| -half + i as f64 * h).collect();
            let dens: Vec<f64> = xs.iter().map(|&x| pdf(x).max(0.0)).collect();
            let mut cdf = vec![0.0; SAMPLE_GRID];
            for i in 1..SAMPLE_GRID {
                cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i] + dens[i - 1]);
            }
            let total = cdf[SAMPLE_GRID - 1];
            if (1.0 - total).abs() > COVERAGE_TOL {
                return Err(Error::Sampling(format!(
                    "quadrature grid ±{half:.2} holds mass {total:.9} at phase {theta}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n_per_theta)
                .map(|_| {
                    let u = rng.random::<f64>() * total;
                    let i = cdf.partition_point(|&c| c < u).clamp(1, SAMPLE_GRID - 1);
                    let (c0, c1) = (cdf[i - 1], cdf[i]);
                    let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                    QuadratureRecord::new(theta, xs[i - 1] + frac * h)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_phase.into_iter().flatten().collect())
}

/// Result of a maximum-likelihood reconstruction.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub state: DensityOperator,
    pub iterations: usize,
    /// Mean log-likelihood per event of the final state.
    pub log_likelihood: f64,
    /// Log-likelihood before each iteration and after the last.
    pub likelihood_trace: Vec<f64>,
    pub converged: bool,
    /// Records outside the binned range, ignored by the fit.
    pub discarded: usize,
}

/// Binned observations: projector vectors `√Δ u(x_c, θ)` and frequencies.
struct Observations {
    vectors: Vec<CVector>,
    freqs: Vec<f64>,
    discarded: usize,
}

fn phase_groups(records: &[QuadratureRecord], max_phases: usize) -> (Vec<f64>, Vec<usize>) {
    let mut distinct: Vec<f64> = records.iter().map(|r| r.theta).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() <= max_phases {
        let idx = records
            .iter()
            .map(|r| distinct.partition_point(|&t| t < r.theta))
            .collect();
        return (distinct, idx);
    }
    let w = PI / max_phases as f64;
    let centers = (0..max_phases).map(|k| (k as f64 + 0.5) * w).collect();
    let idx = records
        .iter()
        .map(|r| ((r.theta / w) as usize).min(max_phases - 1))
        .collect();
    (centers, idx)
}

fn observations(records: &[QuadratureRecord], opts: &TomographyOptions) -> Observations {
    let (phases, phase_idx) = phase_groups(records, opts.max_phases);
    let bins = opts.bins();
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut discarded = 0;
    for (r, &p) in records.iter().zip(&phase_idx) {
        let j = ((r.value + opts.range) / opts.bin_width).floor();
        if j < 0.0 || j >= bins as f64 {
            discarded += 1;
            continue;
        }
        *counts.entry((p, j as usize)).or_insert(0) += 1;
    }
    let kept = (records.len() - discarded) as f64;
    let scale = opts.bin_width.sqrt();
    let (vectors, freqs) = counts
        .into_iter()
        .map(|((p, j), c)| {
            (
                rotated(opts.bin_center(j), phases[p], opts.dim) * C64::new(scale, 0.0),
                c as f64 / kept,
            )
        })
        .unzip();
    Observations {
        vectors,
        freqs,
        discarded,
    }
}

fn probabilities(obs: &Observations, rho: &CMatrix) -> Vec<f64> {
    obs.vectors
        .par_iter()
        .map(|u| (u.adjoint() * rho * u)[(0, 0)].re)
        .collect()
}

fn log_likelihood(obs: &Observations, probs: &[f64]) -> f64 {
    obs.freqs
        .iter()
        .zip(probs)
        .map(|(f, p)| f * p.max(1e-300).ln())
        .sum()
}

/// Sum of binned projectors at one phase, for completeness checks.
pub fn povm_sum(opts: &TomographyOptions, theta: f64) -> CMatrix {
    let d = opts.dim;
    let mut acc = CMatrix::zeros(d, d);
    for j in 0..opts.bins() {
        let u = rotated(opts.bin_center(j), theta, d);
        acc += &u * u.adjoint() * C64::new(opts.bin_width, 0.0);
    }
    acc
}

/// Iterative `ρ ← RρR / Tr[RρR]` with `R = Σ_j (f_j / p_j) Π_j`, starting
/// from the maximally mixed state.
pub fn mle_reconstruct(
    records: &[QuadratureRecord],
    opts: &TomographyOptions,
) -> Result<Reconstruction> {
    opts.validate()?;
    if records.is_empty() {
        return Err(Error::Tomography("no records".into()));
    }
    let obs = observations(records, opts);
    if obs.freqs.is_empty() {
        return Err(Error::Tomography(
            "no records inside the binned range".into(),
        ));
    }
    let d = opts.dim;
    let mut rho = CMatrix::identity(d, d) / C64::new(d as f64, 0.0);
    let mut probs = probabilities(&obs, &rho);
    let mut ll = log_likelihood(&obs, &probs);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        let parts: Vec<CMatrix> = obs
            .vectors
            .par_chunks(256)
            .zip(obs.freqs.par_chunks(256))
            .zip(probs.par_chunks(256))
            .map(|((us, fs), ps)| {
                let mut acc = CMatrix::zeros(d, d);
                for ((u, f), p) in us.iter().zip(fs).zip(ps) {
                    acc += u * u.adjoint() * C64::new(f / p.max(1e-300), 0.0);
                }
                acc
            })
            .collect();
        let r = parts.into_iter().fold(CMatrix::zeros(d, d), |a, b| a + b);
        let next = &r * &rho * &r;
        let next = next.clone() + next.adjoint();
        let tr = next.trace().re;
        rho = next / C64::new(tr, 0.0);
        iterations += 1;
        probs = probabilities(&obs, &rho);
        let new_ll = log_likelihood(&obs, &probs);
        trace.push(new_ll);
        if new_ll < ll - 1e-10 {
            return Err(Error::Tomography(format!(
                "log-likelihood decreased from {ll} to {new_ll} at iteration {iterations}"
            )));
        }
        let gain = (new_ll - ll) / ll.abs().max(1e-300);
        ll = new_ll;
        if gain < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(Reconstruction {
        state: DensityOperator::new(vec![d], rho)?,
        iterations,
        log_likelihood: ll,
        likelihood_trace: trace,
        converged,
        discarded: obs.discarded,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub mean: f64,
    pub stddev: f64,
    pub values: Vec<f64>,
}

/// Resamples the records with replacement `b` times, reconstructs each
/// replica and reports the spread of `statistic`. Replica `i` uses a
/// generator seeded from `rng` in replica order.
pub fn bootstrap_errors<F, R>(
    records: &[QuadratureRecord],
    statistic: F,
    b: usize,
    opts: &TomographyOptions,
    rng: &mut R,
) -> Result<BootstrapSummary>
where
    F: Fn(&DensityOperator) -> Result<f64> + Sync,
    R: RngCore + ?Sized,
{
    if b < 2 {
        return Err(Error::Domain(format!(
            "bootstrap needs at least 2 replicas, got {b}"
        )));
    }
    if records.is_empty() {
        return Err(Error::Tomography("no records".into()));
    }
    let seeds: Vec<u64> = (0..b).map(|_| rng.next_u64()).collect();
    let values: Vec<f64> = seeds
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sample: Vec<QuadratureRecord> = (0..records.len())
                .map(|_| records[rng.random_range(0..records.len())])
                .collect();
            statistic(&mle_reconstruct(&sample, opts)?.state)
        })
        .collect::<Result<_>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(BootstrapSummary {
        mean,
        stddev: var.sqrt(),
        values,
    })
}

/// CSV with header `theta,value`; values carry 17 significant digits so
/// they read back bit-exactly.
pub fn write_records(records: &[QuadratureRecord]) -> String {
    let mut s = String::from("theta,value\n");
    for r in records {
        let _ = writeln!(s, "{:.16e},{:.16e}", r.theta, r.value);
    }
    s
}

pub fn read_records(text: &str) -> Result<Vec<QuadratureRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "theta,value" => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "expected header `theta,value`".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: line_no, msg };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(parse_err(format!(
                "expected 2 fields, found {}",
                fields.len()
            )));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| parse_err(format!("{s:?}: {e}")))
        };
        let rec = QuadratureRecord::new(num(fields[0])?, num(fields[1])?)
            .map_err(|e| parse_err(e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::wigner_origin;
    use crate::fock::fidelity;
    use crate::StateVector;
    use proptest::prelude::*;

    fn seeded(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn eigenfunctions_are_orthonormal() {
        let h = 0.01;
        let grid: Vec<Vec<f64>> = (-1000..=1000)
            .map(|i| eigenfunctions(i as f64 * h, 12))
            .collect();
        for m in 0..12 {
            for n in 0..12 {
                let s: f64 = grid.iter().map(|p| p[m] * p[n]).sum::<f64>() * h;
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pdf_closed_forms() {
        let vac = DensityOperator::vacuum(&[4]).unwrap();
        for theta in [0.0, 0.7, 2.0] {
            let p = quadrature_pdf(&vac, theta).unwrap();
            for x in [-1.0, 0.0, 0.3, 2.0] {
                assert!((p(x) - (-x * x).exp() / PI.sqrt()).abs() < 1e-14);
            }
        }
        let one = DensityOperator::fock(1, 4).unwrap();
        let p = quadrature_pdf(&one, 0.4).unwrap();
        assert_eq!(p(0.0), 0.0);
        for x in [-1.2, 0.5, 1.7] {
            assert!((p(x) - 2.0 * x * x * (-x * x).exp() / PI.sqrt()).abs() < 1e-14);
        }
        assert!(matches!(
            quadrature_pdf(&DensityOperator::vacuum(&[2, 2]).unwrap(), 0.0),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn diagonal_states_are_phase_insensitive() {
        let rho = DensityOperator::diagonal(&[0.195, 0.772, 0.033], 5).unwrap();
        let p0 = quadrature_pdf(&rho, 0.0).unwrap();
        for theta in uniform_phases(12) {
            let p = quadrature_pdf(&rho, theta).unwrap();
            for i in -40..=40 {
                let x = i as f64 * 0.1;
                assert!((p(x) - p0(x)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn coherent_pdf_is_shifted_gaussian() {
        let alpha = C64::new(0.8, 0.3);
        let rho = StateVector::coherent(alpha, 30).unwrap().density();
        let theta = 0.6;
        // ⟨x_θ⟩ = √2 Re(α e^{−iθ})
        let mean = std::f64::consts::SQRT_2 * (alpha * C64::from_polar(1.0, -theta)).re;
        let p = quadrature_pdf(&rho, theta).unwrap();
        for x in [-0.5, 0.4, 1.5] {
            assert!((p(x) - (-(x - mean) * (x - mean)).exp() / PI.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn vacuum_sample_variance() {
        let recs = sample_homodyne(
            &DensityOperator::vacuum(&[3]).unwrap(),
            &[0.0],
            100_000,
            &mut seeded(1),
        )
        .unwrap();
        let n = recs.len() as f64;
        let mean = recs.iter().map(|r| r.value).sum::<f64>() / n;
        let var = recs.iter().map(|r| (r.value - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 0.5).abs() < 3.0 * (2.0 * 0.25 / n).sqrt(), "{var}");
    }

    #[test]
    fn single_photon_dip_at_origin() {
        let count = |rho: &DensityOperator| {
            let recs = sample_homodyne(rho, &uniform_phases(4), 25_000, &mut seeded(2)).unwrap();
            recs.iter().filter(|r| r.value.abs() < 0.1).count() as f64
        };
        let one = count(&DensityOperator::fock(1, 3).unwrap());
        let vac = count(&DensityOperator::vacuum(&[3]).unwrap());
        assert!(one < 0.6 * vac);
    }

    #[test]
    fn sampling_is_deterministic() {
        let rho = DensityOperator::diagonal(&[0.5, 0.5], 2).unwrap();
        let a = sample_homodyne(&rho, &uniform_phases(3), 100, &mut seeded(4)).unwrap();
        let b = sample_homodyne(&rho, &uniform_phases(3), 100, &mut seeded(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 300);
        assert!(sample_homodyne(&rho, &[3.5], 10, &mut seeded(4)).is_err());
    }

    #[test]
    fn povm_completeness() {
        let opts = TomographyOptions::default();
        for theta in [0.0, 1.1] {
            let s = povm_sum(&opts, theta);
            for i in 0..opts.dim - 1 {
                for j in 0..opts.dim - 1 {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((s[(i, j)] - C64::new(e, 0.0)).norm() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn vacuum_round_trip() {
        let recs = sample_homodyne(
            &DensityOperator::vacuum(&[4]).unwrap(),
            &uniform_phases(12),
            100_000 / 12,
            &mut seeded(5),
        )
        .unwrap();
        let rec = mle_reconstruct(&recs, &TomographyOptions::default()).unwrap();
        assert!(rec.state.matrix()[(0, 0)].re >= 0.99);
        assert!(rec
            .likelihood_trace
            .windows(2)
            .all(|w| w[1] >= w[0] - 1e-10));
        rec.state.validate().unwrap();
    }

    #[test]
    fn coherent_round_trip_recovers_phase() {
        let rho = StateVector::coherent(C64::new(0.6, -0.5), 20)
            .unwrap()
            .density();
        let recs = sample_homodyne(&rho, &uniform_phases(12), 10_000, &mut seeded(6)).unwrap();
        let rec = mle_reconstruct(&recs, &TomographyOptions::default()).unwrap();
        let f = fidelity(&rec.state, &rho.resized(8).unwrap()).unwrap();
        assert!(f >= 0.98, "{f}");
    }

    #[test]
    fn errors_and_phase_binning() {
        assert!(matches!(
            mle_reconstruct(&[], &TomographyOptions::default()),
            Err(Error::Tomography(_))
        ));
        let recs: Vec<_> = (0..200)
            .map(|i| QuadratureRecord::new(i as f64 * PI / 200.0, 0.1).unwrap())
            .collect();
        let (centers, idx) = phase_groups(&recs, 64);
        assert_eq!(centers.len(), 64);
        assert!(idx.iter().all(|&i| i < 64));
        let few: Vec<_> = recs.iter().take(5).cloned().collect();
        assert_eq!(phase_groups(&few, 64).0.len(), 5);
    }

    #[test]
    fn bootstrap_behaviour() {
        let recs = sample_homodyne(
            &DensityOperator::vacuum(&[3]).unwrap(),
            &uniform_phases(4),
            500,
            &mut seeded(7),
        )
        .unwrap();
        let opts = TomographyOptions {
            dim: 3,
            max_iters: 50,
            ..TomographyOptions::default()
        };
        let tr = bootstrap_errors(&recs, |s| Ok(s.trace()), 5, &opts, &mut seeded(1)).unwrap();
        assert!(tr.stddev <= 1e-12);
        let w = |s: &DensityOperator| wigner_origin(s);
        let a = bootstrap_errors(&recs, w, 5, &opts, &mut seeded(2)).unwrap();
        let b = bootstrap_errors(&recs, w, 5, &opts, &mut seeded(2)).unwrap();
        assert_eq!(a, b);
        assert!((a.mean - 1.0 / PI).abs() < 0.05);
        assert!(matches!(
            bootstrap_errors(&recs, w, 1, &opts, &mut seeded(2)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn records_csv_round_trip() {
        let recs = vec![
            QuadratureRecord::new(0.0, -1.234_567_890_123_456_7).unwrap(),
            QuadratureRecord::new(PI / 3.0, 1e-7).unwrap(),
        ];
        let text = write_records(&recs);
        assert!(text.starts_with("theta,value\n"));
        assert_eq!(read_records(&text).unwrap(), recs);
    }

    #[test]
    fn records_csv_errors_carry_line_numbers() {
        match read_records("theta,value\n0.1,0.2\n0.3,abc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match read_records("theta,value\n0.1,0.2,0.3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read_records("x,p\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_records("theta,value\n4.0,0.0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn pdf_is_a_normalized_density(
            re in prop::collection::vec(-1.0f64..1.0, 5),
            im in prop::collection::vec(-1.0f64..1.0, 5),
            theta in 0.0f64..PI,
        ) {
            let amps: Vec<C64> = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
            prop_assume!(amps.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3);
            let rho = StateVector::from_amplitudes(&amps).unwrap().density();
            let p = quadrature_pdf(&rho, theta).unwrap();
            let h = 0.01;
            let mut mass = 0.0;
            for i in -1000..=1000 {
                let v = p(i as f64 * h);
                prop_assert!(v >= -1e-12);
                mass += v * h;
            }
            prop_assert!((mass - 1.0).abs() < 1e-9);
        }
    }
}
