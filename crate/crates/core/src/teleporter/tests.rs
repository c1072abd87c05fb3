use std::f64::consts::PI;

use super::*;
use crate::channels::{gain_tuned_channel, noiseless_attenuation};
use crate::fock::{fidelity, loss_channel, two_mode_squeezed_vacuum, TruncationPolicy};
use crate::StateVector;
use rand::{Rng, SeedableRng};

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_state(dim: usize, seed: u64) -> DensityOperator {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    DensityOperator::single(&g * g.adjoint())
        .unwrap()
        .normalized()
        .unwrap()
}

fn ideal(r: f64, dim: usize) -> Teleporter {
    let res = build_resource(
        r,
        0.0,
        dim,
        LossPlacement::Both,
        &TruncationPolicy::default(),
    )
    .unwrap();
    Teleporter::with_resource(res, r.tanh(), dim, GridSpec::default()).unwrap()
}

fn vacuum_teleporter(dim: usize) -> Teleporter {
    let res = build_resource(
        0.0,
        0.0,
        dim,
        LossPlacement::Both,
        &TruncationPolicy::default(),
    )
    .unwrap();
    Teleporter::with_resource(res, 1.0, dim, GridSpec::default()).unwrap()
}

#[test]
fn lossless_resource_is_pure_tmsv() {
    let res = build_resource(
        0.9,
        0.0,
        12,
        LossPlacement::Both,
        &TruncationPolicy::permissive(),
    )
    .unwrap();
    assert!(res.is_pure());
    let t = two_mode_squeezed_vacuum(0.9, 12, &TruncationPolicy::permissive()).unwrap();
    assert!(max_abs(&(res.density().unwrap().matrix() - t.state.density().matrix())) < 1e-15);
    assert!((res.truncation_weight() - t.truncation_weight).abs() < 1e-15);
    assert_eq!(res.phase_spread(), 0);
}

#[test]
fn phase_spread_of_resources() {
    let lossy = build_resource(
        0.9,
        0.2,
        12,
        LossPlacement::Both,
        &TruncationPolicy::permissive(),
    )
    .unwrap();
    assert_eq!(lossy.phase_spread(), 0);
    // |0,2⟩ + |2,0⟩ carries harmonics k − b ∈ {−2, 2}
    let mut c = CMatrix::zeros(3, 3);
    c[(0, 2)] = C64::new(1.0, 0.0);
    c[(2, 0)] = C64::new(1.0, 0.0);
    assert_eq!(Resource::pure(&c).unwrap().phase_spread(), 4);
}

#[test]
fn lossy_resource_matches_dense_loss() {
    let (r, l, d) = (0.7, 0.3, 9);
    let policy = TruncationPolicy::permissive();
    let tmsv = two_mode_squeezed_vacuum(r, d, &policy)
        .unwrap()
        .state
        .density();
    for (placement, modes) in [
        (LossPlacement::Both, vec![0, 1]),
        (LossPlacement::A, vec![0]),
        (LossPlacement::B, vec![1]),
    ] {
        let mut dense = tmsv.clone();
        for m in modes {
            dense = loss_channel(&dense, l, m).unwrap();
        }
        let sparse = build_resource(r, l, d, placement, &policy).unwrap();
        assert!(!sparse.is_pure());
        assert!(max_abs(&(sparse.density().unwrap().matrix() - dense.matrix())) < 1e-14);
    }
}

#[test]
fn resource_limits() {
    let res = build_resource(
        1.0,
        1.0,
        6,
        LossPlacement::Both,
        &TruncationPolicy::permissive(),
    )
    .unwrap();
    let rho = res.density().unwrap();
    assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
    assert!((rho.trace() - 1.0).abs() < 1e-14);
    assert!(matches!(
        build_resource(
            1.62,
            0.2,
            30,
            LossPlacement::Both,
            &TruncationPolicy::default()
        ),
        Err(Error::Truncation(_))
    ));
    assert!(matches!(
        build_resource(
            1.0,
            1.2,
            30,
            LossPlacement::Both,
            &TruncationPolicy::permissive()
        ),
        Err(Error::Domain(_))
    ));
}

#[test]
fn lossy_resource_photon_number() {
    // Gaussian covariance: ⟨n⟩ per mode = (1 − l) sinh² r
    let (r, l) = (1.62_f64, 0.2);
    let res = build_resource(r, l, 100, LossPlacement::Both, &TruncationPolicy::default()).unwrap();
    let (_, _, n) = ladder_moments(res.marginal_a().into_iter());
    assert!((n - (1.0 - l) * r.sinh().powi(2)).abs() < 1e-3, "{n}");
    assert!(res.stored_entries() < 100 * 100 * 100);
}

#[test]
fn conditional_at_origin_is_filtered_input() {
    let r = 0.8_f64;
    let psi = StateVector::from_amplitudes(&[
        C64::new(0.5, 0.0),
        C64::new(0.3, -0.4),
        C64::new(0.0, 0.6),
    ])
    .unwrap();
    let tele = ideal(r, 40);
    let (rho_b, density) = tele
        .bsm_conditional(&psi.density(), &BellOutcome::origin())
        .unwrap();
    let expect = noiseless_attenuation(&psi, r.tanh()).unwrap();
    let out = rho_b.normalized().unwrap().resized(3).unwrap();
    assert!(max_abs(&(out.matrix() - expect.state.density().matrix())) < 1e-12);
    // density = (1/π)(1 − λ²) Σ λ^{2n}|ψ_n|² before truncation renormalization
    let lam2 = r.tanh().powi(2);
    assert!((density - (1.0 - lam2) * expect.weight / PI).abs() < 1e-10);

    let one = DensityOperator::fock(1, 4).unwrap();
    let (rho_b, _) = tele.bsm_conditional(&one, &BellOutcome::origin()).unwrap();
    let f = fidelity(
        &rho_b.normalized().unwrap(),
        &DensityOperator::fock(1, 40).unwrap(),
    )
    .unwrap();
    assert!((f - 1.0).abs() < 1e-12);
}

#[test]
fn vacuum_conditional_is_gaussian() {
    let tele = vacuum_teleporter(6);
    let vac = DensityOperator::vacuum(&[4]).unwrap();
    for &(x, p) in &[(0.0, 0.0), (0.7, -0.2), (-1.5, 1.1)] {
        let o = BellOutcome::new(x, p).unwrap();
        let (rho_b, density) = tele.bsm_conditional(&vac, &o).unwrap();
        assert!((density - (-(x * x + p * p)).exp() / PI).abs() < 1e-14);
        let n = rho_b.normalized().unwrap();
        assert!((n.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    }
}

#[test]
fn feed_forward_trivial_cases() {
    let rho = random_state(5, 3);
    let out = feed_forward(&rho, &BellOutcome::origin(), 0.8).unwrap();
    assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-15);
    let out = feed_forward(&rho, &BellOutcome::new(1.0, -2.0).unwrap(), 0.0).unwrap();
    assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-15);
    // D(gβ) on vacuum gives the coherent state |gβ⟩
    let out = feed_forward(
        &DensityOperator::vacuum(&[30]).unwrap(),
        &BellOutcome::new(0.4, 0.3).unwrap(),
        0.5,
    )
    .unwrap();
    let target = StateVector::coherent(C64::new(0.2, 0.15), 30)
        .unwrap()
        .density();
    assert!((fidelity(&out, &target).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn deterministic_limit_single_photon() {
    let r = 1.0_f64;
    let tele = ideal(r, 30);
    let res = tele
        .teleport(&DensityOperator::fock(1, 3).unwrap(), Radius::INFINITE)
        .unwrap();
    assert_eq!(res.probability, 1.0);
    let t2 = r.tanh().powi(2);
    let m = res.state.matrix();
    assert!((m[(1, 1)].re - t2).abs() < 1e-4);
    assert!((m[(0, 0)].re - (1.0 - t2)).abs() < 1e-4);
    assert!((res.diagnostics.integrated_mass - 1.0).abs() < 1e-6);
    assert!(res.diagnostics.refinement_change <= 1e-6);
}

#[test]
fn deterministic_limit_matches_channel_on_random_inputs() {
    let r = 0.9;
    let tele = ideal(r, 34);
    for seed in 0..3 {
        let rho = random_state(6, 100 + seed);
        let res = tele.teleport(&rho, Radius::INFINITE).unwrap();
        let expect = gain_tuned_channel(&rho, r).unwrap();
        let got = res.state.resized(6).unwrap();
        assert!(max_abs(&(got.matrix() - expect.matrix())) < 1e-4);
    }
}

#[test]
fn small_radius_teleports_fock_states() {
    let tele = ideal(1.0, 30);
    for n in [1, 2] {
        let res = tele
            .teleport(
                &DensityOperator::fock(n, 4).unwrap(),
                Radius::new(0.05).unwrap(),
            )
            .unwrap();
        let f = fidelity(&res.state, &DensityOperator::fock(n, 30).unwrap()).unwrap();
        assert!(f >= 0.999, "n={n} F={f}");
        assert!(res.probability > 0.0 && res.probability < 0.01);
    }
}

#[test]
fn zero_radius() {
    let tele = ideal(1.0, 20);
    let res = tele
        .teleport(
            &DensityOperator::fock(1, 3).unwrap(),
            Radius::new(0.0).unwrap(),
        )
        .unwrap();
    assert_eq!(res.probability, 0.0);
    assert!((res.state.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
    let p = tele
        .success_probability(
            &DensityOperator::fock(1, 3).unwrap(),
            &[Radius::new(0.0).unwrap()],
        )
        .unwrap();
    assert_eq!(p[0].1, 0.0);
}

#[test]
fn vacuum_success_probability() {
    let tele = vacuum_teleporter(4);
    let radii: Vec<Radius> = (0..=40)
        .map(|i| Radius::new(0.1 * i as f64).unwrap())
        .chain([Radius::INFINITE])
        .collect();
    let curve = tele
        .success_probability(&DensityOperator::vacuum(&[3]).unwrap(), &radii)
        .unwrap();
    let mut last = -1.0;
    for (l, p) in &curve {
        let exact = if l.is_infinite() {
            1.0
        } else {
            1.0 - (-l.value() * l.value()).exp()
        };
        assert!((p - exact).abs() < 1e-9, "L={l} P={p}");
        assert!(*p >= last);
        last = *p;
    }
    assert!((curve[20].1 - 0.9817).abs() < 1e-4);
}

#[test]
fn probability_is_monotone_for_unsorted_radii() {
    let tele = ideal(0.8, 20);
    let rho = DensityOperator::fock(1, 3).unwrap();
    let radii = [2.0, 0.5, 1.0, 3.0].map(|v| Radius::new(v).unwrap());
    let curve = tele.success_probability(&rho, &radii).unwrap();
    assert!(curve[1].1 < curve[2].1 && curve[2].1 < curve[0].1 && curve[0].1 < curve[3].1);
    let direct = tele.teleport(&rho, Radius::new(1.0).unwrap()).unwrap();
    assert!((direct.probability - curve[2].1).abs() < 1e-8);
}

#[test]
fn result_is_weighted_mixture_of_outcome_states() {
    // trapezoid sums converge exponentially for smooth decaying integrands
    let tele = ideal(0.6, 24);
    let rho = random_state(3, 9);
    let res = tele.teleport(&rho, Radius::INFINITE).unwrap();
    let h = 0.2;
    let mut acc = CMatrix::zeros(24, 24);
    let mut mass = 0.0;
    for i in -40..=40 {
        for j in -40..=40 {
            let o = BellOutcome::new(i as f64 * h, j as f64 * h).unwrap();
            let (out, m) = tele.conditional_output(&rho, &o).unwrap();
            acc += out.matrix() * C64::new(h * h, 0.0);
            mass += m * h * h;
        }
    }
    assert!((mass - 1.0).abs() < 1e-8);
    let tr = acc.trace().re;
    assert!(max_abs(&(acc / C64::new(tr, 0.0) - res.state.matrix())) < 1e-6);
}

#[test]
fn coarse_grid_is_rejected() {
    let res = build_resource(
        1.0,
        0.0,
        25,
        LossPlacement::Both,
        &TruncationPolicy::default(),
    )
    .unwrap();
    let grid = GridSpec {
        step: 10.0,
        min_radial: 1,
        angular: Some(1),
        tolerance: 1e-9,
        ..GridSpec::default()
    };
    let tele = Teleporter::with_resource(res, 0.76, 25, grid).unwrap();
    assert!(matches!(
        tele.teleport(&DensityOperator::fock(1, 3).unwrap(), Radius::INFINITE),
        Err(Error::Accuracy(_))
    ));
}

#[test]
fn grid_range_must_cover_five_deviations() {
    let res = build_resource(
        1.0,
        0.0,
        25,
        LossPlacement::Both,
        &TruncationPolicy::default(),
    )
    .unwrap();
    let grid = GridSpec {
        range: Some(2.0),
        ..GridSpec::default()
    };
    let tele = Teleporter::with_resource(res, 0.76, 25, grid).unwrap();
    assert!(matches!(
        tele.teleport(&DensityOperator::vacuum(&[3]).unwrap(), Radius::INFINITE),
        Err(Error::Domain(_))
    ));
}

#[test]
fn outcome_moments_of_vacuum_and_coherent_input() {
    let tele = vacuum_teleporter(4);
    let m = tele
        .outcome_moments(&DensityOperator::vacuum(&[3]).unwrap())
        .unwrap();
    assert!(m.mean.norm() < 1e-15);
    assert!((m.var_x - 0.5).abs() < 1e-15 && (m.var_p - 0.5).abs() < 1e-15);
    let alpha = C64::new(0.7, -0.4);
    let coh = StateVector::coherent(alpha, 30).unwrap().density();
    let m = tele.outcome_moments(&coh).unwrap();
    assert!((m.mean - alpha).norm() < 1e-10);
    assert!((m.var_x - 0.5).abs() < 1e-10);
}

#[test]
fn oracle_reductions() {
    let psi = StateVector::from_amplitudes(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
    let o = lossy_noiseless_oracle(&psi, 1.0, 0.0, 10).unwrap();
    let expect = noiseless_attenuation(&psi, 1f64.tanh())
        .unwrap()
        .state
        .density();
    assert!(max_abs(&(o.resized(2).unwrap().matrix() - expect.matrix())) < 1e-14);
    let v = lossy_noiseless_oracle(&StateVector::fock(0, 3).unwrap(), 1.62, 0.0, 10).unwrap();
    assert!((v.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
    // loss on the transposed leg raises the vacuum to |j⟩ with weight (lλ²)^j;
    // loss l on B then leaves p_0 = (1 − lλ²)/(1 − l²λ²)
    let (r, l) = (1.62_f64, 0.2);
    let lam2 = r.tanh().powi(2);
    let v = lossy_noiseless_oracle(&StateVector::fock(0, 3).unwrap(), r, l, 30).unwrap();
    assert!((v.matrix()[(0, 0)].re - (1.0 - l * lam2) / (1.0 - l * l * lam2)).abs() < 1e-12);
}

#[test]
fn oracle_matches_conditional_state_at_origin() {
    let (r, l, d) = (1.0, 0.25, 26);
    let psi = StateVector::from_amplitudes(&[
        C64::new(0.4, 0.0),
        C64::new(0.5, 0.3),
        C64::new(-0.2, 0.6),
    ])
    .unwrap();
    let res = build_resource(r, l, d, LossPlacement::Both, &TruncationPolicy::default()).unwrap();
    let (rho_b, _) = bsm_conditional(&psi.density(), &res, &BellOutcome::origin()).unwrap();
    let o = lossy_noiseless_oracle(&psi, r, l, d).unwrap();
    assert!(max_abs(&(rho_b.normalized().unwrap().matrix() - o.matrix())) < 1e-12);
}

#[test]
fn sampling_is_reproducible() {
    let tele = ideal(0.8, 20);
    let rho = DensityOperator::fock(1, 3).unwrap();
    let sampler = tele.sampler(&rho).unwrap();
    let a = sampler.run_shots(Radius::new(1.0).unwrap(), 50, 7).unwrap();
    let b = sampler.run_shots(Radius::new(1.0).unwrap(), 50, 7).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.outcome, y.outcome);
        assert_eq!(x.accepted, y.accepted);
    }
    let c = sampler.run_shots(Radius::new(1.0).unwrap(), 50, 8).unwrap();
    assert!(a.iter().zip(&c).any(|(x, y)| x.outcome != y.outcome));
    let all = sampler.run_shots(Radius::INFINITE, 20, 1).unwrap();
    assert!(all.iter().all(|s| s.accepted && s.state.is_some()));
}

#[test]
fn sampled_outcomes_have_vacuum_statistics() {
    let tele = vacuum_teleporter(4);
    let sampler = tele
        .sampler(&DensityOperator::vacuum(&[3]).unwrap())
        .unwrap();
    let shots = sampler.run_shots(Radius::INFINITE, 20_000, 3).unwrap();
    let n = shots.len() as f64;
    let var = shots
        .iter()
        .map(|s| s.outcome.x_u * s.outcome.x_u)
        .sum::<f64>()
        / n;
    // Var of a sample variance of N(0, 1/2) is 2σ⁴/n
    assert!((var - 0.5).abs() < 3.0 * (2.0 * 0.25 / n).sqrt());
}

#[test]
fn worker_count_does_not_change_results() {
    let tele = ideal(0.8, 20);
    let rho = random_state(3, 21);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| tele.teleport(&rho, Radius::new(1.5).unwrap()).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.state.matrix(), b.state.matrix());
    assert_eq!(a.probability.to_bits(), b.probability.to_bits());
}

#[test]
fn radius_serde() {
    let r: Radius = serde_json::from_str("\"inf\"").unwrap();
    assert!(r.is_infinite());
    let r: Radius = serde_json::from_str("2.5").unwrap();
    assert_eq!(r.value(), 2.5);
    assert!(serde_json::from_str::<Radius>("-1.0").is_err());
    assert!(serde_json::from_str::<Radius>("\"wide\"").is_err());
    assert_eq!(serde_json::to_string(&Radius::INFINITE).unwrap(), "\"inf\"");
}

#[test]
fn config_rejects_unknown_fields() {
    let good = r#"{"r": 1.62, "gain_g": 0.89, "cutoff_N": 45, "loss_l": 0.2, "radius_L": "inf"}"#;
    let c: ExperimentConfig = serde_json::from_str(good).unwrap();
    assert_eq!(c.dim(), 46);
    assert_eq!(c.loss_placement, LossPlacement::Both);
    c.validate().unwrap();
    let bad = r#"{"r": 1.62, "gain_g": 0.89, "cutoff_N": 45, "gain": 1.0}"#;
    assert!(serde_json::from_str::<ExperimentConfig>(bad).is_err());
    let mut c = ExperimentConfig::ideal(1.0, Radius::INFINITE, 10);
    c.loss_l = 1.5;
    assert!(matches!(c.validate(), Err(Error::Domain(_))));
}
