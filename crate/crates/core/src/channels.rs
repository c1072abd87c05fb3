//! Attenuation channels realised by gain-tuned and conditional teleportation.
//!
//! Unconditional teleportation with gain `g = tanh r` acts as
//! `ρ ↦ Σ_k a^k T ρ T a†^k / (k! sinh^{2k} r)` with `T = (tanh r)^n̂`, which is
//! binomial amplitude damping with loss `γ = 1 − tanh² r`. Conditioning on
//! Bell outcomes near the origin removes the `a^k` terms and leaves the
//! heralded filter `g^n̂` alone.

use crate::analysis::wigner_at;
use crate::fock::{binomial_loss_coefficients, CMatrix, ModeOperator, C64};
use crate::{DensityOperator, Error, Result, StateVector};

/// A state produced by a heralded map, with the probability weight of the
/// herald. The state is normalized; the weight is the trace before
/// normalization.
#[derive(Clone, Debug)]
pub struct Heralded<T> {
    pub state: T,
    pub weight: f64,
}

/// Ordered Kraus operators of binomial amplitude damping.
#[derive(Clone, Debug)]
pub struct KrausSet {
    gamma: f64,
    operators: Vec<ModeOperator>,
}

impl KrausSet {
    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn operators(&self) -> &[ModeOperator] {
        &self.operators
    }

    pub fn k_max(&self) -> usize {
        self.operators.len() - 1
    }

    /// `Σ_k A_k m A_k†` on an arbitrary operator.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        self.operators
            .iter()
            .fold(CMatrix::zeros(m.nrows(), m.ncols()), |acc, a| {
                acc + a.matrix() * m * a.matrix().adjoint()
            })
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dims() != [self.dim()] {
            return Err(Error::Shape(format!(
                "Kraus set of dimension {} on dims {:?}",
                self.dim(),
                rho.dims()
            )));
        }
        DensityOperator::new(rho.dims().to_vec(), self.apply_matrix(rho.matrix()))
    }

    /// Largest deviation of `Σ_k A_k† A_k` from the identity on levels
    /// `n ≤ dim − 1 − guard`.
    pub fn completeness_deviation(&self, guard: usize) -> f64 {
        let d = self.dim();
        let sum = self.operators.iter().fold(CMatrix::zeros(d, d), |acc, a| {
            acc + a.matrix().adjoint() * a.matrix()
        });
        let keep = d.saturating_sub(guard);
        let mut worst = 0.0_f64;
        for i in 0..keep {
            for j in 0..keep {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((sum[(i, j)] - C64::new(id, 0.0)).norm());
            }
        }
        worst
    }
}

/// `A_k = Σ_ℓ √C(ℓ,k) √((1−γ)^{ℓ−k} γ^k) |ℓ−k⟩⟨ℓ|` for `k ≤ k_max`.
pub fn amplitude_damping_kraus(gamma: f64, dim: usize, k_max: usize) -> Result<KrausSet> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "dimension {dim} is below 2"
        )));
    }
    if k_max >= dim {
        return Err(Error::InvalidDimension(format!(
            "k_max {k_max} must be below dimension {dim}"
        )));
    }
    let coeffs = binomial_loss_coefficients(gamma, dim)?;
    let operators = (0..=k_max)
        .map(|k| {
            let mut m = CMatrix::zeros(dim, dim);
            for ell in k..dim {
                m[(ell - k, ell)] = C64::new(coeffs[ell][k], 0.0);
            }
            ModeOperator::new(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KrausSet { gamma, operators })
}

/// `(tanh r)^n̂`-type diagonal filter `g^n̂`.
pub fn noiseless_filter(g: f64, dim: usize) -> Result<ModeOperator> {
    let mut m = CMatrix::zeros(dim, dim);
    let mut w = 1.0;
    for n in 0..dim {
        m[(n, n)] = C64::new(w, 0.0);
        w *= g;
    }
    ModeOperator::new(m)
}

/// The gain-tuned teleportation channel applied to any operator (linear, so
/// it accepts the off-diagonal units needed for Choi matrices). The sum over
/// `k` runs to the cutoff, where it terminates exactly.
pub fn gain_tuned_map(m: &CMatrix, r: f64) -> Result<CMatrix> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("squeezing r = {r} must be > 0")));
    }
    let d = m.nrows();
    let lambda = r.tanh();
    let sinh2 = r.sinh().powi(2);
    let t: Vec<f64> = (0..d).map(|n| lambda.powi(n as i32)).collect();
    let mut term = CMatrix::from_fn(d, d, |i, j| m[(i, j)] * (t[i] * t[j]));
    let mut out = term.clone();
    for k in 1..d {
        // a X a† / (k sinh² r)
        let c = 1.0 / (k as f64 * sinh2);
        term = CMatrix::from_fn(d, d, |i, j| {
            if i + 1 < d && j + 1 < d {
                term[(i + 1, j + 1)] * (((i + 1) * (j + 1)) as f64).sqrt() * c
            } else {
                C64::new(0.0, 0.0)
            }
        });
        out += &term;
    }
    Ok(out)
}

/// Unconditional teleportation output at gain `tanh r` with an ideal
/// two-mode squeezed resource.
pub fn gain_tuned_channel(rho: &DensityOperator, r: f64) -> Result<DensityOperator> {
    rho.require_single_mode("gain-tuned channel")?;
    DensityOperator::new(rho.dims().to_vec(), gain_tuned_map(rho.matrix(), r)?)
}

/// Choi matrix `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` of a single-mode map.
pub fn choi_matrix<F>(dim: usize, map: F) -> Result<CMatrix>
where
    F: Fn(&CMatrix) -> Result<CMatrix>,
{
    let mut choi: Option<CMatrix> = None;
    for i in 0..dim {
        for j in 0..dim {
            let mut unit = CMatrix::zeros(dim, dim);
            unit[(i, j)] = C64::new(1.0, 0.0);
            let out = map(&unit)?;
            let dout = out.nrows();
            let c = choi.get_or_insert_with(|| CMatrix::zeros(dim * dout, dim * dout));
            c.view_mut((i * dout, j * dout), (dout, dout))
                .copy_from(&out);
        }
    }
    choi.ok_or_else(|| Error::InvalidDimension("empty Choi matrix".into()))
}

fn check_gain(g: f64) -> Result<()> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::Domain(format!("gain g = {g} must be > 0")));
    }
    Ok(())
}

/// Heralded `|ψ⟩ ↦ g^n̂|ψ⟩ / ‖g^n̂|ψ⟩‖`; the weight is `Σ g^{2n} |ψ_n|²`.
pub fn noiseless_attenuation(psi: &StateVector, g: f64) -> Result<Heralded<StateVector>> {
    check_gain(g)?;
    if psi.dims().len() != 1 {
        return Err(Error::Shape(
            "noiseless attenuation acts on one mode".into(),
        ));
    }
    let filter = noiseless_filter(g, psi.dim())?;
    let out = filter.apply(psi)?;
    let weight = out.norm_squared();
    if weight == 0.0 {
        return Err(Error::HeraldImpossible("filtered state vanishes".into()));
    }
    Ok(Heralded {
        state: StateVector::new(psi.dims().to_vec(), out.unscale(weight.sqrt()))?,
        weight,
    })
}

/// Heralded `ρ ↦ g^n̂ ρ g^n̂ / Tr[·]`.
pub fn noiseless_attenuation_mixed(
    rho: &DensityOperator,
    g: f64,
) -> Result<Heralded<DensityOperator>> {
    check_gain(g)?;
    let d = rho.require_single_mode("noiseless attenuation")?;
    let out = noiseless_filter(g, d)?.conjugate(rho)?;
    let weight = out.trace();
    if weight <= 0.0 {
        return Err(Error::HeraldImpossible("filtered state vanishes".into()));
    }
    Ok(Heralded {
        state: out.normalized()?,
        weight,
    })
}

/// Smallest squeezing at which a teleported `η|1⟩⟨1| + (1−η)|0⟩⟨0|` keeps a
/// negative `W(0,0)`; `None` when no finite squeezing suffices.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct NegativityThresholds {
    /// Conditional (noiseless) teleportation: `tanh² r > (1−η)/η`.
    pub conditional_r_min: Option<f64>,
    /// Gain-tuned deterministic teleportation: `tanh² r > 1/(2η)`.
    pub deterministic_r_min: Option<f64>,
}

pub fn negativity_threshold(eta: f64) -> Result<NegativityThresholds> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!(
            "efficiency η = {eta} outside (0, 1]"
        )));
    }
    let bound = |t2: f64| (t2 < 1.0).then(|| t2.sqrt().atanh());
    Ok(NegativityThresholds {
        conditional_r_min: bound((1.0 - eta) / eta),
        deterministic_r_min: bound(1.0 / (2.0 * eta)),
    })
}

/// `η|1⟩⟨1| + (1−η)|0⟩⟨0|` in `dim` levels.
pub fn attenuated_single_photon(eta: f64, dim: usize) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!(
            "efficiency η = {eta} outside [0, 1]"
        )));
    }
    DensityOperator::diagonal(&[1.0 - eta, eta], dim)
}

/// Wigner-sign check of the thresholds: returns whether `W(0,0) < 0` after
/// conditional and after deterministic teleportation of the attenuated
/// single photon, evaluated through the displaced-parity path.
pub fn negativity_by_wigner(eta: f64, r: f64) -> Result<(bool, bool)> {
    let input = attenuated_single_photon(eta, 4)?;
    let conditional = noiseless_attenuation_mixed(&input, r.tanh())?.state;
    let deterministic = gain_tuned_channel(&input, r)?;
    Ok((
        wigner_at(&conditional, 0.0, 0.0)? < 0.0,
        wigner_at(&deterministic, 0.0, 0.0)? < 0.0,
    ))
}
