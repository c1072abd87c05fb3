//! Programmable conditional filters and noiseless teleportation of hybrid
//! entanglement.
//!
//! Teleporting through a program state `|f⟩ = Σ f_kℓ |k⟩_A |ℓ⟩_B` and
//! accepting only outcomes near the origin implements the filter
//! `F = Σ f_kℓ |ℓ⟩⟨k|` on the input. Index order follows from the Bell
//! projection: `⟨k|_A |f⟩ = Σ_ℓ f_kℓ |ℓ⟩_B` is the image of `|k⟩`. Diagonal
//! programs are unaffected by the ordering, so the squeezed-vacuum program
//! still gives `g^n̂`.

use serde::{Deserialize, Serialize};

use crate::channels::Heralded;
use crate::fock::{CMatrix, CVector, C64};
use crate::teleporter::{ConditionalResult, GridSpec, Radius, Resource, Teleporter};
use crate::{DensityOperator, Error, Result, StateVector};

/// Below this normalized filtered weight a herald is treated as impossible.
const HERALD_FLOOR: f64 = 1e-12;

/// Coefficients `f_kℓ` of a program state; rows index mode A, columns
/// mode B.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgramState {
    coeffs: CMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProgramJson {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

impl ProgramState {
    pub fn new(coeffs: CMatrix) -> Result<Self> {
        if coeffs.nrows() < 2 || coeffs.ncols() < 2 {
            return Err(Error::InvalidDimension(format!(
                "program shape {:?} must be at least 2×2",
                coeffs.shape()
            )));
        }
        let n = coeffs.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("program state has zero norm".into()));
        }
        Ok(Self { coeffs })
    }

    /// `Σ_k g^k |k, k⟩`, the squeezed-vacuum program implementing `g^n̂`.
    pub fn tmsv(g: f64, dim: usize) -> Result<Self> {
        Self::diagonal(g, dim)
    }

    /// `|00⟩ + |11⟩`: quantum scissors onto `span{|0⟩, |1⟩}`.
    pub fn scissors() -> Self {
        Self::diagonal(1.0, 2).expect("valid scissors program")
    }

    /// `Σ_{k<dim} γ^k |k, k⟩` with `γ > 1`: the noiseless amplifier truncated
    /// to `dim` levels.
    pub fn amplifier(gamma: f64, dim: usize) -> Result<Self> {
        Self::diagonal(gamma, dim)
    }

    fn diagonal(g: f64, dim: usize) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Domain(format!("program gain {g} must be > 0")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        let mut w = 1.0;
        for k in 0..dim {
            m[(k, k)] = C64::new(w, 0.0);
            w *= g;
        }
        Self::new(m)
    }

    pub fn coeffs(&self) -> &CMatrix {
        &self.coeffs
    }

    pub fn dims(&self) -> (usize, usize) {
        self.coeffs.shape()
    }

    /// Normalized two-mode state `|f⟩`.
    pub fn state(&self) -> Result<StateVector> {
        StateVector::from_coefficients(&self.coeffs)
    }

    /// The implemented filter `F[ℓ, k] = f_kℓ` (`d_B × d_A`).
    pub fn filter_operator(&self) -> CMatrix {
        self.coeffs.transpose()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProgramJson = serde_json::from_str(text)?;
        let rows = raw.re.len();
        let cols = raw.re.first().map_or(0, Vec::len);
        let im = raw.im.unwrap_or_else(|| vec![vec![0.0; cols]; rows]);
        if im.len() != rows || raw.re.iter().chain(&im).any(|r| r.len() != cols) {
            return Err(Error::Shape(
                "program re/im must be equal-sized rectangular matrices".into(),
            ));
        }
        Self::new(CMatrix::from_fn(rows, cols, |i, j| {
            C64::new(raw.re[i][j], im[i][j])
        }))
    }

    pub fn to_json(&self) -> Result<String> {
        let (r, c) = self.coeffs.shape();
        let part = |f: fn(&C64) -> f64| {
            (0..r)
                .map(|i| (0..c).map(|j| f(&self.coeffs[(i, j)])).collect())
                .collect()
        };
        Ok(serde_json::to_string_pretty(&ProgramJson {
            re: part(|z| z.re),
            im: Some(part(|z| z.im)),
        })?)
    }

    fn input_block(&self, rho_in: &DensityOperator) -> Result<CMatrix> {
        rho_in.require_single_mode("program filter")?;
        let rho = rho_in.normalized()?;
        Ok(rho.resized(self.coeffs.nrows())?.into_matrix())
    }

    /// Small-radius target `F ρ F† / Tr[·]` and the weight
    /// `Tr[F ρ F†] / ‖f‖²`.
    pub fn target(&self, rho_in: &DensityOperator) -> Result<Heralded<DensityOperator>> {
        let rho = self.input_block(rho_in)?;
        let f = self.filter_operator();
        let out = &f * rho * f.adjoint();
        let tr = out.trace().re;
        let weight = tr / self.coeffs.norm_squared();
        if !(weight > HERALD_FLOOR) {
            return Err(Error::HeraldImpossible(format!(
                "program annihilates the input (filtered weight {weight:.3e})"
            )));
        }
        Ok(Heralded {
            state: DensityOperator::new(vec![f.nrows()], out / C64::new(tr, 0.0))?,
            weight,
        })
    }

    /// Acceptance probability expected for a small radius: `π L²` times
    /// the outcome density at the origin, `Tr[F ρ F†] / (π ‖f‖²)`.
    pub fn small_radius_probability(&self, rho_in: &DensityOperator, radius: f64) -> Result<f64> {
        Ok(radius * radius * self.target(rho_in)?.weight)
    }
}

/// Teleports `rho_in` through the program state and accepts outcomes with
/// `|β| ≤ radius`. For small radii the output approaches
/// [`ProgramState::target`].
pub fn apply_program_filter(
    program: &ProgramState,
    rho_in: &DensityOperator,
    radius: Radius,
    gain: f64,
    grid: &GridSpec,
) -> Result<ConditionalResult> {
    program.target(rho_in)?;
    let resource = Resource::from_state(&program.state()?)?;
    let tele = Teleporter::with_resource(resource, gain, program.dims().1, grid.clone())?;
    tele.teleport(rho_in, radius)
}

/// Two distinct single-mode states `|Ψ⟩`, `|Φ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridPair {
    psi: CVector,
    phi: CVector,
}

impl HybridPair {
    /// Normalizes both states and pads them to a common length.
    pub fn new(psi: &[C64], phi: &[C64]) -> Result<Self> {
        let len = psi.len().max(phi.len()).max(2);
        let pad = |v: &[C64]| -> Result<CVector> {
            let mut out = CVector::zeros(len);
            out.rows_mut(0, v.len()).copy_from_slice(v);
            let n = out.norm();
            if n == 0.0 || !n.is_finite() {
                return Err(Error::InvalidState("hybrid component has zero norm".into()));
            }
            Ok(out.unscale(n))
        };
        Ok(Self {
            psi: pad(psi)?,
            phi: pad(phi)?,
        })
    }

    pub fn psi(&self) -> &CVector {
        &self.psi
    }

    pub fn phi(&self) -> &CVector {
        &self.phi
    }

    /// `⟨Ψ|Φ⟩`.
    pub fn overlap(&self) -> C64 {
        self.psi.dotc(&self.phi)
    }
}

fn antisymmetric(psi: &CVector, phi: &CVector, dim: usize) -> Result<StateVector> {
    let d = psi.len();
    if dim < d {
        return Err(Error::InvalidDimension(format!(
            "dimension {dim} below component length {d}"
        )));
    }
    let denom = 2.0 - 2.0 * psi.dotc(phi).norm_sqr();
    if !(denom > 1e-9) {
        return Err(Error::InvalidState(
            "hybrid pair is degenerate: components agree up to a phase".into(),
        ));
    }
    let c = CMatrix::from_fn(dim, dim, |i, j| {
        if i < d && j < d {
            psi[i] * phi[j] - phi[i] * psi[j]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let s = denom.sqrt();
    let amps = CVector::from_iterator(
        dim * dim,
        (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| c[(i, j)] / s),
    );
    StateVector::new(vec![dim, dim], amps)
}

/// `(|Ψ⟩|Φ⟩ − |Φ⟩|Ψ⟩) / √(2 − 2|⟨Ψ|Φ⟩|²)` in `dim` levels per mode.
pub fn hybrid_entangled_state(pair: &HybridPair, dim: usize) -> Result<StateVector> {
    antisymmetric(&pair.psi, &pair.phi, dim)
}

/// `g^n̂ ⊗ g^n̂` on a two-mode state, renormalized, with the heralding
/// weight.
pub fn attenuate_hybrid_both(state: &StateVector, g: f64) -> Result<Heralded<StateVector>> {
    if !(g > 0.0 && g <= 1.0) {
        return Err(Error::Domain(format!("gain {g} outside (0, 1]")));
    }
    let c = state.coefficients()?;
    let out = CMatrix::from_fn(c.nrows(), c.ncols(), |i, j| {
        c[(i, j)] * g.powi((i + j) as i32)
    });
    let weight = out.norm_squared() / c.norm_squared();
    if !(weight > 0.0) {
        return Err(Error::HeraldImpossible("attenuated state vanishes".into()));
    }
    Ok(Heralded {
        state: StateVector::from_coefficients(&out)?,
        weight,
    })
}
