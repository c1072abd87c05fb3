use std::f64::consts::FRAC_1_PI;

use serde::{Deserialize, Serialize};

use crate::fock::{binomial_loss_coefficients, CMatrix, TruncationPolicy, C64};
use crate::{DensityOperator, Error, Result, StateVector};

/// Which resource modes suffer the photon loss.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossPlacement {
    /// Independent loss `l` on both modes.
    #[default]
    Both,
    A,
    B,
}

/// `ρ_AB[(k, b), (kp, bp)] = v`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub(crate) struct Entry {
    pub k: usize,
    pub kp: usize,
    pub b: usize,
    pub bp: usize,
    pub v: C64,
}

/// `|ψ⟩_AB ∋ c |k⟩_A |b⟩_B`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub(crate) struct Amplitude {
    pub k: usize,
    pub b: usize,
    pub c: C64,
}

#[derive(Clone, Debug)]
enum Kind {
    Pure(Vec<Amplitude>),
    Mixed(Vec<Entry>),
}

/// Shared entangled resource of the teleporter, stored sparsely.
///
/// Pure resources keep their nonzero amplitudes, so a squeezed vacuum with
/// tens of thousands of levels costs only as many entries. Mixed resources
/// keep the nonzero entries of the two-mode density matrix.
#[derive(Clone, Debug)]
pub struct Resource {
    dims: [usize; 2],
    kind: Kind,
    truncation_weight: f64,
}

/// Conditional state of mode B for one Bell outcome, before feed-forward.
pub(crate) enum Conditional {
    /// `ρ_B = W ρ_in W†`; `W` is `d_B × d_in`.
    Factor(CMatrix),
    Dense(CMatrix),
}

fn check_dims(da: usize, db: usize) -> Result<()> {
    if da < 2 || db < 2 {
        return Err(Error::InvalidDimension(format!(
            "resource dims [{da}, {db}] must be ≥ 2"
        )));
    }
    Ok(())
}

impl Resource {
    /// Pure resource `Σ c[k,b] |k⟩|b⟩`, normalized.
    pub fn pure(coeffs: &CMatrix) -> Result<Self> {
        let (da, db) = coeffs.shape();
        check_dims(da, db)?;
        let norm = coeffs.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero resource state".into()));
        }
        let mut amps = Vec::new();
        for k in 0..da {
            for b in 0..db {
                let c = coeffs[(k, b)];
                if c != C64::new(0.0, 0.0) {
                    amps.push(Amplitude { k, b, c: c / norm });
                }
            }
        }
        Ok(Self {
            dims: [da, db],
            kind: Kind::Pure(amps),
            truncation_weight: 0.0,
        })
    }

    pub fn from_state(psi: &StateVector) -> Result<Self> {
        Self::pure(&psi.coefficients()?)
    }

    /// Mixed resource from a dense two-mode density operator, normalized.
    pub fn from_density(rho: &DensityOperator) -> Result<Self> {
        if rho.modes() != 2 {
            return Err(Error::Shape("resource must be a two-mode state".into()));
        }
        let (da, db) = (rho.dims()[0], rho.dims()[1]);
        let tr = rho.trace();
        if !(tr > 0.0) {
            return Err(Error::InvalidState(format!("resource trace {tr}")));
        }
        let m = rho.matrix();
        let mut entries = Vec::new();
        for k in 0..da {
            for b in 0..db {
                for kp in 0..da {
                    for bp in 0..db {
                        let v = m[(k * db + b, kp * db + bp)];
                        if v != C64::new(0.0, 0.0) {
                            entries.push(Entry {
                                k,
                                kp,
                                b,
                                bp,
                                v: v / tr,
                            });
                        }
                    }
                }
            }
        }
        Ok(Self {
            dims: [da, db],
            kind: Kind::Mixed(entries),
            truncation_weight: 0.0,
        })
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.kind, Kind::Pure(_))
    }

    /// Weight of the untruncated state discarded by the cutoff.
    pub fn truncation_weight(&self) -> f64 {
        self.truncation_weight
    }

    /// Largest angular harmonic the resource adds to the outcome integrand:
    /// the spread of `k − b` over the state's coherences. Zero for
    /// phase-covariant resources such as the (lossy) squeezed vacuum.
    pub fn phase_spread(&self) -> usize {
        let diff = |k: usize, b: usize| k as i64 - b as i64;
        match &self.kind {
            Kind::Pure(a) => {
                let (lo, hi) = a.iter().fold((i64::MAX, i64::MIN), |(lo, hi), x| {
                    let d = diff(x.k, x.b);
                    (lo.min(d), hi.max(d))
                });
                (hi - lo).max(0) as usize
            }
            Kind::Mixed(e) => e
                .iter()
                .map(|x| (diff(x.k, x.b) - diff(x.kp, x.bp)).unsigned_abs() as usize)
                .max()
                .unwrap_or(0),
        }
    }

    /// Number of stored amplitudes or matrix entries.
    pub fn stored_entries(&self) -> usize {
        match &self.kind {
            Kind::Pure(a) => a.len(),
            Kind::Mixed(e) => e.len(),
        }
    }

    /// Dense two-mode density operator; only sensible for small dims.
    pub fn density(&self) -> Result<DensityOperator> {
        let [da, db] = self.dims;
        let n = da * db;
        let mut m = CMatrix::zeros(n, n);
        match &self.kind {
            Kind::Pure(amps) => {
                for x in amps {
                    for y in amps {
                        m[(x.k * db + x.b, y.k * db + y.b)] += x.c * y.c.conj();
                    }
                }
            }
            Kind::Mixed(entries) => {
                for e in entries {
                    m[(e.k * db + e.b, e.kp * db + e.bp)] += e.v;
                }
            }
        }
        DensityOperator::new(vec![da, db], m)
    }

    /// Entries `(k, kp, ρ_A[k, kp])` of the reduced state of mode A.
    pub(crate) fn marginal_a(&self) -> Vec<(usize, usize, C64)> {
        let mut acc = std::collections::BTreeMap::new();
        match &self.kind {
            Kind::Pure(amps) => {
                let mut by_b: Vec<Vec<&Amplitude>> = vec![Vec::new(); self.dims[1]];
                for a in amps {
                    by_b[a.b].push(a);
                }
                for group in &by_b {
                    for x in group {
                        for y in group {
                            *acc.entry((x.k, y.k)).or_insert(C64::new(0.0, 0.0)) +=
                                x.c * y.c.conj();
                        }
                    }
                }
            }
            Kind::Mixed(entries) => {
                for e in entries.iter().filter(|e| e.b == e.bp) {
                    *acc.entry((e.k, e.kp)).or_insert(C64::new(0.0, 0.0)) += e.v;
                }
            }
        }
        acc.into_iter().map(|((k, kp), v)| (k, kp, v)).collect()
    }

    /// `(1/π) Σ_{k,k'} σ[k,k'] ⟨k|_A ρ_AB |k'⟩_A` with `σ = V ρ_in V†`, or
    /// its factored form for pure resources. `v` is `d_A × d_in`.
    pub(crate) fn conditional(&self, v: &CMatrix, rho_in: &CMatrix) -> Conditional {
        let [_, db] = self.dims;
        match &self.kind {
            Kind::Pure(amps) => {
                let din = v.ncols();
                let mut w = CMatrix::zeros(db, din);
                let s = FRAC_1_PI.sqrt();
                for a in amps {
                    for j in 0..din {
                        w[(a.b, j)] += a.c * v[(a.k, j)] * s;
                    }
                }
                Conditional::Factor(w)
            }
            Kind::Mixed(entries) => {
                let sigma = v * rho_in * v.adjoint();
                let mut out = CMatrix::zeros(db, db);
                for e in entries {
                    out[(e.b, e.bp)] += sigma[(e.k, e.kp)] * e.v;
                }
                out *= C64::new(FRAC_1_PI, 0.0);
                Conditional::Dense(out)
            }
        }
    }
}

/// Two-mode squeezed vacuum with `dim` levels per mode, then binomial loss
/// `loss_l` on the modes selected by `placement`.
///
/// The discarded weight `tanh^{2·dim} r` is checked against `policy`.
pub fn build_resource(
    r: f64,
    loss_l: f64,
    dim: usize,
    placement: LossPlacement,
    policy: &TruncationPolicy,
) -> Result<Resource> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("squeezing r = {r} must be ≥ 0")));
    }
    if !(0.0..=1.0).contains(&loss_l) {
        return Err(Error::Domain(format!("loss {loss_l} outside [0, 1]")));
    }
    check_dims(dim, dim)?;
    let lambda = r.tanh();
    let weight = if lambda == 0.0 {
        0.0
    } else {
        (2.0 * dim as f64 * lambda.ln()).exp()
    };
    policy.check("two-mode squeezed vacuum", weight)?;
    let mut c = Vec::with_capacity(dim);
    let mut x = 1.0;
    for _ in 0..dim {
        c.push(x);
        x *= lambda;
    }
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    c.iter_mut().for_each(|v| *v /= norm);

    let kind = if loss_l == 0.0 {
        Kind::Pure(
            c.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(n, v)| Amplitude {
                    k: n,
                    b: n,
                    c: C64::new(*v, 0.0),
                })
                .collect(),
        )
    } else {
        let (la, lb) = match placement {
            LossPlacement::Both => (loss_l, loss_l),
            LossPlacement::A => (loss_l, 0.0),
            LossPlacement::B => (0.0, loss_l),
        };
        Kind::Mixed(lossy_entries(&c, la, lb)?)
    };
    Ok(Resource {
        dims: [dim, dim],
        kind,
        truncation_weight: weight,
    })
}

/// `Σ_{j,l} (A_j ⊗ B_l) |ψ⟩⟨ψ| (A_j ⊗ B_l)†` for `|ψ⟩ = Σ c_n |n, n⟩`.
///
/// `A_j ⊗ B_l` maps `|n, n⟩` to `|n−j, n−l⟩`, so every entry has
/// `b − k = bp − kp = j − l`; entries are accumulated on `(k, kp, b − k)`.
fn lossy_entries(c: &[f64], la: f64, lb: f64) -> Result<Vec<Entry>> {
    let d = c.len();
    let ca = binomial_loss_coefficients(la, d)?;
    let cb = binomial_loss_coefficients(lb, d)?;
    let span = 2 * d - 1;
    let mut acc = vec![0.0f64; d * d * span];
    let mut amp = vec![0.0f64; d];
    for j in 0..d {
        for l in 0..d {
            let lo = j.max(l);
            let mut any = false;
            for n in lo..d {
                amp[n] = c[n] * ca[n][j] * cb[n][l];
                any |= amp[n] != 0.0;
            }
            if !any {
                continue;
            }
            let shift = j + d - 1 - l;
            for n in lo..d {
                if amp[n] == 0.0 {
                    continue;
                }
                for np in lo..d {
                    acc[((n - j) * d + (np - j)) * span + shift] += amp[n] * amp[np];
                }
            }
        }
    }
    let mut entries = Vec::new();
    for k in 0..d {
        for kp in 0..d {
            for s in 0..span {
                let v = acc[(k * d + kp) * span + s];
                if v == 0.0 {
                    continue;
                }
                let delta = s as isize - (d - 1) as isize;
                let b = k as isize + delta;
                let bp = kp as isize + delta;
                entries.push(Entry {
                    k,
                    kp,
                    b: b as usize,
                    bp: bp as usize,
                    v: C64::new(v, 0.0),
                });
            }
        }
    }
    Ok(entries)
}
