use nalgebra::SymmetricEigen;

use super::{CMatrix, CVector, DensityOperator, LnFactorials, StateVector, TruncationPolicy, C64};
use crate::{Error, Result};

/// Eigenvalues and eigenvectors (columns) of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
}

/// Principal square root of a positive semidefinite Hermitian matrix;
/// negative eigenvalues are clipped to zero.
pub fn hermitian_sqrt(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let mut scaled = vecs.clone();
    for (j, v) in vals.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        scaled.column_mut(j).scale_mut(s);
    }
    scaled * vecs.adjoint()
}

/// Kronecker product with `a` on the slow index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// A truncated state together with the weight lost to truncation.
#[derive(Clone, Debug)]
pub struct TruncatedState {
    /// Renormalized state.
    pub state: StateVector,
    /// Untruncated weight outside the kept levels, before renormalization.
    pub truncation_weight: f64,
}

/// `Σ_n tanh^n(r)/cosh(r) |n, n⟩` kept for `n < dim` and renormalized.
///
/// The discarded weight is `tanh^{2·dim}(r)`; it is checked against `policy`.
pub fn two_mode_squeezed_vacuum(
    r: f64,
    dim: usize,
    policy: &TruncationPolicy,
) -> Result<TruncatedState> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("squeezing r = {r} must be ≥ 0")));
    }
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "dimension {dim} is below 2"
        )));
    }
    let lambda = r.tanh();
    let weight = if lambda == 0.0 {
        0.0
    } else {
        (2.0 * dim as f64 * lambda.ln()).exp()
    };
    policy.check("two-mode squeezed vacuum", weight)?;
    let mut amps = CVector::zeros(dim * dim);
    let mut c = 1.0 / r.cosh();
    for n in 0..dim {
        amps[n * dim + n] = C64::new(c, 0.0);
        c *= lambda;
    }
    let norm = amps.norm();
    Ok(TruncatedState {
        state: StateVector::new(vec![dim, dim], amps.unscale(norm))?,
        truncation_weight: weight,
    })
}

/// `c[ℓ][k] = √(C(ℓ,k) (1−l)^{ℓ−k} l^k)` for `k ≤ ℓ < dim`.
pub fn binomial_loss_coefficients(l: f64, dim: usize) -> Result<Vec<Vec<f64>>> {
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::Domain(format!("loss {l} outside [0, 1]")));
    }
    let lnf = LnFactorials::new(dim.max(1));
    let (ln_keep, ln_lose) = ((1.0 - l).ln(), l.ln());
    let coeffs = (0..dim)
        .map(|ell| {
            (0..=ell)
                .map(|k| {
                    let kept = ell - k;
                    // 0·ln 0 terms contribute a factor of one
                    if (kept > 0 && l == 1.0) || (k > 0 && l == 0.0) {
                        return 0.0;
                    }
                    let mut ln = lnf.get(ell) - lnf.get(k) - lnf.get(kept);
                    if kept > 0 {
                        ln += kept as f64 * ln_keep;
                    }
                    if k > 0 {
                        ln += k as f64 * ln_lose;
                    }
                    (0.5 * ln).exp()
                })
                .collect()
        })
        .collect();
    Ok(coeffs)
}

/// Binomial photon loss with probability `l` on mode `mode`.
pub fn loss_channel(rho: &DensityOperator, l: f64, mode: usize) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::Domain(format!("loss {l} outside [0, 1]")));
    }
    if mode >= rho.modes() {
        return Err(Error::Shape(format!(
            "mode {mode} out of range for dims {:?}",
            rho.dims()
        )));
    }
    if l == 0.0 {
        return Ok(rho.clone());
    }
    let dims = rho.dims();
    let d = dims[mode];
    let stride = if mode == 0 && dims.len() == 2 {
        dims[1]
    } else {
        1
    };
    let coeffs = binomial_loss_coefficients(l, d)?;
    let src = rho.matrix();
    let n = rho.dim();
    let mut out = CMatrix::zeros(n, n);
    for j in 0..n {
        let tj = (j / stride) % d;
        for i in 0..n {
            let v = src[(i, j)];
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let ti = (i / stride) % d;
            let (ci, cj) = (&coeffs[ti], &coeffs[tj]);
            for k in 0..=ti.min(tj) {
                out[(i - k * stride, j - k * stride)] += v * (ci[k] * cj[k]);
            }
        }
    }
    DensityOperator::new(dims.to_vec(), out)
}

/// Reduced state of mode `keep` of a two-mode operator.
pub fn partial_trace(rho: &DensityOperator, keep: usize) -> Result<DensityOperator> {
    if rho.modes() != 2 {
        return Err(Error::Shape(format!(
            "partial trace needs a two-mode state, got dims {:?}",
            rho.dims()
        )));
    }
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let m = rho.matrix();
    let out = match keep {
        0 => CMatrix::from_fn(da, da, |a, ap| {
            (0..db).map(|b| m[(a * db + b, ap * db + b)]).sum()
        }),
        1 => CMatrix::from_fn(db, db, |b, bp| {
            (0..da).map(|a| m[(a * db + b, a * db + bp)]).sum()
        }),
        _ => {
            return Err(Error::Shape(format!("mode {keep} out of range")));
        }
    };
    DensityOperator::new(vec![if keep == 0 { da } else { db }], out)
}

/// Squared Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` of the trace-normalized
/// arguments. Reduces to `Tr[ρσ]` when either argument is pure, which is the
/// path taken in that case.
pub fn fidelity(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::Shape(format!(
            "fidelity of dims {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let a = a.normalized()?;
    let b = b.normalized()?;
    let pure = |r: &DensityOperator| r.purity() > 1.0 - 1e-12;
    let f = if pure(&a) || pure(&b) {
        a.expectation(b.matrix())?.re
    } else {
        let sa = hermitian_sqrt(a.matrix());
        let inner = &sa * b.matrix() * &sa;
        let (vals, _) = hermitian_eigen(&inner);
        let t: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
        t * t
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Trace distance `½‖ρ − σ‖₁` of the trace-normalized arguments.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::Shape(format!(
            "trace distance of dims {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let diff = a.normalized()?.matrix() - b.normalized()?.matrix();
    let (vals, _) = hermitian_eigen(&diff);
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}
