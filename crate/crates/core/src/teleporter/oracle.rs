use crate::fock::{binomial_loss_coefficients, CMatrix, C64};
use crate::{DensityOperator, Error, Result, StateVector};

/// Small-radius limit of teleportation through a two-mode squeezed vacuum
/// with loss `loss_l` on both modes, computed without the Bell measurement:
/// the transposed loss Kraus operators `A_j^T` act on the input, then
/// `(tanh r)^n̂`, then loss on mode B. Everything is truncated to `dim`
/// levels; the result is normalized.
pub fn lossy_noiseless_oracle(
    psi: &StateVector,
    r: f64,
    loss_l: f64,
    dim: usize,
) -> Result<DensityOperator> {
    if psi.dims().len() != 1 || psi.dim() > dim {
        return Err(Error::Shape(format!(
            "input dims {:?} must be one mode of at most {dim} levels",
            psi.dims()
        )));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("squeezing r = {r} must be > 0")));
    }
    let coeffs = binomial_loss_coefficients(loss_l, dim)?;
    let mut amps = CMatrix::zeros(dim, 1);
    for (n, a) in psi.amps().iter().enumerate() {
        amps[(n, 0)] = *a;
    }
    let rho = &amps * amps.adjoint();
    let lambda = r.tanh();
    let t: Vec<f64> = (0..dim).map(|n| lambda.powi(n as i32)).collect();
    let mut mid = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        // A_j^T |m⟩ = coeffs[m + j][j] |m + j⟩, then (tanh r)^n̂
        let raise = |m: usize| {
            if m + j < dim {
                coeffs[m + j][j] * t[m + j]
            } else {
                0.0
            }
        };
        for m in 0..dim - j {
            for mp in 0..dim - j {
                mid[(m + j, mp + j)] += rho[(m, mp)] * (raise(m) * raise(mp));
            }
        }
    }
    let mut out = CMatrix::zeros(dim, dim);
    for l in 0..dim {
        for n in l..dim {
            for np in l..dim {
                out[(n - l, np - l)] += mid[(n, np)] * (coeffs[n][l] * coeffs[np][l]);
            }
        }
    }
    let tr = out.trace().re;
    if !(tr > 0.0) {
        return Err(Error::HeraldImpossible("oracle output vanishes".into()));
    }
    DensityOperator::new(vec![dim], out / C64::new(tr, 0.0))
}
