//! Wigner functions, photon statistics and entanglement entropy.

use std::f64::consts::{FRAC_1_PI, SQRT_2};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fock::{displacement_block, hermitian_eigen, CMatrix, LnFactorials, C64};
use crate::{DensityOperator, Error, Result, StateVector};

/// `W(0,0) = (1/π) Σ_n (−1)^n ρ_nn`.
pub fn wigner_origin(rho: &DensityOperator) -> Result<f64> {
    rho.require_single_mode("Wigner function")?;
    let alternating: f64 = rho
        .populations()
        .iter()
        .enumerate()
        .map(|(n, p)| if n % 2 == 0 { *p } else { -*p })
        .sum();
    Ok(FRAC_1_PI * alternating)
}

/// `(1/π) Tr[ρ (−1)^n̂]` through an explicit parity operator.
pub fn parity_wigner_origin(rho: &DensityOperator) -> Result<f64> {
    let d = rho.require_single_mode("Wigner function")?;
    let parity = CMatrix::from_fn(d, d, |i, j| {
        if i != j {
            C64::new(0.0, 0.0)
        } else if i % 2 == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        }
    });
    Ok(FRAC_1_PI * rho.expectation(&parity)?.re)
}

/// `W(x,p) = (1/π) Tr[ρ D Π D†] = (1/π) Σ_mn ρ_mn (−1)^m ⟨n|D(2α)|m⟩` with
/// `α = (x + ip)/√2`. The displacement elements are exact, so the value is
/// exact for the truncated `ρ` at any phase-space point.
fn wigner_point(rho: &CMatrix, x: f64, p: f64, lnf: &LnFactorials) -> f64 {
    let d = rho.nrows();
    let disp = displacement_block(C64::new(SQRT_2 * x, SQRT_2 * p), d, d, lnf);
    let mut acc = 0.0;
    for m in 0..d {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let mut col = C64::new(0.0, 0.0);
        for n in 0..d {
            col += rho[(m, n)] * disp[(n, m)];
        }
        acc += sign * col.re;
    }
    FRAC_1_PI * acc
}

pub fn wigner_at(rho: &DensityOperator, x: f64, p: f64) -> Result<f64> {
    let d = rho.require_single_mode("Wigner function")?;
    if !(x.is_finite() && p.is_finite()) {
        return Err(Error::Domain("phase-space point must be finite".into()));
    }
    Ok(wigner_point(rho.matrix(), x, p, &LnFactorials::new(d)))
}

/// Wigner function sampled on a rectangular grid; `values[i][j]` is
/// `W(xs[i], ps[j])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl WignerGrid {
    /// Riemann sum over a uniformly spaced grid.
    pub fn integral(&self) -> f64 {
        let step = |v: &[f64]| if v.len() > 1 { v[1] - v[0] } else { 1.0 };
        let total: f64 = self.values.iter().flatten().sum();
        total * step(&self.xs) * step(&self.ps)
    }

    pub fn min(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `x,p,W`, `x` as the slow index.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,p,W\n");
        for (i, x) in self.xs.iter().enumerate() {
            for (j, p) in self.ps.iter().enumerate() {
                let _ = writeln!(s, "{x:.15e},{p:.15e},{:.15e}", self.values[i][j]);
            }
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Uniform axis `[-half, half]` with the given step.
pub fn uniform_axis(half: f64, step: f64) -> Result<Vec<f64>> {
    if !(half > 0.0 && step > 0.0 && half.is_finite()) {
        return Err(Error::Domain(format!("axis ±{half} with step {step}")));
    }
    let n = (2.0 * half / step).round() as usize;
    Ok((0..=n).map(|i| -half + i as f64 * step).collect())
}

/// Axis of the default grid: ±5 in steps of 0.05.
pub fn default_axis() -> Vec<f64> {
    uniform_axis(5.0, 0.05).expect("valid default axis")
}

/// Evaluates the Wigner function on `xs × ps`, in parallel over `xs`.
pub fn wigner_grid(rho: &DensityOperator, xs: &[f64], ps: &[f64]) -> Result<WignerGrid> {
    let d = rho.require_single_mode("Wigner function")?;
    if xs.iter().chain(ps).any(|v| !v.is_finite()) {
        return Err(Error::Domain("grid points must be finite".into()));
    }
    let lnf = LnFactorials::new(d);
    let m = rho.matrix();
    let values = xs
        .par_iter()
        .map(|&x| ps.iter().map(|&p| wigner_point(m, x, p, &lnf)).collect())
        .collect();
    Ok(WignerGrid {
        xs: xs.to_vec(),
        ps: ps.to_vec(),
        values,
    })
}

/// Diagonal of a single-mode state with its odd-photon weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    pub populations: Vec<f64>,
    pub odd_sum: f64,
    /// `odd_sum > 0.5`, equivalent to `W(0,0) < 0`.
    pub odd_exceeds_half: bool,
}

pub fn photon_number_distribution(rho: &DensityOperator) -> Result<PhotonDistribution> {
    rho.require_single_mode("photon-number distribution")?;
    let populations = rho.normalized()?.populations();
    let odd_sum: f64 = populations.iter().skip(1).step_by(2).sum();
    Ok(PhotonDistribution {
        populations,
        odd_sum,
        odd_exceeds_half: odd_sum > 0.5,
    })
}

fn entropy_bits(weights: impl Iterator<Item = f64>) -> f64 {
    weights
        .filter(|&w| w > 1e-300)
        .map(|w| -w * w.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Von Neumann entropy (bits) of either reduced state of a pure two-mode
/// state, from the singular values of its coefficient matrix.
pub fn entanglement_entropy(psi: &StateVector) -> Result<f64> {
    let c = psi.coefficients()?;
    let norm = psi.norm_sqr();
    let svd = c.svd(false, false);
    Ok(entropy_bits(
        svd.singular_values.iter().map(|s| s * s / norm),
    ))
}

/// As [`entanglement_entropy`] for a two-mode density operator, which must
/// have purity at least `1 − 1e-6`.
pub fn entanglement_entropy_of(rho: &DensityOperator) -> Result<f64> {
    if rho.modes() != 2 {
        return Err(Error::Shape("entanglement entropy needs two modes".into()));
    }
    let rho = rho.normalized()?;
    let purity = rho.purity();
    if purity < 1.0 - 1e-6 {
        return Err(Error::NotPure(format!("purity {purity}")));
    }
    let (vals, vecs) = hermitian_eigen(rho.matrix());
    let top = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("nonempty spectrum");
    let psi = StateVector::new(rho.dims().to_vec(), vecs.column(top).into_owned())?;
    entanglement_entropy(&psi)
}
