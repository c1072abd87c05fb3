use std::f64::consts::PI;

use super::{CMatrix, ModeOperator, C64};
use crate::{Error, Result};

/// Table of `ln k!` for `k < len`.
#[derive(Clone, Debug)]
pub struct LnFactorials(Vec<f64>);

impl LnFactorials {
    pub fn new(len: usize) -> Self {
        let mut t = Vec::with_capacity(len.max(1));
        let mut acc = 0.0;
        t.push(0.0);
        for k in 1..len {
            acc += (k as f64).ln();
            t.push(acc);
        }
        Self(t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }
}

fn require_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "dimension {dim} is below 2"
        )));
    }
    Ok(())
}

/// Lowering operator with `⟨n−1|a|n⟩ = √n`.
pub fn annihilation_matrix(dim: usize) -> Result<ModeOperator> {
    require_dim(dim)?;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    ModeOperator::new(m)
}

pub fn number_matrix(dim: usize) -> Result<ModeOperator> {
    require_dim(dim)?;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = C64::new(n as f64, 0.0);
    }
    ModeOperator::new(m)
}

/// `D(x0, p0) = exp(−i(x0 p̂ − p0 x̂))` built by exponentiating the truncated
/// generator `α a† − α* a`, `α = (x0 + i p0)/√2`.
///
/// The result is exactly unitary on the truncated space; its top rows deviate
/// from the true matrix elements (see [`displacement_deviation`]).
pub fn displacement_matrix(x0: f64, p0: f64, dim: usize) -> Result<ModeOperator> {
    require_dim(dim)?;
    if !(x0.is_finite() && p0.is_finite()) {
        return Err(Error::Domain("non-finite displacement".into()));
    }
    let alpha = C64::new(x0, p0) / 2f64.sqrt();
    let a = annihilation_matrix(dim)?.into_matrix();
    let generator = a.adjoint() * alpha - a * alpha.conj();
    ModeOperator::new(generator.exp())
}

/// Largest elementwise gap between [`displacement_matrix`] and the exact
/// matrix elements on the block `n ≤ dim − 1 − guard`.
pub fn displacement_deviation(x0: f64, p0: f64, dim: usize, guard: usize) -> Result<f64> {
    let truncated = displacement_matrix(x0, p0, dim)?;
    let keep = dim.saturating_sub(guard);
    let exact = displacement_elements(C64::new(x0, p0) / 2f64.sqrt(), keep, keep);
    let t = truncated.matrix();
    let mut worst = 0.0_f64;
    for i in 0..keep {
        for j in 0..keep {
            worst = worst.max((t[(i, j)] - exact[(i, j)]).norm());
        }
    }
    Ok(worst)
}

/// Exact `⟨m|D(α)|n⟩` for `m < rows`, `n < cols`, with `D(α) = exp(α a† − α* a)`.
///
/// Uses the associated-Laguerre closed form with the three-term recurrence in
/// the polynomial degree, which stays stable for large `|α|` where a
/// recursion over columns does not. Entries are those of the infinite
/// matrix, so no truncation error enters the block.
pub fn displacement_elements(alpha: C64, rows: usize, cols: usize) -> CMatrix {
    let table = LnFactorials::new(rows.max(cols));
    displacement_block(alpha, rows, cols, &table)
}

/// [`displacement_elements`] with a caller-provided factorial table.
pub fn displacement_block(alpha: C64, rows: usize, cols: usize, lnf: &LnFactorials) -> CMatrix {
    assert!(lnf.len() >= rows.max(cols), "factorial table too short");
    let mut out = CMatrix::zeros(rows, cols);
    let x = alpha.norm_sqr();
    if x == 0.0 {
        for k in 0..rows.min(cols) {
            out[(k, k)] = C64::new(1.0, 0.0);
        }
        return out;
    }
    let ln_abs = 0.5 * x.ln();
    let theta = alpha.arg();
    // m = n + a, a ≥ 0: sqrt(n!/m!) α^a e^{−x/2} L_n^{(a)}(x)
    for a in 0..rows {
        let count = cols.min(rows - a);
        if count == 0 {
            break;
        }
        let phase = C64::from_polar(1.0, a as f64 * theta);
        fill_offset(a, count, x, ln_abs, lnf, |n, v| out[(n + a, n)] = phase * v);
    }
    // n = m + a, a ≥ 1: sqrt(m!/n!) (−α*)^a e^{−x/2} L_m^{(a)}(x)
    for a in 1..cols {
        let count = rows.min(cols - a);
        if count == 0 {
            break;
        }
        let phase = C64::from_polar(1.0, a as f64 * (PI - theta));
        fill_offset(a, count, x, ln_abs, lnf, |m, v| out[(m, m + a)] = phase * v);
    }
    out
}

const RESCALE_AT: f64 = 1e200;

#[inline]
fn fill_offset(
    a: usize,
    count: usize,
    x: f64,
    ln_abs: f64,
    lnf: &LnFactorials,
    mut put: impl FnMut(usize, f64),
) {
    let af = a as f64;
    let base = af * ln_abs - 0.5 * x;
    let mut scale = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for s in 0..count {
        if s == 1 {
            prev = cur;
            cur = 1.0 + af - x;
        } else if s > 1 {
            let k = (s - 1) as f64;
            let next = ((2.0 * k + 1.0 + af - x) * cur - (k + af) * prev) / (k + 1.0);
            prev = cur;
            cur = next;
        }
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            scale += RESCALE_AT.ln();
        }
        let ln_pref = 0.5 * (lnf.get(s) - lnf.get(s + a)) + base + scale;
        put(s, ln_pref.exp() * cur);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn annihilation_entries() {
        let a2 = annihilation_matrix(2).unwrap();
        assert_eq!(a2.matrix()[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(a2.matrix()[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(a2.matrix()[(1, 0)], C64::new(0.0, 0.0));
        let a3 = annihilation_matrix(3).unwrap();
        assert!((a3.matrix()[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            annihilation_matrix(1),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn number_operator_from_ladder() {
        let a = annihilation_matrix(8).unwrap().into_matrix();
        let n = a.adjoint() * &a;
        for k in 0..8 {
            assert!((n[(k, k)].re - k as f64).abs() < 1e-13);
        }
        assert!(max_abs(&(n - number_matrix(8).unwrap().into_matrix())) < 1e-13);
    }

    #[test]
    fn zero_displacement_is_identity() {
        let d = displacement_matrix(0.0, 0.0, 6).unwrap();
        assert!(max_abs(&(d.matrix() - CMatrix::identity(6, 6))) < 1e-15);
        let e = displacement_elements(C64::new(0.0, 0.0), 4, 6);
        assert_eq!(e[(3, 3)], C64::new(1.0, 0.0));
        assert_eq!(e[(3, 4)], C64::new(0.0, 0.0));
    }

    #[test]
    fn displaced_vacuum_has_poisson_mean() {
        // ⟨n⟩ = |α|² = (x0² + p0²)/2 for a coherent state
        for &(x0, p0) in &[(1.0, 0.5), (-1.2, 1.4), (0.0, 2.0), (1.5, -1.3)] {
            let d = displacement_matrix(x0, p0, 30).unwrap();
            let col = d.matrix().column(0);
            let mean: f64 = col
                .iter()
                .enumerate()
                .map(|(n, z)| n as f64 * z.norm_sqr())
                .sum();
            assert!(
                (mean - (x0 * x0 + p0 * p0) / 2.0).abs() < 1e-6,
                "{x0} {p0}: {mean}"
            );
        }
    }

    #[test]
    fn inverse_displacement() {
        let d = displacement_matrix(0.8, -1.0, 30).unwrap();
        let dinv = displacement_matrix(-0.8, 1.0, 30).unwrap();
        let prod = d.matrix() * dinv.matrix();
        assert!(max_abs(&(prod - CMatrix::identity(30, 30))) < 1e-8);
    }

    #[test]
    fn exact_elements_match_coherent_amplitudes() {
        let alpha = C64::new(2.5, -4.0);
        let e = displacement_elements(alpha, 60, 1);
        let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for k in 0..60 {
            if k > 0 {
                c = c * alpha / (k as f64).sqrt();
            }
            assert!((e[(k, 0)] - c).norm() < 1e-13);
        }
    }

    #[test]
    fn exact_elements_are_unitary_on_guarded_block() {
        // D(α)†D(α) over a wide row range equals 1 on low columns
        for &alpha in &[C64::new(3.0, 1.0), C64::new(-6.0, 5.0), C64::new(0.0, 9.0)] {
            let e = displacement_elements(alpha, 400, 12);
            let g = e.adjoint() * &e;
            assert!(max_abs(&(g - CMatrix::identity(12, 12))) < 1e-11, "{alpha}");
        }
    }

    #[test]
    fn exact_elements_satisfy_adjoint_relation() {
        // D(α)† = D(−α)
        let alpha = C64::new(1.7, 2.2);
        let d = displacement_elements(alpha, 20, 20);
        let dm = displacement_elements(-alpha, 20, 20);
        assert!(max_abs(&(d.adjoint() - dm)) < 1e-13);
    }

    #[test]
    fn truncated_matrix_agrees_on_guarded_subspace() {
        // the guard band has to grow with dim·|α|²
        let dev = displacement_deviation(0.8, -0.6, 30, 10).unwrap();
        assert!(dev < 1e-6, "{dev}");
        let dev = displacement_deviation(1.2, -0.9, 40, 15).unwrap();
        assert!(dev < 1e-6, "{dev}");
        let dev = displacement_deviation(1.2, -0.9, 40, 10).unwrap();
        assert!(dev > 1e-6, "{dev}");
    }

    #[test]
    fn composition_up_to_phase() {
        // D(a)D(b) = e^{(a b* − a* b)/2} D(a + b)
        let (a, b) = (C64::new(0.4, -0.3), C64::new(-0.2, 0.5));
        let dim = 30;
        let s2 = 2f64.sqrt();
        let da = displacement_matrix(a.re * s2, a.im * s2, dim).unwrap();
        let db = displacement_matrix(b.re * s2, b.im * s2, dim).unwrap();
        let dab = displacement_matrix((a + b).re * s2, (a + b).im * s2, dim).unwrap();
        let phase = ((a * b.conj() - a.conj() * b) / 2.0).exp();
        assert!((phase.norm() - 1.0).abs() < 1e-15);
        let keep = dim - 10;
        let lhs = (da.matrix() * db.matrix())
            .view((0, 0), (keep, keep))
            .into_owned();
        let rhs = dab.matrix().view((0, 0), (keep, keep)) * phase;
        assert!(max_abs(&(lhs - rhs)) < 1e-6);

        // exact elements compose without a guard band given enough inner levels
        let inner = 120;
        let ea = displacement_elements(a, dim, inner);
        let eb = displacement_elements(b, inner, dim);
        let eab = displacement_elements(a + b, dim, dim);
        assert!(max_abs(&(ea * eb - eab * phase)) < 1e-12);
    }
}
