use serde::{Deserialize, Serialize};

use super::{hermitian_eigen, CMatrix, CVector, C64, HERMITIAN_TOL, PSD_TOL};
use crate::{Error, Result};

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.len() > 2 {
        return Err(Error::Shape(format!(
            "expected one or two modes, got {}",
            dims.len()
        )));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidDimension(format!(
            "mode dimension {d} is below 2"
        )));
    }
    Ok(dims.iter().product())
}

/// Pure state over one or two truncated modes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: CVector,
}

impl StateVector {
    /// Wraps amplitudes; the squared norm must lie in `(0, 1 + 1e-9]`.
    pub fn new(dims: Vec<usize>, amps: CVector) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amps.len() != total {
            return Err(Error::Shape(format!(
                "{} amplitudes for dims {:?}",
                amps.len(),
                dims
            )));
        }
        let norm = amps.norm_squared();
        if !(norm > 0.0 && norm <= 1.0 + 1e-9) {
            return Err(Error::InvalidState(format!(
                "squared norm {norm} outside (0, 1]"
            )));
        }
        Ok(Self { dims, amps })
    }

    /// Single-mode state from unnormalized amplitudes, normalized on the way in.
    pub fn from_amplitudes(amps: &[C64]) -> Result<Self> {
        let mut v = CVector::from_column_slice(amps);
        if v.len() == 1 {
            v = v.push(C64::new(0.0, 0.0));
        }
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("zero or non-finite amplitudes".into()));
        }
        let len = v.len();
        Self::new(vec![len], v.unscale(n))
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidDimension(format!(
                "|{n}⟩ does not fit in dimension {dim}"
            )));
        }
        let mut amps = CVector::zeros(dim);
        amps[n] = C64::new(1.0, 0.0);
        Self::new(vec![dim], amps)
    }

    /// Coherent state `|α⟩` truncated to `dim` levels and renormalized.
    pub fn coherent(alpha: C64, dim: usize) -> Result<Self> {
        check_dims(&[dim])?;
        let mut amps = CVector::zeros(dim);
        let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        amps[0] = c;
        for k in 1..dim {
            c = c * alpha / (k as f64).sqrt();
            amps[k] = c;
        }
        let n = amps.norm();
        Self::new(vec![dim], amps.unscale(n))
    }

    /// Two-mode state `Σ c[a,b] |a⟩|b⟩`, normalized.
    pub fn from_coefficients(coeffs: &CMatrix) -> Result<Self> {
        let (da, db) = coeffs.shape();
        check_dims(&[da, db])?;
        let amps = CVector::from_iterator(
            da * db,
            (0..da).flat_map(|a| (0..db).map(move |b| coeffs[(a, b)])),
        );
        let n = amps.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("zero coefficient matrix".into()));
        }
        Self::new(vec![da, db], amps.unscale(n))
    }

    /// Coefficient matrix `c[a,b]` of a two-mode state.
    pub fn coefficients(&self) -> Result<CMatrix> {
        if self.dims.len() != 2 {
            return Err(Error::Shape(
                "coefficient matrix needs a two-mode state".into(),
            ));
        }
        let (da, db) = (self.dims[0], self.dims[1]);
        Ok(CMatrix::from_fn(da, db, |a, b| self.amps[a * db + b]))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total dimension (product of mode dimensions).
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &CVector {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn normalize(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            amps: self.amps.unscale(self.amps.norm()),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::Shape(format!(
                "inner product of dims {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            dims: self.dims.clone(),
            matrix: &self.amps * self.amps.adjoint(),
        }
    }
}

/// Hermitian, positive semidefinite operator over one or two truncated modes.
///
/// Validation is opt-in through [`DensityOperator::validate`]; constructors
/// only check shapes. Unnormalized conditional states are represented by the
/// same type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityJson", into = "DensityJson")]
pub struct DensityOperator {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let total = check_dims(&dims)?;
        if matrix.shape() != (total, total) {
            return Err(Error::Shape(format!(
                "matrix {:?} does not match dims {:?}",
                matrix.shape(),
                dims
            )));
        }
        Ok(Self { dims, matrix })
    }

    /// Single-mode operator with the given matrix.
    pub fn single(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        Self::new(vec![d], matrix)
    }

    pub fn vacuum(dims: &[usize]) -> Result<Self> {
        let total = check_dims(dims)?;
        let mut m = CMatrix::zeros(total, total);
        m[(0, 0)] = C64::new(1.0, 0.0);
        Ok(Self {
            dims: dims.to_vec(),
            matrix: m,
        })
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        Ok(StateVector::fock(n, dim)?.density())
    }

    /// Phase-insensitive single-mode state with the given photon-number
    /// populations, padded to at least `dim` levels.
    pub fn diagonal(populations: &[f64], dim: usize) -> Result<Self> {
        let d = dim.max(populations.len()).max(2);
        if populations.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidState(
                "populations must be finite and non-negative".into(),
            ));
        }
        let mut m = CMatrix::zeros(d, d);
        for (n, p) in populations.iter().enumerate() {
            m[(n, n)] = C64::new(*p, 0.0);
        }
        Self::new(vec![d], m)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total dimension.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn modes(&self) -> usize {
        self.dims.len()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub(crate) fn require_single_mode(&self, what: &str) -> Result<usize> {
        if self.dims.len() != 1 {
            return Err(Error::Shape(format!(
                "{what} needs a single-mode state, got dims {:?}",
                self.dims
            )));
        }
        Ok(self.dims[0])
    }

    /// Real part of the trace.
    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidState(format!("cannot normalize trace {t}")));
        }
        Ok(Self {
            dims: self.dims.clone(),
            matrix: self.matrix.unscale(t),
        })
    }

    pub fn purity(&self) -> f64 {
        // Tr[ρ²] = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Tr[ρ O]`.
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        if op.shape() != self.matrix.shape() {
            return Err(Error::Shape("operator and state differ in size".into()));
        }
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.matrix[(i, j)] * op[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Diagonal in the Fock basis.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    /// Single-mode state zero-padded or cut to `dim` levels.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        let d = self.require_single_mode("resizing")?;
        check_dims(&[dim])?;
        let mut m = CMatrix::zeros(dim, dim);
        let k = d.min(dim);
        m.view_mut((0, 0), (k, k))
            .copy_from(&self.matrix.view((0, 0), (k, k)));
        Self::new(vec![dim], m)
    }

    pub fn max_hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Checks Hermiticity (1e-10), a real trace in `(0, 1 + 1e-9]` and
    /// eigenvalues no lower than −1e-9.
    pub fn validate(&self) -> Result<()> {
        let herm = self.max_hermitian_deviation();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "Hermiticity deviation {herm:e}"
            )));
        }
        let tr: C64 = self.matrix.trace();
        if tr.im.abs() > HERMITIAN_TOL * self.dim() as f64 {
            return Err(Error::InvalidState(format!("complex trace {tr}")));
        }
        if !(tr.re > 0.0 && tr.re <= 1.0 + 1e-9) {
            return Err(Error::InvalidState(format!(
                "trace {} outside (0, 1]",
                tr.re
            )));
        }
        let (vals, _) = hermitian_eigen(&self.matrix);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Wire form `{"dims":[..], "re":[[..]], "im":[[..]]}`, rows outermost.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityJson {
    dims: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<DensityOperator> for DensityJson {
    fn from(rho: DensityOperator) -> Self {
        let n = rho.dim();
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| f(&rho.matrix[(i, j)])).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
            dims: rho.dims,
        }
    }
}

impl TryFrom<DensityJson> for DensityOperator {
    type Error = Error;

    fn try_from(j: DensityJson) -> Result<Self> {
        let n = j.re.len();
        if j.im.len() != n || j.re.iter().chain(&j.im).any(|row| row.len() != n) {
            return Err(Error::Shape("re/im must be equal square arrays".into()));
        }
        let m = CMatrix::from_fn(n, n, |i, k| C64::new(j.re[i][k], j.im[i][k]));
        DensityOperator::new(j.dims, m)
    }
}

/// Linear operator on a single truncated mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeOperator(CMatrix);

impl ModeOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape("mode operator must be square".into()));
        }
        check_dims(&[matrix.nrows()])?;
        Ok(Self(matrix))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Unnormalized `O|ψ⟩`.
    pub fn apply(&self, psi: &StateVector) -> Result<CVector> {
        if psi.dims() != [self.dim()] {
            return Err(Error::Shape(format!(
                "operator of dimension {} on state dims {:?}",
                self.dim(),
                psi.dims()
            )));
        }
        Ok(&self.0 * psi.amps())
    }

    /// `O ρ O†` without renormalization.
    pub fn conjugate(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dims() != [self.dim()] {
            return Err(Error::Shape(format!(
                "operator of dimension {} on state dims {:?}",
                self.dim(),
                rho.dims()
            )));
        }
        DensityOperator::new(
            rho.dims().to_vec(),
            &self.0 * rho.matrix() * self.0.adjoint(),
        )
    }
}

/// Outcome `(x_u, p_v)` of the continuous-variable Bell measurement.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellOutcome {
    pub x_u: f64,
    pub p_v: f64,
}

impl BellOutcome {
    pub fn new(x_u: f64, p_v: f64) -> Result<Self> {
        if !(x_u.is_finite() && p_v.is_finite()) {
            return Err(Error::Domain(format!("non-finite outcome ({x_u}, {p_v})")));
        }
        Ok(Self { x_u, p_v })
    }

    pub fn origin() -> Self {
        Self { x_u: 0.0, p_v: 0.0 }
    }

    /// Coherent amplitude `x_u + i p_v` of the displacement `D(√2 x_u, √2 p_v)`.
    pub fn amplitude(&self) -> C64 {
        C64::new(self.x_u, self.p_v)
    }

    pub fn radius_sqr(&self) -> f64 {
        self.x_u * self.x_u + self.p_v * self.p_v
    }
}

/// What to do when a truncated state loses more weight than allowed.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruncationAction {
    #[default]
    Error,
    Warn,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationPolicy {
    pub threshold: f64,
    pub action: TruncationAction,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            threshold: 1e-3,
            action: TruncationAction::Error,
        }
    }
}

impl TruncationPolicy {
    pub fn permissive() -> Self {
        Self {
            threshold: 1.0,
            action: TruncationAction::Warn,
        }
    }

    pub(crate) fn check(&self, what: &str, weight: f64) -> Result<()> {
        if weight <= self.threshold {
            return Ok(());
        }
        let msg = format!(
            "{what} discards weight {weight:.3e} above threshold {:.1e}",
            self.threshold
        );
        match self.action {
            TruncationAction::Error => Err(Error::Truncation(msg)),
            TruncationAction::Warn => {
                log::warn!("{msg}");
                Ok(())
            }
        }
    }
}
