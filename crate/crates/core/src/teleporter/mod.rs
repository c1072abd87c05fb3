//! Conditional teleportation of a single mode through a two-mode resource.
//!
//! A Bell measurement on the input and resource mode A yields
//! `β = x_u + i p_v`. Mode B is left in
//! `ρ_B(β) = (1/π) Σ_{k,k'} σ_{kk'} ⟨k|_A ρ_AB |k'⟩_A` with
//! `σ = D(−β) ρ_in D(−β)†`, whose trace is the outcome density with respect
//! to `dx_u dp_v`. Feed-forward applies `D(gβ)`, i.e. the displacement
//! `D(√2 g x_u, √2 g p_v)` in quadrature coordinates. Events are kept when
//! `|β| ≤ L`.

mod oracle;
mod quadrature;
mod resource;
mod sampling;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::fock::{displacement_block, CMatrix, LnFactorials, TruncationPolicy, C64};
use crate::{BellOutcome, DensityOperator, Error, Result};

pub use oracle::lossy_noiseless_oracle;
pub use resource::{build_resource, LossPlacement, Resource};
pub use sampling::{SampleSummary, Sampler, ShotRecord};

use quadrature::PolarRule;
use resource::Conditional;

/// Acceptance radius `L ≥ 0`, possibly infinite.
#[derive(Copy, Clone, Debug, PartialEq, PartialOrd)]
pub struct Radius(f64);

impl Radius {
    pub const INFINITE: Radius = Radius(f64::INFINITY);

    pub fn new(l: f64) -> Result<Self> {
        if l.is_nan() || l < 0.0 {
            return Err(Error::Domain(format!("radius {l} must be ≥ 0")));
        }
        Ok(Self(l))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn contains(self, outcome: &BellOutcome) -> bool {
        self.is_infinite() || outcome.radius_sqr() <= self.0 * self.0
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Radius {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let v = match Raw::deserialize(d)? {
            Raw::Num(v) => v,
            Raw::Text(t) if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity") => {
                f64::INFINITY
            }
            Raw::Text(t) => {
                return Err(serde::de::Error::custom(format!(
                    "radius must be a number or \"inf\", got {t:?}"
                )))
            }
        };
        Radius::new(v).map_err(serde::de::Error::custom)
    }
}

/// Polar integration grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Disk radius used for `L = ∞`; derived from the outcome moments when
    /// absent. Must cover at least five standard deviations.
    pub range: Option<f64>,
    /// Target spacing of radial nodes.
    pub step: f64,
    /// Angular nodes; defaults to `d_in + d_out` plus the resource's phase
    /// spread, which integrates every angular harmonic exactly.
    pub angular: Option<usize>,
    pub min_radial: usize,
    /// Largest change allowed when the grid is doubled in both directions.
    pub tolerance: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            range: None,
            step: 0.25,
            angular: None,
            min_radial: 8,
            tolerance: 1e-6,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Domain(format!(
                "grid step {} must be > 0",
                self.step
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain("grid tolerance must be > 0".into()));
        }
        if self.min_radial == 0 || self.angular == Some(0) {
            return Err(Error::Domain("grid node counts must be ≥ 1".into()));
        }
        if let Some(r) = self.range {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Domain(format!("grid range {r} must be > 0")));
            }
        }
        Ok(())
    }
}

fn default_shots() -> usize {
    10_000
}

fn default_radius() -> Radius {
    Radius::INFINITE
}

/// Parameters of one teleportation experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Two-mode squeezing of the resource.
    pub r: f64,
    /// Photon loss probability per affected resource mode.
    #[serde(default)]
    pub loss_l: f64,
    #[serde(default)]
    pub loss_placement: LossPlacement,
    /// Feed-forward gain.
    pub gain_g: f64,
    #[serde(rename = "radius_L", default = "default_radius")]
    pub radius: Radius,
    /// Fock cutoff `N`; each resource mode keeps `N + 1` levels.
    #[serde(rename = "cutoff_N")]
    pub cutoff: usize,
    /// Levels of the output mode; `N + 1` when absent.
    #[serde(default)]
    pub output_dim: Option<usize>,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub truncation: TruncationPolicy,
}

impl ExperimentConfig {
    pub fn new(r: f64, loss_l: f64, gain_g: f64, radius: Radius, cutoff: usize) -> Self {
        Self {
            r,
            loss_l,
            loss_placement: LossPlacement::default(),
            gain_g,
            radius,
            cutoff,
            output_dim: None,
            shots: default_shots(),
            seed: 0,
            grid: GridSpec::default(),
            truncation: TruncationPolicy::default(),
        }
    }

    /// Lossless resource with the gain tuned to `tanh r`.
    pub fn ideal(r: f64, radius: Radius, cutoff: usize) -> Self {
        Self::new(r, 0.0, r.tanh(), radius, cutoff)
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim.unwrap_or(self.dim())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::Domain(format!(
                "squeezing r = {} must be ≥ 0",
                self.r
            )));
        }
        if !(0.0..=1.0).contains(&self.loss_l) {
            return Err(Error::Domain(format!(
                "loss {} outside [0, 1]",
                self.loss_l
            )));
        }
        if !(self.gain_g >= 0.0 && self.gain_g.is_finite()) {
            return Err(Error::Domain(format!("gain {} must be ≥ 0", self.gain_g)));
        }
        if self.cutoff < 1 || self.output_dim() < 2 {
            return Err(Error::InvalidDimension(format!(
                "cutoff {} / output dimension {} too small",
                self.cutoff,
                self.output_dim()
            )));
        }
        self.grid.validate()
    }
}

/// Integration diagnostics reported with every conditional result.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Radius of the integration disk.
    pub radius: f64,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    /// Integral of the outcome density over the disk.
    pub integrated_mass: f64,
    /// Largest change of probability or normalized state when the grid is
    /// doubled.
    pub refinement_change: f64,
    /// Fraction of the conditional weight displaced above the output cutoff.
    pub output_truncation: f64,
}

/// Normalized output state with its acceptance probability.
#[derive(Clone, Debug)]
pub struct ConditionalResult {
    pub state: DensityOperator,
    /// `P(L)`; exactly 1 for `L = ∞` and 0 for `L = 0`.
    pub probability: f64,
    pub diagnostics: Diagnostics,
}

/// Bell-measurement moments of the input and resource mode A, used for the
/// automatic integration range and the Monte Carlo proposal.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct OutcomeMoments {
    pub mean: C64,
    pub var_x: f64,
    pub var_p: f64,
}

impl OutcomeMoments {
    pub fn max_sd(&self) -> f64 {
        self.var_x.max(self.var_p).sqrt()
    }
}

/// `(⟨a⟩, ⟨a²⟩, ⟨n⟩)` from entries of a density matrix.
fn ladder_moments(entries: impl Iterator<Item = (usize, usize, C64)>) -> (C64, C64, f64) {
    let (mut a, mut a2, mut n) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), 0.0);
    for (i, j, v) in entries {
        // Tr[ρ a] = Σ ρ[i, i−1] √i, Tr[ρ a²] = Σ ρ[i, i−2] √(i(i−1))
        if i == j + 1 {
            a += v * (i as f64).sqrt();
        } else if i == j + 2 {
            a2 += v * ((i * (i - 1)) as f64).sqrt();
        } else if i == j {
            n += v.re * i as f64;
        }
    }
    (a, a2, n)
}

fn quadrature_variances(a: C64, a2: C64, n: f64) -> (f64, f64) {
    let x2 = a2.re + n + 0.5;
    let p2 = -a2.re + n + 0.5;
    let mx = std::f64::consts::SQRT_2 * a.re;
    let mp = std::f64::consts::SQRT_2 * a.im;
    (x2 - mx * mx, p2 - mp * mp)
}

fn as_single_mode(rho: &DensityOperator) -> Result<CMatrix> {
    rho.require_single_mode("teleporter input")?;
    let tr = rho.trace();
    if !(tr > 0.0 && tr.is_finite()) {
        return Err(Error::InvalidState(format!("input trace {tr}")));
    }
    Ok(rho.matrix() / C64::new(tr, 0.0))
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn real_trace(m: &CMatrix) -> f64 {
    m.trace().re
}

/// `Tr[W ρ W†]` without forming the `d_B × d_B` product.
fn factor_mass(w: &CMatrix, rho: &CMatrix) -> f64 {
    real_trace(&(w.adjoint() * w * rho))
}

struct Integral {
    outputs: Vec<CMatrix>,
    masses: Vec<f64>,
}

/// A configured teleporter: resource, gain, output cutoff and grid.
#[derive(Clone, Debug)]
pub struct Teleporter {
    resource: Resource,
    gain: f64,
    output_dim: usize,
    grid: GridSpec,
}

impl Teleporter {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let resource = build_resource(
            config.r,
            config.loss_l,
            config.dim(),
            config.loss_placement,
            &config.truncation,
        )?;
        Ok(Self {
            resource,
            gain: config.gain_g,
            output_dim: config.output_dim(),
            grid: config.grid.clone(),
        })
    }

    pub fn with_resource(
        resource: Resource,
        gain: f64,
        output_dim: usize,
        grid: GridSpec,
    ) -> Result<Self> {
        if !(gain >= 0.0 && gain.is_finite()) {
            return Err(Error::Domain(format!("gain {gain} must be ≥ 0")));
        }
        if output_dim < 2 {
            return Err(Error::InvalidDimension(format!(
                "output dimension {output_dim}"
            )));
        }
        grid.validate()?;
        Ok(Self {
            resource,
            gain,
            output_dim,
            grid,
        })
    }

    pub fn resource(&self) -> &Resource {
        &self.resource
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn factorials(&self, din: usize) -> LnFactorials {
        let [da, db] = self.resource.dims();
        LnFactorials::new(da.max(db).max(din).max(self.output_dim))
    }

    fn disp_in(&self, beta: C64, din: usize, lnf: &LnFactorials) -> CMatrix {
        displacement_block(-beta, self.resource.dims()[0], din, lnf)
    }

    fn disp_out(&self, beta: C64, lnf: &LnFactorials) -> CMatrix {
        displacement_block(
            beta * self.gain,
            self.output_dim,
            self.resource.dims()[1],
            lnf,
        )
    }

    /// Outcome density at `β` for a normalized input matrix.
    pub(crate) fn density_at(&self, rho: &CMatrix, beta: C64, lnf: &LnFactorials) -> f64 {
        let v = self.disp_in(beta, rho.ncols(), lnf);
        match self.resource.conditional(&v, rho) {
            Conditional::Factor(w) => factor_mass(&w, rho),
            Conditional::Dense(m) => real_trace(&m),
        }
    }

    /// Feed-forward-corrected, unnormalized outputs and outcome densities at
    /// `β` for each input operator.
    fn node(&self, inputs: &[CMatrix], beta: C64, lnf: &LnFactorials) -> (Vec<CMatrix>, Vec<f64>) {
        let din = inputs[0].ncols();
        let v = self.disp_in(beta, din, lnf);
        let f = self.disp_out(beta, lnf);
        let mut outs = Vec::with_capacity(inputs.len());
        let mut masses = Vec::with_capacity(inputs.len());
        match self.resource.conditional(&v, &inputs[0]) {
            Conditional::Factor(w) => {
                let x = &f * &w;
                let gram = w.adjoint() * &w;
                for rho in inputs {
                    masses.push(real_trace(&(&gram * rho)));
                    outs.push(&x * rho * x.adjoint());
                }
            }
            Conditional::Dense(first) => {
                for (i, rho) in inputs.iter().enumerate() {
                    let rb = if i == 0 {
                        first.clone()
                    } else {
                        match self.resource.conditional(&v, rho) {
                            Conditional::Dense(m) => m,
                            Conditional::Factor(_) => unreachable!("resource kind is fixed"),
                        }
                    };
                    masses.push(real_trace(&rb));
                    outs.push(&f * rb * f.adjoint());
                }
            }
        }
        (outs, masses)
    }

    fn integrate(&self, inputs: &[CMatrix], rule: &PolarRule, lnf: &LnFactorials) -> Integral {
        let dout = self.output_dim;
        let count = inputs.len();
        let zero = || Integral {
            outputs: vec![CMatrix::zeros(dout, dout); count],
            masses: vec![0.0; count],
        };
        rule.integrate(
            |beta, w| {
                let (outs, masses) = self.node(inputs, beta, lnf);
                Integral {
                    outputs: outs.into_iter().map(|m| m * C64::new(w, 0.0)).collect(),
                    masses: masses.into_iter().map(|m| m * w).collect(),
                }
            },
            zero,
            |acc, x| {
                for (a, b) in acc.outputs.iter_mut().zip(x.outputs) {
                    *a += b;
                }
                for (a, b) in acc.masses.iter_mut().zip(x.masses) {
                    *a += b;
                }
            },
        )
    }

    /// Moments of the Bell outcome for a normalized input.
    pub fn outcome_moments(&self, rho_in: &DensityOperator) -> Result<OutcomeMoments> {
        let rho = as_single_mode(rho_in)?;
        Ok(self.moments_of(&rho))
    }

    fn moments_of(&self, rho: &CMatrix) -> OutcomeMoments {
        let d = rho.nrows();
        let (ai, a2i, ni) = ladder_moments(
            (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|(i, j)| (i, j, rho[(i, j)])),
        );
        let (aa, a2a, na) = ladder_moments(self.resource.marginal_a().into_iter());
        let (vxi, vpi) = quadrature_variances(ai, a2i, ni);
        let (vxa, vpa) = quadrature_variances(aa, a2a, na);
        OutcomeMoments {
            mean: ai - aa.conj(),
            var_x: 0.5 * (vxi + vxa),
            var_p: 0.5 * (vpi + vpa),
        }
    }

    fn integration_radius(&self, radius: Radius, moments: &OutcomeMoments) -> Result<f64> {
        if !radius.is_infinite() {
            return Ok(radius.value());
        }
        let sd = moments.max_sd();
        match self.grid.range {
            Some(r) if r < moments.mean.norm() + 5.0 * sd => Err(Error::Domain(format!(
                "grid range {r} covers fewer than five standard deviations ({sd:.3}) around the mean outcome"
            ))),
            Some(r) => Ok(r),
            None => Ok(moments.mean.norm() + 8.0 * sd),
        }
    }

    fn node_counts(&self, width: f64, din: usize) -> (usize, usize) {
        let radial = self
            .grid
            .min_radial
            .max((width / self.grid.step).ceil() as usize);
        let angular = self
            .grid
            .angular
            .unwrap_or(din + self.output_dim + self.resource.phase_spread());
        (radial, angular)
    }

    /// Integrates the teleporter map over the disk for several input
    /// operators at once, with the doubling check. Returns unnormalized
    /// outputs and masses from the finer grid.
    fn integrate_checked(
        &self,
        inputs: &[CMatrix],
        radius: f64,
    ) -> Result<(Integral, Diagnostics)> {
        let din = inputs[0].ncols();
        let lnf = self.factorials(din);
        let (nr, na) = self.node_counts(radius, din);
        let coarse = self.integrate(inputs, &PolarRule::new(radius, nr, na), &lnf);
        let fine = self.integrate(inputs, &PolarRule::new(radius, 2 * nr, 2 * na), &lnf);
        let scale = fine.masses.iter().map(|m| m.abs()).fold(0.0, f64::max);
        let mut change = 0.0_f64;
        for (a, b) in coarse.masses.iter().zip(&fine.masses) {
            change = change.max((a - b).abs());
        }
        if scale > 0.0 {
            for (a, b) in coarse.outputs.iter().zip(&fine.outputs) {
                let diff = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
                change = change.max(diff / scale);
            }
        }
        let diagnostics = Diagnostics {
            radius,
            radial_nodes: 2 * nr,
            angular_nodes: 2 * na,
            integrated_mass: fine.masses.first().copied().unwrap_or(0.0),
            refinement_change: change,
            output_truncation: 0.0,
        };
        if change > self.grid.tolerance {
            return Err(Error::Accuracy(format!(
                "grid doubling from {nr}×{na} changed the result by {change:.3e} (tolerance {:.1e}); diagnostics {diagnostics:?}",
                self.grid.tolerance
            )));
        }
        Ok((fine, diagnostics))
    }

    /// Unnormalized conditional state of mode B and the outcome density.
    pub fn bsm_conditional(
        &self,
        rho_in: &DensityOperator,
        outcome: &BellOutcome,
    ) -> Result<(DensityOperator, f64)> {
        let rho = as_single_mode(rho_in)?;
        let lnf = self.factorials(rho.ncols());
        let v = self.disp_in(outcome.amplitude(), rho.ncols(), &lnf);
        let m = match self.resource.conditional(&v, &rho) {
            Conditional::Factor(w) => &w * &rho * w.adjoint(),
            Conditional::Dense(m) => m,
        };
        let density = real_trace(&m);
        let db = self.resource.dims()[1];
        Ok((DensityOperator::new(vec![db], hermitian_part(&m))?, density))
    }

    /// Unnormalized output at one outcome after feed-forward; its trace is the
    /// outcome density up to output truncation.
    pub fn conditional_output(
        &self,
        rho_in: &DensityOperator,
        outcome: &BellOutcome,
    ) -> Result<(DensityOperator, f64)> {
        let rho = as_single_mode(rho_in)?;
        let lnf = self.factorials(rho.ncols());
        let (mut outs, masses) = self.node(std::slice::from_ref(&rho), outcome.amplitude(), &lnf);
        let out = hermitian_part(&outs.remove(0));
        Ok((DensityOperator::new(vec![self.output_dim], out)?, masses[0]))
    }

    /// Outcome density at `outcome`.
    pub fn outcome_density(&self, rho_in: &DensityOperator, outcome: &BellOutcome) -> Result<f64> {
        let rho = as_single_mode(rho_in)?;
        let lnf = self.factorials(rho.ncols());
        Ok(self.density_at(&rho, outcome.amplitude(), &lnf))
    }

    /// Conditional teleportation with acceptance radius `radius`.
    pub fn teleport(&self, rho_in: &DensityOperator, radius: Radius) -> Result<ConditionalResult> {
        let rho = as_single_mode(rho_in)?;
        if radius.value() == 0.0 {
            let (out, mass) = self.conditional_output(rho_in, &BellOutcome::origin())?;
            let tr = out.trace();
            if !(mass > 1e-300 && tr > 0.0) {
                return Err(Error::HeraldImpossible(
                    "zero outcome density at the origin".into(),
                ));
            }
            return Ok(ConditionalResult {
                state: out.normalized()?,
                probability: 0.0,
                diagnostics: Diagnostics {
                    output_truncation: 1.0 - tr / mass,
                    ..Diagnostics::default()
                },
            });
        }
        let moments = self.moments_of(&rho);
        let width = self.integration_radius(radius, &moments)?;
        let (mut integral, mut diagnostics) =
            self.integrate_checked(std::slice::from_ref(&rho), width)?;
        let mass = integral.masses[0];
        let out = hermitian_part(&integral.outputs.remove(0));
        let tr = real_trace(&out);
        if !(mass > 1e-300 && tr > 0.0) {
            return Err(Error::HeraldImpossible(format!(
                "no outcome probability inside radius {radius}"
            )));
        }
        diagnostics.output_truncation = 1.0 - tr / mass;
        let state = DensityOperator::new(vec![self.output_dim], out / C64::new(tr, 0.0))?;
        let probability = if radius.is_infinite() {
            1.0
        } else {
            mass.min(1.0)
        };
        Ok(ConditionalResult {
            state,
            probability,
            diagnostics,
        })
    }

    /// Integrates the (linear) teleporter map on arbitrary operators, e.g. the
    /// units `|m⟩⟨n|` of a Choi matrix. Outputs are unnormalized.
    pub fn apply_map(
        &self,
        inputs: &[CMatrix],
        radius: Radius,
    ) -> Result<(Vec<CMatrix>, Diagnostics)> {
        let first = inputs
            .first()
            .ok_or_else(|| Error::Shape("no input operators".into()))?;
        let din = first.ncols();
        if inputs.iter().any(|m| m.nrows() != din || m.ncols() != din) {
            return Err(Error::Shape(
                "input operators must share one square shape".into(),
            ));
        }
        if radius.value() == 0.0 {
            return Err(Error::Domain("the map over an empty disk is zero".into()));
        }
        // moments from the maximally mixed state on the input support
        let probe = CMatrix::identity(din, din) / C64::new(din as f64, 0.0);
        let width = self.integration_radius(radius, &self.moments_of(&probe))?;
        let (integral, diagnostics) = self.integrate_checked(inputs, width)?;
        Ok((integral.outputs, diagnostics))
    }

    /// `P(L)` for each radius. Radii are integrated as nested annuli so the
    /// curve is nondecreasing by construction; every annulus passes the
    /// doubling check on its own.
    pub fn success_probability(
        &self,
        rho_in: &DensityOperator,
        radii: &[Radius],
    ) -> Result<Vec<(Radius, f64)>> {
        let rho = as_single_mode(rho_in)?;
        let lnf = self.factorials(rho.ncols());
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&a, &b| radii[a].value().total_cmp(&radii[b].value()));
        let mut probs = vec![0.0; radii.len()];
        let (mut inner, mut acc) = (0.0_f64, 0.0_f64);
        let mass_of = |rule: &PolarRule| {
            rule.integrate(
                |beta, w| w * self.density_at(&rho, beta, &lnf),
                || 0.0,
                |a, x| *a += x,
            )
        };
        for idx in order {
            let radius = radii[idx];
            if radius.is_infinite() {
                probs[idx] = 1.0;
                continue;
            }
            let outer = radius.value();
            if outer > inner {
                let (nr, na) = self.node_counts(outer - inner, rho.ncols());
                let coarse = mass_of(&PolarRule::annulus(inner, outer, nr, na));
                let fine = mass_of(&PolarRule::annulus(inner, outer, 2 * nr, 2 * na));
                if (coarse - fine).abs() > self.grid.tolerance {
                    return Err(Error::Accuracy(format!(
                        "P on annulus [{inner}, {outer}] changed by {:.3e} under grid doubling",
                        (coarse - fine).abs()
                    )));
                }
                acc += fine;
                inner = outer;
            }
            probs[idx] = acc.min(1.0);
        }
        Ok(radii.iter().cloned().zip(probs).collect())
    }

    /// Monte Carlo sampler of Bell outcomes for `rho_in`.
    pub fn sampler(&self, rho_in: &DensityOperator) -> Result<Sampler<'_>> {
        Sampler::new(self, as_single_mode(rho_in)?)
    }
}

/// [`Teleporter::bsm_conditional`] for a given resource.
pub fn bsm_conditional(
    rho_in: &DensityOperator,
    resource: &Resource,
    outcome: &BellOutcome,
) -> Result<(DensityOperator, f64)> {
    let dim = resource.dims()[1];
    Teleporter::with_resource(resource.clone(), 0.0, dim, GridSpec::default())?
        .bsm_conditional(rho_in, outcome)
}

/// `D(gβ) ρ D(gβ)†` with exact matrix elements restricted to the dimension
/// of `rho_b`; weight displaced above the cutoff is lost from the trace.
pub fn feed_forward(
    rho_b: &DensityOperator,
    outcome: &BellOutcome,
    g: f64,
) -> Result<DensityOperator> {
    let d = rho_b.require_single_mode("feed-forward")?;
    if !g.is_finite() {
        return Err(Error::Domain(format!("gain {g} must be finite")));
    }
    let f = displacement_block(outcome.amplitude() * g, d, d, &LnFactorials::new(d));
    DensityOperator::new(vec![d], &f * rho_b.matrix() * f.adjoint())
}

/// Conditional teleportation of `rho_in` with the radius from `config`.
pub fn teleport(rho_in: &DensityOperator, config: &ExperimentConfig) -> Result<ConditionalResult> {
    Teleporter::new(config)?.teleport(rho_in, config.radius)
}

/// `P(L)` curve for the configured resource.
pub fn success_probability(
    rho_in: &DensityOperator,
    config: &ExperimentConfig,
    radii: &[Radius],
) -> Result<Vec<(Radius, f64)>> {
    Teleporter::new(config)?.success_probability(rho_in, radii)
}

/// One Monte Carlo shot with the configured radius. Builds a fresh sampler;
/// reuse [`Teleporter::sampler`] for many shots.
pub fn sample_run<R: rand::Rng + ?Sized>(
    rho_in: &DensityOperator,
    config: &ExperimentConfig,
    rng: &mut R,
) -> Result<ShotRecord> {
    let tele = Teleporter::new(config)?;
    let sampler = tele.sampler(rho_in)?;
    sampler.run(config.radius, rng)
}

#[cfg(test)]
mod tests;
