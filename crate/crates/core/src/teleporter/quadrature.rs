use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;

use crate::fock::C64;

/// Gauss-Legendre in the radius times a uniform angular rule on a disk.
#[derive(Clone, Debug)]
pub(crate) struct PolarRule {
    radial: Vec<(f64, f64)>,
    angular: usize,
}

impl PolarRule {
    pub fn new(radius: f64, radial: usize, angular: usize) -> Self {
        Self::annulus(0.0, radius, radial, angular)
    }

    /// Nodes on `inner ≤ |β| ≤ outer`; weights carry the area element
    /// `r dr dφ`.
    pub fn annulus(inner: f64, outer: f64, radial: usize, angular: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(radial.max(1)).expect("nonzero"));
        let half = 0.5 * (outer - inner);
        let dphi = 2.0 * PI / angular as f64;
        let radial = gl
            .iter()
            .map(|(x, w)| {
                let r = inner + half * (x + 1.0);
                (r, w * half * r * dphi)
            })
            .collect();
        Self { radial, angular }
    }

    /// Sums `f(β) · weight` over all nodes. Radial rings run in parallel; the
    /// final reduction is sequential in ring order so the result does not
    /// depend on the number of workers.
    pub fn integrate<T, F, A>(&self, f: F, zero: impl Fn() -> T + Sync, add: A) -> T
    where
        T: Send,
        F: Fn(C64, f64) -> T + Sync,
        A: Fn(&mut T, T) + Sync,
    {
        let dphi = 2.0 * PI / self.angular as f64;
        let rings: Vec<T> = self
            .radial
            .par_iter()
            .map(|&(r, w)| {
                let mut acc = zero();
                for j in 0..self.angular {
                    let beta = C64::from_polar(r, j as f64 * dphi);
                    add(&mut acc, f(beta, w));
                }
                acc
            })
            .collect();
        let mut total = zero();
        for ring in rings {
            add(&mut total, ring);
        }
        total
    }
}
