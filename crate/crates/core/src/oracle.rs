//! Finite-difference eigensolver used to check spectral predictions
//! independently of the Wronskian machinery.
//!
//! `-½ d²/dx² + V` on (x_min, x_max) with Dirichlet ends is discretized by
//! the three-point stencil; low eigenvalues come from Sturm-sequence
//! bisection on the resulting symmetric tridiagonal matrix.

use rayon::prelude::*;

use crate::{Error, Result};

/// Largest |V| accepted on a grid point.
pub const MAX_POTENTIAL: f64 = 1e12;

/// Absolute bracket width of each bisected eigenvalue.
pub const EIGEN_TOL: f64 = 1e-9;

/// Largest number of eigenvalues `eigenvalues_low` will return.
pub const MAX_EIGENVALUES: usize = 20;

/// Step of the five-point second-derivative stencil in [`residual`].
pub const RESIDUAL_STEP: f64 = 1e-3;

/// Uniform grid with `n` interior points on (x_min, x_max).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            x_min: 1e-4,
            x_max: 10.0,
            n: 4000,
        }
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min > 0.0 && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidParameter(format!(
                "grid needs 0 < x_min < x_max, got ({x_min}, {x_max})"
            )));
        }
        if n < 100 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 100 interior points, got {n}"
            )));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Default x_min with the given right end and point count.
    pub fn with_extent(x_max: f64, n: usize) -> Result<Self> {
        Self::new(Self::default().x_min, x_max, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n + 1) as f64
    }

    /// Interior point i ∈ 1..=n; i = 0 and i = n + 1 are the ends.
    pub fn point(&self, i: usize) -> f64 {
        if i == self.n + 1 {
            self.x_max
        } else {
            self.x_min + i as f64 * self.h()
        }
    }

    /// The n interior points.
    pub fn interior(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n).map(move |i| self.point(i))
    }

    /// All n + 2 points including both ends.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n + 1).map(move |i| self.point(i))
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "tridiagonal needs n >= 1 diagonal and n - 1 off-diagonal entries, got {} and {}",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `sigma` (negative LDLᵀ pivots).
    pub fn sturm_count(&self, sigma: f64) -> usize {
        const PIVOT_GUARD: f64 = 1e-300;
        let mut count = 0;
        let mut q = self.diag[0] - sigma;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let q_safe = if q.abs() < PIVOT_GUARD {
                PIVOT_GUARD.copysign(q)
            } else {
                q
            };
            let b = self.off[i - 1];
            q = (self.diag[i] - sigma) - b * b / q_safe;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            (lo.min(self.diag[i] - r), hi.max(self.diag[i] + r))
        })
    }
}

/// Three-point discretization of `-½ d²/dx² + V` on the grid interior.
pub fn discretize<V>(potential: V, grid: &Grid) -> Result<Tridiag>
where
    V: Fn(f64) -> Result<f64> + Sync,
{
    let h = grid.h();
    let inv_h2 = 1.0 / (h * h);
    let diag = (1..=grid.n())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let v = potential(x)?;
            if !(v.abs() <= MAX_POTENTIAL) {
                return Err(Error::PotentialSingularity { x, value: v.abs() });
            }
            Ok(inv_h2 + v)
        })
        .collect::<Result<Vec<f64>>>()?;
    let off = vec![-0.5 * inv_h2; grid.n() - 1];
    Tridiag::new(diag, off)
}

/// The `count` smallest eigenvalues in ascending order.
pub fn eigenvalues_low(t: &Tridiag, count: usize) -> Result<Vec<f64>> {
    if count > MAX_EIGENVALUES || count > t.dim() {
        return Err(Error::InvalidParameter(format!(
            "cannot extract {count} eigenvalues (limit {}, dimension {})",
            MAX_EIGENVALUES,
            t.dim()
        )));
    }
    let (lo, hi) = t.gershgorin();
    let pad = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
    let (lo, hi) = (lo - pad, hi + pad);
    Ok((0..count)
        .into_par_iter()
        .map(|idx| {
            // smallest sigma with more than idx eigenvalues below it
            let (mut a, mut b) = (lo, hi);
            while b - a > EIGEN_TOL {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if t.sturm_count(mid) > idx {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect())
}

/// `max_x |-½f″ + (V - E) f| / max(1, |f|)` over `sample`, with f″ from the
/// five-point central stencil.
pub fn residual<V, F>(potential: V, f: F, energy: f64, sample: &[f64]) -> Result<f64>
where
    V: Fn(f64) -> Result<f64>,
    F: Fn(f64) -> Result<f64>,
{
    let h = RESIDUAL_STEP;
    let mut worst = 0.0_f64;
    for &x in sample {
        if x - 2.0 * h <= 0.0 {
            return Err(Error::Domain(format!(
                "residual sample point {x} too close to the origin"
            )));
        }
        let f0 = f(x)?;
        let d2 = (-f(x + 2.0 * h)? + 16.0 * f(x + h)? - 30.0 * f0 + 16.0 * f(x - h)?
            - f(x - 2.0 * h)?)
            / (12.0 * h * h);
        let r = (-0.5 * d2 + (potential(x)? - energy) * f0).abs() / f0.abs().max(1.0);
        worst = worst.max(r);
    }
    Ok(worst)
}
