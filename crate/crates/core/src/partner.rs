//! Partner potentials `Ṽ = V - (ln W(u_1, …, u_k))″` and their eigenfunctions.
//!
//! Transformed eigenfunctions use the Crum representation
//! `Qψ = W(u_1, …, u_k, ψ) / W(u_1, …, u_k)`, rescaled so that Q has the
//! normalization `Q†Q = Π_j (H - ε_j)`. The candidate added states are
//! `φ_j ∝ W(u_1, …, û_j, …, u_k) / W(u_1, …, u_k)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::oracle::Grid;
use crate::seeds::SeedSolution;
use crate::wronskian::ReducedTable;
use crate::{Error, Result};

/// Family of truncated-oscillator solutions a transform maps onto physical
/// states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// ψ_n = C_n e^{-x²/2} H_{2n+1}(x) at E_n = 2n + 3/2.
    OddBase,
    /// χ_n = B_n e^{-x²/2} H_{2n}(x) at ℰ_n = 2n + 1/2.
    EvenBase,
}

impl Branch {
    pub fn energy(self, n: usize) -> f64 {
        match self {
            Branch::OddBase => 2.0 * n as f64 + 1.5,
            Branch::EvenBase => 2.0 * n as f64 + 0.5,
        }
    }
}

/// Normalized eigenfunction ψ_n or χ_n of the oscillator on (0, ∞).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseState {
    pub branch: Branch,
    pub n: usize,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite(m: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if m == 0 {
        return h0;
    }
    for i in 1..m {
        let h2 = 2.0 * x * h1 - 2.0 * i as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

impl BaseState {
    pub fn new(branch: Branch, n: usize) -> Self {
        Self { branch, n }
    }

    pub fn energy(&self) -> f64 {
        self.branch.energy(self.n)
    }

    /// C_n = [√π 2^{2n} (2n+1)!]^{-1/2} or B_n = [√π 2^{2n-1} (2n)!]^{-1/2}.
    pub fn norm_constant(&self) -> f64 {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let n = self.n;
        let d = match self.branch {
            Branch::OddBase => sqrt_pi * 2f64.powi(2 * n as i32) * factorial(2 * n + 1),
            Branch::EvenBase => sqrt_pi * 2f64.powi(2 * n as i32 - 1) * factorial(2 * n),
        };
        d.powf(-0.5)
    }

    fn hermite_degree(&self) -> usize {
        match self.branch {
            Branch::OddBase => 2 * self.n + 1,
            Branch::EvenBase => 2 * self.n,
        }
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!(
                "base state evaluated at x = {x} < 0"
            )));
        }
        Ok(self.norm_constant() * (-0.5 * x * x).exp() * hermite(self.hermite_degree(), x))
    }

    /// The same function written as a seed solution at its own energy, using
    /// H_{2n+1}(x) = (-1)^n (2n+1)!/n! · 2x ₁F₁(-n, 3/2; x²) and
    /// H_{2n}(x) = (-1)^n (2n)!/n! · ₁F₁(-n, 1/2; x²).
    pub fn as_seed(&self) -> SeedSolution {
        let n = self.n;
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let c = self.norm_constant();
        match self.branch {
            Branch::OddBase => SeedSolution::general(
                self.energy(),
                0.0,
                c * sign * 2.0 * factorial(2 * n + 1) / factorial(n),
            ),
            Branch::EvenBase => SeedSolution::general(
                self.energy(),
                c * sign * factorial(2 * n) / factorial(n),
                0.0,
            ),
        }
    }
}

pub fn base_state_value(s: &BaseState, x: f64) -> Result<f64> {
    s.value(x)
}

/// Partner of the truncated oscillator built from an ordered seed set.
/// The empty seed set is the identity transform.
#[derive(Debug, Clone, PartialEq)]
pub struct PartnerPotential {
    seeds: Vec<SeedSolution>,
}

impl PartnerPotential {
    pub fn new(seeds: Vec<SeedSolution>) -> Result<Self> {
        if let Some(u) = seeds.iter().find(|u| !u.epsilon().is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite factorization energy {}",
                u.epsilon()
            )));
        }
        if seeds.windows(2).any(|w| w[0].epsilon() >= w[1].epsilon()) {
            return Err(Error::InvalidParameter(
                "factorization energies must be strictly increasing".into(),
            ));
        }
        Ok(Self { seeds })
    }

    pub fn identity() -> Self {
        Self { seeds: Vec::new() }
    }

    pub fn order(&self) -> usize {
        self.seeds.len()
    }

    pub fn seeds(&self) -> &[SeedSolution] {
        &self.seeds
    }

    fn check_x(x: f64) -> Result<()> {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "partner quantities need x > 0, got {x}"
            )))
        }
    }

    fn all_cols(&self) -> Vec<usize> {
        (0..self.order()).collect()
    }

    /// Ṽ(x).
    pub fn value(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        let k = self.order();
        let t = ReducedTable::new(&self.seeds, x, k + 1)?;
        let log_w2 = k as f64 + t.log_second_deriv(&self.all_cols())?;
        Ok(0.5 * x * x - log_w2)
    }

    /// Ṽ at every interior point of the grid.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        (1..=grid.n())
            .into_par_iter()
            .map(|i| self.value(grid.point(i)))
            .collect()
    }

    /// `2^{-k/2} W(u_1, …, u_k, s) / (W(u_1, …, u_k) √|Π_j (E - ε_j)|)`.
    pub fn transformed_eigenfunction(&self, s: &BaseState, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        let k = self.order();
        if k == 0 {
            return s.value(x);
        }
        let energy = s.energy();
        let mut prod = 1.0;
        for u in &self.seeds {
            let d = energy - u.epsilon();
            if d.abs() < 1e-12 {
                return Err(Error::Degenerate { energy });
            }
            prod *= d;
        }
        let base = s.as_seed();
        let t = ReducedTable::new(self.seeds.iter().chain(std::iter::once(&base)), x, k)?;
        let w = t.nonzero_wronskian(&self.all_cols())?;
        let full_cols: Vec<usize> = (0..=k).collect();
        let ratio = t.wronskian_scaled(&full_cols) * t.scale(k) / w;
        Ok((0.5 * x * x).exp() * ratio / (2f64.powi(k as i32) * prod.abs()).sqrt())
    }

    /// Unnormalized candidate added state φ_j (1-based j).
    pub fn added_state(&self, j: usize, x: f64) -> Result<f64> {
        Ok(self.added_states(&[j], x)?[0])
    }

    /// φ_j for several candidates at once, sharing one derivative table.
    pub fn added_states(&self, js: &[usize], x: f64) -> Result<Vec<f64>> {
        let k = self.order();
        if let Some(&j) = js.iter().find(|&&j| j == 0 || j > k) {
            return Err(Error::Index { index: j, len: k });
        }
        Self::check_x(x)?;
        let t = ReducedTable::new(&self.seeds, x, k.saturating_sub(1))?;
        let w = t.nonzero_wronskian(&self.all_cols())?;
        let gauss = (-0.5 * x * x).exp();
        Ok(js
            .iter()
            .map(|&j| {
                let minor_cols: Vec<usize> = (0..k).filter(|&i| i + 1 != j).collect();
                gauss * t.wronskian_scaled(&minor_cols) / (w * t.scale(j - 1))
            })
            .collect())
    }
}

pub fn partner_v(p: &PartnerPotential, x: f64) -> Result<f64> {
    p.value(x)
}

pub fn transformed_eigenfunction(p: &PartnerPotential, s: &BaseState, x: f64) -> Result<f64> {
    p.transformed_eigenfunction(s, x)
}

pub fn added_state(p: &PartnerPotential, j: usize, x: f64) -> Result<f64> {
    p.added_state(j, x)
}

/// Composite Simpson rule on uniformly spaced samples; an odd number of
/// intervals closes with the 3/8 rule.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let intervals = values.len().saturating_sub(1);
    match intervals {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        2 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let (even_part, tail) = if intervals.is_multiple_of(2) {
                (intervals, 0.0)
            } else {
                let s = intervals - 3;
                let t = 3.0 * h / 8.0
                    * (values[s] + 3.0 * values[s + 1] + 3.0 * values[s + 2] + values[s + 3]);
                (s, t)
            };
            let mut acc = values[0] + values[even_part];
            for (i, v) in values.iter().enumerate().take(even_part).skip(1) {
                acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            h / 3.0 * acc + tail
        }
    }
}

/// N > 0 with `∫_0^{x_max} (N f)² dx = 1`, sampled on the grid nodes.
pub fn normalize<F>(f: F, grid: &Grid) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let values = (0..=grid.n() + 1)
        .into_par_iter()
        .map(|i| f(grid.point(i)))
        .collect::<Result<Vec<f64>>>()?;
    normalize_samples(&values, grid)
}

/// [`normalize`] for values already sampled at every node of `grid`,
/// boundary nodes included.
pub fn normalize_samples(values: &[f64], grid: &Grid) -> Result<f64> {
    if values.len() != grid.n() + 2 {
        return Err(Error::InvalidParameter(format!(
            "{} samples for a grid of {} nodes",
            values.len(),
            grid.n() + 2
        )));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonNormalizable(format!("non-finite sample {v}")));
    }
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::NonNormalizable(
            "function vanishes on the grid".into(),
        ));
    }
    let tail = values.last().unwrap().abs();
    if tail >= 1e-8 * peak {
        return Err(Error::NonNormalizable(format!(
            "|f(x_max)| = {tail:e} is not small against max |f| = {peak:e}"
        )));
    }
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    // [0, x_min] is not on the grid; f is flat or vanishing there to the
    // accuracy that matters, so a one-point rule covers it.
    let head = grid.x_min() * sq[0];
    Ok((head + simpson(&sq, grid.h())).sqrt().recip())
}
