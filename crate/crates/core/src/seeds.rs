//! Seed solutions of the oscillator equation `-½u″ + ½x²u = εu`.
//!
//! The general solution is
//!
//! ```text
//! u(x) = e^{-x²/2} [ b1 ₁F₁((1-2ε)/4, 1/2; x²) + b2 x ₁F₁((3-2ε)/4, 3/2; x²) ]
//! ```
//!
//! with the first bracket even and the second odd in x.

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::kummer::{kummer_m, kummer_m_deriv, kummer_m_scaled, series_dd_family, KummerParams};
use crate::{Error, Result};

/// Parity of a function on the full line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// +1 for even, -1 for odd.
    pub fn value(self) -> i32 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    pub fn from_value(v: i32) -> Option<Self> {
        match v {
            1 => Some(Parity::Even),
            -1 => Some(Parity::Odd),
            _ => None,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    /// Parity of a product.
    pub fn times(self, other: Parity) -> Parity {
        Parity::from_value(self.value() * other.value()).unwrap()
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Parity::Even => write!(f, "+1"),
            Parity::Odd => write!(f, "-1"),
        }
    }
}

/// A (generally non-physical) solution of the oscillator equation at the
/// factorization energy `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedSolution {
    epsilon: f64,
    b1: f64,
    b2: f64,
}

/// One definite-parity half of a seed: `coeff · x^power · e^{-x²/2} ₁F₁(a, b; x²)`.
#[derive(Debug, Clone, Copy)]
struct Component {
    coeff: f64,
    a: f64,
    b: f64,
    odd: bool,
}

impl SeedSolution {
    /// Seed with definite parity and unit coefficient.
    pub fn new(epsilon: f64, parity: Parity) -> Self {
        match parity {
            Parity::Even => Self::general(epsilon, 1.0, 0.0),
            Parity::Odd => Self::general(epsilon, 0.0, 1.0),
        }
    }

    /// General linear combination `b1 · even + b2 · odd`.
    pub fn general(epsilon: f64, b1: f64, b2: f64) -> Self {
        Self { epsilon, b1, b2 }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    /// `None` for mixed seeds (both coefficients nonzero) and for the zero
    /// function.
    pub fn parity(&self) -> Option<Parity> {
        match (self.b1 != 0.0, self.b2 != 0.0) {
            (true, false) => Some(Parity::Even),
            (false, true) => Some(Parity::Odd),
            _ => None,
        }
    }

    fn components(&self) -> impl Iterator<Item = Component> {
        let eps = self.epsilon;
        [
            Component {
                coeff: self.b1,
                a: (1.0 - 2.0 * eps) / 4.0,
                b: 0.5,
                odd: false,
            },
            Component {
                coeff: self.b2,
                a: (3.0 - 2.0 * eps) / 4.0,
                b: 1.5,
                odd: true,
            },
        ]
        .into_iter()
        .filter(|c| c.coeff != 0.0)
    }

    fn check_epsilon(&self) -> Result<()> {
        if self.epsilon.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "factorization energy must be finite, got {}",
                self.epsilon
            )))
        }
    }

    /// u(x) for x ≥ 0.
    pub fn value(&self, x: f64) -> Result<f64> {
        self.check_epsilon()?;
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("seed evaluated at x = {x} < 0")));
        }
        let z = x * x;
        let half_gauss = (0.5 * z).exp();
        let mut u = 0.0;
        for c in self.components() {
            // e^{-z/2} M = e^{z/2} (e^{-z} M) keeps the intermediate finite.
            let m = half_gauss * kummer_m_scaled(c.a, c.b, z)?;
            u += c.coeff * if c.odd { x * m } else { m };
        }
        Ok(u)
    }

    /// `[u, u′, …, u^(max_order)]` at x > 0.
    ///
    /// u′ comes from the closed form; every higher order from the
    /// Leibniz-expanded equation
    /// `u^(n+2) = (x² - 2ε) u^(n) + 2n x u^(n-1) + n(n-1) u^(n-2)`.
    pub fn derivs(&self, x: f64, max_order: usize) -> Result<Vec<f64>> {
        self.check_epsilon()?;
        if !(x > 0.0) {
            return Err(Error::Domain(format!(
                "seed derivatives need x > 0, got {x}"
            )));
        }
        let z = x * x;
        let gauss = (-0.5 * z).exp();
        let mut u0 = 0.0;
        let mut u1 = 0.0;
        for c in self.components() {
            let p = KummerParams::new(c.a, c.b, z);
            let m = kummer_m(p)?;
            let dm = kummer_m_deriv(p, 1)?;
            if c.odd {
                u0 += c.coeff * gauss * x * m;
                u1 += c.coeff * gauss * (m + 2.0 * z * dm - z * m);
            } else {
                u0 += c.coeff * gauss * m;
                u1 += c.coeff * gauss * (2.0 * x * dm - x * m);
            }
        }
        let mut out = Vec::with_capacity(max_order + 1);
        out.push(u0);
        if max_order >= 1 {
            out.push(u1);
        }
        let shift = z - 2.0 * self.epsilon;
        for order in 2..=max_order {
            let n = order - 2;
            let nf = n as f64;
            let mut next = shift * out[n];
            if n >= 1 {
                next += 2.0 * nf * x * out[n - 1];
            }
            if n >= 2 {
                next += nf * (nf - 1.0) * out[n - 2];
            }
            out.push(next);
        }
        Ok(out)
    }

    /// Derivatives `[v, v′, …, v^(max_order)]` of the reduced function
    /// `v(x) = e^{-x²/2} u(x)` at x ≥ 0.
    ///
    /// Generic seeds grow like `e^{x²/2} x^{-ε-1/2}`, so `v` is a power law
    /// at large x. Its derivatives are built from exact z-derivatives of
    /// `G(z) = e^{-z} ₁F₁(a, b; z)`,
    /// `G^(m)(z) = (-1)^m (b-a)_m / (b)_m · e^{-z} ₁F₁(a, b+m; z)`,
    /// composed with z = x² by Faà di Bruno's formula. No step of this route
    /// subtracts the shared exponential growth, which is what keeps high-order
    /// Wronskians of growing seeds accurate.
    pub fn reduced_derivs(&self, x: f64, max_order: usize) -> Result<Vec<f64>> {
        self.check_epsilon()?;
        if !(x >= 0.0) {
            return Err(Error::Domain(format!(
                "reduced derivatives need x >= 0, got {x}"
            )));
        }
        let z = x * x;
        let mut out = vec![0.0; max_order + 1];
        for c in self.components() {
            // G^(m)(z), m = 0..=max_order
            let mut gz = Vec::with_capacity(max_order + 1);
            let mut poch = 1.0;
            for m in 0..=max_order {
                if m > 0 {
                    let mf = (m - 1) as f64;
                    poch *= -(c.b - c.a + mf) / (c.b + mf);
                }
                gz.push(if poch == 0.0 {
                    0.0
                } else {
                    poch * kummer_m_scaled(c.a, c.b + m as f64, z)?
                });
            }
            // g_n = d^n/dx^n G(x²)
            let g: Vec<f64> = (0..=max_order)
                .map(|n| {
                    (n.div_ceil(2)..=n)
                        .map(|m| {
                            faa_di_bruno_coeff(n, m) * (2.0 * x).powi((2 * m - n) as i32) * gz[m]
                        })
                        .sum()
                })
                .collect();
            for n in 0..=max_order {
                let v = if c.odd {
                    x * g[n] + if n > 0 { n as f64 * g[n - 1] } else { 0.0 }
                } else {
                    g[n]
                };
                out[n] += c.coeff * v;
            }
        }
        Ok(out)
    }

    /// The reduced derivatives of [`reduced_derivs`](Self::reduced_derivs)
    /// in double-double arithmetic, without the factor `e^{-x²}` that every
    /// seed shares: entry n is `e^{x²} v^(n)(x)`. Needs x² ≤ 600.
    ///
    /// v and v′ come from ₁F₁(a, b; x²) and ₁F₁(a, b + 1; x²); higher orders
    /// from the differentiated reduced equation
    /// `v^(n+2) = -2x v^(n+1) - (2n + 1 + 2ε) v^(n)`. Each step cancels about
    /// a factor 2x²/n, which the extended precision absorbs. The energy in the
    /// recurrence is the one implied by the rounded `a`, so that every order
    /// describes the same function.
    pub(crate) fn reduced_derivs_dd(&self, x: f64, max_order: usize) -> Result<Vec<TwoFloat>> {
        self.check_epsilon()?;
        if !(x >= 0.0) {
            return Err(Error::Domain(format!(
                "reduced derivatives need x >= 0, got {x}"
            )));
        }
        // x² exactly, so that every derivative order sees the same point
        let z = TwoFloat::from(x) * x;
        let zero = TwoFloat::from(0.0);
        let mut out = vec![zero; max_order + 1];
        for c in self.components() {
            let family = series_dd_family(c.a, c.b, z, 2)?;
            // e^z G and e^z G′ with G(z) = e^{-z} ₁F₁(a, b; z)
            let g0 = family[0];
            let g1 = -(TwoFloat::new_sub(c.b, c.a) / c.b) * family[1];
            let (two_eps, mut d) = if c.odd {
                // 2ε = 3 - 4a
                (
                    TwoFloat::new_sub(3.0, 4.0 * c.a),
                    vec![g0 * x, g0 + z * g1 * 2.0],
                )
            } else {
                // 2ε = 1 - 4a
                (TwoFloat::new_sub(1.0, 4.0 * c.a), vec![g0, g1 * (2.0 * x)])
            };
            for n in 0..max_order.saturating_sub(1) {
                let next = -(d[n + 1] * (2.0 * x)) - d[n] * (two_eps + (2 * n + 1) as f64);
                d.push(next);
            }
            for (o, v) in out.iter_mut().zip(&d) {
                *o += *v * c.coeff;
            }
        }
        Ok(out)
    }
}

/// `n! / ((n-m)! (2m-n)!)`, the weight of `(2x)^{2m-n} G^(m)` in `d^n/dx^n G(x²)`.
fn faa_di_bruno_coeff(n: usize, m: usize) -> f64 {
    fn fact(k: usize) -> f64 {
        (1..=k).map(|i| i as f64).product()
    }
    fact(n) / (fact(n - m) * fact(2 * m - n))
}

pub fn make_seed(epsilon: f64, parity: Parity) -> SeedSolution {
    SeedSolution::new(epsilon, parity)
}

pub fn seed_value(u: &SeedSolution, x: f64) -> Result<f64> {
    u.value(x)
}

pub fn seed_derivs(u: &SeedSolution, x: f64, max_order: usize) -> Result<Vec<f64>> {
    u.derivs(x, max_order)
}
