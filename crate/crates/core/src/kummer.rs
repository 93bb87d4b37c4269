//! Confluent hypergeometric function ₁F₁(a, b; z) (Kummer's M) for real
//! parameters.
//!
//! ```text
//! ₁F₁(a, b; z) = Σ_{n≥0} (a)_n / (b)_n · zⁿ / n!
//! ```
//!
//! For z ≥ 0 the Taylor series is summed directly with the term-ratio
//! recurrence and Neumaier compensated summation. Past the index n > -a the
//! terms all carry the same sign, so the only cancellation is among the first
//! ⌈-a⌉ terms, whose magnitude is small next to the sum whenever z is large.
//! Negative arguments are mapped to positive ones through the Kummer
//! transformation ₁F₁(a, b; z) = e^z ₁F₁(b - a, b; -z).

use twofloat::TwoFloat;

use crate::{Error, Result};

/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 10_000;

/// Relative size of the neglected tail at which the series stops.
pub const SERIES_TOL: f64 = 1e-15;

/// Largest argument accepted by the unscaled double-double series.
pub(crate) const MAX_DD_ARGUMENT: f64 = 600.0;

/// Arguments of ₁F₁(a, b; z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KummerParams {
    pub a: f64,
    pub b: f64,
    pub z: f64,
}

impl KummerParams {
    pub fn new(a: f64, b: f64, z: f64) -> Self {
        Self { a, b, z }
    }
}

fn is_nonpositive_integer(v: f64) -> bool {
    v <= 0.0 && v == v.floor()
}

fn check_params(p: &KummerParams) -> Result<()> {
    if !(p.a.is_finite() && p.b.is_finite() && p.z.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "non-finite argument in 1F1({}, {}; {})",
            p.a, p.b, p.z
        )));
    }
    if is_nonpositive_integer(p.b) {
        return Err(Error::InvalidParameter(format!(
            "lower parameter b = {} is a non-positive integer",
            p.b
        )));
    }
    Ok(())
}

/// ₁F₁(a, b; z).
pub fn kummer_m(p: KummerParams) -> Result<f64> {
    check_params(&p)?;
    // Terminating polynomials are summed directly: for a = -m and z < 0
    // every term has the same sign.
    if p.z >= 0.0 || is_nonpositive_integer(p.a) {
        series(p.a, p.b, p.z)
    } else {
        Ok(p.z.exp() * series(p.b - p.a, p.b, -p.z)?)
    }
}

/// n-th derivative of ₁F₁(a, b; z) with respect to z,
/// `(a)_n / (b)_n · ₁F₁(a + n, b + n; z)`.
pub fn kummer_m_deriv(p: KummerParams, n: u32) -> Result<f64> {
    check_params(&p)?;
    // b is not a non-positive integer, so neither is any b + i
    let mut coeff = 1.0;
    for i in 0..n {
        coeff *= (p.a + f64::from(i)) / (p.b + f64::from(i));
    }
    if coeff == 0.0 {
        return Ok(0.0);
    }
    let shift = f64::from(n);
    Ok(coeff * kummer_m(KummerParams::new(p.a + shift, p.b + shift, p.z))?)
}

/// `e^{-z} ₁F₁(a, b; z)` for z ≥ 0, i.e. ₁F₁(b - a, b; -z) evaluated without
/// the cancellation of its alternating series.
pub(crate) fn kummer_m_scaled(a: f64, b: f64, z: f64) -> Result<f64> {
    let p = KummerParams::new(a, b, z);
    check_params(&p)?;
    if z < 0.0 {
        return Err(Error::Domain(format!("scaled 1F1 needs z >= 0, got {z}")));
    }
    Ok((-z).exp() * series(a, b, z)?)
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn series(a: f64, b: f64, z: f64) -> Result<f64> {
    if z == 0.0 || a == 0.0 {
        return Ok(1.0);
    }
    let mut acc = CompensatedSum::default();
    let mut term = 1.0_f64;
    acc.add(term);
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let ratio = (a + nf) * z / ((b + nf) * (nf + 1.0));
        term *= ratio;
        if term == 0.0 {
            // exact termination (a = -m) or underflow of a vanishing tail
            return Ok(acc.value());
        }
        if !term.is_finite() {
            break;
        }
        acc.add(term);
        // Bound on every later ratio once n + 1 > -a: if a > b the ratio is
        // decreasing, otherwise it is dominated by z / (n + 2).
        let next = nf + 1.0;
        if next > -a {
            let bound = ratio.abs().max(z.abs() / (next + 1.0));
            if bound < 1.0 && term.abs() * bound / (1.0 - bound) <= SERIES_TOL * acc.value().abs() {
                return Ok(acc.value());
            }
        }
    }
    Err(Error::NonConvergence {
        a,
        b,
        z,
        terms: MAX_TERMS,
    })
}

/// `₁F₁(a, b + m; z)` for m = 0..count and z ≥ 0, summed in double-double
/// arithmetic to about 30 significant digits.
///
/// Every member's term ratio is the shared factor `(a + n) z / (n + 1)`
/// over `b + m + n`, so one pass serves the whole family. Values are
/// unscaled, so z must stay below the f64 overflow threshold of e^z.
pub(crate) fn series_dd_family(a: f64, b: f64, z: TwoFloat, count: usize) -> Result<Vec<TwoFloat>> {
    let zf = z.hi();
    check_params(&KummerParams::new(a, b, zf))?;
    if !(0.0..=MAX_DD_ARGUMENT).contains(&zf) {
        return Err(Error::Domain(format!(
            "double-double 1F1 needs 0 <= z <= {MAX_DD_ARGUMENT}, got {zf}"
        )));
    }
    let one = TwoFloat::from(1.0);
    let mut sums = vec![one; count];
    if zf == 0.0 || a == 0.0 {
        return Ok(sums);
    }
    let a_dd = TwoFloat::from(a);
    let mut terms = vec![one; count];
    let mut done = vec![false; count];
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let common = (a_dd + nf) * z / (nf + 1.0);
        if common.hi() == 0.0 {
            return Ok(sums);
        }
        for m in 0..count {
            if done[m] {
                continue;
            }
            // b + m + n is exact in f64 for the half-integer b of the seeds
            let bm = b + m as f64 + nf;
            terms[m] = terms[m] * common / bm;
            sums[m] += terms[m];
            let next = nf + 1.0;
            if next > -a {
                let ratio = (common.hi() / bm).abs();
                let bound = ratio.max(zf / (next + 1.0));
                if bound < 1.0
                    && terms[m].hi().abs() * bound / (1.0 - bound) <= 1e-32 * sums[m].hi().abs()
                {
                    done[m] = true;
                }
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(sums);
        }
    }
    Err(Error::NonConvergence {
        a,
        b,
        z: zf,
        terms: MAX_TERMS,
    })
}
