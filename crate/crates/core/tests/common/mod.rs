//! Reference implementations shared by the integration tests: exact
//! fixed-point ₁F₁ sums and Taylor-coefficient Wronskians over a prime field.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use susyq::seeds::Parity;

/// Rational number p/q with q > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub p: i64,
    pub q: i64,
}

impl Ratio {
    pub fn new(p: i64, q: i64) -> Self {
        assert!(q > 0);
        Self { p, q }
    }

    pub fn to_f64(self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// Fractional bits of the fixed-point accumulator.
const FRAC_BITS: u64 = 900;

/// Exact-rational-step evaluation of ₁F₁(a, b; z) in fixed point with
/// [`FRAC_BITS`] fractional bits. Returns the sum and Σ|terms| as f64.
pub fn hyp1f1_reference(a: Ratio, b: Ratio, z: Ratio) -> (f64, f64) {
    let one = BigInt::from(1) << FRAC_BITS;
    let mut term = one.clone();
    let mut sum = one.clone();
    let mut abs_sum = one.clone();
    let mut n: i64 = 0;
    loop {
        // term *= (a + n) z / ((b + n)(n + 1))
        let num = BigInt::from(a.p + n * a.q) * BigInt::from(z.p) * BigInt::from(b.q);
        let den = BigInt::from(a.q)
            * BigInt::from(z.q)
            * BigInt::from(b.p + n * b.q)
            * BigInt::from(n + 1);
        term = term * num / den;
        n += 1;
        if term.is_zero() {
            break;
        }
        sum += &term;
        abs_sum += term.abs();
        // past the peak and below the fixed-point resolution
        if n as f64 > 2.0 * z.to_f64().abs() + a.to_f64().abs() + 10.0 && term.bits() <= 1 {
            break;
        }
        assert!(n < 20_000, "reference series did not converge");
    }
    (fixed_to_f64(&sum), fixed_to_f64(&abs_sum))
}

fn fixed_to_f64(v: &BigInt) -> f64 {
    // keep 64 significant bits before converting
    let bits = v.bits();
    let shift = bits.saturating_sub(64);
    let top = (v >> shift).to_f64().unwrap();
    top * 2f64.powi(shift as i32 - FRAC_BITS as i32)
}

/// Modulus of the prime field used for exact Taylor arithmetic.
pub const P: u64 = (1 << 61) - 1;

pub fn mulm(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

pub fn addm(a: u64, b: u64) -> u64 {
    (a + b) % P
}

pub fn subm(a: u64, b: u64) -> u64 {
    (a + P - b) % P
}

pub fn powm(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a);
        }
        a = mulm(a, a);
        e >>= 1;
    }
    r
}

pub fn invm(a: u64) -> u64 {
    powm(a, P - 2)
}

pub fn from_int(v: i64) -> u64 {
    (v.rem_euclid(P as i64)) as u64
}

pub fn from_ratio(r: Ratio) -> u64 {
    mulm(from_int(r.p), invm(from_int(r.q)))
}

/// Taylor coefficients c_0..c_len of the definite-parity seed at energy ε,
/// normalized to leading coefficient 1, from
/// `(n+2)(n+1) c_{n+2} = c_{n-2} - 2ε c_n`.
pub fn seed_taylor(eps: Ratio, parity: Parity, len: usize) -> Vec<u64> {
    let mut c = vec![0u64; len + 1];
    match parity {
        Parity::Even => c[0] = 1,
        Parity::Odd => c[1] = 1,
    }
    let two_eps = mulm(2, from_ratio(eps));
    for n in 0..len.saturating_sub(1) {
        let prev = if n >= 2 { c[n - 2] } else { 0 };
        let rhs = subm(prev, mulm(two_eps, c[n]));
        c[n + 2] = mulm(rhs, invm(((n + 2) * (n + 1)) as u64));
    }
    c
}

/// Coefficients of the i-th derivative, truncated to degree `deg`.
pub fn derivative(c: &[u64], i: usize, deg: usize) -> Vec<u64> {
    (0..=deg)
        .map(|m| {
            let src = m + i;
            if src >= c.len() {
                return 0;
            }
            let falling = (m + 1..=src).fold(1u64, |acc, f| mulm(acc, f as u64));
            mulm(c[src], falling)
        })
        .collect()
}

/// Truncated product of polynomials of degree ≤ deg.
pub fn poly_mul(a: &[u64], b: &[u64], deg: usize) -> Vec<u64> {
    let mut out = vec![0u64; deg + 1];
    for (i, &x) in a.iter().enumerate().take(deg + 1) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(deg + 1 - i) {
            if y != 0 {
                out[i + j] = addm(out[i + j], mulm(x, y));
            }
        }
    }
    out
}

/// Index of the first nonzero coefficient, `None` if all vanish.
pub fn order(p: &[u64]) -> Option<usize> {
    p.iter().position(|&v| v != 0)
}

/// A function known through its Taylor coefficients and its parity.
#[derive(Debug, Clone)]
pub struct Symbol {
    pub coeffs: Vec<u64>,
    pub parity: Parity,
}

/// Result of expanding a Wronskian into signed permutation products.
#[derive(Debug, Clone)]
pub struct Expansion {
    pub poly: Vec<u64>,
    /// Common parity of every permutation product; `None` for an empty set.
    pub parity: Option<Parity>,
    pub terms: usize,
}

/// Expand `W(f_1, …, f_m) = Σ_σ sgn σ Π_i f_{σ(i)}^{(i)}` term by term,
/// truncated at degree `deg`, checking that every product has the same
/// parity.
pub fn wronskian_by_permutations(funcs: &[Symbol], deg: usize) -> Expansion {
    let m = funcs.len();
    if m == 0 {
        let mut poly = vec![0; deg + 1];
        poly[0] = 1;
        return Expansion {
            poly,
            parity: Some(Parity::Even),
            terms: 1,
        };
    }
    // derivative tables d[row][col]
    let d: Vec<Vec<Vec<u64>>> = (0..m)
        .map(|i| {
            funcs
                .iter()
                .map(|f| derivative(&f.coeffs, i, deg))
                .collect()
        })
        .collect();
    let entry_parity = |row: usize, col: usize| {
        if row.is_multiple_of(2) {
            funcs[col].parity
        } else {
            funcs[col].parity.flip()
        }
    };
    let mut poly = vec![0u64; deg + 1];
    let mut parity: Option<Parity> = None;
    let mut terms = 0;
    let mut perm: Vec<usize> = (0..m).collect();
    let mut sign_positive = true;
    // Heap's algorithm; every swap flips the sign
    let mut c = vec![0usize; m];
    let mut visit = |perm: &[usize], positive: bool| {
        let mut prod = d[0][perm[0]].clone();
        let mut par = entry_parity(0, perm[0]);
        for row in 1..m {
            prod = poly_mul(&prod, &d[row][perm[row]], deg);
            par = par.times(entry_parity(row, perm[row]));
        }
        match parity {
            None => parity = Some(par),
            Some(p) => assert_eq!(p, par, "permutation products of mixed parity"),
        }
        for (acc, v) in poly.iter_mut().zip(&prod) {
            *acc = if positive {
                addm(*acc, *v)
            } else {
                subm(*acc, *v)
            };
        }
        terms += 1;
    };
    visit(&perm, sign_positive);
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign_positive = !sign_positive;
            visit(&perm, sign_positive);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Expansion {
        poly,
        parity,
        terms,
    }
}

/// Classification of candidate j by vanishing orders at the origin:
/// physical iff `ord(W_j) - ord(W) ≥ 1`.
pub fn brute_force_physical(funcs: &[Symbol], deg: usize) -> Vec<bool> {
    let whole = wronskian_by_permutations(funcs, deg);
    let w_ord = order(&whole.poly).expect("Wronskian vanishes to the truncation degree");
    (0..funcs.len())
        .map(|j| {
            let minor: Vec<Symbol> = funcs
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, f)| f.clone())
                .collect();
            let e = wronskian_by_permutations(&minor, deg);
            match order(&e.poly) {
                Some(o) => o as i64 - w_ord as i64 >= 1,
                None => true,
            }
        })
        .collect()
}
