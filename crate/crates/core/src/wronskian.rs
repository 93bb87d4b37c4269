//! Wronskians of seed sets and their logarithmic derivatives.
//!
//! Every generic seed grows like `e^{x²/2}` times a power of x, and so do all
//! of its derivatives. Evaluated directly, the Wronskian is the tiny residue
//! of a cancellation among entries that share that growth. The kernels here
//! work instead with the reduced functions `v_j = e^{-x²/2} u_j`, using
//!
//! ```text
//! W(u_1, …, u_k) = e^{k x²/2} W(v_1, …, v_k)
//! (ln W(u))″    = k + (ln W(v))″
//! ```
//!
//! The Gaussian bookkeeping is exact. What remains is the conditioning of
//! the reduced matrix itself: at large x every v_j behaves like
//! `x^{-ε_j-1/2}`, so seeds with nearby energies give nearly parallel
//! columns and the determinant loses digits in proportion. Reduced entries
//! and their LU factorization are therefore carried in double-double
//! arithmetic. Columns are equilibrated before factorization so that ratios
//! of determinants sharing the same columns never overflow.

use twofloat::TwoFloat;

use crate::kummer::MAX_DD_ARGUMENT;
use crate::seeds::SeedSolution;
use crate::{Error, Result};

/// Matrix with entry (i, j) = `u_j^(orders[i])(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeMatrix {
    orders: Vec<usize>,
    entries: Vec<f64>,
}

impl DerivativeMatrix {
    /// Plain (unreduced) derivative matrix of `seeds` at x > 0.
    pub fn new(seeds: &[SeedSolution], orders: &[usize], x: f64) -> Result<Self> {
        check_x(x)?;
        if orders.len() != seeds.len() {
            return Err(Error::InvalidParameter(format!(
                "{} derivative orders for {} seeds",
                orders.len(),
                seeds.len()
            )));
        }
        if orders.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "derivative orders {orders:?} are not strictly increasing"
            )));
        }
        let k = seeds.len();
        let top = orders.last().copied().unwrap_or(0);
        let mut entries = vec![0.0; k * k];
        for (j, u) in seeds.iter().enumerate() {
            let d = u.derivs(x, top)?;
            for (i, &o) in orders.iter().enumerate() {
                entries[i * k + j] = d[o];
            }
        }
        Ok(Self {
            orders: orders.to_vec(),
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim() + col]
    }

    /// Determinant by LU with partial pivoting after column equilibration.
    pub fn determinant(&self) -> f64 {
        let k = self.dim();
        let mut a: Vec<TwoFloat> = self.entries.iter().map(|&v| TwoFloat::from(v)).collect();
        let mut scale = 1.0;
        for j in 0..k {
            let c = (0..k).map(|i| a[i * k + j].hi().abs()).fold(0.0, f64::max);
            if c > 0.0 {
                for i in 0..k {
                    a[i * k + j] /= c;
                }
                scale *= c;
            }
        }
        f64::from(lu_det(&mut a, k)) * scale
    }
}

fn check_x(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Wronskians need x > 0, got {x}")))
    }
}

/// Ratio `|W| / Π‖row‖₂` below which a Wronskian counts as zero.
const SINGULAR_RATIO: f64 = 1e-28;

/// Double-double quotient by two correction steps. `TwoFloat`'s own
/// double-double division keeps only f64 accuracy, which would undo the
/// point of the extended entries.
fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

/// Determinant of the row-major n×n matrix `a`, destroyed in the process.
fn lu_det(a: &mut [TwoFloat], n: usize) -> TwoFloat {
    let mut det = TwoFloat::from(1.0);
    for col in 0..n {
        let (piv, pmax) =
            (col..n)
                .map(|r| (r, a[r * n + col].hi().abs()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pmax == 0.0 {
            return TwoFloat::from(0.0);
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = div(a[r * n + col], p);
            if f.hi() != 0.0 {
                for c in col + 1..n {
                    let sub = f * a[col * n + c];
                    a[r * n + c] -= sub;
                }
            }
        }
    }
    det
}

/// Reduced derivatives `v_j^(o)(x)` for a set of functions, columns scaled to
/// unit max-norm. A determinant over rows R and columns C equals
/// `det_scaled(R, C) · Π_{j∈C} scale[j]`.
#[derive(Debug, Clone)]
pub(crate) struct ReducedTable {
    x: f64,
    /// `cols[j][o]`
    cols: Vec<Vec<TwoFloat>>,
    scale: Vec<f64>,
}

impl ReducedTable {
    pub(crate) fn new<'a, I>(funcs: I, x: f64, max_order: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a SeedSolution>,
    {
        let z = x * x;
        let mut cols = Vec::new();
        let mut scale = Vec::new();
        for u in funcs {
            // beyond the double-double range the f64 entries are used as is
            let (d, gauss) = if z <= MAX_DD_ARGUMENT {
                (u.reduced_derivs_dd(x, max_order)?, (-z).exp())
            } else {
                let d = u.reduced_derivs(x, max_order)?;
                (d.into_iter().map(TwoFloat::from).collect::<Vec<_>>(), 1.0)
            };
            let c = d.iter().fold(0.0_f64, |m, v| m.max(v.hi().abs()));
            let c = if c > 0.0 && c.is_finite() { c } else { 1.0 };
            cols.push(d.into_iter().map(|v| v / c).collect());
            scale.push(c * gauss);
        }
        Ok(Self { x, cols, scale })
    }

    pub(crate) fn scale(&self, j: usize) -> f64 {
        self.scale[j]
    }

    fn det_scaled_dd(&self, rows: &[usize], cols: &[usize]) -> TwoFloat {
        let n = rows.len();
        debug_assert_eq!(n, cols.len());
        if n == 0 {
            return TwoFloat::from(1.0);
        }
        let mut a = Vec::with_capacity(n * n);
        for &o in rows {
            for &j in cols {
                a.push(self.cols[j][o]);
            }
        }
        lu_det(&mut a, n)
    }

    pub(crate) fn det_scaled(&self, rows: &[usize], cols: &[usize]) -> f64 {
        f64::from(self.det_scaled_dd(rows, cols))
    }

    /// Scaled plain Wronskian of the given columns.
    pub(crate) fn wronskian_scaled(&self, cols: &[usize]) -> f64 {
        let rows: Vec<usize> = (0..cols.len()).collect();
        self.det_scaled(&rows, cols)
    }

    /// Scaled Wronskian together with the Hadamard bound `Π_i ‖row_i‖₂` of
    /// its matrix. When the ratio of the two approaches the unit roundoff the
    /// sign of the determinant carries no information.
    pub(crate) fn wronskian_with_bound(&self, cols: &[usize]) -> (f64, f64) {
        (self.wronskian_scaled(cols), self.hadamard_bound(cols))
    }

    fn hadamard_bound(&self, cols: &[usize]) -> f64 {
        (0..cols.len())
            .map(|o| {
                cols.iter()
                    .map(|&j| self.cols[j][o].hi().powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .product()
    }

    /// `(ln |W(v_cols)|)″` from the analytic determinant identities
    /// `W′ = det(0..k-2, k)` and `W″ = det(0..k-3, k-1, k) + det(0..k-2, k+1)`.
    pub(crate) fn log_second_deriv(&self, cols: &[usize]) -> Result<f64> {
        let k = cols.len();
        if k == 0 {
            return Ok(0.0);
        }
        let w = self.nonzero_wronskian_dd(cols)?;
        let base: Vec<usize> = (0..k - 1).collect();
        let with = |tail: &[usize]| -> Vec<usize> {
            let mut r = base.clone();
            r.extend_from_slice(tail);
            r
        };
        let w1 = self.det_scaled_dd(&with(&[k]), cols);
        let mut w2 = self.det_scaled_dd(&with(&[k + 1]), cols);
        if k >= 2 {
            let mut r: Vec<usize> = (0..k - 2).collect();
            r.extend_from_slice(&[k - 1, k]);
            w2 += self.det_scaled_dd(&r, cols);
        }
        let d1 = div(w1, w);
        Ok(f64::from(div(w2, w) - d1 * d1))
    }

    pub(crate) fn nonzero_wronskian(&self, cols: &[usize]) -> Result<f64> {
        self.nonzero_wronskian_dd(cols).map(f64::from)
    }

    /// The scaled Wronskian, or a singularity error when it is zero at the
    /// resolution of double-double arithmetic relative to its Hadamard bound.
    fn nonzero_wronskian_dd(&self, cols: &[usize]) -> Result<TwoFloat> {
        let rows: Vec<usize> = (0..cols.len()).collect();
        let w = self.det_scaled_dd(&rows, cols);
        if w.hi().abs() <= SINGULAR_RATIO * self.hadamard_bound(cols) || !w.hi().is_finite() {
            Err(Error::Singularity { x: self.x })
        } else {
            Ok(w)
        }
    }
}

/// Determinant of `u_j^(orders[i])(x)`.
pub fn det_orders(seeds: &[SeedSolution], orders: &[usize], x: f64) -> Result<f64> {
    Ok(DerivativeMatrix::new(seeds, orders, x)?.determinant())
}

/// `W(u_1, …, u_k)(x)`; 1 for an empty set.
///
/// The value carries the factor `e^{k x²/2}` and can overflow for large
/// `k x²`; ratios should go through [`log_w_second_deriv`] or the partner
/// evaluators instead.
pub fn wronskian(seeds: &[SeedSolution], x: f64) -> Result<f64> {
    check_x(x)?;
    let k = seeds.len();
    if k == 0 {
        return Ok(1.0);
    }
    let t = ReducedTable::new(seeds, x, k - 1)?;
    let cols: Vec<usize> = (0..k).collect();
    let scale: f64 = cols.iter().map(|&j| t.scale(j)).product();
    Ok(t.wronskian_scaled(&cols) * scale * (0.5 * k as f64 * x * x).exp())
}

/// Wronskian of the seed set with the j-th seed (1-based) removed.
pub fn wronskian_minor(seeds: &[SeedSolution], j: usize, x: f64) -> Result<f64> {
    let k = seeds.len();
    if j == 0 || j > k {
        return Err(Error::Index { index: j, len: k });
    }
    let rest: Vec<SeedSolution> = seeds
        .iter()
        .enumerate()
        .filter(|(i, _)| i + 1 != j)
        .map(|(_, u)| *u)
        .collect();
    wronskian(&rest, x)
}

/// `(ln |W(u_1, …, u_k)|)″` at x > 0.
pub fn log_w_second_deriv(seeds: &[SeedSolution], x: f64) -> Result<f64> {
    check_x(x)?;
    let k = seeds.len();
    let t = ReducedTable::new(seeds, x, k + 1)?;
    let cols: Vec<usize> = (0..k).collect();
    Ok(k as f64 + t.log_second_deriv(&cols)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rel_err;
    use crate::seeds::{make_seed, Parity};

    fn gaussian_pair() -> Vec<SeedSolution> {
        vec![make_seed(1.5, Parity::Odd), make_seed(0.5, Parity::Even)]
    }

    #[test]
    fn single_seed_determinant_is_value() {
        let u = make_seed(0.37, Parity::Even);
        let x = 1.3;
        let v = u.value(x).unwrap();
        assert!(rel_err(det_orders(&[u], &[0], x).unwrap(), v) < 1e-14);
        assert!(rel_err(wronskian(&[u], x).unwrap(), v) < 1e-13);
    }

    #[test]
    fn double_double_division_is_accurate() {
        let third = TwoFloat::from(1.0) / 3.0;
        let seventh = TwoFloat::from(1.0) / 7.0;
        let err = div(third, seventh) - TwoFloat::from(7.0) / 3.0;
        assert!(err.hi().abs() < 1e-30);
    }

    #[test]
    fn gaussian_pair_wronskian() {
        let s = gaussian_pair();
        for &x in &[0.1_f64, 0.8, 2.0, 4.5] {
            let exact = -(-x * x).exp();
            assert!(rel_err(det_orders(&s, &[0, 1], x).unwrap(), exact) < 1e-13);
            assert!(rel_err(wronskian(&s, x).unwrap(), exact) < 1e-13);
            assert!((log_w_second_deriv(&s, x).unwrap() + 2.0).abs() < 1e-11);
        }
    }

    #[test]
    fn duplicate_seed_gives_zero() {
        let u = make_seed(-0.8, Parity::Odd);
        let d = det_orders(&[u, u], &[0, 1], 0.9).unwrap();
        assert!(d.abs() < 1e-12);
        assert!(wronskian(&[u, u], 0.9).unwrap().abs() < 1e-12);
        assert!(matches!(
            log_w_second_deriv(&[u, u], 0.9),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn rejects_bad_orders_and_points() {
        let s = gaussian_pair();
        assert!(det_orders(&s, &[1, 0], 1.0).is_err());
        assert!(det_orders(&s, &[0], 1.0).is_err());
        assert!(matches!(wronskian(&s, 0.0), Err(Error::Domain(_))));
        assert!(matches!(
            det_orders(&s, &[0, 1], -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn minors() {
        let s = gaussian_pair();
        let x = 1.7;
        assert_eq!(wronskian_minor(&s[..1], 1, x).unwrap(), 1.0);
        assert!(rel_err(wronskian_minor(&s, 2, x).unwrap(), s[0].value(x).unwrap()) < 1e-13);
        assert!(rel_err(wronskian_minor(&s, 1, x).unwrap(), s[1].value(x).unwrap()) < 1e-13);
        assert!(matches!(
            wronskian_minor(&s, 3, x),
            Err(Error::Index { index: 3, len: 2 })
        ));
        assert!(wronskian_minor(&s, 0, x).is_err());
    }

    #[test]
    fn first_order_log_derivatives() {
        let odd = [make_seed(1.5, Parity::Odd)];
        let even = [make_seed(0.5, Parity::Even)];
        for &x in &[0.05, 0.5, 2.0, 7.0] {
            let want = -1.0 - 1.0 / (x * x);
            assert!(rel_err(log_w_second_deriv(&odd, x).unwrap(), want) < 1e-11);
            assert!((log_w_second_deriv(&even, x).unwrap() + 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn antisymmetry_under_swap() {
        let a = make_seed(0.6, Parity::Even);
        let b = make_seed(0.9, Parity::Odd);
        let c = make_seed(1.3, Parity::Odd);
        for &x in &[0.3, 1.1, 3.0] {
            let w = wronskian(&[a, b, c], x).unwrap();
            let ws = wronskian(&[b, a, c], x).unwrap();
            assert!(rel_err(ws, -w) < 1e-12);
        }
    }

    #[test]
    fn reduced_and_plain_routes_agree() {
        let s = [
            make_seed(0.6, Parity::Even),
            make_seed(0.9, Parity::Odd),
            make_seed(1.0, Parity::Even),
            make_seed(1.3, Parity::Odd),
        ];
        for &x in &[0.4, 1.0, 2.2] {
            let plain = det_orders(&s, &[0, 1, 2, 3], x).unwrap();
            let reduced = wronskian(&s, x).unwrap();
            assert!(
                rel_err(reduced, plain) < 1e-9,
                "x={x}: {reduced} vs {plain}"
            );
        }
    }

    #[test]
    fn empty_set_conventions() {
        assert_eq!(wronskian(&[], 1.0).unwrap(), 1.0);
        assert_eq!(log_w_second_deriv(&[], 1.0).unwrap(), 0.0);
    }
}
