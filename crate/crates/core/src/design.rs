//! Spectral design: interval classes, parity rules, singularity scans and the
//! prediction of which factorization energies become new levels.
//!
//! The real line minus the half-integers ≥ 1/2 splits into two classes of
//! open intervals,
//!
//! ```text
//! A: (-∞, 1/2), (3/2, 5/2), (7/2, 9/2), …
//! B: (1/2, 3/2), (5/2, 7/2), …
//! ```
//!
//! and a plan draws all of its factorization energies from one of them.
//! Seeds in class A carry parities `P(u_j) = (-1)^{k-j}`, seeds in class B
//! `P(u_j) = (-1)^{k-j+1}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::oracle::Grid;
use crate::partner::{normalize_samples, BaseState, Branch, PartnerPotential};
use crate::seeds::{Parity, SeedSolution};
use crate::wronskian::ReducedTable;
use crate::{Error, Result};

/// Stable identifiers of validation rules.
pub mod rules {
    pub const INTERVAL_MIXED: &str = "interval.mixed";
    pub const INTERVAL_BOUNDARY: &str = "interval.boundary";
    pub const ORDER_UNSORTED: &str = "order.unsorted";
    pub const ORDER_ODD_ABOVE_E0: &str = "order.odd-above-E0";
    pub const PARITY_MISMATCH: &str = "parity.mismatch";
    pub const WRONSKIAN_ZERO: &str = "wronskian.zero";
    pub const CANDIDATE_NONPHYSICAL: &str = "candidate.nonphysical";
    pub const CANDIDATE_NONNORMALIZABLE: &str = "candidate.nonnormalizable";

    /// Every rule in the order `validate` checks them.
    pub const ALL: [&str; 8] = [
        INTERVAL_BOUNDARY,
        INTERVAL_MIXED,
        ORDER_UNSORTED,
        ORDER_ODD_ABOVE_E0,
        PARITY_MISMATCH,
        WRONSKIAN_ZERO,
        CANDIDATE_NONPHYSICAL,
        CANDIDATE_NONNORMALIZABLE,
    ];
}

/// Width to which each Wronskian zero is bisected.
pub const ZERO_TOL: f64 = 1e-10;

/// Probe points of [`boundary_check`], approaching the origin.
pub const BOUNDARY_PROBES: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Minimum decrease of |f| per decade for [`boundary_check`] to accept
/// `f(0⁺) = 0`.
pub const DECADE_DECAY: f64 = 5.0;

/// Energy of the oscillator ground state on the half line.
const E0: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassKind {
    A,
    B,
}

/// One open interval of class A or B, counted from the left within its class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalClass {
    pub kind: ClassKind,
    pub index: usize,
}

impl IntervalClass {
    /// Open interval `(lo, hi)`; `lo` is -∞ for the first A interval.
    pub fn bounds(&self) -> (f64, f64) {
        match (self.kind, self.index) {
            (ClassKind::A, 0) => (f64::NEG_INFINITY, 0.5),
            (ClassKind::A, n) => (2.0 * n as f64 - 0.5, 2.0 * n as f64 + 0.5),
            (ClassKind::B, n) => (2.0 * n as f64 + 0.5, 2.0 * n as f64 + 1.5),
        }
    }
}

impl std::fmt::Display for IntervalClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (lo, hi) = self.bounds();
        write!(f, "{:?}{} = ({lo}, {hi})", self.kind, self.index)
    }
}

/// The interval containing `epsilon`.
pub fn classify_interval(epsilon: f64) -> Result<IntervalClass> {
    if !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "factorization energy must be finite, got {epsilon}"
        )));
    }
    if epsilon < 0.5 {
        return Ok(IntervalClass {
            kind: ClassKind::A,
            index: 0,
        });
    }
    let shifted = epsilon - 0.5;
    if shifted == shifted.floor() {
        return Err(Error::BoundaryValue(epsilon));
    }
    // epsilon ∈ (1/2 + m, 3/2 + m)
    let m = shifted.floor() as usize;
    Ok(if m.is_multiple_of(2) {
        IntervalClass {
            kind: ClassKind::B,
            index: m / 2,
        }
    } else {
        IntervalClass {
            kind: ClassKind::A,
            index: m.div_ceil(2),
        }
    })
}

/// Parities `P(u_1), …, P(u_k)` prescribed for class `kind`.
pub fn parity_assignment(k: usize, kind: ClassKind) -> Vec<Parity> {
    (1..=k)
        .map(|j| {
            let exponent = match kind {
                ClassKind::A => k - j,
                ClassKind::B => k - j + 1,
            };
            if exponent % 2 == 0 {
                Parity::Even
            } else {
                Parity::Odd
            }
        })
        .collect()
}

/// An ordered list of factorization energies with seed parities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformationPlan {
    epsilons: Vec<f64>,
    parities: Vec<Parity>,
    /// Common interval of all energies; `None` when they do not share one
    /// or one of them is an interval endpoint.
    interval: Option<IntervalClass>,
}

impl TransformationPlan {
    /// Plan with user-supplied parities. Ordering and interval membership
    /// are left to [`validate`].
    pub fn new(epsilons: Vec<f64>, parities: Vec<Parity>) -> Result<Self> {
        if epsilons.len() != parities.len() {
            return Err(Error::InvalidParameter(format!(
                "{} factorization energies but {} parities",
                epsilons.len(),
                parities.len()
            )));
        }
        if let Some(e) = epsilons.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "factorization energy must be finite, got {e}"
            )));
        }
        let interval = common_interval(&epsilons);
        Ok(Self {
            epsilons,
            parities,
            interval,
        })
    }

    /// Plan with parities from [`parity_assignment`]. When the energies do
    /// not share an interval, the class of the first one that lies inside
    /// some interval is used (class A if none does); `validate` reports the
    /// problem.
    pub fn auto(epsilons: Vec<f64>) -> Result<Self> {
        let kind = epsilons
            .iter()
            .find_map(|&e| classify_interval(e).ok())
            .map_or(ClassKind::A, |c| c.kind);
        let parities = parity_assignment(epsilons.len(), kind);
        Self::new(epsilons, parities)
    }

    pub fn order(&self) -> usize {
        self.epsilons.len()
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn parities(&self) -> &[Parity] {
        &self.parities
    }

    pub fn interval(&self) -> Option<IntervalClass> {
        self.interval
    }

    /// Definite-parity seeds with unit coefficients.
    pub fn seeds(&self) -> Vec<SeedSolution> {
        self.epsilons
            .iter()
            .zip(&self.parities)
            .map(|(&e, &p)| SeedSolution::new(e, p))
            .collect()
    }

    /// The partner potential; fails unless the energies are strictly
    /// increasing.
    pub fn partner(&self) -> Result<PartnerPotential> {
        PartnerPotential::new(self.seeds())
    }

    fn is_sorted(&self) -> bool {
        self.epsilons.windows(2).all(|w| w[0] < w[1])
    }

    fn follows_class_rule(&self) -> bool {
        self.interval
            .is_some_and(|c| self.parities == parity_assignment(self.order(), c.kind))
    }

    fn counts(&self) -> (usize, usize) {
        let evens = self.parities.iter().filter(|&&p| p == Parity::Even).count();
        (evens, self.order() - evens)
    }
}

fn common_interval(epsilons: &[f64]) -> Option<IntervalClass> {
    let first = classify_interval(*epsilons.first()?).ok()?;
    epsilons[1..]
        .iter()
        .all(|&e| classify_interval(e).ok() == Some(first))
        .then_some(first)
}

/// Order of the zero at x = 0 of a Wronskian of `evens` even and `odds` odd
/// seeds, each with nonzero leading Taylor coefficient and all energies
/// distinct. Negative values are poles.
pub fn vanishing_order(evens: usize, odds: usize) -> i64 {
    let (e, o) = (evens as i64, odds as i64);
    let k = e + o;
    e * (e - 1) + o * o - k * (k - 1) / 2
}

/// Whether removing a seed of parity `removed` from a set with `evens` even
/// and `odds` odd seeds leaves a candidate `φ = W(minor) / W` with
/// `φ(0⁺) = 0`.
pub fn candidate_vanishes_at_origin(evens: usize, odds: usize, removed: Parity) -> bool {
    let whole = vanishing_order(evens, odds);
    let minor = match removed {
        Parity::Even if evens > 0 => vanishing_order(evens - 1, odds),
        Parity::Odd if odds > 0 => vanishing_order(evens, odds - 1),
        _ => return false,
    };
    minor - whole >= 1
}

/// Branch of base states mapped onto physical states by a transform with
/// `evens` even and `odds` odd seeds: adding ψ_0 (odd) or χ_0 (even) to the
/// Wronskian must raise its vanishing order.
pub fn branch_from_counts(evens: usize, odds: usize) -> Branch {
    if odds >= evens {
        Branch::OddBase
    } else {
        Branch::EvenBase
    }
}

/// Parity bookkeeping of one candidate under a class rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CandidateParity {
    /// 1-based index of the removed seed.
    pub index: usize,
    pub seed: Parity,
    pub wronskian: Parity,
    pub minor: Parity,
    pub state: Parity,
    pub physical: bool,
}

fn sign_parity(exponent: usize) -> Parity {
    if exponent.is_multiple_of(2) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Closed-form parities of W, of each minor and of each candidate for the
/// class rule of order `k`:
///
/// ```text
/// A: P(W) = 1,       P(W_j) = (-1)^{j+1}
/// B: P(W) = (-1)^k,  P(W_j) = (-1)^{k-j}
/// ```
///
/// An even Wronskian is nonzero at the origin, so a candidate vanishes there
/// exactly when it is odd. An odd Wronskian vanishes linearly and the
/// candidate vanishes only over an odd minor.
pub fn parity_algebra(k: usize, kind: ClassKind) -> Vec<CandidateParity> {
    let seeds = parity_assignment(k, kind);
    let wronskian = match kind {
        ClassKind::A => Parity::Even,
        ClassKind::B => sign_parity(k),
    };
    (1..=k)
        .map(|j| {
            let minor = match kind {
                ClassKind::A => sign_parity(j + 1),
                ClassKind::B => sign_parity(k - j),
            };
            let state = minor.times(wronskian);
            let physical = match wronskian {
                Parity::Even => state == Parity::Odd,
                Parity::Odd => minor == Parity::Odd,
            };
            CandidateParity {
                index: j,
                seed: seeds[j - 1],
                wronskian,
                minor,
                state,
                physical,
            }
        })
        .collect()
}

/// Indices (1-based) and energies of the seeds predicted to become new
/// levels.
///
/// Plans following their class rule use the closed rules: in class A the
/// even seeds for even k and the odd seeds for odd k, in class B the even
/// seeds. Other parity patterns go through the vanishing-order count of
/// [`candidate_vanishes_at_origin`]. Plans without a common interval, and
/// plans of odd order reaching above E₀ = 3/2, predict nothing.
pub fn predict_added(plan: &TransformationPlan) -> Vec<(usize, f64)> {
    let k = plan.order();
    if k == 0 || plan.interval.is_none() {
        return Vec::new();
    }
    if k % 2 == 1 && plan.epsilons.iter().any(|&e| e > E0) {
        return Vec::new();
    }
    let kind = plan.interval.map(|c| c.kind).unwrap_or(ClassKind::A);
    let (evens, odds) = plan.counts();
    let keep = |p: Parity| -> bool {
        if plan.follows_class_rule() {
            match (kind, k % 2) {
                (ClassKind::A, 1) => p == Parity::Odd,
                _ => p == Parity::Even,
            }
        } else {
            candidate_vanishes_at_origin(evens, odds, p)
        }
    };
    plan.parities
        .iter()
        .enumerate()
        .filter(|(_, &p)| keep(p))
        .map(|(i, _)| (i + 1, plan.epsilons[i]))
        .collect()
}

/// Relative size below which a sampled determinant is treated as roundoff.
fn sign_threshold(k: usize) -> f64 {
    1e3 * k as f64 * f64::EPSILON
}

/// Sign of W(u_1, …, u_k) at x, or `None` when roundoff dominates.
fn wronskian_sign(seeds: &[SeedSolution], x: f64) -> Result<Option<f64>> {
    let k = seeds.len();
    let t = ReducedTable::new(seeds, x, k - 1)?;
    let cols: Vec<usize> = (0..k).collect();
    let (det, bound) = t.wronskian_with_bound(&cols);
    Ok((det.is_finite() && det.abs() > sign_threshold(k) * bound).then(|| det.signum()))
}

/// Normalization outcome for each listed candidate. A failed evaluation
/// fails every candidate, since they share the Wronskian.
fn normalize_candidates(partner: &PartnerPotential, js: &[usize], grid: &Grid) -> Vec<Result<f64>> {
    if js.is_empty() {
        return Vec::new();
    }
    let rows = (0..=grid.n() + 1)
        .into_par_iter()
        .map(|i| partner.added_states(js, grid.point(i)))
        .collect::<Result<Vec<Vec<f64>>>>();
    match rows {
        Ok(rows) => (0..js.len())
            .map(|c| {
                let column: Vec<f64> = rows.iter().map(|r| r[c]).collect();
                normalize_samples(&column, grid)
            })
            .collect(),
        Err(e) => js.iter().map(|_| Err(e.clone())).collect(),
    }
}

/// Zeros of W(u_1, …, u_k) on the grid nodes' span.
///
/// Signs are sampled at every node in parallel; each sign change between
/// consecutive reliable samples is bisected to [`ZERO_TOL`]. Nodes where the
/// determinant is below its roundoff level (deep zeros at the origin) are
/// skipped.
pub fn scan_singularities(plan: &TransformationPlan, grid: &Grid) -> Result<Vec<f64>> {
    let seeds = plan.seeds();
    if seeds.is_empty() {
        return Ok(Vec::new());
    }
    let nodes: Vec<f64> = grid.nodes().collect();
    let signs = nodes
        .par_iter()
        .map(|&x| wronskian_sign(&seeds, x))
        .collect::<Result<Vec<_>>>()?;
    let mut brackets = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (&x, s) in nodes.iter().zip(&signs) {
        if let Some(s) = *s {
            if let Some((xl, sl)) = last {
                if sl != s {
                    brackets.push((xl, x, sl));
                }
            }
            last = Some((x, s));
        }
    }
    brackets
        .into_par_iter()
        .map(|(mut a, mut b, sa)| {
            while b - a > ZERO_TOL {
                let mid = 0.5 * (a + b);
                match wronskian_sign(&seeds, mid)? {
                    Some(s) if s == sa => a = mid,
                    Some(_) => b = mid,
                    None => return Ok(mid),
                }
            }
            Ok(0.5 * (a + b))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryClass {
    Physical,
    Nonphysical,
}

/// Behavioral test of `f(0⁺) = 0`: |f| must fall by at least
/// [`DECADE_DECAY`] per decade across [`BOUNDARY_PROBES`]. The hint only
/// decides a function that vanishes identically at every probe.
pub fn boundary_check<F>(f: F, parity_hint: Parity) -> Result<BoundaryClass>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut vals = [0.0; 3];
    for (v, &x) in vals.iter_mut().zip(&BOUNDARY_PROBES) {
        *v = f(x)?.abs();
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Ok(BoundaryClass::Nonphysical);
    }
    if vals.iter().all(|&v| v == 0.0) {
        return Ok(match parity_hint {
            Parity::Odd => BoundaryClass::Physical,
            Parity::Even => BoundaryClass::Nonphysical,
        });
    }
    let decays = vals.windows(2).all(|w| w[1] * DECADE_DECAY <= w[0]);
    Ok(if decays {
        BoundaryClass::Physical
    } else {
        BoundaryClass::Nonphysical
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AddedLevel {
    pub index: usize,
    pub epsilon: f64,
}

/// Behavioral verdict on one candidate added state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub index: usize,
    pub epsilon: f64,
    pub predicted: bool,
    pub boundary: Option<BoundaryClass>,
    pub normalizable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub predicted_added: Vec<AddedLevel>,
    pub predicted_isospectral_branch: Branch,
    pub wronskian_zeros: Vec<f64>,
    pub candidates: Vec<Candidate>,
    /// Rules that could not be evaluated (the numerical checks of a plan
    /// whose energies are not strictly increasing).
    pub skipped: Vec<&'static str>,
}

impl ValidationReport {
    pub fn has_violation(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

/// [`validate_on`] with the default grid.
pub fn validate(plan: &TransformationPlan) -> Result<ValidationReport> {
    validate_on(plan, &Grid::default())
}

/// Run every design rule on `plan`. Rule failures become report entries;
/// only numerical failures of the kernels are returned as errors.
pub fn validate_on(plan: &TransformationPlan, grid: &Grid) -> Result<ValidationReport> {
    let mut violations = Vec::new();
    let mut push =
        |rule: &'static str, message: String| violations.push(Violation { rule, message });
    let k = plan.order();
    let (evens, odds) = plan.counts();

    let classes: Vec<_> = plan
        .epsilons
        .iter()
        .map(|&e| classify_interval(e))
        .collect();
    for (j, c) in classes.iter().enumerate() {
        if let Err(Error::BoundaryValue(e)) = c {
            push(
                rules::INTERVAL_BOUNDARY,
                format!("ε_{} = {e} is an interval endpoint", j + 1),
            );
        }
    }
    let inside: Vec<IntervalClass> = classes
        .iter()
        .filter_map(|c| c.as_ref().ok().copied())
        .collect();
    if inside.windows(2).any(|w| w[0] != w[1]) {
        let names: Vec<String> = inside.iter().map(ToString::to_string).collect();
        push(
            rules::INTERVAL_MIXED,
            format!(
                "energies are spread over several intervals: {}",
                names.join(", ")
            ),
        );
    }
    let sorted = plan.is_sorted();
    if !sorted {
        push(
            rules::ORDER_UNSORTED,
            "factorization energies are not strictly increasing".into(),
        );
    }
    if k % 2 == 1 && plan.epsilons.iter().any(|&e| e > E0) {
        push(
            rules::ORDER_ODD_ABOVE_E0,
            format!("order {k} is odd but energies exceed E0 = 3/2"),
        );
    }
    if let Some(c) = plan.interval {
        let expected = parity_assignment(k, c.kind);
        if plan.parities != expected {
            let show = |ps: &[Parity]| {
                ps.iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            };
            push(
                rules::PARITY_MISMATCH,
                format!(
                    "class {:?} expects parities ({}), plan has ({})",
                    c.kind,
                    show(&expected),
                    show(&plan.parities)
                ),
            );
        }
    }

    let rule_added = predict_added(plan);
    let mut wronskian_zeros = Vec::new();
    let mut candidates: Vec<Candidate> = (1..=k)
        .map(|j| Candidate {
            index: j,
            epsilon: plan.epsilons[j - 1],
            predicted: rule_added.iter().any(|&(i, _)| i == j),
            boundary: None,
            normalizable: None,
        })
        .collect();
    let mut branch = branch_from_counts(evens, odds);
    let mut skipped = Vec::new();

    if !sorted {
        skipped.extend([
            rules::WRONSKIAN_ZERO,
            rules::CANDIDATE_NONPHYSICAL,
            rules::CANDIDATE_NONNORMALIZABLE,
        ]);
    } else {
        let partner = plan.partner()?;
        wronskian_zeros = scan_singularities(plan, grid)?;
        if !wronskian_zeros.is_empty() {
            let shown: Vec<String> = wronskian_zeros.iter().map(|z| format!("{z:.10}")).collect();
            push(
                rules::WRONSKIAN_ZERO,
                format!("Wronskian vanishes at x = {}", shown.join(", ")),
            );
        }
        branch = empirical_branch(&partner).unwrap_or(branch);
        for c in &mut candidates {
            let seed_parity = plan.parities[c.index - 1];
            let hint = candidate_parity(evens, odds, seed_parity).unwrap_or(Parity::Even);
            let verdict = boundary_check(|x| partner.added_state(c.index, x), hint)
                .unwrap_or(BoundaryClass::Nonphysical);
            c.boundary = Some(verdict);
            if c.predicted && verdict == BoundaryClass::Nonphysical {
                push(
                    rules::CANDIDATE_NONPHYSICAL,
                    format!("φ_{} does not vanish at the origin", c.index),
                );
            }
        }
        // predicted candidates are sampled together, one table per node
        let predicted: Vec<usize> = candidates
            .iter()
            .filter(|c| c.predicted)
            .map(|c| c.index)
            .collect();
        let norms = normalize_candidates(&partner, &predicted, grid);
        for (c, norm) in candidates.iter_mut().filter(|c| c.predicted).zip(norms) {
            c.normalizable = Some(norm.is_ok());
            if let Err(e) = norm {
                push(
                    rules::CANDIDATE_NONNORMALIZABLE,
                    format!("φ_{}: {e}", c.index),
                );
            }
        }
    }

    let predicted_added = candidates
        .iter()
        .filter(|c| {
            c.predicted
                && c.boundary != Some(BoundaryClass::Nonphysical)
                && c.normalizable != Some(false)
        })
        .map(|c| AddedLevel {
            index: c.index,
            epsilon: c.epsilon,
        })
        .collect();
    Ok(ValidationReport {
        ok: violations.is_empty() && wronskian_zeros.is_empty(),
        violations,
        predicted_added,
        predicted_isospectral_branch: branch,
        wronskian_zeros,
        candidates,
        skipped,
    })
}

/// Parity of `φ_j = W(minor) / W` on the full line when seed j of the given
/// parity is removed.
fn candidate_parity(evens: usize, odds: usize, removed: Parity) -> Option<Parity> {
    let wronskian_parity = |e: usize, o: usize| {
        let k = e + o;
        sign_parity(o + k * k.saturating_sub(1) / 2)
    };
    let (e, o) = match removed {
        Parity::Even => (evens.checked_sub(1)?, odds),
        Parity::Odd => (evens, odds.checked_sub(1)?),
    };
    Some(wronskian_parity(e, o).times(wronskian_parity(evens, odds)))
}

/// The branch whose transformed ground state passes [`boundary_check`],
/// if exactly one does.
fn empirical_branch(partner: &PartnerPotential) -> Option<Branch> {
    let passes = |branch: Branch, hint: Parity| {
        let s = BaseState::new(branch, 0);
        boundary_check(|x| partner.transformed_eigenfunction(&s, x), hint)
            .is_ok_and(|c| c == BoundaryClass::Physical)
    };
    match (
        passes(Branch::OddBase, Parity::Odd),
        passes(Branch::EvenBase, Parity::Even),
    ) {
        (true, false) => Some(Branch::OddBase),
        (false, true) => Some(Branch::EvenBase),
        _ => None,
    }
}
