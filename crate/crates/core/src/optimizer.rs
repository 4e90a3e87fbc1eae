//! Constrained search for the optimal order quantities.
//!
//! The profit rate is submodular in `(Q1, Q2)`: stocking more of one
//! product makes marginal units of the other less valuable, because
//! substitution already covers part of its shortfall. Submodularity
//! makes the best response `Q2*(Q1)` nonincreasing, so the search can
//! shrink the `Q2` window as `Q1` grows instead of scanning the whole
//! feasible triangle. [`optimize_bruteforce`] keeps the full scan as the
//! reference implementation.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::model::{CapacityConstraint, DemandModel, EconomicParams, Policy, ReplenishmentRegime};
use crate::profit::profit_rate;

/// Relative slack under which two profit values count as tied.
///
/// Distribution truncation noise sits far below this; the index tie
/// rules (largest `Q2`, then smallest `Q1`) are applied on top. The
/// threshold itself is a pragmatic choice, not a derived quantity.
pub const PROFIT_TIE_REL: f64 = 1e-9;

/// `true` when `a` and `b` are within profit-comparison slack.
pub fn profits_tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= PROFIT_TIE_REL * f64::max(1.0, f64::max(a.abs(), b.abs()))
}

/// A complete optimization instance.
#[derive(Debug, Clone, Copy)]
pub struct Instance {
    pub demand: DemandModel,
    pub econ: EconomicParams,
    pub constraint: CapacityConstraint,
    pub regime: ReplenishmentRegime,
    /// Truncation tolerance forwarded to the profit evaluations.
    pub tol: f64,
}

/// Which search produced an [`OptimizationResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    Monotone,
    BruteForce,
}

/// Outcome of an optimization run.
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best: Policy,
    pub best_rate: f64,
    /// Best response `Q1 -> Q2*(Q1)` over the scanned columns.
    pub q2_star_profile: BTreeMap<u32, u32>,
    /// Number of distinct profit evaluations performed.
    pub evaluations: usize,
    pub method: SearchMethod,
}

/// Profit evaluations memoized per optimization run.
struct ProfitMemo<'a> {
    instance: &'a Instance,
    cache: HashMap<Policy, f64>,
}

impl<'a> ProfitMemo<'a> {
    fn new(instance: &'a Instance) -> Self {
        Self {
            instance,
            cache: HashMap::new(),
        }
    }

    fn rate(&mut self, q1: u32, q2: u32) -> Result<f64> {
        let key = Policy::new(q1, q2);
        if let Some(&rate) = self.cache.get(&key) {
            return Ok(rate);
        }
        let rate = profit_rate(
            key,
            &self.instance.econ,
            &self.instance.demand,
            &self.instance.regime,
            self.instance.tol,
        )?
        .rate;
        self.cache.insert(key, rate);
        Ok(rate)
    }

    fn evaluations(&self) -> usize {
        self.cache.len()
    }
}

/// Largest maximizer of `Q2 -> profit(q1, Q2)` over `{0..=upper}`.
///
/// Scans downward so the largest index within tie slack of the maximum
/// is kept.
fn q2_star_memo(memo: &mut ProfitMemo<'_>, q1: u32, upper: u32) -> Result<(u32, f64)> {
    let mut best_q2 = upper;
    let mut best = memo.rate(q1, upper)?;
    for q2 in (0..upper).rev() {
        let rate = memo.rate(q1, q2)?;
        if rate > best && !profits_tied(rate, best) {
            best = rate;
            best_q2 = q2;
        }
    }
    Ok((best_q2, best))
}

/// Largest maximizer of the profit over `Q2 in {0..=upper}` at fixed
/// `q1`, with ties resolved upward.
pub fn q2_star(instance: &Instance, q1: u32, upper: u32) -> Result<u32> {
    let mut memo = ProfitMemo::new(instance);
    Ok(q2_star_memo(&mut memo, q1, upper)?.0)
}

/// Best-response search: scans `Q1` upward while shrinking the `Q2`
/// window to `min(Q2*(Q1-1), floor((C - a1*Q1)/a2))`.
///
/// Requires both constraint weights positive so the region is finite.
pub fn optimize_monotone(instance: &Instance) -> Result<OptimizationResult> {
    let constraint = &instance.constraint;
    if constraint.a1() == 0.0 || constraint.a2() == 0.0 {
        return Err(Error::UnboundedRegion(
            "a zero weight leaves the corresponding quantity unbounded",
        ));
    }
    let mut memo = ProfitMemo::new(instance);
    let mut profile = BTreeMap::new();

    let q1_max = constraint.max_q1()?;
    let mut window = constraint.max_q2_given(0)?;
    let (mut best_q, mut best_rate) = {
        let (q2, rate) = q2_star_memo(&mut memo, 0, window)?;
        profile.insert(0, q2);
        window = q2;
        (Policy::new(0, q2), rate)
    };
    for q1 in 1..=q1_max {
        let upper = window.min(constraint.max_q2_given(q1)?);
        let (q2, rate) = q2_star_memo(&mut memo, q1, upper)?;
        profile.insert(q1, q2);
        window = q2;
        if rate > best_rate && !profits_tied(rate, best_rate) {
            best_rate = rate;
            best_q = Policy::new(q1, q2);
        }
    }
    Ok(OptimizationResult {
        best: best_q,
        best_rate,
        q2_star_profile: profile,
        evaluations: memo.evaluations(),
        method: SearchMethod::Monotone,
    })
}

/// Full scan over the feasible region; the reference the monotone
/// search is checked against.
///
/// Runs the same column scan and tie rules as [`optimize_monotone`]
/// but with every column's window at its full capacity bound, so the
/// two can disagree only where the shrunken windows would matter.
pub fn optimize_bruteforce(instance: &Instance) -> Result<OptimizationResult> {
    let constraint = &instance.constraint;
    if constraint.a1() == 0.0 || constraint.a2() == 0.0 {
        return Err(Error::UnboundedRegion(
            "a zero weight leaves the corresponding quantity unbounded",
        ));
    }
    let mut memo = ProfitMemo::new(instance);
    let mut profile = BTreeMap::new();
    let mut best_q = Policy::new(0, 0);
    let mut best_rate = f64::NEG_INFINITY;
    for q1 in 0..=constraint.max_q1()? {
        let (q2, rate) = q2_star_memo(&mut memo, q1, constraint.max_q2_given(q1)?)?;
        profile.insert(q1, q2);
        if best_rate == f64::NEG_INFINITY || (rate > best_rate && !profits_tied(rate, best_rate)) {
            best_rate = rate;
            best_q = Policy::new(q1, q2);
        }
    }
    Ok(OptimizationResult {
        best: best_q,
        best_rate,
        q2_star_profile: profile,
        evaluations: memo.evaluations(),
        method: SearchMethod::BruteForce,
    })
}

/// A point where the discrete mixed second difference of the profit is
/// positive beyond slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubmodularityViolation {
    pub q1: u32,
    pub q2: u32,
    /// Value of the mixed difference (positive means violated).
    pub excess: f64,
}

/// Evaluates the mixed second difference
/// `pi(Q1+1,Q2+1) - pi(Q1+1,Q2) - pi(Q1,Q2+1) + pi(Q1,Q2)`
/// over `{0..=qmax}^2` and reports every point exceeding `+1e-9`.
///
/// Submodularity of the profit makes the expected result empty; a
/// non-empty list indicates an implementation bug.
pub fn check_submodularity(
    demand: &DemandModel,
    econ: &EconomicParams,
    regime: &ReplenishmentRegime,
    tol: f64,
    qmax: u32,
) -> Result<Vec<SubmodularityViolation>> {
    let instance = Instance {
        demand: *demand,
        econ: *econ,
        constraint: CapacityConstraint::new(1.0, 1.0, f64::from(2 * qmax + 2))?,
        regime: *regime,
        tol,
    };
    let mut memo = ProfitMemo::new(&instance);
    let mut violations = Vec::new();
    for q1 in 0..=qmax {
        for q2 in 0..=qmax {
            let mixed =
                memo.rate(q1 + 1, q2 + 1)? - memo.rate(q1 + 1, q2)? - memo.rate(q1, q2 + 1)?
                    + memo.rate(q1, q2)?;
            if mixed > 1e-9 {
                violations.push(SubmodularityViolation {
                    q1,
                    q2,
                    excess: mixed,
                });
            }
        }
    }
    Ok(violations)
}
