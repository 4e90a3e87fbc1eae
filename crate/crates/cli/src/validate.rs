//! The full numerical validation suite behind `substock validate`.
//!
//! Ten checks: closed forms against their independent oracles,
//! structural properties (submodularity, pathwise coupling, monotone
//! best response), Monte Carlo consistency, and the qualitative
//! behaviour of the shipped scenario sweeps. Each check reports one
//! pass/fail line; several also carry a wall-clock budget that is part
//! of the pass condition.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use substock::optimizer::{
    check_submodularity, optimize_bruteforce, optimize_monotone, Instance, OptimizationResult,
};
use substock::profit::profit_rate;
use substock::simulator::{coupled_quadruple_trace, estimate_profit, EventStream};
use substock::stationary::{balance_oracle, stationary_distribution};
use substock::transient::{transient_distribution, uniformization_oracle};
use substock::{CapacityConstraint, DemandModel, EconomicParams, Policy, ReplenishmentRegime};

use crate::config::{ConfigError, ScenarioConfig};
use crate::sweep::{run_sweep, SweepRow};

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] substock::Error),
}

/// Outcome of one validation criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub index: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:02} {:<32} {} ({}; {:.2}s)",
            self.index,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail,
            self.seconds
        )
    }
}

const Q_RANGE: std::ops::RangeInclusive<u32> = 1..=6;
const T_GRID: [f64; 4] = [0.1, 0.5, 1.0, 2.0];
const P_GRID: [f64; 3] = [0.0, 0.4, 1.0];
const LAMBDA_GRID: [(f64, f64); 2] = [(20.0, 20.0), (5.0, 15.0)];
const MU_GRID: [f64; 3] = [0.2, 1.0, 5.0];

/// The shipped scenario files, named by their critical-ratio content.
pub const SCENARIO_FILES: [&str; 3] = ["both_high.cfg", "both_low.cfg", "mixed.cfg"];

fn demand_grid() -> Vec<DemandModel> {
    let mut out = Vec::new();
    for &(l1, l2) in &LAMBDA_GRID {
        for &p12 in &P_GRID {
            for &p21 in &P_GRID {
                out.push(DemandModel::new(l1, l2, p12, p21).unwrap());
            }
        }
    }
    out
}

fn uniform(stream: &mut EventStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * stream.uniform()
}

fn criterion1_transient_equivalence() -> Result<(bool, String), ValidateError> {
    let demands = demand_grid();
    let mut cases = Vec::new();
    for d in &demands {
        for q1 in Q_RANGE {
            for q2 in Q_RANGE {
                for &t in &T_GRID {
                    cases.push((*d, q1, q2, t));
                }
            }
        }
    }
    let worst = cases
        .par_iter()
        .map(|&(d, q1, q2, t)| -> Result<f64, ValidateError> {
            let closed = transient_distribution(q1, q2, t, &d, 1e-12)?;
            let oracle = uniformization_oracle(q1, q2, t, &d, 1e-12)?;
            Ok(closed.max_abs_diff(&oracle))
        })
        .try_reduce(|| 0.0f64, |a, b| Ok(a.max(b)))?;
    Ok((
        worst <= 1e-9,
        format!(
            "max |closed - oracle| = {worst:.3e} over {} cases",
            cases.len()
        ),
    ))
}

fn criterion2_stationary_equivalence() -> Result<(bool, String), ValidateError> {
    let demands = demand_grid();
    let mut cases = Vec::new();
    for d in &demands {
        for &mu in &MU_GRID {
            for q1 in Q_RANGE {
                for q2 in Q_RANGE {
                    cases.push((*d, mu, q1, q2));
                }
            }
        }
    }
    let worst = cases
        .par_iter()
        .map(|&(d, mu, q1, q2)| -> Result<f64, ValidateError> {
            let closed = stationary_distribution(q1, q2, &d, mu)?;
            let oracle = balance_oracle(q1, q2, &d, mu)?;
            Ok(closed.max_abs_diff(&oracle))
        })
        .try_reduce(|| 0.0f64, |a, b| Ok(a.max(b)))?;
    Ok((
        worst <= 1e-10,
        format!(
            "max |closed - solve| = {worst:.3e} over {} cases",
            cases.len()
        ),
    ))
}

fn criterion3_corner_value() -> Result<(bool, String), ValidateError> {
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for d in demand_grid() {
        let s = d.rates().s;
        for &mu in &MU_GRID {
            for q1 in Q_RANGE {
                for q2 in Q_RANGE {
                    let pi = stationary_distribution(q1, q2, &d, mu)?;
                    worst = worst.max((pi.prob(q1, q2) - mu / (s + mu)).abs());
                    count += 1;
                }
            }
        }
    }
    Ok((
        worst <= 1e-12,
        format!("max |corner - mu/(s+mu)| = {worst:.3e} over {count} cases"),
    ))
}

fn criterion4_independence_reduction() -> Result<(bool, String), ValidateError> {
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for &(l1, l2) in &LAMBDA_GRID {
        let d = DemandModel::new(l1, l2, 0.0, 0.0).unwrap();
        for q1 in Q_RANGE {
            for q2 in Q_RANGE {
                for &t in &T_GRID {
                    let dist = transient_distribution(q1, q2, t, &d, 1e-13)?;
                    for (marginal, q, lambda) in
                        [(dist.marginal1(), q1, l1), (dist.marginal2(), q2, l2)]
                    {
                        // Independent Poisson leftover law by recurrence.
                        let mean = lambda * t;
                        let mut pmf = vec![(-mean).exp()];
                        for k in 1..=q as usize {
                            let prev = pmf[k - 1];
                            pmf.push(prev * mean / k as f64);
                        }
                        for j in 1..=q as usize {
                            worst = worst.max((marginal[j] - pmf[q as usize - j]).abs());
                        }
                        let tail = 1.0 - pmf[..q as usize].iter().sum::<f64>();
                        worst = worst.max((marginal[0] - tail).abs());
                    }
                    count += 1;
                }
            }
        }
    }
    Ok((
        worst <= 1e-10,
        format!("max marginal deviation = {worst:.3e} over {count} grids"),
    ))
}

/// Random but seed-fixed parameter set used by criteria 5 and 8.
fn random_set(stream: &mut EventStream, lambda_hi: f64) -> (DemandModel, EconomicParams) {
    let demand = DemandModel::new(
        uniform(stream, 0.8, lambda_hi),
        uniform(stream, 0.8, lambda_hi),
        uniform(stream, 0.0, 1.0),
        uniform(stream, 0.0, 1.0),
    )
    .unwrap();
    let r1 = uniform(stream, 20.0, 60.0);
    let r2 = uniform(stream, 8.0, 30.0);
    let econ = EconomicParams::new(
        r1,
        uniform(stream, 0.15 * r1, 0.8 * r1),
        uniform(stream, 0.0, 3.0),
        r2,
        uniform(stream, 0.15 * r2, 0.8 * r2),
        uniform(stream, 0.0, 3.0),
    )
    .unwrap();
    (demand, econ)
}

struct SubmodularityOutcome {
    runs: Vec<OptimizationResult>,
}

fn criterion5_submodularity() -> Result<(SubmodularityOutcome, bool, String), ValidateError> {
    let mut stream = EventStream::from_seed(0x5ce1);
    let mut sets = Vec::new();
    for _ in 0..20 {
        let (demand, econ) = random_set(&mut stream, 20.0);
        let mu = uniform(&mut stream, 0.5, 2.0);
        sets.push((demand, econ, mu));
    }
    let results: Vec<Result<(usize, Vec<OptimizationResult>), ValidateError>> = sets
        .par_iter()
        .map(
            |&(demand, econ, mu)| -> Result<(usize, Vec<OptimizationResult>), ValidateError> {
                let mut violations = 0usize;
                let mut runs = Vec::new();
                for regime in [
                    ReplenishmentRegime::fixed(1.0).unwrap(),
                    ReplenishmentRegime::exponential(mu).unwrap(),
                ] {
                    violations += check_submodularity(&demand, &econ, &regime, 1e-12, 15)?.len();
                    let instance = Instance {
                        demand,
                        econ,
                        constraint: CapacityConstraint::new(1.0, 1.0, 15.0).unwrap(),
                        regime,
                        tol: 1e-12,
                    };
                    runs.push(optimize_monotone(&instance)?);
                }
                Ok((violations, runs))
            },
        )
        .collect();
    let mut violations = 0usize;
    let mut runs = Vec::new();
    for r in results {
        let (v, mut rs) = r?;
        violations += v;
        runs.append(&mut rs);
    }
    let passed = violations == 0;
    let detail = format!(
        "{violations} mixed-difference violations over 20 parameter sets x 16x16 grid x 2 regimes"
    );
    Ok((SubmodularityOutcome { runs }, passed, detail))
}

fn criterion6_coupling() -> Result<(bool, String), ValidateError> {
    let d = DemandModel::new(20.0, 20.0, 0.4, 0.4).unwrap();
    let mut violations = 0usize;
    let traces_per_regime = 10_000u64;
    for (base_seed, regime) in [
        (0xc0_01u64, ReplenishmentRegime::fixed(1.0).unwrap()),
        (0xc0_02, ReplenishmentRegime::exponential(1.0).unwrap()),
    ] {
        for rep in 0..traces_per_regime {
            let mut stream = EventStream::substream(base_seed, rep);
            let q1 = (rep % 6) as u32;
            let q2 = ((rep / 6) % 6) as u32;
            let c = coupled_quadruple_trace(q1, q2, &d, &regime, &mut stream);
            if !c.satisfies_coupling_inequality() {
                violations += 1;
            }
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations over 2 x {traces_per_regime} coupled traces"),
    ))
}

fn criterion7_monotone_profiles(runs: &[OptimizationResult]) -> (bool, String) {
    let mut bad = 0usize;
    for run in runs {
        let profile: Vec<u32> = run.q2_star_profile.values().copied().collect();
        if !profile.windows(2).all(|w| w[0] >= w[1]) {
            bad += 1;
        }
    }
    (
        bad == 0,
        format!(
            "{bad} non-monotone profiles over {} optimization runs",
            runs.len()
        ),
    )
}

struct EquivalenceOutcome {
    runs: Vec<OptimizationResult>,
}

fn criterion8_optimizer_equivalence() -> Result<(EquivalenceOutcome, bool, String), ValidateError> {
    let mut stream = EventStream::from_seed(0x8e8e);
    let mut instances = Vec::new();
    for k in 0..50usize {
        let (demand, econ) = random_set(&mut stream, 5.0);
        let a1 = uniform(&mut stream, 1.0, 3.999).floor();
        let a2 = uniform(&mut stream, 1.0, 3.999).floor();
        let cap = (uniform(&mut stream, 0.55, 1.0) * 15.0 * a1.min(a2)).floor();
        let regime = if k % 2 == 0 {
            ReplenishmentRegime::fixed(1.0).unwrap()
        } else {
            ReplenishmentRegime::exponential(uniform(&mut stream, 0.5, 2.0)).unwrap()
        };
        instances.push(Instance {
            demand,
            econ,
            constraint: CapacityConstraint::new(a1, a2, cap).unwrap(),
            regime,
            tol: 1e-12,
        });
    }
    let pairs: Vec<Result<(OptimizationResult, OptimizationResult), ValidateError>> = instances
        .par_iter()
        .map(
            |instance| -> Result<(OptimizationResult, OptimizationResult), ValidateError> {
                Ok((optimize_monotone(instance)?, optimize_bruteforce(instance)?))
            },
        )
        .collect();
    let mut mismatched = 0usize;
    let mut over_budget = 0usize;
    let mut strictly_fewer = 0usize;
    let mut runs = Vec::new();
    for pair in pairs {
        let (mono, brute) = pair?;
        if mono.best_rate != brute.best_rate {
            mismatched += 1;
        }
        if mono.evaluations > brute.evaluations {
            over_budget += 1;
        }
        if mono.evaluations < brute.evaluations {
            strictly_fewer += 1;
        }
        runs.push(mono);
    }
    let total = instances.len();
    let passed = mismatched == 0 && over_budget == 0 && strictly_fewer * 5 >= total * 4;
    let detail = format!(
        "{mismatched} rate mismatches, {over_budget} over budget, strictly fewer evals on {strictly_fewer}/{total}"
    );
    Ok((EquivalenceOutcome { runs }, passed, detail))
}

fn criterion9_monte_carlo() -> Result<(bool, String), ValidateError> {
    let fixed = ReplenishmentRegime::fixed(1.0).unwrap();
    let exp1 = ReplenishmentRegime::exponential(1.0).unwrap();
    let cases: Vec<(DemandModel, EconomicParams, Policy, ReplenishmentRegime)> = vec![
        (
            DemandModel::new(20.0, 20.0, 0.4, 0.4).unwrap(),
            EconomicParams::new(50.0, 10.0, 0.0, 20.0, 4.0, 0.0).unwrap(),
            Policy::new(10, 10),
            fixed,
        ),
        (
            DemandModel::new(20.0, 20.0, 0.4, 0.4).unwrap(),
            EconomicParams::new(50.0, 10.0, 0.0, 20.0, 4.0, 0.0).unwrap(),
            Policy::new(10, 10),
            exp1,
        ),
        (
            DemandModel::new(5.0, 15.0, 0.0, 0.0).unwrap(),
            EconomicParams::new(30.0, 12.0, 1.0, 25.0, 8.0, 2.0).unwrap(),
            Policy::new(4, 9),
            ReplenishmentRegime::fixed(0.5).unwrap(),
        ),
        (
            DemandModel::new(5.0, 15.0, 1.0, 1.0).unwrap(),
            EconomicParams::new(30.0, 12.0, 1.0, 25.0, 8.0, 2.0).unwrap(),
            Policy::new(6, 8),
            ReplenishmentRegime::exponential(2.0).unwrap(),
        ),
        (
            DemandModel::new(8.0, 3.0, 0.7, 0.2).unwrap(),
            EconomicParams::new(45.0, 15.0, 3.0, 22.0, 9.0, 1.0).unwrap(),
            Policy::new(6, 2),
            fixed,
        ),
        (
            DemandModel::new(8.0, 3.0, 0.7, 0.2).unwrap(),
            EconomicParams::new(45.0, 15.0, 3.0, 22.0, 9.0, 1.0).unwrap(),
            Policy::new(6, 2),
            exp1,
        ),
        (
            DemandModel::new(12.0, 9.0, 0.5, 0.3).unwrap(),
            EconomicParams::new(50.0, 30.0, 0.0, 20.0, 12.0, 0.0).unwrap(),
            Policy::new(8, 6),
            ReplenishmentRegime::fixed(1.0).unwrap(),
        ),
        (
            DemandModel::new(12.0, 9.0, 0.5, 0.3).unwrap(),
            EconomicParams::new(50.0, 30.0, 0.0, 20.0, 12.0, 0.0).unwrap(),
            Policy::new(8, 6),
            ReplenishmentRegime::exponential(0.8).unwrap(),
        ),
        (
            DemandModel::new(3.0, 2.0, 0.9, 0.9).unwrap(),
            EconomicParams::new(18.0, 5.0, 0.5, 12.0, 3.0, 0.5).unwrap(),
            Policy::new(3, 2),
            fixed,
        ),
        (
            DemandModel::new(3.0, 2.0, 0.9, 0.9).unwrap(),
            EconomicParams::new(18.0, 5.0, 0.5, 12.0, 3.0, 0.5).unwrap(),
            Policy::new(3, 2),
            exp1,
        ),
    ];
    let failures: Vec<String> = cases
        .par_iter()
        .enumerate()
        .map(
            |(i, (d, e, policy, regime))| -> Result<Option<String>, ValidateError> {
                let analytic = profit_rate(*policy, e, d, regime, 1e-12)?.rate;
                let est = estimate_profit(*policy, e, d, regime, 100_000, 0x9000 + i as u64)?;
                if (est.mean - analytic).abs() <= 3.0 * est.std_error {
                    Ok(None)
                } else {
                    Ok(Some(format!(
                        "case {i}: |{:.4} - {analytic:.4}| > 3 * {:.4}",
                        est.mean, est.std_error
                    )))
                }
            },
        )
        .collect::<Result<Vec<_>, ValidateError>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} instances within 3 sigma at 100000 replications",
                cases.len()
            )
        } else {
            failures.join("; ")
        },
    ))
}

fn profit_of(rows: &[SweepRow], c: f64, sub: bool, fixed: bool) -> Option<&SweepRow> {
    rows.iter().find(|r| {
        r.capacity == c
            && (r.p12 > 0.0) == sub
            && matches!(r.regime, ReplenishmentRegime::Fixed { .. }) == fixed
    })
}

fn criterion10_scenarios(scenario_dir: &Path) -> Result<(bool, String), ValidateError> {
    let mut problems = Vec::new();
    let mut sweeps = Vec::new();
    for file in SCENARIO_FILES {
        let cfg = ScenarioConfig::load(&scenario_dir.join(file))?;
        let rows = run_sweep(&cfg)?;
        sweeps.push((file, cfg, rows));
    }

    for (file, cfg, rows) in &sweeps {
        // (a) substitution never hurts at equal capacity, each regime.
        for &c in &cfg.capacities() {
            for fixed in [true, false] {
                let nosub = profit_of(rows, c, false, fixed);
                let sub = profit_of(rows, c, true, fixed);
                if let (Some(n), Some(s)) = (nosub, sub) {
                    if s.profit < n.profit - 1e-9 {
                        problems.push(format!("{file}: substitution hurts at C={c}"));
                    }
                }
            }
        }
        // (c) replenishment variability costs profit at every capacity.
        for &c in &cfg.capacities() {
            if let (Some(f), Some(e)) = (
                profit_of(rows, c, true, true),
                profit_of(rows, c, true, false),
            ) {
                if f.profit < e.profit - 1e-9 {
                    problems.push(format!("{file}: exponential beats fixed at C={c}"));
                }
            }
        }
    }

    // (b) mixed-ratio scenario drops the weak product at large capacity.
    let (_, cfg, rows) = &sweeps[2];
    for fixed in [true, false] {
        match profit_of(rows, cfg.c_max, true, fixed) {
            Some(row) if row.q2 == 0 => {}
            Some(row) => problems.push(format!(
                "mixed: Q2* = {} at C={} (fixed={fixed})",
                row.q2, cfg.c_max
            )),
            None => problems.push("mixed: missing row".to_string()),
        }
    }

    // (d) in the both-high scenario a very low capacity forces the same
    // full-capacity policy with and without substitution.
    let (_, cfg, rows) = &sweeps[0];
    let low_c = cfg.c_min;
    match (
        profit_of(rows, low_c, false, true),
        profit_of(rows, low_c, true, true),
    ) {
        (Some(nosub), Some(sub)) => {
            if (nosub.q1, nosub.q2) != (sub.q1, sub.q2) {
                problems.push(format!(
                    "both_high: low-capacity policies differ ({},{}) vs ({},{})",
                    nosub.q1, nosub.q2, sub.q1, sub.q2
                ));
            }
            if nosub.q1 + nosub.q2 != low_c as u32 {
                problems.push(format!(
                    "both_high: low-capacity policy does not exhaust C={low_c}"
                ));
            }
        }
        _ => problems.push("both_high: missing low-capacity rows".to_string()),
    }

    Ok((
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "substitution dominance, weak-product drop, variability penalty and low-C \
                 agreement hold across {} sweeps",
                sweeps.len()
            )
        } else {
            problems.join("; ")
        },
    ))
}

/// Runs all validation criteria; scenario configs are read from
/// `scenario_dir`. Reports come back ordered by criterion index.
pub fn run_all(scenario_dir: &Path) -> Result<Vec<CriterionReport>, ValidateError> {
    let mut reports = Vec::new();
    let mut push = |index: u8,
                    name: &'static str,
                    budget: Option<f64>,
                    started: Instant,
                    passed: bool,
                    detail: String| {
        let seconds = started.elapsed().as_secs_f64();
        let within_budget = budget.is_none_or(|b| seconds < b);
        let detail = if within_budget {
            detail
        } else {
            format!("{detail}; exceeded {:.0}s budget", budget.unwrap())
        };
        reports.push(CriterionReport {
            index,
            name,
            passed: passed && within_budget,
            detail,
            seconds,
        });
    };

    let t = Instant::now();
    let (ok, detail) = criterion1_transient_equivalence()?;
    push(1, "transient-oracle-equivalence", Some(30.0), t, ok, detail);

    let t = Instant::now();
    let (ok, detail) = criterion2_stationary_equivalence()?;
    push(
        2,
        "stationary-oracle-equivalence",
        Some(10.0),
        t,
        ok,
        detail,
    );

    let t = Instant::now();
    let (ok, detail) = criterion3_corner_value()?;
    push(3, "stationary-corner-value", None, t, ok, detail);

    let t = Instant::now();
    let (ok, detail) = criterion4_independence_reduction()?;
    push(4, "independence-reduction", None, t, ok, detail);

    let t = Instant::now();
    let (sub_outcome, ok, detail) = criterion5_submodularity()?;
    push(5, "profit-submodularity", Some(120.0), t, ok, detail);

    let t = Instant::now();
    let (ok, detail) = criterion6_coupling()?;
    push(6, "pathwise-coupling", None, t, ok, detail);

    let t = Instant::now();
    let (eq_outcome, ok8, detail8) = criterion8_optimizer_equivalence()?;

    let t7 = Instant::now();
    let mut all_runs = sub_outcome.runs;
    all_runs.extend(eq_outcome.runs);
    let (ok7, detail7) = criterion7_monotone_profiles(&all_runs);
    push(7, "monotone-best-response-profile", None, t7, ok7, detail7);
    push(8, "optimizer-equivalence", None, t, ok8, detail8);

    let t = Instant::now();
    let (ok, detail) = criterion9_monte_carlo()?;
    push(9, "monte-carlo-consistency", Some(120.0), t, ok, detail);

    let t = Instant::now();
    let (ok, detail) = criterion10_scenarios(scenario_dir)?;
    push(10, "scenario-reproduction", Some(300.0), t, ok, detail);

    reports.sort_by_key(|r| r.index);
    Ok(reports)
}
