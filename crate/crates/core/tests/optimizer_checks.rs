//! Optimizer correctness against brute force and against the
//! newsvendor reduction.

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use substock::optimizer::{
    check_submodularity, optimize_bruteforce, optimize_monotone, q2_star, Instance,
};
use substock::{CapacityConstraint, DemandModel, EconomicParams, ReplenishmentRegime};

fn uniform(rng: &mut Pcg64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * ((rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0))
}

fn profile_is_nonincreasing(result: &substock::optimizer::OptimizationResult) -> bool {
    let values: Vec<u32> = result.q2_star_profile.values().copied().collect();
    values.windows(2).all(|w| w[0] >= w[1])
}

#[test]
fn unconstrained_best_response_is_the_newsvendor_quantile() {
    // Without substitution and with ample capacity the second product's
    // problem is a standalone newsvendor with critical ratio 0.8: the
    // optimum is the smallest q with P(Poisson(20) <= q) >= 0.8.
    let d = DemandModel::new(20.0, 20.0, 0.0, 0.0).unwrap();
    let e = EconomicParams::new(50.0, 10.0, 0.0, 20.0, 4.0, 0.0).unwrap();
    let instance = Instance {
        demand: d,
        econ: e,
        constraint: CapacityConstraint::new(1.0, 1.0, 200.0).unwrap(),
        regime: ReplenishmentRegime::fixed(1.0).unwrap(),
        tol: 1e-12,
    };
    let got = q2_star(&instance, 0, 60).unwrap();

    // Independent quantile computation by pmf recurrence.
    let mean = 20.0f64;
    let mut pmf = (-mean).exp();
    let mut cdf = pmf;
    let mut q = 0u32;
    while cdf < 0.8 {
        q += 1;
        pmf *= mean / f64::from(q);
        cdf += pmf;
    }
    assert_eq!(got, q);
    assert_eq!(got, 24);
}

#[test]
fn monotone_equals_brute_force_on_randomized_instances() {
    let mut rng = Pcg64::seed_from_u64(7101);
    let mut strict = 0usize;
    let total = 16usize;
    for trial in 0..total {
        // Capacity generous relative to demand so the best response is
        // usually interior and the shrinking windows actually bite.
        let demand = DemandModel::new(
            uniform(&mut rng, 0.8, 5.0),
            uniform(&mut rng, 0.8, 5.0),
            uniform(&mut rng, 0.0, 1.0),
            uniform(&mut rng, 0.0, 1.0),
        )
        .unwrap();
        let r1 = uniform(&mut rng, 10.0, 60.0);
        let r2 = uniform(&mut rng, 5.0, 30.0);
        let econ = EconomicParams::new(
            r1,
            uniform(&mut rng, 0.1 * r1, 0.8 * r1),
            uniform(&mut rng, 0.0, 3.0),
            r2,
            uniform(&mut rng, 0.1 * r2, 0.8 * r2),
            uniform(&mut rng, 0.0, 3.0),
        )
        .unwrap();
        let constraint =
            CapacityConstraint::new(1.0, 1.0, uniform(&mut rng, 8.0, 15.0).floor()).unwrap();
        let regime = if trial % 2 == 0 {
            ReplenishmentRegime::fixed(1.0).unwrap()
        } else {
            ReplenishmentRegime::exponential(uniform(&mut rng, 0.5, 2.0)).unwrap()
        };
        let instance = Instance {
            demand,
            econ,
            constraint,
            regime,
            tol: 1e-12,
        };
        let mono = optimize_monotone(&instance).unwrap();
        let brute = optimize_bruteforce(&instance).unwrap();
        assert_eq!(
            mono.best_rate, brute.best_rate,
            "trial {trial}: {:?} vs {:?}",
            mono.best, brute.best
        );
        assert!(mono.evaluations <= brute.evaluations);
        if mono.evaluations < brute.evaluations {
            strict += 1;
        }
        assert!(profile_is_nonincreasing(&mono), "trial {trial}");
        assert!(instance.constraint.is_feasible(mono.best));
    }
    assert!(
        strict * 10 >= total * 6,
        "window shrinkage too rare: {strict}/{total}"
    );
}

#[test]
fn submodularity_check_finds_no_violations() {
    let d = DemandModel::new(6.0, 4.0, 0.5, 0.7).unwrap();
    let e = EconomicParams::new(40.0, 12.0, 0.5, 25.0, 6.0, 1.0).unwrap();
    for regime in [
        ReplenishmentRegime::fixed(1.0).unwrap(),
        ReplenishmentRegime::exponential(1.0).unwrap(),
    ] {
        let violations = check_submodularity(&d, &e, &regime, 1e-12, 10).unwrap();
        assert!(violations.is_empty(), "{violations:?}");
    }
}

#[test]
fn low_ratio_product_is_dropped_when_substitution_can_cover_it() {
    // Mixed critical ratios (0.8 vs 0.4) with two-way substitution: at a
    // generous capacity the optimizer abandons the weak product.
    let d = DemandModel::new(20.0, 20.0, 0.4, 0.4).unwrap();
    let e = EconomicParams::new(50.0, 10.0, 0.0, 20.0, 12.0, 0.0).unwrap();
    let instance = Instance {
        demand: d,
        econ: e,
        constraint: CapacityConstraint::new(1.0, 1.0, 45.0).unwrap(),
        regime: ReplenishmentRegime::fixed(1.0).unwrap(),
        tol: 1e-12,
    };
    let best = optimize_monotone(&instance).unwrap();
    assert_eq!(best.best.q2, 0, "best policy {:?}", best.best);
    let brute = optimize_bruteforce(&instance).unwrap();
    assert_eq!(best.best_rate, brute.best_rate);
}
