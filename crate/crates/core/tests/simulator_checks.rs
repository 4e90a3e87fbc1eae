//! Statistical validation of the simulator against the analytic laws.

use substock::simulator::{coupled_quadruple_trace, estimate_profit, simulate_cycle, EventStream};
use substock::stationary::stationary_distribution;
use substock::transient::transient_distribution;
use substock::{DemandModel, EconomicParams, Policy, ReplenishmentRegime};

fn demand(l1: f64, l2: f64, p12: f64, p21: f64) -> DemandModel {
    DemandModel::new(l1, l2, p12, p21).unwrap()
}

/// Max absolute deviation between an empirical pmf and a reference.
fn max_pmf_deviation(counts: &[u64], n: u64, reference: &[f64]) -> f64 {
    counts
        .iter()
        .zip(reference)
        .map(|(&c, &p)| (c as f64 / n as f64 - p).abs())
        .fold(0.0, f64::max)
}

#[test]
fn empirical_leftovers_match_the_transient_law() {
    let d = demand(8.0, 6.0, 0.5, 0.3);
    let regime = ReplenishmentRegime::fixed(1.0).unwrap();
    let (q1, q2) = (5u32, 4u32);
    let n = 100_000u64;
    let mut counts1 = vec![0u64; (q1 + 1) as usize];
    let mut counts2 = vec![0u64; (q2 + 1) as usize];
    for rep in 0..n {
        let mut s = EventStream::substream(404, rep);
        let o = simulate_cycle(Policy::new(q1, q2), &d, &regime, &mut s);
        counts1[o.leftover1 as usize] += 1;
        counts2[o.leftover2 as usize] += 1;
    }
    let dist = transient_distribution(q1, q2, 1.0, &d, 1e-12).unwrap();
    let envelope = 4.0 / (n as f64).sqrt();
    assert!(max_pmf_deviation(&counts1, n, &dist.marginal1()) <= envelope);
    assert!(max_pmf_deviation(&counts2, n, &dist.marginal2()) <= envelope);
}

#[test]
fn empirical_leftovers_match_the_stationary_law() {
    let d = demand(8.0, 6.0, 0.5, 0.3);
    let mu = 1.0;
    let regime = ReplenishmentRegime::exponential(mu).unwrap();
    let (q1, q2) = (4u32, 4u32);
    let n = 100_000u64;
    let mut counts1 = vec![0u64; (q1 + 1) as usize];
    for rep in 0..n {
        let mut s = EventStream::substream(909, rep);
        let o = simulate_cycle(Policy::new(q1, q2), &d, &regime, &mut s);
        counts1[o.leftover1 as usize] += 1;
    }
    let dist = stationary_distribution(q1, q2, &d, mu).unwrap();
    let envelope = 4.0 / (n as f64).sqrt();
    assert!(max_pmf_deviation(&counts1, n, &dist.marginal1()) <= envelope);
}

#[test]
fn full_substitution_with_empty_own_shelf_sells_the_other_product() {
    // Practically all demand is for product 1, which is never stocked
    // but always substitutes: product 2 sales behave like
    // min(q, Poisson(lambda1 * T)).
    let d = demand(6.0, 1e-12, 1.0, 0.0);
    let regime = ReplenishmentRegime::fixed(1.0).unwrap();
    let q = 5u32;
    let n = 100_000u64;
    let mut counts = vec![0u64; (q + 1) as usize];
    for rep in 0..n {
        let mut s = EventStream::substream(77, rep);
        let o = simulate_cycle(Policy::new(0, q), &d, &regime, &mut s);
        counts[o.sold2 as usize] += 1;
    }
    // Reference law by pmf recurrence.
    let mean = 6.0f64;
    let mut pmf = vec![(-mean).exp()];
    for k in 1..=q as usize {
        let prev = pmf[k - 1];
        pmf.push(prev * mean / k as f64);
    }
    let mut reference = pmf.clone();
    reference[q as usize] = 1.0 - pmf[..q as usize].iter().sum::<f64>();
    let envelope = 4.0 / (n as f64).sqrt();
    assert!(max_pmf_deviation(&counts, n, &reference) <= envelope);
}

#[test]
fn coupling_inequality_is_pathwise_not_just_on_average() {
    let d = demand(20.0, 20.0, 0.4, 0.4);
    for regime in [
        ReplenishmentRegime::fixed(1.0).unwrap(),
        ReplenishmentRegime::exponential(1.0).unwrap(),
    ] {
        for rep in 0..5000u64 {
            let mut s = EventStream::substream(1234, rep);
            let q1 = (rep % 7) as u32;
            let q2 = ((rep / 7) % 7) as u32;
            let c = coupled_quadruple_trace(q1, q2, &d, &regime, &mut s);
            assert!(
                c.satisfies_coupling_inequality(),
                "violation at rep {rep} ({q1},{q2}) {c:?}"
            );
        }
    }
}

#[test]
fn profit_estimates_straddle_the_analytic_value() {
    use substock::profit::profit_rate;
    let d = demand(10.0, 14.0, 0.7, 0.2);
    let e = EconomicParams::new(45.0, 15.0, 1.0, 22.0, 8.0, 0.5).unwrap();
    for (seed, regime) in [
        (5u64, ReplenishmentRegime::fixed(1.0).unwrap()),
        (6, ReplenishmentRegime::exponential(1.25).unwrap()),
    ] {
        let policy = Policy::new(9, 10);
        let analytic = profit_rate(policy, &e, &d, &regime, 1e-12).unwrap().rate;
        let est = estimate_profit(policy, &e, &d, &regime, 100_000, seed).unwrap();
        assert!(
            (est.mean - analytic).abs() <= 3.0 * est.std_error,
            "{regime:?}: {analytic} vs {} +- {}",
            est.mean,
            est.std_error
        );
    }
}
