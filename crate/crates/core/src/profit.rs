//! Expected profit per unit time for a given order-quantity pair.
//!
//! A cycle earns the sales margin on every unit not left over and pays
//! the holding cost on every unit that is:
//!
//! `Pi = (r1-c1)Q1 + (r2-c2)Q2 - (r1+h1)N1 - (r2+h2)N2`
//!
//! Cycles regenerate at replenishments, so the profit rate is the
//! expected cycle profit divided by the expected cycle length (`T`, or
//! `1/mu` in the exponential regime). The expected leftovers come from
//! [`crate::transient`] or [`crate::stationary`] accordingly.

use crate::error::Result;
use crate::model::{DemandModel, EconomicParams, Policy, Product, ReplenishmentRegime};
use crate::stationary::expected_leftover_random;
use crate::transient::expected_leftover_fixed;

/// Profit rate together with the quantities it was assembled from, so a
/// discrepancy can be attributed to the leftover expectations or to the
/// margin arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfitBreakdown {
    /// Expected profit per unit time.
    pub rate: f64,
    /// `(r1-c1)Q1 + (r2-c2)Q2`, the cycle margin if nothing were left.
    pub margin_term: f64,
    /// `(r1+h1) * E[leftover 1]`.
    pub leftover_penalty1: f64,
    /// `(r2+h2) * E[leftover 2]`.
    pub leftover_penalty2: f64,
    pub expected_leftover1: f64,
    pub expected_leftover2: f64,
}

/// Expected profit per unit time of policy `p` under the given regime.
///
/// `tol` bounds the series truncation inside the fixed-regime leftover
/// expectations; the exponential regime is a finite closed form and
/// ignores it.
pub fn profit_rate(
    p: Policy,
    econ: &EconomicParams,
    demand: &DemandModel,
    regime: &ReplenishmentRegime,
    tol: f64,
) -> Result<ProfitBreakdown> {
    regime.validate()?;
    let (e1, e2, cycle) = match *regime {
        ReplenishmentRegime::Fixed { t } => {
            let (e1, e2) = expected_leftover_fixed(p.q1, p.q2, t, demand, tol)?;
            (e1, e2, t)
        }
        ReplenishmentRegime::Exponential { mu } => {
            let (e1, e2) = expected_leftover_random(p.q1, p.q2, demand, mu)?;
            (e1, e2, 1.0 / mu)
        }
    };
    let margin_term = (econ.retail(Product::One) - econ.cost(Product::One)) * f64::from(p.q1)
        + (econ.retail(Product::Two) - econ.cost(Product::Two)) * f64::from(p.q2);
    let leftover_penalty1 = (econ.retail(Product::One) + econ.holding(Product::One)) * e1;
    let leftover_penalty2 = (econ.retail(Product::Two) + econ.holding(Product::Two)) * e2;
    Ok(ProfitBreakdown {
        rate: (margin_term - leftover_penalty1 - leftover_penalty2) / cycle,
        margin_term,
        leftover_penalty1,
        leftover_penalty2,
        expected_leftover1: e1,
        expected_leftover2: e2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DemandModel;

    fn demand(l1: f64, l2: f64, p12: f64, p21: f64) -> DemandModel {
        DemandModel::new(l1, l2, p12, p21).unwrap()
    }

    #[test]
    fn ordering_nothing_earns_nothing() {
        let d = demand(20.0, 20.0, 0.4, 0.4);
        let e = EconomicParams::new(50.0, 10.0, 0.0, 20.0, 4.0, 0.0).unwrap();
        for regime in [
            ReplenishmentRegime::fixed(1.0).unwrap(),
            ReplenishmentRegime::exponential(1.0).unwrap(),
        ] {
            let b = profit_rate(Policy::new(0, 0), &e, &d, &regime, 1e-12).unwrap();
            assert_eq!(b.rate, 0.0);
            assert_eq!(b.margin_term, 0.0);
        }
    }

    #[test]
    fn vanishing_cycles_lose_the_outlay() {
        // Nothing sells in a vanishing cycle, so the rate is a large
        // negative number driven by the purchase and holding outlay.
        let d = demand(20.0, 20.0, 0.4, 0.4);
        let e = EconomicParams::new(50.0, 10.0, 2.0, 20.0, 4.0, 1.0).unwrap();
        let regime = ReplenishmentRegime::fixed(1e-9).unwrap();
        let b = profit_rate(Policy::new(3, 4), &e, &d, &regime, 1e-12).unwrap();
        assert!(b.rate < 0.0);
        assert!((b.expected_leftover1 - 3.0).abs() < 1e-6);
        assert!((b.expected_leftover2 - 4.0).abs() < 1e-6);
    }

    #[test]
    fn no_substitution_profit_separates_across_products() {
        let d = demand(6.0, 9.0, 0.0, 0.0);
        let e = EconomicParams::new(50.0, 10.0, 1.0, 20.0, 4.0, 0.5).unwrap();
        for regime in [
            ReplenishmentRegime::fixed(1.0).unwrap(),
            ReplenishmentRegime::exponential(1.0).unwrap(),
        ] {
            let joint = profit_rate(Policy::new(5, 7), &e, &d, &regime, 1e-12)
                .unwrap()
                .rate;
            let only1 = profit_rate(Policy::new(5, 0), &e, &d, &regime, 1e-12)
                .unwrap()
                .rate;
            let only2 = profit_rate(Policy::new(0, 7), &e, &d, &regime, 1e-12)
                .unwrap()
                .rate;
            assert!(
                (joint - (only1 + only2)).abs() < 1e-9,
                "separability violated: {joint} vs {}",
                only1 + only2
            );
        }
    }

    #[test]
    fn breakdown_components_recombine_into_the_rate() {
        let d = demand(20.0, 20.0, 0.4, 0.4);
        let e = EconomicParams::new(50.0, 10.0, 0.0, 20.0, 4.0, 0.0).unwrap();
        let regime = ReplenishmentRegime::fixed(2.0).unwrap();
        let b = profit_rate(Policy::new(10, 8), &e, &d, &regime, 1e-12).unwrap();
        let recombined = (b.margin_term - b.leftover_penalty1 - b.leftover_penalty2) / 2.0;
        assert!((b.rate - recombined).abs() < 1e-12);
    }
}
