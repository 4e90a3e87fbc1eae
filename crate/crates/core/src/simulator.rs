//! Discrete-event Monte Carlo of a replenishment cycle.
//!
//! This is the statistical cross-check for the analytic modules and the
//! machinery behind the coupled four-system comparison that underlies
//! the submodularity of the profit.
//!
//! # Stream layout
//!
//! Randomness comes from a PCG-64 generator ([`rand_pcg::Pcg64`]), a
//! fixed, portable algorithm, so a seed fully determines every outcome
//! across platforms. Replication `i` of a run seeded with `s` uses the
//! sub-stream `substream_seed(s, i)` (a SplitMix64 mix), keeping
//! replications independent while reproducible.
//!
//! Within a cycle, draws are consumed in a fixed order:
//!
//! 1. in the exponential regime, one exponential(mu) draw for the cycle
//!    length, before any demand processing;
//! 2. one exponential inter-arrival draw per product to seed the two
//!    arrival clocks;
//! 3. per arrival, first a uniform substitution-willingness coin, then
//!    the next inter-arrival draw for the arriving product's clock.
//!
//! Every customer pre-draws the coin whether or not substitution ends
//! up being exercised, so systems started from different inventory
//! levels consume an identical randomness stream: that is exactly the
//! common-random-numbers coupling [`coupled_quadruple_trace`] needs.
//! Simultaneous arrivals cannot occur with continuous clocks; on an
//! exact floating-point tie the product-1 arrival is processed first.

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::error::{Error, Result};
use crate::model::{DemandModel, EconomicParams, Policy, Product, ReplenishmentRegime};

/// Deterministic per-replication seed derivation (SplitMix64 finalizer
/// over `seed ^ index * golden`).
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seedable source of the demand, substitution and replenishment draws.
#[derive(Debug, Clone)]
pub struct EventStream {
    rng: Pcg64,
}

impl EventStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: Pcg64::seed_from_u64(seed),
        }
    }

    /// Sub-stream `index` of the run seeded with `seed`.
    pub fn substream(seed: u64, index: u64) -> Self {
        Self::from_seed(substream_seed(seed, index))
    }

    /// Uniform draw in `[0, 1)` using the top 53 bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Exponential draw with the given rate, by inversion.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        -(1.0 - self.uniform()).ln() / rate
    }
}

/// A single customer arrival: epoch, product asked for, and the
/// pre-drawn willingness coin (substitutes when `coin < p_ij`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub time: f64,
    pub product: Product,
    pub substitution_coin: f64,
}

/// Merged, time-ordered arrivals of both demand processes on
/// `[0, horizon]`.
pub fn generate_cycle_events(
    d: &DemandModel,
    horizon: f64,
    stream: &mut EventStream,
) -> Vec<Arrival> {
    let mut events = Vec::new();
    let mut next1 = stream.exponential(d.lambda1());
    let mut next2 = stream.exponential(d.lambda2());
    loop {
        if next1 > horizon && next2 > horizon {
            return events;
        }
        if next1 <= next2 {
            let coin = stream.uniform();
            events.push(Arrival {
                time: next1,
                product: Product::One,
                substitution_coin: coin,
            });
            next1 += stream.exponential(d.lambda1());
        } else {
            let coin = stream.uniform();
            events.push(Arrival {
                time: next2,
                product: Product::Two,
                substitution_coin: coin,
            });
            next2 += stream.exponential(d.lambda2());
        }
    }
}

/// What happened to one arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrivalOutcome {
    Sold,
    Substituted,
    Lost,
}

/// One line of the debugging trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub product: Product,
    pub outcome: ArrivalOutcome,
}

impl std::fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let product = match self.product {
            Product::One => 1,
            Product::Two => 2,
        };
        let outcome = match self.outcome {
            ArrivalOutcome::Sold => "sold",
            ArrivalOutcome::Substituted => "substituted",
            ArrivalOutcome::Lost => "lost",
        };
        write!(f, "{},arrival,{},{}", self.time, product, outcome)
    }
}

/// End-of-cycle tally. Substituted sales count toward the product that
/// was actually delivered, so `leftover_i + sold_i = Q_i` always.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleOutcome {
    pub leftover1: u32,
    pub leftover2: u32,
    pub sold1: u32,
    pub sold2: u32,
    pub substituted_1to2: u32,
    pub substituted_2to1: u32,
    pub cycle_length: f64,
}

/// Folds an arrival sequence over a starting inventory.
///
/// An arrival for an in-stock product sells it; otherwise the customer
/// takes the other product when the coin accepts and stock remains;
/// otherwise the sale is lost.
pub fn apply_arrivals(
    q1: u32,
    q2: u32,
    d: &DemandModel,
    arrivals: &[Arrival],
    cycle_length: f64,
) -> CycleOutcome {
    fold_arrivals(q1, q2, d, arrivals, cycle_length, None)
}

fn fold_arrivals(
    q1: u32,
    q2: u32,
    d: &DemandModel,
    arrivals: &[Arrival],
    cycle_length: f64,
    mut trace: Option<&mut Vec<TraceEvent>>,
) -> CycleOutcome {
    let mut stock1 = q1;
    let mut stock2 = q2;
    let mut sold1 = 0;
    let mut sold2 = 0;
    let mut sub12 = 0;
    let mut sub21 = 0;
    for a in arrivals {
        let outcome = match a.product {
            Product::One => {
                if stock1 > 0 {
                    stock1 -= 1;
                    sold1 += 1;
                    ArrivalOutcome::Sold
                } else if stock2 > 0 && a.substitution_coin < d.p12() {
                    stock2 -= 1;
                    sold2 += 1;
                    sub12 += 1;
                    ArrivalOutcome::Substituted
                } else {
                    ArrivalOutcome::Lost
                }
            }
            Product::Two => {
                if stock2 > 0 {
                    stock2 -= 1;
                    sold2 += 1;
                    ArrivalOutcome::Sold
                } else if stock1 > 0 && a.substitution_coin < d.p21() {
                    stock1 -= 1;
                    sold1 += 1;
                    sub21 += 1;
                    ArrivalOutcome::Substituted
                } else {
                    ArrivalOutcome::Lost
                }
            }
        };
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceEvent {
                time: a.time,
                product: a.product,
                outcome,
            });
        }
    }
    CycleOutcome {
        leftover1: stock1,
        leftover2: stock2,
        sold1,
        sold2,
        substituted_1to2: sub12,
        substituted_2to1: sub21,
        cycle_length,
    }
}

fn draw_horizon(regime: &ReplenishmentRegime, stream: &mut EventStream) -> f64 {
    match *regime {
        ReplenishmentRegime::Fixed { t } => t,
        // Drawn before any demand processing so coupled systems share it.
        ReplenishmentRegime::Exponential { mu } => stream.exponential(mu),
    }
}

/// Simulates one replenishment cycle.
pub fn simulate_cycle(
    p: Policy,
    d: &DemandModel,
    regime: &ReplenishmentRegime,
    stream: &mut EventStream,
) -> CycleOutcome {
    let horizon = draw_horizon(regime, stream);
    let events = generate_cycle_events(d, horizon, stream);
    fold_arrivals(p.q1, p.q2, d, &events, horizon, None)
}

/// [`simulate_cycle`] with a per-event trace for debugging dumps.
pub fn simulate_cycle_trace(
    p: Policy,
    d: &DemandModel,
    regime: &ReplenishmentRegime,
    stream: &mut EventStream,
) -> (CycleOutcome, Vec<TraceEvent>) {
    let horizon = draw_horizon(regime, stream);
    let events = generate_cycle_events(d, horizon, stream);
    let mut trace = Vec::with_capacity(events.len());
    let outcome = fold_arrivals(p.q1, p.q2, d, &events, horizon, Some(&mut trace));
    (outcome, trace)
}

/// Monte Carlo profit-rate estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfitEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: u64,
}

/// Renewal-reward estimate of the profit per unit time over `n_reps`
/// independent cycles, one RNG sub-stream per replication.
///
/// In the exponential regime each per-cycle profit is multiplied by
/// `mu` (the exact inverse mean cycle length) rather than divided by
/// the sampled length, which keeps the estimator unbiased and cheaper
/// in variance.
pub fn estimate_profit(
    p: Policy,
    econ: &EconomicParams,
    d: &DemandModel,
    regime: &ReplenishmentRegime,
    n_reps: u64,
    seed: u64,
) -> Result<ProfitEstimate> {
    if n_reps < 2 {
        return Err(Error::TooFewReplications(n_reps));
    }
    regime.validate()?;
    let margin1 = econ.retail(Product::One) - econ.cost(Product::One);
    let margin2 = econ.retail(Product::Two) - econ.cost(Product::Two);
    let pen1 = econ.retail(Product::One) + econ.holding(Product::One);
    let pen2 = econ.retail(Product::Two) + econ.holding(Product::Two);

    let mut mean = 0.0;
    let mut m2 = 0.0;
    for rep in 0..n_reps {
        let mut stream = EventStream::substream(seed, rep);
        let outcome = simulate_cycle(p, d, regime, &mut stream);
        let cycle_profit = margin1 * f64::from(p.q1) + margin2 * f64::from(p.q2)
            - pen1 * f64::from(outcome.leftover1)
            - pen2 * f64::from(outcome.leftover2);
        let rate = match *regime {
            ReplenishmentRegime::Fixed { t } => cycle_profit / t,
            ReplenishmentRegime::Exponential { mu } => cycle_profit * mu,
        };
        let delta = rate - mean;
        mean += delta / (rep + 1) as f64;
        m2 += delta * (rate - mean);
    }
    let variance = m2 / (n_reps - 1) as f64;
    Ok(ProfitEstimate {
        mean,
        std_error: (variance / n_reps as f64).sqrt(),
        replications: n_reps,
    })
}

/// End-of-cycle leftovers of four systems driven by one shared event
/// stream, started from `(Q1+1, Q2+1)`, `(Q1+1, Q2)`, `(Q1, Q2+1)` and
/// `(Q1, Q2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledLeftovers {
    pub both_up: (u32, u32),
    pub q1_up: (u32, u32),
    pub q2_up: (u32, u32),
    pub base: (u32, u32),
    pub cycle_length: f64,
}

impl CoupledLeftovers {
    /// The pathwise difference bound behind submodularity:
    /// `n_i(both_up) - n_i(q1_up) >= n_i(q2_up) - n_i(base)` per product.
    pub fn satisfies_coupling_inequality(&self) -> bool {
        let d1 = i64::from(self.both_up.0) - i64::from(self.q1_up.0)
            >= i64::from(self.q2_up.0) - i64::from(self.base.0);
        let d2 = i64::from(self.both_up.1) - i64::from(self.q1_up.1)
            >= i64::from(self.q2_up.1) - i64::from(self.base.1);
        d1 && d2
    }
}

/// Runs the four coupled systems against a single stream: identical
/// arrival epochs, identical willingness coins, and in the exponential
/// regime one shared replenishment time.
pub fn coupled_quadruple_trace(
    q1: u32,
    q2: u32,
    d: &DemandModel,
    regime: &ReplenishmentRegime,
    stream: &mut EventStream,
) -> CoupledLeftovers {
    let horizon = draw_horizon(regime, stream);
    let events = generate_cycle_events(d, horizon, stream);
    let run = |a: u32, b: u32| {
        let o = fold_arrivals(a, b, d, &events, horizon, None);
        (o.leftover1, o.leftover2)
    };
    CoupledLeftovers {
        both_up: run(q1 + 1, q2 + 1),
        q1_up: run(q1 + 1, q2),
        q2_up: run(q1, q2 + 1),
        base: run(q1, q2),
        cycle_length: horizon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demand(l1: f64, l2: f64, p12: f64, p21: f64) -> DemandModel {
        DemandModel::new(l1, l2, p12, p21).unwrap()
    }

    #[test]
    fn identical_seeds_reproduce_identical_outcomes() {
        let d = demand(20.0, 20.0, 0.4, 0.4);
        let regime = ReplenishmentRegime::exponential(1.0).unwrap();
        let run = |seed: u64| {
            (0..20)
                .map(|i| {
                    let mut s = EventStream::substream(seed, i);
                    simulate_cycle(Policy::new(5, 5), &d, &regime, &mut s)
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }

    #[test]
    fn conservation_holds_on_every_trace() {
        let d = demand(8.0, 12.0, 0.3, 0.9);
        let regime = ReplenishmentRegime::fixed(1.0).unwrap();
        for rep in 0..200 {
            let mut s = EventStream::substream(7, rep);
            let o = simulate_cycle(Policy::new(6, 3), &d, &regime, &mut s);
            assert_eq!(o.leftover1 + o.sold1, 6);
            assert_eq!(o.leftover2 + o.sold2, 3);
            assert!(o.substituted_1to2 <= o.sold2);
            assert!(o.substituted_2to1 <= o.sold1);
        }
    }

    #[test]
    fn empty_shelves_lose_all_demand() {
        let d = demand(10.0, 10.0, 1.0, 1.0);
        let regime = ReplenishmentRegime::fixed(1.0).unwrap();
        let mut s = EventStream::from_seed(1);
        let o = simulate_cycle(Policy::new(0, 0), &d, &regime, &mut s);
        assert_eq!((o.leftover1, o.leftover2, o.sold1, o.sold2), (0, 0, 0, 0));
    }

    #[test]
    fn scripted_substitution_step_moves_the_four_systems_correctly() {
        // Two product-2 arrivals against the coupled quadruple started
        // from (4,2)/(4,1)/(3,2)/(3,1): the first sells product 2
        // everywhere; the second finds product 2 out in the middle
        // systems and substitutes where the coin accepts.
        let d = demand(5.0, 5.0, 0.4, 0.4);
        let events = [
            Arrival {
                time: 0.1,
                product: Product::Two,
                substitution_coin: 0.99,
            },
            Arrival {
                time: 0.2,
                product: Product::Two,
                substitution_coin: 0.0,
            },
        ];
        let state = |a: u32, b: u32| {
            let o = apply_arrivals(a, b, &d, &events, 1.0);
            (o.leftover1, o.leftover2)
        };
        assert_eq!(state(4, 2), (4, 0));
        assert_eq!(state(4, 1), (3, 0));
        assert_eq!(state(3, 2), (3, 0));
        assert_eq!(state(3, 1), (2, 0));
    }

    #[test]
    fn zero_demand_keeps_the_initial_states() {
        let d = demand(1e-9, 1e-9, 0.4, 0.4);
        let regime = ReplenishmentRegime::fixed(1.0).unwrap();
        let mut s = EventStream::from_seed(3);
        let c = coupled_quadruple_trace(4, 2, &d, &regime, &mut s);
        assert_eq!(c.both_up, (5, 3));
        assert_eq!(c.base, (4, 2));
        assert!(c.satisfies_coupling_inequality());
    }

    #[test]
    fn coupling_inequality_holds_on_seeded_traces() {
        let d = demand(20.0, 20.0, 0.4, 0.4);
        for regime in [
            ReplenishmentRegime::fixed(1.0).unwrap(),
            ReplenishmentRegime::exponential(1.0).unwrap(),
        ] {
            for rep in 0..2000 {
                let mut s = EventStream::substream(11, rep);
                let q1 = rep as u32 % 6;
                let q2 = (rep as u32 / 6) % 6;
                let c = coupled_quadruple_trace(q1, q2, &d, &regime, &mut s);
                assert!(c.satisfies_coupling_inequality(), "violated at rep {rep}");
            }
        }
    }

    #[test]
    fn degenerate_demand_estimate_is_the_pure_outlay() {
        let d = demand(1e-9, 1e-9, 0.0, 0.0);
        let e = EconomicParams::new(50.0, 10.0, 2.0, 20.0, 4.0, 1.0).unwrap();
        let regime = ReplenishmentRegime::fixed(2.0).unwrap();
        let est = estimate_profit(Policy::new(3, 4), &e, &d, &regime, 100, 5).unwrap();
        // Nothing sells: rate = -((c1+h1)Q1 + (c2+h2)Q2)/T.
        let expected = -((10.0 + 2.0) * 3.0 + (4.0 + 1.0) * 4.0) / 2.0;
        assert!((est.mean - expected).abs() < 1e-9);
        assert!(est.std_error < 1e-9);
    }

    #[test]
    fn doubling_replications_shrinks_the_standard_error() {
        let d = demand(10.0, 10.0, 0.4, 0.4);
        let e = EconomicParams::new(50.0, 10.0, 0.0, 20.0, 4.0, 0.0).unwrap();
        let regime = ReplenishmentRegime::exponential(1.0).unwrap();
        let small = estimate_profit(Policy::new(8, 8), &e, &d, &regime, 4000, 9).unwrap();
        let large = estimate_profit(Policy::new(8, 8), &e, &d, &regime, 8000, 9).unwrap();
        let ratio = small.std_error / large.std_error;
        assert!(
            (ratio - std::f64::consts::SQRT_2).abs() < 0.15,
            "ratio {ratio}"
        );
    }

    #[test]
    fn too_few_replications_is_rejected() {
        let d = demand(1.0, 1.0, 0.0, 0.0);
        let e = EconomicParams::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let regime = ReplenishmentRegime::fixed(1.0).unwrap();
        assert_eq!(
            estimate_profit(Policy::new(1, 1), &e, &d, &regime, 1, 0),
            Err(Error::TooFewReplications(1))
        );
    }

    #[test]
    fn stream_layout_is_frozen() {
        // These outcomes pin the draw order documented in the module
        // docs; any change to it is a breaking change for seeded runs.
        let d = demand(3.0, 2.0, 0.6, 0.4);
        let fixed = ReplenishmentRegime::fixed(1.0).unwrap();
        let outcomes: Vec<CycleOutcome> = (0..3)
            .map(|rep| {
                let mut s = EventStream::substream(123, rep);
                simulate_cycle(Policy::new(2, 3), &d, &fixed, &mut s)
            })
            .collect();
        let summary: Vec<(u32, u32, u32, u32)> = outcomes
            .iter()
            .map(|o| {
                (
                    o.leftover1,
                    o.leftover2,
                    o.substituted_1to2,
                    o.substituted_2to1,
                )
            })
            .collect();
        assert_eq!(summary, vec![(0, 1, 1, 0), (0, 1, 1, 0), (0, 0, 0, 0)]);

        let exp = ReplenishmentRegime::exponential(0.7).unwrap();
        let mut s = EventStream::substream(123, 0);
        let o = simulate_cycle(Policy::new(2, 3), &d, &exp, &mut s);
        assert_eq!(o.cycle_length, 2.258491205980004);
        assert_eq!((o.leftover1, o.leftover2), (0, 0));
    }

    #[test]
    fn trace_lines_render_the_event_format() {
        let d = demand(20.0, 20.0, 0.4, 0.4);
        let regime = ReplenishmentRegime::fixed(0.5).unwrap();
        let mut s = EventStream::from_seed(2);
        let (outcome, trace) = simulate_cycle_trace(Policy::new(2, 2), &d, &regime, &mut s);
        assert_eq!(
            trace.len() as u32,
            outcome.sold1
                + outcome.sold2
                + trace
                    .iter()
                    .filter(|e| e.outcome == ArrivalOutcome::Lost)
                    .count() as u32
        );
        let line = trace[0].to_string();
        assert!(line.contains(",arrival,"));
        assert!(line.ends_with("sold") || line.ends_with("substituted") || line.ends_with("lost"));
    }
}
