//! Analysis toolkit for a two-product lost-sales inventory system with
//! Poisson demand and partial two-way substitution.
//!
//! Both products are replenished jointly up to order quantities `(Q1, Q2)`
//! subject to a linear capacity constraint `a1*Q1 + a2*Q2 <= C`. A customer
//! who finds their product out of stock buys the other one with a given
//! probability. Replenishment cycles are either of fixed length or
//! exponentially distributed.
//!
//! The crate provides:
//!
//! - [`model`]: parameter containers, validation, derived sales rates,
//!   critical ratios and feasible-region enumeration;
//! - [`transient`]: the exact end-of-cycle inventory distribution under a
//!   fixed cycle length, plus an independent uniformization oracle;
//! - [`stationary`]: the stationary inventory distribution under
//!   exponential cycles, plus an independent balance-equation solver;
//! - [`profit`]: expected profit per unit time for both regimes;
//! - [`optimizer`]: constrained search for the optimal order quantities,
//!   exploiting the submodularity of the profit function;
//! - [`simulator`]: a reproducible discrete-event Monte Carlo engine used
//!   as a statistical cross-check, including the coupled four-system run
//!   behind the submodularity property.

pub mod distribution;
mod error;
pub mod model;
mod numeric;
pub mod optimizer;
pub mod profit;
pub mod simulator;
pub mod stationary;
pub mod transient;

pub use distribution::{DistributionKind, InventoryDistribution};
pub use error::{Error, Result};
pub use model::{
    AggregateRates, CapacityConstraint, DemandModel, EconomicParams, Policy, Product,
    ReplenishmentRegime,
};
