//! Model parameters and the feasible policy region.
//!
//! All types are immutable value objects validated on construction; the
//! operations here are pure functions, so values can be shared freely
//! across threads.

use crate::error::{Error, Result};

fn require_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be strictly positive, got {value}"),
        })
    }
}

fn require_nonnegative(name: &'static str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be nonnegative, got {value}"),
        })
    }
}

fn require_probability(name: &'static str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must lie in [0, 1], got {value}"),
        })
    }
}

/// Product index in a two-product system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Product {
    One,
    Two,
}

/// Poisson demand rates and substitution probabilities.
///
/// Customers for product `i` arrive at rate `lambda_i`. A customer who
/// finds product `i` out of stock while the other product is available
/// buys the substitute with probability `p_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandModel {
    lambda1: f64,
    lambda2: f64,
    p12: f64,
    p21: f64,
}

impl DemandModel {
    pub fn new(lambda1: f64, lambda2: f64, p12: f64, p21: f64) -> Result<Self> {
        require_positive("lambda1", lambda1)?;
        require_positive("lambda2", lambda2)?;
        require_probability("p12", p12)?;
        require_probability("p21", p21)?;
        Ok(Self {
            lambda1,
            lambda2,
            p12,
            p21,
        })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn p12(&self) -> f64 {
        self.p12
    }

    pub fn p21(&self) -> f64 {
        self.p21
    }

    /// Aggregate sales rates by stock situation.
    pub fn rates(&self) -> AggregateRates {
        AggregateRates {
            s: self.lambda1 + self.lambda2,
            s1: self.lambda1 + self.lambda2 * self.p21,
            s2: self.lambda2 + self.lambda1 * self.p12,
        }
    }

    /// The same system with the product labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            lambda1: self.lambda2,
            lambda2: self.lambda1,
            p12: self.p21,
            p21: self.p12,
        }
    }
}

/// Total sales rates: `s` while both products are in stock, `s1` while
/// only product 1 is left, `s2` while only product 2 is left.
///
/// `s1 = lambda1 + lambda2 * p21` picks up the share of product-2 demand
/// willing to substitute, and symmetrically for `s2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRates {
    pub s: f64,
    pub s1: f64,
    pub s2: f64,
}

/// Per-product retail price, unit cost and end-of-cycle holding cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomicParams {
    r1: f64,
    r2: f64,
    c1: f64,
    c2: f64,
    h1: f64,
    h2: f64,
}

impl EconomicParams {
    pub fn new(r1: f64, c1: f64, h1: f64, r2: f64, c2: f64, h2: f64) -> Result<Self> {
        require_nonnegative("r1", r1)?;
        require_nonnegative("c1", c1)?;
        require_nonnegative("h1", h1)?;
        require_nonnegative("r2", r2)?;
        require_nonnegative("c2", c2)?;
        require_nonnegative("h2", h2)?;
        Ok(Self {
            r1,
            r2,
            c1,
            c2,
            h1,
            h2,
        })
    }

    pub fn retail(&self, product: Product) -> f64 {
        match product {
            Product::One => self.r1,
            Product::Two => self.r2,
        }
    }

    pub fn cost(&self, product: Product) -> f64 {
        match product {
            Product::One => self.c1,
            Product::Two => self.c2,
        }
    }

    pub fn holding(&self, product: Product) -> f64 {
        match product {
            Product::One => self.h1,
            Product::Two => self.h2,
        }
    }

    /// Newsvendor critical ratio `(r - c) / (r + h)`.
    ///
    /// May be negative when the unit cost exceeds the retail price; that
    /// simply flags an unprofitable product and is not rejected here.
    pub fn critical_ratio(&self, product: Product) -> Result<f64> {
        let (r, c, h, idx) = match product {
            Product::One => (self.r1, self.c1, self.h1, 1),
            Product::Two => (self.r2, self.c2, self.h2, 2),
        };
        if r + h == 0.0 {
            return Err(Error::CriticalRatioUndefined { product: idx });
        }
        Ok((r - c) / (r + h))
    }
}

/// Order-quantity pair `(Q1, Q2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Policy {
    pub q1: u32,
    pub q2: u32,
}

impl Policy {
    pub fn new(q1: u32, q2: u32) -> Self {
        Self { q1, q2 }
    }
}

/// Linear restriction `a1*Q1 + a2*Q2 <= C` on the order quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityConstraint {
    a1: f64,
    a2: f64,
    capacity: f64,
}

impl CapacityConstraint {
    pub fn new(a1: f64, a2: f64, capacity: f64) -> Result<Self> {
        require_nonnegative("a1", a1)?;
        require_nonnegative("a2", a2)?;
        require_nonnegative("C", capacity)?;
        if a1 == 0.0 && a2 == 0.0 {
            return Err(Error::InvalidParameter {
                name: "a1, a2",
                reason: "at least one weight must be strictly positive".to_string(),
            });
        }
        Ok(Self { a1, a2, capacity })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn is_feasible(&self, policy: Policy) -> bool {
        self.a1 * f64::from(policy.q1) + self.a2 * f64::from(policy.q2) <= self.capacity
    }

    /// Largest `Q1` alone that fits, i.e. `floor(C / a1)`.
    pub fn max_q1(&self) -> Result<u32> {
        if self.a1 == 0.0 {
            return Err(Error::UnboundedRegion("a1 = 0 leaves Q1 unbounded"));
        }
        Ok(floor_quotient(self.capacity, self.a1))
    }

    /// Largest `Q2` alone that fits, i.e. `floor(C / a2)`.
    pub fn max_q2(&self) -> Result<u32> {
        if self.a2 == 0.0 {
            return Err(Error::UnboundedRegion("a2 = 0 leaves Q2 unbounded"));
        }
        Ok(floor_quotient(self.capacity, self.a2))
    }

    /// Largest `Q2` that fits together with a given `Q1`.
    pub fn max_q2_given(&self, q1: u32) -> Result<u32> {
        if self.a2 == 0.0 {
            return Err(Error::UnboundedRegion("a2 = 0 leaves Q2 unbounded"));
        }
        let remaining = self.capacity - self.a1 * f64::from(q1);
        if remaining < 0.0 {
            return Ok(0);
        }
        Ok(floor_quotient(remaining, self.a2))
    }

    /// Every feasible integer policy in lexicographic order
    /// (`Q1` ascending, then `Q2` ascending).
    pub fn enumerate_feasible(&self) -> Result<Vec<Policy>> {
        if self.a1 == 0.0 || self.a2 == 0.0 {
            return Err(Error::UnboundedRegion(
                "a zero weight leaves the corresponding quantity unbounded",
            ));
        }
        let mut policies = Vec::new();
        for q1 in 0..=self.max_q1()? {
            for q2 in 0..=self.max_q2_given(q1)? {
                policies.push(Policy::new(q1, q2));
            }
        }
        Ok(policies)
    }
}

/// `floor(c / a)` for nonnegative `c` and positive `a`, nudged so that an
/// exactly representable quotient is not lost to rounding.
pub(crate) fn floor_quotient(c: f64, a: f64) -> u32 {
    debug_assert!(a > 0.0 && c >= 0.0);
    let mut k = (c / a).floor().max(0.0) as u64;
    while (k + 1) as f64 * a <= c {
        k += 1;
    }
    while k > 0 && k as f64 * a > c {
        k -= 1;
    }
    u32::try_from(k).unwrap_or(u32::MAX)
}

/// Cycle-length regime: deterministic length `T` or exponential with
/// rate `mu` (mean `1/mu`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReplenishmentRegime {
    Fixed { t: f64 },
    Exponential { mu: f64 },
}

impl ReplenishmentRegime {
    pub fn fixed(t: f64) -> Result<Self> {
        require_positive("T", t)?;
        Ok(Self::Fixed { t })
    }

    pub fn exponential(mu: f64) -> Result<Self> {
        require_positive("mu", mu)?;
        Ok(Self::Exponential { mu })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Fixed { t } => require_positive("T", t),
            Self::Exponential { mu } => require_positive("mu", mu),
        }
    }

    pub fn mean_cycle_length(&self) -> f64 {
        match *self {
            Self::Fixed { t } => t,
            Self::Exponential { mu } => 1.0 / mu,
        }
    }
}
