//! Stationary inventory distribution under exponential cycle lengths.
//!
//! With replenishments arriving at rate `mu` the joint inventory level
//! is an ergodic continuous-time Markov chain: the within-cycle demand
//! dynamics are augmented by a rate-`mu` jump from every state back to
//! the full corner `(Q1, Q2)`. Because replenishments form a Poisson
//! process, the stationary law is also the law seen at a replenishment
//! epoch (PASTA), which is what the profit function needs.
//!
//! [`stationary_distribution`] evaluates the closed forms: interior
//! states carry a negative-binomial-like product, the two depleted
//! boundaries finite geometric convolutions, and the origin a closing
//! expression. [`balance_oracle`] independently assembles the generator
//! and solves the balance equations directly; it is the reference the
//! closed forms are tested against.

use crate::distribution::{DistributionKind, InventoryDistribution};
use crate::error::{Error, Result};
use crate::model::DemandModel;
use crate::numeric::LnFactTable;

/// Grid size beyond which [`balance_oracle`] switches from a dense
/// direct solve to a matrix-free power iteration.
pub const DEFAULT_DENSE_THRESHOLD: usize = 4000;

/// Dimensionless ratios appearing in the stationary closed forms.
///
/// `q1 + q2 + q3 = 1` splits each uniformized step into a product-1
/// demand, a product-2 demand or a replenishment; `a1`/`a2` are the
/// single-product survival odds and `b1`/`b2` the entry weights into a
/// depleted boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryConstants {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl StationaryConstants {
    pub fn new(d: &DemandModel, mu: f64) -> Result<Self> {
        validate_mu(mu)?;
        let rates = d.rates();
        Ok(Self {
            q1: d.lambda1() / (rates.s + mu),
            q2: d.lambda2() / (rates.s + mu),
            q3: mu / (rates.s + mu),
            a1: rates.s1 / (rates.s1 + mu),
            a2: rates.s2 / (rates.s2 + mu),
            b1: d.lambda1() / (rates.s2 + mu),
            b2: d.lambda2() / (rates.s1 + mu),
        })
    }
}

fn validate_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "mu",
            reason: format!("must be strictly positive, got {mu}"),
        })
    }
}

/// Truncated-geometric stationary law of a single product draining at
/// `rate` with replenishment rate `mu`, indexed by the leftover level.
fn one_product_stationary_pmf(q: u32, rate: f64, mu: f64) -> Vec<f64> {
    let a = rate / (rate + mu);
    let mut mass = vec![0.0; (q + 1) as usize];
    let mut apow = 1.0;
    for i in 0..q {
        mass[(q - i) as usize] = apow * (1.0 - a);
        apow *= a;
    }
    mass[0] = apow; // a^q
    mass
}

fn one_product_stationary(q1: u32, q2: u32, d: &DemandModel, mu: f64) -> InventoryDistribution {
    let rates = d.rates();
    match (q1, q2) {
        (0, 0) => InventoryDistribution::from_mass(0, 0, DistributionKind::Stationary, vec![1.0]),
        (0, _) => {
            let mass = one_product_stationary_pmf(q2, rates.s2, mu);
            InventoryDistribution::from_mass(0, q2, DistributionKind::Stationary, mass)
        }
        (_, 0) => {
            let mass = one_product_stationary_pmf(q1, rates.s1, mu);
            InventoryDistribution::from_mass(q1, 0, DistributionKind::Stationary, mass)
        }
        _ => unreachable!("caller guarantees a degenerate grid"),
    }
}

/// Convolution masses along a depleted boundary, outermost state first.
///
/// Entry `i` equals `sum_{k<=i} a^(i-k) * exp(prefix + k*ln_q + ln C(q_other-1+k, k))`,
/// accumulated by the linear recurrence `S(i) = a*S(i-1) + y_i`.
fn boundary_masses(
    prefix_ln: f64,
    ln_q_own: f64,
    a: f64,
    count: u32,
    q_other: u32,
    lf: &LnFactTable,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(count as usize);
    let mut s = 0.0;
    for k in 0..count {
        let y = (prefix_ln
            + f64::from(k) * ln_q_own
            + lf.ln_binomial((q_other - 1 + k) as usize, k as usize))
        .exp();
        s = a * s + y;
        out.push(s);
    }
    out
}

/// Closed-form stationary distribution of the inventory chain.
///
/// Degenerate grids (`Q1 = 0` or `Q2 = 0`) reduce to the one-product
/// truncated geometric. The result sums to one up to rounding; no
/// series truncation is involved.
pub fn stationary_distribution(
    q1: u32,
    q2: u32,
    d: &DemandModel,
    mu: f64,
) -> Result<InventoryDistribution> {
    validate_mu(mu)?;
    if q1 == 0 || q2 == 0 {
        return Ok(one_product_stationary(q1, q2, d, mu));
    }
    let c = StationaryConstants::new(d, mu)?;
    let rates = d.rates();
    let lf = LnFactTable::new((q1 + q2) as usize);
    let ln_q1 = c.q1.ln();
    let ln_q2 = c.q2.ln();

    let width = (q2 + 1) as usize;
    let mut mass = vec![0.0; ((q1 + 1) * (q2 + 1)) as usize];

    // Interior states (both levels >= 1): i1 and i2 units sold since the
    // last replenishment, in any interleaving.
    for i1 in 0..q1 {
        for i2 in 0..q2 {
            let powers = f64::from(i1) * ln_q1 + f64::from(i2) * ln_q2;
            let term = (lf.ln_binomial((i1 + i2) as usize, i1 as usize) + powers).exp() * c.q3;
            mass[((q1 - i1) as usize) * width + (q2 - i2) as usize] = term;
        }
    }

    // Depleted boundaries.
    let prefix_bottom = c.b2.ln() + f64::from(q2 - 1) * ln_q2 + c.q3.ln();
    let bottom = boundary_masses(prefix_bottom, ln_q1, c.a1, q1, q2, &lf);
    for (i1, &pi) in bottom.iter().enumerate() {
        mass[(q1 as usize - i1) * width] = pi;
    }
    let prefix_left = c.b1.ln() + f64::from(q1 - 1) * ln_q1 + c.q3.ln();
    let left = boundary_masses(prefix_left, ln_q2, c.a2, q2, q1, &lf);
    for (i2, &pi) in left.iter().enumerate() {
        mass[q2 as usize - i2] = pi;
    }

    // Origin: balance against the two neighbouring boundary states.
    mass[0] = (rates.s1 / mu) * bottom[q1 as usize - 1] + (rates.s2 / mu) * left[q2 as usize - 1];

    debug_assert!((mass.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    Ok(InventoryDistribution::from_mass(
        q1,
        q2,
        DistributionKind::Stationary,
        mass,
    ))
}

/// Net transition rates of the replenished chain, as a dense row-major
/// generator. The corner's replenishment self-loop nets out, so its
/// diagonal only carries the demand outflow.
fn generator(q1: u32, q2: u32, d: &DemandModel, mu: f64) -> Vec<f64> {
    let rates = d.rates();
    let n = ((q1 + 1) * (q2 + 1)) as usize;
    let width = (q2 + 1) as usize;
    let corner = n - 1;
    let mut g = vec![0.0; n * n];
    for i1 in 0..=q1 {
        for i2 in 0..=q2 {
            let row = (i1 * (q2 + 1) + i2) as usize;
            let base = row * n;
            let mut outflow = 0.0;
            if i1 >= 1 && i2 >= 1 {
                g[base + row - width] += d.lambda1();
                g[base + row - 1] += d.lambda2();
                outflow += rates.s;
            } else if i1 >= 1 {
                g[base + row - width] += rates.s1;
                outflow += rates.s1;
            } else if i2 >= 1 {
                g[base + row - 1] += rates.s2;
                outflow += rates.s2;
            }
            if row != corner {
                g[base + corner] += mu;
                outflow += mu;
            }
            g[base + row] -= outflow;
        }
    }
    g
}

/// Dense direct solve of `pi * G = 0` with the normalization replacing
/// the last balance equation. Gaussian elimination, partial pivoting.
fn solve_balance_dense(g: &[f64], n: usize) -> Result<Vec<f64>> {
    // Row i of `a` is the balance equation of state i (column i of G).
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = g[j * n + i];
        }
    }
    let mut b = vec![0.0; n];
    for j in 0..n {
        a[(n - 1) * n + j] = 1.0;
    }
    b[n - 1] = 1.0;

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                a[r1 * n + col]
                    .abs()
                    .partial_cmp(&a[r2 * n + col].abs())
                    .unwrap()
            })
            .unwrap();
        if a[pivot_row * n + col].abs() < 1e-300 {
            return Err(Error::SingularBalanceSystem);
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in row + 1..n {
            acc -= a[row * n + j] * x[j];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

/// Matrix-free power iteration on the uniformized chain, for grids too
/// large to solve densely. Intended as a test oracle, not a production
/// path; iteration stops at a sup-norm change below 1e-14.
fn solve_balance_power(q1: u32, q2: u32, d: &DemandModel, mu: f64) -> Vec<f64> {
    let rates = d.rates();
    let uniform_rate = rates.s + mu;
    let n = ((q1 + 1) * (q2 + 1)) as usize;
    let width = (q2 + 1) as usize;
    let corner = n - 1;
    let mut v = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..2_000_000u32 {
        next.iter_mut().for_each(|x| *x = 0.0);
        for i1 in 0..=q1 {
            for i2 in 0..=q2 {
                let row = (i1 * (q2 + 1) + i2) as usize;
                let weight = v[row];
                if weight == 0.0 {
                    continue;
                }
                let mut stay = 1.0;
                if i1 >= 1 && i2 >= 1 {
                    next[row - width] += weight * d.lambda1() / uniform_rate;
                    next[row - 1] += weight * d.lambda2() / uniform_rate;
                    stay -= rates.s / uniform_rate;
                } else if i1 >= 1 {
                    next[row - width] += weight * rates.s1 / uniform_rate;
                    stay -= rates.s1 / uniform_rate;
                } else if i2 >= 1 {
                    next[row - 1] += weight * rates.s2 / uniform_rate;
                    stay -= rates.s2 / uniform_rate;
                }
                if row != corner {
                    next[corner] += weight * mu / uniform_rate;
                    stay -= mu / uniform_rate;
                }
                next[row] += weight * stay;
            }
        }
        let delta = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if delta < 1e-14 {
            break;
        }
    }
    v
}

/// Stationary distribution obtained directly from the balance
/// equations — the independent cross-check for
/// [`stationary_distribution`]. Handles every grid including `Q_i = 0`.
pub fn balance_oracle(q1: u32, q2: u32, d: &DemandModel, mu: f64) -> Result<InventoryDistribution> {
    balance_oracle_with_threshold(q1, q2, d, mu, DEFAULT_DENSE_THRESHOLD)
}

/// [`balance_oracle`] with an explicit dense-solve state-count limit.
pub fn balance_oracle_with_threshold(
    q1: u32,
    q2: u32,
    d: &DemandModel,
    mu: f64,
    dense_threshold: usize,
) -> Result<InventoryDistribution> {
    validate_mu(mu)?;
    let n = ((q1 + 1) * (q2 + 1)) as usize;
    let mass = if n <= dense_threshold {
        let g = generator(q1, q2, d, mu);
        solve_balance_dense(&g, n)?
    } else {
        solve_balance_power(q1, q2, d, mu)
    };
    Ok(InventoryDistribution::from_mass(
        q1,
        q2,
        DistributionKind::Stationary,
        mass,
    ))
}

/// Expected leftover units `(E m1, E m2)` at a replenishment epoch.
pub fn expected_leftover_random(q1: u32, q2: u32, d: &DemandModel, mu: f64) -> Result<(f64, f64)> {
    Ok(stationary_distribution(q1, q2, d, mu)?.expected_leftovers())
}
