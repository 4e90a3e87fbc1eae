//! End-of-cycle inventory distribution under a fixed cycle length.
//!
//! Within a cycle the joint inventory level is a continuous-time Markov
//! chain on `{0..Q1} x {0..Q2}` started at `(Q1, Q2)`: while both
//! products are in stock the levels drop independently at rates
//! `lambda1` and `lambda2`; once one product runs out the survivor
//! drains at the boosted rate `s1` or `s2` that includes substituted
//! demand; `(0, 0)` absorbs until the next replenishment.
//!
//! Uniformizing at the total demand rate `s = lambda1 + lambda2` turns
//! the chain into a discrete-time walk whose k-step law from the full
//! corner has closed forms: interior states are reached by a fixed
//! number of down/left steps, boundary states by conditioning on the
//! first passage into the depleted row or column, and the origin closes
//! the remaining mass. [`transient_distribution`] evaluates the
//! Poisson-mixed closed forms; [`uniformization_oracle`] instead builds
//! the one-step matrix and iterates it, providing an independent
//! cross-check that shares no code path with the closed forms.

use crate::distribution::{DistributionKind, InventoryDistribution};
use crate::error::{Error, Result};
use crate::model::DemandModel;
use crate::numeric::{poisson_pmf_upto, poisson_truncation_index, LnFactTable};

/// Default truncation tolerance for the Poisson-weighted series.
pub const DEFAULT_TOL: f64 = 1e-12;

/// k-step law of the uniformized inventory walk started at `(Q1, Q2)`.
///
/// Unlike the time-`t` distribution there is no series truncation: the
/// origin entry closes the mass exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct KStepDistribution {
    q1: u32,
    q2: u32,
    k: u32,
    mass: Vec<f64>,
}

impl KStepDistribution {
    pub fn q1(&self) -> u32 {
        self.q1
    }

    pub fn q2(&self) -> u32 {
        self.q2
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn prob(&self, j1: u32, j2: u32) -> f64 {
        debug_assert!(j1 <= self.q1 && j2 <= self.q2);
        self.mass[(j1 * (self.q2 + 1) + j2) as usize]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }
}

fn validate_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

fn validate_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "t",
            reason: format!("must be finite and nonnegative, got {t}"),
        })
    }
}

/// `base^exp` for a nonnegative base where `0^0 = 1`.
#[inline]
fn zero_safe_pow(base: f64, exp: u32) -> f64 {
    if exp == 0 {
        1.0
    } else {
        base.powi(exp as i32)
    }
}

/// Exact k-step transition probabilities of the uniformized walk.
///
/// Requires `Q1, Q2 >= 1`; the first-passage boundary formulas are not
/// defined on degenerate grids (use [`transient_distribution`], which
/// reduces those to a one-product law).
pub fn kstep_probs(q1: u32, q2: u32, k: u32, d: &DemandModel) -> Result<KStepDistribution> {
    if q1 == 0 || q2 == 0 {
        return Err(Error::QuantityOutOfDomain { q1, q2 });
    }
    let rates = d.rates();
    let s = rates.s;
    let r1 = d.lambda1() / s;
    let r2 = d.lambda2() / s;
    let ratio1 = rates.s1 / s;
    let ratio2 = rates.s2 / s;
    let slack1 = (s - rates.s1) / s;
    let slack2 = (s - rates.s2) / s;

    let lf = LnFactTable::new(k as usize + (q1 + q2) as usize + 2);
    let width = (q2 + 1) as usize;
    let mut mass = vec![0.0; ((q1 + 1) * (q2 + 1)) as usize];

    // Interior: exactly Q1-j1 down-steps and Q2-j2 left-steps, no
    // self-loops possible, so only k = Q1-j1+Q2-j2 carries mass.
    for j1 in 1..=q1 {
        for j2 in 1..=q2 {
            let n = (q1 - j1) + (q2 - j2);
            if k == n {
                let ln = lf.ln_binomial(n as usize, (q1 - j1) as usize)
                    + f64::from(q1 - j1) * r1.ln()
                    + f64::from(q2 - j2) * r2.ln();
                mass[(j1 * (q2 + 1) + j2) as usize] = ln.exp();
            }
        }
    }

    // Depleted-product-2 row (j1, 0), j1 >= 1: condition on the number
    // of steps l until the first passage into the row, then count the
    // remaining down-steps among self-loops.
    for j1 in 1..=q1 {
        let m = q1 + q2 - j1;
        if k < m {
            continue;
        }
        let spow = if slack1 == 0.0 && k > m {
            continue;
        } else {
            zero_safe_pow(slack1, k - m)
        };
        let mut inner = 0.0;
        for l in q2..=m.min(k) {
            let ln = lf.ln_binomial((l - 1) as usize, (q2 - 1) as usize)
                + f64::from(q2) * r2.ln()
                + f64::from(l - q2) * r1.ln()
                + lf.ln_binomial((k - l) as usize, (m - l) as usize)
                + f64::from(m - l) * ratio1.ln();
            inner += ln.exp();
        }
        mass[(j1 * (q2 + 1)) as usize] = spow * inner;
    }

    // Depleted-product-1 column (0, j2), j2 >= 1 (first passage needs at
    // least Q1 down-steps, so l starts at Q1).
    for j2 in 1..=q2 {
        let m = q1 + q2 - j2;
        if k < m {
            continue;
        }
        let spow = if slack2 == 0.0 && k > m {
            continue;
        } else {
            zero_safe_pow(slack2, k - m)
        };
        let mut inner = 0.0;
        for l in q1..=m.min(k) {
            let ln = lf.ln_binomial((l - 1) as usize, (q1 - 1) as usize)
                + f64::from(q1) * r1.ln()
                + f64::from(l - q1) * r2.ln()
                + lf.ln_binomial((k - l) as usize, (m - l) as usize)
                + f64::from(m - l) * ratio2.ln();
            inner += ln.exp();
        }
        mass[j2 as usize] = spow * inner;
    }

    // The walk's one-step matrix is stochastic, so the origin closes the
    // mass exactly.
    let partial: f64 = mass.iter().sum();
    mass[0] = (1.0 - partial).clamp(0.0, 1.0);

    debug_assert_eq!(mass.len(), width * (q1 + 1) as usize);
    Ok(KStepDistribution { q1, q2, k, mass })
}

/// Point mass at the freshly replenished state `(Q1, Q2)`.
fn point_mass_at_full(q1: u32, q2: u32, kind: DistributionKind) -> InventoryDistribution {
    let mut mass = vec![0.0; ((q1 + 1) * (q2 + 1)) as usize];
    let last = mass.len() - 1;
    mass[last] = 1.0;
    InventoryDistribution::from_mass(q1, q2, kind, mass)
}

/// Leftover law `(q - D)^+` for a single product facing Poisson(rate*t)
/// demand, as a mass vector indexed by the leftover level.
fn one_product_leftover_pmf(q: u32, rate: f64, t: f64) -> Vec<f64> {
    let mean = rate * t;
    let mut mass = vec![0.0; (q + 1) as usize];
    if mean == 0.0 {
        // rate * t underflowed; no demand can arrive.
        mass[q as usize] = 1.0;
        return mass;
    }
    let lf = LnFactTable::new(q as usize + 1);
    let mut sold_all = 1.0;
    for j in 1..=q {
        let p = (-mean + f64::from(q - j) * mean.ln() - lf.ln_factorial((q - j) as usize)).exp();
        mass[j as usize] = p;
        sold_all -= p;
    }
    mass[0] = sold_all.clamp(0.0, 1.0);
    mass
}

/// One-product reduction for a degenerate grid (`Q1 = 0` or `Q2 = 0`).
///
/// The stocked product faces its boosted rate from time zero because
/// every arrival for the absent product immediately offers to
/// substitute.
fn one_product_transient(q1: u32, q2: u32, t: f64, d: &DemandModel) -> InventoryDistribution {
    let kind = DistributionKind::TransientAt(t);
    let rates = d.rates();
    match (q1, q2) {
        (0, 0) => InventoryDistribution::from_mass(0, 0, kind, vec![1.0]),
        (0, _) => {
            let mass = one_product_leftover_pmf(q2, rates.s2, t);
            InventoryDistribution::from_mass(0, q2, kind, mass)
        }
        (_, 0) => {
            let mass = one_product_leftover_pmf(q1, rates.s1, t);
            InventoryDistribution::from_mass(q1, 0, kind, mass)
        }
        _ => unreachable!("caller guarantees a degenerate grid"),
    }
}

/// Exact inventory distribution at time `t` into a cycle, via the
/// closed forms of the uniformized walk mixed over a Poisson(s*t)
/// number of steps.
///
/// The two boundary series are truncated at the smallest index whose
/// Poisson tail is below `tol`; everything else is a finite sum.
pub fn transient_distribution(
    q1: u32,
    q2: u32,
    t: f64,
    d: &DemandModel,
    tol: f64,
) -> Result<InventoryDistribution> {
    validate_time(t)?;
    validate_tol(tol)?;
    if q1 == 0 || q2 == 0 {
        if t == 0.0 {
            return Ok(point_mass_at_full(q1, q2, DistributionKind::TransientAt(t)));
        }
        return Ok(one_product_transient(q1, q2, t, d));
    }
    let rates = d.rates();
    let s = rates.s;
    let st = s * t;
    if st == 0.0 {
        return Ok(point_mass_at_full(q1, q2, DistributionKind::TransientAt(t)));
    }
    let ln_r1 = (d.lambda1() / s).ln();
    let ln_r2 = (d.lambda2() / s).ln();
    let ln_ratio1 = (rates.s1 / s).ln();
    let ln_ratio2 = (rates.s2 / s).ln();
    let slack1 = (s - rates.s1) / s;
    let slack2 = (s - rates.s2) / s;

    let kstar = poisson_truncation_index(st, tol, (q1 + q2) as usize);
    let lf = LnFactTable::new(kstar + (q1 + q2) as usize + 2);
    let pmf = poisson_pmf_upto(st, kstar, &lf);

    let mut mass = vec![0.0; ((q1 + 1) * (q2 + 1)) as usize];

    // Interior states: a single Poisson term each.
    for j1 in 1..=q1 {
        for j2 in 1..=q2 {
            let n = (q1 - j1) + (q2 - j2);
            let ln = lf.ln_binomial(n as usize, (q1 - j1) as usize)
                + f64::from(q1 - j1) * ln_r1
                + f64::from(q2 - j2) * ln_r2;
            mass[(j1 * (q2 + 1) + j2) as usize] = pmf[n as usize] * ln.exp();
        }
    }

    // Boundary rows. Writing v for the down-steps still owed after the
    // first passage and u for the number of self-loops, the summand
    // factors as g_v * C(u+v, v) * slack^u; C(u+v, v) is carried by a
    // multiplicative recurrence in u so only the g_v need an exp().
    let boundary = |which_row: bool, j: u32| -> f64 {
        let (qa, qb, ln_ra, ln_rb, ln_ratio, slack) = if which_row {
            (q1, q2, ln_r1, ln_r2, ln_ratio1, slack1)
        } else {
            (q2, q1, ln_r2, ln_r1, ln_ratio2, slack2)
        };
        // First passage into the depleted boundary takes l steps of
        // which qb deplete the other product; v = m - l.
        let m = qa + qb - j;
        let vmax = qa - j;
        let mut h: Vec<f64> = (0..=vmax)
            .map(|v| {
                let l = m - v;
                (lf.ln_binomial((l - 1) as usize, (qb - 1) as usize)
                    + f64::from(qb) * ln_rb
                    + f64::from(l - qb) * ln_ra
                    + f64::from(v) * ln_ratio)
                    .exp()
            })
            .collect();
        let mut acc = pmf[m as usize] * h.iter().sum::<f64>();
        if slack > 0.0 {
            let mut spow = 1.0;
            for u in 1..=(kstar - m as usize) {
                spow *= slack;
                if spow == 0.0 {
                    break;
                }
                for (v, hv) in h.iter_mut().enumerate() {
                    *hv *= (u + v) as f64 / u as f64;
                }
                acc += pmf[m as usize + u] * spow * h.iter().sum::<f64>();
            }
        }
        acc
    };

    for j1 in 1..=q1 {
        mass[(j1 * (q2 + 1)) as usize] = boundary(true, j1);
    }
    for j2 in 1..=q2 {
        mass[j2 as usize] = boundary(false, j2);
    }

    let partial: f64 = mass.iter().sum();
    mass[0] = (1.0 - partial).clamp(0.0, 1.0);

    Ok(InventoryDistribution::from_mass(
        q1,
        q2,
        DistributionKind::TransientAt(t),
        mass,
    ))
}

/// Dense one-step matrix of the uniformized walk, row-major over the
/// state index `i1 * (Q2 + 1) + i2`.
fn uniformized_matrix(q1: u32, q2: u32, d: &DemandModel) -> Vec<f64> {
    let rates = d.rates();
    let s = rates.s;
    let n = ((q1 + 1) * (q2 + 1)) as usize;
    let width = (q2 + 1) as usize;
    let mut p = vec![0.0; n * n];
    for i1 in 0..=q1 {
        for i2 in 0..=q2 {
            let row = (i1 * (q2 + 1) + i2) as usize;
            let base = row * n;
            if i1 == 0 && i2 == 0 {
                p[base + row] = 1.0;
            } else if i1 == 0 {
                p[base + row - 1] = rates.s2 / s;
                p[base + row] = (s - rates.s2) / s;
            } else if i2 == 0 {
                p[base + row - width] = rates.s1 / s;
                p[base + row] = (s - rates.s1) / s;
            } else {
                p[base + row - width] = d.lambda1() / s;
                p[base + row - 1] = d.lambda2() / s;
            }
        }
    }
    p
}

/// Transient distribution computed by explicit matrix powers of the
/// uniformized chain — the independent cross-check for
/// [`transient_distribution`]. It never touches the closed forms.
pub fn uniformization_oracle(
    q1: u32,
    q2: u32,
    t: f64,
    d: &DemandModel,
    tol: f64,
) -> Result<InventoryDistribution> {
    validate_time(t)?;
    validate_tol(tol)?;
    let rates = d.rates();
    let st = rates.s * t;
    if st == 0.0 {
        return Ok(point_mass_at_full(q1, q2, DistributionKind::TransientAt(t)));
    }
    let n = ((q1 + 1) * (q2 + 1)) as usize;
    let p = uniformized_matrix(q1, q2, d);

    let kstar = poisson_truncation_index(st, tol, 0);
    let lf = LnFactTable::new(kstar + 1);
    let pmf = poisson_pmf_upto(st, kstar, &lf);

    let mut v = vec![0.0; n];
    v[n - 1] = 1.0;
    let mut out = vec![0.0; n];
    let mut next = vec![0.0; n];
    for (k, &w) in pmf.iter().enumerate() {
        for (o, &vi) in out.iter_mut().zip(v.iter()) {
            *o += w * vi;
        }
        if k == kstar {
            break;
        }
        next.iter_mut().for_each(|x| *x = 0.0);
        for (row, &vr) in v.iter().enumerate() {
            if vr == 0.0 {
                continue;
            }
            let base = row * n;
            for (col, nx) in next.iter_mut().enumerate() {
                *nx += vr * p[base + col];
            }
        }
        std::mem::swap(&mut v, &mut next);
    }

    Ok(InventoryDistribution::from_mass(
        q1,
        q2,
        DistributionKind::TransientAt(t),
        out,
    ))
}

/// Expected leftover units `(E n1, E n2)` at time `t` into a cycle.
pub fn expected_leftover_fixed(
    q1: u32,
    q2: u32,
    t: f64,
    d: &DemandModel,
    tol: f64,
) -> Result<(f64, f64)> {
    Ok(transient_distribution(q1, q2, t, d, tol)?.expected_leftovers())
}
