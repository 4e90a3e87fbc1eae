//! Log-space combinatorics and Poisson series helpers.
//!
//! Binomial coefficients and rate-ratio powers are combined in log space
//! and exponentiated once per term, so grids with several hundred units
//! per product stay well inside `f64` range.

/// Table of `ln(n!)` for `n = 0..=max_n`, built with compensated
/// summation so downstream binomials keep full double precision.
pub(crate) struct LnFactTable {
    table: Vec<f64>,
}

impl LnFactTable {
    pub fn new(max_n: usize) -> Self {
        let mut table = Vec::with_capacity(max_n + 1);
        table.push(0.0);
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for i in 1..=max_n {
            let y = (i as f64).ln() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            table.push(sum);
        }
        Self { table }
    }

    #[inline]
    pub fn ln_factorial(&self, n: usize) -> f64 {
        self.table[n]
    }

    /// `ln C(n, k)` for `k <= n`. The two subtrahends are added first so
    /// the result is bitwise symmetric in `k` and `n - k`.
    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        debug_assert!(k <= n, "binomial index {k} out of range for n = {n}");
        self.table[n] - (self.table[k] + self.table[n - k])
    }
}

/// `ln` of the Poisson pmf at `k` for a strictly positive mean.
#[inline]
pub(crate) fn ln_poisson_pmf(k: usize, mean: f64, lf: &LnFactTable) -> f64 {
    debug_assert!(mean > 0.0);
    -mean + k as f64 * mean.ln() - lf.ln_factorial(k)
}

/// Smallest `K >= at_least` such that the Poisson(`mean`) upper tail
/// beyond `K` is provably below `tol`.
///
/// Uses the geometric bound `P(X > K) <= pmf(K+1) * (K+2) / (K+2-mean)`,
/// valid once `K + 1 > mean`.
pub(crate) fn poisson_truncation_index(mean: f64, tol: f64, at_least: usize) -> usize {
    debug_assert!(mean > 0.0 && tol > 0.0);
    let start = at_least.max(mean.ceil() as usize);
    // Streaming ln(k!) so no table has to be sized in advance.
    let mut ln_fact = 0.0f64;
    for i in 1..=start + 1 {
        ln_fact += (i as f64).ln();
    }
    let ln_mean = mean.ln();
    let mut k = start;
    loop {
        // ln_fact currently holds ln((k+1)!).
        let ln_pmf_next = -mean + (k + 1) as f64 * ln_mean - ln_fact;
        let bound = ln_pmf_next.exp() * (k as f64 + 2.0) / (k as f64 + 2.0 - mean);
        if bound < tol {
            return k;
        }
        k += 1;
        ln_fact += (k as f64 + 1.0).ln();
    }
}

/// Poisson pmf values for `k = 0..=kmax`.
pub(crate) fn poisson_pmf_upto(mean: f64, kmax: usize, lf: &LnFactTable) -> Vec<f64> {
    (0..=kmax)
        .map(|k| ln_poisson_pmf(k, mean, lf).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_matches_direct_products() {
        let lf = LnFactTable::new(20);
        let mut fact = 1.0f64;
        for n in 1..=20usize {
            fact *= n as f64;
            assert!((lf.ln_factorial(n) - fact.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn ln_binomial_is_symmetric_bitwise() {
        let lf = LnFactTable::new(600);
        for &(n, k) in &[(600usize, 250usize), (123, 7), (40, 20), (5, 0)] {
            assert_eq!(lf.ln_binomial(n, k), lf.ln_binomial(n, n - k));
        }
        assert!((lf.ln_binomial(5, 2).exp() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_index_controls_the_tail() {
        let lf = LnFactTable::new(2000);
        for &mean in &[0.3, 4.0, 40.0, 80.0] {
            let kstar = poisson_truncation_index(mean, 1e-12, 0);
            let pmf = poisson_pmf_upto(mean, kstar, &lf);
            let head: f64 = pmf.iter().sum();
            assert!(
                1.0 - head < 1e-12,
                "mean {mean}: tail {} too big",
                1.0 - head
            );
        }
    }

    #[test]
    fn truncation_index_respects_lower_bound() {
        assert!(poisson_truncation_index(1.0, 1e-10, 50) >= 50);
    }
}
