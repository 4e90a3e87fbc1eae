//! Probability mass over the inventory grid `{0..Q1} x {0..Q2}`.

/// Whether a distribution describes the inventory at a point in time
/// within a cycle or the long-run stationary law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionKind {
    TransientAt(f64),
    Stationary,
}

/// Joint probability mass of the two inventory levels.
///
/// Entries are stored row-major by the product-1 level: the state
/// `(j1, j2)` lives at index `j1 * (Q2 + 1) + j2`. Construction clamps
/// tiny negative rounding residue (>= -1e-12) to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct InventoryDistribution {
    q1: u32,
    q2: u32,
    kind: DistributionKind,
    mass: Vec<f64>,
}

impl InventoryDistribution {
    pub(crate) fn from_mass(q1: u32, q2: u32, kind: DistributionKind, mut mass: Vec<f64>) -> Self {
        debug_assert_eq!(mass.len(), ((q1 + 1) * (q2 + 1)) as usize);
        for m in &mut mass {
            debug_assert!(*m >= -1e-12, "mass entry {m} below rounding allowance");
            if *m < 0.0 {
                *m = 0.0;
            }
        }
        Self { q1, q2, kind, mass }
    }

    pub fn q1(&self) -> u32 {
        self.q1
    }

    pub fn q2(&self) -> u32 {
        self.q2
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    #[inline]
    pub(crate) fn index(&self, j1: u32, j2: u32) -> usize {
        debug_assert!(j1 <= self.q1 && j2 <= self.q2);
        (j1 * (self.q2 + 1) + j2) as usize
    }

    /// `P(n1 = j1, n2 = j2)`.
    pub fn prob(&self, j1: u32, j2: u32) -> f64 {
        self.mass[self.index(j1, j2)]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Marginal law of the product-1 level.
    pub fn marginal1(&self) -> Vec<f64> {
        let mut out = vec![0.0; (self.q1 + 1) as usize];
        for j1 in 0..=self.q1 {
            for j2 in 0..=self.q2 {
                out[j1 as usize] += self.prob(j1, j2);
            }
        }
        out
    }

    /// Marginal law of the product-2 level.
    pub fn marginal2(&self) -> Vec<f64> {
        let mut out = vec![0.0; (self.q2 + 1) as usize];
        for j1 in 0..=self.q1 {
            for j2 in 0..=self.q2 {
                out[j2 as usize] += self.prob(j1, j2);
            }
        }
        out
    }

    /// Expected leftover units of each product.
    pub fn expected_leftovers(&self) -> (f64, f64) {
        let mut e1 = 0.0;
        let mut e2 = 0.0;
        for j1 in 0..=self.q1 {
            for j2 in 0..=self.q2 {
                let p = self.prob(j1, j2);
                e1 += f64::from(j1) * p;
                e2 += f64::from(j2) * p;
            }
        }
        (e1, e2)
    }

    /// Largest absolute per-state difference against another distribution
    /// on the same grid.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.q1, self.q2), (other.q1, other.q2), "grid mismatch");
        self.mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
