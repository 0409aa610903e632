//! Signed weighted belief network of a single agent.
//!
//! A network is complete: every unordered pair of distinct concepts carries a
//! weight in `[-1, 1]`. Triad energy follows structural balance (a triad is
//! balanced when the product of its three edges is positive), and internal
//! dissonance is the mean triad energy.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a concept node, local to one belief network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConceptId(pub usize);

impl ConceptId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Number of unordered triples over `n` concepts.
pub fn triad_count(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// Every unordered concept triple `(x, y, z)` with `x < y < z`, each exactly once.
pub fn triads(n: usize) -> impl Iterator<Item = (ConceptId, ConceptId, ConceptId)> {
    (0..n).flat_map(move |x| {
        (x + 1..n).flat_map(move |y| (y + 1..n).map(move |z| (ConceptId(x), ConceptId(y), ConceptId(z))))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefNetwork {
    n: usize,
    // Row-major n*n, kept symmetric. The diagonal stays zero.
    weights: Vec<f64>,
    fixed: Vec<bool>,
}

impl BeliefNetwork {
    /// A network of `n` concepts with every belief at zero and nothing fixed.
    pub fn new(n: usize) -> Self {
        BeliefNetwork {
            n,
            weights: vec![0.0; n * n],
            fixed: vec![false; n * n],
        }
    }

    /// Builds a network from the upper-triangle weights listed pair by pair
    /// in `(0,1), (0,2), ..., (1,2), ...` order. Values are clipped to `[-1, 1]`.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if upper.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "expected {expected} upper-triangle weights for {n} concepts, got {}",
                upper.len()
            )));
        }
        let mut net = BeliefNetwork::new(n);
        let mut it = upper.iter();
        for x in 0..n {
            for y in x + 1..n {
                let w = *it.next().unwrap();
                net.store(x, y, clip(w));
            }
        }
        Ok(net)
    }

    #[inline]
    pub fn n_concepts(&self) -> usize {
        self.n
    }

    #[inline]
    fn store(&mut self, x: usize, y: usize, w: f64) {
        self.weights[x * self.n + y] = w;
        self.weights[y * self.n + x] = w;
    }

    fn check_pair(&self, x: ConceptId, y: ConceptId) -> Result<()> {
        if x.0 >= self.n || y.0 >= self.n {
            return Err(Error::InvalidArgument(format!(
                "concept out of range: ({x}, {y}) with {} concepts",
                self.n
            )));
        }
        if x == y {
            return Err(Error::InvalidArgument(format!("self-edge ({x}, {y}) has no belief")));
        }
        Ok(())
    }

    /// Weight of the belief linking `x` and `y`.
    ///
    /// Panics if either id is out of range. `x == y` reads the unused diagonal.
    #[inline]
    pub fn weight(&self, x: ConceptId, y: ConceptId) -> f64 {
        self.weights[x.0 * self.n + y.0]
    }

    pub fn try_weight(&self, x: ConceptId, y: ConceptId) -> Result<f64> {
        self.check_pair(x, y)?;
        Ok(self.weight(x, y))
    }

    #[inline]
    pub fn is_fixed(&self, x: ConceptId, y: ConceptId) -> bool {
        self.fixed[x.0 * self.n + y.0]
    }

    /// Sets a belief outright (clipped) and marks it immutable for all later updates.
    pub fn fix_belief(&mut self, x: ConceptId, y: ConceptId, value: f64) -> Result<()> {
        self.check_pair(x, y)?;
        self.store(x.0, y.0, clip(value));
        self.fixed[x.0 * self.n + y.0] = true;
        self.fixed[y.0 * self.n + x.0] = true;
        Ok(())
    }

    /// Overwrites a non-fixed belief (clipped). Fixed beliefs are left untouched.
    pub fn set_belief(&mut self, x: ConceptId, y: ConceptId, value: f64) -> Result<()> {
        self.check_pair(x, y)?;
        if !self.is_fixed(x, y) {
            self.store(x.0, y.0, clip(value));
        }
        Ok(())
    }

    /// Energy of the triad `(x, y, z)`: the negated product of its three beliefs.
    pub fn triad_energy(&self, x: ConceptId, y: ConceptId, z: ConceptId) -> Result<f64> {
        self.check_pair(x, y)?;
        self.check_pair(x, z)?;
        self.check_pair(y, z)?;
        Ok(-self.weight(x, y) * self.weight(x, z) * self.weight(y, z))
    }

    /// Mean triad energy over all `C(n, 3)` triads.
    pub fn dissonance(&self) -> Result<f64> {
        let count = triad_count(self.n);
        if count == 0 {
            return Err(Error::Domain(format!(
                "dissonance needs at least 3 concepts, network has {}",
                self.n
            )));
        }
        let n = self.n;
        let w = &self.weights;
        let mut total = 0.0;
        for x in 0..n {
            for y in x + 1..n {
                let wxy = w[x * n + y];
                let mut inner = 0.0;
                for z in y + 1..n {
                    inner += w[x * n + z] * w[y * n + z];
                }
                total += wxy * inner;
            }
        }
        Ok(-total / count as f64)
    }

    /// Partial derivative of [`dissonance`](Self::dissonance) with respect to
    /// the belief `(x, y)`: `-(1/|T|) * sum_z b(x,z) b(y,z)`.
    pub fn dissonance_gradient(&self, x: ConceptId, y: ConceptId) -> Result<f64> {
        self.check_pair(x, y)?;
        let count = triad_count(self.n);
        if count == 0 {
            return Err(Error::Domain(format!(
                "dissonance needs at least 3 concepts, network has {}",
                self.n
            )));
        }
        let n = self.n;
        let row_x = &self.weights[x.0 * n..(x.0 + 1) * n];
        let row_y = &self.weights[y.0 * n..(y.0 + 1) * n];
        let mut sum = 0.0;
        for z in 0..n {
            if z != x.0 && z != y.0 {
                sum += row_x[z] * row_y[z];
            }
        }
        Ok(-sum / count as f64)
    }

    /// Adds `delta` to the belief `(x, y)` and clips to `[-1, 1]`, returning
    /// the resulting weight. Fixed beliefs are left unchanged and their
    /// current weight is returned.
    pub fn set_belief_clipped(&mut self, x: ConceptId, y: ConceptId, delta: f64) -> Result<f64> {
        self.check_pair(x, y)?;
        if self.is_fixed(x, y) {
            return Ok(self.weight(x, y));
        }
        let updated = clip(self.weight(x, y) + delta);
        self.store(x.0, y.0, updated);
        Ok(updated)
    }

    /// Weights of the beliefs incident to `x`, indexed by concept. The entry
    /// for `x` itself is always zero.
    #[inline]
    pub fn row(&self, x: ConceptId) -> &[f64] {
        &self.weights[x.0 * self.n..(x.0 + 1) * self.n]
    }

    /// Upper-triangle weights in `(0,1), (0,2), ..., (1,2), ...` order.
    pub fn upper(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
            .map(|(x, y)| self.weights[x * n + y])
            .collect()
    }
}

/// Clips a belief weight to `[-1, 1]`.
#[inline]
pub fn clip(w: f64) -> f64 {
    w.clamp(-1.0, 1.0)
}
