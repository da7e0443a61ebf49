//! Grünwald-Letnikov weights and the discrete Caputo-GL derivative.
//!
//! The weight sequence is
//!
//! ```text
//! w₀ = 1,    w_j = w_{j-1} · (j − 1 − α) / j
//! ```
//!
//! equal to (−1)^j · binomial(α, j). For 0 < α ≤ 1 the tail weights are all
//! nonpositive and the partial sums A_n = Σ_{j≤n} w_j stay positive, which is
//! what the positivity proof of the NSFD scheme rests on. The discrete
//! Caputo-GL derivative of a uniformly sampled path x is
//!
//! ```text
//! (1/h^α) Σ_{r=0}^{k} w_r · (x_{k−r} − x₀)
//! ```
//!
//! a first-order approximation of the Caputo derivative for smooth x.

use crate::{Error, Result};

/// Fractional differentiation order α, restricted to (0, 1].
///
/// α = 1 is admitted and reproduces the classical first difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidOrder(alpha))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for FractionalOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

/// Memoized Grünwald-Letnikov weight table for one order α.
///
/// Holds w_j for j = 0..=n_max together with the running sums
/// A_n = Σ_{j=0}^{n} w_j. Both sequences are computed once by the
/// multiplicative recurrence; the product/factorial form overflows
/// beyond j ≈ 170 in 64-bit floats.
#[derive(Debug, Clone)]
pub struct GlWeights {
    alpha: FractionalOrder,
    weights: Vec<f64>,
    cumsum: Vec<f64>,
    last_nonzero: usize,
}

impl GlWeights {
    /// Computes weights and cumulative sums up to index `n_max`.
    pub fn new(alpha: FractionalOrder, n_max: usize) -> Self {
        let a = alpha.value();
        let mut weights = Vec::with_capacity(n_max + 1);
        let mut cumsum = Vec::with_capacity(n_max + 1);
        let mut w = 1.0;
        let mut acc = 1.0;
        let mut last_nonzero = 0;
        weights.push(w);
        cumsum.push(acc);
        for j in 1..=n_max {
            w *= (j as f64 - 1.0 - a) / j as f64;
            acc += w;
            weights.push(w);
            cumsum.push(acc);
            if w != 0.0 {
                last_nonzero = j;
            }
        }
        Self {
            alpha,
            weights,
            cumsum,
            last_nonzero,
        }
    }

    #[inline]
    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    /// Largest index covered by the table.
    #[inline]
    pub fn max_index(&self) -> usize {
        self.weights.len() - 1
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// A_n = Σ_{j=0}^{n} w_j, always positive for α ∈ (0, 1].
    #[inline]
    pub fn cumsum(&self) -> &[f64] {
        &self.cumsum
    }

    /// Index of the last nonzero weight. At α = 1 every weight beyond j = 1
    /// vanishes, so history sums can stop there; for α < 1 this is just the
    /// table end.
    #[inline]
    pub fn last_nonzero_index(&self) -> usize {
        self.last_nonzero
    }

    fn check_covers(&self, k: usize) -> Result<()> {
        if k > self.max_index() {
            Err(Error::WeightTableTooShort {
                needed: k,
                max: self.max_index(),
            })
        } else {
            Ok(())
        }
    }
}

/// A function sampled on a uniform time grid: `values[j] ≈ x(t0 + j·h)`.
#[derive(Debug, Clone)]
pub struct SampledPath {
    t0: f64,
    h: f64,
    values: Vec<Vec<f64>>,
}

impl SampledPath {
    pub fn new(t0: f64, h: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter {
                name: "h",
                value: h,
                reason: "step must be positive and finite",
            });
        }
        let dim = match values.first() {
            Some(v) => v.len(),
            None => {
                return Err(Error::InvalidParameter {
                    name: "values",
                    value: 0.0,
                    reason: "path needs at least one node",
                })
            }
        };
        if let Some(bad) = values.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(Self { t0, h, values })
    }

    /// Samples a scalar function at nodes t0 + j·h, j = 0..=n.
    pub fn from_fn(t0: f64, h: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..=n).map(|j| vec![f(t0 + j as f64 * h)]).collect();
        Self::new(t0, h, values)
    }

    #[inline]
    pub fn t0(&self) -> f64 {
        self.t0
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    /// Number of nodes (N + 1).
    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// Discrete Caputo-GL derivative of `path` at node k:
/// (1/h^α) Σ_{r=0}^{k} w_r · (x_{k−r} − x₀).
///
/// First-order accurate in h for C¹ paths; reduces to the backward
/// difference (x_k − x_{k−1})/h at α = 1.
pub fn discrete_caputo_gl(path: &SampledPath, weights: &GlWeights, k: usize) -> Result<Vec<f64>> {
    if k >= path.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: path.len(),
        });
    }
    weights.check_covers(k)?;

    let x0 = &path.values()[0];
    let dim = path.dim();
    let mut acc = vec![0.0; dim];
    for r in 0..=k {
        let w = weights.weights()[r];
        let x = &path.values()[k - r];
        for i in 0..dim {
            acc[i] += w * (x[i] - x0[i]);
        }
    }
    let scale = path.h().powf(weights.alpha().value());
    for a in &mut acc {
        *a /= scale;
    }
    Ok(acc)
}
