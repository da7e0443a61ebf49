//! Systems in positivity-decomposed form f(x) = f₊(x) − x ⊙ f₋(x).
//!
//! Models supply the split parts explicitly; f₊ and f₋ must be nonnegative
//! on the nonnegative orthant for the NSFD positivity guarantee to apply.
//! That contract is audited by sampling validators rather than enforced per
//! call. Two built-in models are shipped: a two-species toy system and a
//! Holling type-II predator-prey model with predator harvesting.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub type VectorFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MatrixFn = Box<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

/// Relative tolerance for the split-consistency audit.
pub const DECOMP_REL_TOL: f64 = 1e-10;
/// Slack allowed on sign checks (f₊, f₋, boundary values, monotone gaps).
pub const SIGN_TOL: f64 = 1e-12;
/// Default sampling box edge for the validators.
pub const DEFAULT_BOX_MAX: f64 = 10.0;

/// A dimension-m system given by its split evaluators.
///
/// Evaluators must be pure; systems are immutable after construction and
/// can be shared across concurrent solver runs.
pub struct DecomposedSystem {
    name: String,
    dim: usize,
    params: BTreeMap<String, f64>,
    f_plus: VectorFn,
    f_minus: VectorFn,
    full: Option<VectorFn>,
    jacobian: Option<MatrixFn>,
}

impl DecomposedSystem {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        params: BTreeMap<String, f64>,
        f_plus: VectorFn,
        f_minus: VectorFn,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            params,
            f_plus,
            f_minus,
            full: None,
            jacobian: None,
        }
    }

    pub fn with_full(mut self, full: VectorFn) -> Self {
        self.full = Some(full);
        self
    }

    pub fn with_jacobian(mut self, jacobian: MatrixFn) -> Self {
        self.jacobian = Some(jacobian);
        self
    }

    #[inline]
    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// f₊(x), the gain part, evaluated at the previous level by the NSFD scheme.
    #[inline]
    pub fn f_plus(&self, x: &[f64]) -> Vec<f64> {
        (self.f_plus)(x)
    }

    /// f₋(x), the per-unit loss rate multiplying x componentwise.
    #[inline]
    pub fn f_minus(&self, x: &[f64]) -> Vec<f64> {
        (self.f_minus)(x)
    }

    #[inline]
    pub fn has_full(&self) -> bool {
        self.full.is_some()
    }

    /// Full right-hand side f(x); errors when the model only supplies the split.
    pub fn f_full(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.full {
            Some(f) => Ok(f(x)),
            None => Err(Error::MissingFullField(self.name.clone())),
        }
    }

    /// Analytic Jacobian when the model provides one.
    pub fn analytic_jacobian(&self, x: &[f64]) -> Option<Vec<Vec<f64>>> {
        self.jacobian.as_ref().map(|j| j(x))
    }

    /// Analytic Jacobian if present, otherwise central differences with
    /// step 1e-6·(1 + |x|).
    pub fn jacobian_at(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if let Some(j) = self.analytic_jacobian(x) {
            return Ok(j);
        }
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        jacobian_fd(self, x, 1e-6 * (1.0 + scale))
    }
}

impl std::fmt::Debug for DecomposedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DecomposedSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("params", &self.params)
            .field("has_full", &self.full.is_some())
            .field("has_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

/// Parameters of the predator-prey model with Holling type-II response and
/// constant-effort predator harvesting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredatorPreyParams {
    /// Intrinsic prey growth rate (1/time).
    pub s: f64,
    /// Prey carrying capacity.
    pub k: f64,
    /// Maximal predator consumption rate (1/time).
    pub q: f64,
    /// Handling time (1/prey).
    pub q1: f64,
    /// Conversion factor, captured prey to newborn predators.
    pub beta: f64,
    /// Predator death rate (1/time).
    pub s0: f64,
    /// Harvesting effort (1/time).
    pub e: f64,
}

impl PredatorPreyParams {
    pub fn new(s: f64, k: f64, q: f64, q1: f64, beta: f64, s0: f64, e: f64) -> Result<Self> {
        let positive = [
            ("s", s),
            ("K", k),
            ("q", q),
            ("beta", beta),
            ("s0", s0),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        let nonnegative = [("q1", q1), ("E", e)];
        for (name, value) in nonnegative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be nonnegative",
                });
            }
        }
        Ok(Self {
            s,
            k,
            q,
            q1,
            beta,
            s0,
            e,
        })
    }

    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &'static str| {
            map.get(key).copied().ok_or(Error::InvalidParameter {
                name: key,
                value: f64::NAN,
                reason: "missing parameter",
            })
        };
        Self::new(
            get("s")?,
            get("K")?,
            get("q")?,
            get("q1")?,
            get("beta")?,
            get("s0")?,
            get("E")?,
        )
    }

    pub fn to_map(self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("s".to_string(), self.s),
            ("K".to_string(), self.k),
            ("q".to_string(), self.q),
            ("q1".to_string(), self.q1),
            ("beta".to_string(), self.beta),
            ("s0".to_string(), self.s0),
            ("E".to_string(), self.e),
        ])
    }
}

/// Parameters of the two-species toy model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ToyModelParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, value) in [("a", a), ("b", b), ("c", c)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be nonnegative for the positivity contract",
                });
            }
        }
        Ok(Self { a, b, c })
    }

    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &'static str| {
            map.get(key).copied().ok_or(Error::InvalidParameter {
                name: key,
                value: f64::NAN,
                reason: "missing parameter",
            })
        };
        Self::new(get("a")?, get("b")?, get("c")?)
    }

    pub fn to_map(self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("a".to_string(), self.a),
            ("b".to_string(), self.b),
            ("c".to_string(), self.c),
        ])
    }
}

/// Builds the predator-prey system
///
/// ```text
/// f₁ = s·x·(1 − x/K) − q·x·y/(1 + q1·x)
/// f₂ = β·x·y/(1 + q1·x) − (s0 + E)·y
/// ```
///
/// split as f₊ = (s·x, β·x·y/(1+q1·x)) and
/// f₋ = (s·x/K + q·y/(1+q1·x), s0 + E), with an analytic Jacobian.
pub fn predator_prey_system(p: PredatorPreyParams) -> DecomposedSystem {
    let PredatorPreyParams {
        s,
        k,
        q,
        q1,
        beta,
        s0,
        e,
    } = p;
    let f_plus: VectorFn = Box::new(move |x: &[f64]| {
        let u = 1.0 + q1 * x[0];
        vec![s * x[0], beta * x[0] * x[1] / u]
    });
    let f_minus: VectorFn = Box::new(move |x: &[f64]| {
        let u = 1.0 + q1 * x[0];
        vec![s * x[0] / k + q * x[1] / u, s0 + e]
    });
    let full: VectorFn = Box::new(move |x: &[f64]| {
        let u = 1.0 + q1 * x[0];
        vec![
            s * x[0] * (1.0 - x[0] / k) - q * x[0] * x[1] / u,
            beta * x[0] * x[1] / u - (s0 + e) * x[1],
        ]
    });
    let jac: MatrixFn = Box::new(move |x: &[f64]| {
        let u = 1.0 + q1 * x[0];
        vec![
            vec![
                s - 2.0 * s * x[0] / k - q * x[1] / (u * u),
                -q * x[0] / u,
            ],
            vec![beta * x[1] / (u * u), beta * x[0] / u - (s0 + e)],
        ]
    });
    DecomposedSystem::new("predator_prey", 2, p.to_map(), f_plus, f_minus)
        .with_full(full)
        .with_jacobian(jac)
}

/// Builds the toy system
///
/// ```text
/// f₁ = b·x·(1 − x) − a·x·y/(1 + x)
/// f₂ = x·y/(1 + x) − c·y
/// ```
///
/// split as f₊ = (b·x, x·y/(1+x)) and f₋ = (b·x + a·y/(1+x), c). The split
/// mirrors the predator-prey pattern: growth terms in f₊, loss rates in f₋.
pub fn toy_system(p: ToyModelParams) -> DecomposedSystem {
    let ToyModelParams { a, b, c } = p;
    let f_plus: VectorFn = Box::new(move |x: &[f64]| {
        let u = 1.0 + x[0];
        vec![b * x[0], x[0] * x[1] / u]
    });
    let f_minus: VectorFn = Box::new(move |x: &[f64]| {
        let u = 1.0 + x[0];
        vec![b * x[0] + a * x[1] / u, c]
    });
    let full: VectorFn = Box::new(move |x: &[f64]| {
        let u = 1.0 + x[0];
        vec![
            b * x[0] * (1.0 - x[0]) - a * x[0] * x[1] / u,
            x[0] * x[1] / u - c * x[1],
        ]
    });
    let jac: MatrixFn = Box::new(move |x: &[f64]| {
        let u = 1.0 + x[0];
        vec![
            vec![b - 2.0 * b * x[0] - a * x[1] / (u * u), -a * x[0] / u],
            vec![x[1] / (u * u), x[0] / u - c],
        ]
    });
    DecomposedSystem::new("toy", 2, p.to_map(), f_plus, f_minus)
        .with_full(full)
        .with_jacobian(jac)
}

/// Names accepted by [`build_model`].
pub const MODEL_NAMES: &[&str] = &["predator_prey", "toy"];

/// Default parameter sets used when the caller supplies none.
pub fn default_params(name: &str) -> Result<BTreeMap<String, f64>> {
    match name {
        "predator_prey" => {
            Ok(PredatorPreyParams::new(0.1, 5.0, 1.0, 2.0, 5.0, 0.7, 0.3)?.to_map())
        }
        "toy" => Ok(ToyModelParams::new(2.0, 1.0, 6.0)?.to_map()),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Instantiates a built-in model from its registry name and a parameter map.
/// Missing keys fall back to the model defaults.
pub fn build_model(name: &str, params: &BTreeMap<String, f64>) -> Result<DecomposedSystem> {
    let mut merged = default_params(name)?;
    for (key, value) in params {
        if !merged.contains_key(key) {
            return Err(Error::InvalidParameter {
                name: "set",
                value: *value,
                reason: "unknown parameter key for this model",
            });
        }
        merged.insert(key.clone(), *value);
    }
    match name {
        "predator_prey" => Ok(predator_prey_system(PredatorPreyParams::from_map(&merged)?)),
        "toy" => Ok(toy_system(ToyModelParams::from_map(&merged)?)),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Outcome of a sampling validator run.
///
/// Validators are probabilistic auditors with fixed seeds, not proofs:
/// they draw points from [0, box_max]^m and report the worst case seen.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// Which audit produced the report.
    pub check: &'static str,
    pub n_samples: usize,
    pub passed: bool,
    /// Max over samples of componentwise |f − (f₊ − x⊙f₋)| / (1 + |f|∞).
    pub max_split_residual: Option<f64>,
    /// Min componentwise value of f₊ over sampled x ≥ 0.
    pub min_f_plus: Option<f64>,
    /// Min componentwise value of f₋ over sampled x ≥ 0.
    pub min_f_minus: Option<f64>,
    /// Min of f_i over sampled boundary points with x_i = 0.
    pub min_boundary_f: Option<f64>,
    /// Min of f_i(x) − f_i(y) over sampled ordered pairs with x_i = y_i.
    pub min_monotone_gap: Option<f64>,
    pub findings: Vec<String>,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{} check over {} samples: {}",
            self.check,
            self.n_samples,
            if self.passed { "PASS" } else { "FAIL" }
        )?;
        if let Some(v) = self.max_split_residual {
            writeln!(f, "  max split residual (relative): {v:.3e}")?;
        }
        if let Some(v) = self.min_f_plus {
            writeln!(f, "  min f+ component: {v:.6e}")?;
        }
        if let Some(v) = self.min_f_minus {
            writeln!(f, "  min f- component: {v:.6e}")?;
        }
        if let Some(v) = self.min_boundary_f {
            writeln!(f, "  min f_i on faces x_i = 0: {v:.6e}")?;
        }
        if let Some(v) = self.min_monotone_gap {
            writeln!(f, "  min off-diagonal monotone gap: {v:.6e}")?;
        }
        for finding in &self.findings {
            writeln!(f, "  finding: {finding}")?;
        }
        Ok(())
    }
}

fn sample_point(rng: &mut ChaCha8Rng, dim: usize, box_max: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(0.0..=box_max)).collect()
}

/// Audits the split f = f₊ − x⊙f₋ and the sign contract of the parts on
/// `n_samples` points of [0, box_max]^m, plus each boundary face x_i = 0.
///
/// The face probe checks the positivity criterion: f_i(x) ≥ 0 whenever
/// x ≥ 0 and x_i = 0.
pub fn validate_decomposition(
    sys: &DecomposedSystem,
    n_samples: usize,
    box_max: f64,
    seed: u64,
) -> Result<ValidationReport> {
    if !sys.has_full() {
        return Err(Error::MissingFullField(sys.name().to_string()));
    }
    let dim = sys.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut max_residual = 0.0f64;
    let mut min_plus = f64::INFINITY;
    let mut min_minus = f64::INFINITY;
    let mut findings = Vec::new();

    for _ in 0..n_samples {
        let x = sample_point(&mut rng, dim, box_max);
        let full = sys.f_full(&x)?;
        let plus = sys.f_plus(&x);
        let minus = sys.f_minus(&x);
        let scale = 1.0 + full.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            let recomposed = plus[i] - x[i] * minus[i];
            let residual = (full[i] - recomposed).abs() / scale;
            max_residual = max_residual.max(residual);
            min_plus = min_plus.min(plus[i]);
            min_minus = min_minus.min(minus[i]);
        }
    }

    let mut min_boundary = f64::INFINITY;
    for i in 0..dim {
        for _ in 0..n_samples {
            let mut x = sample_point(&mut rng, dim, box_max);
            x[i] = 0.0;
            let full = sys.f_full(&x)?;
            min_boundary = min_boundary.min(full[i]);
        }
    }

    if max_residual > DECOMP_REL_TOL {
        findings.push(format!(
            "split inconsistent with f: relative residual {max_residual:.3e}"
        ));
    }
    if min_plus < -SIGN_TOL {
        findings.push(format!("f+ negative on the orthant: min {min_plus:.3e}"));
    }
    if min_minus < -SIGN_TOL {
        findings.push(format!("f- negative on the orthant: min {min_minus:.3e}"));
    }
    if min_boundary < -SIGN_TOL {
        findings.push(format!(
            "boundary-face probe failed: min f_i on x_i = 0 is {min_boundary:.3e}"
        ));
    }

    Ok(ValidationReport {
        check: "decomposition",
        n_samples,
        passed: findings.is_empty(),
        max_split_residual: Some(max_residual),
        min_f_plus: Some(min_plus),
        min_f_minus: Some(min_minus),
        min_boundary_f: Some(min_boundary),
        min_monotone_gap: None,
        findings,
    })
}

/// Probes quasi-monotonicity: for ordered pairs x ≥ y agreeing in the i-th
/// coordinate, f_i(x) − f_i(y) must be nonnegative. Systems passing this
/// audit satisfy an order-preserving comparison principle.
pub fn check_quasi_monotone(
    sys: &DecomposedSystem,
    n_samples: usize,
    box_max: f64,
    seed: u64,
) -> Result<ValidationReport> {
    if !sys.has_full() {
        return Err(Error::MissingFullField(sys.name().to_string()));
    }
    let dim = sys.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut min_gap = f64::INFINITY;
    for _ in 0..n_samples {
        for i in 0..dim {
            let y = sample_point(&mut rng, dim, box_max);
            let mut x = y.clone();
            for (j, xj) in x.iter_mut().enumerate() {
                if j != i {
                    *xj += rng.random_range(0.0..=(box_max - *xj).max(0.0));
                }
            }
            let gap = sys.f_full(&x)?[i] - sys.f_full(&y)?[i];
            min_gap = min_gap.min(gap);
        }
    }

    let mut findings = Vec::new();
    if min_gap < -SIGN_TOL {
        findings.push(format!(
            "not quasi-monotone: f_i decreased by {:.3e} along an ordered pair",
            -min_gap
        ));
    }

    Ok(ValidationReport {
        check: "quasi-monotone",
        n_samples,
        passed: findings.is_empty(),
        max_split_residual: None,
        min_f_plus: None,
        min_f_minus: None,
        min_boundary_f: None,
        min_monotone_gap: Some(min_gap),
        findings,
    })
}

/// Central-difference Jacobian: entry (i, j) is
/// (f_i(x + step·e_j) − f_i(x − step·e_j)) / (2·step).
pub fn jacobian_fd(sys: &DecomposedSystem, x: &[f64], step: f64) -> Result<Vec<Vec<f64>>> {
    if !sys.has_full() {
        return Err(Error::MissingFullField(sys.name().to_string()));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "finite-difference step must be positive",
        });
    }
    let dim = sys.dim();
    let mut jac = vec![vec![0.0; dim]; dim];
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for j in 0..dim {
        xp[j] = x[j] + step;
        xm[j] = x[j] - step;
        let fp = sys.f_full(&xp)?;
        let fm = sys.f_full(&xm)?;
        for i in 0..dim {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * step);
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    Ok(jac)
}
