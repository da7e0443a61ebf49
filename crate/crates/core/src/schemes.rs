//! Time steppers for decomposed fractional systems on uniform grids.
//!
//! Both schemes discretize the Caputo derivative with the Grünwald-Letnikov
//! operator, so every step carries the full history sum
//! Σ_{j=1}^{n} w_j·x_{n−j} and a length-N run costs O(N²) evaluations.
//!
//! The GL scheme equates the discrete derivative to f(x_n), which makes it
//! implicit; it is solved by damped Newton iteration (an explicit variant
//! evaluating f at x_{n−1} is available through [`SolverOptions`]).
//!
//! The NSFD scheme evaluates the gain part f₊ at the previous level and the
//! loss term x·f₋ nonlocally — f₋ at the previous level, x at the current
//! one — which keeps the update linear in x_n:
//!
//! ```text
//! x_n = [h^α f₊(x_{n−1}) + x₀·A_n + Σ_{j=1}^{n} (−w_j)·x_{n−j}] / [1 + h^α f₋(x_{n−1})]
//! ```
//!
//! Every addend in the numerator is nonnegative whenever the history is, and
//! the denominator is at least 1, so iterates stay nonnegative for any step
//! size. The summation is arranged exactly that way so the guarantee also
//! holds in floating point, with no tolerance.

use crate::glkernel::{FractionalOrder, GlWeights};
use crate::models::DecomposedSystem;
use crate::{Error, Result};

/// Uniform time grid: nodes t_i = t0 + i·h for i = 0..=n_steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    t0: f64,
    h: f64,
    n_steps: usize,
}

impl Grid {
    pub fn new(t0: f64, h: f64, n_steps: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter {
                name: "h",
                value: h,
                reason: "step must be positive and finite",
            });
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "n_steps",
                value: 0.0,
                reason: "grid needs at least one step",
            });
        }
        Ok(Self { t0, h, n_steps })
    }

    /// Builds a grid covering [t0, t_end] with step h; (t_end − t0)/h must
    /// be an integer up to 1e-9 relative slack.
    pub fn from_span(t0: f64, t_end: f64, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter {
                name: "h",
                value: h,
                reason: "step must be positive and finite",
            });
        }
        let span = t_end - t0;
        let n = (span / h).round();
        if n < 1.0 || ((n * h - span).abs() > 1e-9 * span.abs().max(1.0)) {
            return Err(Error::InvalidParameter {
                name: "T",
                value: t_end,
                reason: "time span is not an integer number of steps",
            });
        }
        Self::new(t0, h, n as usize)
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
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    #[inline]
    pub fn t_end(&self) -> f64 {
        self.t0 + self.n_steps as f64 * self.h
    }

    /// Node time t_i = t0 + i·h.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h
    }
}

/// Which scheme advanced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Gl,
    Nsfd,
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemeKind::Gl => write!(f, "GL"),
            SchemeKind::Nsfd => write!(f, "NSFD"),
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gl" => Ok(SchemeKind::Gl),
            "nsfd" => Ok(SchemeKind::Nsfd),
            _ => Err(Error::InvalidParameter {
                name: "scheme",
                value: f64::NAN,
                reason: "expected GL or NSFD",
            }),
        }
    }
}

/// What to do when an iterate goes negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativityPolicy {
    /// Log the event and keep integrating.
    #[default]
    Record,
    /// Abort the run with an error.
    Halt,
}

/// Options for the implicit GL solve and negativity handling.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Absolute residual tolerance for the Newton solve.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub negativity_policy: NegativityPolicy,
    /// Evaluate f at x_{n−1} instead of solving for x_n (forward-Euler-like).
    pub gl_explicit: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-12,
            newton_max_iter: 50,
            negativity_policy: NegativityPolicy::Record,
            gl_explicit: false,
        }
    }
}

/// A state component that went negative during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityEvent {
    pub step: usize,
    pub component: usize,
    pub value: f64,
}

/// Output of [`integrate`]: the state sequence plus run metadata.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub alpha: FractionalOrder,
    pub scheme: SchemeKind,
    /// `states[i] ≈ x(t0 + i·h)`, length n_steps + 1, `states[0]` = x₀.
    pub states: Vec<Vec<f64>>,
    pub negativity: Vec<NegativityEvent>,
}

impl Trajectory {
    #[inline]
    pub fn len(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[inline]
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds x0")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.states.len()).map(|i| self.grid.node(i))
    }
}

/// One NSFD step: solves the linearized update for x_n given history
/// x₀..x_{n−1}. Preserves nonnegativity of the history exactly, for every
/// h > 0, and fixes every equilibrium point of the system.
pub fn nsfd_step(
    sys: &DecomposedSystem,
    weights: &GlWeights,
    history: &[Vec<f64>],
    h: f64,
    n: usize,
) -> Result<Vec<f64>> {
    check_step_inputs(weights, history, n)?;
    let dim = sys.dim();
    let prev = &history[n - 1];
    let h_alpha = h.powf(weights.alpha().value());
    let gain = sys.f_plus(prev);
    let loss = sys.f_minus(prev);
    let w = weights.weights();
    let a_n = weights.cumsum()[n];

    // Zero weights contribute nothing; at α = 1 this collapses the memory
    // to the previous step.
    let depth = n.min(weights.last_nonzero_index());
    let mut next = vec![0.0; dim];
    for i in 0..dim {
        // Sum of nonnegative terms only; keeps the positivity guarantee exact
        // in floating point.
        let mut hist = 0.0;
        for j in 1..=depth {
            hist += (-w[j]) * history[n - j][i];
        }
        let numerator = h_alpha * gain[i] + history[0][i] * a_n + hist;
        let denominator = 1.0 + h_alpha * loss[i];
        if denominator <= 0.0 {
            return Err(Error::DecompositionViolation {
                step: n,
                component: i,
                denominator,
            });
        }
        next[i] = numerator / denominator;
    }
    Ok(next)
}

/// One GL step: solves x_n − h^α f(x_n) = x₀·A_n − Σ_{j=1}^{n} w_j·x_{n−j}
/// by damped Newton from the predictor x_{n−1} (or evaluates f at x_{n−1}
/// when `opts.gl_explicit` is set).
pub fn gl_step(
    sys: &DecomposedSystem,
    weights: &GlWeights,
    history: &[Vec<f64>],
    h: f64,
    n: usize,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    check_step_inputs(weights, history, n)?;
    if !sys.has_full() {
        return Err(Error::MissingFullField(sys.name().to_string()));
    }
    let dim = sys.dim();
    let h_alpha = h.powf(weights.alpha().value());
    let w = weights.weights();
    let a_n = weights.cumsum()[n];

    // Constant part of the implicit equation: x₀·A_n − Σ_{j=1}^n w_j·x_{n−j}.
    let depth = n.min(weights.last_nonzero_index());
    let mut constant = vec![0.0; dim];
    for i in 0..dim {
        let mut s = 0.0;
        for j in 1..=depth {
            s += w[j] * history[n - j][i];
        }
        constant[i] = history[0][i] * a_n - s;
    }

    if opts.gl_explicit {
        let f = sys.f_full(&history[n - 1])?;
        return Ok((0..dim).map(|i| constant[i] + h_alpha * f[i]).collect());
    }

    // residual(x) = x − h^α f(x) − constant
    let residual = |x: &[f64]| -> Result<Vec<f64>> {
        let f = sys.f_full(x)?;
        Ok((0..dim)
            .map(|i| x[i] - h_alpha * f[i] - constant[i])
            .collect())
    };

    let mut x = history[n - 1].clone();
    let mut r = residual(&x)?;
    let mut r_norm = inf_norm(&r);
    for _iter in 0..opts.newton_max_iter {
        if r_norm <= opts.newton_tol {
            return Ok(x);
        }
        if !r_norm.is_finite() {
            break;
        }
        // Newton matrix I − h^α Df(x).
        let jf = sys.jacobian_at(&x)?;
        let mut m = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                m[i][j] = if i == j { 1.0 } else { 0.0 } - h_alpha * jf[i][j];
            }
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = solve_dense(m, rhs).ok_or(Error::SingularJacobian(n))?;

        // Backtracking line search on the residual norm.
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = (0..dim).map(|i| x[i] + t * delta[i]).collect();
            let trial_r = residual(&trial)?;
            let trial_norm = inf_norm(&trial_r);
            if trial_norm.is_finite() && trial_norm < r_norm {
                x = trial;
                r = trial_r;
                r_norm = trial_norm;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if r_norm <= opts.newton_tol {
        Ok(x)
    } else {
        Err(Error::NewtonDivergence {
            step: n,
            residual: r_norm,
            iters: opts.newton_max_iter,
        })
    }
}

fn check_step_inputs(weights: &GlWeights, history: &[Vec<f64>], n: usize) -> Result<()> {
    if n == 0 || history.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: history.len(),
        });
    }
    if n > weights.max_index() {
        return Err(Error::WeightTableTooShort {
            needed: n,
            max: weights.max_index(),
        });
    }
    Ok(())
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Gaussian elimination with partial pivoting; None when singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let (upper, lower) = a.split_at_mut(row);
            let pivot_row = &upper[col];
            let this_row = &mut lower[0];
            let factor = this_row[col] / pivot_row[col];
            if factor == 0.0 {
                continue;
            }
            for (t, p) in this_row[col..].iter_mut().zip(&pivot_row[col..]) {
                *t -= factor * p;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for (coeff, known) in a[row][row + 1..].iter().zip(&x[row + 1..]) {
            s -= coeff * known;
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Advances `sys` from `x0` across `grid` with the chosen scheme.
///
/// The weight table is computed once for the whole run. Negative initial
/// components are accepted but flagged as step-0 negativity events. A
/// single run is strictly sequential; distinct runs share no mutable state.
pub fn integrate(
    sys: &DecomposedSystem,
    scheme: SchemeKind,
    alpha: FractionalOrder,
    x0: &[f64],
    grid: Grid,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: x0.len(),
        });
    }
    let n_steps = grid.n_steps();
    let weights = GlWeights::new(alpha, n_steps);

    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(x0.to_vec());
    let mut negativity = Vec::new();
    record_negative(&states[0], 0, &mut negativity);

    for n in 1..=n_steps {
        let next = match scheme {
            SchemeKind::Nsfd => nsfd_step(sys, &weights, &states, grid.h(), n)?,
            SchemeKind::Gl => gl_step(sys, &weights, &states, grid.h(), n, opts)?,
        };
        for (i, v) in next.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteState { step: n, component: i });
            }
        }
        let fresh = record_negative(&next, n, &mut negativity);
        if fresh && opts.negativity_policy == NegativityPolicy::Halt {
            let ev = *negativity.last().expect("just recorded");
            return Err(Error::NegativityHalt {
                step: ev.step,
                component: ev.component,
                value: ev.value,
            });
        }
        states.push(next);
    }

    Ok(Trajectory {
        grid,
        alpha,
        scheme,
        states,
        negativity,
    })
}

fn record_negative(state: &[f64], step: usize, events: &mut Vec<NegativityEvent>) -> bool {
    let mut any = false;
    for (component, &value) in state.iter().enumerate() {
        if value < 0.0 {
            events.push(NegativityEvent {
                step,
                component,
                value,
            });
            any = true;
        }
    }
    any
}
