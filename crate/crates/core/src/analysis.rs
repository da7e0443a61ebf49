//! Equilibria and linear stability of fractional systems.
//!
//! A linear Caputo system of order α is stable exactly when every Jacobian
//! eigenvalue λ satisfies |arg λ| > α·π/2. The binding constraint is the
//! eigenvalue of smallest argument, which yields the marginal order
//! ᾱ = (2/π)·min|arg λ|: an interior equilibrium is linearly stable for
//! α < ᾱ and unstable for α > ᾱ. Eigenvalues are computed in closed form
//! for the 2×2 Jacobians of the built-in models; larger systems must supply
//! their spectrum through [`classify_from_eigenvalues`].

use num_complex::Complex64;

use crate::glkernel::FractionalOrder;
use crate::models::{predator_prey_system, PredatorPreyParams};
use crate::Result;

/// Verdict of the stability condition at one fractional order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stability::Stable => write!(f, "stable"),
            Stability::Unstable => write!(f, "unstable"),
            Stability::Marginal => write!(f, "marginal"),
        }
    }
}

/// Where an equilibrium sits in the state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Trivial,
    SemiTrivial,
    Interior,
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EquilibriumKind::Trivial => write!(f, "trivial"),
            EquilibriumKind::SemiTrivial => write!(f, "semi-trivial"),
            EquilibriumKind::Interior => write!(f, "interior"),
        }
    }
}

/// Eigenvalue arguments of a linearization and the verdicts they imply.
#[derive(Debug, Clone)]
pub struct StabilitySpectrum {
    pub eigenvalues: Vec<Complex64>,
    /// |arg λ_i| ∈ [0, π] for each eigenvalue.
    pub args: Vec<f64>,
    /// ᾱ = (2/π)·min|arg λ|, reported only when min|arg λ| ∈ (0, π/2);
    /// otherwise the verdict does not change over α ∈ (0, 1].
    pub marginal_alpha: Option<f64>,
    /// A zero eigenvalue makes the linear test inconclusive.
    pub degenerate: bool,
}

impl StabilitySpectrum {
    /// Verdict of the argument condition at the given order.
    pub fn classification_at(&self, alpha: FractionalOrder) -> Stability {
        if self.degenerate {
            return Stability::Marginal;
        }
        let threshold = alpha.value() * std::f64::consts::FRAC_PI_2;
        let min_arg = self.min_arg();
        if min_arg > threshold {
            Stability::Stable
        } else if min_arg < threshold {
            Stability::Unstable
        } else {
            Stability::Marginal
        }
    }

    pub fn min_arg(&self) -> f64 {
        self.args.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Sign pattern of a purely real spectrum ("saddle", "sink", "source"),
    /// None when any eigenvalue has an imaginary part.
    pub fn real_sign_pattern(&self) -> Option<&'static str> {
        if self.eigenvalues.iter().any(|l| l.im != 0.0) {
            return None;
        }
        let pos = self.eigenvalues.iter().filter(|l| l.re > 0.0).count();
        let neg = self.eigenvalues.iter().filter(|l| l.re < 0.0).count();
        match (pos, neg) {
            _ if pos + neg < self.eigenvalues.len() => Some("degenerate"),
            (0, _) => Some("sink"),
            (_, 0) => Some("source"),
            _ => Some("saddle"),
        }
    }
}

/// Eigenvalues of a 2×2 real matrix from the characteristic polynomial
/// λ² − tr·λ + det, using the sign-matched quadratic formula.
pub fn eig2(a: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let sign = if tr >= 0.0 { 1.0 } else { -1.0 };
        let q = 0.5 * (tr + sign * sq);
        if q == 0.0 {
            // tr = 0 and disc = 0, hence det = 0: double zero root.
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q, 0.0), Complex64::new(det / q, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [
            Complex64::new(0.5 * tr, im),
            Complex64::new(0.5 * tr, -im),
        ]
    }
}

/// Classifies a spectrum supplied directly (the route for systems of
/// dimension above two).
pub fn classify_from_eigenvalues(eigenvalues: &[Complex64]) -> StabilitySpectrum {
    let args: Vec<f64> = eigenvalues.iter().map(|l| l.arg().abs()).collect();
    let degenerate = eigenvalues.iter().any(|l| l.norm() == 0.0);
    let min_arg = args.iter().copied().fold(f64::INFINITY, f64::min);
    let marginal_alpha = if !degenerate && min_arg > 0.0 && min_arg < std::f64::consts::FRAC_PI_2 {
        Some(min_arg * std::f64::consts::FRAC_2_PI)
    } else {
        None
    };
    StabilitySpectrum {
        eigenvalues: eigenvalues.to_vec(),
        args,
        marginal_alpha,
        degenerate,
    }
}

/// Closed-form eigenvalue classification of a 2×2 Jacobian.
pub fn classify_stability(jacobian: &[[f64; 2]; 2]) -> StabilitySpectrum {
    classify_from_eigenvalues(&eig2(jacobian))
}

/// The predator-prey equilibria and the coexistence threshold
/// R₀ = β·K / ((1 + q₁·K)·(s₀ + E)).
#[derive(Debug, Clone, Copy)]
pub struct PredatorPreyEquilibria {
    pub p0: [f64; 2],
    pub p1: [f64; 2],
    /// Interior point, present iff R₀ > 1 and x* ≤ K.
    pub p2: Option<[f64; 2]>,
    pub r0: f64,
    /// ∞-norm of f at P2 when it exists.
    pub p2_residual: Option<f64>,
}

/// Locates P₀ = (0,0), P₁ = (K,0) and, when R₀ > 1, the interior point
///
/// ```text
/// x* = K / (R₀ + q₁·K·(R₀ − 1))
/// y* = s·R₀·(1 + q₁·K)²·(R₀ − 1) / (q·(R₀ + q₁·K·(R₀ − 1))²)
/// ```
pub fn predator_prey_equilibria(p: PredatorPreyParams) -> PredatorPreyEquilibria {
    let r0 = p.beta * p.k / ((1.0 + p.q1 * p.k) * (p.s0 + p.e));
    let p2 = if r0 > 1.0 {
        let denom = r0 + p.q1 * p.k * (r0 - 1.0);
        let x = p.k / denom;
        let y = p.s * r0 * (1.0 + p.q1 * p.k).powi(2) * (r0 - 1.0) / (p.q * denom * denom);
        (x <= p.k).then_some([x, y])
    } else {
        None
    };
    let p2_residual = p2.map(|pt| {
        let sys = predator_prey_system(p);
        let f = sys.f_full(&pt).expect("built-in model supplies f");
        f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    });
    PredatorPreyEquilibria {
        p0: [0.0, 0.0],
        p1: [p.k, 0.0],
        p2,
        r0,
        p2_residual,
    }
}

/// Full record for one equilibrium point of a 2-D model.
#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub label: &'static str,
    pub kind: EquilibriumKind,
    pub exists: bool,
    pub note: String,
    /// Point, Jacobian and spectrum are present only for existing points.
    pub point: Option<[f64; 2]>,
    pub jacobian: Option<[[f64; 2]; 2]>,
    pub spectrum: Option<StabilitySpectrum>,
    pub residual: Option<f64>,
}

impl EquilibriumReport {
    pub fn classification_at(&self, alpha: FractionalOrder) -> Option<Stability> {
        self.spectrum.as_ref().map(|s| s.classification_at(alpha))
    }
}

/// Stability survey of the predator-prey model: every equilibrium with its
/// spectrum, plus the orders at which verdicts are requested.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub params: PredatorPreyParams,
    pub r0: f64,
    pub alphas: Vec<FractionalOrder>,
    pub equilibria: Vec<EquilibriumReport>,
}

/// Builds the survey for the predator-prey model. P₁'s verdict follows
/// "stable iff R₀ < 1"; the eigenvalues reproduce that statement since the
/// semi-trivial Jacobian is triangular with entries −s and (s₀+E)(R₀−1).
pub fn stability_report(
    p: PredatorPreyParams,
    alphas: &[FractionalOrder],
) -> Result<StabilityReport> {
    let sys = predator_prey_system(p);
    let eq = predator_prey_equilibria(p);

    let jac_at = |pt: [f64; 2]| -> Result<[[f64; 2]; 2]> {
        let j = sys.jacobian_at(&pt)?;
        Ok([[j[0][0], j[0][1]], [j[1][0], j[1][1]]])
    };

    let mut reports = Vec::new();
    for (label, kind, point, note) in [
        ("P0", EquilibriumKind::Trivial, eq.p0, String::new()),
        (
            "P1",
            EquilibriumKind::SemiTrivial,
            eq.p1,
            format!(
                "stable iff R0 < 1 (R0 = {:.4}, {})",
                eq.r0,
                if eq.r0 < 1.0 { "holds" } else { "fails" }
            ),
        ),
    ] {
        let jacobian = jac_at(point)?;
        let spectrum = classify_stability(&jacobian);
        reports.push(EquilibriumReport {
            label,
            kind,
            exists: true,
            note,
            point: Some(point),
            jacobian: Some(jacobian),
            spectrum: Some(spectrum),
            residual: None,
        });
    }

    match eq.p2 {
        Some(point) => {
            let jacobian = jac_at(point)?;
            let spectrum = classify_stability(&jacobian);
            let note = match spectrum.marginal_alpha {
                Some(_) => String::new(),
                None => "stable for every alpha in (0, 1]".to_string(),
            };
            reports.push(EquilibriumReport {
                label: "P2",
                kind: EquilibriumKind::Interior,
                exists: true,
                note,
                point: Some(point),
                jacobian: Some(jacobian),
                spectrum: Some(spectrum),
                residual: eq.p2_residual,
            });
        }
        None => reports.push(EquilibriumReport {
            label: "P2",
            kind: EquilibriumKind::Interior,
            exists: false,
            note: format!("does not exist (R0 = {:.4} ≤ 1)", eq.r0),
            point: None,
            jacobian: None,
            spectrum: None,
            residual: None,
        }),
    }

    Ok(StabilityReport {
        params: p,
        r0: eq.r0,
        alphas: alphas.to_vec(),
        equilibria: reports,
    })
}
