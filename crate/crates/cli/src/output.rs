//! Rendering: trajectory CSV, stability reports and their CSV twins.
//!
//! Floats are written with 17 significant digits so a written value parses
//! back to the identical bit pattern; identical runs therefore produce
//! byte-identical files.

use std::fmt::Write as _;

use fracstep::analysis::{StabilityReport, Stability};
use fracstep::schemes::Trajectory;

/// Full-precision decimal rendering (17 significant digits).
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t,x1,...,xm` rows over the whole trajectory.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let dim = traj.states[0].len();
    let mut out = String::from("t");
    for i in 1..=dim {
        let _ = write!(out, ",x{i}");
    }
    out.push('\n');
    for (i, state) in traj.states.iter().enumerate() {
        out.push_str(&format_f64(traj.grid.node(i)));
        for v in state {
            out.push(',');
            out.push_str(&format_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Header plus a single state row, for zero-length runs.
pub fn single_row_csv(t0: f64, x0: &[f64]) -> String {
    let mut out = String::from("t");
    for i in 1..=x0.len() {
        let _ = write!(out, ",x{i}");
    }
    out.push('\n');
    out.push_str(&format_f64(t0));
    for v in x0 {
        out.push(',');
        out.push_str(&format_f64(*v));
    }
    out.push('\n');
    out
}

fn verdict_str(v: Option<Stability>) -> String {
    match v {
        Some(s) => s.to_string(),
        None => "-".to_string(),
    }
}

/// Human-readable stability survey.
pub fn stability_text(report: &StabilityReport) -> String {
    let p = report.params;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "predator_prey stability: s={} K={} q={} q1={} beta={} s0={} E={}",
        p.s, p.k, p.q, p.q1, p.beta, p.s0, p.e
    );
    let _ = writeln!(out, "R0 = {:.4}", report.r0);
    for eq in &report.equilibria {
        match (eq.exists, eq.point) {
            (true, Some(pt)) => {
                let _ = writeln!(out, "{} ({}) at ({:.4}, {:.4})", eq.label, eq.kind, pt[0], pt[1]);
                if let Some(r) = eq.residual {
                    let _ = writeln!(out, "  residual |f| = {r:.3e}");
                }
                if let Some(spec) = &eq.spectrum {
                    let _ = write!(out, "  eigenvalues:");
                    for l in &spec.eigenvalues {
                        let _ = write!(out, " {:.4}{:+.4}i", l.re, l.im);
                    }
                    out.push('\n');
                    let _ = writeln!(
                        out,
                        "  min |arg| = {:.4}{}",
                        spec.min_arg(),
                        match spec.real_sign_pattern() {
                            Some(p) => format!(", real spectrum: {p}"),
                            None => String::new(),
                        }
                    );
                    if let Some(ma) = spec.marginal_alpha {
                        let _ = writeln!(out, "  marginal order = {ma:.4}");
                    }
                }
                if !eq.note.is_empty() {
                    let _ = writeln!(out, "  note: {}", eq.note);
                }
                for &alpha in &report.alphas {
                    let _ = writeln!(
                        out,
                        "  alpha {}: {}",
                        alpha,
                        verdict_str(eq.classification_at(alpha))
                    );
                }
            }
            _ => {
                let _ = writeln!(out, "{} ({}): {}", eq.label, eq.kind, eq.note);
            }
        }
    }
    out
}

/// Machine-readable twin: one row per (equilibrium, alpha).
pub fn stability_csv(report: &StabilityReport) -> String {
    let mut out = String::from(
        "equilibrium,kind,exists,x,y,lambda1_re,lambda1_im,lambda2_re,lambda2_im,min_arg,marginal_alpha,alpha,verdict\n",
    );
    for eq in &report.equilibria {
        let base = match (&eq.spectrum, eq.point) {
            (Some(spec), Some(pt)) => format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                eq.label,
                eq.kind,
                eq.exists,
                format_f64(pt[0]),
                format_f64(pt[1]),
                format_f64(spec.eigenvalues[0].re),
                format_f64(spec.eigenvalues[0].im),
                format_f64(spec.eigenvalues[1].re),
                format_f64(spec.eigenvalues[1].im),
                format_f64(spec.min_arg()),
                spec.marginal_alpha.map(format_f64).unwrap_or_default(),
            ),
            _ => format!("{},{},{},,,,,,,,", eq.label, eq.kind, eq.exists),
        };
        if report.alphas.is_empty() {
            let _ = writeln!(out, "{base},,");
        } else {
            for &alpha in &report.alphas {
                let _ = writeln!(
                    out,
                    "{base},{},{}",
                    alpha,
                    verdict_str(eq.classification_at(alpha))
                );
            }
        }
    }
    out
}
