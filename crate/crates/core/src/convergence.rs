//! Empirical convergence rates against a fine-step reference run.
//!
//! With no closed-form solutions available, the scheme's own solution at a
//! sufficiently small step h* stands in for the truth. Coarse runs over a
//! dyadic step ladder are compared with the reference on the coarse nodes
//! only; the per-component max errors give ξ(h) and adjacent ladder pairs
//! give the observed rate ρ = log₂(ξ(2h)/ξ(h)).

use crate::glkernel::FractionalOrder;
use crate::models::DecomposedSystem;
use crate::schemes::{integrate, Grid, SchemeKind, SolverOptions, Trajectory};
use crate::{Error, Result};

/// Max-norm errors of a coarse run against the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMetrics {
    /// ε_i(h): max error per state component over the coarse nodes.
    pub per_component: Vec<f64>,
    /// ξ(h) = max_i ε_i(h).
    pub xi: f64,
}

/// ξ and ρ values across one dyadic ladder for one order.
#[derive(Debug, Clone)]
pub struct RateTable {
    pub alpha: FractionalOrder,
    /// Strictly decreasing steps, each exactly half the previous.
    pub steps: Vec<f64>,
    pub xi: Vec<f64>,
    /// ρ for each adjacent pair; one entry fewer than `xi`.
    pub rho: Vec<f64>,
    pub reference_h: f64,
}

/// Integrates the system over [0, T] at the reference step h*.
pub fn reference_solution(
    sys: &DecomposedSystem,
    scheme: SchemeKind,
    alpha: FractionalOrder,
    x0: &[f64],
    t_end: f64,
    h_star: f64,
) -> Result<Trajectory> {
    let grid = Grid::from_span(0.0, t_end, h_star)?;
    integrate(sys, scheme, alpha, x0, grid, &SolverOptions::default())
}

/// Integer subsampling factor between two nested dyadic grids, or an error
/// when the coarse step is not an exact multiple of the fine one.
fn subsample_factor(coarse_h: f64, fine_h: f64) -> Result<usize> {
    let ratio = coarse_h / fine_h;
    let k = ratio.round();
    if k >= 1.0 && k * fine_h == coarse_h {
        Ok(k as usize)
    } else {
        Err(Error::GridMisaligned(format!(
            "step {coarse_h} is not an integer multiple of reference step {fine_h}"
        )))
    }
}

/// Per-component max difference between a coarse run and the reference on
/// the coarse grid's nodes (which must form a subset of the reference's).
pub fn error_against_reference(
    coarse: &Trajectory,
    reference: &Trajectory,
) -> Result<ErrorMetrics> {
    if coarse.grid.t0() != reference.grid.t0() {
        return Err(Error::GridMisaligned(format!(
            "grids start at different times: {} vs {}",
            coarse.grid.t0(),
            reference.grid.t0()
        )));
    }
    let k = subsample_factor(coarse.grid.h(), reference.grid.h())?;
    if (coarse.len() - 1) * k > reference.len() - 1 {
        return Err(Error::GridMisaligned(format!(
            "reference run too short: needs {} nodes, has {}",
            (coarse.len() - 1) * k + 1,
            reference.len()
        )));
    }
    let dim = coarse.states[0].len();
    if dim != reference.states[0].len() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: reference.states[0].len(),
        });
    }

    let mut per_component = vec![0.0f64; dim];
    for (i, state) in coarse.states.iter().enumerate() {
        let ref_state = &reference.states[i * k];
        for c in 0..dim {
            per_component[c] = per_component[c].max((state[c] - ref_state[c]).abs());
        }
    }
    let xi = per_component.iter().copied().fold(0.0f64, f64::max);
    Ok(ErrorMetrics { per_component, xi })
}

/// ρ values of adjacent entries of a descending dyadic error ladder.
pub fn observed_rates(xi: &[f64]) -> Vec<f64> {
    xi.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn validate_ladder(ladder: &[f64], h_star: f64) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::GridMisaligned("empty step ladder".to_string()));
    }
    for pair in ladder.windows(2) {
        if pair[1] * 2.0 != pair[0] {
            return Err(Error::GridMisaligned(format!(
                "ladder is not dyadic: {} does not halve {}",
                pair[1], pair[0]
            )));
        }
    }
    for &h in ladder {
        subsample_factor(h, h_star).map_err(|_| {
            Error::GridMisaligned(format!(
                "ladder step {h} is not an integer multiple of h* = {h_star}"
            ))
        })?;
    }
    Ok(())
}

/// Runs the NSFD scheme over the ladder, measuring each run against the
/// fine-step reference, and collects ξ(h) and ρ.
pub fn rate_table(
    sys: &DecomposedSystem,
    alpha: FractionalOrder,
    x0: &[f64],
    t_end: f64,
    ladder: &[f64],
    h_star: f64,
) -> Result<RateTable> {
    validate_ladder(ladder, h_star)?;
    let reference = reference_solution(sys, SchemeKind::Nsfd, alpha, x0, t_end, h_star)?;

    let mut xi = Vec::with_capacity(ladder.len());
    for &h in ladder {
        let grid = Grid::from_span(0.0, t_end, h)?;
        let run = integrate(
            sys,
            SchemeKind::Nsfd,
            alpha,
            x0,
            grid,
            &SolverOptions::default(),
        )?;
        xi.push(error_against_reference(&run, &reference)?.xi);
    }
    let rho = observed_rates(&xi);
    Ok(RateTable {
        alpha,
        steps: ladder.to_vec(),
        xi,
        rho,
        reference_h: h_star,
    })
}

fn format_step(h: f64) -> String {
    let e = h.log2();
    if e.round() == e && 2.0f64.powi(e as i32) == h {
        format!("2^{}", e as i32)
    } else {
        format!("{h}")
    }
}

/// Aligned text table: one ξ row and one ρ row per order, steps as columns.
pub fn render_rate_tables_text(tables: &[RateTable]) -> String {
    let mut out = String::new();
    if tables.is_empty() {
        return out;
    }
    let width = 12;
    out.push_str(&format!("{:<7}{:<5}", "alpha", ""));
    for &h in &tables[0].steps {
        out.push_str(&format!("{:>width$}", format_step(h)));
    }
    out.push('\n');
    for table in tables {
        out.push_str(&format!("{:<7}{:<5}", table.alpha.to_string(), "xi"));
        for v in &table.xi {
            out.push_str(&format!("{:>width$}", format!("{v:.3e}")));
        }
        out.push('\n');
        out.push_str(&format!("{:<7}{:<5}", "", "rho"));
        out.push_str(&format!("{:>width$}", "-"));
        for v in &table.rho {
            out.push_str(&format!("{:>width$}", format!("{v:.4}")));
        }
        out.push('\n');
    }
    out
}

/// CSV twin of the text table: `alpha,h,xi,rho`, ρ blank on each block's
/// coarsest step.
pub fn render_rate_tables_csv(tables: &[RateTable]) -> String {
    let mut out = String::from("alpha,h,xi,rho\n");
    for table in tables {
        for (i, &h) in table.steps.iter().enumerate() {
            let rho = if i == 0 {
                String::new()
            } else {
                format!("{:.6}", table.rho[i - 1])
            };
            out.push_str(&format!(
                "{},{},{:.6e},{}\n",
                table.alpha, h, table.xi[i], rho
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glkernel::GlWeights;
    use crate::models::{build_model, DecomposedSystem};
    use crate::schemes::nsfd_step;
    use std::collections::BTreeMap;

    fn order(alpha: f64) -> FractionalOrder {
        FractionalOrder::new(alpha).unwrap()
    }

    fn trajectory_with(grid: Grid, states: Vec<Vec<f64>>) -> Trajectory {
        Trajectory {
            grid,
            alpha: order(0.5),
            scheme: SchemeKind::Nsfd,
            states,
            negativity: Vec::new(),
        }
    }

    #[test]
    fn identical_trajectories_have_zero_error() {
        let grid = Grid::new(0.0, 0.25, 4).unwrap();
        let states = vec![vec![1.0, 2.0]; 5];
        let a = trajectory_with(grid, states.clone());
        let b = trajectory_with(grid, states);
        let m = error_against_reference(&a, &b).unwrap();
        assert_eq!(m.xi, 0.0);
        assert_eq!(m.per_component, vec![0.0, 0.0]);
    }

    #[test]
    fn constant_offset_gives_that_offset() {
        let grid = Grid::new(0.0, 0.25, 4).unwrap();
        let base = vec![vec![1.0, 2.0]; 5];
        let shifted: Vec<Vec<f64>> = base.iter().map(|s| vec![s[0] + 0.125, s[1]]).collect();
        let m = error_against_reference(
            &trajectory_with(grid, shifted),
            &trajectory_with(grid, base),
        )
        .unwrap();
        assert_eq!(m.xi, 0.125);
    }

    #[test]
    fn xi_is_max_of_node_differences() {
        let grid = Grid::new(0.0, 0.5, 2).unwrap();
        let a = trajectory_with(grid, vec![vec![0.1], vec![0.3], vec![0.2]]);
        let b = trajectory_with(grid, vec![vec![0.0], vec![0.0], vec![0.0]]);
        let m = error_against_reference(&a, &b).unwrap();
        assert_eq!(m.xi, 0.3);
    }

    #[test]
    fn exact_error_doubling_gives_rate_one() {
        assert_eq!(observed_rates(&[4e-3, 2e-3]), vec![1.0]);
    }

    #[test]
    fn dyadic_subsampling_is_bit_exact() {
        // Node t = 0.5 of the 2^-3 grid is index 4; against h* = 2^-12 the
        // subsampling factor is 512, so it maps to reference index 2048.
        let coarse = Grid::new(0.0, 2f64.powi(-3), 8).unwrap();
        let fine = Grid::new(0.0, 2f64.powi(-12), 4096).unwrap();
        let k = subsample_factor(coarse.h(), fine.h()).unwrap();
        assert_eq!(k, 512);
        assert_eq!(4 * k, 2048);
        for i in 0..=8 {
            assert_eq!(coarse.node(i), fine.node(i * k));
        }
        assert_eq!(fine.node(2048), 0.5);
    }

    #[test]
    fn reference_run_node_count() {
        let sys = build_model("predator_prey", &BTreeMap::new()).unwrap();
        let reference = reference_solution(
            &sys,
            SchemeKind::Nsfd,
            order(0.5),
            &[0.05, 0.05],
            1.0,
            2f64.powi(-12),
        )
        .unwrap();
        assert_eq!(reference.len(), 4097);
    }

    #[test]
    fn degenerate_reference_step_yields_zero_errors() {
        let sys = build_model("toy", &BTreeMap::new()).unwrap();
        let h = 2f64.powi(-4);
        let table = rate_table(&sys, order(0.7), &[0.5, 0.5], 1.0, &[h], h).unwrap();
        assert_eq!(table.xi, vec![0.0]);
        assert!(table.rho.is_empty());
    }

    #[test]
    fn ladder_validation_rejects_non_dyadic_steps() {
        let sys = build_model("toy", &BTreeMap::new()).unwrap();
        let bad_pair = rate_table(
            &sys,
            order(0.5),
            &[0.5, 0.5],
            1.0,
            &[0.25, 0.2],
            2f64.powi(-8),
        );
        assert!(matches!(bad_pair, Err(Error::GridMisaligned(_))));

        let bad_star = rate_table(&sys, order(0.5), &[0.5, 0.5], 1.0, &[0.25], 0.09);
        match bad_star {
            Err(Error::GridMisaligned(msg)) => assert!(msg.contains("0.25"), "{msg}"),
            other => panic!("expected misalignment, got {other:?}"),
        }
    }

    #[test]
    fn rates_track_alpha_on_the_predator_prey_model() {
        let sys = build_model("predator_prey", &BTreeMap::new()).unwrap();
        let alpha = 0.8;
        let ladder = [2f64.powi(-3), 2f64.powi(-4), 2f64.powi(-5)];
        let table = rate_table(
            &sys,
            order(alpha),
            &[0.05, 0.05],
            1.0,
            &ladder,
            2f64.powi(-9),
        )
        .unwrap();
        assert!(table.xi.windows(2).all(|w| w[1] < w[0]), "xi = {:?}", table.xi);
        for rho in &table.rho {
            assert!(*rho >= alpha - 0.1, "rho = {rho}");
        }
    }

    #[test]
    fn one_step_defect_scales_like_h_to_one_plus_alpha() {
        // Scalar growth cD^α x = x. The closed-form GL solve serves as the
        // truth; feeding its history into the NSFD step isolates the defect
        // caused by evaluating the gain at the previous level.
        for alpha in [0.4, 0.7] {
            let sys = DecomposedSystem::new(
                "growth",
                1,
                BTreeMap::new(),
                Box::new(|x: &[f64]| vec![x[0]]),
                Box::new(|_x: &[f64]| vec![0.0]),
            );
            let mut points = Vec::new();
            for e in 6..=10 {
                let n = 1usize << e;
                let h = 1.0 / n as f64;
                let h_alpha = h.powf(alpha);
                let weights = GlWeights::new(order(alpha), n);
                let w = weights.weights();

                // Closed-form implicit GL solution for f(x) = x.
                let mut truth = vec![vec![1.0f64]];
                for m in 1..=n {
                    let mut s = 0.0;
                    for j in 1..=m {
                        s += w[j] * truth[m - j][0];
                    }
                    let c = weights.cumsum()[m] - s;
                    truth.push(vec![c / (1.0 - h_alpha)]);
                }

                let mut defect = 0.0f64;
                for m in (n / 2)..=n {
                    let stepped = nsfd_step(&sys, &weights, &truth[0..m], h, m).unwrap();
                    defect = defect.max((stepped[0] - truth[m][0]).abs());
                }
                points.push(((h).log2(), defect.log2()));
            }
            let n = points.len() as f64;
            let sx: f64 = points.iter().map(|p| p.0).sum();
            let sy: f64 = points.iter().map(|p| p.1).sum();
            let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
            let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            assert!(
                (slope - (1.0 + alpha)).abs() <= 0.2,
                "alpha = {alpha}: defect slope {slope}"
            );
        }
    }

    #[test]
    fn renderers_cover_the_table_shape() {
        let table = RateTable {
            alpha: order(0.5),
            steps: vec![0.25, 0.125],
            xi: vec![4e-3, 2e-3],
            rho: vec![1.0],
            reference_h: 2f64.powi(-10),
        };
        let text = render_rate_tables_text(std::slice::from_ref(&table));
        assert!(text.contains("2^-2"));
        assert!(text.contains("xi"));
        assert!(text.contains("rho"));
        assert!(text.contains("1.0000"));

        let csv = render_rate_tables_csv(&[table]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "alpha,h,xi,rho");
        assert!(lines.next().unwrap().ends_with(','));
        assert!(lines.next().unwrap().ends_with("1.000000"));
    }
}
