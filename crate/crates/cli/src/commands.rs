//! The five subcommands. Data (CSV, reports, tables) goes to stdout or to
//! `--output`-prefixed files; run summaries and diagnostics go to stderr,
//! timings included, so identical command lines keep producing byte-identical
//! data files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};

use fracstep::analysis::stability_report;
use fracstep::convergence::{rate_table, render_rate_tables_csv, render_rate_tables_text, RateTable};
use fracstep::glkernel::FractionalOrder;
use fracstep::models::{
    build_model, check_quasi_monotone, default_params, validate_decomposition, DecomposedSystem,
    PredatorPreyParams, DEFAULT_BOX_MAX, MODEL_NAMES,
};
use fracstep::schemes::{integrate, Grid, SchemeKind, SolverOptions, Trajectory};

use crate::cli::{CompareArgs, ConvergeArgs, SimulateArgs, StabilityArgs, ValidateArgs};
use crate::config::{
    default_seed, parse_alpha_list, parse_bool, parse_f64, parse_scheme_selection, parse_set,
    parse_step, parse_step_list, parse_u64, parse_usize, parse_vector, resolve, resolve_opt,
    ConfigFile, SchemeSelection,
};
use crate::error::{config_error, from_core, CliError};
use crate::output::{
    single_row_csv, stability_csv, stability_text, trajectory_csv,
};

type CmdResult = Result<(), CliError>;

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile, CliError> {
    match path {
        Some(p) => ConfigFile::load(p).map_err(CliError::config),
        None => Ok(ConfigFile::default()),
    }
}

fn build_system(
    model_flag: Option<String>,
    set_flag: Option<String>,
    cfg: &ConfigFile,
    default_model: Option<&str>,
) -> Result<DecomposedSystem, CliError> {
    let name = resolve(
        "model",
        model_flag,
        cfg.get("model"),
        |s| Ok(s.to_string()),
        default_model.map(str::to_string),
    )
    .map_err(CliError::config)?;
    let overrides = resolve(
        "set",
        set_flag.map(|s| parse_set(&s)).transpose().map_err(CliError::config)?,
        cfg.get("set"),
        parse_set,
        Some(BTreeMap::new()),
    )
    .map_err(CliError::config)?;
    build_model(&name, &overrides).map_err(from_core)
}

fn solver_options(args: &SimulateArgs, cfg: &ConfigFile) -> Result<SolverOptions, CliError> {
    let defaults = SolverOptions::default();
    let newton_tol = resolve(
        "newton-tol",
        args.newton_tol,
        cfg.get("newton-tol"),
        parse_f64,
        Some(defaults.newton_tol),
    )
    .map_err(CliError::config)?;
    let newton_max_iter = resolve(
        "newton-max-iter",
        args.newton_max_iter,
        cfg.get("newton-max-iter"),
        parse_usize,
        Some(defaults.newton_max_iter),
    )
    .map_err(CliError::config)?;
    let gl_explicit = args.gl_explicit
        || resolve(
            "gl-explicit",
            None,
            cfg.get("gl-explicit"),
            parse_bool,
            Some(false),
        )
        .map_err(CliError::config)?;
    let negativity = resolve(
        "negativity",
        args.negativity.clone(),
        cfg.get("negativity"),
        |s| Ok(s.to_string()),
        Some("record".to_string()),
    )
    .map_err(CliError::config)?;
    let negativity_policy = match negativity.as_str() {
        "record" => fracstep::schemes::NegativityPolicy::Record,
        "halt" => fracstep::schemes::NegativityPolicy::Halt,
        other => {
            return Err(config_error(anyhow!(
                "invalid negativity policy `{other}` (expected record or halt)"
            )))
        }
    };
    Ok(SolverOptions {
        newton_tol,
        newton_max_iter,
        negativity_policy,
        gl_explicit,
    })
}

struct RunOutput {
    scheme: SchemeKind,
    alpha: FractionalOrder,
    csv: String,
    summary: String,
}

fn run_one(
    sys: &DecomposedSystem,
    scheme: SchemeKind,
    alpha: FractionalOrder,
    x0: &[f64],
    grid: Grid,
    opts: &SolverOptions,
) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let traj = integrate(sys, scheme, alpha, x0, grid, opts).map_err(from_core)?;
    let elapsed = start.elapsed();
    Ok(RunOutput {
        scheme,
        alpha,
        csv: trajectory_csv(&traj),
        summary: run_summary(&traj, elapsed),
    })
}

fn run_summary(traj: &Trajectory, elapsed: Duration) -> String {
    let mut s = format!(
        "run {} alpha={}: {} steps in {:.3?}; final (",
        traj.scheme,
        traj.alpha,
        traj.len() - 1,
        elapsed
    );
    for (i, v) in traj.final_state().iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{v:.6}");
    }
    let _ = write!(s, "); negativity events: {}", traj.negativity.len());
    for ev in traj.negativity.iter().take(3) {
        let _ = write!(
            s,
            "\n  step {} component {} value {:.6e}",
            ev.step, ev.component, ev.value
        );
    }
    if traj.negativity.len() > 3 {
        let _ = write!(s, "\n  ... {} more", traj.negativity.len() - 3);
    }
    s
}

fn write_output(path: &str, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = std::path::Path::new(path).parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("cannot create directory for {path}"))
                .map_err(CliError::config)?;
        }
    }
    std::fs::write(path, contents)
        .with_context(|| format!("cannot write {path}"))
        .map_err(CliError::config)?;
    eprintln!("wrote {path}");
    Ok(())
}

pub fn simulate(args: SimulateArgs) -> CmdResult {
    let cfg = load_config(&args.common.config)?;
    let sys = build_system(args.common.model.clone(), args.common.set.clone(), &cfg, None)?;

    let selection = resolve(
        "scheme",
        args.scheme
            .as_deref()
            .map(parse_scheme_selection)
            .transpose()
            .map_err(CliError::config)?,
        cfg.get("scheme"),
        parse_scheme_selection,
        Some(SchemeSelection::One(SchemeKind::Nsfd)),
    )
    .map_err(CliError::config)?;
    let alphas = resolve(
        "alpha",
        args.alpha
            .as_deref()
            .map(parse_alpha_list)
            .transpose()
            .map_err(CliError::config)?,
        cfg.get("alpha"),
        parse_alpha_list,
        None,
    )
    .map_err(CliError::config)?;
    let x0 = resolve(
        "x0",
        args.x0
            .as_deref()
            .map(parse_vector)
            .transpose()
            .map_err(CliError::config)?,
        cfg.get("x0"),
        parse_vector,
        None,
    )
    .map_err(CliError::config)?;
    let t0 = resolve("t0", args.t0, cfg.get("t0"), parse_f64, Some(0.0)).map_err(CliError::config)?;
    let t_end = resolve("T", args.t_end, cfg.get("T"), parse_f64, None).map_err(CliError::config)?;
    let h = resolve("h", args.h, cfg.get("h"), parse_step, None).map_err(CliError::config)?;
    let output = resolve_opt("output", args.output.clone(), cfg.get("output"), |s| {
        Ok(s.to_string())
    })
    .map_err(CliError::config)?;
    let opts = solver_options(&args, &cfg)?;

    if x0.len() != sys.dim() {
        return Err(config_error(anyhow!(
            "--x0 has {} components, model {} needs {}",
            x0.len(),
            sys.name(),
            sys.dim()
        )));
    }
    if t_end < t0 {
        return Err(config_error(anyhow!("T = {t_end} must not precede t0 = {t0}")));
    }

    let combos: Vec<(SchemeKind, FractionalOrder)> = selection
        .kinds()
        .into_iter()
        .flat_map(|k| alphas.iter().map(move |&a| (k, a)))
        .collect();
    if output.is_none() && combos.len() > 1 {
        return Err(config_error(anyhow!(
            "{} (scheme, alpha) runs requested; pass --output <prefix> to write one CSV per run",
            combos.len()
        )));
    }

    // Zero-length run: emit the initial state, nothing to integrate.
    if t_end == t0 {
        let csv = single_row_csv(t0, &x0);
        for (scheme, alpha) in &combos {
            emit(&output, *scheme, *alpha, &csv)?;
            eprintln!("run {scheme} alpha={alpha}: 0 steps (T = t0)");
        }
        return Ok(());
    }

    let grid = Grid::from_span(t0, t_end, h).map_err(from_core)?;
    for &x in &x0 {
        if x < 0.0 {
            eprintln!("warning: negative initial component {x}; positivity guarantees assume x0 >= 0");
            break;
        }
    }

    // Runs are independent: fan out, then write in declared order.
    let results: Vec<Result<RunOutput, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = combos
            .iter()
            .map(|&(scheme, alpha)| {
                let (sys, x0, opts) = (&sys, &x0, &opts);
                scope.spawn(move || run_one(sys, scheme, alpha, x0, grid, opts))
            })
            .collect();
        handles
            .into_iter()
            .map(|handle| handle.join().expect("solver threads do not panic"))
            .collect()
    });

    for result in results {
        let run = result?;
        emit(&output, run.scheme, run.alpha, &run.csv)?;
        eprintln!("{}", run.summary);
    }
    Ok(())
}

fn emit(
    output: &Option<String>,
    scheme: SchemeKind,
    alpha: FractionalOrder,
    csv: &str,
) -> Result<(), CliError> {
    match output {
        Some(prefix) => write_output(&format!("{prefix}_{scheme}_a{alpha}.csv"), csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

pub fn stability(args: StabilityArgs) -> CmdResult {
    let cfg = load_config(&args.common.config)?;
    let name = resolve(
        "model",
        args.common.model.clone(),
        cfg.get("model"),
        |s| Ok(s.to_string()),
        Some("predator_prey".to_string()),
    )
    .map_err(CliError::config)?;
    if name != "predator_prey" {
        return Err(config_error(anyhow!(
            "stability analysis needs closed-form equilibria; only predator_prey provides them"
        )));
    }
    let overrides = resolve(
        "set",
        args.common
            .set
            .as_deref()
            .map(parse_set)
            .transpose()
            .map_err(CliError::config)?,
        cfg.get("set"),
        parse_set,
        Some(BTreeMap::new()),
    )
    .map_err(CliError::config)?;
    let mut params = default_params("predator_prey").map_err(from_core)?;
    for (k, v) in overrides {
        if !params.contains_key(&k) {
            return Err(config_error(anyhow!("unknown predator_prey parameter `{k}`")));
        }
        params.insert(k, v);
    }
    let p = PredatorPreyParams::from_map(&params).map_err(from_core)?;
    let alphas = resolve(
        "alpha",
        args.alpha
            .as_deref()
            .map(parse_alpha_list)
            .transpose()
            .map_err(CliError::config)?,
        cfg.get("alpha"),
        parse_alpha_list,
        Some(vec![FractionalOrder::new(1.0).expect("1.0 is a valid order")]),
    )
    .map_err(CliError::config)?;

    let report = stability_report(p, &alphas).map_err(from_core)?;
    print!("{}", stability_text(&report));
    if let Some(prefix) = resolve_opt("output", args.output.clone(), cfg.get("output"), |s| {
        Ok(s.to_string())
    })
    .map_err(CliError::config)?
    {
        write_output(&format!("{prefix}_stability.csv"), &stability_csv(&report))?;
    }
    Ok(())
}

pub fn converge(args: ConvergeArgs) -> CmdResult {
    let cfg = load_config(&args.common.config)?;
    let sys = build_system(
        args.common.model.clone(),
        args.common.set.clone(),
        &cfg,
        Some("predator_prey"),
    )?;
    let alphas = resolve(
        "alpha",
        args.alpha
            .as_deref()
            .map(parse_alpha_list)
            .transpose()
            .map_err(CliError::config)?,
        cfg.get("alpha"),
        parse_alpha_list,
        Some(
            [0.5, 0.6, 0.7, 0.8, 0.9]
                .iter()
                .map(|&a| FractionalOrder::new(a).expect("valid order"))
                .collect(),
        ),
    )
    .map_err(CliError::config)?;
    let ladder = resolve(
        "ladder",
        args.ladder
            .as_deref()
            .map(parse_step_list)
            .transpose()
            .map_err(CliError::config)?,
        cfg.get("ladder"),
        parse_step_list,
        Some((3..=7).map(|e| 2f64.powi(-e)).collect()),
    )
    .map_err(CliError::config)?;
    let h_star = resolve(
        "h-star",
        args.h_star
            .as_deref()
            .map(parse_step)
            .transpose()
            .map_err(CliError::config)?,
        cfg.get("h-star"),
        parse_step,
        Some(2f64.powi(-12)),
    )
    .map_err(CliError::config)?;
    let x0 = resolve(
        "x0",
        args.x0
            .as_deref()
            .map(parse_vector)
            .transpose()
            .map_err(CliError::config)?,
        cfg.get("x0"),
        parse_vector,
        Some(vec![0.05, 0.05]),
    )
    .map_err(CliError::config)?;
    let t_end = resolve("T", args.t_end, cfg.get("T"), parse_f64, Some(1.0))
        .map_err(CliError::config)?;

    // Each order gets its own reference run; they are independent.
    let tables: Vec<Result<RateTable, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = alphas
            .iter()
            .map(|&alpha| {
                let (sys, x0, ladder) = (&sys, &x0, &ladder);
                scope.spawn(move || {
                    rate_table(sys, alpha, x0, t_end, ladder, h_star).map_err(from_core)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|handle| handle.join().expect("solver threads do not panic"))
            .collect()
    });
    let tables = tables.into_iter().collect::<Result<Vec<_>, _>>()?;

    println!(
        "model {} x0 ({}) T {} reference h* {}",
        sys.name(),
        x0.iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(", "),
        t_end,
        h_star
    );
    print!("{}", render_rate_tables_text(&tables));
    if let Some(prefix) = resolve_opt("output", args.output.clone(), cfg.get("output"), |s| {
        Ok(s.to_string())
    })
    .map_err(CliError::config)?
    {
        write_output(&format!("{prefix}_rates.csv"), &render_rate_tables_csv(&tables))?;
    }
    Ok(())
}

pub fn compare(args: CompareArgs) -> CmdResult {
    let cfg = load_config(&args.common.config)?;
    let sys = build_system(args.common.model.clone(), args.common.set.clone(), &cfg, None)?;
    let alpha_list = resolve(
        "alpha",
        args.alpha
            .as_deref()
            .map(parse_alpha_list)
            .transpose()
            .map_err(CliError::config)?,
        cfg.get("alpha"),
        parse_alpha_list,
        None,
    )
    .map_err(CliError::config)?;
    let [alpha] = alpha_list.as_slice() else {
        return Err(config_error(anyhow!("compare takes exactly one --alpha value")));
    };
    let alpha = *alpha;
    let x0 = resolve(
        "x0",
        args.x0
            .as_deref()
            .map(parse_vector)
            .transpose()
            .map_err(CliError::config)?,
        cfg.get("x0"),
        parse_vector,
        None,
    )
    .map_err(CliError::config)?;
    let t0 = resolve("t0", args.t0, cfg.get("t0"), parse_f64, Some(0.0)).map_err(CliError::config)?;
    let t_end = resolve("T", args.t_end, cfg.get("T"), parse_f64, None).map_err(CliError::config)?;
    let h_nsfd = resolve("h-nsfd", args.h_nsfd, cfg.get("h-nsfd"), parse_step, None)
        .map_err(CliError::config)?;
    let h_gl = resolve("h-gl", args.h_gl, cfg.get("h-gl"), parse_step, None)
        .map_err(CliError::config)?;
    let opts = SolverOptions {
        gl_explicit: args.gl_explicit,
        ..SolverOptions::default()
    };

    if t_end == t0 {
        println!("empty comparison: T = t0 = {t0}, nothing to integrate");
        return Ok(());
    }
    let ratio = h_nsfd / h_gl;
    let k = ratio.round();
    if k < 1.0 || (k * h_gl - h_nsfd).abs() > 1e-9 * h_nsfd {
        return Err(config_error(anyhow!(
            "h-nsfd = {h_nsfd} must be an integer multiple of h-gl = {h_gl} for a common grid"
        )));
    }
    let k = k as usize;

    let nsfd_grid = Grid::from_span(t0, t_end, h_nsfd).map_err(from_core)?;
    let start = Instant::now();
    let nsfd = integrate(&sys, SchemeKind::Nsfd, alpha, &x0, nsfd_grid, &opts).map_err(from_core)?;
    let nsfd_time = start.elapsed();

    let gl_grid = Grid::from_span(t0, t_end, h_gl).map_err(from_core)?;
    let start = Instant::now();
    let gl = integrate(&sys, SchemeKind::Gl, alpha, &x0, gl_grid, &opts).map_err(from_core)?;
    let gl_time = start.elapsed();

    let mut max_diff = 0.0f64;
    for (i, state) in nsfd.states.iter().enumerate() {
        let other = &gl.states[i * k];
        for (a, b) in state.iter().zip(other) {
            max_diff = max_diff.max((a - b).abs());
        }
    }

    let fmt_state = |s: &[f64]| {
        s.iter()
            .map(|v| format!("{v:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    println!("scheme comparison on {} over [{t0}, {t_end}], alpha = {alpha}", sys.name());
    println!(
        "NSFD: h = {h_nsfd}, {} steps, {:.3?}, final ({})",
        nsfd.len() - 1,
        nsfd_time,
        fmt_state(nsfd.final_state())
    );
    println!(
        "GL{}:   h = {h_gl}, {} steps, {:.3?}, final ({})",
        if opts.gl_explicit { " (explicit)" } else { "" },
        gl.len() - 1,
        gl_time,
        fmt_state(gl.final_state())
    );
    println!("max node difference on the h = {h_nsfd} grid: {max_diff:.6e}");
    println!(
        "wall-clock ratio GL/NSFD: {:.2}",
        gl_time.as_secs_f64() / nsfd_time.as_secs_f64()
    );
    Ok(())
}

pub fn validate(args: ValidateArgs) -> CmdResult {
    let cfg = load_config(&args.common.config)?;
    let samples = resolve(
        "samples",
        args.samples,
        cfg.get("samples"),
        parse_usize,
        Some(1000),
    )
    .map_err(CliError::config)?;
    let box_max = resolve(
        "box-max",
        args.box_max,
        cfg.get("box-max"),
        parse_f64,
        Some(DEFAULT_BOX_MAX),
    )
    .map_err(CliError::config)?;
    let seed = resolve(
        "seed",
        args.common.seed,
        cfg.get("seed"),
        parse_u64,
        Some(default_seed().map_err(CliError::config)?),
    )
    .map_err(CliError::config)?;

    let names: Vec<String> = match resolve_opt(
        "model",
        args.common.model.clone(),
        cfg.get("model"),
        |s| Ok(s.to_string()),
    )
    .map_err(CliError::config)?
    {
        Some(name) => vec![name],
        None => MODEL_NAMES.iter().map(|s| s.to_string()).collect(),
    };
    let overrides = resolve(
        "set",
        args.common
            .set
            .as_deref()
            .map(parse_set)
            .transpose()
            .map_err(CliError::config)?,
        cfg.get("set"),
        parse_set,
        Some(BTreeMap::new()),
    )
    .map_err(CliError::config)?;

    for name in names {
        let sys = build_model(&name, &overrides).map_err(from_core)?;
        println!("model {name} ({} samples, box [0, {box_max}]^{}, seed {seed})", samples, sys.dim());
        let decomposition = validate_decomposition(&sys, samples, box_max, seed).map_err(from_core)?;
        print!("{decomposition}");
        let monotone = check_quasi_monotone(&sys, samples, box_max, seed).map_err(from_core)?;
        print!("{monotone}");
    }
    Ok(())
}
