//! Command-line front end: problem definition, verification, campaigns,
//! forensics, and machine-readable artifacts.
//!
//! Exit codes: 0 success, 2 validation failure, 3 numeric failure,
//! 64 usage error.

mod io;
mod schema;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use landscape_lab::critical::{dae_seed, dae_solve, verify_critical, VerifyOpts};
use landscape_lab::error::Error as CoreError;
use landscape_lab::grouplandscape::{kinematic_classify, sun_trap_ceiling};
use landscape_lab::kernels::{self, definiteness, example_hessian_operator};
use landscape_lab::optimize::{
    batch_campaign, batch_stats, bfgs_run, sequential_run, BatchConfig, Method, OptimizeOpts,
};
use landscape_lab::propagate::{objective_gradient, objective_value, propagate, PiecewiseControl};
use landscape_lab::qcore::random;
use landscape_lab::sysmodel::{critical_pair, larc_classify, registry, RegistryId};
use landscape_lab::trapscan::{perturb_sample, refine_mesh, restart_probe};

use schema::{ControlFile, LoadedProblem, ProblemFile, ResultEnvelope, RunRecordDto};

#[derive(Parser)]
#[command(
    name = "landscape-lab",
    version,
    about = "Control landscapes for bilinear Hamiltonian systems",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ProblemArg {
    /// Registry id (eigenstate3, saddle4, trap4, unitary_trap3[_minus|_plus],
    /// vartime4, qft3) or a path to a problem JSON file.
    #[arg(long)]
    problem: String,
    /// Override the slice count of the problem grid.
    #[arg(long)]
    slices: Option<usize>,
}

#[derive(Args, Clone)]
struct OutArg {
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Re-derive every closed-form example and verify it end to end.
    VerifyExamples {
        #[command(flatten)]
        out: OutArg,
        /// Check all registry entries (default when no --id given).
        #[arg(long)]
        all: bool,
        /// Check a single registry id.
        #[arg(long)]
        id: Option<String>,
    },
    /// Kinematic classification of an endpoint on the group.
    Kinematic {
        #[command(flatten)]
        problem: ProblemArg,
        /// Control file to propagate (defaults to the zero control).
        #[arg(long)]
        control: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Lie-closure controllability verdict.
    Controllability {
        #[command(flatten)]
        problem: ProblemArg,
        /// Also classify the exact-time generating set.
        #[arg(long)]
        exact_time: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Construct a constant-control critical pair at the given fidelity.
    CriticalPair {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        fidelity: f64,
        /// Target time (defaults to the problem horizon).
        #[arg(long)]
        time: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Generate a non-constant critical control by the slaved-control system.
    Dae {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        horizon: f64,
        #[arg(long, default_value_t = 5e-4)]
        step: f64,
        /// Co-state draws to screen.
        #[arg(long, default_value_t = 60)]
        draws: usize,
        /// Slice count of the exported piecewise control.
        #[arg(long, default_value_t = 400)]
        resample: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Integral-kernel operators: spectrum, definiteness, dense export.
    Kernels {
        /// One of: s, c, saddle4, trap4, unitary_trap3_minus,
        /// unitary_trap3_plus, vartime4.
        #[arg(long)]
        example: String,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Horizon for the s/c primitives.
        #[arg(long, default_value_t = std::f64::consts::PI)]
        horizon: f64,
        /// Frequency for the c primitive.
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Single optimization run.
    Optimize {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, default_value = "bfgs")]
        method: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-4)]
        threshold: f64,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        /// Keep iterating past the threshold until the stall rule fires.
        #[arg(long)]
        refine: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Multi-start campaign with checkpointing.
    Batch {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-4)]
        threshold: f64,
        #[arg(long, default_value = "bfgs")]
        method: String,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        #[arg(long)]
        refine: bool,
        /// Checkpoint the partial envelope every N runs.
        #[arg(long, default_value_t = 10)]
        checkpoint_every: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Neighborhood sampling and perturbed restarts around a control.
    Trapscan {
        #[command(flatten)]
        problem: ProblemArg,
        /// Center control file (defaults to the problem's critical control).
        #[arg(long)]
        control: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0.01)]
        scale: f64,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 300)]
        max_iters: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Mesh refinement restart around a control.
    Refine {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        control: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        factor: usize,
        #[arg(long, default_value_t = 300)]
        max_iters: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Suboptimal attractor ceilings on SU(N).
    Ceiling {
        #[arg(long = "N")]
        n: usize,
    },
    /// Write a registry problem as an inline problem file.
    ExportProblem {
        #[arg(long)]
        id: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // usage problems exit 64; help/version print normally
            use clap::error::ErrorKind::*;
            let kind = e.kind();
            let _ = e.print();
            return match kind {
                DisplayHelp | DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    init_workers();
    let started = Instant::now();
    let result = dispatch(cli.command);
    match result {
        Ok(()) => {
            eprintln!("done in {:.2}s", started.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// LANDSCAPE_LAB_THREADS caps the worker count (default: logical cores).
fn init_workers() {
    if let Ok(v) = std::env::var("LANDSCAPE_LAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Numeric(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numeric(m) | CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

fn exit_code_for(e: &CliError) -> u8 {
    match e {
        CliError::Validation(_) => 2,
        CliError::Numeric(_) => 3,
        CliError::Io(_) => 3,
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Numeric(_) | CoreError::BracketFailure(_) | CoreError::EmptyNullSpace => {
                CliError::Numeric(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn load_problem(arg: &ProblemArg) -> Result<LoadedProblem, CliError> {
    let doc = if Path::new(&arg.problem).exists() {
        let text = std::fs::read_to_string(&arg.problem)?;
        serde_json::from_str::<ProblemFile>(&text)
            .map_err(|e| CliError::Validation(format!("problem file parse error: {e}")))?
    } else {
        // must be a registry id; reject unknown names with a validation error
        RegistryId::parse(&arg.problem).map_err(CliError::from)?;
        ProblemFile::for_registry(&arg.problem)
    };
    Ok(doc.load(arg.slices)?)
}

fn load_control(path: &Path) -> Result<PiecewiseControl, CliError> {
    let text = std::fs::read_to_string(path)?;
    let doc: ControlFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("control file parse error: {e}")))?;
    doc.to_control().map_err(CliError::Validation)
}

fn write_envelope(dir: &Path, name: &str, env: &ResultEnvelope) -> CliResult {
    let text = serde_json::to_string_pretty(env)
        .map_err(|e| CliError::Io(e.to_string()))?;
    io::atomic_write(&io::out_path(dir, name), text.as_bytes())?;
    Ok(())
}

fn parse_method(s: &str) -> Result<Method, CliError> {
    match s {
        "bfgs" => Ok(Method::Bfgs),
        "sequential" => Ok(Method::Sequential),
        other => Err(CliError::Validation(format!(
            "unknown method '{other}' (bfgs|sequential)"
        ))),
    }
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::VerifyExamples { out, all, id } => verify_examples(&out.out, all, id),
        Command::Kinematic {
            problem,
            control,
            tol,
            out,
        } => {
            let p = load_problem(&problem)?;
            let f = match control {
                Some(path) => load_control(&path)?,
                None => p
                    .example
                    .as_ref()
                    .and_then(|e| e.critical_control.clone())
                    .unwrap_or_else(|| p.template.clone()),
            };
            let traj = propagate(&p.system, &f)?;
            let rep = kinematic_classify(&p.objective, traj.endpoint(), tol)?;
            println!(
                "{}: critical={} value={:.9} class={:?}",
                p.label, rep.is_critical, rep.critical_value, rep.classification
            );
            let env = ResultEnvelope::new(
                "kinematic",
                json!({"problem": p.label, "tol": tol}),
                vec![],
                serde_json::to_value(&rep).unwrap(),
            );
            write_envelope(&out.out, "kinematic.json", &env)
        }
        Command::Controllability {
            problem,
            exact_time,
            out,
        } => {
            let p = load_problem(&problem)?;
            let v = larc_classify(&p.system, exact_time);
            println!(
                "{}: algebra_dim={} classification={:?} exact_time={:?}",
                p.label, v.algebra_dim, v.classification, v.exact_time
            );
            let env = ResultEnvelope::new(
                "controllability",
                json!({"problem": p.label, "exact_time": exact_time}),
                vec![],
                serde_json::to_value(&v).unwrap(),
            );
            write_envelope(&out.out, "controllability.json", &env)
        }
        Command::CriticalPair {
            problem,
            fidelity,
            time,
            out,
        } => {
            let p = load_problem(&problem)?;
            let t = time.unwrap_or_else(|| p.template.horizon());
            let pair = critical_pair(&p.system, fidelity, t)?;
            println!(
                "{}: mu={:.9e} gradient_norm={:.3e}",
                p.label, pair.mu, pair.gradient_norm
            );
            let payload = json!({
                "mu": pair.mu,
                "gradient_norm": pair.gradient_norm,
                "psi0": schema::vec_to_json(pair.psi0.vec()),
                "psig": schema::vec_to_json(pair.psig.vec()),
                "fidelity": fidelity,
                "time": t,
            });
            let env = ResultEnvelope::new(
                "critical-pair",
                json!({"problem": p.label, "fidelity": fidelity, "time": t}),
                vec![],
                payload,
            );
            write_envelope(&out.out, "critical_pair.json", &env)
        }
        Command::Dae {
            problem,
            seed,
            horizon,
            step,
            draws,
            resample,
            out,
        } => {
            let p = load_problem(&problem)?;
            let psi0 = random::state(p.system.dim(), &mut random::rng(seed));
            let seeds = dae_seed(&p.system, &psi0, draws, seed)?;
            let sol = seeds
                .iter()
                .find_map(|s| {
                    dae_solve(&p.system, &psi0, s, horizon, step)
                        .ok()
                        .filter(|sol| !sol.halted_early(horizon) && sol.non_constant())
                })
                .ok_or_else(|| {
                    CliError::Numeric(
                        "no admissible co-state integrated over the full horizon".into(),
                    )
                })?;
            let f = sol.to_piecewise(resample);
            let obj = landscape_lab::grouplandscape::Objective::pure_state(
                psi0.clone(),
                sol.psi_g.clone(),
            )?;
            let g = objective_gradient(&p.system, &f, &obj)?;
            println!(
                "{}: horizon={:.3} fidelity={:.9} residual={:.2e} discretized gradient={:.3e}",
                p.label, sol.validity_horizon, sol.fidelity, sol.max_residual, g.norm()
            );
            io::write_sampled_control(
                &io::out_path(&out.out, "dae_control.csv"),
                &sol.times,
                &sol.controls,
            )?;
            let payload = json!({
                "validity_horizon": sol.validity_horizon,
                "fidelity": sol.fidelity,
                "max_residual": sol.max_residual,
                "df_dt0": sol.df_dt0,
                "non_constant": sol.non_constant(),
                "discretized_gradient_norm": g.norm(),
                "control": ControlFile::from_control(&f),
            });
            let env = ResultEnvelope::new(
                "dae",
                json!({"problem": p.label, "seed": seed, "horizon": horizon, "step": step}),
                vec![seed],
                payload,
            );
            write_envelope(&out.out, "dae.json", &env)
        }
        Command::Kernels {
            example,
            grid,
            horizon,
            omega,
            out,
        } => {
            let op = match example.as_str() {
                "s" => kernels::build_s(horizon),
                "c" => kernels::build_c(omega, horizon),
                other => example_hessian_operator(RegistryId::parse(other)?)?,
            };
            let rep = definiteness(&op, grid);
            println!(
                "{}: grid={} eig range [{:.6e}, {:.6e}] verdict {:?}",
                example, grid, rep.min_eig, rep.max_eig, rep.verdict
            );
            io::write_matrix(
                &io::out_path(&out.out, &format!("kernel_{example}.csv")),
                &op.discretize(grid),
            )?;
            let env = ResultEnvelope::new(
                "kernels",
                json!({"example": example, "grid": grid, "horizon": horizon, "omega": omega}),
                vec![],
                serde_json::to_value(&rep).unwrap(),
            );
            write_envelope(&out.out, &format!("kernel_{example}.json"), &env)
        }
        Command::Optimize {
            problem,
            method,
            seed,
            threshold,
            max_iters,
            refine,
            out,
        } => {
            let p = load_problem(&problem)?;
            let opts = OptimizeOpts {
                max_iters,
                threshold,
                refine_after_threshold: refine,
                ..Default::default()
            };
            let init =
                landscape_lab::optimize::batch_init(&p.template, seed, 0, 1.0);
            let mut rec = match parse_method(&method)? {
                Method::Bfgs => bfgs_run(&p.system, &p.objective, &init, &opts)?,
                Method::Sequential => sequential_run(&p.system, &p.objective, &init, &opts)?,
            };
            rec.seed = seed;
            println!(
                "{}: terminal error {:.3e} after {} iterations ({:?})",
                p.label, rec.terminal_error, rec.iterations, rec.termination
            );
            io::write_histories(
                &io::out_path(&out.out, "history.csv"),
                &[rec.error_history.clone()],
            )?;
            let env = ResultEnvelope::new(
                "optimize",
                json!({
                    "problem": p.label, "method": method, "seed": seed,
                    "threshold": threshold, "max_iters": max_iters, "refine": refine
                }),
                vec![seed],
                serde_json::to_value(RunRecordDto::from_record(&rec)).unwrap(),
            );
            write_envelope(&out.out, "run.json", &env)
        }
        Command::Batch {
            problem,
            runs,
            seed,
            threshold,
            method,
            max_iters,
            refine,
            checkpoint_every,
            out,
        } => {
            let p = load_problem(&problem)?;
            let method_parsed = parse_method(&method)?;
            let opts = OptimizeOpts {
                max_iters,
                threshold,
                refine_after_threshold: refine,
                ..Default::default()
            };
            let config_echo = json!({
                "problem": p.label, "runs": runs, "seed_base": seed,
                "threshold": threshold, "method": method, "max_iters": max_iters,
                "refine": refine,
            });
            let mut records = Vec::with_capacity(runs);
            let mut done = 0usize;
            while done < runs {
                let chunk = checkpoint_every.max(1).min(runs - done);
                let cfg = BatchConfig {
                    runs: chunk,
                    seed_base: seed + done as u64,
                    method: method_parsed,
                    opts,
                    init_std: 1.0,
                    keep_histories: true,
                };
                records.extend(batch_campaign(&p.system, &p.objective, &p.template, &cfg)?);
                done += chunk;
                let stats = batch_stats(&records, threshold, false);
                let env = ResultEnvelope::new(
                    "batch",
                    config_echo.clone(),
                    (0..done).map(|i| seed + i as u64).collect(),
                    serde_json::to_value(&stats).unwrap(),
                );
                write_envelope(&out.out, "batch_checkpoint.json", &env)?;
                eprintln!("checkpoint: {done}/{runs} runs");
            }
            let stats = batch_stats(&records, threshold, false);
            println!(
                "{}: {}/{} runs below threshold {:.1e}",
                p.label, stats.success_count, stats.runs, threshold
            );
            io::write_histogram(&io::out_path(&out.out, "histogram.csv"), &stats.histogram)?;
            io::write_cumulative(
                &io::out_path(&out.out, "cumulative.csv"),
                &stats.cumulative,
            )?;
            let histories: Vec<Vec<f64>> =
                records.iter().map(|r| r.error_history.clone()).collect();
            io::write_histories(&io::out_path(&out.out, "histories.csv"), &histories)?;
            let env = ResultEnvelope::new(
                "batch",
                config_echo,
                (0..runs).map(|i| seed + i as u64).collect(),
                serde_json::to_value(&stats).unwrap(),
            );
            write_envelope(&out.out, "batch.json", &env)
        }
        Command::Trapscan {
            problem,
            control,
            samples,
            scale,
            restarts,
            delta,
            seed,
            max_iters,
            out,
        } => {
            let p = load_problem(&problem)?;
            let center = match control {
                Some(path) => load_control(&path)?,
                None => p
                    .example
                    .as_ref()
                    .and_then(|e| e.critical_control.clone())
                    .ok_or_else(|| {
                        CliError::Validation(
                            "no --control given and the problem has no stored critical control"
                                .into(),
                        )
                    })?,
            };
            let dossier = perturb_sample(&p.system, &p.objective, &center, samples, scale, seed)?;
            let opts = OptimizeOpts {
                max_iters,
                ..Default::default()
            };
            let probe =
                restart_probe(&p.system, &p.objective, &center, delta, restarts, &opts, seed)?;
            println!(
                "{}: fraction_below={:.4} escapes={}/{}",
                p.label, dossier.fraction_below, probe.escapes, probe.runs
            );
            io::write_scatter(&io::out_path(&out.out, "scatter.csv"), &dossier.scatter)?;
            let diffs: Vec<Vec<f64>> = probe
                .records
                .iter()
                .map(|r| {
                    r.error_history
                        .iter()
                        .map(|e| (1.0 - e) - probe.center_fidelity)
                        .collect()
                })
                .collect();
            io::write_histories(&io::out_path(&out.out, "restart_histories.csv"), &diffs)?;
            let payload = json!({
                "dossier": {
                    "center_fidelity": dossier.center_fidelity,
                    "samples": dossier.samples,
                    "fraction_below": dossier.fraction_below,
                    "max_sampled_fidelity": dossier.max_sampled_fidelity,
                },
                "restarts": {
                    "runs": probe.runs,
                    "escapes": probe.escapes,
                    "terminal_errors": probe.records.iter().map(|r| r.terminal_error).collect::<Vec<_>>(),
                },
            });
            let env = ResultEnvelope::new(
                "trapscan",
                json!({
                    "problem": p.label, "samples": samples, "scale": scale,
                    "restarts": restarts, "delta": delta, "seed": seed
                }),
                vec![seed],
                payload,
            );
            write_envelope(&out.out, "trapscan.json", &env)
        }
        Command::Refine {
            problem,
            control,
            factor,
            max_iters,
            out,
        } => {
            let p = load_problem(&problem)?;
            let center = match control {
                Some(path) => load_control(&path)?,
                None => p
                    .example
                    .as_ref()
                    .and_then(|e| e.critical_control.clone())
                    .ok_or_else(|| {
                        CliError::Validation(
                            "no --control given and the problem has no stored critical control"
                                .into(),
                        )
                    })?,
            };
            let opts = OptimizeOpts {
                max_iters,
                ..Default::default()
            };
            let stats = refine_mesh(&p.system, &p.objective, &center, factor, &opts)?;
            println!(
                "{}: error {:.6e} -> {:.6e} (relative reduction {:.4})",
                p.label, stats.error_before, stats.error_after, stats.relative_reduction
            );
            let payload = json!({
                "factor": stats.factor,
                "resample_drift": stats.resample_drift,
                "error_before": stats.error_before,
                "error_after": stats.error_after,
                "relative_reduction": stats.relative_reduction,
            });
            let env = ResultEnvelope::new(
                "refine",
                json!({"problem": p.label, "factor": factor}),
                vec![],
                payload,
            );
            write_envelope(&out.out, "refine.json", &env)
        }
        Command::Ceiling { n } => {
            if n < 2 {
                return Err(CliError::Validation("need N >= 2".into()));
            }
            let c = sun_trap_ceiling(n);
            if c.is_empty() {
                println!("no suboptimal attractor ceilings for N = {n}");
            } else {
                let rendered: Vec<String> = c.iter().map(|v| format!("{v:.10}")).collect();
                println!("{{{}}}", rendered.join(", "));
            }
            Ok(())
        }
        Command::ExportProblem { id, out } => {
            let rid = RegistryId::parse(&id)?;
            let example = registry(rid)?;
            let template = example
                .critical_control
                .clone()
                .unwrap_or_else(|| PiecewiseControl::zeros(example.system.channels(), 140, example.target_time));
            let doc = ProblemFile::inline_from_example(&example, &template);
            let text = serde_json::to_string_pretty(&doc)
                .map_err(|e| CliError::Io(e.to_string()))?;
            io::atomic_write(&out, text.as_bytes())?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

/// Runs every registry entry with a stored critical control through the
/// critical-point verifier and prints a table.
fn verify_examples(out_dir: &Path, _all: bool, only: Option<String>) -> CliResult {
    let ids: Vec<&str> = vec![
        "eigenstate3",
        "saddle4",
        "trap4",
        "unitary_trap3_minus",
        "unitary_trap3_plus",
        "vartime4",
    ];
    let selected: Vec<&str> = match &only {
        Some(id) => vec![id.as_str()],
        None => ids,
    };
    println!(
        "{:<22} {:>12} {:>12} {:>13} {:>10} {:>24} {:>6}",
        "example", "fidelity", "expected", "gradient", "hessian", "classification", "pass"
    );
    let mut rows = Vec::new();
    let mut all_pass = true;
    for id in selected {
        let rid = RegistryId::parse(id)?;
        let example = registry(rid)?;
        let control = example.critical_control.clone().ok_or_else(|| {
            CliError::Validation(format!("{id} has no closed-form critical control"))
        })?;
        let rep = verify_critical(
            &example.system,
            &example.objective,
            &control,
            VerifyOpts::default(),
        )?;
        let expected = example.expected_fidelity.unwrap();
        let value = objective_value(
            &example.objective,
            &propagate(&example.system, &control)?,
        );
        let hessian = if rep.hessian_spectrum.max < 0.0 {
            "neg-def"
        } else if rep.hessian_spectrum.positive == 0 {
            "neg-semi"
        } else {
            "mixed"
        };
        let pass = (value - expected).abs() < 1e-9 && rep.gradient_norm < 1e-8;
        all_pass &= pass;
        println!(
            "{:<22} {:>12.9} {:>12.9} {:>13.3e} {:>10} {:>24} {:>6}",
            example.id,
            value,
            expected,
            rep.gradient_norm,
            hessian,
            format!("{:?}", rep.classification),
            if pass { "yes" } else { "NO" }
        );
        rows.push(json!({
            "id": example.id,
            "fidelity": value,
            "expected_fidelity": expected,
            "gradient_norm": rep.gradient_norm,
            "hessian": hessian,
            "classification": format!("{:?}", rep.classification),
            "pass": pass,
        }));
    }
    let env = ResultEnvelope::new("verify-examples", json!({}), vec![], Value::Array(rows));
    write_envelope(out_dir, "verify_examples.json", &env)?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Numeric("some examples failed verification".into()))
    }
}
