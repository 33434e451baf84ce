//! Command-line front end. Exit codes: 0 success, 1 usage/config/IO error,
//! 2 run hit the step cap, 3 trace violates an invariant.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lacnav_core::{evaluate, PenaltyAngleMode, PolicyKind, Sequential, SimTrace, Termination};

use crate::compare::compare;
use crate::config::{ConfigError, ExperimentConfig};
use crate::exec::Parallel;
use crate::plot::render_svg;
use crate::results::{summary_line, ResultsFile};
use crate::runner::{simulate, RunError};
use crate::trace::parse_trace;
use crate::verify::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_STEP_CAP: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lacnav", version, about = "Local-action-cell multiagent navigation benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its results, trace and plot.
    Run(RunArgs),
    /// Run several policies over several seeds and tabulate mean measures.
    Compare(CompareArgs),
    /// Re-check a trace: no overlaps, displacement = delta * velocity,
    /// arrivals absorbing.
    Verify {
        trace: PathBuf,
    },
    /// Render a trace as an SVG image.
    Plot {
        trace: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
}

/// Values that override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub policy: Option<PolicyKind>,
    /// Seeds both the simulation and the crowd layout.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Length T of the wUCB window.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub n_actions: Option<usize>,
    #[arg(long)]
    pub penalty_angle_mode: Option<PenaltyAngleMode>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long)]
    pub arrival_tol: Option<f64>,
    /// Output directory (default: config `output`, then $LACNAV_OUT_DIR, then `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, c: &mut ExperimentConfig) {
        let sim = &mut c.sim;
        if let Some(v) = self.policy {
            sim.policy = v;
        }
        if let Some(v) = self.seed {
            sim.seed = v;
            c.scenario.seed = v;
        }
        if let Some(v) = self.zeta {
            sim.penalty.zeta = v;
        }
        if let Some(v) = self.lambda {
            sim.lac.lambda = v;
        }
        if let Some(v) = self.tau {
            sim.lac.tau = v;
        }
        if let Some(v) = self.gamma {
            sim.learn.gamma = v;
        }
        if let Some(v) = self.eta {
            sim.learn.eta = v;
        }
        if let Some(v) = self.beta {
            sim.learn.beta = v;
        }
        if let Some(v) = self.window {
            sim.learn.window = v;
        }
        if let Some(v) = self.n_actions {
            sim.lac.n_actions = v;
        }
        if let Some(v) = self.penalty_angle_mode {
            sim.penalty.angle_mode = v;
        }
        if let Some(v) = self.max_steps {
            sim.max_steps = v;
        }
        if let Some(v) = self.arrival_tol {
            sim.arrival_tol = v;
        }
        if let Some(v) = &self.out {
            c.output = Some(v.clone());
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, short)]
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Decision-phase threads; traces are identical for any count.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Skip the trace file.
    #[arg(long)]
    pub no_trace: bool,
    /// Also write an SVG plot.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, short)]
    pub config: PathBuf,
    /// Comma-separated policies (default: all).
    #[arg(long)]
    pub policies: Option<String>,
    /// Comma-separated seeds (default: the config's seed).
    #[arg(long)]
    pub seeds: Option<String>,
    #[command(flatten)]
    pub overrides: Overrides,
}

fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let mut c = ExperimentConfig::load(path)?;
    overrides.apply(&mut c);
    c.validate()?;
    Ok(c)
}

/// File stem shared by a run's outputs.
pub fn run_stem(c: &ExperimentConfig) -> String {
    format!("{}_{}_seed{}", c.scenario.kind(), c.sim.policy, c.sim.seed)
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    }
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut c = match load(&args.config, &args.overrides) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    if args.no_trace {
        c.emit.trace = false;
    }
    if args.plot {
        c.emit.plot = true;
    }
    if args.threads == 0 {
        let _ = writeln!(err, "error: --threads must be >= 1");
        return EXIT_ERROR;
    }
    let dir = c.output_dir();
    if let Err(e) = fs::create_dir_all(&dir) {
        let _ = writeln!(err, "error: cannot create {}: {e}", dir.display());
        return EXIT_ERROR;
    }
    let stem = run_stem(&c);
    let trace_path = dir.join(format!("{stem}.trace.csv"));

    let sink = if c.emit.trace {
        match fs::File::create(&trace_path) {
            Ok(f) => Some(BufWriter::new(f)),
            Err(e) => {
                let _ = writeln!(err, "error: cannot write {}: {e}", trace_path.display());
                return EXIT_ERROR;
            }
        }
    } else {
        None
    };
    let outcome = if args.threads > 1 {
        match Parallel::new(args.threads) {
            Ok(pool) => simulate(&c.sim, &c.scenario, &pool, sink),
            Err(e) => {
                let _ = writeln!(err, "error: thread pool: {e}");
                return EXIT_ERROR;
            }
        }
    } else {
        simulate(&c.sim, &c.scenario, &Sequential, sink)
    };
    let summary: SimTrace = match outcome {
        Ok((trace, _)) => trace,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let RunError::Sim(_) = e {
                let _ = writeln!(err, "(run aborted; partial trace left at {})", trace_path.display());
            }
            return EXIT_ERROR;
        }
    };
    let result = evaluate(&summary);
    let results_path = dir.join(format!("{stem}.results.json"));
    let file = ResultsFile::new(c.scenario.kind(), c.sim, result.clone());
    if let Err(e) = write_file(&results_path, &file.to_json()) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_ERROR;
    }
    let _ = writeln!(err, "wrote {}", results_path.display());
    if c.emit.trace {
        let _ = writeln!(err, "wrote {}", trace_path.display());
    }
    if c.emit.plot {
        let plot_path = dir.join(format!("{stem}.svg"));
        let full = if c.emit.trace {
            fs::read_to_string(&trace_path)
                .map_err(|e| e.to_string())
                .and_then(|t| parse_trace(&t).map_err(|e| e.to_string()))
        } else {
            simulate(&c.sim, &c.scenario, &Sequential, Some(Vec::new()))
                .map_err(|e| e.to_string())
                .and_then(|(_, bytes)| {
                    let text = String::from_utf8(bytes.unwrap_or_default()).map_err(|e| e.to_string())?;
                    parse_trace(&text).map_err(|e| e.to_string())
                })
        };
        match full.and_then(|t| write_file(&plot_path, &render_svg(&t))) {
            Ok(()) => {
                let _ = writeln!(err, "wrote {}", plot_path.display());
            }
            Err(e) => {
                let _ = writeln!(err, "error: plot: {e}");
                return EXIT_ERROR;
            }
        }
    }
    let _ = writeln!(out, "{}", summary_line(c.scenario.kind(), c.sim.policy, &result));
    match result.termination {
        Termination::Completed => EXIT_OK,
        Termination::StepCap => EXIT_STEP_CAP,
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("invalid {what} `{s}`")))
        .collect()
}

fn cmd_compare(args: &CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let c = match load(&args.config, &args.overrides) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let policies = match &args.policies {
        Some(text) => parse_list::<PolicyKind>(text, "policy"),
        None => Ok(PolicyKind::ALL.to_vec()),
    };
    let seeds = match &args.seeds {
        Some(text) => parse_list::<u64>(text, "seed"),
        None => Ok(vec![c.sim.seed]),
    };
    let (policies, seeds) = match (policies, seeds) {
        (Ok(p), Ok(s)) => (p, s),
        (Err(e), _) | (_, Err(e)) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    if policies.is_empty() || seeds.is_empty() {
        let _ = writeln!(err, "error: need at least one policy and one seed");
        return EXIT_ERROR;
    }
    let report = compare(&c, &policies, &seeds);
    let dir = c.output_dir();
    let stem = format!("{}_compare", c.scenario.kind());
    for (ext, body) in [("csv", report.to_csv()), ("json", report.to_json())] {
        let path = dir.join(format!("{stem}.{ext}"));
        if let Err(e) = write_file(&path, &body) {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
        let _ = writeln!(err, "wrote {}", path.display());
    }
    let _ = write!(out, "{}", report.to_table());
    EXIT_OK
}

fn read_trace(path: &Path, err: &mut dyn Write) -> Option<SimTrace> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            return None;
        }
    };
    match parse_trace(&text) {
        Ok(t) => Some(t),
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            None
        }
    }
}

fn cmd_verify(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(trace) = read_trace(path, err) else {
        return EXIT_ERROR;
    };
    match verify(&trace) {
        None => {
            let _ = writeln!(
                out,
                "ok: {} steps, {} agents, termination={}",
                trace.steps.len(),
                trace.agents.len(),
                trace.termination.as_str()
            );
            EXIT_OK
        }
        Some(v) => {
            let _ = writeln!(out, "violation: {v}");
            EXIT_VIOLATION
        }
    }
}

fn cmd_plot(path: &Path, target: &Path, err: &mut dyn Write) -> i32 {
    let Some(trace) = read_trace(path, err) else {
        return EXIT_ERROR;
    };
    match fs::write(target, render_svg(&trace)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: cannot write {}: {e}", target.display());
            EXIT_ERROR
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match &cli.command {
        Command::Run(args) => cmd_run(args, out, err),
        Command::Compare(args) => cmd_compare(args, out, err),
        Command::Verify { trace } => cmd_verify(trace, out, err),
        Command::Plot { trace, out: target } => cmd_plot(trace, target, err),
    }
}
