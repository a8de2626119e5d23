//! Command-line front end: `maxcut solve` and `maxcut check`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::{
    certify, laplacian, load_graph, rank_escalation, round_cut, solve_rank_r, build_problem,
    EscalationOptions, SolverKind, CERT_TOL,
};
use crate::diagnostics::{check_gradient, check_hessian};
use crate::error::{Error, Result};
use crate::solvers::{Clock, SolverOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNCERTIFIED: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "maxcut", about = "Max-cut via low-rank elliptope relaxations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the relaxation, round it to a cut, and try to certify it.
    Solve(SolveArgs),
    /// Run the gradient and Hessian slope checks on the relaxation.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    Tr,
    Cg,
    Sd,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Tr => SolverKind::TrustRegions,
            SolverArg::Cg => SolverKind::ConjugateGradient,
            SolverArg::Sd => SolverKind::SteepestDescent,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
struct SolveArgs {
    /// Edge-list file: lines `i j [w]`, optional header `p <n> <m>`.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    /// Raise the rank until the solution is certified.
    #[arg(long)]
    escalate: bool,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Certification tolerance, relative to the 1-norm of the Laplacian.
    #[arg(long, default_value_t = CERT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SolverArg::Tr)]
    solver: SolverArg,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    out: OutputFormat,
    /// Write the per-iteration solver history as CSV.
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Report zero for all timings, making output reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Print one line per solver iteration.
    #[arg(short, long)]
    verbose: bool,
}

#[derive(Debug, clap::Args)]
struct CheckArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Serialize)]
struct Summary {
    n: usize,
    rank_used: usize,
    cost: f64,
    cut: f64,
    bound: Option<f64>,
    certified: bool,
    seed: u64,
    iterations: usize,
    time_seconds: f64,
}

impl Summary {
    fn csv(&self) -> String {
        let bound = self.bound.map(|b| b.to_string()).unwrap_or_default();
        format!(
            "n,rank_used,cost,cut,bound,certified,seed,iterations,time_seconds\n{},{},{},{},{},{},{},{},{}\n",
            self.n,
            self.rank_used,
            self.cost,
            self.cut,
            bound,
            self.certified,
            self.seed,
            self.iterations,
            self.time_seconds
        )
    }

    fn text(&self) -> String {
        let bound = self
            .bound
            .map(|b| format!("{b:.10}"))
            .unwrap_or_else(|| "none".into());
        format!(
            "nodes:       {}\nrank used:   {}\nrelaxation:  {:.10}\ncut:         {}\nbound:       {}\ncertified:   {}\nseed:        {}\niterations:  {}\ntime:        {:.3} s\n",
            self.n,
            self.rank_used,
            self.cost,
            self.cut,
            bound,
            self.certified,
            self.seed,
            self.iterations,
            self.time_seconds
        )
    }
}

/// Parses `args` (program name first) and runs the command, writing to
/// `out` and `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Check(a) => check(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let graph = load_graph(&a.graph)?;
    let l = laplacian(&graph);
    let mut rng = crate::rng_from_seed(a.seed);
    let solver_options = SolverOptions {
        max_iter: a.max_iter,
        min_iter: a.max_iter.min(SolverOptions::default().min_iter),
        verbosity: if a.verbose { 2 } else { 0 },
        seed: a.seed,
        clock: if a.no_timing { Clock::Frozen } else { Clock::Wall },
        ..SolverOptions::default()
    };
    let opts = EscalationOptions {
        solver: a.solver.into(),
        solver_options,
        cert_tol: a.tol,
        trials: a.trials,
    };

    let (summary, history) = if a.escalate {
        let res = rank_escalation(&l, a.rank, &opts, &mut rng)?;
        let summary = Summary {
            n: graph.n(),
            rank_used: res.rank_used,
            cost: res.cost,
            cut: res.cut_value,
            bound: res.upper_bound,
            certified: res.certified,
            seed: a.seed,
            iterations: res.iterations(),
            time_seconds: 0.0,
        };
        (summary, res.history_csv())
    } else {
        if a.rank == 0 {
            return Err(Error::Argument("rank must be at least 1".into()));
        }
        let (y, run) = solve_rank_r(&l, a.rank, opts.solver, &opts.solver_options, &mut rng)?;
        let cut = round_cut(&l, &y, a.trials, &mut rng)?;
        let cert = certify(&l, &y, a.tol).ok();
        let certified = cert.as_ref().is_some_and(|c| c.certified);
        let summary = Summary {
            n: graph.n(),
            rank_used: a.rank,
            cost: run.cost,
            cut: cut.value,
            bound: cert.and_then(|c| c.upper_bound),
            certified,
            seed: a.seed,
            iterations: run.iterations(),
            time_seconds: 0.0,
        };
        (summary, run.history_csv())
    };
    let summary = Summary {
        time_seconds: if a.no_timing {
            0.0
        } else {
            started.elapsed().as_secs_f64()
        },
        ..summary
    };

    if let Some(path) = &a.history {
        std::fs::write(path, history).map_err(|e| Error::io(path, e))?;
    }
    let text = match a.out {
        OutputFormat::Text => summary.text(),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&summary)
                .map_err(|e| Error::Other(format!("serializing summary: {e}")))?;
            s.push('\n');
            s
        }
        OutputFormat::Csv => summary.csv(),
    };
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))?;
    Ok(if a.escalate && !summary.certified {
        EXIT_UNCERTIFIED
    } else {
        EXIT_OK
    })
}

fn check(a: CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let graph = load_graph(&a.graph)?;
    let l = laplacian(&graph);
    let mc = build_problem(&l, a.rank)?;
    let mut rng = crate::rng_from_seed(a.seed);
    let g = check_gradient(&mc.problem, None, None, &mut rng)?;
    let h = check_hessian(&mc.problem, None, None, &mut rng)?;
    writeln!(out, "{g}\n{h}").map_err(|e| Error::io("<stdout>", e))?;
    Ok(if g.passed() && h.passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}
