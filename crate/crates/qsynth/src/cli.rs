//! The `qsynth` command line.
//!
//! Exit codes: 0 on success, 2 when no safe program exists, 1 on any error.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use num_traits::Zero;
use qsynth_core::gallery::{sat_gadget, GadgetObjective};
use qsynth_core::game::{Checks, DEFAULT_STATE_CAP};
use qsynth_core::model::PartialProgram;
use qsynth_core::perf::{PerformanceAutomaton, Scheduler};
use qsynth_core::synthesis::{
    describe_strategy, prepare, prepare_game, value_of_program, Options, Outcome,
};
use qsynth_core::Q;

use crate::bench::{parse_param, parse_sweep, run_bench, BenchConfig};
use crate::dimacs::parse_dimacs;
use crate::frontend::{
    emit_resolved_program, parse_partial_program, parse_performance_automaton, parse_scheduler,
    SourceFile, SourceKind,
};
use crate::parallel::resolve_parallel;
use crate::report::{candidates_csv, provenance_json, value_line, Inputs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_SAFE_PROGRAM: i32 = 2;

/// Environment variable overriding the game state cap.
pub const STATE_CAP_VAR: &str = "QSYNTH_STATE_CAP";

#[derive(Debug, Parser)]
#[command(
    name = "qsynth",
    version,
    about = "Cheapest safe resolution of concurrent partial programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the cheapest safe program allowed by a partial program.
    Synth(SynthArgs),
    /// Print the long-run average cost of a choice-free program.
    Value(ValueArgs),
    /// Sweep parameters of a built-in example and tabulate the optima.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Performance automaton file (default: everything is free).
    #[arg(long)]
    pub perf: Option<PathBuf>,
    /// Scheduler file (default: uniform).
    #[arg(long)]
    pub sched: Option<PathBuf>,
    /// Safety conditions: a comma list of `race`, `deadlock`, or `none`.
    #[arg(long, default_value = "race,deadlock")]
    pub check: String,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Partial program file.
    #[arg(required_unless_present = "cnf", conflicts_with = "cnf")]
    pub program: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Solve the reduction game of a DIMACS formula instead of a program.
    #[arg(long)]
    pub cnf: Option<PathBuf>,
    /// With `--cnf`: the losing state costs 1 per step instead of being unsafe.
    #[arg(long, requires = "cnf")]
    pub limavg: bool,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Output directory for optimal.prog, report.csv and report.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Write the game graph in DOT format to this file.
    #[arg(long)]
    pub dump_game: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Quotient by the program's abstraction directives.
    #[arg(long = "abstract")]
    pub abstraction: bool,
    /// Quotient every candidate by its coarsest bisimulation.
    #[arg(long)]
    pub minimize: bool,
    /// Evaluate every strategy instead of pruning provably unsafe ones.
    #[arg(long)]
    pub no_prune: bool,
    /// Offer every set of disjoint transitions, not only maximal ones.
    #[arg(long)]
    pub all_subsets: bool,
    /// Worker threads for candidate evaluation (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct ValueArgs {
    /// Choice-free program file.
    pub program: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// prodcons, optimistic, worksharing or cache.
    pub gallery: String,
    /// Fixed parameter, `key=value`.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Swept parameter, `key=a..b` or `key=v1,v2,...`.
    #[arg(long = "sweep", value_name = "KEY=VALUES")]
    pub sweeps: Vec<String>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

pub fn execute(cli: &Cli) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Value(a) => value(a),
        Command::Bench(a) => bench(a),
    }
}

pub fn parse_checks(text: &str) -> anyhow::Result<Checks> {
    let mut checks = Checks::NONE;
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part {
            "race" => checks.race = true,
            "deadlock" => checks.deadlock = true,
            "none" => {}
            other => bail!("unknown check `{other}` (expected race, deadlock or none)"),
        }
    }
    Ok(checks)
}

pub fn state_cap() -> anyhow::Result<usize> {
    match std::env::var(STATE_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{STATE_CAP_VAR} must be a count, got `{v}`")),
        Err(_) => Ok(DEFAULT_STATE_CAP),
    }
}

fn options(search: &SearchArgs, checks: Checks) -> anyhow::Result<Options> {
    Ok(Options {
        checks,
        abstraction: search.abstraction,
        minimize: search.minimize,
        prune: !search.no_prune,
        all_subsets: search.all_subsets,
        state_cap: state_cap()?,
    })
}

fn read(path: &Path, kind: SourceKind) -> anyhow::Result<SourceFile> {
    SourceFile::read(path, kind)
        .with_context(|| format!("cannot read {kind} file {}", path.display()))
}

/// One state in which every label the program uses costs nothing.
fn free_actions(p: &PartialProgram) -> PerformanceAutomaton {
    let labels: BTreeSet<&str> = p
        .threads
        .iter()
        .flat_map(|t| &t.transitions)
        .filter_map(|t| t.symbol.as_deref())
        .collect();
    let free: Vec<(&str, Q)> = labels.into_iter().map(|l| (l, Q::zero())).collect();
    PerformanceAutomaton::single_state(&free)
}

/// Program, automaton and scheduler named by the arguments.
pub fn load_model(
    program: &Path,
    model: &ModelArgs,
) -> anyhow::Result<(PartialProgram, PerformanceAutomaton, Scheduler)> {
    let src = read(program, SourceKind::Program)?;
    let p =
        parse_partial_program(&src.text).with_context(|| format!("in {}", src.path.display()))?;
    let perf = match &model.perf {
        Some(path) => {
            let src = read(path, SourceKind::Perf)?;
            parse_performance_automaton(&src.text)
                .with_context(|| format!("in {}", src.path.display()))?
        }
        None => free_actions(&p),
    };
    let names: Vec<String> = p.threads.iter().map(|t| t.name.clone()).collect();
    let sched = match &model.sched {
        Some(path) => {
            let src = read(path, SourceKind::Sched)?;
            parse_scheduler(&src.text, &names)
                .with_context(|| format!("in {}", src.path.display()))?
        }
        None => Scheduler::uniform(names.len()),
    };
    Ok((p, perf, sched))
}

fn display(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

fn synth(a: &SynthArgs) -> anyhow::Result<i32> {
    let checks = parse_checks(&a.model.check)?;
    let opts = options(&a.search, checks)?;
    let inputs = Inputs {
        program: display(&a.program),
        perf: display(&a.model.perf),
        sched: display(&a.model.sched),
        cnf: display(&a.cnf),
    };
    let (prep, source) = match (&a.cnf, &a.program) {
        (Some(cnf), _) => {
            let text = std::fs::read_to_string(cnf)
                .with_context(|| format!("cannot read {}", cnf.display()))?;
            let formula = parse_dimacs(&text).with_context(|| format!("in {}", cnf.display()))?;
            let objective = if a.limavg {
                GadgetObjective::LimAvg
            } else {
                GadgetObjective::Safety
            };
            (
                prepare_game(sat_gadget(&formula, objective), Checks::NONE, opts.prune),
                None,
            )
        }
        (None, Some(program)) => {
            let (p, perf, sched) = load_model(program, &a.model)?;
            (prepare(&p, &sched, &perf, &opts)?, Some(p))
        }
        (None, None) => bail!("a program file or --cnf is required"),
    };
    std::fs::create_dir_all(&a.out)
        .with_context(|| format!("cannot create {}", a.out.display()))?;
    if let Some(path) = &a.dump_game {
        std::fs::write(path, prep.game.to_dot())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    let outcome = resolve_parallel(&prep, source.as_ref(), a.search.threads)?;
    std::fs::write(
        a.out.join("report.csv"),
        candidates_csv(&prep.game, outcome.report())?,
    )?;
    std::fs::write(
        a.out.join("report.json"),
        provenance_json(&inputs, &opts, &prep.game, &outcome)?,
    )?;
    match &outcome {
        Outcome::Optimal {
            strategy, value, ..
        } => {
            if let Some(p) = &source {
                std::fs::write(
                    a.out.join("optimal.prog"),
                    emit_resolved_program(p, &prep.game, strategy)?,
                )?;
            }
            println!("optimal {}", value_line(value));
            let described = describe_strategy(&prep.game, strategy);
            if !described.is_empty() {
                println!("strategy {described}");
            }
            Ok(EXIT_OK)
        }
        Outcome::NoSafeProgram { .. } => {
            println!("no safe program");
            Ok(EXIT_NO_SAFE_PROGRAM)
        }
    }
}

fn value(a: &ValueArgs) -> anyhow::Result<i32> {
    let checks = parse_checks(&a.model.check)?;
    let (p, perf, sched) = load_model(&a.program, &a.model)?;
    let opts = Options {
        checks,
        state_cap: state_cap()?,
        ..Options::default()
    };
    let v = value_of_program(&p, &sched, &perf, &opts)?;
    println!("{}", value_line(&v));
    Ok(EXIT_OK)
}

fn bench(a: &BenchArgs) -> anyhow::Result<i32> {
    let params: BTreeMap<String, String> = a
        .params
        .iter()
        .map(|p| parse_param(p))
        .collect::<Result<_, _>>()?;
    let sweeps = a
        .sweeps
        .iter()
        .map(|s| parse_sweep(s))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = BenchConfig {
        gallery: &a.gallery,
        params,
        sweeps,
        options: options(&a.search, Checks::ALL)?,
        threads: a.search.threads,
        out: &a.out,
    };
    print!("{}", run_bench(&cfg)?);
    Ok(EXIT_OK)
}
