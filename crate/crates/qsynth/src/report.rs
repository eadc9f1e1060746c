//! Machine-readable results: one CSV row per evaluated candidate and a JSON
//! document recording how the result was obtained.

use qsynth_core::game::GameGraph;
use qsynth_core::synthesis::{describe_strategy, Options, Outcome, Report};
use qsynth_core::ExtValue;
use serde::Serialize;

/// Digits after the point in the decimal value columns.
pub const DECIMAL_PLACES: u32 = 6;

pub const TIE_BREAK: &str = "lowest value, then lexicographically smallest action vector";

pub fn candidates_csv(game: &GameGraph, report: &Report) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "id",
        "strategy",
        "value",
        "decimal",
        "safe",
        "chosen",
        "states",
        "solved_states",
    ])?;
    for (i, c) in report.candidates.iter().enumerate() {
        w.write_record([
            c.id.to_string(),
            describe_strategy(game, &c.strategy),
            c.value.to_exact_string(),
            c.value.to_decimal_string(DECIMAL_PLACES),
            c.value.is_finite().to_string(),
            (report.best == Some(i)).to_string(),
            c.states.to_string(),
            c.solved_states.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Debug, Serialize)]
pub struct Inputs {
    pub program: Option<String>,
    pub perf: Option<String>,
    pub sched: Option<String>,
    pub cnf: Option<String>,
}

#[derive(Debug, Serialize)]
struct OptionsJson {
    race_check: bool,
    deadlock_check: bool,
    abstraction: bool,
    minimize: bool,
    prune: bool,
    all_subsets: bool,
    state_cap: usize,
}

#[derive(Debug, Serialize)]
struct Enumeration {
    strategies: String,
    partial_checks: usize,
    pruned_subtrees: usize,
    pruned_strategies: String,
    candidates: usize,
    safe_candidates: usize,
}

#[derive(Debug, Serialize)]
struct GameJson {
    states: usize,
    observations: usize,
    choice_observations: usize,
}

#[derive(Debug, Serialize)]
struct ResultJson {
    status: &'static str,
    id: Option<usize>,
    value: String,
    decimal: String,
    strategy: Option<String>,
    tied_candidates: usize,
}

#[derive(Debug, Serialize)]
struct Provenance<'a> {
    inputs: &'a Inputs,
    options: OptionsJson,
    game: GameJson,
    enumeration: Enumeration,
    tie_break: &'static str,
    abstraction: &'a [String],
    warnings: &'a [String],
    result: ResultJson,
}

pub fn provenance_json(
    inputs: &Inputs,
    opts: &Options,
    game: &GameGraph,
    outcome: &Outcome,
) -> anyhow::Result<String> {
    let r = outcome.report();
    let value = outcome.value();
    let best = r.best.map(|b| &r.candidates[b]);
    let tied = r
        .candidates
        .iter()
        .filter(|c| c.value.is_finite() && c.value == value)
        .count();
    let doc = Provenance {
        inputs,
        options: OptionsJson {
            race_check: opts.checks.race,
            deadlock_check: opts.checks.deadlock,
            abstraction: opts.abstraction,
            minimize: opts.minimize,
            prune: opts.prune,
            all_subsets: opts.all_subsets,
            state_cap: opts.state_cap,
        },
        game: GameJson {
            states: r.game_states,
            observations: r.observations,
            choice_observations: r.choice_observations,
        },
        enumeration: Enumeration {
            strategies: r.leaf_count.to_string(),
            partial_checks: r.checks_run,
            pruned_subtrees: r.pruned_subtrees,
            pruned_strategies: r.pruned_leaves.to_string(),
            candidates: r.candidates.len(),
            safe_candidates: r.candidates.iter().filter(|c| c.value.is_finite()).count(),
        },
        tie_break: TIE_BREAK,
        abstraction: &r.abstraction,
        warnings: &r.warnings,
        result: ResultJson {
            status: match outcome {
                Outcome::Optimal { .. } => "optimal",
                Outcome::NoSafeProgram { .. } => "no-safe-program",
            },
            id: best.map(|c| c.id),
            value: value.to_exact_string(),
            decimal: value.to_decimal_string(DECIMAL_PLACES),
            strategy: best.map(|c| describe_strategy(game, &c.strategy)),
            tied_candidates: tied,
        },
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

/// `p/q` (or `inf`) and the rounded decimal, as printed by `value`.
pub fn value_line(v: &ExtValue) -> String {
    format!(
        "{} {}",
        v.to_exact_string(),
        v.to_decimal_string(DECIMAL_PLACES)
    )
}
