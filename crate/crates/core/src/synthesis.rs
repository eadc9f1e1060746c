//! The synthesis pipeline: eliminate unsafe resolutions, evaluate every
//! surviving one exactly (optionally on a bisimulation quotient) and keep
//! the cheapest. Also valuation of choice-free programs.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::abstraction::{
    abstraction_partition, check_data_abstraction, check_order_abstraction, check_qpb,
    directive_slots, minimize, quotient, Partition,
};
use crate::game::{
    build_game, fix_strategy, label_safety, BuildOptions, Checks, GameError, GameGraph,
    DEFAULT_STATE_CAP,
};
use crate::model::{AbstractionDirective, PartialProgram};
use crate::num::{ExtValue, Q};
use crate::perf::{PerformanceAutomaton, Scheduler};
use crate::solve::{solve_value, Mdp};
use crate::strategy::{lock_order_warnings, strategy_elimination, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    pub checks: Checks,
    /// Quotient each candidate's system by the program's abstraction directives.
    pub abstraction: bool,
    /// Quotient each candidate's system by its coarsest bisimulation.
    pub minimize: bool,
    pub prune: bool,
    pub all_subsets: bool,
    pub state_cap: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            checks: Checks::ALL,
            abstraction: false,
            minimize: false,
            prune: true,
            all_subsets: false,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

impl Options {
    pub fn build_options(&self) -> BuildOptions {
        BuildOptions {
            state_cap: self.state_cap,
            all_subsets: self.all_subsets,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("program still has choice locations: {0}")]
    NotChoiceFree(String),
}

/// Abstraction directives that passed their admissibility check, as slots.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AbstractionPlan {
    pub erase: Vec<usize>,
    pub order: Vec<Vec<usize>>,
    /// Human-readable form of each accepted directive.
    pub accepted: Vec<String>,
}

impl AbstractionPlan {
    pub fn is_empty(&self) -> bool {
        self.erase.is_empty() && self.order.is_empty()
    }
}

/// A built game together with everything needed to evaluate candidates.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub game: GameGraph,
    pub candidates: Vec<Strategy>,
    pub leaf_count: u128,
    pub checks_run: usize,
    pub pruned_subtrees: usize,
    pub pruned_leaves: u128,
    pub plan: Option<AbstractionPlan>,
    pub minimize: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    /// Position in enumeration order.
    pub id: usize,
    pub strategy: Strategy,
    pub value: ExtValue,
    /// States of the fixed-strategy system, and of what was actually solved.
    pub states: usize,
    pub solved_states: usize,
    pub abstraction_failed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub game_states: usize,
    pub observations: usize,
    pub choice_observations: usize,
    pub leaf_count: u128,
    pub checks_run: usize,
    pub pruned_subtrees: usize,
    pub pruned_leaves: u128,
    pub abstraction: Vec<String>,
    pub minimize: bool,
    pub warnings: Vec<String>,
    pub candidates: Vec<Candidate>,
    /// Index into `candidates` of the selected one.
    pub best: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Optimal {
        strategy: Strategy,
        value: ExtValue,
        program: Option<PartialProgram>,
        report: Report,
    },
    NoSafeProgram {
        report: Report,
    },
}

impl Outcome {
    pub fn report(&self) -> &Report {
        match self {
            Outcome::Optimal { report, .. } | Outcome::NoSafeProgram { report } => report,
        }
    }

    pub fn value(&self) -> ExtValue {
        match self {
            Outcome::Optimal { value, .. } => value.clone(),
            Outcome::NoSafeProgram { .. } => ExtValue::Infinite,
        }
    }
}

/// Validates the program's abstraction directives against the built game.
/// Rejected directives are skipped with a warning.
pub fn abstraction_plan(
    p: &PartialProgram,
    g: &GameGraph,
    warnings: &mut Vec<String>,
) -> AbstractionPlan {
    let mut plan = AbstractionPlan::default();
    let Some(info) = &g.program else { return plan };
    for d in &p.abstractions {
        let (checked, vars, kind) = match d {
            AbstractionDirective::Data(vars) => (check_data_abstraction(p, vars), vars, "data"),
            AbstractionDirective::Order(vars) => (check_order_abstraction(p, vars), vars, "order"),
        };
        match checked {
            Err(e) => warnings.push(format!(
                "abstraction {kind}({}) rejected: {e}",
                vars.join(",")
            )),
            Ok(()) => {
                let slots = directive_slots(&info.layout, vars);
                match d {
                    AbstractionDirective::Data(_) => plan.erase.extend(slots),
                    AbstractionDirective::Order(_) => plan.order.push(slots),
                }
                plan.accepted.push(format!("{kind}({})", vars.join(",")));
            }
        }
    }
    plan.erase.sort_unstable();
    plan.erase.dedup();
    plan
}

/// Runs strategy elimination on a built game.
pub fn prepare_game(mut game: GameGraph, checks: Checks, prune: bool) -> Prepared {
    game = label_safety(game, checks);
    let elim = strategy_elimination(&game, prune);
    let leaf_count = crate::strategy::complete_tree(&game).leaf_count();
    Prepared {
        game,
        candidates: elim.candidates,
        leaf_count,
        checks_run: elim.checks_run,
        pruned_subtrees: elim.pruned_subtrees,
        pruned_leaves: elim.pruned_leaves,
        plan: None,
        minimize: false,
        warnings: Vec::new(),
    }
}

/// Builds the game of a partial program and eliminates unsafe resolutions.
pub fn prepare(
    p: &PartialProgram,
    sched: &Scheduler,
    perf: &PerformanceAutomaton,
    opts: &Options,
) -> Result<Prepared, SynthError> {
    let game = build_game(p, sched, perf, &opts.build_options())?;
    let mut prep = prepare_game(game, opts.checks, opts.prune);
    if opts.abstraction {
        let mut warnings = Vec::new();
        let plan = abstraction_plan(p, &prep.game, &mut warnings);
        prep.warnings.extend(warnings);
        if !plan.is_empty() {
            prep.plan = Some(plan);
        }
    }
    prep.minimize = opts.minimize;
    Ok(prep)
}

fn reduce(m: Mdp, p: &Partition) -> Option<Mdp> {
    if p.n_classes == m.states.len() {
        return Some(m);
    }
    quotient(&m, p)
}

/// Exact value of one candidate: fix it, optionally quotient, then check
/// reachability of bad states and solve.
pub fn evaluate_candidate(prep: &Prepared, id: usize) -> Candidate {
    let strategy = prep.candidates[id].clone();
    let fixed = fix_strategy(&prep.game, &strategy);
    let states = fixed.mdp.states.len();
    let mut abstraction_failed = false;
    let mut mdp = match &prep.plan {
        Some(plan) => {
            let part = abstraction_partition(&prep.game, &fixed, &plan.erase, &plan.order);
            if check_qpb(&fixed.mdp, &part) {
                reduce(fixed.mdp, &part).expect("verified partition")
            } else {
                abstraction_failed = true;
                fixed.mdp
            }
        }
        None => fixed.mdp,
    };
    if prep.minimize {
        let part = minimize(&mdp);
        mdp = reduce(mdp, &part).expect("coarsest bisimulation is a bisimulation");
    }
    let value = solve_value(&mdp);
    Candidate {
        id,
        strategy,
        value,
        states,
        solved_states: mdp.states.len(),
        abstraction_failed,
    }
}

/// Index of the cheapest candidate; ties go to the lexicographically
/// smallest strategy. `None` when every candidate is unsafe.
pub fn select_best(candidates: &[Candidate]) -> Option<usize> {
    (0..candidates.len())
        .filter(|&i| candidates[i].value.is_finite())
        .min_by(|&a, &b| {
            let (x, y) = (&candidates[a], &candidates[b]);
            x.value
                .cmp(&y.value)
                .then_with(|| x.strategy.cmp(&y.strategy))
        })
}

/// Assembles the outcome from evaluated candidates, which must be in id order.
pub fn finish(
    prep: &Prepared,
    source: Option<&PartialProgram>,
    candidates: Vec<Candidate>,
) -> Outcome {
    let best = select_best(&candidates);
    let mut warnings = prep.warnings.clone();
    let failed = candidates.iter().filter(|c| c.abstraction_failed).count();
    if failed > 0 {
        warnings.push(format!(
            "abstraction failed verification on {failed} candidates; evaluated unabstracted"
        ));
    }
    if let (Some(b), Some(p)) = (best, source) {
        let partial: Vec<Option<u32>> = candidates[b].strategy.iter().map(|&a| Some(a)).collect();
        warnings.extend(lock_order_warnings(p, &prep.game, &partial));
    }
    let report = Report {
        game_states: prep.game.len(),
        observations: prep.game.observations.len(),
        choice_observations: prep.game.choice_order().len(),
        leaf_count: prep.leaf_count,
        checks_run: prep.checks_run,
        pruned_subtrees: prep.pruned_subtrees,
        pruned_leaves: prep.pruned_leaves,
        abstraction: prep
            .plan
            .as_ref()
            .map(|p| p.accepted.clone())
            .unwrap_or_default(),
        minimize: prep.minimize,
        warnings,
        candidates,
        best,
    };
    match best {
        Some(b) => {
            let c = &report.candidates[b];
            Outcome::Optimal {
                strategy: c.strategy.clone(),
                value: c.value.clone(),
                program: source.map(|p| resolved_program(p, &prep.game, &c.strategy)),
                report,
            }
        }
        None => Outcome::NoSafeProgram { report },
    }
}

/// Sequential pipeline on a prepared game.
pub fn resolve_prepared(prep: &Prepared, source: Option<&PartialProgram>) -> Outcome {
    let candidates = (0..prep.candidates.len())
        .map(|i| evaluate_candidate(prep, i))
        .collect();
    finish(prep, source, candidates)
}

/// The cheapest safe program allowed by `p`, or `NoSafeProgram`.
pub fn resolve(
    p: &PartialProgram,
    sched: &Scheduler,
    perf: &PerformanceAutomaton,
    opts: &Options,
) -> Result<Outcome, SynthError> {
    let prep = prepare(p, sched, perf, opts)?;
    Ok(resolve_prepared(&prep, Some(p)))
}

/// Whether some allowed program has value at most `bound`.
pub fn decide(
    p: &PartialProgram,
    sched: &Scheduler,
    perf: &PerformanceAutomaton,
    opts: &Options,
    bound: &Q,
) -> Result<bool, SynthError> {
    Ok(match resolve(p, sched, perf, opts)?.value() {
        ExtValue::Finite(v) => v <= *bound,
        ExtValue::Infinite => false,
    })
}

/// Value of a choice-free program.
pub fn value_of_program(
    p: &PartialProgram,
    sched: &Scheduler,
    perf: &PerformanceAutomaton,
    opts: &Options,
) -> Result<ExtValue, SynthError> {
    let g = label_safety(
        build_game(p, sched, perf, &opts.build_options())?,
        opts.checks,
    );
    if let Some(&o) = g.choice_order().first() {
        return Err(SynthError::NotChoiceFree(
            g.observations[o as usize].name.clone(),
        ));
    }
    let fixed = fix_strategy(&g, &vec![0; g.observations.len()]);
    Ok(solve_value(&fixed.mdp))
}

/// The program allowed by `p` that `strategy` selects: at every choice
/// location only the transitions of the chosen action remain.
pub fn resolved_program(p: &PartialProgram, g: &GameGraph, strategy: &[u32]) -> PartialProgram {
    let mut dropped: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); p.threads.len()];
    for o in g.choice_order() {
        let info = &g.observations[o as usize];
        let keep = &info.actions[strategy[o as usize] as usize].transitions;
        let thread = &p.threads[info.thread];
        dropped[info.thread].extend(
            thread
                .outgoing(info.location)
                .into_iter()
                .filter(|i| !keep.contains(i)),
        );
    }
    let mut out = p.clone();
    for (t, drop) in out.threads.iter_mut().zip(&dropped) {
        let mut i = 0;
        t.transitions.retain(|_| {
            i += 1;
            !drop.contains(&(i - 1))
        });
    }
    out
}

/// `obs=action` for every choice observation, in choice order.
pub fn describe_strategy(g: &GameGraph, strategy: &[u32]) -> String {
    let parts: Vec<String> = g
        .choice_order()
        .into_iter()
        .map(|o| {
            let info = &g.observations[o as usize];
            format!(
                "{}={}",
                info.name, info.actions[strategy[o as usize] as usize].name
            )
        })
        .collect();
    parts.join(" ")
}

#[cfg(test)]
mod tests;
