//! Round trips of the text formats on generated instances, and the
//! resolved-program printer.

use qsynth::frontend::{
    emit_performance_automaton, emit_program, emit_resolved_program, emit_scheduler,
    parse_partial_program, parse_performance_automaton, parse_scheduler, FrontendError,
};
use qsynth_core::gallery::{catalogue, prodcons};
use qsynth_core::game::build_game;
use qsynth_core::model::{choice_locations, PartialProgram};
use qsynth_core::perf::Scheduler;
use qsynth_core::synthesis::{prepare, resolve, value_of_program, Options, Outcome};

fn names(p: &PartialProgram) -> Vec<String> {
    p.threads.iter().map(|t| t.name.clone()).collect()
}

#[test]
fn generated_instances_print_and_reparse() {
    for inst in catalogue() {
        let text = emit_program(&inst.program);
        let parsed =
            parse_partial_program(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", inst.name));
        assert_eq!(emit_program(&parsed), text, "{}", inst.name);
        assert_eq!(parsed.threads.len(), inst.program.threads.len());
        for (a, b) in parsed.threads.iter().zip(&inst.program.threads) {
            assert_eq!(a.transitions.len(), b.transitions.len());
            assert_eq!(choice_locations(a), choice_locations(b), "{}", inst.name);
        }

        let perf_text = emit_performance_automaton(&inst.perf);
        let perf = parse_performance_automaton(&perf_text).unwrap();
        assert_eq!(emit_performance_automaton(&perf), perf_text);

        let sched_text = emit_scheduler(&inst.scheduler, &names(&inst.program));
        let sched = parse_scheduler(&sched_text, &names(&inst.program)).unwrap();
        assert_eq!(sched, inst.scheduler, "{}", inst.name);
    }
}

#[test]
fn parsed_instance_has_the_same_optimum() {
    let inst = prodcons::producer_consumer(&prodcons::Params::default());
    let p = parse_partial_program(&emit_program(&inst.program)).unwrap();
    let perf = parse_performance_automaton(&emit_performance_automaton(&inst.perf)).unwrap();
    let sched = parse_scheduler(&emit_scheduler(&inst.scheduler, &names(&p)), &names(&p)).unwrap();
    let opts = Options {
        checks: inst.checks,
        ..Options::default()
    };
    let direct = resolve(&inst.program, &inst.scheduler, &inst.perf, &opts)
        .unwrap()
        .value();
    let via_text = resolve(&p, &sched, &perf, &opts).unwrap().value();
    assert_eq!(direct, via_text);
}

const TWO_WAY: &str = "
globals { x : 0..2 = 0; }
thread T {
  loc a, b;
  choice a {
    -> b when true do { x := 1; } label cheap;
    -> b when true do { x := 2; } label dear;
  }
  trans b -> a when true do { x := 0; };
}
";

const COSTS: &str = "state q; edge q --cheap/1--> q; edge q --dear/5--> q;";

#[test]
fn resolved_program_drops_the_other_branch() {
    let p = parse_partial_program(TWO_WAY).unwrap();
    let perf = parse_performance_automaton(COSTS).unwrap();
    let sched = Scheduler::uniform(1);
    let opts = Options::default();
    let prep = prepare(&p, &sched, &perf, &opts).unwrap();
    let choice = prep.game.choice_order()[0] as usize;
    for pick in 0..2u32 {
        let mut s = vec![0; prep.game.observations.len()];
        s[choice] = pick;
        let text = emit_resolved_program(&p, &prep.game, &s).unwrap();
        let kept = if pick == 0 { "cheap" } else { "dear" };
        let gone = if pick == 0 { "dear" } else { "cheap" };
        assert!(text.contains(kept) && !text.contains(gone), "{text}");
        let q = parse_partial_program(&text).unwrap();
        assert!(q.threads.iter().all(|t| choice_locations(t).is_empty()));
        // Printing the resolved program again changes nothing.
        let g = build_game(&q, &sched, &perf, &opts.build_options()).unwrap();
        let again = emit_resolved_program(&q, &g, &vec![0; g.observations.len()]).unwrap();
        assert_eq!(again, text);
    }
    let Outcome::Optimal {
        program: Some(best),
        ..
    } = resolve(&p, &sched, &perf, &opts).unwrap()
    else {
        panic!("safe")
    };
    let v = value_of_program(&best, &sched, &perf, &opts).unwrap();
    assert_eq!(v.to_exact_string(), "1/4");
}

#[test]
fn choice_free_program_round_trips() {
    let src = "globals {\n  x : 0..2 = 0;\n}\n\nthread T {\n  loc a;\n  trans a -> a when true do { x := ((x + 1) mod 3); } label m;\n}\n";
    let p = parse_partial_program(src).unwrap();
    let sched = Scheduler::uniform(1);
    let perf = parse_performance_automaton("state q; edge q --m/1--> q;").unwrap();
    let g = build_game(&p, &sched, &perf, &Default::default()).unwrap();
    let out = emit_resolved_program(&p, &g, &vec![0; g.observations.len()]).unwrap();
    let squash = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
    assert_eq!(squash(&out), squash(src));
}

#[test]
fn strategy_shape_is_checked() {
    let p = parse_partial_program(TWO_WAY).unwrap();
    let perf = parse_performance_automaton(COSTS).unwrap();
    let g = build_game(&p, &Scheduler::uniform(1), &perf, &Default::default()).unwrap();
    let short = vec![0; g.observations.len() - 1];
    assert!(matches!(
        emit_resolved_program(&p, &g, &short),
        Err(FrontendError::StrategyMismatch(_))
    ));
    let mut wild = vec![0; g.observations.len()];
    wild[g.choice_order()[0] as usize] = 7;
    assert!(matches!(
        emit_resolved_program(&p, &g, &wild),
        Err(FrontendError::StrategyMismatch(_))
    ));
}
