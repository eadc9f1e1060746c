use proptest::prelude::*;

use num_bigint::BigInt;
use qsynth::dimacs::{parse_dimacs, write_dimacs};
use qsynth::frontend::{
    emit_performance_automaton, emit_program, emit_resolved_program, emit_scheduler,
    parse_partial_program, parse_performance_automaton, parse_scheduler, FrontendError,
};
use qsynth_core::gallery::Cnf;
use qsynth_core::game::Checks;
use qsynth_core::model::{choice_locations, eval_guard, BinOp, Guard, Rel, Term, Valuation};
use qsynth_core::perf::{PerformanceAutomaton, Scheduler};
use qsynth_core::synthesis::{prepare, Options};
use qsynth_core::Q;

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (-4i64..5).prop_map(Term::Const),
        prop_oneof![Just("x"), Just("y")].prop_map(Term::var)
    ];
    // Divisors are positive constants: validation rejects a possible zero.
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (
                prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul)],
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Term::bin(op, a, b)),
            (inner, 1i64..4).prop_map(|(a, d)| Term::bin(BinOp::Mod, a, Term::Const(d))),
        ]
    })
}

fn rel() -> impl Strategy<Value = Rel> {
    prop_oneof![
        Just(Rel::Eq),
        Just(Rel::Ne),
        Just(Rel::Lt),
        Just(Rel::Le),
        Just(Rel::Gt),
        Just(Rel::Ge)
    ]
}

fn guard() -> impl Strategy<Value = Guard> {
    let leaf = prop_oneof![
        Just(Guard::True),
        (rel(), term(), term()).prop_map(|(r, a, b)| Guard::Cmp(r, a, b))
    ];
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Guard::And(Box::new(a), Box::new(b))),
            inner.clone().prop_map(Guard::not),
            (inner.clone(), inner).prop_map(|(a, b)| Guard::or(a, b)),
        ]
    })
}

fn with_guard(g: &Guard) -> String {
    format!("globals {{ x : -2..2 = 0; y : 0..3 = 0; }}\nthread T {{ loc a; trans a -> a when {g} do {{ }}; }}")
}

fn rational() -> impl Strategy<Value = Q> {
    (0i64..20, 1i64..7).prop_map(|(n, d)| Q::new(BigInt::from(n), BigInt::from(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Printing a guard and reading it back keeps its meaning and its text.
    #[test]
    fn guards_reparse(g in guard()) {
        let p = parse_partial_program(&with_guard(&g)).unwrap();
        let parsed = &p.threads[0].transitions[0].guard;
        prop_assert_eq!(parsed.to_string(), g.to_string());
        for x in -2..=2 {
            for y in 0..=3 {
                let v = Valuation::new().with("x", x).with("y", y);
                prop_assert_eq!(eval_guard(parsed, &v), eval_guard(&g, &v));
            }
        }
        let text = emit_program(&p);
        prop_assert_eq!(emit_program(&parse_partial_program(&text).unwrap()), text);
    }

    #[test]
    fn automata_reparse(
        n in 1usize..4,
        edges in prop::collection::vec((0usize..4, 0usize..3, 0usize..4, rational()), 0..12),
    ) {
        let syms = ["l", "cs", "m"];
        let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
        let mut a = PerformanceAutomaton::new(names.clone(), 0);
        for (from, s, to, c) in edges {
            let _ = a.add_edge(&names[from % n], syms[s], &names[to % n], c);
        }
        let text = emit_performance_automaton(&a);
        match a.check_total() {
            Ok(()) => prop_assert_eq!(parse_performance_automaton(&text).unwrap(), a),
            Err(_) => prop_assert!(matches!(parse_performance_automaton(&text), Err(FrontendError::Perf(_)))),
        }
    }

    /// Weights parse exactly when they are positive and sum to one.
    #[test]
    fn scheduler_weights(ws in prop::collection::vec(1i64..6, 2..5), bump in 0i64..2) {
        let threads: Vec<String> = (0..ws.len()).map(|i| format!("T{i}")).collect();
        let total: i64 = ws.iter().sum::<i64>() + bump;
        let picks: String = threads.iter().zip(&ws).map(|(t, w)| format!("pick {t} : {w}/{total}; ")).collect();
        let parsed = parse_scheduler(&format!("memory s; state s {{ {picks}}}"), &threads);
        prop_assert_eq!(parsed.is_ok(), bump == 0);
        if let Ok(s) = parsed {
            prop_assert_eq!(parse_scheduler(&emit_scheduler(&s, &threads), &threads).unwrap(), s);
        }
    }

    #[test]
    fn dimacs_reparse(vars in 1usize..8, raw in prop::collection::vec(prop::collection::vec((0usize..8, any::<bool>()), 1..4), 1..10)) {
        let clauses = raw
            .into_iter()
            .map(|c| c.into_iter().map(|(v, pos)| { let l = (v % vars + 1) as i32; if pos { l } else { -l } }).collect())
            .collect();
        let cnf = Cnf::new(vars, clauses);
        prop_assert_eq!(parse_dimacs(&write_dimacs(&cnf)).unwrap(), cnf);
    }

    /// Every candidate strategy prints a choice-free program, and printing
    /// that program's own (only) resolution gives the same text.
    #[test]
    fn resolutions_are_fixed_points(branches in 2usize..4, targets in prop::collection::vec(0i64..3, 4)) {
        let arms: String = (0..branches)
            .map(|b| format!("-> b when true do {{ x := {}; }};", targets[b]))
            .collect();
        let src = format!("globals {{ x : 0..2 = 0; }} thread T {{ loc a, b; choice a {{ {arms} }} trans b -> a when x != {} do {{ }}; trans b -> b when x == {} do {{ x := 0; }}; }}", targets[3], targets[3]);
        let p = parse_partial_program(&src).unwrap();
        prop_assert!(!choice_locations(&p.threads[0]).is_empty());
        let sched = Scheduler::uniform(1);
        let perf = PerformanceAutomaton::trivial();
        let opts = Options { checks: Checks::NONE, prune: false, ..Options::default() };
        let prep = prepare(&p, &sched, &perf, &opts).unwrap();
        for s in &prep.candidates {
            let text = emit_resolved_program(&p, &prep.game, s).unwrap();
            let q = parse_partial_program(&text).unwrap();
            prop_assert!(choice_locations(&q.threads[0]).is_empty());
            let again = prepare(&q, &sched, &perf, &opts).unwrap();
            prop_assert_eq!(again.candidates.len(), 1);
            prop_assert_eq!(emit_resolved_program(&q, &again.game, &again.candidates[0]).unwrap(), text);
        }
    }
}
