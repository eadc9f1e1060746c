//! The `qsynth` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const LOOP: &str = "globals { x : 0..1 = 0; }
thread T { loc a; trans a -> a when true do { x := 1 - x; } label m; }
";
const UNIT: &str = "state q; edge q --m/1--> q;";

const RACY: &str = "globals { x : 0..1 = 0; }
thread A { loc a; trans a -> a when true do { x := 1; } label m; }
thread B { loc b; trans b -> b when true do { x := 0; } label m; }
";

const CHOOSE: &str = "globals { x : 0..1 = 0; }
thread T {
  loc a, b;
  choice a { -> b when true do { x := 1; } label dear; -> b when true do { x := 0; } label cheap; }
  trans b -> a;
}
";
const CHOOSE_COSTS: &str = "state q; edge q --cheap/1--> q; edge q --dear/3--> q;";

fn qsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsynth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn file(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn value_of_a_unit_loop() {
    let d = TempDir::new().unwrap();
    let o = qsynth(&[
        "value",
        &file(&d, "p.prog", LOOP),
        "--perf",
        &file(&d, "w.aut", UNIT),
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    // Thread moves cost 1 and alternate with free scheduling steps.
    assert_eq!(stdout(&o).trim(), "1/2 0.500000");
}

#[test]
fn labels_are_free_without_an_automaton() {
    let d = TempDir::new().unwrap();
    let o = qsynth(&["value", &file(&d, "p.prog", LOOP)]);
    assert_eq!(stdout(&o).trim(), "0/1 0.000000", "{o:?}");
}

#[test]
fn race_checking_makes_value_infinite() {
    let d = TempDir::new().unwrap();
    let p = file(&d, "p.prog", RACY);
    let w = file(&d, "w.aut", UNIT);
    let on = qsynth(&["value", &p, "--perf", &w, "--check", "race"]);
    assert_eq!(stdout(&on).trim(), "inf inf");
    let off = qsynth(&["value", &p, "--perf", &w, "--check", "none"]);
    assert_eq!(stdout(&off).trim(), "1/2 0.500000");
}

#[test]
fn synth_writes_all_outputs() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("out");
    let dot = d.path().join("game.dot");
    let o = qsynth(&[
        "synth",
        &file(&d, "p.prog", CHOOSE),
        "--perf",
        &file(&d, "w.aut", CHOOSE_COSTS),
        "--out",
        out.to_str().unwrap(),
        "--dump-game",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let prog = read(&out.join("optimal.prog"));
    assert!(prog.contains("cheap") && !prog.contains("dear"), "{prog}");
    let csv = read(&out.join("report.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "id,strategy,value,decimal,safe,chosen,states,solved_states"
    );
    assert_eq!(lines.len(), 3);
    assert!(csv.contains(",1/4,0.250000,true,true,"), "{csv}");
    assert!(csv.contains(",3/4,0.750000,true,false,"), "{csv}");
    let json: serde_json::Value = serde_json::from_str(&read(&out.join("report.json"))).unwrap();
    assert_eq!(json["result"]["status"], "optimal");
    assert_eq!(json["result"]["value"], "1/4");
    assert_eq!(json["enumeration"]["strategies"], "2");
    assert!(json["tie_break"].is_string());
    assert!(read(&dot).starts_with("digraph"));

    // The resolved program has the same value when valued directly.
    let v = qsynth(&[
        "value",
        out.join("optimal.prog").to_str().unwrap(),
        "--perf",
        &file(&d, "w2.aut", CHOOSE_COSTS),
    ]);
    assert_eq!(stdout(&v).trim(), "1/4 0.250000");
}

#[test]
fn synth_on_choice_free_program_agrees_with_value() {
    let d = TempDir::new().unwrap();
    let p = file(&d, "p.prog", LOOP);
    let w = file(&d, "w.aut", UNIT);
    let s = qsynth(&[
        "synth",
        &p,
        "--perf",
        &w,
        "--out",
        d.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(s.status.code(), Some(0));
    let v = qsynth(&["value", &p, "--perf", &w]);
    assert_eq!(
        stdout(&s).lines().next().unwrap(),
        format!("optimal {}", stdout(&v).trim())
    );
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    let p = file(&d, "p.prog", LOOP);
    let missing = d.path().join("absent.aut");
    let o = qsynth(&[
        "synth",
        &p,
        "--perf",
        missing.to_str().unwrap(),
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.aut"));

    let sat = file(&d, "sat.cnf", "p cnf 1 1\n1 1 1 0\n");
    let unsat = file(&d, "unsat.cnf", "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n");
    let out = d.path().join("g");
    let out = out.to_str().unwrap();
    assert_eq!(
        qsynth(&["synth", "--cnf", &sat, "--out", out])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        qsynth(&["synth", "--cnf", &unsat, "--out", out])
            .status
            .code(),
        Some(2)
    );
    let lim = qsynth(&["synth", "--cnf", &unsat, "--limavg", "--out", out]);
    assert_eq!(lim.status.code(), Some(0));
    assert!(stdout(&lim).starts_with("optimal 1/1"), "{}", stdout(&lim));

    assert_eq!(
        qsynth(&[
            "synth",
            &file(&d, "bad.prog", "thread T { loc a; }"),
            "--out",
            out
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        qsynth(&["bench", "nosuch", "--out", out]).status.code(),
        Some(1)
    );
    assert_eq!(qsynth(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn syntax_errors_carry_positions() {
    let d = TempDir::new().unwrap();
    let p = file(
        &d,
        "p.prog",
        "globals { }\nthread T {\n  loc a;\n  trans a => a;\n}\n",
    );
    let o = qsynth(&["value", &p]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("4:11"), "{err}");
}

#[test]
fn state_cap_from_environment() {
    let d = TempDir::new().unwrap();
    let p = file(&d, "p.prog", CHOOSE);
    let o = Command::new(env!("CARGO_BIN_EXE_qsynth"))
        .args(["synth", &p, "--out", d.path().to_str().unwrap()])
        .env("QSYNTH_STATE_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{o:?}");
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let d = TempDir::new().unwrap();
    let inst = qsynth_core::gallery::prodcons::producer_consumer(&Default::default());
    qsynth::bench::write_instance(&inst, d.path()).unwrap();
    let dir = d.path().to_str().unwrap();
    let mut reports = Vec::new();
    for threads in ["1", "4", "1"] {
        let out = d.path().join(format!("t{threads}-{}", reports.len()));
        let o = qsynth(&[
            "synth",
            &format!("{dir}/program.prog"),
            "--perf",
            &format!("{dir}/perf.aut"),
            "--sched",
            &format!("{dir}/sched.sch"),
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{o:?}");
        reports.push((
            read(&out.join("report.csv")),
            read(&out.join("report.json")),
        ));
    }
    assert!(reports.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn bench_sweeps_prodcons_costs() {
    let d = TempDir::new().unwrap();
    let o = qsynth(&[
        "bench",
        "prodcons",
        "--sweep",
        "lockcost=1,100",
        "--param",
        "copycost=100",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let csv = read(&d.path().join("report.csv"));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("point,lockcost,value,decimal,safe,strategy"));
    // Cheap locks and costly locks are resolved differently.
    let strategy = |r: &str| r.split(',').nth(5).unwrap().to_string();
    assert_ne!(strategy(rows[1]), strategy(rows[2]));
    for i in 0..2 {
        let point = d.path().join(format!("point{i}"));
        for f in ["program.prog", "perf.aut", "sched.sch", "checks.txt"] {
            assert!(point.join(f).exists());
        }
    }
}

#[test]
fn bench_sweeps_cache_operations() {
    let d = TempDir::new().unwrap();
    let o = qsynth(&[
        "bench",
        "cache",
        "--sweep",
        "n=1..3",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let csv = read(&d.path().join("report.csv"));
    assert_eq!(csv.lines().count(), 4, "{csv}");
}
