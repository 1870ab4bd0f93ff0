mod common;

use std::path::PathBuf;
use std::process::Command;

use tbn_core::encoder::EncodeOptions;
use tbn_core::error::{QueryError, SatError};
use tbn_core::queries::{encode_query, stable_polymer_count, stably_free, Backend, QueryOptions};
use tbn_core::sat::{self, SolverCommand, SolverConfig, Verdict};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn script(name: &str) -> SolverCommand {
    SolverCommand::parse(&format!("sh {} {{file}}", fixture(name))).unwrap()
}

fn python_solver() -> Option<SolverCommand> {
    let ok = Command::new("python3")
        .arg(fixture("external_solver.py"))
        .arg("--probe")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false);
    ok.then(|| {
        SolverCommand::parse(&format!(
            "python3 {} {{file}}",
            fixture("external_solver.py")
        ))
        .unwrap()
    })
}

fn external(cmd: SolverCommand) -> QueryOptions {
    QueryOptions {
        backend: Backend::External(cmd),
        ..QueryOptions::default()
    }
}

#[test]
fn lying_solver_is_caught() {
    let t = common::corpus("and_gate1.tbn");
    let enc = encode_query(&t, 1, None, &EncodeOptions::default()).unwrap();
    let err = sat::solve_external(&enc.cnf, &[], &script("liar.sh")).unwrap_err();
    assert!(matches!(err, SatError::ModelVerification { .. }), "{err}");
    let err = stable_polymer_count(&t, &external(script("liar.sh"))).unwrap_err();
    assert!(
        matches!(err, QueryError::Sat(SatError::ModelVerification { .. })),
        "{err}"
    );
}

#[test]
fn crashing_solver_reports_status() {
    let t = common::corpus("and_gate1.tbn");
    let enc = encode_query(&t, 1, None, &EncodeOptions::default()).unwrap();
    let err = sat::solve_external(&enc.cnf, &[], &script("crash.sh")).unwrap_err();
    match err {
        SatError::ExitStatus { output, .. } => assert!(output.contains("segfault")),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn missing_verdict_is_a_protocol_error() {
    let t = common::corpus("and_gate1.tbn");
    let enc = encode_query(&t, 1, None, &EncodeOptions::default()).unwrap();
    let err = sat::solve_external(&enc.cnf, &[], &script("garbage.sh")).unwrap_err();
    assert!(matches!(err, SatError::Protocol { .. }), "{err}");
}

#[test]
fn unknown_verdict_surfaces_as_unknown() {
    let t = common::corpus("and_gate1.tbn");
    let err = stable_polymer_count(&t, &external(script("unknown.sh"))).unwrap_err();
    assert!(matches!(err, QueryError::Unknown), "{err}");
}

#[test]
fn nonexistent_binary_fails_to_spawn() {
    let t = common::corpus("and_gate1.tbn");
    let cmd = SolverCommand::parse("/nonexistent/solver {file}").unwrap();
    let err = stable_polymer_count(&t, &external(cmd)).unwrap_err();
    assert!(matches!(err, QueryError::Sat(SatError::Spawn(_))), "{err}");
}

#[test]
fn external_and_embedded_agree_on_corpus() {
    let Some(cmd) = python_solver() else {
        eprintln!("python3 unavailable; skipping");
        return;
    };
    let ext = external(cmd);
    let emb = QueryOptions::default();
    for name in [
        "and_gate1.tbn",
        "and_gate2.tbn",
        "running_example.tbn",
        "tree3.tbn",
        "exact_cover_j2.tbn",
    ] {
        let t = common::corpus(name);
        let a = stable_polymer_count(&t, &emb).unwrap();
        let b = stable_polymer_count(&t, &ext).unwrap();
        assert_eq!(a.stable_polymer_count, b.stable_polymer_count, "{name}");
        let w = b.witness.unwrap();
        assert_eq!(t.polymers(&w).len(), b.stable_polymer_count);
        for m in 0..t.len() {
            assert_eq!(
                stably_free(&t, m, &emb).unwrap().free_verdict,
                stably_free(&t, m, &ext).unwrap().free_verdict,
                "{name} monomer {m}"
            );
        }
    }
}

#[test]
fn external_agrees_with_embedded_on_random_cnf() {
    let Some(cmd) = python_solver() else {
        eprintln!("python3 unavailable; skipping");
        return;
    };
    let mut r = common::rng(5);
    for _ in 0..25 {
        let (n, clauses) = common::random_3cnf(&mut r, 12);
        let mut cnf = tbn_core::encoder::CnfInstance::new();
        for _ in 0..n {
            cnf.new_var();
        }
        for c in &clauses {
            cnf.push(tbn_core::encoder::Family::External, c.clone());
        }
        let ours = sat::solve(&cnf, &[], &SolverConfig::default()).unwrap();
        let theirs = sat::solve_external(&cnf, &[], &cmd).unwrap();
        assert_eq!(ours.verdict, theirs.verdict);
        assert_ne!(ours.verdict, Verdict::Unknown);
        assert_eq!(ours.is_sat(), common::dpll_sat(n, &clauses, &[]));
    }
}
