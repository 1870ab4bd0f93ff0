use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(name: &str) -> String {
    root()
        .join("corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn tbn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbn"))
        .args(args)
        .env_remove("TBN_SOLVER")
        .output()
        .expect("run tbn")
}

fn tbn_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tbn"))
        .args(args)
        .env_remove("TBN_SOLVER")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("run tbn");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tbn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Validates `doc` against the result schema with Python's `jsonschema`.
/// Returns false (and says so) when that is unavailable.
fn validate_schema(doc: &str) -> bool {
    let schema = root().join("schema/result.schema.json");
    let script = "import json,sys,jsonschema\n\
                  s=json.load(open(sys.argv[1]))\n\
                  jsonschema.Draft202012Validator.check_schema(s)\n\
                  jsonschema.validate(json.load(sys.stdin), s, cls=jsonschema.Draft202012Validator)\n";
    let probe = Command::new("python3")
        .args(["-c", "import jsonschema"])
        .output();
    if !matches!(probe, Ok(ref o) if o.status.success()) {
        eprintln!("python3 jsonschema unavailable; schema check skipped");
        return false;
    }
    let mut child = Command::new("python3")
        .args(["-c", script])
        .arg(&schema)
        .stdin(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(doc.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(
        out.status.success(),
        "schema violation:\n{doc}\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    true
}

#[test]
fn stable_counts_of_the_corpus() {
    for (file, s) in [
        ("and_gate1.tbn", 5),
        ("and_gate1_minus_ab.tbn", 4),
        ("and_gate1_minus_cd.tbn", 4),
        ("and_gate2.tbn", 5),
        ("and_gate2_minus_ab.tbn", 4),
        ("and_gate2_minus_cd.tbn", 4),
        ("formula_all.tbn", 18),
        ("formula_without_x.tbn", 17),
        ("formula_without_xz.tbn", 16),
        ("strand_displacement_a.tbn", 5),
        ("strand_displacement_b.tbn", 5),
        ("strand_displacement_ab.tbn", 6),
        ("running_example.tbn", 3),
        ("tree3.tbn", 1),
        ("tree7.tbn", 1),
        ("exact_cover_j2.tbn", 2),
        ("exact_cover_j3.tbn", 3),
    ] {
        let o = tbn(&["solve", &corpus(file)]);
        assert_eq!(code(&o), 0, "{file}");
        let text = stdout(&o);
        assert!(
            text.starts_with(&format!("stable polymer count: {s}\n")),
            "{file}: {text}"
        );
        assert!(
            text.contains(&format!("witness ({s} polymers):")),
            "{file}: {text}"
        );
    }
}

#[test]
fn stably_free_exit_codes() {
    for (file, monomer, free) in [
        ("and_gate1.tbn", "out", true),
        ("and_gate1_minus_cd.tbn", "out", false),
        ("formula_without_x.tbn", "out", true),
        ("strand_displacement_a.tbn", "out2", false),
        ("strand_displacement_ab.tbn", "out1", true),
    ] {
        for method in ["two-query", "direct", "batch"] {
            let o = tbn(&[
                "stably-free",
                &corpus(file),
                "-m",
                monomer,
                "--method",
                method,
            ]);
            assert_eq!(code(&o), if free { 0 } else { 1 }, "{file} {method}");
            assert!(
                stdout(&o).contains(&format!("stably free: {free}")),
                "{file} {method}"
            );
        }
    }
}

#[test]
fn solver_flags_do_not_change_the_answer() {
    let file = corpus("and_gate2.tbn");
    for flags in [
        vec!["--batch"],
        vec!["--batch", "--sequential"],
        vec!["--no-incremental"],
        vec!["--amo", "sequential"],
        vec!["--seed", "17", "--budget", "0"],
    ] {
        let mut args = vec!["solve", file.as_str()];
        args.extend(flags.iter().copied());
        let o = tbn(&args);
        assert_eq!(code(&o), 0, "{flags:?}");
        assert!(
            stdout(&o).starts_with("stable polymer count: 5\n"),
            "{flags:?}"
        );
    }
}

#[test]
fn min_polymers_answers_yes_or_no() {
    let file = corpus("running_example.tbn");
    let yes = tbn(&["solve", &file, "--min-polymers", "3"]);
    assert_eq!(code(&yes), 0);
    assert!(stdout(&yes).starts_with("at least 3 polymers: yes"));
    let no = tbn(&["solve", &file, "--min-polymers", "4"]);
    assert_eq!(code(&no), 1);
    assert!(stdout(&no).starts_with("at least 4 polymers: no"));
    let beyond = tbn(&["solve", &file, "--min-polymers", "9"]);
    assert_eq!(code(&beyond), 1);
}

#[test]
fn json_documents_follow_the_schema() {
    let file = corpus("running_example.tbn");
    let docs = [
        tbn(&["solve", &file, "--json"]),
        tbn(&["solve", &file, "--json", "--min-polymers", "2"]),
        tbn(&["solve", &file, "--json", "--min-polymers", "4"]),
        tbn(&["stably-free", &file, "-m", "0", "--json"]),
        tbn(&[
            "stably-free",
            &file,
            "-m",
            "3",
            "--json",
            "--method",
            "direct",
        ]),
        tbn_stdin(&["solve", "-", "--json"], ""),
    ];
    let parsed: Vec<serde_json::Value> = docs
        .iter()
        .map(|o| {
            let text = stdout(o);
            validate_schema(&text);
            serde_json::from_str(&text).unwrap()
        })
        .collect();
    assert_eq!(parsed[0]["stable_polymer_count"], 3);
    assert_eq!(parsed[0]["polymer_count"], 3);
    assert_eq!(parsed[1]["satisfiable"], true);
    assert!(parsed[1]["stable_polymer_count"].is_null());
    assert_eq!(parsed[2]["satisfiable"], false);
    assert!(parsed[3]["monomer_free"].is_boolean());
    assert_eq!(parsed[5]["stable_polymer_count"], 0);
}

#[test]
fn empty_tbn_has_no_polymers() {
    let path = scratch("empty.tbn");
    std::fs::write(&path, "# nothing\n\n").unwrap();
    let o = tbn(&["solve", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("stable polymer count: 0\n"));
}

#[test]
fn encode_then_solve_round_trip() {
    let file = corpus("running_example.tbn");
    for (k, sat) in [(3, true), (4, false)] {
        let cnf = scratch(&format!("running_k{k}.cnf"));
        let enc = tbn(&[
            "encode",
            &file,
            "-k",
            &k.to_string(),
            "-o",
            cnf.to_str().unwrap(),
        ]);
        assert_eq!(code(&enc), 0);
        let text = std::fs::read_to_string(&cnf).unwrap();
        assert!(text.lines().any(|l| l.starts_with("p cnf ")));
        let pairs = text
            .lines()
            .filter(|l| l.starts_with("c var ") && l.contains(" PAIR "))
            .count();
        assert_eq!(pairs, 4);
        let o = tbn(&["solve", "--from-dimacs", cnf.to_str().unwrap()]);
        if sat {
            assert_eq!(code(&o), 0);
            let out = stdout(&o);
            assert!(out.starts_with("s SATISFIABLE\n"));
            assert!(out.lines().any(|l| l.starts_with("pair ")), "{out}");
        } else {
            assert_eq!(code(&o), 1);
            assert_eq!(stdout(&o), "s UNSATISFIABLE\n");
        }
    }
}

#[test]
fn encode_with_free_monomer() {
    let o = tbn(&[
        "encode",
        &corpus("and_gate1.tbn"),
        "-k",
        "5",
        "--free",
        "out",
        "--amo",
        "sequential",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("p cnf "));
}

#[test]
fn bad_inputs_exit_2() {
    let file = corpus("running_example.tbn");
    assert_eq!(code(&tbn(&["encode", &file, "-k", "0"])), 2);
    assert_eq!(code(&tbn(&["encode", &file, "-k", "5"])), 2);
    assert_eq!(code(&tbn(&["stably-free", &file, "-m", "nope"])), 2);
    assert_eq!(code(&tbn(&["solve", "/nonexistent.tbn"])), 2);
    assert_eq!(code(&tbn(&["solve", &file, "--solver", "kissat"])), 2);
    assert_eq!(code(&tbn(&["gen", "graph-mis", "--edges", ""])), 2);
    assert_eq!(code(&tbn(&["gen", "tree", "-n", "0"])), 2);
    let bad = scratch("bad.tbn");
    std::fs::write(&bad, "a b**\n").unwrap();
    assert_eq!(code(&tbn(&["solve", bad.to_str().unwrap()])), 2);
}

#[test]
fn broken_external_solver_exits_4() {
    let o = tbn(&[
        "solve",
        &corpus("running_example.tbn"),
        "--solver",
        "/nonexistent/solver {file}",
    ]);
    assert_eq!(code(&o), 4);
}

#[test]
fn enumerate_running_example() {
    let o = tbn(&["enumerate", &corpus("running_example.tbn")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "8 total, 3 saturated, 1 stable, S=3\n");
    let o = tbn(&[
        "enumerate",
        &corpus("running_example.tbn"),
        "--filter",
        "saturated",
        "--limit",
        "10",
    ]);
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with('#')).count(), 3);
    assert!(out.lines().skip(1).all(|l| l.contains("saturated=true")));
}

#[test]
fn enumerate_refuses_over_the_bound() {
    let o = tbn(&["enumerate", &corpus("tree7.tbn"), "--bound", "1000"]);
    assert_eq!(code(&o), 3);
    assert!(o.stdout.is_empty());
}

#[test]
fn generated_instances_parse_and_solve() {
    let tree = tbn(&["gen", "tree", "-n", "7"]);
    assert_eq!(code(&tree), 0);
    let body = |s: &str| {
        s.lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .count()
    };
    assert_eq!(body(&stdout(&tree)), 127);
    let shuffled = tbn(&["gen", "tree", "-n", "4", "--shuffle", "3"]);
    assert_eq!(body(&stdout(&shuffled)), 15);

    let path = scratch("cover.tbn");
    let o = tbn(&[
        "gen",
        "-o",
        path.to_str().unwrap(),
        "exact-cover",
        "--sets",
        "a,b;b,c;c",
        "-j",
        "3",
    ]);
    assert_eq!(code(&o), 0);
    let solved = tbn(&["solve", path.to_str().unwrap()]);
    assert!(stdout(&solved).starts_with("stable polymer count: 3\n"));

    let path = scratch("path.tbn");
    let o = tbn(&[
        "gen",
        "graph-mis",
        "--edges",
        "a-b,b-c",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&tbn(&["solve", path.to_str().unwrap()])).starts_with("stable polymer count: 3\n")
    );
    assert_eq!(
        code(&tbn(&["stably-free", path.to_str().unwrap(), "-m", "m_a"])),
        0
    );
    assert_eq!(
        code(&tbn(&["stably-free", path.to_str().unwrap(), "-m", "m_b"])),
        1
    );

    // b is in the only minimum vertex cover of a-b-c, a is not.
    for (target, in_cover) in [("b", true), ("a", false)] {
        let path = scratch(&format!("vc_{target}.tbn"));
        let o = tbn(&[
            "gen",
            "vc-transform",
            "--edges",
            "a-b,b-c",
            "--target",
            target,
            "-o",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        let monomer = format!("m_{target}_dot");
        assert!(String::from_utf8_lossy(&o.stderr).contains(&monomer));
        let q = tbn(&["stably-free", path.to_str().unwrap(), "-m", &monomer]);
        assert_eq!(code(&q), if in_cover { 0 } else { 1 }, "target {target}");
    }
}
