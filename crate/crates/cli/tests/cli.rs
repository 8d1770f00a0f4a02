use std::path::PathBuf;
use std::process::{Command, Output};

use num_rational::BigRational;
use serde_json::Value;
use wfc_core::artifact::{Artifact, ArtifactNode};
use wfc_core::concrete::{well_founded, Interpretation};
use wfc_core::weights::WeightFunction;
use wfc_core::{Program, Truth};

fn program(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "programs", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wfcompile"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

const SMOKERS_WEIGHTS: &str = "\
stress(a) 0.2 0.8
stress(b) 0.2 0.8
stress(c) 0.2 0.8
fr(a,a) 0.1 0.9
fr(a,b) 0.1 0.9
fr(a,c) 0.1 0.9
fr(b,a) 0.1 0.9
fr(b,b) 0.1 0.9
fr(b,c) 0.1 0.9
fr(c,a) 0.1 0.9
fr(c,b) 0.1 0.9
fr(c,c) 0.1 0.9
";

#[test]
fn smokers_dot_has_three_application_layers() {
    let o = run(&["compile", &program("smokers.lp"), "--format", "dot"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph"));
    let layers = dot
        .lines()
        .filter(|l| l.contains("label=\"step") && l.contains("application"))
        .count();
    assert_eq!(layers, 3);
    assert!(dot.contains("label=\"theory\""));
}

#[test]
fn nt_is_reported_non_exact() {
    let o = run(&["compile", &program("nt.lp")]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(text.contains("c in (e, true)"), "{text}");
    assert!(text.contains("d in (false, !e)"), "{text}");
    assert!(text.contains("not exact: a, b, c, d"));

    let o = run(&["compile", &program("nt.lp"), "--format", "cnf"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    let o = run(&["compile", &program("nt.lp"), "--format", "cnf", "--bound", "lower"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("p cnf"));
}

#[test]
fn empty_program_has_trivial_theory() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.json");
    let o = run(&[
        "compile",
        &program("empty.lp"),
        "--format",
        "cnf",
        "--stats",
        stats.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("p cnf 0 0"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(stats).unwrap()).unwrap();
    assert_eq!(s["applications"], 0);
    assert_eq!(s["unfoundedness"], 0);
    let o = run(&["query", "count", &program("empty.lp")]);
    assert_eq!(json(&o)["count"], "1");
}

#[test]
fn dimacs_has_varmap_lines() {
    let o = run(&["compile", &program("gear_wheels.lp"), "--format", "cnf"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let varmap: Vec<&str> = text.lines().filter(|l| l.starts_with("c varmap ")).collect();
    assert_eq!(varmap.len(), 6);
    assert!(varmap.contains(&"c varmap button1(0) 5"));
    let header = text.lines().find(|l| l.starts_with("p cnf")).unwrap();
    let clauses: usize = header.split_whitespace().nth(3).unwrap().parse().unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(" 0") || *l == "0").count(), clauses);
}

#[test]
fn outputs_are_deterministic() {
    for format in ["json", "dot", "cnf", "text"] {
        for backend in ["circuit", "bdd"] {
            let args = [
                "compile",
                &program("smokers.lp"),
                "--format",
                format,
                "--backend",
                backend,
            ];
            let a = run(&args);
            let b = run(&args);
            assert_eq!(a.stdout, b.stdout, "{format} {backend}");
        }
    }
}

#[test]
fn oracle_sweeps() {
    for (name, checked) in [("gear_wheels.lp", 4), ("smokers.lp", 4096), ("nt.lp", 2)] {
        let o = run(&["oracle", &program(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let v = json(&o);
        assert_eq!(v["result"], "PASS");
        assert_eq!(v["report"]["checked"], checked);
    }
}

#[test]
fn oracle_rejects_corrupted_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gear.json");
    let o = run(&[
        "compile",
        &program("gear_wheels.lp"),
        "--artifact",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut art: Artifact = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    // make turns1(1) always true
    art.nodes.push(ArtifactNode::True);
    let t = art.nodes.len() - 1;
    let entry = art.atoms.iter_mut().find(|a| a.atom == "turns1(1)").unwrap();
    entry.lower = t;
    entry.upper = t;
    std::fs::write(&path, serde_json::to_string(&art).unwrap()).unwrap();

    let o = run(&[
        "oracle",
        &program("gear_wheels.lp"),
        "--artifact",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
    let v = json(&o);
    assert_eq!(v["result"], "FAIL");
    let m = &v["report"]["mismatch"];
    assert_eq!(m["atom"], "turns1(1)");
    assert_eq!(m["expected"], "false");
    assert_eq!(m["got"], "true");
    assert_eq!(m["parameters"], Value::Array(vec![]));
}

#[test]
fn equivalence_of_transitive_closures() {
    let o = run(&["query", "equiv", &program("tc_left.lp"), &program("tc_double.lp")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["equivalent"], true);
    let o = run(&["query", "equiv", &program("tc_left.lp"), &program("smokers.lp")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn smokers_wmc_matches_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.txt");
    std::fs::write(&w, SMOKERS_WEIGHTS).unwrap();
    let o = run(&[
        "query",
        "wmc",
        &program("smokers.lp"),
        "--weights",
        w.to_str().unwrap(),
        "--evidence",
        "smokes(a)",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let got: BigRational = v["wmc_exact"].as_str().unwrap().parse().unwrap();

    // independent sweep over all parameter assignments
    let p = Program::parse(wfc_core::bundled::SMOKERS).unwrap().ground().unwrap();
    let a = p.alphabet();
    let (weights, _) = WeightFunction::parse(SMOKERS_WEIGHTS, a, false).unwrap();
    let target = a.lookup("smokes(a)").unwrap();
    let mut want = BigRational::from_integer(0.into());
    for k in 0..1u64 << a.parameters().len() {
        let params = Interpretation::parameters_from_index(a, k);
        if well_founded(&p, &params).value(target) == Truth::True {
            let mut prod = BigRational::from_integer(1.into());
            for &x in a.parameters() {
                let lw = weights.get(x).unwrap();
                prod *= if params.contains(x) {
                    &lw.exact_true
                } else {
                    &lw.exact_false
                };
            }
            want += prod;
        }
    }
    assert_eq!(got, want);
    let f = v["wmc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&f));
}

#[test]
fn bounds_honour_budget() {
    let o = run(&[
        "query",
        "bounds",
        &program("smokers.lp"),
        "--evidence",
        "smokes(a)",
        "--budget",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["partial"], true);
    assert_eq!(v["steps"].as_array().unwrap().len(), 3);
}

#[test]
fn exactness_is_required_for_counting() {
    let o = run(&["query", "count", &program("nt.lp")]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["query", "enumerate", &program("nt.lp")]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lp");
    std::fs::write(&bad, "a :- .\n").unwrap();
    assert_eq!(run(&["compile", bad.to_str().unwrap()]).status.code(), Some(2));
    let o = run(&["query", "count", &program("smokers.lp"), "--evidence", "smokes(a) &"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["query", "count", &program("smokers.lp"), "--evidence", "nobody"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn enumerate_lists_models() {
    let o = run(&[
        "query",
        "enumerate",
        &program("gear_wheels.lp"),
        "--evidence",
        "turns1(1)",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let models = json(&o)["models"].as_array().unwrap().clone();
    assert_eq!(models.len(), 3);
}
