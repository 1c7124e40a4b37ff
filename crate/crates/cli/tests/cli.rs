use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn morita(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_morita"));
    cmd.args(args).env_remove("MORITA_MAX_ELEMENTS").env_remove("MORITA_MAX_WORD_LENGTH");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const DESK: &str = r#"{"group": "Z", "points": [0, 1, 2, 4], "radius": 8, "margin": 3, "stability_steps": 2}"#;

#[test]
fn pipeline_bundles_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "desk.json", DESK);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let o = morita(&["pipeline", "--config", &cfg, "--out", dir.to_str().unwrap()], &[]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 8);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
    let stdout1 = morita(&["pipeline", "--config", &cfg], &[]).stdout;
    let stdout2 = morita(&["pipeline", "--config", &cfg], &[]).stdout;
    assert_eq!(stdout1, stdout2);
    assert_eq!(stdout1, fs::read(a.join("bundle.json")).unwrap());
}

#[test]
fn pipeline_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(
        tmp.path(),
        "bad.json",
        r#"{"group": "Z", "graph": {"n": 2, "edges": [[0, 1]]}, "embedding": [3, 3], "radius": 4, "margin": 1}"#,
    );
    let o = morita(&["pipeline", "--config", &bad], &[]);
    assert_eq!(code(&o), 2);
    let doc = json_out(&o);
    assert_eq!(doc["halted_at"], "translations");
    assert_eq!(doc["manifest"]["outcome"], "fail");

    let cfg = write(tmp.path(), "desk.json", DESK);
    let o = morita(&["pipeline", "--config", &cfg], &[("MORITA_MAX_ELEMENTS", "5")]);
    assert_eq!(code(&o), 3);
    assert_eq!(json_out(&o)["manifest"]["limits"]["max_elements"], 5);

    let o = morita(&["pipeline", "--config", "/nonexistent/config.json"], &[]);
    assert_eq!(code(&o), 1);
    let o = morita(&["pipeline"], &[]);
    assert_eq!(code(&o), 1);
}

#[test]
fn group_ball_sizes() {
    let o = morita(&["group", "ball", "--backend", "free", "--rank", "2", "--radius", "2"], &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_out(&o)["report"]["size"], 17);
    let o = morita(&["group", "ball", "--group", "Z^2", "--radius", "1"], &[]);
    assert_eq!(json_out(&o)["report"]["size"], 5);
    let tmp = tempfile::tempdir().unwrap();
    let desc = write(tmp.path(), "z3.txt", "backend finite-table\ntable\n0 1 2\n1 2 0\n2 0 1\ngenerators 1\n");
    let o = morita(&["group", "ball", "--group-file", &desc, "--radius", "5"], &[]);
    assert_eq!(json_out(&o)["report"]["size"], 3);
}

#[test]
fn monoid_checks_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let desk = write(
        tmp.path(),
        "desk.json",
        r#"{"carrier": [0, 1, 2, 4], "generators": [[[1, 0], [2, 1]], [[2, 0], [4, 2]], [[4, 0]]]}"#,
    );
    let o = morita(&["monoid", "build", "--gens", &desk, "--check", "0EU,0F"], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));

    // a 3-cycle partial map on {a, b, c} restricted so that a nonzero
    // idempotent sits below a non-idempotent
    let eu = write(
        tmp.path(),
        "eu.json",
        r#"{"carrier": ["a", "b", "c"], "generators": [[["a", "b"], ["b", "a"], ["c", "c"]], [["c", "c"]]]}"#,
    );
    let o = morita(&["monoid", "build", "--gens", &eu, "--check", "0EU"], &[]);
    assert_eq!(code(&o), 2);
    assert_eq!(json_out(&o)["report"]["checks"]["zero_e_unitary"]["status"], "fail");

    let o = morita(&["monoid", "build", "--gens", &desk, "--check", "0F"], &[("MORITA_MAX_ELEMENTS", "3")]);
    assert_eq!(code(&o), 3);
}

#[test]
fn translations_lemma() {
    let tmp = tempfile::tempdir().unwrap();
    let pts = write(tmp.path(), "pts.json", r#"["e", "a", "b", "A", "B"]"#);
    let o = morita(
        &["translations", "build", "--group", "free2", "--points", &pts, "--verify", "lemma,partition"],
        &[],
    );
    assert_eq!(code(&o), 0);
    let doc = json_out(&o);
    assert_eq!(doc["report"]["lemma"]["outcome"], "pass");
    assert_eq!(doc["report"]["partition"]["domain_sum"], 25);
}

#[test]
fn monoid_germ_envelope_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let gens = write(
        tmp.path(),
        "gens.json",
        r#"{"carrier": [0, 1, 2, 4], "group": "Z", "labels": [1, 2, 4, 3],
            "generators": [[[1, 0], [2, 1]], [[2, 0], [4, 2]], [[4, 0]], [[4, 1]]]}"#,
    );
    let mon = tmp.path().join("monoid.json");
    let o = morita(&["monoid", "build", "--gens", &gens, "--check", "0EU,0F,phi", "--out", mon.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0);

    let germ = tmp.path().join("germ.json");
    let f = write(tmp.path(), "f.json", r#"["0", "1", "2", "4"]"#);
    let o = morita(
        &["groupoid", "germ", "--monoid", mon.to_str().unwrap(), "--tcf", "--reduce", &f, "--out", germ.to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&fs::read(&germ).unwrap()).unwrap();
    assert_eq!(doc["report"]["groupoid"]["arrows"].as_array().unwrap().len(), 16);

    let bad_f = write(tmp.path(), "bad.json", r#"["0"]"#);
    let o = morita(&["groupoid", "germ", "--monoid", mon.to_str().unwrap(), "--reduce", &bad_f], &[]);
    assert_eq!(code(&o), 2);
    assert!(json_out(&o)["report"]["saturated"]["detail"]["arrow"].is_string());

    let o = morita(
        &["envelope", "build", "--groupoid", germ.to_str().unwrap(), "--radius", "8", "--margin", "3", "--verify"],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json_out(&o);
    assert_eq!(doc["report"]["verification"]["equivalent"], true);
    assert_eq!(doc["report"]["classes"], 21);

    let o = morita(&["envelope", "build", "--groupoid", germ.to_str().unwrap(), "--radius", "3", "--margin", "3", "--verify"], &[]);
    assert_eq!(code(&o), 1);
}

#[test]
fn expander_gen_and_stats() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("g.edges");
    let o = morita(&["expander", "gen", "--n", "50", "--d", "3", "--seed", "7", "--out", path.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0);
    let again = morita(&["expander", "gen", "--n", "50", "--d", "3", "--seed", "7"], &[]);
    assert_eq!(fs::read(&path).unwrap(), again.stdout);

    let o = morita(&["expander", "stats", "--in", path.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0);
    let doc = json_out(&o);
    assert_eq!(doc["report"]["regular_degree"], 3);
    assert_eq!(doc["report"]["edges"], 75);

    let petersen = write(
        tmp.path(),
        "p.json",
        r#"{"n": 10, "edges": [[0,1],[1,2],[2,3],[3,4],[0,4],[0,5],[1,6],[2,7],[3,8],[4,9],[5,7],[7,9],[6,9],[6,8],[5,8]]}"#,
    );
    let o = morita(&["expander", "stats", "--in", &petersen, "--girth-min", "5", "--epsilon", "1"], &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_out(&o)["report"]["girth"], 5);
    let o = morita(&["expander", "stats", "--in", &petersen, "--girth-min", "6", "--epsilon", "1"], &[]);
    assert_eq!(code(&o), 2);

    let o = morita(&["expander", "gen", "--n", "5", "--d", "3", "--seed", "1"], &[]);
    assert_eq!(code(&o), 1);
}
