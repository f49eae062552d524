use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn opwire(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opwire"))
        .args(args)
        .env_remove("OPWIRE_MAX_ENUM")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn corpus_validates() {
    for name in ["minimal.model", "uav.model", "uav-perturbed.model", "uav-finite.model", "uav-lti.model"] {
        let o = opwire(&["validate", path(&corpus(name))]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn corpus_files_are_canonical() {
    for name in ["minimal.model", "uav.model", "uav-perturbed.model", "uav-finite.model", "uav-lti.model"] {
        let o = opwire(&["fmt", path(&corpus(name))]);
        assert_eq!(stdout(&o), std::fs::read_to_string(corpus(name)).unwrap(), "{name}");
    }
}

#[test]
fn naturality_on_the_finite_uav() {
    let o = opwire(&["check-naturality", path(&corpus("uav-finite.model")), "--horizon", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "naturality holds (16 traces)\n");
}

#[test]
fn perturbed_refinement_reports_a_counterexample() {
    let o = opwire(&["check-refinement", path(&corpus("uav-perturbed.model")), "--box", "D"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample inputs: [c=down,e=calm; c=down,e=calm]"), "{}", stdout(&o));
    let o = opwire(&["check-refinement", path(&corpus("uav.model")), "--box", "D"]);
    assert_eq!(o.status.code(), Some(0));
    let o = opwire(&["check-refinement", path(&corpus("uav-lti.model")), "--box", "D"]);
    assert_eq!(o.status.code(), Some(0));
    let o = opwire(&["check-refinement", path(&corpus("uav.model")), "--box", "L"]);
    assert_eq!(o.status.code(), Some(2));
    let o = opwire(&["check-refinement", path(&corpus("uav.model")), "--box", "Z"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_exit_codes() {
    assert_eq!(opwire(&["check", path(&corpus("uav.model"))]).status.code(), Some(0));
    let o = opwire(&["check", path(&corpus("uav-perturbed.model"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("D trace-contract: violated"));
    assert_eq!(stdout(&opwire(&["check", path(&corpus("minimal.model"))])), "no contracts\n");
}

#[test]
fn simulate_holds_the_last_row() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("in.csv");
    std::fs::write(&inputs, "u\n1\n0\n").unwrap();
    let model = corpus("minimal.model");
    let o = opwire(&["simulate", path(&model), "--inputs", path(&inputs), "--horizon", "4"]);
    assert_eq!(stdout(&o), "t,y\n0,0\n1,1\n2,0\n3,0\n");
    let o = opwire(&["simulate", path(&model), "--inputs", path(&inputs), "--horizon", "1"]);
    assert_eq!(stdout(&o), "t,y\n0,0\n");

    std::fs::write(&inputs, "u\n7\n").unwrap();
    assert_eq!(opwire(&["simulate", path(&model), "--inputs", path(&inputs)]).status.code(), Some(2));
    std::fs::write(&inputs, "v\n1\n").unwrap();
    assert_eq!(opwire(&["simulate", path(&model), "--inputs", path(&inputs)]).status.code(), Some(2));
}

#[test]
fn simulate_linear_model() {
    let o = opwire(&["simulate", path(&corpus("uav-lti.model")), "--inputs", path(&corpus("uav-lti-inputs.csv")), "--horizon", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 101);
    assert!(text.starts_with("t,s\n0,0\n"));
}

#[test]
fn enumeration_cap_flag_beats_environment() {
    let file = corpus("uav-finite.model");
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_opwire"));
        cmd.args(["check-naturality", path(&file), "--horizon", "2"]);
        cmd.env_remove("OPWIRE_MAX_ENUM");
        if let Some(v) = env {
            cmd.env("OPWIRE_MAX_ENUM", v);
        }
        if let Some(v) = flag {
            cmd.args(["--max-enum", v]);
        }
        cmd.output().unwrap().status.code()
    };
    assert_eq!(run(None, None), Some(0));
    assert_eq!(run(Some("10"), None), Some(2));
    assert_eq!(run(Some("10"), Some("100000")), Some(0));
    assert_eq!(run(Some("100000"), Some("10")), Some(2));
}

#[test]
fn malformed_files_exit_2_with_positions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.model");
    std::fs::write(&bad, "{ \"version\": ").unwrap();
    let o = opwire(&["validate", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    let text = std::fs::read_to_string(corpus("uav-finite.model")).unwrap();
    std::fs::write(&bad, text.replacen("\"port\": \"s_est\"", "\"port\": \"nope\"", 1)).unwrap();
    let o = opwire(&["validate", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("invalid at /model/wiring/"), "{}", stdout(&o));
    assert_eq!(opwire(&["check", path(&bad)]).status.code(), Some(2));

    assert_eq!(opwire(&["check-naturality", path(&bad)]).status.code(), Some(2));
}

#[test]
fn flatten_output_is_a_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("flat.model");
    let o = opwire(&["flatten", path(&corpus("uav.model"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\"provenance:D/airframe\": \"D\""));
    std::fs::write(&out, &text).unwrap();
    assert_eq!(opwire(&["validate", path(&out)]).status.code(), Some(0));
    let o = opwire(&["check-naturality", path(&out), "--horizon", "2"]);
    assert_eq!(stdout(&o), "naturality holds (16 traces)\n");
}

#[test]
fn dot_export_is_deterministic() {
    let a = opwire(&["export-dot", path(&corpus("uav.model"))]);
    let b = opwire(&["export-dot", path(&corpus("uav.model"))]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).matches(" [label=").count(), 3);
    let flat = stdout(&opwire(&["export-dot", path(&corpus("uav.model")), "--flat"]));
    assert!(flat.contains("\"box:D/autopilot\""));
}

#[test]
fn sequential_flag_gives_identical_output() {
    let file = corpus("uav.model");
    for args in [vec!["check"], vec!["compose-contracts"], vec!["check-naturality", "--horizon", "3"]] {
        let mut a = vec![args[0], path(&file)];
        a.extend(&args[1..]);
        let par = opwire(&a);
        a.push("--sequential");
        let seq = opwire(&a);
        assert_eq!(par.stdout, seq.stdout);
    }
}
