use std::process::{Command, Output};

fn bicheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bicheck")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn wrong_mass_coefficient_fails_naming_its_equation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("neg.toml");
    std::fs::write(&path, "[expectations]\nchi_mass = -0.125\n").unwrap();
    let out = bicheck(&["verify", "--config", path.to_str().unwrap(), "--only", "chi-mass,potential", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["schema"], "bicheck-report/1");
    let failing: Vec<_> = v["body"]["records"].as_array().unwrap().iter().filter(|r| r["passed"] == false).collect();
    assert_eq!(failing.len(), 1);
    assert_eq!(failing[0]["equation"], "Eq. (19)");
}

#[test]
fn identical_seed_gives_identical_bodies() {
    let args = ["verify", "--seed", "7", "--trials", "3", "--only", "clifford,chi-mass,dirac,theta-invariance", "--json"];
    let (a, b) = (bicheck(&args), bicheck(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(json(&a)["body"], json(&b)["body"]);
    let c = bicheck(&["verify", "--seed", "8", "--trials", "3", "--only", "clifford", "--json"]);
    assert_ne!(json(&a)["body"]["config_digest"], json(&c)["body"]["config_digest"]);
}

#[test]
fn only_runs_the_named_check() {
    let out = bicheck(&["verify", "--only", "myform", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let records = v["body"]["records"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["id"], "myform");
    assert_eq!(records[0]["equation"], "Eq. (13)");
}

#[test]
fn invalid_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[probes]\nunknown = 1\n").unwrap();
    assert_eq!(bicheck(&["verify", "--config", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bicheck(&["verify", "--only", "no-such-check"]).status.code(), Some(2));
    assert_eq!(bicheck(&["expand", "phi-Q"]).status.code(), Some(2));
    assert_eq!(bicheck(&["theta", "potentials", "--w3", "0", "--b", "10", "--g1", "0.6", "--g2", "0.4", "--ell", "1"]).status.code(), Some(2));
}

#[test]
fn tolerance_scale_can_break_a_check() {
    let out = bicheck(&["verify", "--only", "potential", "--tol-scale", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn expand_and_constants_subcommands() {
    let v = json(&bicheck(&["expand", "phi-V", "--json"]));
    let rows = v["rows"].as_array().unwrap();
    assert!(rows[1..].iter().all(|r| r["computed"][0] == 0.0 && r["computed"][1] == 0.0));

    let c = json(&bicheck(&["constants", "--json"]));
    let i = &c["inputs"];
    let oracle = (10.0 / (3.0 * i["fine_structure"].as_f64().unwrap()) * (1.0 + 2.0 * i["sin2_weinberg"].as_f64().unwrap())).sqrt();
    let got = c["derived"]["ell_over_planck"].as_f64().unwrap();
    assert!((got - oracle).abs() / oracle < 1e-12);

    let t = json(&bicheck(&["theta", "transform", "--energy", "0", "--charge", "1", "--theta", "0.1", "--json"]));
    assert!((t["after"]["energy"].as_f64().unwrap() - 0.1_f64.sinh()).abs() < 1e-15);
    let p = json(&bicheck(&["theta", "potentials", "--w3", "0.5", "--b", "0.75", "--g1", "0.6", "--g2", "0.4", "--ell", "0.2", "--json"]));
    assert_eq!(p["consistent"], true);
}
