use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisypaper"))
        .args(args)
        .env_remove("NOISYPAPER_SEED")
        .output()
        .expect("spawn noisypaper")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn capacity_of_costa_channel() {
    let out = run(&["capacity", "--p", "1", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["capacity"]["bits"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["alpha_star"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["minors"]["d_P_norm"].as_f64().unwrap(), 1.0);
    assert_eq!(v["mi_side_noise_nats"].as_f64().unwrap(), 0.0);
}

#[test]
fn capacity_zero_when_input_copies_state() {
    let out = run(&["capacity", "--p", "1", "--n", "1", "--rho-xs1", "1", "--markov"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["capacity"]["bits"].as_f64().unwrap(), 0.0);
}

#[test]
fn infinite_capacity_is_a_string() {
    let out = run(&["capacity", "--p", "1", "--n", "1", "--rho-s1z", "1", "--markov"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["capacity"]["nats"], "inf");
}

#[test]
fn non_psd_is_a_usage_error() {
    let out = run(&["capacity", "--p", "1", "--n", "1", "--rho-s1z", "0.9", "--rho-s2z", "0.9", "--markov"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("NotPSD"), "{}", stderr(&out));
}

#[test]
fn markov_violation_is_reported_by_name() {
    let out = run(&["capacity", "--p", "1", "--n", "1", "--rho-xs1", "0.5", "--rho-s1s2", "0.6", "--rho-xs2", "0.4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("MarkovViolation"));
}

#[test]
fn non_markov_model_has_no_capacity() {
    let out = run(&["capacity", "--p", "1", "--n", "1", "--rho-xz", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["capacity"].is_null());
    assert!(v["lower_bound"]["nats"].as_f64().unwrap() > 0.0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    std::fs::write(&path, r#"{"p": 3.0, "n": 1.0, "rho_s1z": 0.6, "markov_noise": true}"#).unwrap();
    let p = path.to_str().unwrap();

    let from_file = json(&run(&["capacity", "--config", p]));
    let want = 0.5 * (1.0f64 + 3.0 / 0.64).ln();
    assert!((from_file["capacity"]["nats"].as_f64().unwrap() - want).abs() < 1e-12);

    let overridden = json(&run(&["capacity", "--config", p, "--p", "1"]));
    let want = 0.5 * (1.0f64 + 1.0 / 0.64).ln();
    assert!((overridden["capacity"]["nats"].as_f64().unwrap() - want).abs() < 1e-12);

    std::fs::write(&path, r#"{"p": 1.0, "n": 1.0, "bogus": 2}"#).unwrap();
    let out = run(&["capacity", "--config", p]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("InputError"));
}

#[test]
fn sweep_reproduces_symmetric_curve() {
    let out = run(&["sweep", "--param", "rho_xs1", "--from", "-0.99", "--to", "0.99", "--steps", "199", "--p", "1", "--n", "1", "--markov"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "param,value,C_bits,C_nats,RG_nats,alpha_star,mi_s1s2_z_nats");
    let bits: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(bits.len(), 199);
    assert_eq!(bits[99], 0.5);
    for i in 0..199 {
        assert_eq!(bits[i], bits[198 - i]);
    }
}

#[test]
fn single_step_sweep_matches_capacity() {
    let args = ["--p", "2", "--n", "1", "--rho-s1z", "0.4", "--rho-s1s2", "0.3", "--markov"];
    let mut sweep_args = vec!["sweep", "--param", "rho_xs1", "--from", "0.2", "--to", "0.9", "--steps", "1"];
    sweep_args.extend(args);
    let text = String::from_utf8(run(&sweep_args).stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "rho_xs1");
    assert_eq!(row[1], "0.2");

    let mut cap_args = vec!["capacity", "--rho-xs1", "0.2"];
    cap_args.extend(args);
    let v = json(&run(&cap_args));
    let c: f64 = row[3].parse().unwrap();
    assert!((c - v["capacity"]["nats"].as_f64().unwrap()).abs() < 1e-11);
    let a: f64 = row[5].parse().unwrap();
    assert!((a - v["alpha_star"].as_f64().unwrap()).abs() < 1e-11);
}

#[test]
fn sweep_marks_infeasible_points() {
    let out = run(&["sweep", "--param", "rho_s1z", "--from", "0", "--to", "0.9", "--steps", "4", "--p", "1", "--n", "1", "--rho-s2z", "0.9", "--markov"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().last().unwrap().ends_with(",skip,,,,"));
}

#[test]
fn sweep_output_is_deterministic_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&["sweep", "--param", "snr_db", "--from", "-10", "--to", "20", "--steps", "61", "--p", "1", "--n", "1", "--rho-s1z", "0.5", "--markov", "-o", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    assert!(!a.contains(&b'\r'));
}

#[test]
fn unknown_sweep_parameter() {
    let out = run(&["sweep", "--param", "rho_zz", "--from", "0", "--to", "1", "--p", "1", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_minors_passes() {
    let out = run(&["verify", "minors", "--trials", "200", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v[0]["suite"], "minors");
    assert!(v[0]["max_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn verify_is_deterministic_under_env_seed() {
    let go = || {
        Command::new(env!("CARGO_BIN_EXE_noisypaper"))
            .args(["verify", "rates", "--trials", "20"])
            .env("NOISYPAPER_SEED", "99")
            .output()
            .unwrap()
    };
    let (a, b) = (go(), go());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)[0]["seed"], 99);
}

#[test]
fn verify_failure_exits_one() {
    // too few samples for the marginal KS tolerance
    let out = run(&["verify", "copula", "--n", "2000", "--rho", "0.2", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn copula_out_of_range() {
    let out = run(&["copula", "--x", "normal", "--rho", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("OutOfRange"));
}

#[test]
fn copula_reports_moments() {
    let out = run(&["copula", "--x", "uniform", "--rho", "0.1", "--n", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["a_x"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-10);
    assert!((v["rho_param"].as_f64().unwrap() - 0.3).abs() < 1e-9);
    assert!(v["check"].is_null());
}

#[test]
fn copula_with_tabulated_marginal() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cdf.csv");
    std::fs::write(&path, "x,F\n0,0\n1,0.5\n2,1\n").unwrap();
    let spec = format!("table:{}", path.display());
    let out = run(&["copula", "--x", &spec, "--s", "uniform", "--rho", "0.2", "--n", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // the table is uniform on [0, 2]
    assert!((json(&out)["a_x"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn self_interference_demo_json() {
    let out = run(&["demo-self-interference", "--n", "10000", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["ratio"].as_f64().unwrap() - 1.0).abs() < 0.05);
    assert_eq!(v["feasible"], false);
}
