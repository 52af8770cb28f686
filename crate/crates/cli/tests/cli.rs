use std::process::{Command, Output};

use dualstat::identities::IdentityReport;
use dualstat::intervals::ConfidenceInterval;
use serde_json::Value;

fn dualstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualstat")).args(args).env_remove("DUALSTAT_SEED").output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn csv_rows(out: &Output) -> Vec<(String, String)> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("key,value"));
    lines
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn lookup<'a>(value: &'a Value, path: &str) -> &'a Value {
    path.split('.').fold(value, |v, key| match v {
        Value::Array(items) => &items[key.parse::<usize>().unwrap()],
        other => &other[key],
    })
}

#[test]
fn poisson_interval_zero_count() {
    let out = dualstat(&["interval", "poisson", "--n", "0", "--level", "0.90", "--policy", "central"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["command"], "interval poisson");
    assert_eq!(v["status"], "ok");
    let lower = v["result"]["lower"].as_f64().unwrap();
    let upper = v["result"]["upper"].as_f64().unwrap();
    assert!((lower - 0.0512933).abs() < 1e-7);
    assert!((upper - 2.9957323).abs() < 1e-7);
    assert!(!out.stderr.is_empty(), "summary goes to stderr");
}

#[test]
fn normal_interval_symmetric() {
    let out = dualstat(&["--quiet", "interval", "normal", "--x", "0", "--sigma", "1", "--level", "0.90"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    let v = json_of(&out);
    assert!((v["result"]["upper"].as_f64().unwrap() - 1.6448536).abs() < 1e-7);
    assert!((v["result"]["lower"].as_f64().unwrap() + 1.6448536).abs() < 1e-7);
}

#[test]
fn negative_observation_is_a_value() {
    let out = dualstat(&["--quiet", "interval", "normal", "--x", "-3.5", "--sigma", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["inputs"]["x"], -3.5);
}

#[test]
fn infinite_end_prints_token() {
    let out = dualstat(&["--quiet", "interval", "poisson", "--n", "4", "--policy", "lower_limit"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["result"]["upper"], "inf");
    let ci: ConfidenceInterval = serde_json::from_value(v["result"].clone()).unwrap();
    assert!(ci.upper.is_infinite());
}

#[test]
fn usage_and_domain_errors_exit_2() {
    let cases: [&[&str]; 8] = [
        &["interval", "poisson", "--n", "0", "--level", "1.5"],
        &["interval", "poisson", "--n", "0", "--policy", "widest"],
        &["interval", "normal", "--x", "0", "--sigma", "0"],
        &["verify", "eq99"],
        &["verify", "eq5", "--mu1", "1", "--mu2", "2", "--n", "3", "--m", "3"],
        &["eval", "poisson-pmf", "--n", "1", "--mu", "-1"],
        &["eval", "beta-pdf", "--x", "1.5", "--n", "1", "--m", "1"],
        &["reconstruct", "poisson", "--n", "5", "--accepted", "1000", "--seed", "7", "--mu-max", "1"],
    ];
    for args in cases {
        let out = dualstat(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn reconstruct_config_errors_exit_2() {
    for args in [
        vec!["reconstruct", "poisson", "--n", "1", "--accepted", "999", "--seed", "1"],
        vec!["reconstruct", "poisson", "--n", "1", "--accepted", "1000", "--seed", "1", "--bins", "5"],
        vec!["reconstruct", "poisson", "--n", "1", "--accepted", "1000", "--seed", "1", "--workers", "0"],
        vec!["reconstruct", "normal", "--x", "0", "--sigma", "1", "--accepted", "1000", "--seed", "1", "--window", "0"],
    ] {
        assert_eq!(dualstat(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let args = ["--quiet", "reconstruct", "poisson", "--n", "1", "--accepted", "1000"];
    assert_eq!(dualstat(&args).status.code(), Some(2));
    let from_env = Command::new(env!("CARGO_BIN_EXE_dualstat")).args(args).env("DUALSTAT_SEED", "17").output().unwrap();
    assert_eq!(from_env.status.code(), Some(0));
    let explicit = dualstat(&[&args[..], &["--seed", "17"]].concat());
    assert_eq!(from_env.stdout, explicit.stdout);
}

#[test]
fn verify_examples() {
    let out = dualstat(&["--quiet", "verify", "eq12", "--mu1", "0.5", "--mu2", "7", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["status"], "ok");
    let report: IdentityReport = serde_json::from_value(v["result"].clone()).unwrap();
    assert!(report.residual.abs() <= 1e-10);

    let out = dualstat(&["--quiet", "verify", "eq11", "--p", "0", "--n", "4", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["result"]["residual"], 0.0);

    for args in [
        vec!["verify", "eq5", "--mu1", "2", "--mu2", "9", "--n", "1", "--m", "4"],
        vec!["verify", "eq8", "--b", "1", "--c", "-2", "--d", "3", "--sigma", "1.5"],
        vec!["verify", "eq17", "--x", "1", "--c", "-2", "--d", "3", "--sigma", "1.5"],
        vec!["verify", "eq18", "--x", "1", "--c", "2", "--d", "3", "--sigma", "1.5"],
    ] {
        let out = dualstat(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_eq!(json_of(&out)["status"], "ok");
    }
}

#[test]
fn verify_sweep() {
    let out = dualstat(&["--quiet", "verify", "sweep", "--count", "10000", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["result"].as_array().unwrap().len(), 6);
}

#[test]
fn eval_examples() {
    let cases: [(&[&str], f64); 5] = [
        (&["eval", "poisson-pmf", "--n", "0", "--mu", "1"], 0.3678794412),
        (&["eval", "beta-pdf", "--x", "0.5", "--n", "1", "--m", "1"], 1.5),
        (&["eval", "gamma-cdf", "--mu", "3", "--n", "2"], 0.5768099189),
        (&["eval", "gamma-pdf", "--mu", "3.5", "--n", "2"], 0.1849589735),
        (&["eval", "normal-pdf", "--x", "0"], 0.3989422804),
    ];
    for (args, expected) in cases {
        let out = dualstat(&[&["--quiet"], args].concat());
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let got = json_of(&out)["result"].as_f64().unwrap();
        assert!((got - expected).abs() < 1e-10, "{args:?}: {got}");
    }
    // same value through the general shape/rate form
    let general = dualstat(&["--quiet", "eval", "gamma-cdf", "--x", "3", "--shape", "3"]);
    assert!((json_of(&general)["result"].as_f64().unwrap() - 0.5768099189).abs() < 1e-10);
    let negbin = dualstat(&["--quiet", "eval", "negbin-pmf", "--k", "2", "--n", "1", "--p", "0.5"]);
    // C(3,2) 0.5^2 0.5^2
    assert_eq!(json_of(&negbin)["result"], 0.1875);
}

#[test]
fn csv_matches_json() {
    let commands: [&[&str]; 4] = [
        &["interval", "poisson", "--n", "7", "--level", "0.95", "--policy", "shortest"],
        &["verify", "eq5", "--mu1", "2", "--mu2", "9", "--n", "1", "--m", "4"],
        &["eval", "gamma-pdf", "--mu", "2.2", "--n", "3"],
        &["reconstruct", "normal", "--x", "1", "--sigma", "2", "--accepted", "1000", "--seed", "3"],
    ];
    for args in commands {
        let json = json_of(&dualstat(&[&["--quiet"], args].concat()));
        let csv = csv_rows(&dualstat(&[&["--quiet", "--format", "csv"], args].concat()));
        assert_eq!(csv[0], ("command".into(), json["command"].as_str().unwrap().to_string()));
        let mut numeric = 0;
        for (key, text) in &csv[2..] {
            let in_json = lookup(&json, key);
            match in_json {
                Value::Number(n) => {
                    assert_eq!(text.parse::<f64>().unwrap(), n.as_f64().unwrap(), "{key}");
                    numeric += 1;
                }
                Value::String(s) => assert_eq!(text, s, "{key}"),
                Value::Null => assert!(text.is_empty()),
                other => assert_eq!(text, &other.to_string(), "{key}"),
            }
        }
        assert!(numeric > 0, "{args:?}");
    }
}

#[test]
fn printed_json_round_trips() {
    for args in [
        vec!["--quiet", "interval", "poisson", "--n", "12", "--level", "0.6827"],
        vec!["--quiet", "verify", "eq17", "--x", "0.3", "--c", "1.7", "--d", "-0.4", "--sigma", "0.9"],
        vec!["--quiet", "reconstruct", "poisson", "--n", "2", "--accepted", "2000", "--seed", "4"],
    ] {
        let out = dualstat(&args);
        let text = String::from_utf8(out.stdout).unwrap();
        let parsed: Value = serde_json::from_str(&text).unwrap();
        let reprinted = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
        assert_eq!(reprinted, text, "{args:?}");
    }
}

#[test]
fn floats_carry_twelve_significant_digits() {
    let out = dualstat(&["--quiet", "eval", "poisson-pmf", "--n", "0", "--mu", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"result\": 0.367879441171,"), "{text}");
}

#[test]
fn reconstruct_writes_histogram_and_gates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hist.csv");
    let out = dualstat(&[
        "--quiet",
        "reconstruct",
        "poisson",
        "--n",
        "0",
        "--accepted",
        "100000",
        "--seed",
        "42",
        "--hist-out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["result"]["pass"], true);
    assert_eq!(v["status"], "ok");
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("edge_low,edge_high,count,model_mass"));
    let total: u64 = lines.map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 100_000);

    let wrong = dualstat(&[
        "--quiet",
        "reconstruct",
        "poisson",
        "--n",
        "0",
        "--accepted",
        "1000",
        "--seed",
        "42",
        "--mu-max",
        "30",
        "--test-shape",
        "2",
    ]);
    assert_eq!(wrong.status.code(), Some(1));
    let v = json_of(&wrong);
    assert_eq!(v["status"], "fail");
    assert_eq!(v["result"]["pass"], false);
}

#[test]
fn unwritable_histogram_path_exits_2() {
    let out = dualstat(&[
        "reconstruct",
        "poisson",
        "--n",
        "0",
        "--accepted",
        "1000",
        "--seed",
        "1",
        "--hist-out",
        "/nonexistent-dir/h.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
