use std::process::{Command, Output};

use serde_json::Value;

fn htype(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_htype"))
        .args(args)
        .env_remove("HTYPE_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn kernel_at_identity() {
    let out = htype(&["kernel", "--n", "1", "--m", "1", "--R", "0", "--z", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["status"], "ok");
    let p = &doc["outputs"]["points"][0]["value"];
    assert!((num(&p["value"]) - 0.0625).abs() < 1e-10);
    assert!(num(&p["error"]) < 1e-12);
    let digest = doc["manifest"]["result_digest"].as_str().unwrap();
    assert!(digest.starts_with("sha256:") && digest.len() == 7 + 64);
}

#[test]
fn constants_report_closed_forms() {
    let out = htype(&["constants", "--n", "1", "--m", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let o = &json(&out)["outputs"];
    assert!((num(&o["be_lower_bound"]["value"]) - 2f64.sqrt()).abs() < 1e-15);
    assert!((num(&o["k_nm"]["value"]) - 0.303575519203605).abs() < 1e-14);
    for key in ["c_nm", "k_nm", "be_lower_bound"] {
        assert!(o[key]["error"].is_number(), "{key} lacks an error");
    }
    assert_eq!(num(&o["haar_lsi_constant"]["tau"]), 2.0);
}

#[test]
fn output_is_byte_identical_across_runs_and_workers() {
    let args = ["kernel", "--n", "2", "--m", "3", "--R", "0.5,3", "--z", "0.1,9"];
    let a = htype(&args);
    let b = htype(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_htype"))
        .args(args)
        .env("HTYPE_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn timing_leaves_the_digest_alone() {
    let args = ["distance", "--R", "1,2", "--z", "0.5"];
    let plain = json(&htype(&args));
    let mut timed_args = args.to_vec();
    timed_args.push("--timing");
    let timed = json(&htype(&timed_args));
    assert!(plain["manifest"].get("wall_clock_seconds").is_none());
    assert!(timed["manifest"]["wall_clock_seconds"].is_number());
    assert_eq!(plain["manifest"]["result_digest"], timed["manifest"]["result_digest"]);
}

#[test]
fn bad_input_exits_with_two() {
    let cases: [&[&str]; 5] = [
        &["kernel", "--n", "1", "--m", "1", "--R", "abc", "--z", "0"],
        &["kernel", "--n", "1", "--m", "1", "--R", "-1", "--z", "0"],
        &["kernel", "--n", "1", "--m", "1", "--R", "0", "--z", "0", "--tol-quad", "2"],
        &["no-such-command"],
        &["constants", "--n", "1", "--m", "1", "--csv", "/tmp/never.csv"],
    ];
    for args in cases {
        let out = htype(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn csv_has_header_and_unix_newlines() {
    let dir = std::env::temp_dir().join(format!("htype-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("k.csv");
    let out = htype(&[
        "kernel", "--n", "1", "--m", "1", "--R", "0,1", "--z", "0,2", "--csv", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_dir_all(&dir).ok();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("R,z,t,k1,k2,value"));
}

#[test]
fn eta_is_certified_on_a_coarse_grid() {
    let out = htype(&["eta", "--n", "1", "--m", "1", "--theta", "5", "--grid", "40"]);
    assert_eq!(out.status.code(), Some(0));
    let o = &json(&out)["outputs"];
    assert_eq!(o["certified"], true);
    assert!((num(&o["eta"]["value"]) - 1.770881).abs() < 1e-6);
}

#[test]
fn sampler_is_reproducible_from_its_seed() {
    let args = ["sample", "--n", "1", "--m", "1", "--paths", "500", "--steps", "64", "--seed", "7"];
    let a = htype(&args);
    let b = htype(&args);
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert_eq!(doc["manifest"]["seed"], 7);
    let x2 = &doc["outputs"]["mean_x_squared"];
    assert!((num(&x2["value"]) - 4.0).abs() < 5.0 * num(&x2["error"]));
}

#[test]
fn violated_inequality_exits_with_four() {
    // no defect and almost no gradient weight: entropy must win
    let out = htype(&["verify", "--n", "1", "--m", "1", "--inequality", "dls", "--theta", "0.01", "--eta", "0"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["status"], "violated");
}
