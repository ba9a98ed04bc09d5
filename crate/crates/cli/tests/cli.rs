use std::process::{Command, Output};

fn pspin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pspin"))
        .args(args)
        .env_remove("PSPIN_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn p3_genus2_table() {
    let o = pspin(&["intersect", "--p", "3", "--genus", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("<tau_{0,1} tau_{4,1}>_2 = 1/864"), "{s}");
    assert!(s.contains("<tau_{1,1} tau_{3,1}>_2 = 11/4320"), "{s}");
    assert!(s.contains("<tau_{2,1} tau_{2,1}>_2 = 17/4320"), "{s}");
}

#[test]
fn json_output_is_exact_and_stable() {
    let args = ["intersect", "--p", "4", "--genus", "1", "--format", "json"];
    let a = pspin(&args);
    let b = pspin(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["p"], 4);
    let entries = v["entries"].as_array().unwrap();
    assert!(entries.iter().any(|e| e["m"] == serde_json::json!([1, 1]) && e["num"] == "1" && e["den"] == "8"));
}

#[test]
fn contour_mode_matches_real_mode() {
    let real = pspin(&["intersect", "--p", "4", "--genus", "2", "--format", "csv"]);
    let contour = pspin(&["intersect", "--p", "4", "--genus", "2", "--format", "csv", "--mode", "contour"]);
    assert_eq!(real.status.code(), Some(0));
    assert_eq!(real.stdout, contour.stdout);
    assert!(stdout(&real).starts_with("genus,m,j,num,den\n"));
}

#[test]
fn symbolic_one_point() {
    let o = pspin(&["intersect", "--p", "symbolic", "--genus", "1", "--points", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("<tau_{1,0}>_1"), "{s}");
    assert!(s.contains("p"), "{s}");
}

#[test]
fn genus_zero_is_empty() {
    let o = pspin(&["intersect", "--p", "3", "--genus", "0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["entries"].as_array().unwrap().is_empty());
}

#[test]
fn golden_values_hold() {
    for (p, g, n) in [("3", "2", "2"), ("4", "1", "2"), ("7", "1", "2"), ("3", "3", "1"), ("-1", "3", "1"), ("-3", "2", "1")] {
        let o = pspin(&["intersect", "--p", p, "--genus", g, "--points", n, "--golden"]);
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(o.status.code(), Some(0), "p={p} g={g}: {err}");
        assert!(err.contains("golden ok") && !err.contains("DRIFT"), "{err}");
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["intersect", "--p", "2", "--genus", "1"][..],
        &["intersect", "--p", "banana", "--genus", "1"],
        &["intersect", "--p", "symbolic", "--genus", "1", "--points", "2"],
        &["intersect", "--p", "3", "--genus", "1", "--points", "3"],
        &["density", "--e-min", "0"],
        &["density", "--e-min", "-1"],
        &["density", "--central-charge", "x/y"],
        &["verify", "string", "--p", "2"],
    ] {
        let o = pspin(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn string_and_dilaton_pass() {
    for check in ["string", "dilaton", "selection"] {
        let o = pspin(&["verify", check, "--p", "5", "--genus", "2"]);
        assert_eq!(o.status.code(), Some(0), "{check}: {}", stdout(&o));
        assert!(stdout(&o).contains(&format!("verify_{check}: pass")));
    }
}

#[test]
fn binet_passes() {
    let o = pspin(&["verify", "binet", "--z", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn impossible_tolerance_fails_with_exit_1() {
    let o = pspin(&["verify", "mc", "--samples", "2000", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn central_charge_at_nine_quarters() {
    for k in ["2.25", "9/4"] {
        let o = pspin(&["density", "--central-charge", k, "--samples", "10"]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("central charge at k' = 9/4: 26"), "{}", stdout(&o));
    }
}

#[test]
fn output_dir_receives_file() {
    let dir = std::env::temp_dir().join(format!("pspin-cli-test-{}", std::process::id()));
    let o = Command::new(env!("CARGO_BIN_EXE_pspin"))
        .args(["intersect", "--p", "3", "--genus", "2", "--format", "csv"])
        .env("PSPIN_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let written = std::fs::read_to_string(dir.join("intersect_p3_g2_n2.csv")).unwrap();
    assert!(written.contains("2,2;2,1;1,17,4320"), "{written}");
    std::fs::remove_dir_all(&dir).unwrap();
}
