use std::process::{Command, Output};

use serde_json::Value;

fn weyllab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weyllab")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn eval_at_a_rational_point_has_root_modulus() {
    let v = json(&weyllab(&["eval", "--N", "7", "--preset", "ones", "--point", "0,3/7"]));
    let abs = v["metrics"]["values"][0]["abs"].as_f64().unwrap();
    assert!((abs - 7f64.sqrt()).abs() < 1e-12);
    for key in ["command", "params", "metrics", "bound", "ratio", "wall_time"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn eval_decimal_points_match_fractions() {
    let a = json(&weyllab(&["eval", "--N", "12", "--preset", "random-phase", "--seed", "4", "--point", "1/4,1/8"]));
    let b = json(&weyllab(&["eval", "--N", "12", "--preset", "random-phase", "--seed", "4", "--point", "0.25,0.125"]));
    let (x, y) = (&a["metrics"]["values"][0], &b["metrics"]["values"][0]);
    for k in ["re", "im"] {
        assert!((x[k].as_f64().unwrap() - y[k].as_f64().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn non_square_ball_scale_is_a_config_error() {
    let out = weyllab(&["weights", "--N", "7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("perfect square"));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(weyllab(&["levelsets", "--N", "16", "--x-oversample", "1"]).status.code(), Some(2));
    assert_eq!(weyllab(&["incidence", "--N", "16", "--M", "32"]).status.code(), Some(2));
    assert_eq!(weyllab(&["eval", "--N", "4", "--point", "nonsense"]).status.code(), Some(2));
    assert_eq!(weyllab(&["suite", "--N", "4"]).status.code(), Some(2));
    assert_eq!(weyllab(&["--format", "csv", "eval", "--N", "4", "--point", "0,0"]).status.code(), Some(2));
}

#[test]
fn ramanujan_and_dirichlet() {
    let v = json(&weyllab(&["rationals", "ramanujan", "--q", "12", "--n", "4"]));
    assert_eq!(v["metrics"]["value"], -2);
    let v = json(&weyllab(&["rationals", "dirichlet", "--t", "0.3333", "--N", "10"]));
    assert_eq!(v["metrics"]["fraction"], "1/3");
}

#[test]
fn levelset_csv_has_one_row_per_window() {
    let out = weyllab(&["--format", "csv", "levelsets", "--N", "16"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,count,bound,ratio"));
    // dyadic lambda in [2, 4]
    assert_eq!(lines.count(), 2);
}

#[test]
fn sharp_incidences_reach_the_row_count() {
    let v = json(&weyllab(&["incidence", "--family", "sharp", "--N", "128", "--M", "128", "--q", "8", "--Q", "8"]));
    let row = &v["metrics"]["rows"][0];
    // one row of 8 points k/8; a pair meets q in [8,16) iff its difference has odd k
    assert_eq!(row["count"], 32);
}

#[test]
fn counterexample_table_and_csv() {
    let v = json(&weyllab(&["counterexample", "--k", "8,16"]));
    assert_eq!(v["metrics"]["rows"].as_array().unwrap().len(), 2);
    assert!(v["metrics"]["exponent_fit"].as_f64().unwrap() > 0.0);
    let out = weyllab(&["--format", "csv", "counterexample", "--k", "8"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("k,N,R,support_size,ratio,tube_sup\n8,"));
}

#[test]
fn uniform_weight_ratio_closed_form() {
    let v = json(&weyllab(&["weights", "--N", "256", "--weight", "uniform"]));
    assert!((v["ratio"].as_f64().unwrap() - 0.25).abs() < 1e-9);
}

#[test]
fn kernel_sup_report_lists_every_scale() {
    let v = json(&weyllab(&["kernel", "--N", "32", "--report", "sup"]));
    assert!(v["ratio"].as_f64().unwrap() <= 10.0);
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_weyllab"))
            .env("WEYLLAB_THREADS", threads)
            .args(["levelsets", "--N", "32", "--coeffs", "random-phase", "--seed", "3", "--boxes", "8"])
            .output()
            .unwrap();
        weyllab_cli::report::strip_timing(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
    };
    assert_eq!(run("1"), run("3"));
    let bad = Command::new(env!("CARGO_BIN_EXE_weyllab")).env("WEYLLAB_THREADS", "x").args(["rationals", "farey", "--Q", "2"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
