use std::process::{Command, Output};

fn logbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logbound")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

#[test]
fn table_csv_has_eleven_rows() {
    let o = logbound(&["table", "--xmin", "0", "--xmax", "10", "--points", "11", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[0], "x,ln1p,sqrt,pade,karamata,cubic,cb");
    assert!(lines[4].starts_with("3e0,1.3862943611198906188"), "{}", lines[4]);
    assert!(lines[4].contains(",1.875e0,"));
    assert!(lines[4].ends_with(",1.3912472280167890329929769282066934048962235222117e0"));
}

#[test]
fn certify_refined_bound_json() {
    let o = logbound(&["certify", "--expr", "H(t) - (1/60)*(t-1)^5", "--a", "0.9", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["case"], "IV");
    assert_eq!(v["pattern"], "drr");
    let r: f64 = v["radius"].as_str().unwrap().parse().unwrap();
    assert!(r > 0.0 && r <= 0.9, "{r}");
    assert!(v["conditions"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn sandwich_check_pade_reports_witness() {
    let o = logbound(&["sandwich", "check", "--p", "x*(2+x)", "--q", "2*(1+x)", "--region", "upper", "--xmax", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("witness: "), "{text}");
    assert!(text.contains("P/Q <= cb(x) fails"));

    let o = logbound(&[
        "sandwich", "check", "--p", "x*(2+x)", "--q", "2*(1+x)", "--region", "upper", "--xmax", "10", "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "violated");
    assert_eq!(v["witness"]["side"], "cb");
    let margin: f64 = v["witness"]["margin"].as_str().unwrap().parse().unwrap();
    assert!(margin > 1e-20);
}

#[test]
fn sandwich_check_reports_holding_grid() {
    // [3/3] Pade of ln(1+x) plus x^5/1920: strictly inside the band near 0.
    let p = "60*x + 60*x^2 + 11*x^3 + (60 + 90*x + 36*x^2 + 3*x^3)*x^5/1920";
    let o = logbound(&["sandwich", "check", "--p", p, "--q", "60 + 90*x + 36*x^2 + 3*x^3", "--xmax", "0.1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("holds on 1000 points"));
}

#[test]
fn witness_and_fit_subcommands() {
    let o = logbound(&["sandwich", "witness", "--p", "x*(6+x)", "--q", "2*(3+2*x)", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["witness"]["region"], "upper");

    let o =
        logbound(&["sandwich", "fit", "--n", "0", "--m", "0", "--xmax", "1", "--samples", "50", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "infeasible");
    assert!(v["max_slack"].as_str().unwrap().starts_with('-'));

    let o = logbound(&["sandwich", "fit", "--degrees", "0x0,1x1", "--xmax-list", "1,2", "--samples", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "degrees,X=1e0,X=2e0");
    assert!(lines[1].starts_with("(0 0),infeasible/-"), "{}", lines[1]);
    assert_eq!(lines.len(), 3);
}

#[test]
fn compare_and_radius() {
    let o = logbound(&["compare", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["chain_holds"], true);
    assert_eq!(v["points"], 500);
    let tight: u64 = v["rows"].as_array().unwrap().iter().map(|r| r["tightest_points"].as_u64().unwrap()).sum();
    assert_eq!(tight, 500);

    let o = logbound(&["radius", "--expr", "2*(t-1) + (t-1)^2", "--a", "0.5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("I,1,dr,"));
}

#[test]
fn uncertified_candidate_exits_one() {
    let o = logbound(&["certify", "--expr", "H(t) - (1/20)*(t-1)^5", "--no-radius"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("case: none"));
}

#[test]
fn paper_literal_flag_switches_constants() {
    let run = |extra: &[&str]| {
        let mut args = vec!["certify", "--expr", "H(t)", "--no-radius", "--format", "json"];
        args.extend_from_slice(extra);
        let v: serde_json::Value = serde_json::from_str(&stdout(&logbound(&args))).unwrap();
        v
    };
    let derived = run(&[]);
    let literal = run(&["--paper-literal"]);
    assert_eq!(derived["mode"], "derived");
    assert_eq!(literal["mode"], "paper-literal");
    for v in [&derived, &literal] {
        let q5 = &v["case_iii_constants"][0];
        assert_eq!(q5["j"], 5);
        assert_eq!(q5["derived"], "8e0");
        assert_eq!(q5["paper_literal"], "-1.2e1");
    }
}

#[test]
fn usage_and_domain_errors_exit_two() {
    for args in [
        &["bogus"][..],
        &["certify", "--expr", "H(t"][..],
        &["certify", "--expr", "t", "--a", "1.5"][..],
        &["table", "--points", "1"][..],
        &["--digits", "10", "table"][..],
        &["table", "--format", "xml"][..],
        &["sandwich", "check", "--p", "x", "--q", "x - 1", "--xmax", "3"][..],
    ] {
        let o = logbound(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    assert_eq!(logbound(&["--help"]).status.code(), Some(0));
    assert_eq!(logbound(&["--version"]).status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    let args = ["table", "--xmin", "-0.5", "--xmax", "4", "--points", "7", "--format", "json", "--digits", "40"];
    let a = logbound(&args);
    let b = logbound(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    // Left of zero only cb is defined.
    assert!(v[0]["sqrt"].is_null());
    assert!(v[0]["cb"].is_string());
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("atlas.csv");
    let o = logbound(&["table", "--points", "3", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let body = std::fs::read_to_string(&path).unwrap();
    assert_eq!(body.lines().count(), 4);
    // Only the report itself is left behind.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn run_entry_point_matches_binary() {
    assert_eq!(logbound::cli::run(["logbound", "table", "--points", "2", "--out", "/nonexistent/dir/x.csv"]), 2);
    assert_eq!(logbound::cli::run(["logbound", "--help"]), 0);
}
