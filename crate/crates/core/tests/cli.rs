use std::path::Path;
use std::process::{Command, Output};

use polarsolve::cli::read_sweep_csv;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarsolve"))
        .args(args)
        .env_remove("POLARSOLVE_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("solve prints JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_baseline_matches_closed_form() {
    let o = run(&[
        "solve",
        "--V",
        "1",
        "--w",
        "0",
        "--sigma-i",
        "1",
        "--sigma-v",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert!((v["delta"].as_f64().unwrap() - 0.46163455685438315).abs() < 1e-10);
    assert_eq!(v["certified"], true);
    assert_eq!(v["kind"], "symmetric");
}

#[test]
fn solve_frontrunner_on_locus_is_symmetric() {
    let o = run(&["solve", "--mu-i", "1", "--mu-v", "-1", "--w", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&o)["symmetric"], true);
    let o = run(&["solve", "--mu-i", "1", "--mu-v", "-1", "--w", "2"]);
    let v = json(&o);
    assert_eq!(v["symmetric"], false);
    assert_eq!(v["kind"], "asymmetric");
}

#[test]
fn solve_low_valence_noise_warns() {
    let o = run(&["solve", "--sigma-v", "0.05"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(
        err.lines()
            .any(|l| l.starts_with("warning: sigma_v = 0.05")),
        "{err}"
    );
    assert!(err.contains("grid pre-scan"));
    assert_eq!(json(&o)["single_peak_warning"], true);
}

#[test]
fn config_precedence_three_layers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"params": {"w": 0.7, "V": 2.0, "mu_i": 0.75, "mu_v": -0.35}, "seed": 5}"#,
    )
    .unwrap();
    // Flag beats file for V; file beats default for w and the means; sigma_v stays default.
    let o = run(&["solve", "--config", path_str(&cfg), "--V", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p = &json(&o)["params"];
    assert_eq!(p["V"], 3.0);
    assert_eq!(p["w"], 0.7);
    assert_eq!(p["mu_i"], 0.75);
    assert_eq!(p["mu_v"], -0.35);
    assert_eq!(p["sigma_v"], 1.0);
    assert_eq!(json(&o)["oracle"]["seed"], 5);
}

#[test]
fn invalid_parameters_exit_two() {
    let o = run(&["solve", "--sigma-v", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error[invalid-params]: "));
}

#[test]
fn non_convergence_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.json");
    std::fs::write(&cfg, r#"{"solver": {"max_iter": 2}}"#).unwrap();
    let o = run(&[
        "solve",
        "--config",
        path_str(&cfg),
        "--mu-i",
        "1",
        "--mu-v",
        "-1",
        "--w",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[non-convergence]: "));
}

#[test]
fn bad_config_and_usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"params": {"omega": 1}}"#).unwrap();
    let o = run(&["solve", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]: "));

    let o = run(&["solve", "--w", "abc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[usage]: "));
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn sweep_writes_roundtrippable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = run(&[
        "sweep",
        "--w-min",
        "0",
        "--w-max",
        "2",
        "--w-steps",
        "21",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(
        text.starts_with("w,p_L,p_R,delta,pr_L,dpL_dw_analytic,dpL_dw_fd,soc_L,soc_R,certified\n")
    );
    let rows = read_sweep_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r.certified));
    assert!((rows[0].delta - 0.46163455685438315).abs() < 1e-10);
}

#[test]
fn sweep_limit_ordering_across_sigma_i() {
    let last_delta = |sigma_i: &str| {
        let o = run(&[
            "sweep",
            "--sigma-i",
            sigma_i,
            "--w-min",
            "1000",
            "--w-max",
            "2000",
            "--w-steps",
            "2",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        read_sweep_csv(o.stdout.as_slice()).unwrap()[1].delta
    };
    let (low, high) = (last_delta("0.5"), last_delta("2"));
    assert!((low - 0.5562092371233439).abs() < 1e-3);
    assert!((high - 0.8337007590133954).abs() < 1e-3);
    assert!(low < high);
}

#[test]
fn asymmetric_sweep_crosses_at_one() {
    let o = run(&[
        "sweep",
        "--mode",
        "asymmetric",
        "--mu-i",
        "1",
        "--mu-v",
        "-1",
        "--w-min",
        "0",
        "--w-max",
        "3",
        "--w-steps",
        "31",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_sweep_csv(o.stdout.as_slice()).unwrap();
    let sums: Vec<f64> = rows.iter().map(|r| r.p_l + r.p_r - 1.0).collect();
    let k = sums
        .windows(2)
        .position(|s| s[0] < 0.0 && s[1] >= 0.0)
        .unwrap();
    assert!((rows[k + 1].w - 1.0).abs() <= 0.1 + 1e-12);
    assert!(rows.iter().all(|r| r.dpl_dw_analytic.is_nan()));
}

#[test]
fn sweep_output_independent_of_thread_count() {
    let args = ["sweep", "--w-steps", "31"];
    let one = Command::new(env!("CARGO_BIN_EXE_polarsolve"))
        .args(args)
        .env("POLARSOLVE_THREADS", "1")
        .output()
        .unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_polarsolve"))
        .args(args)
        .env("POLARSOLVE_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);

    let bad = Command::new(env!("CARGO_BIN_EXE_polarsolve"))
        .args(args)
        .env("POLARSOLVE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).starts_with("error[invalid-env]: "));
}

#[test]
fn sweep_mostly_failed_rows_exit_nonzero() {
    // Symmetric mode with mu_i != 1/2 is on the locus at a single w only.
    let o = run(&[
        "sweep",
        "--mu-i",
        "1",
        "--mu-v",
        "-1",
        "--w-min",
        "0.5",
        "--w-max",
        "1.5",
        "--w-steps",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let rows = read_sweep_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.iter().filter(|r| r.certified).count(), 1);
    assert!(stderr(&o).contains("error[off-locus]"));
}

#[test]
fn locus_lines_and_verification() {
    let o = run(&["locus"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("10/10 subsample points confirmed"));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("w,mu_i,mu_v"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 63);
    for r in &rows {
        assert_eq!(r[2], r[0] * (1.0 - 2.0 * r[1]));
        if r[1] == 0.5 {
            assert_eq!(r[2], 0.0);
        }
    }
}

#[test]
fn verify_single_check_and_unknown_id() {
    let o = run(&["verify", "--only", "prop3-limit"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("PASS prop3-limit "));
    assert!(text.contains("verify: 1/1 checks passed"));

    let o = run(&["verify", "--only", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[unknown-check]: "));
}

#[test]
fn verify_monte_carlo_reproducible_per_seed() {
    let a = run(&["verify", "--only", "oracle-mc", "--seed", "7"]);
    let b = run(&["verify", "--only", "oracle-mc", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn empirical_fixture_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("scores.csv");
    std::fs::write(
        &input,
        "year,party,score\n2004,L,-0.5\n2004,L,-0.25\n2004,R,0.5\n2004,R,1.0\n2000,L,-0.4\n2000,R,0.5\n1996,R,0.3\n",
    )
    .unwrap();
    let o = run(&["empirical", path_str(&input)]);
    assert!(o.status.success(), "{}", stderr(&o));
    // 2004: mean R 0.75, mean L -0.375.
    assert_eq!(
        String::from_utf8_lossy(&o.stdout),
        "year,polarization\n2000,0.9\n2004,1.125\n"
    );
    assert!(stderr(&o).contains("year 1996 has no L member"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "year,party,value\n2000,L,0.1\n").unwrap();
    let o = run(&["empirical", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        stderr(&o).trim_end(),
        "error[missing-column]: input lacks column `score`"
    );
}
