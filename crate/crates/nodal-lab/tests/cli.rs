//! End-to-end tests of the command-line interface: exit codes, output
//! formats, metadata lines, and byte-level determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal-lab"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

#[test]
fn solve_prints_feature_tables() {
    let out = run(&["solve", "--n", "3", "--eps", "0.1", "--m", "2", "--bc", "dirichlet"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("delta_1"));
    assert!(text.contains("delta_2"));
    assert!(text.contains("rho_1"));
    assert!(text.contains("rho_2"));
    assert!(text.contains("bc=dirichlet"));
}

#[test]
fn solve_rejects_out_of_range_eps() {
    let out = run(&["solve", "--n", "3", "--eps", "5", "--m", "1", "--bc", "dirichlet"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("eps"));
}

#[test]
fn solve_rejects_one_region_neumann() {
    let out = run(&["solve", "--n", "3", "--eps", "0.1", "--m", "1", "--bc", "neumann"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_rejects_whole_space() {
    let out = run(&["solve", "--n", "3", "--eps", "0.1", "--m", "1", "--bc", "whole-space"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_json_output_is_deterministic() {
    let args = ["solve", "--n", "4", "--eps", "0.1", "--m", "2", "--bc", "neumann", "--format", "json"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert!(stdout_of(&first).contains("\"bc\": \"neumann\""));
}

#[test]
fn solve_csv_carries_metadata_and_samples() {
    let out = run(&[
        "solve", "--n", "3", "--eps", "0.1", "--m", "1", "--bc", "dirichlet", "--format", "csv",
        "--samples", "11",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("# generator: nodal-lab v"));
    assert!(text.contains("# bc: dirichlet"));
    assert!(text.contains("x,u,du"));
    // 11 sample rows follow the header line.
    let header_at = text.find("x,u,du").unwrap();
    let rows = text[header_at..].lines().skip(1).filter(|l| !l.is_empty()).count();
    assert_eq!(rows, 11);
}

#[test]
fn sweep_csv_tracks_the_boundary_slope_limit() {
    let out = run(&[
        "sweep", "--n", "4", "--m", "2", "--bc", "neumann", "--quantity", "zero_slope:1",
        "--eps-start", "0.2", "--eps-count", "5", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("# quantity: zero_slope:1"));
    assert!(text.contains("eps,raw,scaled,extrapolant"));
    let last = text.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    assert_eq!(fields.len(), 4);
    let scaled: f64 = fields[2].parse().unwrap();
    let target = 4.0 * 2.0_f64.sqrt();
    assert!((scaled - target).abs() / target < 0.15, "scaled {scaled} far from {target}");
    // The running extrapolant column is empty until three rows exist.
    let header_at = text.find("eps,raw").unwrap();
    let data: Vec<&str> = text[header_at..].lines().skip(1).collect();
    assert!(data[0].ends_with(','));
    assert!(data[1].ends_with(','));
    assert!(!data[4].ends_with(','));
}

#[test]
fn sweep_rejects_bad_quantity_names() {
    let out = run(&["sweep", "--n", "3", "--m", "1", "--bc", "dirichlet", "--quantity", "bogus:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_rejects_family_mismatched_quantity() {
    let out = run(&["sweep", "--n", "3", "--m", "1", "--bc", "dirichlet", "--quantity", "ws_zero:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_theorem_reports_pass_lines() {
    let out = run(&["verify", "--n", "3", "--m", "1", "--bc", "dirichlet"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
    assert!(text.contains("crit_value:1"));
    assert!(text.contains("zero_slope:1"));
    assert!(text.contains("2/2 quantities within tolerance"));
}

#[test]
fn verify_theorem_requires_problem_flags() {
    let out = run(&["verify", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_constants_cross_validates_routes() {
    let out = run(&["verify", "--constants", "--n-max", "5", "--m-max", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    // 3 dimensions x 5 tower sizes, every line green.
    assert_eq!(text.matches("PASS").count(), 15);
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_constants_rejects_problem_flags() {
    let out = run(&["verify", "--constants", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_rejects_combined_modes() {
    let out = run(&["verify", "--constants", "--identities"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_identities_checks_both_boundary_conditions() {
    let out = run(&["verify", "--identities", "--n", "3", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("dirichlet"));
    assert!(text.contains("neumann"));
    assert_eq!(text.matches("PASS").count(), 4);
}

#[test]
fn constants_csv_lists_known_values() {
    let out = run(&["constants", "--n", "3", "--m", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    // kappa_3 = pi/32.
    assert!(text.contains("kappa_n,9.8174770424681"));
    assert!(text.contains("dirichlet crit_radius:1,2.0000000000000000e0"));
    assert!(text.contains("neumann crit_radius:1,1.0000000000000000e0"));
    assert!(text.contains("alpha:0,"));
    assert!(text.contains("beta:2,"));
    assert!(text.contains("whole-space zero_radius,"));
}

#[test]
fn bubbles_ball_csv_has_remainder_columns() {
    let out = run(&[
        "bubbles", "--n", "3", "--m", "2", "--bc", "dirichlet", "--eps", "0.1", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("# remainder_sup:"));
    assert!(text.contains("# compact_target:"));
    assert!(text.contains("r,u_numeric,tower,remainder"));
}

#[test]
fn bubbles_whole_space_reports_tail_bound() {
    let out = run(&["bubbles", "--n", "3", "--m", "2", "--bc", "whole-space", "--eps", "0.05"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("scaled_difference"));
    assert!(text.contains("tail sup"));
}

#[test]
fn out_flag_writes_artifact_and_prints_summary() {
    let dir = std::env::temp_dir().join("nodal-lab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("record.json");
    let out = run(&[
        "solve", "--n", "3", "--eps", "0.1", "--m", "1", "--bc", "dirichlet", "--format", "json",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("delta_1"), "summary still prints to stdout");
    assert!(text.contains("artifact written to"));
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.contains("\"bc\": \"dirichlet\""));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}
