use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use balanced_cli::output::{read_trace_column, ResultFile, TRACE_COLUMNS};

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(format!("{name}.toml"));
    let text = format!("{body}\n\n[output]\ntrace_csv = \"{name}/trace.csv\"\nresult_json = \"{name}/result.json\"\n");
    std::fs::write(&path, text).unwrap();
    path
}

fn balanced(args: &[&str], cfg: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_balanced")).args(args).arg(cfg).output().unwrap()
}

fn result(dir: &Path, name: &str) -> ResultFile {
    let text = std::fs::read_to_string(dir.join(name).join("result.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

const LINE: &str = "manifold = \"P1\"\nbundle = \"LineP1(2)\"\norder = 8\ndeterministic = true";

#[test]
fn converging_run_writes_trace_and_result() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "line", LINE);
    let out = balanced(&["run"], &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let res = result(dir.path(), "line");
    assert_eq!(res.classification, "Converged");
    assert_eq!(res.final_gram.len(), 9);
    assert_eq!(res.quadrature.order, 8);
    assert_eq!(res.quadrature.nodes, 8 * 17);
    assert!(res.bergman_sup_residual.unwrap() < 1e-6);

    let csv = std::fs::read_to_string(dir.path().join("line/trace.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), TRACE_COLUMNS.join(","));
    assert_eq!(csv.lines().count(), res.iterations + 1);
    let sample = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    let mantissa = sample.trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
}

#[test]
fn unstable_sum_exits_diverged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "sum", "manifold = \"P1\"\nbundle = \"Sum(1,3)\"\norder = 8");
    assert_eq!(balanced(&["run"], &cfg).status.code(), Some(3));
    assert_eq!(result(dir.path(), "sum").classification, "Diverged");
    let spread = read_trace_column(&dir.path().join("sum/trace.csv"), "spread").unwrap();
    assert!(*spread.last().unwrap() > 1e6);
}

#[test]
fn small_budget_exits_max_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{LINE}\nmax_iter = 3\n[init]\nkind = \"random\"\nseed = 1\namplitude = 0.5");
    let cfg = config(dir.path(), "short", &body);
    assert_eq!(balanced(&["run"], &cfg).status.code(), Some(2));
    let res = result(dir.path(), "short");
    assert_eq!(res.classification, "MaxIterations");
    assert_eq!(res.iterations, 3);
}

#[test]
fn restart_from_result_file_is_already_balanced() {
    let dir = tempfile::tempdir().unwrap();
    let first = config(dir.path(), "first", LINE);
    assert_eq!(balanced(&["run"], &first).status.code(), Some(0));
    let body = format!("{LINE}\n[init]\nkind = \"file\"\npath = \"first/result.json\"");
    let second = config(dir.path(), "second", &body);
    assert_eq!(balanced(&["run"], &second).status.code(), Some(0));
    assert!(result(dir.path(), "second").iterations <= 2);
}

#[test]
fn invalid_inputs_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "manifold = ").unwrap();
    let out = balanced(&["run"], &bad);
    assert_eq!(out.status.code(), Some(4));
    assert!(!out.stderr.is_empty());

    assert_eq!(balanced(&["run"], &dir.path().join("missing.toml")).status.code(), Some(4));
    let wrong = config(dir.path(), "wrong", "manifold = \"P2\"\nbundle = \"LineP1(2)\"\norder = 8");
    assert_eq!(balanced(&["run"], &wrong).status.code(), Some(4));
    let body = format!("{LINE}\n[init]\nkind = \"file\"\npath = \"nowhere.json\"");
    let missing_init = config(dir.path(), "noinit", &body);
    assert_eq!(balanced(&["verify"], &wrong).status.code(), Some(4));
    assert_eq!(balanced(&["run"], &missing_init).status.code(), Some(4));
}

#[test]
fn verify_passes_on_closed_form_case() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "p1", "manifold = \"P1\"\nbundle = \"LineP1(1)\"\norder = 4");
    let out = balanced(&["verify"], &cfg);
    let table = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{table}");
    assert_eq!(table.lines().filter(|l| l.ends_with("PASS")).count(), 7);
}

#[test]
fn verify_reports_rank_and_trace_residual() {
    let rows = |body: &str| {
        let mut cfg = balanced_cli::RunConfig::from_toml(&format!(
            "{body}\n[output]\ntrace_csv = \"t.csv\"\nresult_json = \"r.json\""
        ))
        .unwrap();
        cfg.deterministic = true;
        balanced_cli::verify_config(&cfg).unwrap()
    };
    let sum = rows("manifold = \"P1\"\nbundle = \"Sum(1,1)\"\norder = 4");
    let rank = sum.iter().find(|r| r.name == "gieseker rank").unwrap();
    assert!(rank.passed);
    assert_eq!(rank.value, 3.0);

    let tangent = rows("manifold = \"P2\"\nbundle = \"TangentP2\"\norder = 3");
    let trace = tangent.iter().find(|r| r.name == "trace identity").unwrap();
    assert!(trace.passed, "{trace}");
    assert!(tangent.iter().all(|r| r.passed));
}
