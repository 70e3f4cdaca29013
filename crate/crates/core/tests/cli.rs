use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_smoothing-lab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn quickcheck_config() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/quickcheck.cfg");
    fs::read_to_string(path).unwrap()
}

#[test]
fn list_experiments_names_all_kinds() {
    let out = run(&["list-experiments"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let kinds = [
        "identity",
        "theorem-limit",
        "corollary-limit",
        "flux-limit",
        "sandwich",
        "remainder-decay",
        "asymptotics",
        "smoothing-bound",
    ];
    let headers: Vec<&str> = text.lines().filter(|l| !l.starts_with(' ')).collect();
    assert_eq!(headers, kinds);
    // every entry carries the relation it checks
    let relations: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("    ") && !l.trim_start().starts_with("tolerance:"))
        .collect();
    assert_eq!(relations.len(), 8);
    assert!(relations
        .iter()
        .all(|r| ['=', '≤', '≥', '→'].iter().any(|c| r.contains(*c))));
}

#[test]
fn quickcheck_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("quick.cfg");
    fs::write(&cfg, quickcheck_config()).unwrap();
    let mut csvs = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.path().join(sub);
        let out = run(&["run", cfg.to_str().unwrap(), "--output-dir", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(fs::read(out_dir.join("quickcheck.csv")).unwrap());
        assert!(fs::read_to_string(out_dir.join("summary.txt"))
            .unwrap()
            .starts_with("PASS quickcheck"));
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,n,datum_id,weight_id,schedule_param,lhs,rhs,abs_residual,rel_residual,extrapolated_limit,limit_error,pass"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "quickcheck");
    assert_eq!(row[4], "5.0000000000000000e-1");
    assert_eq!(row[11], "true");
    assert!(lines.next().is_none());
}

#[test]
fn relative_output_dir_resolves_next_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("quick.cfg");
    fs::write(&cfg, quickcheck_config()).unwrap();
    let out = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("quickcheck-out/quickcheck.csv").exists());
}

#[test]
fn negative_eps_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, quickcheck_config().replace("eps = 1.0", "eps = -1.0")).unwrap();
    let out = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("weights[0].eps"), "{err}");
}

#[test]
fn syntax_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "output_dir = \"x\"\n[[experiment]]\nkind = \"nonsense\"\n").unwrap();
    let out = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 3"));
}

#[test]
fn tolerance_failure_names_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.cfg");
    // A residual of exactly zero is not expected from floating-point quadrature.
    fs::write(
        &cfg,
        quickcheck_config().replace("tolerance = 1e-6", "tolerance = 1e-300"),
    )
    .unwrap();
    let out = run(&[
        "run",
        cfg.to_str().unwrap(),
        "--output-dir",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("FAIL quickcheck"), "{stdout}");
    assert!(stdout.contains("failing row 5.0000000000000000e-1"), "{stdout}");
}

#[test]
fn empty_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.cfg");
    fs::write(&cfg, "").unwrap();
    let out_dir = dir.path().join("o");
    let out = run(&["run", cfg.to_str().unwrap(), "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(out_dir.join("summary.txt")).unwrap(), "");
}

#[test]
fn emitted_default_config_parses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("default.cfg");
    let out = run(&["emit-default-config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let config = smoothing_lab::harness::Config::parse(&fs::read_to_string(&cfg).unwrap()).unwrap();
    let (_, experiments) = config.build().unwrap();
    assert_eq!(experiments.len(), 8);
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(BIN)
        .args(["run", "does-not-matter.cfg"])
        .env("SMOOTHING_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("SMOOTHING_LAB_THREADS"));
}
