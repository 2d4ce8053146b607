use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use qsource::cli::{ScenarioKind, Table};

fn qsource(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsource")).args(args).output().unwrap()
}

fn run_config(dir: &Path, name: &str, text: &str) -> Output {
    let cfg = dir.join(format!("{name}.toml"));
    std::fs::write(&cfg, text).unwrap();
    let out = dir.join("out");
    qsource(&["--out", out.to_str().unwrap(), "run", cfg.to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn free_point_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let o = run_config(dir.path(), "smoke", "scenario = \"free_point\"\n");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(start.elapsed().as_secs_f64() < 10.0);
    let t = Table::read(&dir.path().join("out/free_point.csv")).unwrap();
    assert_eq!(t.columns, ["x", "y", "z", "re_psi", "im_psi", "jx", "jy", "jz", "abs_j"]);
    assert_eq!(t.meta_value("scenario"), Some("free_point"));
    assert!(t.rows.iter().all(|r| r.iter().all(|v| v.is_finite())));
}

#[test]
fn csv_round_trips_through_the_reader() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "custom", "scenario = \"custom\"\n");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let path = dir.path().join("out/custom.csv");
    let t = Table::read(&path).unwrap();
    let again = dir.path().join("again.csv");
    t.write(&again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    assert_eq!(Table::read(&again).unwrap(), t);
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("units", "scenario = \"free_point\"\n[source]\nenergy = \"1 eV\"\n", "source.energy"),
        ("scenario", "scenario = \"nope\"\n", "scenario"),
        ("typo", "scenario = \"free_point\"\n[source]\nenergyy = 1\n", "energyy"),
        ("shape", "scenario = \"free_point\"\n[grid]\nshape = [65, 1]\n", "shape"),
    ];
    for (name, text, key) in cases {
        let o = run_config(dir.path(), name, text);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(stderr(&o).contains(key), "{name}: {}", stderr(&o));
    }
    let o = qsource(&["run", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(qsource(&["--threads", "0", "selftest"]).status.code(), Some(2));
    assert_eq!(qsource(&["bogus"]).status.code(), Some(2));
}

#[test]
fn compute_failure_exits_1() {
    // a grid node sits on the point source
    let dir = tempfile::tempdir().unwrap();
    let text = "scenario = \"free_point\"\n[grid]\nlo = [-1, 0, -1]\nhi = [1, 0, 1]\nshape = [5, 1, 5]\n";
    let o = run_config(dir.path(), "standoff", text);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("standoff"));
}

#[test]
fn list_and_selftest() {
    let o = qsource(&["list-scenarios"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for kind in ScenarioKind::ALL {
        assert!(text.contains(kind.name()));
    }
    let o = qsource(&["selftest"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = String::from_utf8_lossy(&o.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.last().unwrap()["failed"], 0);
    assert!(lines[..lines.len() - 1].iter().all(|c| c["pass"] == true));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for kind in ScenarioKind::ALL {
        let path = dir.join(format!("{}.toml", kind.name()));
        let s = qsource::cli::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(s.kind, kind);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), kind.default_toml());
    }
}
