use std::path::Path;
use std::process::{Command, Output};

fn zeno(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeno"))
        .args(args)
        .env_remove("ZENO_THREADS")
        .output()
        .expect("zeno runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const SMALL_GRID: &str = "0.05,2,12,log";

#[test]
fn run_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig3a.csv");
    let o = zeno(&[
        "run",
        "--preset",
        "fig3a",
        "--grid",
        SMALL_GRID,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("model,kind,M,tau,survival,gamma_rate"));
    assert_eq!(csv.lines().count(), 1 + 4 * 12);
    assert!(csv
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("large_spin,selective,1,5.0000000000000003e-2,"));

    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig3a.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["config"]["bath.coupling"], "0.1");
    assert_eq!(sidecar["config"]["grid.count"], "12");
    let curves = sidecar["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 4);
    assert_eq!(curves[1]["kind"], "nonselective");
    assert!(!curves[0]["regimes"]["segments"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn sidecar_reproduces_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let o = zeno(&[
        "run",
        "--preset",
        "fig2b",
        "--grid",
        SMALL_GRID,
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sidecar = dir.path().join("a.json");
    let second = dir.path().join("b.csv");
    let o = zeno(&[
        "run",
        "--config",
        sidecar.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
    assert_eq!(
        std::fs::read(&sidecar).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
}

#[test]
fn csv_goes_to_stdout_without_out() {
    let o = zeno(&["run", "--preset", "fig1a", "--grid", "0.1,1,3,linear"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 4 * 3);
    assert!(!text.contains('\r'));
}

#[test]
fn json_format_includes_samples() {
    let o = zeno(&[
        "run",
        "--preset",
        "fig1b",
        "--grid",
        "0.1,1,4,log",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["config"]["output.format"], "json");
    assert_eq!(doc["curves"][3]["samples"].as_array().unwrap().len(), 4);
    assert_eq!(doc["curves"][3]["M"], 10);
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_zeno"))
            .args(["run", "--preset", "fig2a", "--grid", SMALL_GRID])
            .env("ZENO_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn presets_lists_all_seven() {
    let o = zeno(&["presets"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let ids: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with(' '))
        .map(|l| l.split(':').next().unwrap())
        .collect();
    assert_eq!(
        ids,
        [
            "fig1a",
            "fig1b",
            "fig2a",
            "fig2a_inset",
            "fig2b",
            "fig3a",
            "fig3b"
        ]
    );
    assert!(text.contains("spin_bath.bath_coupling=0.001"));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn validate_accepts_presets() {
    let o = zeno(&["validate", "fig2a_inset"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "ok");
    let o = zeno(&[
        "validate",
        concat!(env!("CARGO_MANIFEST_DIR"), "/presets/fig3b.cfg"),
    ]);
    assert_eq!(stdout(&o).trim(), "ok");
}

#[test]
fn validate_rejects_out_of_range_angle() {
    let dir = tempfile::tempdir().unwrap();
    let text = include_str!("../presets/fig1a.cfg").replace("1.5707963267948966", "4.0");
    let path = write(dir.path(), "bad.cfg", &text);
    let o = zeno(&["validate", &path]);
    assert_eq!(o.status.code(), Some(2));
    let diag: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(diag["key"], "single_spin.theta");
    assert_eq!(diag["kind"], "config");
    assert!(diag["line"].as_u64().is_some());
    // `run` refuses the same file before computing anything.
    let o = zeno(&["run", "--config", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("single_spin.theta"));
}

#[test]
fn validate_rejects_large_non_uniform_bath() {
    let dir = tempfile::tempdir().unwrap();
    let couplings: Vec<String> = (0..20)
        .map(|i| format!("{}", 0.01 * (i + 1) as f64))
        .collect();
    let text = format!(
        "model = spin_bath\nspin_bath.epsilon = 1\nspin_bath.delta = 2\nspin_bath.beta = 10\n\
         spin_bath.bath_energies = {}\nspin_bath.bath_couplings = {}\nprotocols = selective, 3\n\
         grid.tau_min = 0.5\ngrid.tau_max = 3\ngrid.count = 20\n",
        vec!["1"; 20].join(", "),
        couplings.join(", ")
    );
    let path = write(dir.path(), "n20.cfg", &text);
    let o = zeno(&["validate", &path]);
    assert_eq!(o.status.code(), Some(2));
    let diag: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(diag["kind"], "capacity");
    assert!(diag["message"].as_str().unwrap().contains("N <= 14"));
}

#[test]
fn unknown_key_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{}bath.temperature = 3\n",
        include_str!("../presets/fig1a.cfg")
    );
    let path = write(dir.path(), "x.cfg", &text);
    let o = zeno(&["validate", &path]);
    assert_eq!(o.status.code(), Some(2));
    let diag: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(diag["key"], "bath.temperature");
    assert_eq!(diag["line"].as_u64(), Some(text.lines().count() as u64));
}

#[test]
fn numerical_failure_exits_3_with_tau() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        include_str!("../presets/fig1a.cfg").replace("bath.cutoff = 10", "bath.cutoff = 1e9");
    let path = write(dir.path(), "wide.cfg", &text);
    assert!(zeno(&["validate", &path]).status.success());
    let o = zeno(&["run", "--config", &path, "--grid", "0.5,1,3,linear"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("tau = 0.5"), "{}", stderr(&o));
}

#[test]
fn usage_errors() {
    assert_eq!(zeno(&["run"]).status.code(), Some(2));
    assert_eq!(zeno(&["run", "--preset", "fig9"]).status.code(), Some(2));
    assert_eq!(
        zeno(&["run", "--preset", "fig1a", "--grid", "1,2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        zeno(&["run", "--preset", "fig1a", "--grid", "2,1,5,log"])
            .status
            .code(),
        Some(2)
    );
}
