use std::fs;
use std::path::Path;
use std::process::Command;

fn nlkpp(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_nlkpp")).args(args).output().expect("binary runs");
    out.status.code().expect("exit code")
}

fn csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn neutral_curve_ends_on_the_axis() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("n");
    assert_eq!(nlkpp(&["neutral", "--eps-bar", "0.01", "--out", out.to_str().unwrap()]), 0);
    let rows = csv(&out.join("curve.csv"));
    let (first, last) = (rows.first().unwrap(), rows.last().unwrap());
    assert_eq!(first[1], 0.0);
    assert_eq!(last[1], 0.0);
    assert!(rows.iter().all(|r| r[1] >= 0.0));
    assert_eq!(manifest(&out)["status"], "ok");
}

#[test]
fn inadmissible_kernel_and_unknown_keys_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    assert_eq!(nlkpp(&["neutral", "--eps-bar", "2", "--out", out.to_str().unwrap()]), 1);
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "eps_bar = 0.01\nlamda = 0.9\n").unwrap();
    assert_eq!(nlkpp(&["lambda0", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 1);
    assert!(!out.join("manifest.json").exists());
    assert_eq!(nlkpp(&["no-such-command"]), 1);
    assert_eq!(nlkpp(&["dmin", "--lambda", "0.9", "--grid", "128", "--out", out.to_str().unwrap()]), 1);
}

#[test]
fn config_file_values_are_used_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# reduced map\nsign = +\npoints = 6\ndbar-min = 1e-4\n").unwrap();
    let out = tmp.path().join("m");
    let args = ["reduced-map", "--config", cfg.to_str().unwrap(), "--points", "5", "--out", out.to_str().unwrap()];
    assert_eq!(nlkpp(&args), 0);
    let m = manifest(&out);
    assert_eq!(m["config"]["points"], "5");
    assert_eq!(m["config"]["dbar_min"], "0.0001");
    let rows = csv(&out.join("ac_curve.csv"));
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
    let last = rows.last().unwrap();
    assert!(last[1] > 0.24 && last[1] < 0.25, "{last:?}");
}

#[test]
fn solver_failures_exit_two_with_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("minus");
    assert_eq!(nlkpp(&["reduced-map", "--sign", "-", "--points", "4", "--out", out.to_str().unwrap()]), 2);
    let status = manifest(&out)["status"].as_str().unwrap().to_string();
    assert!(status.starts_with("error"), "{status}");
}

#[test]
fn identical_runs_write_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let args = ["bifurcate", "--lambda", "0.95", "--eps-bar", "0.01", "--grid", "256", "--families", "1"];
        let mut all: Vec<&str> = args.to_vec();
        all.extend(["--max-points", "15", "--spectrum", "off", "--out", out.to_str().unwrap()]);
        assert_eq!(nlkpp(&all), 0);
        out
    };
    let (a, b) = (run("a"), run("b"));
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "branch_1peak.csv"));
    for n in names.iter().filter(|n| *n != "manifest.json") {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n:?} differs");
    }
}

#[test]
fn file_outputs_get_a_sibling_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fixed.json");
    assert_eq!(nlkpp(&["reduced", "--sign", "+", "--a", "0.1", "--dbar", "1e-3", "--out", out.to_str().unwrap()]), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["residual"].as_f64().unwrap().abs() < 1e-8);
    assert!(tmp.path().join("fixed.manifest.json").exists());
}
