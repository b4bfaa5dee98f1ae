use std::path::Path;
use std::process::Command;

use etpa_cli::manifest::{verify, Manifest, MANIFEST_NAME};

fn etpa(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_etpa")).args(args).current_dir(dir).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn leading(path: &Path, n: usize) -> Vec<usize> {
    let mut rows: Vec<(usize, f64)> =
        read_rows(path).iter().map(|r| (r[0].parse::<f64>().unwrap() as usize, r[1].parse().unwrap())).collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1));
    rows.iter().take(n).map(|r| r.0).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn populations_order_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", "alphas = [12, 16, 17]\ntrace_points = 60\n[field]\nsigma_s = [0.5]\n");
    let (code, err) = etpa(tmp.path(), &["populations", "--config", &cfg, "--out", "pop"]);
    assert_eq!(code, 0, "{err}");
    let out = tmp.path().join("pop");
    assert_eq!(leading(&out.join("steady_uncorrelated.csv"), 1), vec![12]);
    let mut lead = leading(&out.join("steady_ss0.5.csv"), 2);
    lead.sort();
    assert_eq!(lead, vec![16, 17]);
    assert!(out.join("populations_ss0.5_analytic.svg").exists());

    let text = std::fs::read_to_string(out.join(MANIFEST_NAME)).unwrap();
    let m: Manifest = toml::from_str(&text).unwrap();
    let listed = m.files.len();
    let on_disk = std::fs::read_dir(&out).unwrap().count() - 1;
    assert_eq!(listed, on_disk);
    assert!(verify(&out).unwrap().is_empty());
    std::fs::write(out.join("steady_uncorrelated.csv"), "tampered").unwrap();
    assert_eq!(verify(&out).unwrap(), vec!["steady_uncorrelated.csv".to_string()]);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let (code, err) = etpa(tmp.path(), &["theta", "--sigma-s", "uncorrelated,1", "--out", out]);
        assert_eq!(code, 0, "{err}");
    }
    for name in ["theta_summary.csv", "theta_uncorrelated_a18.csv", "theta_ss1_a36.svg"] {
        let a = std::fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn theta_summary_matches_expectations() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, err) = etpa(tmp.path(), &["theta", "--sigma-s", "uncorrelated,1,0.5", "--out", "t"]);
    assert_eq!(code, 0, "{err}");
    let rows = read_rows(&tmp.path().join("t/theta_summary.csv"));
    let get = |mode: &str, target: &str| rows.iter().find(|r| r[0] == mode && r[1] == target).unwrap().clone();
    assert_eq!(get("uncorrelated", "18")[2], "12");
    assert_eq!(get("ss1", "18")[2], "14");
    for mode in ["uncorrelated", "ss1", "ss0.5"] {
        let n7: usize = get(mode, "7")[5].parse().unwrap();
        let n36: usize = get(mode, "36")[5].parse().unwrap();
        assert!(n36 < n7, "{mode}: {n36} vs {n7}");
    }
}

#[test]
fn selectivity_single_target() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "one.toml", "targets = [18]\n");
    let (code, err) = etpa(tmp.path(), &["selectivity", "--config", &cfg, "--out", "s"]);
    assert_eq!(code, 0, "{err}");
    let rows = read_rows(&tmp.path().join("s/selectivity.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].len(), 7);
    // one target, but ξ compares it against every level, not just the scanned ones
    let xi: Vec<f64> = rows[0][1..].iter().map(|v| v.parse().unwrap()).collect();
    assert!(xi.iter().all(|v| *v > 0.0 && *v <= 1.0));
    assert!(xi[5] > 0.99);
}

#[test]
fn steady_vs_k_fits_and_degenerate_case() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, err) = etpa(tmp.path(), &["steady-vs-k", "--out", "k"]);
    assert_eq!(code, 0, "{err}");
    let fits = read_rows(&tmp.path().join("k/fit_report.csv"));
    let r2: f64 = fits.iter().find(|r| r[0] == "K linear").unwrap()[4].parse().unwrap();
    assert!(r2 > 0.99);

    let (code, err) = etpa(tmp.path(), &["steady-vs-k", "--sigma-s", "0.5", "--out", "k1"]);
    assert_eq!(code, 0, "{err}");
    assert!(tmp.path().join("k1/steady_vs_entanglement.csv").exists());
    assert!(!tmp.path().join("k1/fit_report.csv").exists());
}

#[test]
fn cross_check_bound_sets_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let base = "alphas = [14]\ntrace_points = 40\n[field]\nsigma_s = [1.0]\nuncorrelated = false\n";
    let tight = write(tmp.path(), "tight.toml", &format!("cross_check_bound = 1e-9\n{base}"));
    let loose = write(tmp.path(), "loose.toml", &format!("cross_check_bound = 0.05\n{base}"));
    let args = |c: &str, o: &str| {
        vec!["populations".to_string(), "--config".into(), c.into(), "--engine".into(), "both".into(), "--desk-scale".into(), "--out".into(), o.into()]
    };
    let (code, err) = etpa(tmp.path(), &args(&tight, "x").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code, 4, "{err}");
    assert!(tmp.path().join("x/errors_ss1.csv").exists());
    let (code, err) = etpa(tmp.path(), &args(&loose, "y").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code, 0, "{err}");
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(etpa(tmp.path(), &["theta", "--sigma-s", ""]).0, 2);
    assert_eq!(etpa(tmp.path(), &["theta", "--freq-convention", "rad"]).0, 2);
    assert_eq!(etpa(tmp.path(), &["theta", "--target", "99", "--out", "t"]).0, 2);
    let bad = write(tmp.path(), "bad.toml", "engine = \"quantum\"\n");
    assert_eq!(etpa(tmp.path(), &["schmidt", "--config", &bad]).0, 2);
    assert_eq!(etpa(tmp.path(), &["schmidt", "--config", "missing.toml"]).0, 3);
}

#[test]
fn reproduce_all_small() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "small.toml",
        "alphas = [12]\ntrace_points = 30\ntargets = [6, 7]\ntheta_targets = [18]\nbenchmark_modes = [161, 201]\n[field]\nsigma_s = [1.0, 0.5, 0.25]\n",
    );
    let (code, err) = etpa(tmp.path(), &["reproduce-all", "--config", &cfg, "--out", "all"]);
    assert_eq!(code, 0, "{err}");
    let root = tmp.path().join("all");
    for sub in ["populations", "selectivity", "schmidt", "theta", "steady_vs_k", "benchmark"] {
        assert!(verify(&root.join(sub)).unwrap().is_empty(), "{sub}");
    }
    assert!(verify(&root).unwrap().is_empty());
    let bench = read_rows(&root.join("benchmark/benchmark.csv"));
    assert_eq!(bench.len(), 4);
    // the binary installs the counting allocator
    assert!(bench.iter().all(|r| r[4].parse::<u64>().unwrap() > 0));
}
