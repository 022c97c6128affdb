use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_standardness");

fn run(kind: &str, config: &Path, out: &Path, threads: &str) -> Output {
    Command::new(BIN)
        .args([kind, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--threads", threads])
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn gamma_markov1_emits_half() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "g.json",
        r#"{"kernel": {"variant": "markov", "order": 1, "table": {"0": 0.7, "1": 0.4}}, "p_max": 4}"#,
    );
    let out = tmp.path().join("out");
    let o = run("gamma", &cfg, &out, "2");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let gamma = fs::read_to_string(out.join("gamma.csv")).unwrap();
    let mut lines = gamma.lines();
    assert_eq!(lines.next(), Some("p,gamma_p,certified"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 5);
    assert!((rows[0][1].parse::<f64>().unwrap() - 0.5).abs() < 1e-15);
    assert!(rows[1..].iter().all(|r| r[1].parse::<f64>().unwrap() == 0.0));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["pass"], true);
    assert_eq!(manifest["experiment"], "gamma");
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = [
        ("reconstruct", r#"{"kernel": {"variant": "builtin", "name": "markov1-demo"}, "k": 2, "n_list": [-5, -10], "trials": 20000, "m_max": 6, "seed": 7}"#),
        ("stitch", r#"{"kernel": {"variant": "builtin", "name": "markov1-demo"}, "depth": 4, "deltas": [0.2, 0.1], "trials": 2000, "seed": 7}"#),
        ("vershik", r#"{"kernel": {"variant": "builtin", "name": "long-memory-demo"}, "depth": 3, "p_max": 4, "pairs": 5000, "seed": 7}"#),
    ];
    for (kind, text) in configs {
        let cfg = write(tmp.path(), &format!("{kind}.json"), text);
        let dirs: Vec<_> = ["1", "3", "3"]
            .iter()
            .enumerate()
            .map(|(i, threads)| {
                let d = tmp.path().join(format!("{kind}-{i}"));
                let o = run(kind, &cfg, &d, threads);
                assert_eq!(o.status.code(), Some(0), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
                d
            })
            .collect();
        let mut names: Vec<_> = fs::read_dir(&dirs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.len() >= 2);
        for name in &names {
            let first = fs::read(dirs[0].join(name)).unwrap();
            for d in &dirs[1..] {
                assert_eq!(first, fs::read(d.join(name)).unwrap(), "{kind}: {name:?} differs");
            }
        }
    }
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "a.json", r#"{"kernel": {"variant": "builtin", "name": "markov1-demo"}, "samples": 100000, "seed": 1}"#);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run("audit", &cfg, &a, "1");
    let o = Command::new(BIN).args(["audit", "--seed", "2", "--config"]).arg(&cfg).arg("--out").arg(&b).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(fs::read(a.join("audit.csv")).unwrap(), fs::read(b.join("audit.csv")).unwrap());
}

#[test]
fn config_errors_exit_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"kernel": {"variant": "hidden_markov", "p0": 0.5}, "p_max": 3}"#,
        "{\n  \"kernel\": {\"variant\": \"iid\", \"p0\": 0.5},\n  \"p_max\": 3,\n  \"tirals\": 9\n}",
        r#"{"kernel": {"variant": "iid", "p0": 1.0}, "p_max": 3}"#,
        r#"{"kernel": {"variant": "iid", "p0": 0.5}}"#,
        r#"{"kernel": {"variant": "iid", "p0": 0.5}, "p_max": 3, "experiment": "stitch"}"#,
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = write(tmp.path(), &format!("bad{i}.json"), text);
        let out = tmp.path().join(format!("out{i}"));
        let o = run("gamma", &cfg, &out, "1");
        assert_eq!(o.status.code(), Some(2), "case {i}");
        assert!(!out.exists(), "case {i} left output behind");
        assert!(String::from_utf8_lossy(&o.stderr).contains("config error"), "case {i}");
    }
    let cfg = write(tmp.path(), "bad1b.json", cases[1]);
    let o = run("gamma", &cfg, &tmp.path().join("x"), "1");
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn failed_verdict_exits_1_and_names_the_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "strict.json",
        r#"{"kernel": {"variant": "builtin", "name": "markov1-demo"}, "samples": 5000,
            "audit": {"ks_distance": 1e-9, "lag1_correlation": 0.5, "chi_square_pvalue": 0.0}}"#,
    );
    let out = tmp.path().join("out");
    let o = run("audit", &cfg, &out, "1");
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("statistic=ks_distance"), "{err}");
    assert!(out.join("audit.csv").exists());
}

#[test]
fn shipped_configs_pass() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    for kind in ["gamma", "audit", "reconstruct", "vershik", "extend", "stitch"] {
        let out = tmp.path().join(kind);
        let o = run(kind, &dir.join(format!("{kind}.json")), &out, "2");
        assert_eq!(o.status.code(), Some(0), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join("manifest.json").exists());
    }
}
