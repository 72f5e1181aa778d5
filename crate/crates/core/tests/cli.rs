use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn decolab(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_decolab"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("DECOLAB_THREADS", t),
        None => cmd.env_remove("DECOLAB_THREADS"),
    };
    cmd.output().unwrap()
}

fn scenario(dir: &Path, name: &str, kind: &str, params: Value) -> PathBuf {
    let path = dir.join(name);
    let body = json!({ "schema": "decolab/scenario/v1", "kind": kind, "params": params, "seed": 11 });
    fs::write(&path, serde_json::to_vec_pretty(&body).unwrap()).unwrap();
    path
}

fn run(file: &Path, out: &Path, threads: Option<&str>) -> Output {
    let o = decolab(&["run", file.to_str().unwrap(), "--out", out.to_str().unwrap()], threads);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o
}

fn csv_column(path: &Path, column: &str) -> Vec<f64> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let idx = reader.headers().unwrap().iter().position(|h| h == column).unwrap();
    reader.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn version_flag_prints_name_and_version() {
    let o = decolab(&["--version"], None);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), format!("decolab {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn chain_halves_coherence_per_link() {
    let tmp = TempDir::new().unwrap();
    let file = scenario(tmp.path(), "chain.json", "chain", json!({ "links": 3, "overlap": 0.5 }));
    run(&file, &tmp.path().join("out"), None);
    let coherence = csv_column(&tmp.path().join("out/chain.csv"), "off_diagonal");
    assert_eq!(coherence.len(), 3);
    for (got, want) in coherence.iter().zip([0.25, 0.125, 0.0625]) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn graham_single_trial_count() {
    let tmp = TempDir::new().unwrap();
    let file = scenario(tmp.path(), "g.json", "graham", json!({ "p": 0.5, "n": 4, "epsilon": 0.3 }));
    run(&file, &tmp.path().join("out"), None);
    let norms = csv_column(&tmp.path().join("out/graham.csv"), "deviant_norm");
    // only 0 or 4 heads deviate by more than 0.3 from 1/2
    assert!((norms[0] - 0.125).abs() < 1e-15);
}

#[test]
fn classical_ledger_starts_at_one_bit() {
    let tmp = TempDir::new().unwrap();
    let file = scenario(tmp.path(), "l.json", "ledger_classical", json!({ "p": [0.5, 0.5] }));
    run(&file, &tmp.path().join("out"), None);
    let s = csv_column(&tmp.path().join("out/ledger.csv"), "S_ensemble_nats");
    assert!((s[0] - std::f64::consts::LN_2).abs() < 1e-15);
    let text = fs::read_to_string(tmp.path().join("out/ledger.csv")).unwrap();
    assert!(!text.contains("-0.0000000000000000e0"));
}

#[test]
fn manifest_hashes_match_files() {
    let tmp = TempDir::new().unwrap();
    let file = scenario(tmp.path(), "s.json", "schmidt", json!({ "dims": [2, 2], "amplitudes": [0.6, 0, 0, 0.8] }));
    let out = tmp.path().join("out");
    let stdout = String::from_utf8(run(&file, &out, None).stdout).unwrap();
    let manifest: Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["kind"], "schmidt");
    assert_eq!(manifest["seed"], 11);
    for entry in manifest["files"].as_array().unwrap() {
        let bytes = fs::read(out.join(entry["path"].as_str().unwrap())).unwrap();
        assert_eq!(entry["bytes"].as_u64().unwrap() as usize, bytes.len());
        let hash = entry["sha256"].as_str().unwrap();
        assert_eq!(hash.len(), 64);
        assert!(stdout.contains(hash));
    }
}

#[test]
fn outputs_are_reproducible_across_runs_and_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let files = [
        scenario(tmp.path(), "mc.json", "collapse_mc", json!({ "amplitudes": [0.6, 0.8], "trials": 2000 })),
        scenario(
            tmp.path(),
            "h.json",
            "histories",
            json!({
                "initial": [1, 0],
                "hamiltonian": [[0, 1], [1, 0]],
                "slices": [
                    { "time": 0.3, "basis": [[1, 0], [0, 1]] },
                    { "time": 0.9, "basis": [[h, h], [h, -h]] },
                    { "time": 1.4, "basis": [[1, 0], [0, 1]] }
                ]
            }),
        ),
    ];
    for file in &files {
        let stem = file.file_stem().unwrap().to_str().unwrap();
        let runs: Vec<_> = [("a", Some("1")), ("b", Some("4")), ("c", Some("0")), ("d", None)]
            .into_iter()
            .map(|(tag, threads)| {
                let out = tmp.path().join(format!("{stem}-{tag}"));
                run(file, &out, threads);
                dir_contents(&out)
            })
            .collect();
        assert!(runs.len() == 4 && runs.windows(2).all(|w| w[0] == w[1]), "{stem} differs between runs");
    }
}

#[test]
fn seed_flag_overrides_scenario_seed() {
    let tmp = TempDir::new().unwrap();
    let file = scenario(tmp.path(), "mc.json", "collapse_mc", json!({ "amplitudes": [0.6, 0.8], "trials": 500 }));
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run(&file, &a, None);
    let o = decolab(&["run", file.to_str().unwrap(), "--out", b.to_str().unwrap(), "--seed", "12"], None);
    assert!(o.status.success());
    assert_ne!(fs::read(a.join("collapse_counts.csv")).unwrap(), fs::read(b.join("collapse_counts.csv")).unwrap());
    let manifest: Value = serde_json::from_slice(&fs::read(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 12);
}

#[test]
fn validate_accepts_good_and_lists_every_problem() {
    let tmp = TempDir::new().unwrap();
    let good = scenario(tmp.path(), "ok.json", "graham", json!({ "p": 0.5, "n": [4, 8], "epsilon": 0.1 }));
    let o = decolab(&["validate", good.to_str().unwrap()], None);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), "ok");

    let bad = scenario(
        tmp.path(),
        "bad.json",
        "master",
        json!({ "rates": [[0, -1], [1, 0]], "p0": [0.5, 0.6], "times": [0, 1, 0.5] }),
    );
    let o = decolab(&["validate", bad.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let text = String::from_utf8(o.stdout).unwrap();
    for field in ["params.rates[0][1]", "params.p0", "params.times"] {
        assert!(text.contains(field), "missing {field} in:\n{text}");
    }
}

#[test]
fn schema_errors_exit_two_without_output() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        json!({ "schema": "decolab/scenario/v2", "kind": "graham", "params": {} }),
        json!({ "schema": "decolab/scenario/v1", "kind": "teleport", "params": {} }),
        json!({ "schema": "decolab/scenario/v1", "kind": "graham", "params": { "p": 0.5, "n": 4, "epsilon": 0.1, "extra": 1 } }),
        json!({ "schema": "decolab/scenario/v1", "kind": "premeasurement", "params": { "amplitudes": [1, 1] } }),
    ];
    for (k, body) in cases.iter().enumerate() {
        let path = tmp.path().join(format!("{k}.json"));
        fs::write(&path, body.to_string()).unwrap();
        let out = tmp.path().join(format!("out{k}"));
        let o = decolab(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(2), "case {k}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.join("manifest.json").exists());
    }
    let garbled = tmp.path().join("garbled.json");
    fs::write(&garbled, "{ not json").unwrap();
    assert_eq!(decolab(&["validate", garbled.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn io_errors_exit_four() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.json");
    assert_eq!(decolab(&["run", missing.to_str().unwrap()], None).status.code(), Some(4));
    assert_eq!(decolab(&["validate", missing.to_str().unwrap()], None).status.code(), Some(4));

    // output path blocked by a regular file
    let file = scenario(tmp.path(), "g.json", "graham", json!({ "p": 0.5, "n": 4, "epsilon": 0.3 }));
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, b"x").unwrap();
    let o = decolab(&["run", file.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bad_thread_setting_is_rejected() {
    let o = decolab(&["--version"], Some("many"));
    // clap handles --version before threads are configured
    assert!(o.status.success());
    let tmp = TempDir::new().unwrap();
    let file = scenario(tmp.path(), "g.json", "graham", json!({ "p": 0.5, "n": 4, "epsilon": 0.3 }));
    let o = decolab(&["validate", file.to_str().unwrap()], Some("many"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bundled_scenarios_run() {
    let tmp = TempDir::new().unwrap();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let out = tmp.path().join(path.file_stem().unwrap());
        run(&path, &out, Some("2"));
        assert!(out.join("manifest.json").exists());
        seen += 1;
    }
    assert_eq!(seen, 12);
}
