use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lsck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = lsck(args);
    assert!(
        out.status.success(),
        "lsck {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn synth(dir: &Path) -> (String, String) {
    let d = dir.join("data");
    ok(&[
        "synth",
        "--k-true",
        "3",
        "--n",
        "90",
        "--dim",
        "3",
        "--separation",
        "12",
        "--seed",
        "4",
        "--out",
        d.to_str().unwrap(),
    ]);
    (
        d.join("corpus.jsonl").to_string_lossy().into_owned(),
        d.join("embeddings.bin").to_string_lossy().into_owned(),
    )
}

#[test]
fn synth_then_run_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let (corpus, emb) = synth(tmp.path());
    let out = tmp.path().join("out");
    let stdout = ok(&[
        "run",
        "--corpus",
        &corpus,
        "--embeddings",
        &emb,
        "--k",
        "3",
        "--seeds",
        "0..2",
        "--ratios",
        "0,0.3",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("algorithm,ratio,metric,mean,stddev,n_seeds"));
    for f in [
        "constraints.json",
        "transcript.jsonl",
        "report.csv",
        "queries.csv",
        "timings.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let results: Vec<_> = fs::read_dir(out.join("results")).unwrap().collect();
    // 2 algorithms x 2 ratios x 2 seeds
    assert_eq!(results.len(), 8);
    assert!(out.join("results/lsck_hc_r0.3000_s1.json").is_file());
}

#[test]
fn evaluate_scores_result_and_constraints() {
    let tmp = tempfile::tempdir().unwrap();
    let (corpus, emb) = synth(tmp.path());
    let out = tmp.path().join("out");
    let o = out.to_str().unwrap();
    ok(&[
        "gen-constraints",
        "--corpus",
        &corpus,
        "--embeddings",
        &emb,
        "--k",
        "3",
        "--output-dir",
        o,
    ]);
    ok(&[
        "cluster",
        "--corpus",
        &corpus,
        "--embeddings",
        &emb,
        "--k",
        "3",
        "--seeds",
        "0",
        "--ratios",
        "0.2",
        "--output-dir",
        o,
    ]);
    let json = ok(&[
        "evaluate",
        "--corpus",
        &corpus,
        "--embeddings",
        &emb,
        "--assignment",
        out.join("results/lsck_hc_r0.2000_s0.json")
            .to_str()
            .unwrap(),
        "--constraints",
        out.join("constraints.json").to_str().unwrap(),
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["constraint_ri"], 1.0);
    assert_eq!(v["scores"]["acc"], 1.0);
    assert!(v["ledger_total"].as_u64().unwrap() > 0);
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = serde_json::json!({
        "dataset": {"synthetic": {"k_true": 3, "n": 60, "dim": 2, "separation": 15.0, "seed": 2}},
        "k": 3,
        "algorithms": ["kmeanspp"],
        "ratios": [0.1],
        "seeds": [5],
        "oracle": {"backend": "sim", "error_rate": 0.0, "seed": 1},
        "output_dir": out,
    });
    let cfg_path = tmp.path().join("run.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    ok(&[
        "run",
        "--config",
        cfg_path.to_str().unwrap(),
        "--ratios",
        "0.25",
        "--algorithms",
        "lsck",
    ]);
    let names: Vec<String> = fs::read_dir(out.join("results"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["lsck_r0.2500_s5.json".to_string()]);
}

#[test]
fn gen_constraints_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        ok(&[
            "gen-constraints",
            "--synthetic",
            "k_true=4,n=120,dim=3,separation=4,seed=9",
            "--k",
            "4",
            "--error-rate",
            "0.1",
            "--oracle-seed",
            "3",
            "--output-dir",
            out.to_str().unwrap(),
        ]);
        fs::read(out.join("constraints.json")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn report_flags_missing_results_without_failing() {
    let tmp = tempfile::tempdir().unwrap();
    let results = tmp.path().join("results");
    fs::create_dir_all(&results).unwrap();
    fs::write(results.join("broken.json"), "{").unwrap();
    let out = lsck(&["report", "--results", results.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json"));
    assert!(tmp.path().join("report.csv").is_file());
}

#[test]
fn usage_errors_exit_nonzero_with_message() {
    let cases: [(&[&str], &str); 4] = [
        (&["gen-constraints", "--k", "3"], "no dataset"),
        (
            &["run", "--synthetic", "n=50", "--k", "2", "--penalties", "7"],
            "penalties",
        ),
        (&["run", "--synthetic", "n=50,bogus=1", "--k", "2"], "bogus"),
        (
            &["run", "--synthetic", "n=50", "--k", "2", "--ratios", "1.5"],
            "ratio",
        ),
    ];
    for (args, needle) in cases {
        let out = lsck(args);
        assert!(!out.status.success(), "{args:?} should fail");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{args:?}: {err}");
    }
}

#[test]
fn remote_oracle_requires_a_model() {
    let out = lsck(&[
        "gen-constraints",
        "--synthetic",
        "n=50",
        "--k",
        "2",
        "--oracle",
        "remote",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--model"));
}
