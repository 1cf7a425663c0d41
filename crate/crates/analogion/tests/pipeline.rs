//! End-to-end CLI runs over generated fixtures: every subcommand, resume
//! behaviour, idempotent data preparation, and user-error exit codes.

use std::ffi::OsString;
use std::path::Path;
use std::time::SystemTime;

use analogion::cli::run;

fn cli(args: &[&str]) -> i32 {
    let mut argv: Vec<OsString> = vec!["analogion".into()];
    argv.extend(args.iter().map(OsString::from));
    run(argv)
}

fn mtime(path: &Path) -> SystemTime {
    path.metadata().unwrap().modified().unwrap()
}

#[test]
fn full_pipeline_over_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = root.join("config.toml");
    let config_s = config.to_str().unwrap();
    let out = root.join("out");

    assert_eq!(cli(&["gen-fixtures", "--dir", root.to_str().unwrap()]), 0);
    assert!(config.is_file());

    // commands that need prepared data fail cleanly before prepare-data
    assert_eq!(cli(&["train", "--config", config_s]), 2);
    assert_eq!(cli(&["evaluate", "--config", config_s]), 2);
    assert_eq!(cli(&["report", "--config", config_s]), 2);

    assert_eq!(cli(&["prepare-data", "--config", config_s]), 0);
    assert!(out.join("corpus.tsv").is_file());
    assert!(out.join("folds.json").is_file());
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();

    // preparing again from the same sources reproduces the same digests
    assert_eq!(cli(&["prepare-data", "--config", config_s]), 0);
    let manifest_again = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert_eq!(manifest, manifest_again);

    // a fold subset trains only the requested folds
    assert_eq!(cli(&["train", "--config", config_s, "--folds", "0..1"]), 0);
    let runs = out.join("runs");
    assert!(runs.join("fold_0/params.json").is_file());
    assert!(runs.join("fold_1/params.json").is_file());
    assert!(!runs.join("fold_2").exists());

    // a full run completes the rest but leaves finished folds untouched
    let before = mtime(&runs.join("fold_0/params.json"));
    assert_eq!(cli(&["train", "--config", config_s, "--jobs", "2"]), 0);
    for fold in 0..10 {
        assert!(runs.join(format!("fold_{fold}/params.json")).is_file());
        assert!(runs.join(format!("fold_{fold}/metrics.json")).is_file());
        assert!(runs.join(format!("fold_{fold}/train_log.jsonl")).is_file());
    }
    assert_eq!(mtime(&runs.join("fold_0/params.json")), before);

    // --force redoes a completed fold
    assert_eq!(
        cli(&["train", "--config", config_s, "--folds", "0", "--force"]),
        0
    );
    assert!(mtime(&runs.join("fold_0/params.json")) >= before);

    assert_eq!(cli(&["evaluate", "--config", config_s]), 0);
    let reports = out.join("reports");
    for name in [
        "classification.json",
        "classification_baseline.json",
        "classification.md",
        "ranking.json",
        "ranking.md",
        "distractor.json",
        "distractor.md",
        "wordsim.json",
        "histogram.csv",
        "histogram.json",
        "frequency_breakdown_after.json",
        "frequency_breakdown_before.json",
        "oov_breakdown_after.json",
        "oov_breakdown_before.json",
    ] {
        assert!(reports.join(name).is_file(), "missing report file {name}");
    }
    for fold in 0..10 {
        assert!(out.join(format!("scores/fold_{fold}.jsonl")).is_file());
        assert!(out
            .join(format!("scores_baseline/fold_{fold}.jsonl"))
            .is_file());
    }

    // emitted reports parse and carry the expected shape
    let text = std::fs::read_to_string(reports.join("classification.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let cells = value["cells"].as_object().unwrap();
    assert!(cells.contains_key("OVERALL/overall"));
    assert!(cells.contains_key("SAT/pos"));
    let overall = &cells["OVERALL/overall"];
    assert_eq!(overall["denominator"].as_u64().unwrap(), 4930);
    assert!(!value["comparisons"].as_array().unwrap().is_empty());

    let md = std::fs::read_to_string(reports.join("classification.md")).unwrap();
    assert!(md.contains("| OVERALL |"));
    assert!(md.contains("| SCAN-science |"));

    // standalone analysis subcommands rerun on existing artifacts
    assert_eq!(cli(&["distractor-eval", "--config", config_s]), 0);
    assert_eq!(cli(&["wordsim-eval", "--config", config_s]), 0);
    assert_eq!(cli(&["freq-analysis", "--config", config_s]), 0);

    assert_eq!(cli(&["report", "--config", config_s]), 0);
    let summary = std::fs::read_to_string(reports.join("report.md")).unwrap();
    assert!(summary.contains("## Classification accuracy"));
    assert!(summary.contains("## Ranking accuracy"));
    assert!(summary.contains("## Distractor accuracy"));
    assert!(summary.contains("## Word similarity"));
}

#[test]
fn missing_source_file_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert_eq!(cli(&["gen-fixtures", "--dir", root.to_str().unwrap()]), 0);
    std::fs::remove_file(root.join("sat.jsonl")).unwrap();
    assert_eq!(
        cli(&[
            "prepare-data",
            "--config",
            root.join("config.toml").to_str().unwrap()
        ]),
        2
    );
}

#[test]
fn seed_override_changes_fold_assignments() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = root.join("config.toml");
    let config_s = config.to_str().unwrap();
    assert_eq!(cli(&["gen-fixtures", "--dir", root.to_str().unwrap()]), 0);

    assert_eq!(cli(&["prepare-data", "--config", config_s]), 0);
    let folds_a = std::fs::read_to_string(root.join("out/folds.json")).unwrap();
    assert_eq!(
        cli(&["prepare-data", "--config", config_s, "--seed", "99"]),
        0
    );
    let folds_b = std::fs::read_to_string(root.join("out/folds.json")).unwrap();
    assert_ne!(folds_a, folds_b);
}
