//! Pipeline configuration loaded from TOML.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::training::TrainConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataPaths {
    pub sat: PathBuf,
    pub u2: PathBuf,
    pub u4: PathBuf,
    pub scan: PathBuf,
    #[serde(default)]
    pub frequency: Option<PathBuf>,
    #[serde(default)]
    pub wordsim: Option<PathBuf>,
    #[serde(default)]
    pub distractor: Option<PathBuf>,
}

fn default_threshold() -> f64 {
    0.0
}

fn default_true() -> bool {
    true
}

fn default_histogram_edges() -> Vec<f64> {
    vec![0.0, 10.0, 100.0, 1_000.0, 10_000.0, 100_000.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Classification cutoff on the model score; 0 matches the margin-0
    /// loss geometry.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_true")]
    pub classification: bool,
    #[serde(default = "default_true")]
    pub ranking: bool,
    #[serde(default = "default_histogram_edges")]
    pub histogram_edges: Vec<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            threshold: default_threshold(),
            classification: true,
            ranking: true,
            histogram_edges: default_histogram_edges(),
        }
    }
}

fn default_folds() -> usize {
    10
}

fn default_analysis_backend() -> String {
    "stub:16".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Backend for tokenizer-driven analyses (OOV flags, piece counts):
    /// "stub:<dim>" or "static:<path>".
    #[serde(default = "default_analysis_backend")]
    pub analysis_backend: String,
    pub data: DataPaths,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub evaluation: EvalConfig,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        // the pipeline seed governs training too unless train.seed is set
        if config.train.seed == 0 {
            config.train.seed = config.seed;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.folds < 2 {
            return Err(Error::Config("folds must be >= 2".into()));
        }
        if self.evaluation.histogram_edges.len() < 2 {
            return Err(Error::Config("need at least 2 histogram edges".into()));
        }
        for (name, path) in [
            ("sat", &self.data.sat),
            ("u2", &self.data.u2),
            ("u4", &self.data.u4),
            ("scan", &self.data.scan),
        ] {
            if !path.is_file() {
                return Err(Error::Config(format!(
                    "data.{name} path {} does not exist",
                    path.display()
                )));
            }
        }
        for (name, path) in [
            ("frequency", &self.data.frequency),
            ("wordsim", &self.data.wordsim),
            ("distractor", &self.data.distractor),
        ] {
            if let Some(path) = path {
                if !path.is_file() {
                    return Err(Error::Config(format!(
                        "data.{name} path {} does not exist",
                        path.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.output_dir.join("corpus.tsv")
    }

    pub fn folds_path(&self) -> PathBuf {
        self.output_dir.join("folds.json")
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.output_dir.join("runs")
    }

    pub fn scores_dir(&self, baseline: bool) -> PathBuf {
        self.output_dir
            .join(if baseline { "scores_baseline" } else { "scores" })
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.output_dir.join("reports")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.output_dir.join("manifest.json")
    }
}

/// Fold selection from the command line: "3", "1,4,7" or "0..3" (inclusive).
pub fn parse_fold_spec(spec: &str, k: usize) -> Result<Vec<usize>> {
    let parse_one = |s: &str| -> Result<usize> {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("invalid fold index {s:?}")))
    };
    let indices: Vec<usize> = if let Some((lo, hi)) = spec.split_once("..") {
        let lo = parse_one(lo)?;
        let hi = parse_one(hi)?;
        if lo > hi {
            return Err(Error::Config(format!("empty fold range {spec:?}")));
        }
        (lo..=hi).collect()
    } else {
        spec.split(',').map(parse_one).collect::<Result<_>>()?
    };
    for &i in &indices {
        if i >= k {
            return Err(Error::Config(format!(
                "fold index {i} out of range for k={k}"
            )));
        }
    }
    Ok(indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn touch(dir: &Path, name: &str) -> PathBuf {
        let path = dir.join(name);
        fs::File::create(&path).unwrap().write_all(b"x").unwrap();
        path
    }

    fn minimal_toml(dir: &Path) -> String {
        for name in ["sat.jsonl", "u2.jsonl", "u4.jsonl", "scan.jsonl"] {
            touch(dir, name);
        }
        format!(
            r#"
seed = 7
output_dir = "{out}"

[data]
sat = "{d}/sat.jsonl"
u2 = "{d}/u2.jsonl"
u4 = "{d}/u4.jsonl"
scan = "{d}/scan.jsonl"
"#,
            out = dir.join("out").display(),
            d = dir.display()
        )
    }

    #[test]
    fn load_applies_defaults_and_seed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        fs::write(&path, minimal_toml(dir.path())).unwrap();
        let config = PipelineConfig::load(&path).unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.train.seed, 7);
        assert_eq!(config.folds, 10);
        assert_eq!(config.train.epochs, 3);
        assert_eq!(config.train.batch_size, 32);
        assert_eq!(config.evaluation.threshold, 0.0);
    }

    #[test]
    fn missing_data_path_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        let text = minimal_toml(dir.path()).replace("sat.jsonl", "absent.jsonl");
        fs::write(&path, text).unwrap();
        let err = PipelineConfig::load(&path).unwrap_err();
        assert!(err.is_user_error());
    }

    #[test]
    fn fold_spec_forms() {
        assert_eq!(parse_fold_spec("3", 10).unwrap(), vec![3]);
        assert_eq!(parse_fold_spec("1,4,7", 10).unwrap(), vec![1, 4, 7]);
        assert_eq!(parse_fold_spec("1..3", 10).unwrap(), vec![1, 2, 3]);
        assert!(parse_fold_spec("9..3", 10).is_err());
        assert!(parse_fold_spec("11", 10).is_err());
        assert!(parse_fold_spec("x", 10).is_err());
    }
}
