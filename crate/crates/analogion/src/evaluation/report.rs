//! Evaluation report structure, cross-run aggregation and table emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::stats::two_proportion_ztest;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// One accuracy cell: exact numerator/denominator counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub numerator: u64,
    pub denominator: u64,
}

impl Cell {
    pub fn accuracy(&self) -> f64 {
        if self.denominator == 0 {
            f64::NAN
        } else {
            self.numerator as f64 / self.denominator as f64
        }
    }

    pub fn add(&mut self, correct: bool) {
        self.numerator += u64::from(correct);
        self.denominator += 1;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Comparison {
    pub key: String,
    pub accuracy: f64,
    pub baseline_accuracy: f64,
    pub z: f64,
    pub p: f64,
    /// "up", "down" or "same" relative to the baseline.
    pub direction: String,
    pub significant: bool,
}

/// Cells are keyed "CATEGORY/slice", e.g. "SCAN/pos" or "Near-Causal/high".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub cells: BTreeMap<String, Cell>,
    #[serde(default)]
    pub comparisons: Vec<Comparison>,
    pub runs_aggregated: usize,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl EvaluationReport {
    pub fn new() -> Self {
        EvaluationReport {
            cells: BTreeMap::new(),
            comparisons: Vec::new(),
            runs_aggregated: 1,
            meta: BTreeMap::new(),
        }
    }

    pub fn cell_key(category: &str, slice: &str) -> String {
        format!("{category}/{slice}")
    }

    pub fn record(&mut self, category: &str, slice: &str, correct: bool) {
        self.cells
            .entry(Self::cell_key(category, slice))
            .or_default()
            .add(correct);
    }

    pub fn accuracy(&self, category: &str, slice: &str) -> Option<f64> {
        self.cells
            .get(&Self::cell_key(category, slice))
            .map(|c| c.accuracy())
    }

    pub fn cell(&self, category: &str, slice: &str) -> Option<Cell> {
        self.cells.get(&Self::cell_key(category, slice)).copied()
    }
}

impl Default for EvaluationReport {
    fn default() -> Self {
        Self::new()
    }
}

/// Micro-average: pool numerators and denominators across runs. All reports
/// must carry identical cell keys.
pub fn aggregate_runs(reports: &[EvaluationReport]) -> Result<EvaluationReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Validation("no reports to aggregate".into()))?;
    let keys: Vec<&String> = first.cells.keys().collect();
    let mut out = EvaluationReport::new();
    out.runs_aggregated = reports.len();
    out.meta = first.meta.clone();
    for report in reports {
        let report_keys: Vec<&String> = report.cells.keys().collect();
        if report_keys != keys {
            return Err(Error::Validation(
                "reports have mismatched cell keys".into(),
            ));
        }
        for (key, cell) in &report.cells {
            let slot = out.cells.entry(key.clone()).or_default();
            slot.numerator += cell.numerator;
            slot.denominator += cell.denominator;
        }
    }
    Ok(out)
}

/// Macro-average variant: mean of per-run accuracies, reported over a
/// denominator of runs-with-data. Kept behind a flag; micro is the default.
pub fn aggregate_runs_macro(reports: &[EvaluationReport]) -> Result<BTreeMap<String, f64>> {
    let pooled = aggregate_runs(reports)?; // validates key consistency
    let mut out = BTreeMap::new();
    for key in pooled.cells.keys() {
        let accs: Vec<f64> = reports
            .iter()
            .filter_map(|r| r.cells.get(key))
            .filter(|c| c.denominator > 0)
            .map(|c| c.accuracy())
            .collect();
        if !accs.is_empty() {
            out.insert(key.clone(), accs.iter().sum::<f64>() / accs.len() as f64);
        }
    }
    Ok(out)
}

/// Per-cell z-tests of a report against a baseline report, on pooled counts.
pub fn compare_reports(report: &EvaluationReport, baseline: &EvaluationReport) -> Vec<Comparison> {
    let mut comparisons = Vec::new();
    for (key, cell) in &report.cells {
        let Some(base) = baseline.cells.get(key) else {
            continue;
        };
        if cell.denominator == 0 || base.denominator == 0 {
            continue;
        }
        let test = two_proportion_ztest(
            cell.numerator,
            cell.denominator,
            base.numerator,
            base.denominator,
        );
        let acc = cell.accuracy();
        let base_acc = base.accuracy();
        let direction = if acc > base_acc {
            "up"
        } else if acc < base_acc {
            "down"
        } else {
            "same"
        };
        comparisons.push(Comparison {
            key: key.clone(),
            accuracy: acc,
            baseline_accuracy: base_acc,
            z: test.z,
            p: test.p,
            direction: direction.to_string(),
            significant: !test.degenerate && test.p < SIGNIFICANCE_LEVEL,
        });
    }
    comparisons
}

fn marker(report: &EvaluationReport, key: &str) -> String {
    report
        .comparisons
        .iter()
        .find(|c| c.key == key)
        .map(|c| {
            let arrow = match c.direction.as_str() {
                "up" => "↑",
                "down" => "↓",
                _ => "→",
            };
            if c.significant {
                format!("**{arrow}**")
            } else {
                arrow.to_string()
            }
        })
        .unwrap_or_default()
}

/// Markdown table: one row per category, Overall/Pos/Neg accuracy columns
/// with significance markers when comparisons are attached.
pub fn classification_markdown(report: &EvaluationReport, categories: &[&str]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| Category | Overall | Pos. | Neg. |");
    let _ = writeln!(out, "|---|---|---|---|");
    for category in categories {
        let mut row = format!("| {category} |");
        for slice in ["overall", "pos", "neg"] {
            let key = EvaluationReport::cell_key(category, slice);
            match report.cells.get(&key) {
                Some(cell) if cell.denominator > 0 => {
                    let _ = write!(row, " {:.2}{} |", cell.accuracy(), marker(report, &key));
                }
                _ => row.push_str(" - |"),
            }
        }
        let _ = writeln!(out, "{row}");
    }
    out
}

/// Markdown table for the distractor protocol: distance x relation rows,
/// Overall/High/Low salience columns.
pub fn distractor_markdown(report: &EvaluationReport, categories: &[&str]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| Distance/Relation | Overall | High | Low |");
    let _ = writeln!(out, "|---|---|---|---|");
    for category in categories {
        let mut row = format!("| {category} |");
        for slice in ["overall", "high", "low"] {
            let key = EvaluationReport::cell_key(category, slice);
            match report.cells.get(&key) {
                Some(cell) if cell.denominator > 0 => {
                    let _ = write!(row, " {:.2}{} |", cell.accuracy(), marker(report, &key));
                }
                _ => row.push_str(" - |"),
            }
        }
        let _ = writeln!(out, "{row}");
    }
    out
}

pub fn report_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("cell,numerator,denominator,accuracy\n");
    for (key, cell) in &report.cells {
        let _ = writeln!(
            out,
            "{key},{},{},{}",
            cell.numerator,
            cell.denominator,
            cell.accuracy()
        );
    }
    out
}
