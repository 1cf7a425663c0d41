//! Frequency and OOV breakdowns of scored analogies, plus histogram data
//! for plotting word frequency by token-piece count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingBackend, FrequencyTable};
use crate::error::{Error, Result};
use crate::evaluation::report::Cell;
use crate::evaluation::ScoredQuad;

/// Running mean accumulator for one breakdown cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanCell {
    pub sum: f64,
    pub count: u64,
}

impl MeanCell {
    pub fn add(&mut self, value: f64) {
        self.sum += value;
        self.count += 1;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum / self.count as f64
        }
    }
}

fn label_key(label: bool) -> &'static str {
    if label {
        "pos"
    } else {
        "neg"
    }
}

/// Mean per-quad entity frequency by (true label x predicted label).
/// Keys are "true/pred" with "any" for margins; quads containing a term with
/// no frequency entry are excluded and counted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyBreakdown {
    pub cells: BTreeMap<String, MeanCell>,
    pub excluded_unknown: usize,
}

impl FrequencyBreakdown {
    pub fn mean(&self, true_label: &str, predicted: &str) -> Option<f64> {
        self.cells
            .get(&format!("{true_label}/{predicted}"))
            .filter(|c| c.count > 0)
            .map(|c| c.mean())
    }
}

pub fn frequency_breakdown(scored: &[ScoredQuad], freq: &FrequencyTable) -> FrequencyBreakdown {
    let mut cells: BTreeMap<String, MeanCell> = BTreeMap::new();
    let mut excluded = 0usize;
    for item in scored {
        let counts: Vec<u64> = item
            .terms()
            .iter()
            .filter_map(|t| freq.lookup(t))
            .collect();
        if counts.len() < 4 {
            excluded += 1;
            continue;
        }
        let quad_mean = counts.iter().sum::<u64>() as f64 / 4.0;
        let t = label_key(item.label);
        let p = label_key(item.predicted);
        for key in [
            format!("{t}/{p}"),
            format!("{t}/any"),
            format!("any/{p}"),
            "any/any".to_string(),
        ] {
            cells.entry(key).or_default().add(quad_mean);
        }
    }
    FrequencyBreakdown {
        cells,
        excluded_unknown: excluded,
    }
}

/// Accuracy by (true label x has-OOV-entity) with margins and group sizes.
/// A quad "has OOV" iff any of its four terms is OOV for the backend.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OovBreakdown {
    pub cells: BTreeMap<String, Cell>,
    /// True when no quad in the input had an OOV entity.
    pub oov_group_empty: bool,
}

impl OovBreakdown {
    pub fn accuracy(&self, true_label: &str, oov: &str) -> Option<f64> {
        self.cells
            .get(&format!("{true_label}/{oov}"))
            .filter(|c| c.denominator > 0)
            .map(|c| c.accuracy())
    }

    pub fn group_size(&self, true_label: &str, oov: &str) -> u64 {
        self.cells
            .get(&format!("{true_label}/{oov}"))
            .map(|c| c.denominator)
            .unwrap_or(0)
    }
}

pub fn oov_breakdown(scored: &[ScoredQuad], backend: &dyn EmbeddingBackend) -> OovBreakdown {
    let mut cells: BTreeMap<String, Cell> = BTreeMap::new();
    let mut any_oov = false;
    for item in scored {
        let has_oov = item.terms().iter().any(|t| backend.is_oov(t));
        any_oov |= has_oov;
        let correct = item.predicted == item.label;
        let t = label_key(item.label);
        let o = if has_oov { "oov" } else { "no_oov" };
        for key in [
            format!("{t}/{o}"),
            format!("{t}/any"),
            format!("any/{o}"),
            "any/any".to_string(),
        ] {
            cells.entry(key).or_default().add(correct);
        }
    }
    OovBreakdown {
        cells,
        oov_group_empty: !any_oov,
    }
}

/// Histogram counts over word frequency, one series per token-piece count.
/// Words seen 100,000 times or more are excluded from every series, matching
/// the plot's domain restriction; words with no frequency entry are counted
/// in `unknown_words`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyHistogram {
    pub edges: Vec<f64>,
    /// piece count -> per-bin counts (len = edges.len() - 1)
    pub series: BTreeMap<usize, Vec<u64>>,
    pub total: Vec<u64>,
    pub unknown_words: usize,
    pub excluded_high_frequency: usize,
}

pub const HISTOGRAM_FREQUENCY_CAP: u64 = 100_000;

pub fn frequency_histogram(
    words: &[String],
    freq: &FrequencyTable,
    backend: &dyn EmbeddingBackend,
    edges: &[f64],
) -> Result<FrequencyHistogram> {
    if edges.len() < 2 {
        return Err(Error::Validation("need at least 2 bin edges".into()));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(
            "bin edges must be strictly increasing".into(),
        ));
    }
    let bins = edges.len() - 1;
    let mut series: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    let mut total = vec![0u64; bins];
    let mut unknown = 0usize;
    let mut excluded_high = 0usize;
    for word in words {
        let Some(count) = freq.lookup(word) else {
            unknown += 1;
            continue;
        };
        if count >= HISTOGRAM_FREQUENCY_CAP {
            excluded_high += 1;
            continue;
        }
        let value = count as f64;
        // half-open bins [e_i, e_{i+1}); values outside the edge range drop
        let Some(bin) = (0..bins).find(|&i| value >= edges[i] && value < edges[i + 1]) else {
            continue;
        };
        let pieces = backend.piece_count(word);
        series.entry(pieces).or_insert_with(|| vec![0; bins])[bin] += 1;
        total[bin] += 1;
    }
    Ok(FrequencyHistogram {
        edges: edges.to_vec(),
        series,
        total,
        unknown_words: unknown,
        excluded_high_frequency: excluded_high,
    })
}

/// CSV for external plotting: one row per (piece count, bin).
pub fn histogram_csv(hist: &FrequencyHistogram) -> String {
    let mut out = String::from("pieces,bin_low,bin_high,count\n");
    for (pieces, counts) in &hist.series {
        for (i, count) in counts.iter().enumerate() {
            let _ = writeln!(
                out,
                "{pieces},{},{},{count}",
                hist.edges[i],
                hist.edges[i + 1]
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Source;
    use crate::embedding::{StubBackend, StubTokenizer};
    use crate::evaluation::classify;

    fn scored(terms: [&str; 4], label: bool, predicted: bool) -> ScoredQuad {
        let score = if predicted { 1.0 } else { -1.0 };
        ScoredQuad {
            a: terms[0].into(),
            b: terms[1].into(),
            c: terms[2].into(),
            d: terms[3].into(),
            label,
            source: Source::Sat,
            scan_subtype: None,
            partner_id: None,
            id: format!("{}-{}-{}-{}", terms[0], terms[1], terms[2], terms[3]),
            score,
            predicted: classify(score, 0.0),
            fold: None,
        }
    }

    fn table(entries: &[(&str, u64)]) -> FrequencyTable {
        FrequencyTable::new(entries.iter().map(|(w, c)| (w.to_string(), *c)))
    }

    #[test]
    fn single_quad_uniform_frequency() {
        let freq = table(&[("a", 100), ("b", 100), ("c", 100), ("d", 100)]);
        let items = [scored(["a", "b", "c", "d"], true, true)];
        let bd = frequency_breakdown(&items, &freq);
        assert_eq!(bd.excluded_unknown, 0);
        assert_eq!(bd.mean("pos", "pos").unwrap(), 100.0);
        assert_eq!(bd.mean("pos", "any").unwrap(), 100.0);
        assert_eq!(bd.mean("any", "any").unwrap(), 100.0);
        assert!(bd.mean("neg", "neg").is_none());
    }

    #[test]
    fn two_quads_hand_averaged() {
        let freq = table(&[
            ("a", 10),
            ("b", 20),
            ("c", 30),
            ("d", 40),
            ("e", 100),
            ("f", 200),
            ("g", 300),
            ("h", 400),
        ]);
        // quad means: 25 and 250, both true-positive predicted-positive
        let items = [
            scored(["a", "b", "c", "d"], true, true),
            scored(["e", "f", "g", "h"], true, true),
        ];
        let bd = frequency_breakdown(&items, &freq);
        assert!((bd.mean("pos", "pos").unwrap() - 137.5).abs() < 1e-12);
        assert!((bd.mean("any", "pos").unwrap() - 137.5).abs() < 1e-12);
    }

    #[test]
    fn unknown_frequency_excluded_and_counted() {
        let freq = table(&[("a", 10), ("b", 20), ("c", 30)]);
        let items = [scored(["a", "b", "c", "zzz"], true, true)];
        let bd = frequency_breakdown(&items, &freq);
        assert_eq!(bd.excluded_unknown, 1);
        assert!(bd.cells.is_empty());
    }

    fn stub_with_vocab(vocab: &[&str]) -> StubBackend {
        StubBackend::new(
            4,
            1,
            StubTokenizer::new(vocab.iter().map(|s| s.to_string()), 3),
        )
    }

    #[test]
    fn oov_hand_tally() {
        // vocab covers the first 8 letters; "zebra" chunks into pieces
        let backend = stub_with_vocab(&["a", "b", "c", "d", "e", "f", "g", "h"]);
        let items = [
            scored(["a", "b", "c", "d"], true, true),   // no OOV, correct
            scored(["e", "f", "g", "h"], true, false),  // no OOV, wrong
            scored(["a", "b", "c", "zebra"], false, false), // OOV, correct
            scored(["e", "f", "zebra", "h"], false, true),  // OOV, wrong
            scored(["a", "zebra", "c", "d"], true, true),   // OOV, correct
            scored(["a", "f", "g", "h"], false, false),     // no OOV, correct
        ];
        let bd = oov_breakdown(&items, &backend);
        assert!(!bd.oov_group_empty);
        assert_eq!(bd.group_size("any", "no_oov"), 3);
        assert_eq!(bd.group_size("any", "oov"), 3);
        assert!((bd.accuracy("any", "no_oov").unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((bd.accuracy("any", "oov").unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(bd.accuracy("pos", "no_oov").unwrap(), 0.5);
        assert_eq!(bd.accuracy("pos", "oov").unwrap(), 1.0);
        assert_eq!(bd.accuracy("neg", "oov").unwrap(), 0.5);
        assert!((bd.accuracy("any", "any").unwrap() - 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn all_in_vocab_flags_empty_oov_group() {
        let backend = stub_with_vocab(&["a", "b", "c", "d"]);
        let items = [scored(["a", "b", "c", "d"], true, true)];
        let bd = oov_breakdown(&items, &backend);
        assert!(bd.oov_group_empty);
        assert_eq!(bd.group_size("any", "oov"), 0);
    }

    #[test]
    fn histogram_empty_words() {
        let backend = stub_with_vocab(&["a"]);
        let freq = table(&[]);
        let hist = frequency_histogram(&[], &freq, &backend, &[0.0, 10.0, 100.0]).unwrap();
        assert_eq!(hist.total, vec![0, 0]);
        assert!(hist.series.is_empty());
    }

    #[test]
    fn histogram_hand_binned() {
        let backend = stub_with_vocab(&["cat", "dog", "sun"]);
        let freq = table(&[
            ("cat", 5),
            ("dog", 50),
            ("sun", 5000),
            ("xylophone", 50),
            ("quux", 200_000),
        ]);
        let words: Vec<String> = ["cat", "dog", "sun", "xylophone", "quux", "missing"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let edges = [0.0, 10.0, 100.0, 10_000.0];
        let hist = frequency_histogram(&words, &freq, &backend, &edges).unwrap();
        // in-vocab words are single-piece; "xylophone" chunks into 3 pieces
        assert_eq!(hist.series[&1], vec![1, 1, 1]);
        assert_eq!(hist.series[&3], vec![0, 1, 0]);
        assert_eq!(hist.total, vec![1, 2, 1]);
        assert_eq!(hist.excluded_high_frequency, 1);
        assert_eq!(hist.unknown_words, 1);
    }

    #[test]
    fn histogram_rejects_bad_edges() {
        let backend = stub_with_vocab(&["a"]);
        let freq = table(&[]);
        assert!(frequency_histogram(&[], &freq, &backend, &[5.0]).is_err());
        assert!(frequency_histogram(&[], &freq, &backend, &[5.0, 5.0]).is_err());
        assert!(frequency_histogram(&[], &freq, &backend, &[5.0, 4.0]).is_err());
    }
}
