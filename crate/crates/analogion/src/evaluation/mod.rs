//! Scoring of held-out analogies under the classification, ranking and
//! distractor protocols, plus word-similarity evaluation.

pub mod breakdown;
pub mod report;
pub mod stats;

pub use report::{
    aggregate_runs, aggregate_runs_macro, classification_markdown, compare_reports,
    distractor_markdown, report_csv, Cell, Comparison, EvaluationReport, SIGNIFICANCE_LEVEL,
};
pub use stats::{average_ranks, spearman, two_proportion_ztest, ZTest};

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnalogyQuad, ScanSubtype, Source};
use crate::embedding::{EmbeddingBackend, ToyBackend};
use crate::error::{Error, Result};
use crate::objective::{offset_score, OffsetVariant};

/// Scores a candidate analogy a:b::c:d; higher means more analogy-like.
pub trait Scorer {
    fn score_terms(&self, a: &str, b: &str, c: &str, d: &str) -> Result<f64>;
}

impl<F> Scorer for F
where
    F: Fn(&str, &str, &str, &str) -> f64,
{
    fn score_terms(&self, a: &str, b: &str, c: &str, d: &str) -> Result<f64> {
        Ok(self(a, b, c, d))
    }
}

/// Cosine of paired offset vectors over independently encoded pairs.
pub struct OffsetScorer<'a> {
    pub backend: &'a dyn EmbeddingBackend,
    pub variant: OffsetVariant,
}

impl Scorer for OffsetScorer<'_> {
    fn score_terms(&self, a: &str, b: &str, c: &str, d: &str) -> Result<f64> {
        let (va, vb) = self.backend.encode_pair(a, b)?;
        let (vc, vd) = self.backend.encode_pair(c, d)?;
        Ok(offset_score(&va, &vb, &vc, &vd, self.variant).value)
    }
}

/// Positive-class probability of the concatenated-sequence classifier head.
pub struct ClassifierScorer<'a> {
    pub backend: &'a ToyBackend,
}

impl Scorer for ClassifierScorer<'_> {
    fn score_terms(&self, a: &str, b: &str, c: &str, d: &str) -> Result<f64> {
        self.backend.classifier_probability(&[a, b, c, d])
    }
}

pub fn score_quad(scorer: &dyn Scorer, quad: &AnalogyQuad) -> Result<f64> {
    scorer.score_terms(&quad.a, &quad.b, &quad.c, &quad.d)
}

/// Positive iff the score strictly exceeds the threshold; ties are negative.
pub fn classify(score: f64, threshold: f64) -> bool {
    score > threshold
}

/// A held-out quad with its model score and thresholded prediction. Terms
/// and labels are carried along so breakdowns and recounts need no corpus
/// lookup.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredQuad {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub label: bool,
    pub source: Source,
    pub scan_subtype: Option<ScanSubtype>,
    pub partner_id: Option<String>,
    pub id: String,
    pub score: f64,
    pub predicted: bool,
    pub fold: Option<usize>,
}

impl ScoredQuad {
    pub fn terms(&self) -> [&str; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }
}

/// Category keys a quad contributes to: OVERALL, its source, and for SCAN
/// additionally the science/metaphor subsplit.
pub fn quad_categories(source: Source, subtype: Option<ScanSubtype>) -> Vec<String> {
    let mut cats = vec!["OVERALL".to_string(), source.as_str().to_string()];
    if let Some(sub) = subtype {
        cats.push(format!("SCAN-{}", sub.as_str()));
    }
    cats
}

pub fn score_heldout(
    scorer: &dyn Scorer,
    heldout: &[AnalogyQuad],
    threshold: f64,
    fold: Option<usize>,
) -> Result<Vec<ScoredQuad>> {
    heldout
        .iter()
        .map(|quad| {
            let score = score_quad(scorer, quad)?;
            Ok(ScoredQuad {
                a: quad.a.clone(),
                b: quad.b.clone(),
                c: quad.c.clone(),
                d: quad.d.clone(),
                label: quad.label,
                source: quad.source,
                scan_subtype: quad.scan_subtype,
                partner_id: quad.partner_id.clone(),
                id: quad.id(),
                score,
                predicted: classify(score, threshold),
                fold,
            })
        })
        .collect()
}

/// Accuracy cells for overall/positive/negative slices per category.
pub fn evaluate_classification(scored: &[ScoredQuad]) -> Result<EvaluationReport> {
    if scored.is_empty() {
        return Err(Error::Validation("empty held-out set".into()));
    }
    let mut report = EvaluationReport::new();
    for item in scored {
        let correct = item.predicted == item.label;
        let slice = if item.label { "pos" } else { "neg" };
        for category in quad_categories(item.source, item.scan_subtype) {
            report.record(&category, "overall", correct);
            report.record(&category, slice, correct);
        }
    }
    Ok(report)
}

/// Pair each positive with its partner negative; an item is correct iff the
/// positive scores strictly higher. Ties count as incorrect.
pub fn evaluate_ranking(scored: &[ScoredQuad]) -> Result<EvaluationReport> {
    let mut negatives: HashMap<&str, &ScoredQuad> = HashMap::new();
    for item in scored.iter().filter(|s| !s.label) {
        let partner = item.partner_id.as_deref().ok_or_else(|| {
            Error::Validation(format!("negative {} has no partner id", item.id))
        })?;
        negatives.insert(partner, item);
    }
    let mut report = EvaluationReport::new();
    let mut paired = 0usize;
    for positive in scored.iter().filter(|s| s.label) {
        let negative = negatives.get(positive.id.as_str()).ok_or_else(|| {
            Error::Validation(format!(
                "positive {} has no partner negative in the held-out set",
                positive.id
            ))
        })?;
        paired += 1;
        let correct = positive.score > negative.score;
        for category in quad_categories(positive.source, positive.scan_subtype) {
            report.record(&category, "overall", correct);
        }
    }
    if paired == 0 {
        return Err(Error::Validation("no positive pairs to rank".into()));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    Near,
    Far,
}

impl Distance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Distance::Near => "near",
            Distance::Far => "far",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Salience {
    High,
    Low,
}

impl Salience {
    pub fn as_str(&self) -> &'static str {
        match self {
            Salience::High => "high",
            Salience::Low => "low",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Categorical,
    Causal,
    Compositional,
}

impl Relation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::Categorical => "categorical",
            Relation::Causal => "causal",
            Relation::Compositional => "compositional",
        }
    }
}

/// Incomplete analogy a:b::c:? with the correct completion and one
/// distractor, labeled by distance, salience and relation subgroup.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistractorItem {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d_correct: String,
    pub d_distractor: String,
    pub distance: Distance,
    pub salience: Salience,
    pub relation: Relation,
}

impl DistractorItem {
    pub fn validate(&self) -> Result<()> {
        for (name, term) in [
            ("a", &self.a),
            ("b", &self.b),
            ("c", &self.c),
            ("d_correct", &self.d_correct),
            ("d_distractor", &self.d_distractor),
        ] {
            if term.trim().is_empty() {
                return Err(Error::Validation(format!(
                    "distractor item has empty {name}"
                )));
            }
        }
        if self.d_correct == self.d_distractor {
            return Err(Error::Validation(
                "d_correct and d_distractor must differ".into(),
            ));
        }
        Ok(())
    }
}

pub fn read_distractor_csv(path: &Path) -> Result<Vec<DistractorItem>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    let mut items = Vec::new();
    for (i, record) in reader.deserialize::<DistractorItem>().enumerate() {
        let item: DistractorItem = record.map_err(|e| Error::Parse {
            line: i + 2,
            message: e.to_string(),
        })?;
        item.validate().map_err(|e| Error::Parse {
            line: i + 2,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    Ok(items)
}

pub fn write_distractor_csv(path: &Path, items: &[DistractorItem]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    for item in items {
        writer
            .serialize(item)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Category keys a distractor item contributes to: OVERALL, its distance,
/// and distance-relation.
pub fn distractor_categories(item: &DistractorItem) -> Vec<String> {
    let dist = item.distance.as_str();
    vec![
        "OVERALL".to_string(),
        dist.to_string(),
        format!("{dist}-{}", item.relation.as_str()),
    ]
}

/// Correct iff the correct completion strictly outscores the distractor.
/// Cells: each category crossed with overall plus the item's salience slice.
pub fn evaluate_distractor(scorer: &dyn Scorer, items: &[DistractorItem]) -> Result<EvaluationReport> {
    if items.is_empty() {
        return Err(Error::Validation("no distractor items".into()));
    }
    let mut report = EvaluationReport::new();
    for item in items {
        item.validate()?;
        let correct_score = scorer.score_terms(&item.a, &item.b, &item.c, &item.d_correct)?;
        let distractor_score =
            scorer.score_terms(&item.a, &item.b, &item.c, &item.d_distractor)?;
        let correct = correct_score > distractor_score;
        for category in distractor_categories(item) {
            report.record(&category, "overall", correct);
            report.record(&category, item.salience.as_str(), correct);
        }
    }
    Ok(report)
}

/// Human-judged word pair with a gold similarity in [0, 10].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WordSimPair {
    #[serde(rename = "word1")]
    pub w1: String,
    #[serde(rename = "word2")]
    pub w2: String,
    #[serde(rename = "gold_score")]
    pub gold: f64,
}

impl WordSimPair {
    pub fn validate(&self) -> Result<()> {
        if self.w1.trim().is_empty() || self.w2.trim().is_empty() {
            return Err(Error::Validation("word-similarity pair has empty word".into()));
        }
        if !(0.0..=10.0).contains(&self.gold) {
            return Err(Error::Validation(format!(
                "gold score {} outside [0, 10]",
                self.gold
            )));
        }
        Ok(())
    }
}

pub fn read_wordsim_csv(path: &Path) -> Result<Vec<WordSimPair>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    let mut pairs = Vec::new();
    for (i, record) in reader.deserialize::<WordSimPair>().enumerate() {
        let pair: WordSimPair = record.map_err(|e| Error::Parse {
            line: i + 2,
            message: e.to_string(),
        })?;
        pair.validate().map_err(|e| Error::Parse {
            line: i + 2,
            message: e.to_string(),
        })?;
        pairs.push(pair);
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WordSimResult {
    pub rho: f64,
    pub n: usize,
    /// Pairs dropped because a word could not be embedded.
    pub skipped: Vec<(String, String)>,
}

/// Spearman correlation between model cosine similarities and gold scores.
/// Unembeddable pairs are skipped and reported, not fatal.
pub fn evaluate_wordsim(
    backend: &dyn EmbeddingBackend,
    pairs: &[WordSimPair],
) -> Result<WordSimResult> {
    let mut model = Vec::new();
    let mut gold = Vec::new();
    let mut skipped = Vec::new();
    for pair in pairs {
        pair.validate()?;
        let v1 = backend.encode_single_word(&pair.w1);
        let v2 = backend.encode_single_word(&pair.w2);
        match (v1, v2) {
            (Ok(v1), Ok(v2)) => {
                model.push(crate::objective::cosine(&v1, &v2).value);
                gold.push(pair.gold);
            }
            _ => skipped.push((pair.w1.clone(), pair.w2.clone())),
        }
    }
    if model.len() < 3 {
        return Err(Error::Validation(format!(
            "need at least 3 scorable pairs, got {}",
            model.len()
        )));
    }
    Ok(WordSimResult {
        rho: spearman(&model, &gold),
        n: model.len(),
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{StubBackend, StubTokenizer};

    fn scored(terms: [&str; 4], label: bool, score: f64, threshold: f64) -> ScoredQuad {
        let quad = AnalogyQuad::new(
            terms[0], terms[1], terms[2], terms[3], label, Source::Sat, None, None,
        )
        .unwrap();
        ScoredQuad {
            a: quad.a.clone(),
            b: quad.b.clone(),
            c: quad.c.clone(),
            d: quad.d.clone(),
            label,
            source: quad.source,
            scan_subtype: None,
            partner_id: quad.partner_id.clone(),
            id: quad.id(),
            score,
            predicted: classify(score, threshold),
            fold: None,
        }
    }

    #[test]
    fn classify_tie_is_negative() {
        assert!(classify(0.3, 0.0));
        assert!(!classify(-0.2, 0.0));
        assert!(!classify(0.0, 0.0));
    }

    #[test]
    fn classification_hand_enumeration() {
        // 4 items, 3 predicted correctly
        let items = vec![
            scored(["a", "b", "c", "d"], true, 0.9, 0.0),
            scored(["e", "f", "g", "h"], true, -0.1, 0.0),
            scored(["i", "j", "k", "l"], false, -0.5, 0.0),
            scored(["m", "n", "o", "p"], false, -0.4, 0.0),
        ];
        let report = evaluate_classification(&items).unwrap();
        assert!((report.accuracy("OVERALL", "overall").unwrap() - 0.75).abs() < 1e-12);
        assert!((report.accuracy("OVERALL", "pos").unwrap() - 0.5).abs() < 1e-12);
        assert!((report.accuracy("OVERALL", "neg").unwrap() - 1.0).abs() < 1e-12);
        assert!((report.accuracy("SAT", "overall").unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn all_positive_predictor_on_balanced_set() {
        let items = vec![
            scored(["a", "b", "c", "d"], true, 0.9, 0.0),
            scored(["e", "f", "g", "h"], false, 0.9, 0.0),
        ];
        let report = evaluate_classification(&items).unwrap();
        assert_eq!(report.accuracy("OVERALL", "pos").unwrap(), 1.0);
        assert_eq!(report.accuracy("OVERALL", "neg").unwrap(), 0.0);
        assert_eq!(report.accuracy("OVERALL", "overall").unwrap(), 0.5);
    }

    #[test]
    fn report_cells_are_additive() {
        let items = vec![
            scored(["a", "b", "c", "d"], true, 0.9, 0.0),
            scored(["e", "f", "g", "h"], true, -0.1, 0.0),
            scored(["i", "j", "k", "l"], false, -0.5, 0.0),
        ];
        let report = evaluate_classification(&items).unwrap();
        let overall = report.cell("OVERALL", "overall").unwrap();
        let pos = report.cell("OVERALL", "pos").unwrap();
        let neg = report.cell("OVERALL", "neg").unwrap();
        assert_eq!(overall.numerator, pos.numerator + neg.numerator);
        assert_eq!(overall.denominator, pos.denominator + neg.denominator);
    }

    fn ranked_pair(
        pos_terms: [&str; 4],
        neg_terms: [&str; 4],
        pos_score: f64,
        neg_score: f64,
    ) -> (ScoredQuad, ScoredQuad) {
        let pos = scored(pos_terms, true, pos_score, 0.0);
        let mut neg = scored(neg_terms, false, neg_score, 0.0);
        neg.partner_id = Some(pos.id.clone());
        (pos, neg)
    }

    #[test]
    fn ranking_tie_is_incorrect() {
        let (p1, n1) = ranked_pair(["a", "b", "c", "d"], ["a", "b", "x", "y"], 0.5, 0.4);
        let (p2, n2) = ranked_pair(["e", "f", "g", "h"], ["e", "f", "x", "y"], 0.4, 0.4);
        let report = evaluate_ranking(&[p1, n1, p2, n2]).unwrap();
        assert!((report.accuracy("OVERALL", "overall").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ranking_requires_partner() {
        let pos = scored(["a", "b", "c", "d"], true, 0.5, 0.0);
        assert!(evaluate_ranking(&[pos]).is_err());
    }

    #[test]
    fn ranking_invariant_under_monotone_transform() {
        let (p1, n1) = ranked_pair(["a", "b", "c", "d"], ["a", "b", "x", "y"], 0.5, 0.1);
        let (p2, n2) = ranked_pair(["e", "f", "g", "h"], ["e", "f", "x", "y"], -0.3, 0.2);
        let base = evaluate_ranking(&[p1.clone(), n1.clone(), p2.clone(), n2.clone()]).unwrap();
        let transform = |mut q: ScoredQuad| {
            q.score = (3.0 * q.score).exp();
            q
        };
        let transformed = evaluate_ranking(&[
            transform(p1),
            transform(n1),
            transform(p2),
            transform(n2),
        ])
        .unwrap();
        assert_eq!(base.cells, transformed.cells);
    }

    fn item(
        c: &str,
        d_correct: &str,
        d_distractor: &str,
        distance: Distance,
        salience: Salience,
        relation: Relation,
    ) -> DistractorItem {
        DistractorItem {
            a: "hot".into(),
            b: "cold".into(),
            c: c.into(),
            d_correct: d_correct.into(),
            d_distractor: d_distractor.into(),
            distance,
            salience,
            relation,
        }
    }

    #[test]
    fn distractor_hand_tally() {
        // scorer prefers lexicographically smaller d
        let scorer = |_: &str, _: &str, _: &str, d: &str| -(d.as_bytes()[0] as f64);
        let items = vec![
            item("up", "aa", "zz", Distance::Near, Salience::High, Relation::Categorical),
            item("in", "ab", "zy", Distance::Near, Salience::High, Relation::Causal),
            item("wet", "ac", "zx", Distance::Near, Salience::Low, Relation::Compositional),
            item("day", "zz", "aa", Distance::Near, Salience::Low, Relation::Categorical),
            item("big", "ad", "zw", Distance::Far, Salience::High, Relation::Causal),
            item("old", "ae", "zv", Distance::Far, Salience::High, Relation::Compositional),
            item("far", "af", "zu", Distance::Far, Salience::Low, Relation::Categorical),
            item("tall", "zy", "ab", Distance::Far, Salience::Low, Relation::Causal),
        ];
        let report = evaluate_distractor(&scorer, &items).unwrap();
        assert!((report.accuracy("OVERALL", "overall").unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(report.accuracy("OVERALL", "high").unwrap(), 1.0);
        assert_eq!(report.accuracy("OVERALL", "low").unwrap(), 0.5);
        assert_eq!(report.accuracy("near", "overall").unwrap(), 0.75);
        assert_eq!(report.accuracy("far", "overall").unwrap(), 0.75);
        assert_eq!(report.accuracy("near-categorical", "overall").unwrap(), 0.5);
        assert_eq!(report.accuracy("far-causal", "low").unwrap(), 0.0);
    }

    #[test]
    fn distractor_swap_symmetry() {
        let scorer = |_: &str, _: &str, _: &str, d: &str| d.len() as f64;
        let original = item("up", "long", "no", Distance::Near, Salience::High, Relation::Causal);
        let mut swapped = original.clone();
        std::mem::swap(&mut swapped.d_correct, &mut swapped.d_distractor);
        let r1 = evaluate_distractor(&scorer, &[original]).unwrap();
        let r2 = evaluate_distractor(&scorer, &[swapped]).unwrap();
        let c1 = r1.cell("OVERALL", "overall").unwrap();
        let c2 = r2.cell("OVERALL", "overall").unwrap();
        assert_eq!(c1.numerator, 1);
        assert_eq!(c2.numerator, 0);
        assert_eq!(c1.denominator, c2.denominator);
    }

    #[test]
    fn distractor_rejects_equal_options() {
        let bad = item("up", "same", "same", Distance::Near, Salience::High, Relation::Causal);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn wordsim_skips_unembeddable_pairs() {
        let vocab = ["sun", "moon", "star", "sky", "sea"];
        let backend = StubBackend::new(
            8,
            7,
            StubTokenizer::new(vocab.iter().map(|s| s.to_string()), 3),
        );
        let pairs = vec![
            WordSimPair { w1: "sun".into(), w2: "moon".into(), gold: 7.0 },
            WordSimPair { w1: "star".into(), w2: "sky".into(), gold: 5.0 },
            WordSimPair { w1: "sea".into(), w2: "sun".into(), gold: 3.0 },
            WordSimPair { w1: "moon".into(), w2: "sky".into(), gold: 2.0 },
        ];
        let result = evaluate_wordsim(&backend, &pairs).unwrap();
        assert_eq!(result.n, 4);
        assert!(result.skipped.is_empty());
        assert!((-1.0..=1.0).contains(&result.rho));
    }

    #[test]
    fn wordsim_monotone_and_reversed() {
        struct Fixed;
        impl EmbeddingBackend for Fixed {
            fn dimension(&self) -> usize {
                2
            }
            fn kind(&self) -> crate::embedding::BackendKind {
                crate::embedding::BackendKind::Static
            }
            fn encode_pair(&self, a: &str, b: &str) -> Result<(Vec<f64>, Vec<f64>)> {
                Ok((self.encode_single_word(a)?, self.encode_single_word(b)?))
            }
            fn encode_single_word(&self, word: &str) -> Result<Vec<f64>> {
                // angle grows with the word's first byte
                let t = word.as_bytes()[0] as f64 / 100.0;
                Ok(vec![t.cos(), t.sin()])
            }
            fn is_oov(&self, _: &str) -> bool {
                false
            }
            fn piece_count(&self, _: &str) -> usize {
                1
            }
        }
        // model sim of ("a", x) decreases as x moves away from "a", so gold
        // ordered the same way gives rho = 1
        let pairs: Vec<WordSimPair> = [("b", 9.0), ("j", 6.0), ("r", 3.0), ("z", 1.0)]
            .iter()
            .map(|(w, g)| WordSimPair { w1: "a".into(), w2: w.to_string(), gold: *g })
            .collect();
        let result = evaluate_wordsim(&Fixed, &pairs).unwrap();
        assert!((result.rho - 1.0).abs() < 1e-12);
        let reversed: Vec<WordSimPair> = pairs
            .iter()
            .map(|p| WordSimPair { w1: p.w1.clone(), w2: p.w2.clone(), gold: 10.0 - p.gold })
            .collect();
        let result = evaluate_wordsim(&Fixed, &reversed).unwrap();
        assert!((result.rho + 1.0).abs() < 1e-12);
    }

    #[test]
    fn wordsim_gold_range_enforced() {
        let pair = WordSimPair { w1: "a".into(), w2: "b".into(), gold: 11.0 };
        assert!(pair.validate().is_err());
    }

    #[test]
    fn distractor_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("distractor.csv");
        let items = vec![
            item("up", "aa", "zz", Distance::Near, Salience::High, Relation::Categorical),
            item("in", "ab", "zy", Distance::Far, Salience::Low, Relation::Compositional),
        ];
        write_distractor_csv(&path, &items).unwrap();
        let back = read_distractor_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].d_correct, "aa");
        assert_eq!(back[1].distance, Distance::Far);
        assert_eq!(back[1].relation, Relation::Compositional);
    }
}
