//! Corpus assembly: dataset ingestion, negative generation, balancing,
//! 10-fold splits and analogy permutations.

mod ingest;
mod io;

pub use ingest::{
    dedup_u4_against_u2, expand_scan_topic, generate_scan_negatives, mc_to_quads,
    parse_multiple_choice, parse_scan_topics,
};
pub use io::{
    read_corpus_tsv, read_fold_json, write_corpus_tsv, write_fold_json,
};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "SAT")]
    Sat,
    #[serde(rename = "U2")]
    U2,
    #[serde(rename = "U4")]
    U4,
    #[serde(rename = "SCAN")]
    Scan,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Sat => "SAT",
            Source::U2 => "U2",
            Source::U4 => "U4",
            Source::Scan => "SCAN",
        }
    }

    pub fn parse(s: &str) -> Result<Source> {
        match s {
            "SAT" => Ok(Source::Sat),
            "U2" => Ok(Source::U2),
            "U4" => Ok(Source::U4),
            "SCAN" => Ok(Source::Scan),
            other => Err(Error::Validation(format!("unknown source {other:?}"))),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanSubtype {
    Science,
    Metaphor,
}

impl ScanSubtype {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScanSubtype::Science => "science",
            ScanSubtype::Metaphor => "metaphor",
        }
    }
}

/// One a:b::c:d instance. Term strings are whitespace-normalized at
/// construction; `partner_id` links a negative to the positive it was
/// derived from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyQuad {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub label: bool,
    pub source: Source,
    pub scan_subtype: Option<ScanSubtype>,
    pub partner_id: Option<String>,
}

/// Collapse internal whitespace and trim.
pub fn normalize_term(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl AnalogyQuad {
    pub fn new(
        a: &str,
        b: &str,
        c: &str,
        d: &str,
        label: bool,
        source: Source,
        scan_subtype: Option<ScanSubtype>,
        partner_id: Option<String>,
    ) -> Result<Self> {
        let quad = AnalogyQuad {
            a: normalize_term(a),
            b: normalize_term(b),
            c: normalize_term(c),
            d: normalize_term(d),
            label,
            source,
            scan_subtype,
            partner_id,
        };
        quad.validate()?;
        Ok(quad)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, term) in [("a", &self.a), ("b", &self.b), ("c", &self.c), ("d", &self.d)] {
            if term.is_empty() {
                return Err(Error::Validation(format!("empty term {name}")));
            }
        }
        if (self.source == Source::Scan) != self.scan_subtype.is_some() {
            return Err(Error::Validation(
                "scan_subtype must be present iff source is SCAN".into(),
            ));
        }
        Ok(())
    }

    /// Stable content-derived identifier. The corpus invariant that
    /// (a, b, c, d, label) tuples are unique makes this collision-free.
    pub fn id(&self) -> String {
        let mut hasher = Sha256::new();
        for part in [&self.a, &self.b, &self.c, &self.d] {
            hasher.update(part.as_bytes());
            hasher.update([0u8]);
        }
        hasher.update([self.label as u8]);
        hex::encode(&hasher.finalize()[..6])
    }

    pub fn terms(&self) -> [&str; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// Case-folded dedup key.
    pub fn dedup_key(&self) -> (String, String, String, String) {
        (
            self.a.to_lowercase(),
            self.b.to_lowercase(),
            self.c.to_lowercase(),
            self.d.to_lowercase(),
        )
    }

    pub fn category(&self) -> &'static str {
        self.source.as_str()
    }
}

/// Multiple-choice question as found in the SAT/U2/U4 source files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultipleChoiceRecord {
    pub stem: (String, String),
    pub choices: Vec<(String, String)>,
    pub answer_index: usize,
}

impl MultipleChoiceRecord {
    pub fn validate(&self) -> Result<()> {
        if self.choices.len() < 2 {
            return Err(Error::Validation("need at least 2 choices".into()));
        }
        if self.answer_index >= self.choices.len() {
            return Err(Error::Validation(format!(
                "answer_index {} out of range for {} choices",
                self.answer_index,
                self.choices.len()
            )));
        }
        Ok(())
    }
}

/// Aligned source/target entity lists for one SCAN topic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanTopicPair {
    pub source_name: String,
    pub target_name: String,
    pub source_entities: Vec<String>,
    pub target_entities: Vec<String>,
    pub subtype: ScanSubtype,
}

impl ScanTopicPair {
    pub fn validate(&self) -> Result<()> {
        if self.source_entities.len() != self.target_entities.len() {
            return Err(Error::Validation(format!(
                "topic {}->{}: misaligned entity lists ({} vs {})",
                self.source_name,
                self.target_name,
                self.source_entities.len(),
                self.target_entities.len()
            )));
        }
        if self.source_entities.len() < 2 {
            return Err(Error::Validation(format!(
                "topic {}->{}: need at least 2 entities",
                self.source_name, self.target_name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalancedCorpus {
    pub quads: Vec<AnalogyQuad>,
    pub per_source_counts: BTreeMap<Source, (usize, usize)>,
}

impl BalancedCorpus {
    pub fn len(&self) -> usize {
        self.quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn by_id(&self) -> HashMap<String, &AnalogyQuad> {
        self.quads.iter().map(|q| (q.id(), q)).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldSplit {
    pub k: usize,
    pub assignments: BTreeMap<String, usize>,
}

impl FoldSplit {
    pub fn fold_of(&self, quad_id: &str) -> Option<usize> {
        self.assignments.get(quad_id).copied()
    }
}

/// Concatenate the per-source parts, check the balance invariant and record
/// per-source counts.
pub fn assemble_corpus(parts: Vec<Vec<AnalogyQuad>>) -> Result<BalancedCorpus> {
    let quads: Vec<AnalogyQuad> = parts.into_iter().flatten().collect();

    let mut seen: HashSet<(String, String, String, String, bool)> = HashSet::new();
    for q in &quads {
        q.validate()?;
        let key = (q.a.clone(), q.b.clone(), q.c.clone(), q.d.clone(), q.label);
        if !seen.insert(key) {
            return Err(Error::Validation(format!(
                "duplicate quad {}:{}::{}:{} label={}",
                q.a, q.b, q.c, q.d, q.label
            )));
        }
    }

    let ids: HashSet<String> = quads.iter().filter(|q| q.label).map(|q| q.id()).collect();
    let mut partnered: HashSet<String> = HashSet::new();
    for q in &quads {
        if !q.label {
            let partner = q.partner_id.as_deref().ok_or_else(|| {
                Error::Validation(format!("negative {} has no partner_id", q.id()))
            })?;
            if !ids.contains(partner) {
                return Err(Error::Validation(format!(
                    "negative {} references missing positive {partner}",
                    q.id()
                )));
            }
            partnered.insert(partner.to_string());
        }
    }

    let mut per_source_counts: BTreeMap<Source, (usize, usize)> = BTreeMap::new();
    for q in &quads {
        let entry = per_source_counts.entry(q.source).or_insert((0, 0));
        if q.label {
            entry.0 += 1;
            if !partnered.contains(&q.id()) {
                return Err(Error::Validation(format!(
                    "positive {} ({}) has no negative partner",
                    q.id(),
                    q.source
                )));
            }
        } else {
            entry.1 += 1;
        }
    }
    for (source, (pos, neg)) in &per_source_counts {
        if pos != neg {
            return Err(Error::Validation(format!(
                "source {source} is imbalanced: {pos} positives vs {neg} negatives"
            )));
        }
    }

    Ok(BalancedCorpus {
        quads,
        per_source_counts,
    })
}

/// Randomly partition the positives into `k` near-equal folds and place every
/// negative in its partner's fold. Remainders go round-robin to the
/// lowest-index folds.
pub fn make_folds<R: Rng>(corpus: &BalancedCorpus, k: usize, rng: &mut R) -> Result<FoldSplit> {
    if k <= 1 {
        return Err(Error::Config(format!("fold count must be > 1, got {k}")));
    }

    let mut positive_ids: Vec<String> = corpus
        .quads
        .iter()
        .filter(|q| q.label)
        .map(|q| q.id())
        .collect();
    positive_ids.shuffle(rng);

    let n = positive_ids.len();
    let base = n / k;
    let rem = n % k;

    let mut assignments: BTreeMap<String, usize> = BTreeMap::new();
    let mut cursor = 0usize;
    for fold in 0..k {
        let take = base + usize::from(fold < rem);
        for id in &positive_ids[cursor..cursor + take] {
            assignments.insert(id.clone(), fold);
        }
        cursor += take;
    }

    for q in &corpus.quads {
        if !q.label {
            let partner = q.partner_id.as_deref().unwrap_or_default();
            let fold = *assignments.get(partner).ok_or_else(|| {
                Error::Validation(format!("negative {} has unassigned partner", q.id()))
            })?;
            assignments.insert(q.id(), fold);
        }
    }

    Ok(FoldSplit { k, assignments })
}

/// Reorder the quad's terms according to one of the 8 valid analogy
/// permutations. Index 1 is the identity; the label is preserved.
pub fn permute_analogy(quad: &AnalogyQuad, index: u8) -> Result<AnalogyQuad> {
    let (a, b, c, d) = (&quad.a, &quad.b, &quad.c, &quad.d);
    let (pa, pb, pc, pd) = match index {
        1 => (a, b, c, d),
        2 => (b, a, d, c),
        3 => (c, d, a, b),
        4 => (d, c, b, a),
        5 => (a, c, b, d),
        6 => (c, a, d, b),
        7 => (b, d, a, c),
        8 => (d, b, c, a),
        other => {
            return Err(Error::Validation(format!(
                "permutation index must be 1..8, got {other}"
            )))
        }
    };
    Ok(AnalogyQuad {
        a: pa.clone(),
        b: pb.clone(),
        c: pc.clone(),
        d: pd.clone(),
        label: quad.label,
        source: quad.source,
        scan_subtype: quad.scan_subtype,
        partner_id: quad.partner_id.clone(),
    })
}
