//! Source-file ingestion and negative generation.

use std::collections::HashSet;
use std::io::BufRead;

use rand::Rng;
use serde::Deserialize;

use crate::corpus::{AnalogyQuad, MultipleChoiceRecord, ScanSubtype, ScanTopicPair, Source};
use crate::error::{Error, Result};

const NEGATIVE_RETRY_LIMIT: usize = 10_000;

#[derive(Deserialize)]
struct McLine {
    stem: (String, String),
    choices: Vec<(String, String)>,
    answer: usize,
}

/// Parse a multiple-choice JSONL file: one question per line, order preserved.
pub fn parse_multiple_choice<R: BufRead>(
    reader: R,
    _source: Source,
) -> Result<Vec<MultipleChoiceRecord>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: McLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        let record = MultipleChoiceRecord {
            stem: parsed.stem,
            choices: parsed.choices,
            answer_index: parsed.answer,
        };
        record.validate().map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Turn one multiple-choice question into a positive quad (the correct
/// choice) and a negative quad (one uniformly sampled incorrect choice).
pub fn mc_to_quads<R: Rng>(
    record: &MultipleChoiceRecord,
    rng: &mut R,
    source: Source,
) -> Result<(AnalogyQuad, AnalogyQuad)> {
    record.validate()?;
    let (a, b) = &record.stem;
    let (c, d) = &record.choices[record.answer_index];
    let positive = AnalogyQuad::new(a, b, c, d, true, source, None, None)?;

    let incorrect: Vec<&(String, String)> = record
        .choices
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != record.answer_index)
        .map(|(_, pair)| pair)
        .collect();
    if incorrect.is_empty() {
        return Err(Error::Validation(
            "cannot form a negative from a single choice".into(),
        ));
    }
    let (nc, nd) = incorrect[rng.gen_range(0..incorrect.len())];
    let negative = AnalogyQuad::new(a, b, nc, nd, false, source, None, Some(positive.id()))?;
    Ok((positive, negative))
}

/// Remove from U4 every quad that also occurs in U2 (case-folded exact match
/// on (a,b,c,d)), then drop orphans so positives and negatives stay paired.
pub fn dedup_u4_against_u2(u2: &[AnalogyQuad], u4: Vec<AnalogyQuad>) -> Vec<AnalogyQuad> {
    let u2_keys: HashSet<_> = u2.iter().map(|q| q.dedup_key()).collect();
    let kept: Vec<AnalogyQuad> = u4
        .into_iter()
        .filter(|q| !u2_keys.contains(&q.dedup_key()))
        .collect();

    let kept_pos: HashSet<String> = kept.iter().filter(|q| q.label).map(|q| q.id()).collect();
    let kept_neg_partners: HashSet<String> = kept
        .iter()
        .filter(|q| !q.label)
        .filter_map(|q| q.partner_id.clone())
        .collect();
    kept.into_iter()
        .filter(|q| {
            if q.label {
                kept_neg_partners.contains(&q.id())
            } else {
                q.partner_id
                    .as_deref()
                    .map(|p| kept_pos.contains(p))
                    .unwrap_or(false)
            }
        })
        .collect()
}

#[derive(Deserialize)]
struct ScanLine {
    source: String,
    target: String,
    source_entities: Vec<String>,
    target_entities: Vec<String>,
    subtype: ScanSubtype,
}

/// Parse a SCAN topics JSONL file.
pub fn parse_scan_topics<R: BufRead>(reader: R) -> Result<Vec<ScanTopicPair>> {
    let mut topics = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ScanLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        let topic = ScanTopicPair {
            source_name: parsed.source,
            target_name: parsed.target,
            source_entities: parsed.source_entities,
            target_entities: parsed.target_entities,
            subtype: parsed.subtype,
        };
        topic.validate().map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        topics.push(topic);
    }
    Ok(topics)
}

/// Expand one SCAN topic into its C(n,2) positive quads, one per unordered
/// entity index pair, oriented source-entities-first.
pub fn expand_scan_topic(topic: &ScanTopicPair) -> Result<Vec<AnalogyQuad>> {
    topic.validate()?;
    let n = topic.source_entities.len();
    let mut quads = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            quads.push(AnalogyQuad::new(
                &topic.source_entities[i],
                &topic.source_entities[j],
                &topic.target_entities[i],
                &topic.target_entities[j],
                true,
                Source::Scan,
                Some(topic.subtype),
                None,
            )?);
        }
    }
    Ok(quads)
}

/// Create one negative per SCAN positive by reusing the intact (c,d) pair of
/// a different positive, resampling whenever the shuffle lands on a quad that
/// is itself a true positive.
pub fn generate_scan_negatives<R: Rng>(
    positives: &[AnalogyQuad],
    rng: &mut R,
) -> Result<Vec<AnalogyQuad>> {
    let positive_keys: HashSet<_> = positives.iter().map(|q| q.dedup_key()).collect();
    let distinct_cd: HashSet<(String, String)> = positives
        .iter()
        .map(|q| (q.c.to_lowercase(), q.d.to_lowercase()))
        .collect();
    if distinct_cd.len() < 2 {
        return Err(Error::Generation(
            "need at least 2 distinct (c,d) pairs".into(),
        ));
    }

    let mut negatives = Vec::with_capacity(positives.len());
    for (i, pos) in positives.iter().enumerate() {
        let mut found = None;
        for _ in 0..NEGATIVE_RETRY_LIMIT {
            let j = rng.gen_range(0..positives.len());
            if j == i {
                continue;
            }
            let candidate = AnalogyQuad::new(
                &pos.a,
                &pos.b,
                &positives[j].c,
                &positives[j].d,
                false,
                Source::Scan,
                pos.scan_subtype,
                Some(pos.id()),
            )?;
            if positive_keys.contains(&candidate.dedup_key()) {
                continue;
            }
            found = Some(candidate);
            break;
        }
        negatives.push(found.ok_or_else(|| {
            Error::Generation(format!(
                "exceeded {NEGATIVE_RETRY_LIMIT} resampling attempts for {}:{}::{}:{}",
                pos.a, pos.b, pos.c, pos.d
            ))
        })?);
    }
    Ok(negatives)
}
