//! Deterministic fixture generators: source files shaped like the real
//! datasets for pipeline checks, and a synthetic offset-structured space for
//! end-to-end training tests.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::corpus::{assemble_corpus, AnalogyQuad, BalancedCorpus, ScanSubtype, Source};
use crate::embedding::StaticBackend;
use crate::error::{Error, Result};
use crate::evaluation::{Distance, DistractorItem, Relation, Salience};

pub const SAT_QUESTIONS: usize = 374;
pub const U2_QUESTIONS: usize = 252;
pub const U4_QUESTIONS: usize = 380;
pub const U4_DUPLICATES: usize = 28;
/// Entity counts whose pair expansions sum to 1487 positives:
/// 22 * C(12,2) + C(8,2) + C(4,2) + C(2,2 choose) = 1452 + 28 + 6 + 1.
pub const SCAN_TOPIC_SIZES: [(usize, usize); 4] = [(12, 22), (8, 1), (4, 1), (2, 1)];

#[derive(Debug, Clone)]
pub struct FixturePaths {
    pub sat: PathBuf,
    pub u2: PathBuf,
    pub u4: PathBuf,
    pub scan: PathBuf,
    pub frequency: PathBuf,
    pub wordsim: PathBuf,
    pub distractor: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn write_mc_file<R: Rng>(
    path: &Path,
    prefix: &str,
    questions: usize,
    choices: usize,
    rng: &mut R,
) -> Result<Vec<serde_json::Value>> {
    let mut out = create(path)?;
    let mut lines = Vec::with_capacity(questions);
    for q in 0..questions {
        let choice_pairs: Vec<[String; 2]> = (0..choices)
            .map(|k| {
                [
                    format!("{prefix}q{q}c{k}x"),
                    format!("{prefix}q{q}c{k}y"),
                ]
            })
            .collect();
        let line = json!({
            "stem": [format!("{prefix}q{q}a"), format!("{prefix}q{q}b")],
            "choices": choice_pairs,
            "answer": rng.gen_range(0..choices),
        });
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
        lines.push(line);
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(lines)
}

/// Write all seven fixture files into `dir`. The multiple-choice files and
/// SCAN topics match the real datasets' record counts, including the 28 U4
/// questions that duplicate U2 questions verbatim.
pub fn write_source_fixtures(dir: &Path, seed: u64) -> Result<FixturePaths> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths = FixturePaths {
        sat: dir.join("sat.jsonl"),
        u2: dir.join("u2.jsonl"),
        u4: dir.join("u4.jsonl"),
        scan: dir.join("scan.jsonl"),
        frequency: dir.join("frequency.tsv"),
        wordsim: dir.join("wordsim.csv"),
        distractor: dir.join("distractor.csv"),
    };

    write_mc_file(&paths.sat, "sat", SAT_QUESTIONS, 5, &mut rng)?;
    let u2_lines = write_mc_file(&paths.u2, "u2", U2_QUESTIONS, 4, &mut rng)?;

    // U4: the first U4_DUPLICATES questions repeat U2 questions verbatim so
    // the dedup stage removes them; the rest are unique.
    {
        let mut out = create(&paths.u4)?;
        for line in u2_lines.iter().take(U4_DUPLICATES) {
            writeln!(out, "{line}").map_err(|e| Error::io(&paths.u4, e))?;
        }
        let fresh = U4_QUESTIONS - U4_DUPLICATES;
        let mut tail_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7533);
        let tmp = dir.join("u4_fresh.jsonl");
        let fresh_lines = write_mc_file(&tmp, "u4", fresh, 4, &mut tail_rng)?;
        std::fs::remove_file(&tmp).map_err(|e| Error::io(&tmp, e))?;
        for line in fresh_lines {
            writeln!(out, "{line}").map_err(|e| Error::io(&paths.u4, e))?;
        }
        out.flush().map_err(|e| Error::io(&paths.u4, e))?;
    }

    {
        let mut out = create(&paths.scan)?;
        let mut topic_index = 0usize;
        for (n, count) in SCAN_TOPIC_SIZES {
            for _ in 0..count {
                let subtype = if topic_index % 2 == 0 {
                    "science"
                } else {
                    "metaphor"
                };
                let source_entities: Vec<String> =
                    (0..n).map(|i| format!("t{topic_index}s{i}")).collect();
                let target_entities: Vec<String> =
                    (0..n).map(|i| format!("t{topic_index}g{i}")).collect();
                let line = json!({
                    "source": format!("domain{topic_index}src"),
                    "target": format!("domain{topic_index}tgt"),
                    "source_entities": source_entities,
                    "target_entities": target_entities,
                    "subtype": subtype,
                });
                writeln!(out, "{line}").map_err(|e| Error::io(&paths.scan, e))?;
                topic_index += 1;
            }
        }
        out.flush().map_err(|e| Error::io(&paths.scan, e))?;
    }

    write_frequency_fixture(&paths.frequency, seed)?;
    write_wordsim_fixture(&paths.wordsim)?;
    crate::evaluation::write_distractor_csv(&paths.distractor, &distractor_fixture_items())?;
    Ok(paths)
}

/// Frequency counts for every fixture term plus the wordsim vocabulary.
/// Counts are deterministic in the word and mostly below 100,000, with a
/// tail above the histogram cap.
fn write_frequency_fixture(path: &Path, seed: u64) -> Result<()> {
    let mut out = create(path)?;
    let mut words: Vec<String> = Vec::new();
    for q in 0..SAT_QUESTIONS {
        words.push(format!("satq{q}a"));
        words.push(format!("satq{q}b"));
        for k in 0..5 {
            words.push(format!("satq{q}c{k}x"));
            words.push(format!("satq{q}c{k}y"));
        }
    }
    for (prefix, questions) in [("u2", U2_QUESTIONS), ("u4", U4_QUESTIONS - U4_DUPLICATES)] {
        for q in 0..questions {
            words.push(format!("{prefix}q{q}a"));
            words.push(format!("{prefix}q{q}b"));
            for k in 0..4 {
                words.push(format!("{prefix}q{q}c{k}x"));
                words.push(format!("{prefix}q{q}c{k}y"));
            }
        }
    }
    let mut topic_index = 0usize;
    for (n, count) in SCAN_TOPIC_SIZES {
        for _ in 0..count {
            for i in 0..n {
                words.push(format!("t{topic_index}s{i}"));
                words.push(format!("t{topic_index}g{i}"));
            }
            topic_index += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf4e9);
    for word in words {
        // roughly 1 in 10 words lands above the 100,000 histogram cap
        let count: u64 = if rng.gen_range(0..10) == 0 {
            rng.gen_range(100_000..1_000_000)
        } else {
            rng.gen_range(1..100_000)
        };
        writeln!(out, "{word}\t{count}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Word pairs drawn from the first SCAN topic's entities so trainable
/// backends built on the corpus vocabulary can embed them.
fn write_wordsim_fixture(path: &Path) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "word1,word2,gold_score").map_err(|e| Error::io(path, e))?;
    for i in 0..10 {
        let gold = 9.0 - 0.8 * i as f64;
        writeln!(out, "t0s{i},t0g{i},{gold}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// 24 items covering every (distance, salience, relation) combination
/// twice. Terms come from the first two SCAN topics (12 entities each) so
/// corpus-vocabulary backends can embed them.
pub fn distractor_fixture_items() -> Vec<DistractorItem> {
    let mut items = Vec::new();
    let mut idx = 0usize;
    for distance in [Distance::Near, Distance::Far] {
        for salience in [Salience::High, Salience::Low] {
            for relation in [Relation::Categorical, Relation::Causal, Relation::Compositional] {
                for _ in 0..2 {
                    let topic = idx % 2;
                    let i = idx % 12;
                    let j = (idx + 3) % 12;
                    let k = (idx + 7) % 12;
                    items.push(DistractorItem {
                        a: format!("t{topic}s{i}"),
                        b: format!("t{topic}g{i}"),
                        c: format!("t{topic}s{j}"),
                        d_correct: format!("t{topic}g{j}"),
                        d_distractor: format!("t{topic}g{k}"),
                        distance,
                        salience,
                        relation,
                    });
                    idx += 1;
                }
            }
        }
    }
    items
}

/// A word space where each relation is one fixed offset vector: for pair i
/// of relation r, vec(b) = vec(a) + offset_r + noise with noise drawn at
/// sigma = 0.05 * |offset_r| per coordinate direction.
#[derive(Debug, Clone)]
pub struct SyntheticSpace {
    pub dim: usize,
    pub relations: usize,
    pub pairs_per_relation: usize,
    pub vectors: HashMap<String, Vec<f64>>,
    /// pair_words[r][i] = (a-word, b-word) of pair i in relation r
    pub pair_words: Vec<Vec<(String, String)>>,
}

pub const SYNTHETIC_NOISE_FACTOR: f64 = 0.05;

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; u1 in (0,1] avoids ln(0)
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

impl SyntheticSpace {
    pub fn generate(relations: usize, pairs_per_relation: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vectors = HashMap::new();
        let mut pair_words = Vec::with_capacity(relations);
        for r in 0..relations {
            let offset: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = offset.iter().map(|v| v * v).sum::<f64>().sqrt();
            let sigma = SYNTHETIC_NOISE_FACTOR * norm;
            let mut pairs = Vec::with_capacity(pairs_per_relation);
            for i in 0..pairs_per_relation {
                let a_word = format!("r{r}a{i}");
                let b_word = format!("r{r}b{i}");
                let a_vec: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let b_vec: Vec<f64> = a_vec
                    .iter()
                    .zip(&offset)
                    .map(|(a, o)| a + o + sigma * gaussian(&mut rng))
                    .collect();
                vectors.insert(a_word.clone(), a_vec);
                vectors.insert(b_word.clone(), b_vec);
                pairs.push((a_word, b_word));
            }
            pair_words.push(pairs);
        }
        SyntheticSpace {
            dim,
            relations,
            pairs_per_relation,
            vectors,
            pair_words,
        }
    }

    /// Static backend over the true synthetic vectors.
    pub fn static_backend(&self) -> Result<StaticBackend> {
        StaticBackend::new(self.dim, self.vectors.clone(), None)
    }
}

/// Balanced corpus over the synthetic space. Positives join each pair with
/// its two ring successors inside the same relation; each negative keeps the
/// positive's (a,b) and reverses its (c,d), so a consistent offset direction
/// separates the labels.
pub fn synthetic_corpus(space: &SyntheticSpace) -> Result<BalancedCorpus> {
    let p = space.pairs_per_relation;
    if p < 5 {
        return Err(Error::Validation(
            "need at least 5 pairs per relation for distinct ring positives".into(),
        ));
    }
    if space.relations < 2 {
        return Err(Error::Validation("need at least 2 relations".into()));
    }
    let mut positives: Vec<(usize, AnalogyQuad)> = Vec::new();
    for (r, pairs) in space.pair_words.iter().enumerate() {
        for i in 0..p {
            for step in [1, 2] {
                let (a, b) = &pairs[i];
                let (c, d) = &pairs[(i + step) % p];
                positives.push((
                    r,
                    AnalogyQuad::new(
                        a,
                        b,
                        c,
                        d,
                        true,
                        Source::Scan,
                        Some(ScanSubtype::Science),
                        None,
                    )?,
                ));
            }
        }
    }
    let mut quads = Vec::with_capacity(positives.len() * 2);
    for (_, pos) in &positives {
        quads.push(AnalogyQuad::new(
            &pos.a,
            &pos.b,
            &pos.d,
            &pos.c,
            false,
            Source::Scan,
            Some(ScanSubtype::Science),
            Some(pos.id()),
        )?);
    }
    quads.extend(positives.into_iter().map(|(_, q)| q));
    assemble_corpus(vec![quads])
}
