//! Corpus TSV and fold-file serialization.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::{assemble_corpus, AnalogyQuad, BalancedCorpus, FoldSplit, ScanSubtype, Source};
use crate::error::{Error, Result};

/// Write the corpus as UTF-8 TSV with a header row. Row order follows the
/// corpus, so output is byte-identical across runs for a fixed corpus.
pub fn write_corpus_tsv(corpus: &BalancedCorpus, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_writer(BufWriter::new(file));

    writer
        .write_record(["a", "b", "c", "d", "label", "source", "scan_subtype", "partner_id"])
        .map_err(|e| Error::Validation(e.to_string()))?;
    for q in &corpus.quads {
        writer
            .write_record([
                q.a.as_str(),
                q.b.as_str(),
                q.c.as_str(),
                q.d.as_str(),
                if q.label { "1" } else { "0" },
                q.source.as_str(),
                q.scan_subtype.map(|s| s.as_str()).unwrap_or(""),
                q.partner_id.as_deref().unwrap_or(""),
            ])
            .map_err(|e| Error::Validation(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_corpus_tsv(path: &Path) -> Result<BalancedCorpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .from_reader(BufReader::new(file));

    let mut quads = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            line: idx + 2,
            message: e.to_string(),
        })?;
        if row.len() != 8 {
            return Err(Error::Parse {
                line: idx + 2,
                message: format!("expected 8 columns, got {}", row.len()),
            });
        }
        let label = match &row[4] {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Parse {
                    line: idx + 2,
                    message: format!("label must be 0 or 1, got {other:?}"),
                })
            }
        };
        let source = Source::parse(&row[5]).map_err(|e| Error::Parse {
            line: idx + 2,
            message: e.to_string(),
        })?;
        let scan_subtype = match &row[6] {
            "" => None,
            "science" => Some(ScanSubtype::Science),
            "metaphor" => Some(ScanSubtype::Metaphor),
            other => {
                return Err(Error::Parse {
                    line: idx + 2,
                    message: format!("unknown scan_subtype {other:?}"),
                })
            }
        };
        let partner_id = if row[7].is_empty() {
            None
        } else {
            Some(row[7].to_string())
        };
        quads.push(AnalogyQuad::new(
            &row[0], &row[1], &row[2], &row[3], label, source, scan_subtype, partner_id,
        )?);
    }
    assemble_corpus(vec![quads])
}

pub fn write_fold_json(folds: &FoldSplit, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, folds)?;
    writer.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_fold_json(path: &Path) -> Result<FoldSplit> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}
