//! Tab-separated reading and writing for click logs, gold sets and
//! labelled output.
//!
//! The corpus format is four headerless, tab-separated columns — query id,
//! query text, document id, clicked URL — and files run to tens of millions
//! of lines, so everything here streams. Labelled output repeats the four
//! input columns and appends the assigned labels.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::pipeline::LabeledRecord;
use crate::taxonomy::{IntentLabel, TopLevelLabel, UnknownLabel};
use thiserror::Error;

/// One click-log row: a query and the URL the user clicked for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryRecord {
    pub query_id: String,
    /// Lowercased query text, punctuation preserved.
    pub query: String,
    pub doc_id: String,
    pub url: String,
}

/// A manually labelled row from a gold file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldRecord {
    pub record: QueryRecord,
    pub gold_label: IntentLabel,
}

/// A row read back from a labelled output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledRow {
    pub record: QueryRecord,
    pub top_level: TopLevelLabel,
    pub final_label: IntentLabel,
}

/// A per-line failure delivered through a record stream.
#[derive(Debug, Error)]
pub enum RowError {
    #[error("line {line_no}: {reason}")]
    Malformed { line_no: usize, reason: String },
    #[error("read failed: {0}")]
    Io(#[from] io::Error),
}

/// A fatal problem in a gold or labelled file.
#[derive(Debug, Error)]
pub enum FileError {
    #[error("{file} line {line_no}: {reason}")]
    Malformed {
        file: String,
        line_no: usize,
        reason: String,
    },
    #[error("{file} line {line_no}: {source}")]
    UnknownLabel {
        file: String,
        line_no: usize,
        #[source]
        source: UnknownLabel,
    },
    #[error("reading {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: io::Error,
    },
}

/// Streams corpus rows from any buffered reader. Malformed lines are
/// yielded as errors and the stream continues; memory use is one line.
pub struct OrcasReader<R: BufRead> {
    source: R,
    line_no: usize,
    buf: String,
}

impl<R: BufRead> OrcasReader<R> {
    pub fn new(source: R) -> Self {
        OrcasReader {
            source,
            line_no: 0,
            buf: String::new(),
        }
    }
}

/// Opens a corpus file for streaming; `-` means standard input.
pub fn read_orcas_tsv(path: &str) -> io::Result<OrcasReader<Box<dyn BufRead>>> {
    Ok(OrcasReader::new(open_input(path)?))
}

impl<R: BufRead> Iterator for OrcasReader<R> {
    type Item = Result<QueryRecord, RowError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.buf.clear();
        match self.source.read_line(&mut self.buf) {
            Ok(0) => None,
            Ok(_) => {
                self.line_no += 1;
                let line = trim_line_ending(&self.buf);
                Some(
                    parse_record_line(line).map_err(|reason| RowError::Malformed {
                        line_no: self.line_no,
                        reason,
                    }),
                )
            }
            Err(e) => Some(Err(RowError::Io(e))),
        }
    }
}

fn trim_line_ending(buf: &str) -> &str {
    buf.strip_suffix('\n')
        .map(|s| s.strip_suffix('\r').unwrap_or(s))
        .unwrap_or(buf)
}

fn parse_record_line(line: &str) -> Result<QueryRecord, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 {
        return Err(format!(
            "expected 4 tab-separated columns, found {}",
            fields.len()
        ));
    }
    record_from_fields(&fields)
}

/// Builds a record from the first four columns of an already-split line.
fn record_from_fields(fields: &[&str]) -> Result<QueryRecord, String> {
    let [query_id, query, doc_id, url] = fields[..4] else {
        unreachable!("callers check the column count");
    };
    for (name, value) in [
        ("query_id", query_id),
        ("query", query),
        ("doc_id", doc_id),
        ("url", url),
    ] {
        if value.is_empty() {
            return Err(format!("empty {name} column"));
        }
    }
    // The corpus ships lowercased queries; normalize anyway so third-party
    // files behave identically.
    let query = if query.chars().any(char::is_uppercase) {
        query.to_lowercase()
    } else {
        query.to_string()
    };
    Ok(QueryRecord {
        query_id: query_id.to_string(),
        query,
        doc_id: doc_id.to_string(),
        url: url.to_string(),
    })
}

/// Reads a whole five-column gold file: the four corpus columns plus a
/// label name. Gold files are curated, so any defect is fatal.
pub fn read_gold_tsv(path: &str) -> Result<Vec<GoldRecord>, FileError> {
    let source = open_input(path).map_err(|source| FileError::Io {
        file: path.to_string(),
        source,
    })?;
    let mut records = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| FileError::Io {
            file: path.to_string(),
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(FileError::Malformed {
                file: path.to_string(),
                line_no,
                reason: format!("expected 5 tab-separated columns, found {}", fields.len()),
            });
        }
        let record = record_from_fields(&fields).map_err(|reason| FileError::Malformed {
            file: path.to_string(),
            line_no,
            reason,
        })?;
        let gold_label = fields[4]
            .trim()
            .parse()
            .map_err(|source| FileError::UnknownLabel {
                file: path.to_string(),
                line_no,
                source,
            })?;
        records.push(GoldRecord { record, gold_label });
    }
    Ok(records)
}

/// Reads rows written by [`LabeledTsvWriter`]: the four corpus columns,
/// the top-level label, the final label and optionally the votes column.
pub fn read_labeled_tsv(path: &str) -> Result<Vec<LabeledRow>, FileError> {
    let source = open_input(path).map_err(|source| FileError::Io {
        file: path.to_string(),
        source,
    })?;
    let mut rows = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let fail = |reason: String| FileError::Malformed {
            file: path.to_string(),
            line_no,
            reason,
        };
        let line = line.map_err(|source| FileError::Io {
            file: path.to_string(),
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 && fields.len() != 7 {
            return Err(fail(format!(
                "expected 6 or 7 tab-separated columns, found {}",
                fields.len()
            )));
        }
        let record = record_from_fields(&fields).map_err(fail)?;
        let top_level: TopLevelLabel =
            fields[4]
                .parse()
                .map_err(|source| FileError::UnknownLabel {
                    file: path.to_string(),
                    line_no,
                    source,
                })?;
        let final_label: IntentLabel =
            fields[5]
                .parse()
                .map_err(|source| FileError::UnknownLabel {
                    file: path.to_string(),
                    line_no,
                    source,
                })?;
        if crate::taxonomy::project_top_level(final_label) != top_level {
            return Err(fail(format!(
                "top-level column {top_level} does not match final label {final_label}"
            )));
        }
        rows.push(LabeledRow {
            record,
            top_level,
            final_label,
        });
    }
    Ok(rows)
}

/// Parses one annotated row in any accepted layout: gold format (four
/// corpus columns plus a label) or labelled-output format (plus top-level
/// and final label, optionally followed by the votes column). For gold
/// rows the top level is derived from the label; for labelled rows the
/// two label columns must agree.
pub fn parse_annotated_line(line: &str) -> Result<LabeledRow, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let parse_final = |field: &str| -> Result<IntentLabel, String> {
        field
            .trim()
            .parse()
            .map_err(|e: UnknownLabel| e.to_string())
    };
    match fields.len() {
        5 => {
            let record = record_from_fields(&fields)?;
            let final_label = parse_final(fields[4])?;
            Ok(LabeledRow {
                record,
                top_level: crate::taxonomy::project_top_level(final_label),
                final_label,
            })
        }
        6 | 7 => {
            let record = record_from_fields(&fields)?;
            let top_level: TopLevelLabel = fields[4]
                .trim()
                .parse()
                .map_err(|e: UnknownLabel| e.to_string())?;
            let final_label = parse_final(fields[5])?;
            if crate::taxonomy::project_top_level(final_label) != top_level {
                return Err(format!(
                    "top-level column {top_level} does not match final label {final_label}"
                ));
            }
            Ok(LabeledRow {
                record,
                top_level,
                final_label,
            })
        }
        n => Err(format!(
            "expected 5, 6 or 7 tab-separated columns, found {n}"
        )),
    }
}

/// Serializes labelled records: the four input columns, `top_level`,
/// `final_label`, and — when votes are kept — a `lf_id=label;...` column
/// listing every function that fired.
pub struct LabeledTsvWriter<W: Write> {
    sink: W,
    include_votes: bool,
    written: u64,
}

impl<W: Write> LabeledTsvWriter<W> {
    pub fn new(sink: W, include_votes: bool) -> Self {
        LabeledTsvWriter {
            sink,
            include_votes,
            written: 0,
        }
    }

    pub fn write_record(&mut self, labeled: &LabeledRecord) -> io::Result<()> {
        let r = &labeled.record;
        write!(
            self.sink,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.query_id, r.query, r.doc_id, r.url, labeled.top_level, labeled.final_label
        )?;
        if self.include_votes {
            self.sink.write_all(b"\t")?;
            let mut first = true;
            for vector in [&labeled.votes_l1, &labeled.votes_l2].into_iter().flatten() {
                for (id, label) in vector.fired() {
                    if !first {
                        self.sink.write_all(b";")?;
                    }
                    write!(self.sink, "{id}={label}")?;
                    first = false;
                }
            }
        }
        self.sink.write_all(b"\n")?;
        self.written += 1;
        Ok(())
    }

    /// Rows written so far.
    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.sink.flush()
    }

    pub fn into_inner(self) -> W {
        self.sink
    }
}

/// Writes every record and returns how many lines were emitted.
pub fn write_labeled_tsv<'a, W: Write>(
    sink: W,
    records: impl IntoIterator<Item = &'a LabeledRecord>,
    include_votes: bool,
) -> io::Result<u64> {
    let mut writer = LabeledTsvWriter::new(sink, include_votes);
    for record in records {
        writer.write_record(record)?;
    }
    writer.flush()?;
    Ok(writer.written())
}

/// Opens a buffered reader on a file, or standard input for `-`.
pub fn open_input(path: &str) -> io::Result<Box<dyn BufRead>> {
    if path == "-" {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        let file = File::open(Path::new(path))?;
        Ok(Box::new(BufReader::with_capacity(1 << 16, file)))
    }
}

/// Opens a buffered writer on a file, or standard output for `-`.
pub fn open_output(path: &str) -> io::Result<Box<dyn Write + Send>> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout())))
    } else {
        let file = File::create(Path::new(path))?;
        Ok(Box::new(BufWriter::with_capacity(1 << 16, file)))
    }
}

/// Reads a whole input into a string (used for small auxiliary files).
pub fn read_to_string(path: &str) -> io::Result<String> {
    let mut buf = String::new();
    open_input(path)?.read_to_string(&mut buf)?;
    Ok(buf)
}
