//! The two-level labelling cascade and the streaming loop that drives it
//! over arbitrarily large click logs.
//!
//! Level one decides navigational vs. transactional. Records it leaves
//! undecided fall through to level two, which decides factual vs.
//! instrumental; records undecided there end as abstain. Streaming keeps
//! memory bounded regardless of input size: one reader, a configurable
//! number of stateless labelling workers, one writer.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use crate::aggregate::{majority_vote, weighted_vote, TiePolicy};
use crate::ingest::{LabeledTsvWriter, QueryRecord, RowError};
use crate::lexicon::LexiconSet;
use crate::rules::{QueryContext, Registry, RuleParams, VoteVector};
use crate::taxonomy::{project_top_level, IntentLabel, Level, LevelVote, TopLevelLabel};
use crate::url::parse_url;
use thiserror::Error;

/// How per-level votes are collapsed into one decision.
#[derive(Debug, Clone)]
pub enum VoteCombiner {
    Majority,
    /// Log-odds scoring with one weight per labelling function.
    Weighted(BTreeMap<String, f64>),
}

/// One fully labelled record.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord {
    pub record: QueryRecord,
    /// Level-one outcome; `NoVote` means the record fell through.
    pub level1: LevelVote,
    pub final_label: IntentLabel,
    pub top_level: TopLevelLabel,
    /// Per-function votes, retained only when the run asks for them.
    pub votes_l1: Option<VoteVector>,
    pub votes_l2: Option<VoteVector>,
}

impl LabeledRecord {
    pub fn new(
        record: QueryRecord,
        final_label: IntentLabel,
        votes_l1: Option<VoteVector>,
        votes_l2: Option<VoteVector>,
    ) -> Self {
        let level1 = match final_label {
            IntentLabel::Navigational | IntentLabel::Transactional => LevelVote::Label(final_label),
            _ => LevelVote::NoVote,
        };
        LabeledRecord {
            level1,
            final_label,
            top_level: project_top_level(final_label),
            record,
            votes_l1,
            votes_l2,
        }
    }
}

#[derive(Debug, Error)]
pub enum LabelerError {
    #[error("weighted aggregation has no weight for labelling function {0:?}")]
    MissingWeight(String),
}

/// A configured, immutable labelling engine; shared freely across threads.
#[derive(Debug, Clone)]
pub struct Labeler {
    registry: Registry,
    lexicons: LexiconSet,
    params: RuleParams,
    combiner: VoteCombiner,
    keep_votes: bool,
}

impl Labeler {
    pub fn new(
        registry: Registry,
        lexicons: LexiconSet,
        params: RuleParams,
        combiner: VoteCombiner,
        keep_votes: bool,
    ) -> Result<Self, LabelerError> {
        if let VoteCombiner::Weighted(weights) = &combiner {
            for id in registry.ids() {
                if !weights.contains_key(id) {
                    return Err(LabelerError::MissingWeight(id.to_string()));
                }
            }
        }
        Ok(Labeler {
            registry,
            lexicons,
            params,
            combiner,
            keep_votes,
        })
    }

    /// Majority-voting labeler with the default rules and bundled lexicons.
    pub fn default_majority() -> Self {
        Labeler::new(
            Registry::default_set(),
            LexiconSet::bundled(),
            RuleParams::default(),
            VoteCombiner::Majority,
            false,
        )
        .expect("majority voting needs no weights")
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn lexicons(&self) -> &LexiconSet {
        &self.lexicons
    }

    /// Keep per-function votes on every labelled record.
    pub fn keep_votes(mut self, keep: bool) -> Self {
        self.keep_votes = keep;
        self
    }

    fn combine(&self, votes: &VoteVector) -> LevelVote {
        match &self.combiner {
            VoteCombiner::Majority => majority_vote(votes, TiePolicy::AbstainOnTie).label,
            VoteCombiner::Weighted(weights) => {
                weighted_vote(votes, weights)
                    .expect("weights validated at construction")
                    .label
            }
        }
    }

    /// Runs the cascade on one record. Level two is only evaluated when
    /// level one abstains; unparseable URLs degrade to query-only rules.
    pub fn label_record(&self, record: QueryRecord) -> LabeledRecord {
        let url = parse_url(&record.url, &self.lexicons.tld_suffixes).ok();
        let ctx = QueryContext::new(&record.query, url.as_ref());
        let votes_l1 = self.registry.apply_level(
            &record.query_id,
            &ctx,
            Level::One,
            &self.lexicons,
            &self.params,
        );
        if let LevelVote::Label(label) = self.combine(&votes_l1) {
            let kept = self.keep_votes.then_some(votes_l1);
            return LabeledRecord::new(record, label, kept, None);
        }
        let votes_l2 = self.registry.apply_level(
            &record.query_id,
            &ctx,
            Level::Two,
            &self.lexicons,
            &self.params,
        );
        let final_label = match self.combine(&votes_l2) {
            LevelVote::Label(label) => label,
            LevelVote::NoVote => IntentLabel::Abstain,
        };
        let (kept1, kept2) = if self.keep_votes {
            (Some(votes_l1), Some(votes_l2))
        } else {
            (None, None)
        };
        LabeledRecord::new(record, final_label, kept1, kept2)
    }

    /// Labels an entire stream. Malformed rows are counted and skipped;
    /// source or sink I/O failures abort the run.
    pub fn label_stream<I, S>(
        &self,
        source: I,
        sink: &mut S,
        options: &StreamOptions,
    ) -> Result<RunSummary, StreamError>
    where
        I: Iterator<Item = Result<QueryRecord, RowError>>,
        S: RecordSink + Send,
    {
        let started = Instant::now();
        let outcome = if options.workers <= 1 {
            self.run_serial(source, sink)
        } else {
            self.run_parallel(source, sink, options)
        }?;
        Ok(outcome.into_summary(started))
    }

    fn run_serial<I, S>(&self, source: I, sink: &mut S) -> Result<Tallies, StreamError>
    where
        I: Iterator<Item = Result<QueryRecord, RowError>>,
        S: RecordSink,
    {
        let mut tallies = Tallies::default();
        for item in source {
            match item {
                Ok(record) => {
                    let labeled = self.label_record(record);
                    sink.write_record(&labeled)
                        .map_err(|source| StreamError::Sink {
                            written: tallies.written,
                            source,
                        })?;
                    tallies.count(labeled.final_label);
                }
                Err(RowError::Malformed { .. }) => tallies.malformed += 1,
                Err(RowError::Io(source)) => {
                    return Err(StreamError::Source {
                        records_read: tallies.written,
                        source,
                    })
                }
            }
        }
        Ok(tallies)
    }

    fn run_parallel<I, S>(
        &self,
        mut source: I,
        sink: &mut S,
        options: &StreamOptions,
    ) -> Result<Tallies, StreamError>
    where
        I: Iterator<Item = Result<QueryRecord, RowError>>,
        S: RecordSink + Send,
    {
        let workers = options.workers;
        let chunk_size = options.chunk_size.max(1);
        let (chunk_tx, chunk_rx) = crossbeam_channel::bounded::<Vec<QueryRecord>>(workers * 2);
        let (out_tx, out_rx) = crossbeam_channel::bounded::<Vec<LabeledRecord>>(workers * 2);
        let abort = AtomicBool::new(false);

        let mut malformed = 0u64;
        let mut source_error: Option<io::Error> = None;

        let writer_result = std::thread::scope(|scope| {
            for _ in 0..workers {
                let rx = chunk_rx.clone();
                let tx = out_tx.clone();
                scope.spawn(move || {
                    for chunk in rx.iter() {
                        let labeled: Vec<LabeledRecord> =
                            chunk.into_iter().map(|r| self.label_record(r)).collect();
                        if tx.send(labeled).is_err() {
                            break; // writer gone; unwind quietly
                        }
                    }
                });
            }
            // The spawning thread keeps the originals; drop them so the
            // channels close once reader and workers finish.
            drop(chunk_rx);
            drop(out_tx);

            let writer = scope.spawn(|| -> Result<Tallies, (u64, io::Error)> {
                let mut tallies = Tallies::default();
                // After a sink error the loop keeps draining (without
                // writing) until every worker disconnects, so blocked
                // senders can always make progress.
                let mut failure: Option<(u64, io::Error)> = None;
                for chunk in out_rx.iter() {
                    if failure.is_some() {
                        continue;
                    }
                    for labeled in &chunk {
                        if let Err(e) = sink.write_record(labeled) {
                            abort.store(true, Ordering::Relaxed);
                            failure = Some((tallies.written, e));
                            break;
                        }
                        tallies.count(labeled.final_label);
                    }
                }
                match failure {
                    Some(err) => Err(err),
                    None => Ok(tallies),
                }
            });

            // This thread is the reader.
            let mut buffer = Vec::with_capacity(chunk_size);
            loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                match source.next() {
                    Some(Ok(record)) => {
                        buffer.push(record);
                        if buffer.len() == chunk_size {
                            let full =
                                std::mem::replace(&mut buffer, Vec::with_capacity(chunk_size));
                            if chunk_tx.send(full).is_err() {
                                break;
                            }
                        }
                    }
                    Some(Err(RowError::Malformed { .. })) => malformed += 1,
                    Some(Err(RowError::Io(e))) => {
                        source_error = Some(e);
                        break;
                    }
                    None => break,
                }
            }
            if !buffer.is_empty() && !abort.load(Ordering::Relaxed) {
                let _ = chunk_tx.send(buffer);
            }
            drop(chunk_tx);

            writer.join().expect("writer thread never panics")
        });

        match writer_result {
            Err((written, source)) => Err(StreamError::Sink { written, source }),
            Ok(mut tallies) => {
                if let Some(source) = source_error {
                    return Err(StreamError::Source {
                        records_read: tallies.written,
                        source,
                    });
                }
                tallies.malformed = malformed;
                Ok(tallies)
            }
        }
    }
}

/// Anything that can receive labelled records.
pub trait RecordSink {
    fn write_record(&mut self, record: &LabeledRecord) -> io::Result<()>;
}

impl<W: Write> RecordSink for LabeledTsvWriter<W> {
    fn write_record(&mut self, record: &LabeledRecord) -> io::Result<()> {
        LabeledTsvWriter::write_record(self, record)
    }
}

/// Collecting sink for in-memory use.
impl RecordSink for Vec<LabeledRecord> {
    fn write_record(&mut self, record: &LabeledRecord) -> io::Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamOptions {
    /// Labelling threads; 1 runs everything on the calling thread and
    /// preserves input order in the output.
    pub workers: usize,
    /// Records handed to a worker at a time.
    pub chunk_size: usize,
}

impl Default for StreamOptions {
    fn default() -> Self {
        StreamOptions {
            workers: 1,
            chunk_size: 1024,
        }
    }
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("reading input failed after {records_read} records: {source}")]
    Source {
        records_read: u64,
        source: io::Error,
    },
    #[error("writing output failed after {written} records: {source}")]
    Sink { written: u64, source: io::Error },
}

#[derive(Debug, Default)]
struct Tallies {
    counts: [u64; IntentLabel::ALL.len()],
    written: u64,
    malformed: u64,
}

impl Tallies {
    fn count(&mut self, label: IntentLabel) {
        self.counts[label.index()] += 1;
        self.written += 1;
    }

    fn into_summary(self, started: Instant) -> RunSummary {
        let elapsed = started.elapsed().as_secs_f64();
        let records_per_sec = if elapsed > 0.0 {
            self.written as f64 / elapsed
        } else {
            0.0
        };
        RunSummary {
            counts: self.counts,
            malformed: self.malformed,
            elapsed_secs: elapsed,
            records_per_sec,
        }
    }
}

/// What a labelling run did: per-label counts, skipped rows, throughput.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    counts: [u64; IntentLabel::ALL.len()],
    pub malformed: u64,
    pub elapsed_secs: f64,
    pub records_per_sec: f64,
}

impl RunSummary {
    pub fn count(&self, label: IntentLabel) -> u64 {
        self.counts[label.index()]
    }

    /// Records labelled (excludes malformed rows).
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn write_human(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(
            w,
            "labelled {} records in {:.1}s ({:.0} records/sec)",
            self.total(),
            self.elapsed_secs,
            self.records_per_sec
        )?;
        for label in IntentLabel::ALL {
            let n = self.count(label);
            let share = if self.total() > 0 {
                100.0 * n as f64 / self.total() as f64
            } else {
                0.0
            };
            writeln!(w, "  {label:<14} {n:>12}  {share:5.1}%")?;
        }
        if self.malformed > 0 {
            writeln!(w, "  skipped {} malformed rows", self.malformed)?;
        }
        Ok(())
    }

    pub fn write_machine(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "total={}", self.total())?;
        for label in IntentLabel::ALL {
            writeln!(w, "{label}={}", self.count(label))?;
        }
        writeln!(w, "malformed={}", self.malformed)?;
        writeln!(w, "elapsed_secs={:.3}", self.elapsed_secs)?;
        writeln!(w, "records_per_sec={:.0}", self.records_per_sec)?;
        Ok(())
    }
}
