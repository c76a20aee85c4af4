//! Corpus-level statistics: row and uniqueness counts over a click log,
//! and the final label distribution of a labelled run.
//!
//! Unique counting is exact by default (hash sets of the actual strings).
//! For corpora too large for that, an approximate mode swaps every set
//! for a HyperLogLog sketch (~0.8% relative error, ~16 KiB each); results
//! are flagged so nobody mistakes an estimate for a census.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::io::{self, Write};

use crate::ingest::{QueryRecord, RowError};
use crate::lexicon::Lexicon;
use crate::taxonomy::{IntentLabel, TopLevelLabel};
use crate::url::parse_url;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("cannot summarise an empty stream")]
    EmptyInput,
    #[error(transparent)]
    Row(#[from] RowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountingMode {
    #[default]
    Exact,
    /// HyperLogLog sketches instead of exact sets.
    Approximate,
}

/// HyperLogLog cardinality sketch with 2^14 registers.
///
/// Standard estimator with the usual small-range (linear counting)
/// correction; the 64-bit hash makes large-range correction moot at any
/// scale this crate will meet. Merging takes the register-wise max, so
/// sketches built over disjoint shards combine associatively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperLogLog {
    registers: Vec<u8>,
}

const HLL_PRECISION: u32 = 14;
const HLL_REGISTERS: usize = 1 << HLL_PRECISION;

impl HyperLogLog {
    pub fn new() -> Self {
        HyperLogLog {
            registers: vec![0u8; HLL_REGISTERS],
        }
    }

    pub fn insert(&mut self, item: &str) {
        let mut hasher = DefaultHasher::new();
        item.hash(&mut hasher);
        let h = hasher.finish();
        let idx = (h >> (64 - HLL_PRECISION)) as usize;
        let rest = h << HLL_PRECISION;
        let rank = (rest.leading_zeros() + 1).min(64 - HLL_PRECISION + 1) as u8;
        if rank > self.registers[idx] {
            self.registers[idx] = rank;
        }
    }

    pub fn merge(&mut self, other: &HyperLogLog) {
        for (mine, theirs) in self.registers.iter_mut().zip(&other.registers) {
            *mine = (*mine).max(*theirs);
        }
    }

    pub fn estimate(&self) -> u64 {
        let m = HLL_REGISTERS as f64;
        let alpha = 0.7213 / (1.0 + 1.079 / m);
        let sum: f64 = self
            .registers
            .iter()
            .map(|&r| 1.0 / f64::from(1u32 << u32::from(r)))
            .sum();
        let raw = alpha * m * m / sum;
        let zeros = self.registers.iter().filter(|&&r| r == 0).count();
        let corrected = if raw <= 2.5 * m && zeros > 0 {
            m * (m / zeros as f64).ln()
        } else {
            raw
        };
        corrected.round() as u64
    }
}

impl Default for HyperLogLog {
    fn default() -> Self {
        HyperLogLog::new()
    }
}

#[derive(Debug, Clone)]
enum UniqueCounter {
    Exact(HashSet<String>),
    Approximate(HyperLogLog),
}

impl UniqueCounter {
    fn new(mode: CountingMode) -> Self {
        match mode {
            CountingMode::Exact => UniqueCounter::Exact(HashSet::new()),
            CountingMode::Approximate => UniqueCounter::Approximate(HyperLogLog::new()),
        }
    }

    fn insert(&mut self, item: &str) {
        match self {
            UniqueCounter::Exact(set) => {
                if !set.contains(item) {
                    set.insert(item.to_string());
                }
            }
            UniqueCounter::Approximate(hll) => hll.insert(item),
        }
    }

    fn count(&self) -> u64 {
        match self {
            UniqueCounter::Exact(set) => set.len() as u64,
            UniqueCounter::Approximate(hll) => hll.estimate(),
        }
    }

    fn merge(&mut self, other: UniqueCounter) {
        match (self, other) {
            (UniqueCounter::Exact(a), UniqueCounter::Exact(b)) => a.extend(b),
            (UniqueCounter::Approximate(a), UniqueCounter::Approximate(b)) => a.merge(&b),
            _ => panic!("cannot merge exact and approximate counters"),
        }
    }
}

/// Corpus summary in the shape of the upstream dataset description:
/// row count, uniqueness counts, mean query length, duplicate pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    pub n_rows: u64,
    pub n_unique_queries: u64,
    pub n_unique_urls: u64,
    pub n_unique_domains: u64,
    pub n_unique_query_words: u64,
    /// Mean whitespace-token count per row. Stored in thousandths to keep
    /// the struct `Eq`-comparable; see [`CorpusStats::mean_query_length_words`].
    mean_length_milli: u64,
    pub n_duplicate_pairs: u64,
    pub approximate: bool,
}

impl CorpusStats {
    pub fn mean_query_length_words(&self) -> f64 {
        self.mean_length_milli as f64 / 1000.0
    }

    pub fn write_human(&self, mut w: impl Write) -> io::Result<()> {
        if self.approximate {
            writeln!(w, "(unique counts are HyperLogLog estimates)")?;
        }
        writeln!(w, "rows                 {:>12}", self.n_rows)?;
        writeln!(w, "unique queries       {:>12}", self.n_unique_queries)?;
        writeln!(w, "unique urls          {:>12}", self.n_unique_urls)?;
        writeln!(w, "unique domains       {:>12}", self.n_unique_domains)?;
        writeln!(w, "unique query words   {:>12}", self.n_unique_query_words)?;
        writeln!(
            w,
            "mean query length    {:>12.2}",
            self.mean_query_length_words()
        )?;
        writeln!(w, "duplicate pairs      {:>12}", self.n_duplicate_pairs)?;
        Ok(())
    }

    pub fn write_machine(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "rows={}", self.n_rows)?;
        writeln!(w, "unique_queries={}", self.n_unique_queries)?;
        writeln!(w, "unique_urls={}", self.n_unique_urls)?;
        writeln!(w, "unique_domains={}", self.n_unique_domains)?;
        writeln!(w, "unique_query_words={}", self.n_unique_query_words)?;
        writeln!(w, "mean_query_length={:.3}", self.mean_query_length_words())?;
        writeln!(w, "duplicate_pairs={}", self.n_duplicate_pairs)?;
        writeln!(w, "approximate={}", self.approximate)?;
        Ok(())
    }
}

/// Streaming accumulator behind [`corpus_stats`]. Shards can be counted
/// independently and merged, provided every shard uses the same mode.
#[derive(Debug, Clone)]
pub struct CorpusAccumulator {
    mode: CountingMode,
    n_rows: u64,
    token_total: u64,
    queries: UniqueCounter,
    urls: UniqueCounter,
    domains: UniqueCounter,
    words: UniqueCounter,
    pairs: UniqueCounter,
}

impl CorpusAccumulator {
    pub fn new(mode: CountingMode) -> Self {
        CorpusAccumulator {
            mode,
            n_rows: 0,
            token_total: 0,
            queries: UniqueCounter::new(mode),
            urls: UniqueCounter::new(mode),
            domains: UniqueCounter::new(mode),
            words: UniqueCounter::new(mode),
            pairs: UniqueCounter::new(mode),
        }
    }

    pub fn add(&mut self, record: &QueryRecord, tld_suffixes: &Lexicon) {
        self.n_rows += 1;
        self.queries.insert(&record.query);
        self.urls.insert(&record.url);
        if let Ok(parsed) = parse_url(&record.url, tld_suffixes) {
            self.domains.insert(&parsed.registrable_domain);
        }
        for token in record.query.split_whitespace() {
            self.token_total += 1;
            self.words.insert(token);
        }
        let pair = format!("{}\t{}", record.query, record.url);
        self.pairs.insert(&pair);
    }

    pub fn merge(&mut self, other: CorpusAccumulator) {
        assert_eq!(self.mode, other.mode, "cannot merge mixed counting modes");
        self.n_rows += other.n_rows;
        self.token_total += other.token_total;
        self.queries.merge(other.queries);
        self.urls.merge(other.urls);
        self.domains.merge(other.domains);
        self.words.merge(other.words);
        self.pairs.merge(other.pairs);
    }

    pub fn finish(self) -> CorpusStats {
        let mean_milli = if self.n_rows == 0 {
            0
        } else {
            (1000.0 * self.token_total as f64 / self.n_rows as f64).round() as u64
        };
        CorpusStats {
            n_rows: self.n_rows,
            n_unique_queries: self.queries.count(),
            n_unique_urls: self.urls.count(),
            n_unique_domains: self.domains.count(),
            n_unique_query_words: self.words.count(),
            mean_length_milli: mean_milli,
            n_duplicate_pairs: self.n_rows - self.pairs.count().min(self.n_rows),
            approximate: self.mode == CountingMode::Approximate,
        }
    }
}

/// Summarises a record stream. Ingest errors (malformed rows, I/O) are
/// propagated rather than skipped: statistics over a silently truncated
/// corpus would be worse than no statistics.
pub fn corpus_stats<I>(
    source: I,
    tld_suffixes: &Lexicon,
    mode: CountingMode,
) -> Result<CorpusStats, StatsError>
where
    I: Iterator<Item = Result<QueryRecord, RowError>>,
{
    let mut acc = CorpusAccumulator::new(mode);
    for item in source {
        acc.add(&item?, tld_suffixes);
    }
    Ok(acc.finish())
}

/// Final-label shares of a labelled run, with the informational roll-up
/// (factual + instrumental + abstain).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelDistribution {
    counts: [u64; IntentLabel::ALL.len()],
    pub n: u64,
}

impl LabelDistribution {
    pub fn count(&self, label: IntentLabel) -> u64 {
        self.counts[label.index()]
    }

    pub fn fraction(&self, label: IntentLabel) -> f64 {
        self.count(label) as f64 / self.n as f64
    }

    pub fn top_level_fraction(&self, label: TopLevelLabel) -> f64 {
        match label {
            TopLevelLabel::Navigational => self.fraction(IntentLabel::Navigational),
            TopLevelLabel::Transactional => self.fraction(IntentLabel::Transactional),
            TopLevelLabel::Informational => self.informational_fraction(),
        }
    }

    pub fn informational_fraction(&self) -> f64 {
        self.fraction(IntentLabel::Factual)
            + self.fraction(IntentLabel::Instrumental)
            + self.fraction(IntentLabel::Abstain)
    }

    pub fn write_human(&self, mut w: impl Write) -> io::Result<()> {
        let row = |label: IntentLabel| (label.to_string(), self.fraction(label));
        writeln!(w, "{:<16} {:>8}", "label", "share")?;
        for label in [IntentLabel::Navigational, IntentLabel::Transactional] {
            let (name, frac) = row(label);
            writeln!(w, "{name:<16} {:>7.2}%", 100.0 * frac)?;
        }
        writeln!(
            w,
            "{:<16} {:>7.2}%",
            "informational",
            100.0 * self.informational_fraction()
        )?;
        for label in [
            IntentLabel::Factual,
            IntentLabel::Instrumental,
            IntentLabel::Abstain,
        ] {
            let (name, frac) = row(label);
            writeln!(w, "  {name:<14} {:>7.2}%", 100.0 * frac)?;
        }
        writeln!(w, "{:<16} {:>8}", "records", self.n)?;
        Ok(())
    }

    pub fn write_machine(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "n={}", self.n)?;
        for label in IntentLabel::ALL {
            writeln!(w, "{label}={:.4}", self.fraction(label))?;
        }
        writeln!(w, "informational={:.4}", self.informational_fraction())?;
        Ok(())
    }
}

pub fn label_distribution<I>(labels: I) -> Result<LabelDistribution, StatsError>
where
    I: IntoIterator<Item = IntentLabel>,
{
    let mut counts = [0u64; IntentLabel::ALL.len()];
    for label in labels {
        counts[label.index()] += 1;
    }
    LabelDistribution::from_counts(counts)
}

impl LabelDistribution {
    /// Builds a distribution from per-label counts indexed by
    /// [`IntentLabel::index`], for callers that tallied while streaming.
    pub fn from_counts(counts: [u64; IntentLabel::ALL.len()]) -> Result<Self, StatsError> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(StatsError::EmptyInput);
        }
        Ok(LabelDistribution { counts, n })
    }
}
