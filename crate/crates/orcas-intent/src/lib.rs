//! Weak-supervision intent labelling for web-search click logs.
//!
//! Takes query–URL click pairs (tab-separated: query id, query text,
//! document id, clicked URL) and assigns each one a user-intent label
//! without any trained model: twenty deterministic rules vote, and a
//! two-level cascade combines the votes.
//!
//! * **Level one** — navigational (reach a site) vs. transactional
//!   (obtain or do something). Decided by URL/TLD shape, web-source words,
//!   query↔domain edit similarity, and download/media/interaction terms.
//! * **Level two** — runs only when level one abstains: factual
//!   (a specific fact) vs. instrumental (how to do something), via
//!   question words, stat/cost/number/definition/unit terms, how-to
//!   phrasing, verb-form cues, and clicks on reference or how-to sites.
//! * Records neither level can decide are labelled **abstain**; together
//!   with factual and instrumental they roll up to **informational**.
//!
//! ```
//! use orcas_intent::{IntentLabel, Labeler, QueryRecord};
//!
//! let labeler = Labeler::default_majority();
//! let record = QueryRecord {
//!     query_id: "42".into(),
//!     query: "how to tie a tie".into(),
//!     doc_id: "D1".into(),
//!     url: "https://www.wikihow.com/Tie-a-Tie".into(),
//! };
//! assert_eq!(labeler.label_record(record).final_label, IntentLabel::Instrumental);
//! ```
//!
//! [`Labeler::label_stream`] drives the same cascade over multi-million-row
//! logs with bounded memory and optional worker threads. [`eval`] scores
//! predictions against a hand-labelled gold set, [`stats`] summarises
//! corpora and label distributions, and [`aggregate`] fits per-rule
//! agreement weights as an alternative to plain majority voting.
//!
//! The `examples/` directory exercises each capability end to end:
//! labelling ad-hoc queries, streaming a file, evaluating against gold,
//! fitting agreement weights, corpus statistics, the URL-ablation
//! experiment, and vote-by-vote explanations.

pub mod aggregate;
pub mod config;
pub mod eval;
pub mod ingest;
pub mod lexicon;
pub mod pipeline;
pub mod rules;
pub mod stats;
pub mod taxonomy;
pub mod url;

pub use config::{Aggregator, RunConfig};
pub use eval::{cohen_kappa, evaluate, evaluate_top_level, EvalReport};
pub use ingest::{read_gold_tsv, read_orcas_tsv, GoldRecord, OrcasReader, QueryRecord};
pub use lexicon::LexiconSet;
pub use pipeline::{LabeledRecord, Labeler, RunSummary, StreamOptions, VoteCombiner};
pub use rules::{Registry, RuleParams};
pub use stats::{corpus_stats, label_distribution, CorpusStats, LabelDistribution};
pub use taxonomy::{IntentLabel, TopLevelLabel};
