//! Word and site lists that parameterize the labelling functions.
//!
//! Every list is configuration, not code: a lexicon is a plain UTF-8 text
//! file with one entry per line, `#` comments and blank lines ignored.
//! Entries are trimmed, lowercased and deduplicated at load time. A bundled
//! default set is compiled into the crate; `load_lexicon_set` reads a
//! replacement set from a directory laid out as `<dir>/<name>.txt`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

/// How a lexicon's entries are tested against a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    /// An entry matches iff it equals a whole token; multi-word entries match
    /// a contiguous run of tokens.
    TokenExact,
    /// An entry matches iff it occurs anywhere in the raw query string.
    SubstringAnywhere,
    /// An entry matches iff the first token(s) of the query equal it.
    PrefixOfQuery,
}

/// What shape the entries of a lexicon must have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EntryKind {
    /// Free-form words or phrases.
    Word,
    /// Registrable domain names: at least one dot, no scheme, no path.
    Domain,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("missing lexicon {0:?} (expected file {0}.txt)")]
    MissingLexicon(&'static str),
    #[error("lexicon {0:?} has no entries")]
    EmptyLexicon(&'static str),
    #[error("malformed entry in {file} line {line_no}: {reason}")]
    MalformedEntry {
        file: String,
        line_no: usize,
        reason: String,
    },
    #[error("lexicon {name:?} needs at least {need} entries, found {have}")]
    TooFewEntries {
        name: &'static str,
        need: usize,
        have: usize,
    },
    #[error("reading {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

/// An immutable, validated word list plus its matching mode.
#[derive(Debug, Clone)]
pub struct Lexicon {
    name: &'static str,
    mode: MatchMode,
    entries: BTreeSet<String>,
    /// One-token entries, for O(1) token lookups.
    single: HashSet<String>,
    /// Multi-token entries, pre-split.
    multi: Vec<Vec<String>>,
    /// If every entry starts with the same char, queries lacking that char
    /// can be rejected without scanning (substring mode fast path).
    common_first: Option<char>,
}

impl PartialEq for Lexicon {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.mode == other.mode && self.entries == other.entries
    }
}

impl Eq for Lexicon {}

impl Lexicon {
    fn from_entries(name: &'static str, mode: MatchMode, entries: BTreeSet<String>) -> Self {
        let mut single = HashSet::new();
        let mut multi = Vec::new();
        for entry in &entries {
            let words: Vec<String> = entry.split_whitespace().map(str::to_owned).collect();
            if words.len() == 1 {
                single.insert(entry.clone());
            } else {
                multi.push(words);
            }
        }
        let mut firsts = entries.iter().filter_map(|e| e.chars().next());
        let common_first = match firsts.next() {
            Some(first) if firsts.all(|c| c == first) => Some(first),
            _ => None,
        };
        Lexicon {
            name,
            mode,
            entries,
            single,
            multi,
            common_first,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn mode(&self) -> MatchMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    /// Exact entry membership, independent of the match mode.
    pub fn contains_entry(&self, entry: &str) -> bool {
        if entry.contains(' ') {
            self.entries.contains(entry)
        } else {
            self.single.contains(entry)
        }
    }

    /// Tests the lexicon against a query under its match mode. `raw` is the
    /// normalized (lowercased) query, `tokens` its whitespace tokenization.
    pub fn matches(&self, tokens: &[&str], raw: &str) -> bool {
        match self.mode {
            MatchMode::TokenExact => {
                tokens.iter().any(|t| self.single.contains(*t))
                    || self.multi.iter().any(|entry| contains_run(tokens, entry))
            }
            MatchMode::SubstringAnywhere => {
                if let Some(c) = self.common_first {
                    if !raw.contains(c) {
                        return false;
                    }
                }
                self.entries.iter().any(|e| raw.contains(e.as_str()))
            }
            MatchMode::PrefixOfQuery => {
                if let Some(first) = tokens.first() {
                    if self.single.contains(*first) {
                        return true;
                    }
                }
                self.multi.iter().any(|entry| leads_with(tokens, entry))
            }
        }
    }
}

fn contains_run(tokens: &[&str], entry: &[String]) -> bool {
    if entry.len() > tokens.len() {
        return false;
    }
    tokens
        .windows(entry.len())
        .any(|w| w.iter().zip(entry).all(|(t, e)| *t == e))
}

fn leads_with(tokens: &[&str], entry: &[String]) -> bool {
    entry.len() <= tokens.len() && tokens.iter().zip(entry).all(|(t, e)| *t == e)
}

/// Free-function form of [`Lexicon::matches`].
pub fn lexicon_matches(lexicon: &Lexicon, query_tokens: &[&str], query_raw: &str) -> bool {
    lexicon.matches(query_tokens, query_raw)
}

macro_rules! lexicon_set {
    ($( $field:ident : $mode:expr, $kind:expr, $min:expr ; )+) => {
        /// The full set of lexicons the labelling functions draw from.
        /// Immutable after load; shared freely across labelling workers.
        #[derive(Debug, Clone, PartialEq, Eq)]
        pub struct LexiconSet {
            $( pub $field: Lexicon, )+
        }

        /// Name, match mode, entry shape and minimum size of every required
        /// lexicon.
        const REQUIRED: &[(&str, MatchMode, EntryKind, usize)] = &[
            $( (stringify!($field), $mode, $kind, $min), )+
        ];

        impl LexiconSet {
            fn from_loader(
                mut load: impl FnMut(&'static str, MatchMode, EntryKind, usize) -> Result<Lexicon, LexiconError>,
            ) -> Result<Self, LexiconError> {
                Ok(LexiconSet {
                    $( $field: load(stringify!($field), $mode, $kind, $min)?, )+
                })
            }

            /// Every lexicon in declaration order.
            pub fn all(&self) -> Vec<&Lexicon> {
                vec![ $( &self.$field, )+ ]
            }

            /// Names of the files a lexicon directory must provide
            /// (without the `.txt` extension).
            pub fn required_names() -> impl Iterator<Item = &'static str> {
                REQUIRED.iter().map(|(name, _, _, _)| *name)
            }
        }

        /// Bundled default contents, embedded at compile time.
        const BUNDLED: &[(&str, &str)] = &[
            $( (stringify!($field), include_str!(concat!("../lexicons/", stringify!($field), ".txt"))), )+
        ];
    };
}

lexicon_set! {
    verbs_infinitive: MatchMode::TokenExact, EntryKind::Word, 850;
    tld_suffixes: MatchMode::SubstringAnywhere, EntryKind::Word, 1;
    web_source_terms: MatchMode::TokenExact, EntryKind::Word, 1;
    download_terms: MatchMode::TokenExact, EntryKind::Word, 1;
    media_terms: MatchMode::TokenExact, EntryKind::Word, 1;
    interact_entertainment_terms: MatchMode::TokenExact, EntryKind::Word, 1;
    question_words_factual: MatchMode::TokenExact, EntryKind::Word, 1;
    question_starters_factual: MatchMode::PrefixOfQuery, EntryKind::Word, 1;
    fact_stat_terms: MatchMode::TokenExact, EntryKind::Word, 1;
    cost_price_terms: MatchMode::TokenExact, EntryKind::Word, 1;
    number_replaceable_terms: MatchMode::TokenExact, EntryKind::Word, 1;
    definition_terms: MatchMode::TokenExact, EntryKind::Word, 1;
    howto_terms: MatchMode::TokenExact, EntryKind::Word, 1;
    unit_terms: MatchMode::TokenExact, EntryKind::Word, 1;
    factual_sites: MatchMode::TokenExact, EntryKind::Domain, 1;
    instructional_sites: MatchMode::TokenExact, EntryKind::Domain, 1;
}

impl LexiconSet {
    /// The defaults shipped with the crate.
    pub fn bundled() -> LexiconSet {
        LexiconSet::from_loader(|name, mode, kind, min| {
            let text = BUNDLED
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, t)| *t)
                .expect("bundled lexicon present");
            parse_lexicon(name, &format!("bundled:{name}.txt"), text, mode, kind, min)
        })
        .expect("bundled lexicons are valid")
    }

    /// Loads a full set from `<directory>/<name>.txt` files.
    pub fn load(directory: impl AsRef<Path>) -> Result<LexiconSet, LexiconError> {
        let dir = directory.as_ref();
        LexiconSet::from_loader(|name, mode, kind, min| {
            let path = dir.join(format!("{name}.txt"));
            if !path.is_file() {
                return Err(LexiconError::MissingLexicon(name));
            }
            let text = fs::read_to_string(&path).map_err(|source| LexiconError::Io {
                file: path.display().to_string(),
                source,
            })?;
            parse_lexicon(name, &path.display().to_string(), &text, mode, kind, min)
        })
    }
}

/// Free-function form of [`LexiconSet::load`].
pub fn load_lexicon_set(directory: impl AsRef<Path>) -> Result<LexiconSet, LexiconError> {
    LexiconSet::load(directory)
}

fn parse_lexicon(
    name: &'static str,
    file: &str,
    text: &str,
    mode: MatchMode,
    kind: EntryKind,
    min: usize,
) -> Result<Lexicon, LexiconError> {
    let mut entries = BTreeSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let entry = line.to_lowercase();
        validate_entry(&entry, kind).map_err(|reason| LexiconError::MalformedEntry {
            file: file.to_string(),
            line_no: idx + 1,
            reason,
        })?;
        entries.insert(entry);
    }
    if entries.is_empty() {
        return Err(LexiconError::EmptyLexicon(name));
    }
    if entries.len() < min {
        return Err(LexiconError::TooFewEntries {
            name,
            need: min,
            have: entries.len(),
        });
    }
    Ok(Lexicon::from_entries(name, mode, entries))
}

fn validate_entry(entry: &str, kind: EntryKind) -> Result<(), String> {
    if entry.chars().any(char::is_control) {
        return Err("entry contains control characters".into());
    }
    if kind == EntryKind::Domain {
        if !entry.contains('.') {
            return Err(format!("{entry:?} is not a domain name (no dot)"));
        }
        if entry.contains('/') || entry.contains(':') || entry.contains(char::is_whitespace) {
            return Err(format!(
                "{entry:?} must be a bare domain, no scheme or path"
            ));
        }
    }
    Ok(())
}

impl fmt::Display for Lexicon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} entries)", self.name, self.entries.len())
    }
}
