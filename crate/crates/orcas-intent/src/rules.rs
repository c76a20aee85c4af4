//! The labelling functions: deterministic heuristics that each look at one
//! aspect of a query (or its clicked URL) and either vote for one intent
//! label or stay silent.
//!
//! Functions are grouped in two levels. Level one separates navigational
//! and transactional queries; level two splits the informational remainder
//! into factual and instrumental. A function never votes outside its level.

use crate::lexicon::{Lexicon, LexiconSet};
use crate::taxonomy::{IntentLabel, Level, LevelVote};
use crate::url::{navigational_similarity, ParsedUrl};
use thiserror::Error;

/// Everything a labelling function may look at for one record, computed
/// once per record and shared by all functions.
#[derive(Debug, Clone)]
pub struct QueryContext<'a> {
    /// Normalized (lowercased) query text, punctuation preserved.
    pub query: &'a str,
    /// Whitespace tokenization of the query.
    pub tokens: Vec<&'a str>,
    /// The clicked URL, if it could be parsed; URL-based functions stay
    /// silent when this is `None`.
    pub url: Option<&'a ParsedUrl>,
}

impl<'a> QueryContext<'a> {
    pub fn new(query: &'a str, url: Option<&'a ParsedUrl>) -> Self {
        QueryContext {
            query,
            tokens: query.split_whitespace().collect(),
            url,
        }
    }

    fn first_token(&self) -> Option<&'a str> {
        self.tokens.first().copied()
    }
}

/// Tunables the functions read. Kept separate from the full run
/// configuration so the engine has no dependency on I/O concerns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleParams {
    /// Minimum query↔domain similarity for a navigational vote.
    pub nav_threshold: f64,
}

impl Default for RuleParams {
    fn default() -> Self {
        RuleParams {
            nav_threshold: 0.55,
        }
    }
}

type Predicate = fn(&QueryContext, &LexiconSet, &RuleParams) -> bool;

/// One heuristic: fires [`LevelVote::Label`] with its target label when the
/// predicate holds, [`LevelVote::NoVote`] otherwise.
#[derive(Clone)]
pub struct LabelingFunction {
    pub id: &'static str,
    pub level: Level,
    pub target: IntentLabel,
    /// True for functions that read the clicked URL; these are the ones
    /// silenced by the query-only configuration.
    pub uses_url: bool,
    predicate: Predicate,
}

impl LabelingFunction {
    pub fn vote(
        &self,
        ctx: &QueryContext,
        lexicons: &LexiconSet,
        params: &RuleParams,
    ) -> LevelVote {
        if (self.predicate)(ctx, lexicons, params) {
            LevelVote::Label(self.target)
        } else {
            LevelVote::NoVote
        }
    }
}

impl std::fmt::Debug for LabelingFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LabelingFunction")
            .field("id", &self.id)
            .field("level", &self.level)
            .field("target", &self.target)
            .field("uses_url", &self.uses_url)
            .finish()
    }
}

/// The votes of every registered function of one level on one record, in
/// registry order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteVector {
    pub record_id: String,
    pub level: Level,
    pub votes: Vec<(&'static str, LevelVote)>,
}

impl VoteVector {
    /// The non-silent votes.
    pub fn fired(&self) -> impl Iterator<Item = (&'static str, IntentLabel)> + '_ {
        self.votes.iter().filter_map(|(id, v)| match v {
            LevelVote::Label(l) => Some((*id, *l)),
            LevelVote::NoVote => None,
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("no labelling function named {0:?}")]
    UnknownFunction(String),
}

/// The ordered set of active labelling functions.
#[derive(Debug, Clone)]
pub struct Registry {
    functions: Vec<LabelingFunction>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::default_set()
    }
}

impl Registry {
    /// All twenty default functions: 4 navigational + 3 transactional
    /// (level one), 9 factual + 4 instrumental (level two).
    pub fn default_set() -> Registry {
        let f = |id, level, target, uses_url, predicate| LabelingFunction {
            id,
            level,
            target,
            uses_url,
            predicate,
        };
        use IntentLabel::*;
        use Level::*;
        Registry {
            functions: vec![
                f("nav_tld_suffix", One, Navigational, false, nav_tld_suffix),
                f("nav_www_token", One, Navigational, false, nav_www_token),
                f("nav_web_source", One, Navigational, false, nav_web_source),
                f("nav_levenshtein", One, Navigational, true, nav_levenshtein),
                f("trans_download", One, Transactional, false, trans_download),
                f("trans_media", One, Transactional, false, trans_media),
                f("trans_interact", One, Transactional, false, trans_interact),
                f(
                    "fact_question_word_contained",
                    Two,
                    Factual,
                    false,
                    fact_question_word_contained,
                ),
                f(
                    "fact_question_starter",
                    Two,
                    Factual,
                    false,
                    fact_question_starter,
                ),
                f("fact_stat_terms", Two, Factual, false, fact_stat_terms),
                f("fact_cost_terms", Two, Factual, false, fact_cost_terms),
                f("fact_number_terms", Two, Factual, false, fact_number_terms),
                f(
                    "fact_definition_terms",
                    Two,
                    Factual,
                    false,
                    fact_definition_terms,
                ),
                f("fact_site_click", Two, Factual, true, fact_site_click),
                f("fact_wh_start", Two, Factual, false, fact_wh_start),
                f("fact_unit_terms", Two, Factual, false, fact_unit_terms),
                f("instr_howto", Two, Instrumental, false, instr_howto),
                f(
                    "instr_infinitive_start",
                    Two,
                    Instrumental,
                    false,
                    instr_infinitive_start,
                ),
                f("instr_ing_start", Two, Instrumental, false, instr_ing_start),
                f(
                    "instr_site_click",
                    Two,
                    Instrumental,
                    true,
                    instr_site_click,
                ),
            ],
        }
    }

    pub fn functions(&self) -> &[LabelingFunction] {
        &self.functions
    }

    pub fn level_functions(&self, level: Level) -> impl Iterator<Item = &LabelingFunction> {
        self.functions.iter().filter(move |f| f.level == level)
    }

    pub fn ids(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.functions.iter().map(|f| f.id)
    }

    /// Removes one function by id.
    pub fn disable(&mut self, id: &str) -> Result<(), RegistryError> {
        let before = self.functions.len();
        self.functions.retain(|f| f.id != id);
        if self.functions.len() == before {
            return Err(RegistryError::UnknownFunction(id.to_string()));
        }
        Ok(())
    }

    /// Removes every URL-reading function, leaving the query-only rules.
    pub fn mute_url_functions(&mut self) {
        self.functions.retain(|f| !f.uses_url);
    }

    /// Runs every function of `level` against one record.
    pub fn apply_level(
        &self,
        record_id: &str,
        ctx: &QueryContext,
        level: Level,
        lexicons: &LexiconSet,
        params: &RuleParams,
    ) -> VoteVector {
        let votes = self
            .level_functions(level)
            .map(|f| (f.id, f.vote(ctx, lexicons, params)))
            .collect();
        VoteVector {
            record_id: record_id.to_string(),
            level,
            votes,
        }
    }
}

// ---- level one: navigational ----

fn nav_tld_suffix(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.tld_suffixes.matches(&ctx.tokens, ctx.query)
}

fn nav_www_token(ctx: &QueryContext, _: &LexiconSet, _: &RuleParams) -> bool {
    ctx.query.starts_with("www")
        || ctx
            .tokens
            .iter()
            .any(|t| *t == "www" || t.starts_with("www."))
}

fn nav_web_source(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.web_source_terms.matches(&ctx.tokens, ctx.query)
}

fn nav_levenshtein(ctx: &QueryContext, _: &LexiconSet, params: &RuleParams) -> bool {
    match ctx.url {
        Some(url) => navigational_similarity(ctx.query, url)
            .map(|s| s >= params.nav_threshold)
            .unwrap_or(false),
        None => false,
    }
}

// ---- level one: transactional ----

fn trans_download(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.download_terms.matches(&ctx.tokens, ctx.query)
}

fn trans_media(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.media_terms.matches(&ctx.tokens, ctx.query)
}

fn trans_interact(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.interact_entertainment_terms
        .matches(&ctx.tokens, ctx.query)
}

// ---- level two: factual ----

fn fact_question_word_contained(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.question_words_factual.matches(&ctx.tokens, ctx.query)
}

fn fact_question_starter(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.question_starters_factual
        .matches(&ctx.tokens, ctx.query)
}

fn fact_stat_terms(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.fact_stat_terms.matches(&ctx.tokens, ctx.query)
}

fn fact_cost_terms(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.cost_price_terms.matches(&ctx.tokens, ctx.query)
}

fn fact_number_terms(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.number_replaceable_terms.matches(&ctx.tokens, ctx.query)
}

fn fact_definition_terms(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.definition_terms.matches(&ctx.tokens, ctx.query)
}

fn fact_site_click(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    domain_in(ctx.url, &lex.factual_sites)
}

fn fact_wh_start(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    ctx.first_token()
        .is_some_and(|t| lex.question_words_factual.contains_entry(t))
}

fn fact_unit_terms(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.unit_terms.matches(&ctx.tokens, ctx.query)
}

// ---- level two: instrumental ----

fn instr_howto(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    lex.howto_terms.matches(&ctx.tokens, ctx.query)
}

fn instr_infinitive_start(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    // An auxiliary-led query ("do ants sleep") is a question, not an
    // imperative, even though "do" sits in the verb list; yielding to the
    // question-starter list stands in for the part-of-speech distinction.
    ctx.first_token().is_some_and(|t| {
        lex.verbs_infinitive.contains_entry(t) && !lex.question_starters_factual.contains_entry(t)
    })
}

fn instr_ing_start(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    ctx.first_token()
        .is_some_and(|t| deinflect_ing(t, &lex.verbs_infinitive).is_some())
}

fn instr_site_click(ctx: &QueryContext, lex: &LexiconSet, _: &RuleParams) -> bool {
    domain_in(ctx.url, &lex.instructional_sites)
}

/// True when the clicked registrable domain equals a lexicon entry or sits
/// under one ("es.wikipedia.org" matches "wikipedia.org"). The site lists
/// mix apex domains and subdomains, so both directions are needed.
fn domain_in(url: Option<&ParsedUrl>, sites: &Lexicon) -> bool {
    let Some(url) = url else { return false };
    let domain = url.registrable_domain.as_str();
    sites.iter().any(|entry| {
        domain == entry
            || (domain.len() > entry.len()
                && domain.ends_with(entry)
                && domain.as_bytes()[domain.len() - entry.len() - 1] == b'.')
    })
}

/// Recovers the base verb from an "-ing" token: tries the bare stem, the
/// stem with a restored final "e", then the stem with a doubled final
/// consonant undone. Returns the matched infinitive.
pub fn deinflect_ing(token: &str, verbs: &Lexicon) -> Option<String> {
    let stem = token.strip_suffix("ing")?;
    if stem.is_empty() {
        return None;
    }
    if verbs.contains_entry(stem) {
        return Some(stem.to_string());
    }
    let restored = format!("{stem}e");
    if verbs.contains_entry(&restored) {
        return Some(restored);
    }
    let chars: Vec<char> = stem.chars().collect();
    if chars.len() >= 2 {
        let last = chars[chars.len() - 1];
        let prev = chars[chars.len() - 2];
        if last == prev && !"aeiou".contains(last) {
            let undoubled: String = chars[..chars.len() - 1].iter().collect();
            if verbs.contains_entry(&undoubled) {
                return Some(undoubled);
            }
        }
    }
    None
}
