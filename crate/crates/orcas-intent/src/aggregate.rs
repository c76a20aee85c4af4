//! Turning a record's votes into one per-level decision.
//!
//! The default aggregator is plain majority voting, which decides by count
//! and abstains on ties. The alternative weights each function by how often
//! it agreed with the majority on a fitting sample, then scores votes by
//! log-odds; it is a deliberately simple stand-in for a trained label model.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::rules::VoteVector;
use crate::taxonomy::{IntentLabel, LevelVote};
use thiserror::Error;

/// What to do when two labels draw the same support: abstain, letting the
/// record fall through to the next stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    #[default]
    AbstainOnTie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Majority,
    AgreementWeighted,
}

/// The outcome of aggregating one level's votes.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDecision {
    pub label: LevelVote,
    pub method: Method,
    /// Per-label support: vote counts for majority, score sums for the
    /// weighted variant. Labels nobody voted for are absent.
    pub tally: Vec<(IntentLabel, f64)>,
}

/// Minimum records required before weight fitting is considered meaningful.
pub const DEFAULT_MIN_FIT_RECORDS: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum AggregateError {
    #[error(
        "not enough data to fit weights: {records} records ({multi_voter} with two or more \
         voters), need at least {min_records} records and one multi-voter record"
    )]
    InsufficientData {
        records: usize,
        multi_voter: usize,
        min_records: usize,
    },
    #[error("no fitted weight for labelling function {0:?}")]
    MissingWeight(String),
}

#[derive(Debug, Error)]
pub enum WeightsFileError {
    #[error("reading weights file: {0}")]
    Io(#[from] std::io::Error),
    #[error("weights file line {0} is not `name = value`: {1:?}")]
    Malformed(usize, String),
    #[error("weight for {id} must be a number strictly between 0 and 1, got {value:?}")]
    InvalidWeight { id: String, value: String },
}

/// Picks the label with strictly the most votes; abstains when nothing
/// fired or the top labels tie.
pub fn majority_vote(votes: &VoteVector, _tie_policy: TiePolicy) -> LevelDecision {
    let mut tally: Vec<(IntentLabel, f64)> = Vec::new();
    for (_, label) in votes.fired() {
        match tally.iter_mut().find(|(l, _)| *l == label) {
            Some((_, n)) => *n += 1.0,
            None => tally.push((label, 1.0)),
        }
    }
    let label = single_leader(&tally);
    LevelDecision {
        label,
        method: Method::Majority,
        tally,
    }
}

/// Estimates one weight per function: the fraction of its votes that agreed
/// with the unweighted majority, measured on records where at least two
/// functions voted. Functions with no evidence sit at 0.5; everything is
/// clamped to [0.05, 0.95] so log-odds stay finite.
pub fn fit_agreement_weights(
    vote_matrix: &[VoteVector],
    min_records: usize,
) -> Result<BTreeMap<String, f64>, AggregateError> {
    let mut cast: BTreeMap<String, (u64, u64)> = BTreeMap::new(); // id → (agreed, voted)
    for vector in vote_matrix {
        for (id, _) in &vector.votes {
            cast.entry(id.to_string()).or_insert((0, 0));
        }
    }
    let mut multi_voter = 0usize;
    for vector in vote_matrix {
        let fired: Vec<(&str, IntentLabel)> = vector.fired().collect();
        if fired.len() < 2 {
            continue;
        }
        multi_voter += 1;
        let consensus = match majority_vote(vector, TiePolicy::AbstainOnTie).label {
            LevelVote::Label(l) => Some(l),
            LevelVote::NoVote => None, // tied record: every vote counts as a miss
        };
        for (id, label) in fired {
            let (agreed, voted) = cast
                .get_mut(id)
                .expect("vote id seen while collecting function names");
            *voted += 1;
            if consensus == Some(label) {
                *agreed += 1;
            }
        }
    }
    if vote_matrix.len() < min_records || multi_voter == 0 {
        return Err(AggregateError::InsufficientData {
            records: vote_matrix.len(),
            multi_voter,
            min_records,
        });
    }
    Ok(cast
        .into_iter()
        .map(|(id, (agreed, voted))| {
            let weight = if voted == 0 {
                0.5
            } else {
                (agreed as f64 / voted as f64).clamp(0.05, 0.95)
            };
            (id, weight)
        })
        .collect())
}

/// Scores each label by the sum of log-odds of its voters' weights and
/// picks the strictly highest positive score; anything else abstains.
pub fn weighted_vote(
    votes: &VoteVector,
    weights: &BTreeMap<String, f64>,
) -> Result<LevelDecision, AggregateError> {
    let mut tally: Vec<(IntentLabel, f64)> = Vec::new();
    for (id, label) in votes.fired() {
        let w = *weights
            .get(id)
            .ok_or_else(|| AggregateError::MissingWeight(id.to_string()))?;
        let score = (w / (1.0 - w)).ln();
        match tally.iter_mut().find(|(l, _)| *l == label) {
            Some((_, s)) => *s += score,
            None => tally.push((label, score)),
        }
    }
    let label = match single_leader(&tally) {
        LevelVote::Label(l) => {
            let top = tally
                .iter()
                .find(|(lab, _)| *lab == l)
                .map(|(_, s)| *s)
                .unwrap_or_default();
            if top > 0.0 {
                LevelVote::Label(l)
            } else {
                LevelVote::NoVote
            }
        }
        LevelVote::NoVote => LevelVote::NoVote,
    };
    Ok(LevelDecision {
        label,
        method: Method::AgreementWeighted,
        tally,
    })
}

/// The label holding strictly the greatest tally, or NoVote on empty/tied.
fn single_leader(tally: &[(IntentLabel, f64)]) -> LevelVote {
    let Some((best, top)) = tally
        .iter()
        .max_by(|(_, a), (_, b)| a.partial_cmp(b).expect("tallies are finite"))
    else {
        return LevelVote::NoVote;
    };
    let tied = tally.iter().filter(|(_, s)| *s == *top).count();
    if tied > 1 {
        LevelVote::NoVote
    } else {
        LevelVote::Label(*best)
    }
}

/// Writes weights as `name = value` lines, sorted by name.
pub fn save_weights(sink: &mut dyn Write, weights: &BTreeMap<String, f64>) -> std::io::Result<()> {
    for (id, w) in weights {
        writeln!(sink, "{id} = {w}")?;
    }
    Ok(())
}

/// Reads a weights file written by [`save_weights`] (or by hand): one
/// `name = value` per line, `#` comments allowed, weights in (0, 1).
pub fn load_weights(source: impl BufRead) -> Result<BTreeMap<String, f64>, WeightsFileError> {
    let mut weights = BTreeMap::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((id, value)) = line.split_once('=') else {
            return Err(WeightsFileError::Malformed(idx + 1, line.to_string()));
        };
        let id = id.trim().to_string();
        let value = value.trim();
        let parsed: f64 = value.parse().map_err(|_| WeightsFileError::InvalidWeight {
            id: id.clone(),
            value: value.to_string(),
        })?;
        if !(parsed.is_finite() && 0.0 < parsed && parsed < 1.0) {
            return Err(WeightsFileError::InvalidWeight {
                id,
                value: value.to_string(),
            });
        }
        weights.insert(id, parsed);
    }
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::Level;
    use proptest::prelude::*;

    fn vector(level: Level, votes: Vec<(&'static str, LevelVote)>) -> VoteVector {
        VoteVector {
            record_id: "r".into(),
            level,
            votes,
        }
    }

    fn nav() -> LevelVote {
        LevelVote::Label(IntentLabel::Navigational)
    }

    fn trans() -> LevelVote {
        LevelVote::Label(IntentLabel::Transactional)
    }

    fn none() -> LevelVote {
        LevelVote::NoVote
    }

    #[test]
    fn unique_plurality_wins() {
        let v = vector(
            Level::One,
            vec![("a", nav()), ("b", nav()), ("c", none()), ("d", none())],
        );
        let d = majority_vote(&v, TiePolicy::AbstainOnTie);
        assert_eq!(d.label, nav());
        assert_eq!(d.tally, vec![(IntentLabel::Navigational, 2.0)]);
    }

    #[test]
    fn ties_abstain() {
        let v = vector(
            Level::One,
            vec![("a", nav()), ("b", trans()), ("c", none())],
        );
        assert_eq!(majority_vote(&v, TiePolicy::AbstainOnTie).label, none());
    }

    #[test]
    fn silence_abstains() {
        let v = vector(Level::One, vec![("a", none()), ("b", none())]);
        let d = majority_vote(&v, TiePolicy::AbstainOnTie);
        assert_eq!(d.label, none());
        assert!(d.tally.is_empty());
    }

    #[test]
    fn a_single_vote_is_a_quorum() {
        let v = vector(
            Level::One,
            vec![("a", none()), ("b", trans()), ("c", none())],
        );
        assert_eq!(majority_vote(&v, TiePolicy::AbstainOnTie).label, trans());
    }

    #[test]
    fn identical_voters_hit_the_upper_clamp() {
        let rows: Vec<VoteVector> = (0..100)
            .map(|_| vector(Level::One, vec![("a", nav()), ("b", nav())]))
            .collect();
        let w = fit_agreement_weights(&rows, 100).unwrap();
        assert_eq!(w["a"], 0.95);
        assert_eq!(w["b"], 0.95);
    }

    #[test]
    fn silent_functions_default_to_half() {
        let rows: Vec<VoteVector> = (0..10)
            .map(|_| {
                vector(
                    Level::One,
                    vec![("a", nav()), ("b", nav()), ("mute", none())],
                )
            })
            .collect();
        let w = fit_agreement_weights(&rows, 10).unwrap();
        assert_eq!(w["mute"], 0.5);
    }

    #[test]
    fn disagreement_rates_are_counted_per_function() {
        // a+b outvote c on 3 records; on the 4th, a sits out and b+c tie.
        let mut rows = vec![];
        for _ in 0..3 {
            rows.push(vector(
                Level::One,
                vec![("a", nav()), ("b", nav()), ("c", trans())],
            ));
        }
        rows.push(vector(
            Level::One,
            vec![("a", none()), ("b", nav()), ("c", trans())],
        ));
        let w = fit_agreement_weights(&rows, 4).unwrap();
        // a: 3/3 agree → clamped to 0.95; b: 3/4; c: 0/4 → clamped to 0.05.
        assert_eq!(w["a"], 0.95);
        assert_eq!(w["b"], 0.75);
        assert_eq!(w["c"], 0.05);
    }

    #[test]
    fn fitting_needs_enough_rows_and_overlap() {
        let rows: Vec<VoteVector> = (0..5)
            .map(|_| vector(Level::One, vec![("a", nav()), ("b", nav())]))
            .collect();
        let err = fit_agreement_weights(&rows, 1000).unwrap_err();
        assert!(matches!(
            err,
            AggregateError::InsufficientData { records: 5, .. }
        ));

        // Plenty of rows, but never two voters at once.
        let rows: Vec<VoteVector> = (0..50)
            .map(|_| vector(Level::One, vec![("a", nav()), ("b", none())]))
            .collect();
        let err = fit_agreement_weights(&rows, 10).unwrap_err();
        assert!(matches!(
            err,
            AggregateError::InsufficientData { multi_voter: 0, .. }
        ));
    }

    #[test]
    fn weighted_vote_compares_log_odds() {
        let mut weights = BTreeMap::new();
        weights.insert("a".to_string(), 0.9);
        weights.insert("b".to_string(), 0.6);
        let v = vector(Level::One, vec![("a", nav()), ("b", trans())]);
        let d = weighted_vote(&v, &weights).unwrap();
        assert_eq!(d.label, nav());
        let score = |label| {
            d.tally
                .iter()
                .find(|(l, _)| *l == label)
                .map(|(_, s)| *s)
                .unwrap()
        };
        assert!((score(IntentLabel::Navigational) - 2.1972245773362196).abs() < 1e-12);
        assert!((score(IntentLabel::Transactional) - 0.4054651081081644).abs() < 1e-12);
    }

    #[test]
    fn indifferent_and_negative_scores_abstain() {
        let mut weights = BTreeMap::new();
        weights.insert("a".to_string(), 0.5);
        let v = vector(Level::One, vec![("a", nav())]);
        assert_eq!(weighted_vote(&v, &weights).unwrap().label, none());

        let mut weights = BTreeMap::new();
        weights.insert("a".to_string(), 0.3);
        let v = vector(Level::One, vec![("a", nav())]);
        assert_eq!(weighted_vote(&v, &weights).unwrap().label, none());

        let v = vector(Level::One, vec![("a", none())]);
        let weights = BTreeMap::new();
        assert_eq!(weighted_vote(&v, &weights).unwrap().label, none());
    }

    #[test]
    fn unknown_functions_are_rejected() {
        let v = vector(Level::One, vec![("mystery", nav())]);
        let err = weighted_vote(&v, &BTreeMap::new()).unwrap_err();
        assert_eq!(err, AggregateError::MissingWeight("mystery".into()));
    }

    #[test]
    fn weights_round_trip_through_a_file() {
        let mut weights = BTreeMap::new();
        weights.insert("nav_levenshtein".to_string(), 0.95);
        weights.insert("trans_download".to_string(), 0.6180339887498949);
        let mut buf = Vec::new();
        save_weights(&mut buf, &weights).unwrap();
        let loaded = load_weights(buf.as_slice()).unwrap();
        assert_eq!(loaded, weights);
    }

    #[test]
    fn weight_files_are_validated() {
        let err = load_weights("just some words\n".as_bytes()).unwrap_err();
        assert!(matches!(err, WeightsFileError::Malformed(1, _)));

        let err = load_weights("a = 1.5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, WeightsFileError::InvalidWeight { .. }));

        let err = load_weights("a = 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, WeightsFileError::InvalidWeight { .. }));

        let ok = load_weights("# comment\n\na = 0.75\n".as_bytes()).unwrap();
        assert_eq!(ok["a"], 0.75);
    }

    fn arbitrary_vote() -> impl Strategy<Value = LevelVote> {
        prop_oneof![
            Just(LevelVote::NoVote),
            Just(LevelVote::Label(IntentLabel::Navigational)),
            Just(LevelVote::Label(IntentLabel::Transactional)),
        ]
    }

    proptest! {
        #[test]
        fn majority_is_permutation_invariant(
            votes in proptest::collection::vec(arbitrary_vote(), 0..7),
            seed in 0u64..1000,
        ) {
            const IDS: [&str; 7] = ["f0", "f1", "f2", "f3", "f4", "f5", "f6"];
            let original: Vec<(&'static str, LevelVote)> = votes
                .iter()
                .enumerate()
                .map(|(i, v)| (IDS[i], *v))
                .collect();
            let mut shuffled = original.clone();
            // Cheap deterministic shuffle driven by the seed.
            let mut s = seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s as usize) % (i + 1));
            }
            let a = majority_vote(&vector(Level::One, original), TiePolicy::AbstainOnTie);
            let b = majority_vote(&vector(Level::One, shuffled), TiePolicy::AbstainOnTie);
            prop_assert_eq!(a.label, b.label);
        }

        #[test]
        fn equal_weights_reproduce_majority(
            votes in proptest::collection::vec(arbitrary_vote(), 0..7),
            w in 0.55f64..0.95,
        ) {
            const IDS: [&str; 7] = ["f0", "f1", "f2", "f3", "f4", "f5", "f6"];
            let entries: Vec<(&'static str, LevelVote)> = votes
                .iter()
                .enumerate()
                .map(|(i, v)| (IDS[i], *v))
                .collect();
            let weights: BTreeMap<String, f64> =
                IDS.iter().map(|id| (id.to_string(), w)).collect();
            let v = vector(Level::One, entries);
            let majority = majority_vote(&v, TiePolicy::AbstainOnTie).label;
            let weighted = weighted_vote(&v, &weights).unwrap().label;
            prop_assert_eq!(majority, weighted);
        }
    }
}
