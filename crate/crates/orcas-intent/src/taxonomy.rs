//! The user-intent label hierarchy.
//!
//! Two levels: navigational and transactional stand on their own, while the
//! informational class splits into factual, instrumental and abstain leaves.
//! `Abstain` is a real label (the residue of the informational class), not a
//! missing value; a labelling function that declines to vote uses
//! [`LevelVote::NoVote`] instead.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// One of the five leaf intent labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntentLabel {
    /// The query aims at reaching a particular website.
    Navigational,
    /// The query aims at obtaining a product or executing a web service.
    Transactional,
    /// The query seeks a specific fact or piece of information.
    Factual,
    /// The query seeks instructions: what to do or how to do something.
    Instrumental,
    /// Informational query matched by no factual or instrumental rule.
    Abstain,
}

/// The three top-level intent classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopLevelLabel {
    Navigational,
    Transactional,
    Informational,
}

/// What a single labelling function emits for one record: a label, or a
/// declination. `NoVote` is distinct from the `Abstain` leaf, which is only
/// assigned by the cascade after both levels declined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelVote {
    Label(IntentLabel),
    NoVote,
}

/// The two cascade levels: level one decides navigational/transactional,
/// level two factual/instrumental.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    One,
    Two,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown intent label: {0:?}")]
pub struct UnknownLabel(pub String);

impl IntentLabel {
    /// All leaf labels, in canonical report order.
    pub const ALL: [IntentLabel; 5] = [
        IntentLabel::Navigational,
        IntentLabel::Transactional,
        IntentLabel::Factual,
        IntentLabel::Instrumental,
        IntentLabel::Abstain,
    ];

    /// Canonical lowercase name used in files and on the wire.
    pub fn name(self) -> &'static str {
        match self {
            IntentLabel::Navigational => "navigational",
            IntentLabel::Transactional => "transactional",
            IntentLabel::Factual => "factual",
            IntentLabel::Instrumental => "instrumental",
            IntentLabel::Abstain => "abstain",
        }
    }

    /// Stable index into per-label count arrays.
    pub fn index(self) -> usize {
        match self {
            IntentLabel::Navigational => 0,
            IntentLabel::Transactional => 1,
            IntentLabel::Factual => 2,
            IntentLabel::Instrumental => 3,
            IntentLabel::Abstain => 4,
        }
    }
}

impl TopLevelLabel {
    pub const ALL: [TopLevelLabel; 3] = [
        TopLevelLabel::Navigational,
        TopLevelLabel::Transactional,
        TopLevelLabel::Informational,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopLevelLabel::Navigational => "navigational",
            TopLevelLabel::Transactional => "transactional",
            TopLevelLabel::Informational => "informational",
        }
    }
}

/// Projects a leaf label onto its top-level class. Total: the informational
/// leaves (factual, instrumental, abstain) collapse into informational, the
/// other two map to themselves.
pub fn project_top_level(label: IntentLabel) -> TopLevelLabel {
    match label {
        IntentLabel::Navigational => TopLevelLabel::Navigational,
        IntentLabel::Transactional => TopLevelLabel::Transactional,
        IntentLabel::Factual | IntentLabel::Instrumental | IntentLabel::Abstain => {
            TopLevelLabel::Informational
        }
    }
}

impl fmt::Display for IntentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `pad` honours width/alignment flags so labels line up in tables.
        f.pad(self.name())
    }
}

impl fmt::Display for TopLevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for IntentLabel {
    type Err = UnknownLabel;

    /// Case-insensitive parse of the canonical names.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "navigational" => Ok(IntentLabel::Navigational),
            "transactional" => Ok(IntentLabel::Transactional),
            "factual" => Ok(IntentLabel::Factual),
            "instrumental" => Ok(IntentLabel::Instrumental),
            "abstain" => Ok(IntentLabel::Abstain),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

impl FromStr for TopLevelLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "navigational" => Ok(TopLevelLabel::Navigational),
            "transactional" => Ok(TopLevelLabel::Transactional),
            "informational" => Ok(TopLevelLabel::Informational),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}
