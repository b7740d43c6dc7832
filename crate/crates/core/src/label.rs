use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Binary post label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    SelfHarm,
    NonSelfHarm,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::SelfHarm, Label::NonSelfHarm];

    /// Canonical wire form used in corpus files and model outputs.
    pub fn as_str(self) -> &'static str {
        match self {
            Label::SelfHarm => "self-harm",
            Label::NonSelfHarm => "non-self-harm",
        }
    }

    /// Spelling used by the zero-/few-shot output format ("non self-harm").
    pub fn as_prose(self) -> &'static str {
        match self {
            Label::SelfHarm => "self-harm",
            Label::NonSelfHarm => "non self-harm",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Label::SelfHarm => "SH",
            Label::NonSelfHarm => "NSH",
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::SelfHarm => Label::NonSelfHarm,
            Label::NonSelfHarm => Label::SelfHarm,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Label::SelfHarm => 0,
            Label::NonSelfHarm => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognised label {0:?}")]
pub struct LabelParseError(pub String);

impl FromStr for Label {
    type Err = LabelParseError;

    /// Accepts the hyphenated, spaced and abbreviated spellings as well as
    /// `1`/`0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, ' ' | '-' | '_'))
            .flat_map(char::to_lowercase)
            .collect();
        match folded.as_str() {
            "selfharm" | "sh" | "1" | "true" => Ok(Label::SelfHarm),
            "nonselfharm" | "notselfharm" | "nsh" | "0" | "false" => Ok(Label::NonSelfHarm),
            _ => Err(LabelParseError(s.to_string())),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(i64),
            Flag(bool),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Number(1) | Repr::Flag(true) => Ok(Label::SelfHarm),
            Repr::Number(0) | Repr::Flag(false) => Ok(Label::NonSelfHarm),
            Repr::Number(n) => Err(serde::de::Error::custom(format!("label must be 0 or 1, got {n}"))),
        }
    }
}
