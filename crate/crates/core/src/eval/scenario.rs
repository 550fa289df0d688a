use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ChirpRecord, Outcome};

/// The three binary clinical labelings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Positive iff the outcome is success.
    #[serde(rename = "S1_outcome")]
    S1Outcome,
    /// Positive iff difficulty is 3 or 4.
    #[serde(rename = "S2_difficulty")]
    S2Difficulty,
    /// Positive iff success with difficulty 1 or 2.
    #[serde(rename = "S3_optimal")]
    S3Optimal,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::S1Outcome, Scenario::S2Difficulty, Scenario::S3Optimal];

    pub fn id(self) -> &'static str {
        match self {
            Scenario::S1Outcome => "S1_outcome",
            Scenario::S2Difficulty => "S2_difficulty",
            Scenario::S3Optimal => "S3_optimal",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Scenario::S1Outcome => "s1",
            Scenario::S2Difficulty => "s2",
            Scenario::S3Optimal => "s3",
        }
    }

    pub fn is_positive(self, outcome: Outcome, difficulty: u8) -> bool {
        match self {
            Scenario::S1Outcome => outcome == Outcome::S,
            Scenario::S2Difficulty => matches!(difficulty, 3 | 4),
            Scenario::S3Optimal => outcome == Outcome::S && matches!(difficulty, 1 | 2),
        }
    }

    /// Captions for class 0 and class 1.
    pub fn class_names(self) -> [&'static str; 2] {
        match self {
            Scenario::S1Outcome => ["F + NR", "S"],
            Scenario::S2Difficulty => ["difficulty 1-2", "difficulty 3-4"],
            Scenario::S3Optimal => ["other", "S, difficulty 1-2"],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.short() == s || sc.id() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioLabels {
    pub scenario: Scenario,
    pub labels: Vec<usize>,
    pub positives: usize,
    pub negatives: usize,
}

pub fn encode_scenario(records: &[ChirpRecord], scenario: Scenario) -> ScenarioLabels {
    let labels: Vec<usize> = records
        .iter()
        .map(|r| usize::from(scenario.is_positive(r.outcome, r.difficulty)))
        .collect();
    let positives = labels.iter().sum();
    ScenarioLabels {
        scenario,
        negatives: labels.len() - positives,
        positives,
        labels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(outcome: Outcome, difficulty: u8) -> [bool; 3] {
        Scenario::ALL.map(|s| s.is_positive(outcome, difficulty))
    }

    #[test]
    fn rules() {
        assert_eq!(labels(Outcome::S, 2), [true, false, true]);
        assert_eq!(labels(Outcome::F, 1), [false, false, false]);
        assert_eq!(labels(Outcome::NR, 4), [false, true, false]);
        assert_eq!(labels(Outcome::S, 3), [true, true, false]);
    }

    #[test]
    fn encoding_counts() {
        let rec = |o, d| ChirpRecord {
            id: String::new(),
            temporal_duration: 1.0,
            frequency_onset: 1.0,
            spectral_duration: 1.0,
            outcome: o,
            difficulty: d,
        };
        let recs = [rec(Outcome::S, 1), rec(Outcome::S, 4), rec(Outcome::F, 2)];
        let l = encode_scenario(&recs, Scenario::S1Outcome);
        assert_eq!(l.labels, vec![1, 1, 0]);
        assert_eq!((l.positives, l.negatives), (2, 1));
    }

    #[test]
    fn parse() {
        assert_eq!("s2".parse::<Scenario>().unwrap(), Scenario::S2Difficulty);
        assert_eq!("S3_optimal".parse::<Scenario>().unwrap(), Scenario::S3Optimal);
        assert!("s4".parse::<Scenario>().is_err());
    }
}
