use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Judgment {
    Pass,
    Fail,
    Unsure,
}

/// One line of `ratings.jsonl`. A record with `adjudicated` set is the
/// pair's joint decision rather than an individual judgment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingRecord {
    pub sample: String,
    pub rater: String,
    pub judgment: Judgment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjudicated: Option<Judgment>,
    #[serde(default)]
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RatingError {
    #[error("rating is malformed: {0}")]
    Malformed(String),
    #[error("unknown sample `{0}`")]
    UnknownSample(String),
    #[error("`{rater}` already judged `{sample}`")]
    Duplicate { rater: String, sample: String },
    #[error("sample `{0}` is not awaiting human judgment")]
    NotRateable(String),
}

impl RatingError {
    pub fn code(&self) -> &'static str {
        match self {
            RatingError::Malformed(_) => "malformed-rating",
            RatingError::UnknownSample(_) => "unknown-sample",
            RatingError::Duplicate { .. } => "duplicate-rating",
            RatingError::NotRateable(_) => "not-rateable",
        }
    }
}

impl RatingRecord {
    pub fn is_adjudication(&self) -> bool {
        self.adjudicated.is_some()
    }

    /// Field-level checks that do not depend on the run.
    pub fn check(&self) -> Result<(), RatingError> {
        if self.rater.trim().is_empty() {
            return Err(RatingError::Malformed("empty rater".into()));
        }
        if self.sample.trim().is_empty() {
            return Err(RatingError::Malformed("empty sample".into()));
        }
        match self.adjudicated {
            Some(Judgment::Unsure) => Err(RatingError::Malformed("adjudication must be pass or fail".into())),
            Some(a) if a != self.judgment => Err(RatingError::Malformed("adjudicated value differs from judgment".into())),
            _ => Ok(()),
        }
    }

    /// Whether `self` would duplicate an existing record: one judgment per
    /// (rater, sample) and one adjudication per sample.
    pub fn conflicts_with(&self, other: &RatingRecord) -> bool {
        if self.sample != other.sample || self.is_adjudication() != other.is_adjudication() {
            return false;
        }
        self.is_adjudication() || self.rater == other.rater
    }
}

/// Human outcome for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resolution {
    Pass,
    Fail,
    /// Fewer than two judgments so far.
    Open,
    /// Disagreement or an unsure vote with no adjudication yet.
    Pending,
}

/// Adjudication wins; otherwise two or more judgments that all agree on
/// pass or fail decide; anything else with at least two judgments is
/// pending.
pub fn resolve(records: &[&RatingRecord]) -> Resolution {
    if let Some(a) = records.iter().rev().find_map(|r| r.adjudicated) {
        return if a == Judgment::Pass { Resolution::Pass } else { Resolution::Fail };
    }
    let votes: Vec<Judgment> = records.iter().filter(|r| !r.is_adjudication()).map(|r| r.judgment).collect();
    if votes.len() < 2 {
        return Resolution::Open;
    }
    if votes.iter().all(|j| *j == Judgment::Pass) {
        Resolution::Pass
    } else if votes.iter().all(|j| *j == Judgment::Fail) {
        Resolution::Fail
    } else {
        Resolution::Pending
    }
}

/// Groups records by sample id and resolves each.
pub fn resolutions(ratings: &[RatingRecord]) -> BTreeMap<String, Resolution> {
    let mut by: BTreeMap<&str, Vec<&RatingRecord>> = BTreeMap::new();
    for r in ratings {
        by.entry(&r.sample).or_default().push(r);
    }
    by.into_iter().map(|(k, v)| (k.to_string(), resolve(&v))).collect()
}

/// Parses `ratings.jsonl`, skipping blank lines.
pub fn parse_ratings(text: &str) -> Result<Vec<RatingRecord>, RatingError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| RatingError::Malformed(format!("line {}: {e}", i + 1))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(rater: &str, j: Judgment) -> RatingRecord {
        RatingRecord {
            sample: "s".into(),
            rater: rater.into(),
            judgment: j,
            adjudicated: None,
            timestamp: String::new(),
        }
    }

    fn adj(j: Judgment) -> RatingRecord {
        RatingRecord {
            adjudicated: Some(j),
            ..r("team", j)
        }
    }

    fn res(records: &[RatingRecord]) -> Resolution {
        resolve(&records.iter().collect::<Vec<_>>())
    }

    #[test]
    fn protocol() {
        use Judgment::*;
        assert_eq!(res(&[r("a", Pass), r("b", Pass)]), Resolution::Pass);
        assert_eq!(res(&[r("a", Fail), r("b", Fail)]), Resolution::Fail);
        assert_eq!(res(&[r("a", Pass), r("b", Fail)]), Resolution::Pending);
        assert_eq!(res(&[r("a", Pass), r("b", Unsure)]), Resolution::Pending);
        assert_eq!(res(&[r("a", Pass), r("b", Unsure), adj(Pass)]), Resolution::Pass);
        assert_eq!(res(&[r("a", Pass), r("b", Pass), adj(Fail)]), Resolution::Fail);
        assert_eq!(res(&[r("a", Pass)]), Resolution::Open);
        assert_eq!(res(&[]), Resolution::Open);
    }

    #[test]
    fn duplicates() {
        use Judgment::*;
        assert!(r("a", Pass).conflicts_with(&r("a", Fail)));
        assert!(!r("a", Pass).conflicts_with(&r("b", Pass)));
        assert!(adj(Pass).conflicts_with(&adj(Fail)));
        assert!(!adj(Pass).conflicts_with(&r("team", Pass)));
    }

    #[test]
    fn field_checks() {
        use Judgment::*;
        assert!(r("a", Pass).check().is_ok());
        assert!(r(" ", Pass).check().is_err());
        assert!(adj(Unsure).check().is_err());
        let mut bad = adj(Pass);
        bad.judgment = Fail;
        assert_eq!(bad.check().unwrap_err().code(), "malformed-rating");
    }

    #[test]
    fn jsonl_round_trip() {
        let recs = vec![r("a", Judgment::Pass), adj(Judgment::Fail)];
        let text: String = recs.iter().map(|x| serde_json::to_string(x).unwrap() + "\n").collect();
        assert_eq!(parse_ratings(&text).unwrap(), recs);
        assert!(parse_ratings("{\"sample\": 1}").is_err());
    }
}
