//! JSON input and dump formats for monoids.
//!
//! Input:
//!
//! ```json
//! {"carrier": ["0", "1", "2"], "generators": [[["1", "0"], ["2", "1"]]],
//!  "group": "Z", "labels": ["1"]}
//! ```
//!
//! `group` and `labels` are optional and needed only for `Φ`. A dump
//! contains the same keys plus the element list, so it reloads as input.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::{InverseMonoid, Limits, MonoidError};
use crate::group::{GroupChoice, GroupError};
use crate::pbij::{Carrier, PartialBijection, PbijError};

#[derive(Debug, Error)]
pub enum MonoidIoError {
    #[error("invalid monoid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Pbij(#[from] PbijError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error("{labels} labels given for {generators} generators")]
    LabelCount { labels: usize, generators: usize },
    #[error("labels need a group")]
    LabelsWithoutGroup,
}

/// Point names may be given as strings or numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointName {
    Str(String),
    Int(i64),
}

impl PointName {
    fn text(&self) -> String {
        match self {
            PointName::Str(s) => s.clone(),
            PointName::Int(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonoidInput {
    pub carrier: Vec<PointName>,
    pub generators: Vec<Vec<(PointName, PointName)>>,
    #[serde(default)]
    pub group: Option<GroupChoice>,
    #[serde(default)]
    pub labels: Option<Vec<Value>>,
}

impl MonoidInput {
    pub fn from_json_str(text: &str) -> Result<MonoidInput, MonoidIoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self, limits: Limits) -> Result<InverseMonoid, MonoidIoError> {
        let carrier = Carrier::new(self.carrier.iter().map(PointName::text))?;
        let gens = self
            .generators
            .iter()
            .map(|pairs| {
                let named: Vec<(String, String)> = pairs.iter().map(|(a, b)| (a.text(), b.text())).collect();
                PartialBijection::from_named_pairs(&carrier, &named)
            })
            .collect::<Result<Vec<_>, _>>()?;
        match (&self.group, &self.labels) {
            (_, None) => Ok(InverseMonoid::generate(&carrier, &gens, limits)?),
            (None, Some(_)) => Err(MonoidIoError::LabelsWithoutGroup),
            (Some(g), Some(labels)) => {
                if labels.len() != gens.len() {
                    return Err(MonoidIoError::LabelCount {
                        labels: labels.len(),
                        generators: gens.len(),
                    });
                }
                let ctx = g.build()?;
                let labeled = gens
                    .into_iter()
                    .zip(labels)
                    .map(|(s, v)| Ok((s, ctx.element_from_json(v)?)))
                    .collect::<Result<Vec<_>, GroupError>>()?;
                Ok(InverseMonoid::generate_labeled(&carrier, &ctx, &labeled, limits)?)
            }
        }
    }
}

fn pairs_json(s: &PartialBijection) -> Value {
    json!(s.named_pairs())
}

/// Carrier, generators with labels, elements with derivations, and the
/// natural order as index pairs `[s, t]` with `s ≤ t`, `s ≠ t`.
pub fn monoid_dump(s: &InverseMonoid) -> Value {
    let mut doc = json!({
        "carrier": s.carrier().points(),
        "generators": s.generators().iter().map(pairs_json).collect::<Vec<_>>(),
        "size": s.len(),
        "status": s.status(),
        "elements": s.elements().iter().enumerate().map(|(i, e)| json!({
            "index": i,
            "pairs": pairs_json(e),
            "derivation": s.derivation(i).to_string(),
            "idempotent": e.is_idempotent(),
        })).collect::<Vec<_>>(),
    });
    if s.is_complete() {
        doc["order"] = json!(s.natural_order());
    }
    if let Some((ctx, labels)) = s.labels() {
        doc["group"] = serde_json::to_value(ctx.spec()).expect("serializable");
        doc["labels"] = json!(labels.iter().map(|g| ctx.format(g)).collect::<Vec<_>>());
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_from_json_and_reloads_dump() {
        let text = r#"{"carrier": [0, 1, 2, 4], "generators": [[[1, 0], [2, 1]]], "group": "Z", "labels": [1]}"#;
        let s = MonoidInput::from_json_str(text).unwrap().build(Limits::default()).unwrap();
        assert_eq!(s.len(), 15);
        let dump = monoid_dump(&s);
        let again = MonoidInput::from_json_str(&dump.to_string()).unwrap().build(Limits::default()).unwrap();
        assert_eq!(again.elements(), s.elements());
        assert_eq!(monoid_dump(&again), dump);
        for pair in dump["order"].as_array().unwrap() {
            let (a, b) = (pair[0].as_u64().unwrap() as usize, pair[1].as_u64().unwrap() as usize);
            assert!(s.element(a).leq(s.element(b)).unwrap());
        }
    }

    #[test]
    fn input_errors() {
        let bad = r#"{"carrier": ["a"], "generators": [[["a", "b"]]]}"#;
        assert!(matches!(
            MonoidInput::from_json_str(bad).unwrap().build(Limits::default()),
            Err(MonoidIoError::Pbij(_))
        ));
        let no_group = r#"{"carrier": ["a"], "generators": [[["a", "a"]]], "labels": ["1"]}"#;
        assert!(matches!(
            MonoidInput::from_json_str(no_group).unwrap().build(Limits::default()),
            Err(MonoidIoError::LabelsWithoutGroup)
        ));
    }
}
