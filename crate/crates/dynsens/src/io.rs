//! JSON model and evidence files.
//!
//! A model file is a single JSON document. Single-process form:
//!
//! ```json
//! {
//!   "states": ["healthy", "ill"],
//!   "transition": [[0.9, 0.1], [0.2, 0.8]],
//!   "streams": [
//!     {"label": "temp", "values": ["normal", "high"],
//!      "matrix": [[0.8, 0.2], [0.3, 0.7]]}
//!   ],
//!   "initial": [0.95, 0.05]
//! }
//! ```
//!
//! Factored form replaces `states`/`transition`/`initial` with
//! `subprocesses`, and streams name their parent subprocesses:
//!
//! ```json
//! {
//!   "subprocesses": [
//!     {"label": "a", "states": ["no", "yes"],
//!      "transition": [[0.9, 0.1], [0.3, 0.7]], "initial": [0.8, 0.2]}
//!   ],
//!   "streams": [
//!     {"label": "sig", "parents": ["a"], "values": ["lo", "hi"],
//!      "matrix": [[0.7, 0.3], [0.2, 0.8]]}
//!   ]
//! }
//! ```
//!
//! An evidence file is a JSON list with one object per time step, mapping
//! stream label to observed value label; absent streams are unobserved.
//! Files carry labels; the analysis code works with indices throughout.

use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;

use crate::matrix::{Matrix, ShapeError};
use crate::model::{
    EvidenceSequence, FactoredDbn, HmmModel, ModelError, ObservationStream, ValidationReport,
};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot parse JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed document: {0}")]
    Schema(String),

    #[error(transparent)]
    Shape(#[from] ShapeError),

    #[error("unknown {kind} label {label:?}")]
    UnknownLabel { kind: &'static str, label: String },

    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Labels for one observation stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamMeta {
    pub label: String,
    pub values: Vec<String>,
}

/// A parsed model file: the raw tables plus the label vocabulary.
///
/// The tables are stored unchecked so that `validate` can report defects;
/// [`LoadedModel::resolve`] produces the checked single-process model used
/// by the analyses (flattening factored input).
#[derive(Debug, Clone)]
pub struct LoadedModel {
    state_labels: Vec<String>,
    streams: Vec<StreamMeta>,
    hmm: Option<HmmModel<f64>>,
    factored: Option<FactoredDbn<f64>>,
}

impl LoadedModel {
    pub fn is_factored(&self) -> bool {
        self.factored.is_some()
    }

    /// Joint state labels, in the flattened state order.
    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn streams(&self) -> &[StreamMeta] {
        &self.streams
    }

    /// Validate the model as given in the file.
    pub fn validate(&self) -> ValidationReport {
        match &self.factored {
            Some(dbn) => dbn.validate(),
            None => self.hmm.as_ref().expect("one form is present").validate(),
        }
    }

    /// The checked single-process model: factored input is flattened with
    /// the default state cap; single-process input is renormalized.
    pub fn resolve(&self) -> Result<HmmModel<f64>, ModelError> {
        match &self.factored {
            Some(dbn) => dbn.flatten(),
            None => self
                .hmm
                .as_ref()
                .expect("one form is present")
                .clone()
                .normalized(),
        }
    }

    /// Resolve a state token: exact label first, then a numeric index.
    pub fn state_index(&self, token: &str) -> Result<usize, LoadError> {
        resolve(token, &self.state_labels, "state")
    }

    /// Resolve a stream token: exact label first, then a numeric index.
    pub fn stream_index(&self, token: &str) -> Result<usize, LoadError> {
        if let Some(i) = self.streams.iter().position(|s| s.label == token) {
            return Ok(i);
        }
        match token.parse::<usize>() {
            Ok(i) if i < self.streams.len() => Ok(i),
            _ => Err(LoadError::UnknownLabel {
                kind: "stream",
                label: token.to_string(),
            }),
        }
    }

    /// Resolve a value token within a stream.
    pub fn value_index(&self, stream: usize, token: &str) -> Result<usize, LoadError> {
        resolve(token, &self.streams[stream].values, "value")
    }
}

fn resolve(token: &str, labels: &[String], kind: &'static str) -> Result<usize, LoadError> {
    if let Some(i) = labels.iter().position(|l| l == token) {
        return Ok(i);
    }
    match token.parse::<usize>() {
        Ok(i) if i < labels.len() => Ok(i),
        _ => Err(LoadError::UnknownLabel {
            kind,
            label: token.to_string(),
        }),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    states: Option<Vec<String>>,
    transition: Option<Vec<Vec<f64>>>,
    initial: Option<Vec<f64>>,
    subprocesses: Option<Vec<SubprocessDoc>>,
    #[serde(default)]
    streams: Vec<StreamDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubprocessDoc {
    #[serde(default)]
    label: String,
    states: Vec<String>,
    transition: Vec<Vec<f64>>,
    initial: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StreamDoc {
    label: String,
    values: Option<Vec<String>>,
    parents: Option<Vec<String>>,
    matrix: Vec<Vec<f64>>,
}

/// Parse a model document.
pub fn load_model(text: &str) -> Result<LoadedModel, LoadError> {
    let mut doc: ModelDoc = serde_json::from_str(text)?;
    match doc.subprocesses.take() {
        Some(subs) => load_factored(subs, doc),
        None => load_single(doc),
    }
}

fn load_single(doc: ModelDoc) -> Result<LoadedModel, LoadError> {
    let states = doc
        .states
        .ok_or_else(|| LoadError::Schema("single-process model requires \"states\"".into()))?;
    let transition = doc
        .transition
        .ok_or_else(|| LoadError::Schema("single-process model requires \"transition\"".into()))?;
    let initial = doc
        .initial
        .ok_or_else(|| LoadError::Schema("single-process model requires \"initial\"".into()))?;
    if states.len() != initial.len() {
        return Err(LoadError::Schema(format!(
            "{} state labels but initial vector of length {}",
            states.len(),
            initial.len()
        )));
    }

    let mut streams = Vec::with_capacity(doc.streams.len());
    let mut tables = Vec::with_capacity(doc.streams.len());
    for stream in doc.streams {
        if stream.parents.is_some() {
            return Err(LoadError::Schema(format!(
                "stream {:?} names parents but the model is not factored",
                stream.label
            )));
        }
        let matrix = Matrix::from_rows(stream.matrix)?;
        streams.push(StreamMeta {
            label: stream.label,
            values: value_labels(stream.values, matrix.cols())?,
        });
        tables.push(matrix);
    }

    Ok(LoadedModel {
        state_labels: states,
        streams,
        hmm: Some(HmmModel::from_parts(
            Matrix::from_rows(transition)?,
            tables,
            initial,
        )),
        factored: None,
    })
}

fn load_factored(subs: Vec<SubprocessDoc>, doc: ModelDoc) -> Result<LoadedModel, LoadError> {
    if doc.states.is_some() || doc.transition.is_some() || doc.initial.is_some() {
        return Err(LoadError::Schema(
            "factored model mixes \"subprocesses\" with single-process fields".into(),
        ));
    }

    let mut sub_labels = Vec::with_capacity(subs.len());
    let mut transitions = Vec::with_capacity(subs.len());
    let mut initials = Vec::with_capacity(subs.len());
    let mut per_sub_states: Vec<Vec<String>> = Vec::with_capacity(subs.len());
    for (i, sub) in subs.into_iter().enumerate() {
        if sub.states.len() != sub.initial.len() {
            return Err(LoadError::Schema(format!(
                "subprocess {i}: {} state labels but initial vector of length {}",
                sub.states.len(),
                sub.initial.len()
            )));
        }
        sub_labels.push(if sub.label.is_empty() {
            i.to_string()
        } else {
            sub.label
        });
        transitions.push(Matrix::from_rows(sub.transition)?);
        initials.push(sub.initial);
        per_sub_states.push(sub.states);
    }

    let mut streams = Vec::with_capacity(doc.streams.len());
    let mut obs = Vec::with_capacity(doc.streams.len());
    for stream in doc.streams {
        let parents = stream.parents.ok_or_else(|| {
            LoadError::Schema(format!(
                "stream {:?} of a factored model requires \"parents\"",
                stream.label
            ))
        })?;
        let parent_indices = parents
            .iter()
            .map(|p| resolve(p, &sub_labels, "subprocess"))
            .collect::<Result<Vec<_>, _>>()?;
        let matrix = Matrix::from_rows(stream.matrix)?;
        streams.push(StreamMeta {
            label: stream.label,
            values: value_labels(stream.values, matrix.cols())?,
        });
        obs.push(ObservationStream {
            parents: parent_indices,
            matrix,
        });
    }

    // Joint labels follow the flattening order: subprocess 0 most
    // significant, per-subprocess labels joined with '|'.
    let mut state_labels = vec![String::new()];
    for states in &per_sub_states {
        let mut next = Vec::with_capacity(state_labels.len() * states.len());
        for prefix in &state_labels {
            for s in states {
                next.push(if prefix.is_empty() {
                    s.clone()
                } else {
                    format!("{prefix}|{s}")
                });
            }
        }
        state_labels = next;
    }

    Ok(LoadedModel {
        state_labels,
        streams,
        hmm: None,
        factored: Some(FactoredDbn::from_parts(transitions, obs, initials)),
    })
}

fn value_labels(given: Option<Vec<String>>, cols: usize) -> Result<Vec<String>, LoadError> {
    match given {
        Some(values) => {
            if values.len() != cols {
                return Err(LoadError::Schema(format!(
                    "{} value labels for a matrix with {} columns",
                    values.len(),
                    cols
                )));
            }
            Ok(values)
        }
        None => Ok((0..cols).map(|v| v.to_string()).collect()),
    }
}

/// Parse an evidence document against a loaded model's vocabulary.
pub fn load_evidence(text: &str, model: &LoadedModel) -> Result<EvidenceSequence, LoadError> {
    let doc: Vec<BTreeMap<String, serde_json::Value>> = serde_json::from_str(text)?;
    let mut slices = Vec::with_capacity(doc.len());
    for step in doc {
        let mut slice = BTreeMap::new();
        for (stream_label, value) in step {
            let stream = model.stream_index(&stream_label)?;
            let token = match &value {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                other => {
                    return Err(LoadError::Schema(format!(
                        "evidence value for {stream_label:?} must be a label or index, got {other}"
                    )))
                }
            };
            let value = model.value_index(stream, &token)?;
            slice.insert(stream, value);
        }
        slices.push(slice);
    }
    Ok(EvidenceSequence::new(slices))
}
