//! Evidence sequences: per-step partial observations over the streams.

use std::collections::BTreeMap;

use crate::model::{HmmModel, ModelError};
use crate::scalar::Real;

/// Observations accumulated over time steps `1..=horizon`.
///
/// Each slice maps stream index to observed value index; streams absent from
/// a slice are unobserved at that step. Time steps are 1-based throughout the
/// crate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvidenceSequence {
    slices: Vec<BTreeMap<usize, usize>>,
}

impl EvidenceSequence {
    pub fn new(slices: Vec<BTreeMap<usize, usize>>) -> Self {
        Self { slices }
    }

    /// `horizon` steps with no observations at all.
    pub fn empty(horizon: usize) -> Self {
        Self {
            slices: vec![BTreeMap::new(); horizon],
        }
    }

    /// One observation at step 1, padded with empty slices up to `horizon`.
    pub fn single(horizon: usize, stream: usize, value: usize) -> Self {
        Self::empty(horizon).with_observation(1, stream, value)
    }

    /// Builder-style: record `stream = value` at step `t` (1-based).
    pub fn with_observation(mut self, t: usize, stream: usize, value: usize) -> Self {
        assert!(t >= 1 && t <= self.slices.len(), "time step out of range");
        self.slices[t - 1].insert(stream, value);
        self
    }

    pub fn horizon(&self) -> usize {
        self.slices.len()
    }

    /// Observations at step `t` (1-based).
    pub fn slice(&self, t: usize) -> &BTreeMap<usize, usize> {
        &self.slices[t - 1]
    }

    pub fn slices(&self) -> &[BTreeMap<usize, usize>] {
        &self.slices
    }

    /// True when no stream is observed anywhere in steps `1..=n`.
    pub fn is_vacuous_through(&self, n: usize) -> bool {
        self.slices.iter().take(n).all(BTreeMap::is_empty)
    }

    /// The sub-sequence covering steps `from..=to`, re-indexed to start at 1.
    pub fn window(&self, from: usize, to: usize) -> Self {
        assert!(from >= 1 && from <= to && to <= self.horizon());
        Self {
            slices: self.slices[from - 1..to].to_vec(),
        }
    }

    /// Check every stream and value index against the model's ranges.
    pub fn validate_against<R: Real>(&self, model: &HmmModel<R>) -> Result<(), ModelError> {
        for (t, slice) in self.slices.iter().enumerate() {
            for (&stream, &value) in slice {
                if stream >= model.num_streams() {
                    return Err(ModelError::EvidenceMismatch(format!(
                        "stream {stream} observed at step {} but model has {} streams",
                        t + 1,
                        model.num_streams()
                    )));
                }
                let values = model.stream(stream).cols();
                if value >= values {
                    return Err(ModelError::EvidenceMismatch(format!(
                        "value {value} observed for stream {stream} at step {} but stream has {values} values",
                        t + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn window_reindexes_from_one() {
        let e = EvidenceSequence::empty(5)
            .with_observation(2, 0, 1)
            .with_observation(4, 0, 0);
        let w = e.window(2, 4);
        assert_eq!(w.horizon(), 3);
        assert_eq!(w.slice(1).get(&0), Some(&1));
        assert!(w.slice(2).is_empty());
        assert_eq!(w.slice(3).get(&0), Some(&0));
    }

    #[test]
    fn vacuous_check_respects_the_cutoff() {
        let e = EvidenceSequence::empty(4).with_observation(3, 0, 0);
        assert!(e.is_vacuous_through(2));
        assert!(!e.is_vacuous_through(3));
    }

    #[test]
    fn out_of_range_indices_are_rejected() {
        let model = HmmModel::new(
            Matrix::identity(2),
            vec![Matrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!(EvidenceSequence::single(1, 1, 0)
            .validate_against(&model)
            .is_err());
        assert!(EvidenceSequence::single(1, 0, 2)
            .validate_against(&model)
            .is_err());
        assert!(EvidenceSequence::single(1, 0, 1)
            .validate_against(&model)
            .is_ok());
    }
}
