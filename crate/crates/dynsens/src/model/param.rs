//! Network parameters and proportional co-variation.

use crate::model::{HmmModel, ModelError};
use crate::scalar::Real;

/// Identifies one parameter of an HMM together with its nominal value.
///
/// Varying a parameter rescales the other entries of its table row
/// proportionally, so the row stays stochastic: setting the entry to `v`
/// multiplies every sibling by `(1 - v) / (1 - nominal)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParameterRef<R> {
    /// An entry of the initial probability vector.
    Initial { state: usize, nominal: R },
    /// An entry of the transition matrix.
    Transition { from: usize, to: usize, nominal: R },
    /// An entry of one observation stream's emission matrix.
    Observation {
        stream: usize,
        state: usize,
        value: usize,
        nominal: R,
    },
}

impl<R: Real> ParameterRef<R> {
    pub fn initial(model: &HmmModel<R>, state: usize) -> Result<Self, ModelError> {
        if state >= model.num_states() {
            return Err(ModelError::IndexOutOfRange(format!(
                "initial state {state} (model has {} states)",
                model.num_states()
            )));
        }
        Ok(Self::Initial {
            state,
            nominal: model.initial()[state],
        })
    }

    pub fn transition(model: &HmmModel<R>, from: usize, to: usize) -> Result<Self, ModelError> {
        let l = model.num_states();
        if from >= l || to >= l {
            return Err(ModelError::IndexOutOfRange(format!(
                "transition entry ({from}, {to}) (model has {l} states)"
            )));
        }
        Ok(Self::Transition {
            from,
            to,
            nominal: model.transition().get(from, to),
        })
    }

    pub fn observation(
        model: &HmmModel<R>,
        stream: usize,
        state: usize,
        value: usize,
    ) -> Result<Self, ModelError> {
        if stream >= model.num_streams() {
            return Err(ModelError::IndexOutOfRange(format!(
                "stream {stream} (model has {} streams)",
                model.num_streams()
            )));
        }
        let table = model.stream(stream);
        if state >= table.rows() || value >= table.cols() {
            return Err(ModelError::IndexOutOfRange(format!(
                "observation entry ({state}, {value}) in stream {stream} ({}x{})",
                table.rows(),
                table.cols()
            )));
        }
        Ok(Self::Observation {
            stream,
            state,
            value,
            nominal: table.get(state, value),
        })
    }

    /// The model's value of this parameter when the reference was built.
    pub fn nominal(&self) -> R {
        match *self {
            Self::Initial { nominal, .. }
            | Self::Transition { nominal, .. }
            | Self::Observation { nominal, .. } => nominal,
        }
    }

    pub fn is_transition(&self) -> bool {
        matches!(self, Self::Transition { .. })
    }

    /// Short human-readable form, e.g. `transition[1][0]`.
    pub fn describe(&self) -> String {
        match *self {
            Self::Initial { state, .. } => format!("initial[{state}]"),
            Self::Transition { from, to, .. } => format!("transition[{from}][{to}]"),
            Self::Observation {
                stream,
                state,
                value,
                ..
            } => format!("observation[{stream}][{state}][{value}]"),
        }
    }
}

impl<R: Real> HmmModel<R> {
    /// Return a copy of the model with `param` set to `value` and the rest of
    /// its row co-varied proportionally. The input model is untouched.
    pub fn apply_parameter(
        &self,
        param: &ParameterRef<R>,
        value: R,
    ) -> Result<HmmModel<R>, ModelError> {
        if !(value >= R::zero() && value <= R::one()) {
            return Err(ModelError::ValueOutOfDomain {
                value: value.as_f64(),
            });
        }
        let mut varied = self.clone();
        match *param {
            ParameterRef::Initial { state, .. } => {
                covary_row(varied.initial_mut().as_mut_slice(), state, value)?
            }
            ParameterRef::Transition { from, to, .. } => {
                covary_row(varied.transition_mut().row_mut(from), to, value)?
            }
            ParameterRef::Observation {
                stream,
                state,
                value: column,
                ..
            } => covary_row(varied.stream_mut(stream).row_mut(state), column, value)?,
        }
        Ok(varied)
    }
}

/// Set `row[entry] = value` and rescale the siblings by
/// `(1 - value) / (1 - current)`.
fn covary_row<R: Real>(row: &mut [R], entry: usize, value: R) -> Result<(), ModelError> {
    let current = row[entry];
    let remaining = R::one() - current;
    if !(remaining > R::zero()) {
        return Err(ModelError::CovariationUndefined {
            nominal: current.as_f64(),
        });
    }
    let scale = (R::one() - value) / remaining;
    for (j, x) in row.iter_mut().enumerate() {
        *x = if j == entry { value } else { *x * scale };
    }
    Ok(())
}
