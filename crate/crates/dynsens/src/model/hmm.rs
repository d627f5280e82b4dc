//! Single-process hidden Markov model and exact forward filtering.

use crate::matrix::Matrix;
use crate::scalar::Real;

use super::{EvidenceSequence, ModelError, ValidationReport, STOCHASTIC_TOL};

/// A discrete hidden Markov model.
///
/// The hidden variable has `l >= 2` states; each observation stream emits one
/// of `m_k >= 2` values per time step according to a time-invariant, state-row
/// stochastic matrix. All tables are stored in probability space.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel<R> {
    transition: Matrix<R>,
    streams: Vec<Matrix<R>>,
    initial: Vec<R>,
}

/// Result of a filtering pass: the step-`n` posterior, accumulated
/// log-likelihood of the evidence, and the full posterior trajectory.
#[derive(Debug, Clone)]
pub struct FilterOutcome<R> {
    /// `p(X_n | e_n)`, normalized.
    pub posterior: Vec<R>,
    /// `ln p(e_n)`, the sum of per-step normalizer logs.
    pub log_likelihood: R,
    /// Posteriors `p(X_t | e_t)` for `t = 1..n`.
    pub trajectory: Vec<Vec<R>>,
}

impl<R: Real> HmmModel<R> {
    /// Build and validate a model. Stochasticity defects smaller than the
    /// input tolerance are repaired by renormalizing the affected row;
    /// anything larger is rejected with the full report.
    pub fn new(
        transition: Matrix<R>,
        streams: Vec<Matrix<R>>,
        initial: Vec<R>,
    ) -> Result<Self, ModelError> {
        Self::from_parts(transition, streams, initial).normalized()
    }

    /// Build without validating. Intended for [`validate`](Self::validate)
    /// diagnostics; the filtering and variation operations assume a valid
    /// model.
    pub fn from_parts(transition: Matrix<R>, streams: Vec<Matrix<R>>, initial: Vec<R>) -> Self {
        Self {
            transition,
            streams,
            initial,
        }
    }

    /// Validate, then repair sub-tolerance defects by clamping negatives and
    /// renormalizing each row.
    pub fn normalized(mut self) -> Result<Self, ModelError> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        normalize_rows(&mut self.transition);
        for stream in &mut self.streams {
            normalize_rows(stream);
        }
        normalize_vec(&mut self.initial);
        Ok(self)
    }

    /// Number of hidden states `l`.
    pub fn num_states(&self) -> usize {
        self.initial.len()
    }

    pub fn num_streams(&self) -> usize {
        self.streams.len()
    }

    pub fn transition(&self) -> &Matrix<R> {
        &self.transition
    }

    pub fn streams(&self) -> &[Matrix<R>] {
        &self.streams
    }

    pub fn stream(&self, k: usize) -> &Matrix<R> {
        &self.streams[k]
    }

    pub fn initial(&self) -> &[R] {
        &self.initial
    }

    pub(crate) fn transition_mut(&mut self) -> &mut Matrix<R> {
        &mut self.transition
    }

    pub(crate) fn stream_mut(&mut self, k: usize) -> &mut Matrix<R> {
        &mut self.streams[k]
    }

    pub(crate) fn initial_mut(&mut self) -> &mut Vec<R> {
        &mut self.initial
    }

    /// Check every type invariant and report each defect found.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let l = self.num_states();

        if l < 2 {
            report.push(
                "initial",
                None,
                (2 - l) as f64,
                format!("model has {l} states, at least 2 required"),
            );
        }
        if self.transition.rows() != l || self.transition.cols() != l {
            report.push(
                "transition",
                None,
                0.0,
                format!(
                    "transition is {}x{}, expected {l}x{l}",
                    self.transition.rows(),
                    self.transition.cols()
                ),
            );
        } else {
            check_stochastic_rows(&mut report, "transition", &self.transition);
        }

        for (k, stream) in self.streams.iter().enumerate() {
            let name = format!("stream {k}");
            if stream.cols() < 2 {
                report.push(
                    name.clone(),
                    None,
                    0.0,
                    format!("stream {k} has {} values, at least 2 required", stream.cols()),
                );
            }
            if stream.rows() != l {
                report.push(
                    name,
                    None,
                    0.0,
                    format!("stream {k} has {} rows, expected {l}", stream.rows()),
                );
            } else {
                check_stochastic_rows(&mut report, &name, stream);
            }
        }

        check_stochastic_slice(&mut report, "initial", None, &self.initial);
        report
    }

    /// Exact forward filtering through time step `n`.
    ///
    /// Step 1 conditions the initial vector on the slice-1 evidence; each
    /// later step pushes the posterior through the transition matrix and then
    /// conditions on that slice. Each step is normalized and the normalizer
    /// logs are accumulated, so `posterior[r] * exp(log_likelihood)`
    /// recovers the joint `p(x_r^n, e_n)` without underflow at large `n`.
    pub fn filter(
        &self,
        evidence: &EvidenceSequence,
        n: usize,
    ) -> Result<FilterOutcome<R>, ModelError> {
        if n < 1 || n > evidence.horizon() {
            return Err(ModelError::TimeOutOfRange {
                time: n,
                horizon: evidence.horizon(),
            });
        }

        let mut trajectory = Vec::with_capacity(n);
        let mut log_likelihood = R::zero();
        let mut state = self.initial.clone();

        for t in 1..=n {
            if t > 1 {
                state = self.transition.apply_to_distribution(&state);
            }
            for (&stream, &value) in evidence.slice(t) {
                let table = &self.streams[stream];
                for (i, mass) in state.iter_mut().enumerate() {
                    *mass = *mass * table.get(i, value);
                }
            }
            let norm: R = state.iter().copied().sum();
            if !(norm > R::zero()) {
                return Err(ModelError::ImpossibleEvidence { step: t });
            }
            for mass in state.iter_mut() {
                *mass = *mass / norm;
            }
            log_likelihood = log_likelihood + norm.ln();
            trajectory.push(state.clone());
        }

        Ok(FilterOutcome {
            posterior: state,
            log_likelihood,
            trajectory,
        })
    }
}

fn check_stochastic_rows<R: Real>(report: &mut ValidationReport, name: &str, matrix: &Matrix<R>) {
    for i in 0..matrix.rows() {
        check_stochastic_slice(report, name, Some(i), matrix.row(i));
    }
}

fn check_stochastic_slice<R: Real>(
    report: &mut ValidationReport,
    name: &str,
    row: Option<usize>,
    values: &[R],
) {
    let at = match row {
        Some(i) => format!("{name} row {i}"),
        None => name.to_string(),
    };
    for (j, &v) in values.iter().enumerate() {
        let v = v.as_f64();
        if v < 0.0 {
            report.push(name, row, -v, format!("negative entry {v} at {at} column {j}"));
        } else if v > 1.0 {
            report.push(
                name,
                row,
                v - 1.0,
                format!("entry {v} exceeds 1 at {at} column {j}"),
            );
        }
    }
    let sum: f64 = values.iter().map(|v| v.as_f64()).sum();
    let defect = (sum - 1.0).abs();
    if defect > STOCHASTIC_TOL {
        report.push(name, row, defect, format!("row sum {sum} at {at}"));
    }
}

fn normalize_rows<R: Real>(matrix: &mut Matrix<R>) {
    for i in 0..matrix.rows() {
        normalize_slice(matrix.row_mut(i));
    }
}

fn normalize_vec<R: Real>(values: &mut [R]) {
    normalize_slice(values);
}

fn normalize_slice<R: Real>(values: &mut [R]) {
    for v in values.iter_mut() {
        if *v < R::zero() {
            *v = R::zero();
        }
    }
    let sum: R = values.iter().copied().sum();
    if sum > R::zero() && sum != R::one() {
        for v in values.iter_mut() {
            *v = *v / sum;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EvidenceSequence;

    fn matrix(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn two_state() -> HmmModel<f64> {
        HmmModel::new(
            matrix(&[&[0.9, 0.1], &[0.2, 0.8]]),
            vec![matrix(&[&[0.9, 0.1], &[0.2, 0.8]])],
            vec![0.5, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn well_formed_model_validates_clean() {
        let report = two_state().validate();
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn row_sum_defect_is_reported_with_magnitude() {
        let model = HmmModel::from_parts(
            matrix(&[&[0.6, 0.6], &[0.2, 0.8]]),
            vec![],
            vec![0.5, 0.5],
        );
        let report = model.validate();
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.matrix, "transition");
        assert_eq!(v.row, Some(0));
        assert!((v.magnitude - 0.2).abs() < 1e-12);
        assert!(v.message.contains("row sum 1.2"), "{}", v.message);
        assert!(v.message.contains("transition row 0"), "{}", v.message);
    }

    #[test]
    fn negative_entry_is_reported() {
        let model = HmmModel::from_parts(
            matrix(&[&[0.9, 0.1], &[0.2, 0.8]]),
            vec![matrix(&[&[1.1, -0.1], &[0.2, 0.8]])],
            vec![0.5, 0.5],
        );
        let report = model.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.message.contains("negative entry")));
        assert!(!report.is_valid());
    }

    #[test]
    fn sub_tolerance_defects_are_repaired() {
        let model = HmmModel::new(
            matrix(&[&[0.9, 0.1 + 3e-10], &[0.2, 0.8]]),
            vec![],
            vec![0.5, 0.5],
        )
        .unwrap();
        let sum: f64 = model.transition().row(0).iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn absorbing_dynamics_keep_point_mass() {
        let model = HmmModel::new(
            Matrix::identity(2),
            vec![matrix(&[&[0.9, 0.1], &[0.2, 0.8]])],
            vec![1.0, 0.0],
        )
        .unwrap();
        let out = model.filter(&EvidenceSequence::empty(3), 3).unwrap();
        assert_eq!(out.posterior, vec![1.0, 0.0]);
        assert_eq!(out.trajectory.len(), 3);
    }

    #[test]
    fn rank_one_transition_forgets_the_start() {
        let model = HmmModel::new(
            matrix(&[&[0.3, 0.7], &[0.3, 0.7]]),
            vec![],
            vec![0.95, 0.05],
        )
        .unwrap();
        for n in 2..=5 {
            let out = model.filter(&EvidenceSequence::empty(5), n).unwrap();
            assert!((out.posterior[0] - 0.3).abs() < 1e-15);
            assert!((out.posterior[1] - 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn single_step_conditioning_matches_hand_bayes() {
        let model = two_state();
        let evidence = EvidenceSequence::single(1, 0, 0);
        let out = model.filter(&evidence, 1).unwrap();
        assert!((out.posterior[0] - 9.0 / 11.0).abs() < 1e-12);
        assert!((out.posterior[1] - 2.0 / 11.0).abs() < 1e-12);
        assert!((out.log_likelihood.exp() - 0.55).abs() < 1e-12);
    }

    #[test]
    fn impossible_evidence_names_the_failing_step() {
        let model = HmmModel::new(
            Matrix::identity(2),
            vec![matrix(&[&[1.0, 0.0], &[1.0, 0.0]])],
            vec![0.5, 0.5],
        )
        .unwrap();
        // Value 1 can never be emitted.
        let evidence = EvidenceSequence::empty(3).with_observation(2, 0, 1);
        let err = model.filter(&evidence, 3).unwrap_err();
        match err {
            ModelError::ImpossibleEvidence { step } => assert_eq!(step, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn time_step_outside_horizon_is_rejected() {
        let model = two_state();
        assert!(matches!(
            model.filter(&EvidenceSequence::empty(3), 4),
            Err(ModelError::TimeOutOfRange { .. })
        ));
        assert!(matches!(
            model.filter(&EvidenceSequence::empty(3), 0),
            Err(ModelError::TimeOutOfRange { .. })
        ));
    }
}
