//! Factored dynamic models and exact flattening to a single global process.
//!
//! Subprocesses evolve independently given the previous slice; interaction
//! between them is expressed through observation streams with several
//! subprocess parents. Flattening enumerates all combinations of subprocess
//! values: the global transition matrix is the Kronecker product of the
//! per-subprocess matrices, observation tables are replicated across
//! non-parent subprocess values, and the global initial vector is the
//! product measure. Joint states are ordered lexicographically by
//! subprocess index, subprocess 0 most significant.

use crate::matrix::Matrix;
use crate::scalar::Real;

use super::{HmmModel, ModelError, ValidationReport, STOCHASTIC_TOL};

/// Default limit on the flattened joint state count.
pub const DEFAULT_STATE_CAP: usize = 4096;

/// One observation stream of a factored model.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationStream<R> {
    /// Strictly increasing subprocess indices this stream depends on.
    pub parents: Vec<usize>,
    /// One row per parent-value combination (mixed-radix over `parents` in
    /// order), one column per observable value.
    pub matrix: Matrix<R>,
}

/// A dynamic model with independently evolving subprocesses and shared
/// observation children.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredDbn<R> {
    subprocesses: Vec<Matrix<R>>,
    streams: Vec<ObservationStream<R>>,
    initials: Vec<Vec<R>>,
}

impl<R: Real> FactoredDbn<R> {
    /// Build and validate; sub-tolerance stochasticity defects are repaired
    /// during flattening via the HMM constructor.
    pub fn new(
        subprocesses: Vec<Matrix<R>>,
        streams: Vec<ObservationStream<R>>,
        initials: Vec<Vec<R>>,
    ) -> Result<Self, ModelError> {
        let dbn = Self::from_parts(subprocesses, streams, initials);
        let report = dbn.validate();
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        Ok(dbn)
    }

    /// Build without validating, for diagnostic use.
    pub fn from_parts(
        subprocesses: Vec<Matrix<R>>,
        streams: Vec<ObservationStream<R>>,
        initials: Vec<Vec<R>>,
    ) -> Self {
        Self {
            subprocesses,
            streams,
            initials,
        }
    }

    pub fn num_subprocesses(&self) -> usize {
        self.subprocesses.len()
    }

    pub fn subprocesses(&self) -> &[Matrix<R>] {
        &self.subprocesses
    }

    pub fn streams(&self) -> &[ObservationStream<R>] {
        &self.streams
    }

    pub fn initials(&self) -> &[Vec<R>] {
        &self.initials
    }

    /// Per-subprocess state counts, in subprocess order.
    pub fn state_counts(&self) -> Vec<usize> {
        self.initials.iter().map(Vec::len).collect()
    }

    /// Number of joint states of the flattened process.
    pub fn joint_states(&self) -> usize {
        self.state_counts().iter().product()
    }

    /// Check every type invariant and report each defect found.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.subprocesses.len() != self.initials.len() {
            report.push(
                "subprocesses",
                None,
                0.0,
                format!(
                    "{} subprocess transition matrices but {} initial vectors",
                    self.subprocesses.len(),
                    self.initials.len()
                ),
            );
            return report;
        }
        if self.subprocesses.is_empty() {
            report.push(
                "subprocesses",
                None,
                0.0,
                "factored model has no subprocesses".to_string(),
            );
        }

        let counts = self.state_counts();
        for (s, (matrix, initial)) in self.subprocesses.iter().zip(&self.initials).enumerate() {
            let l = initial.len();
            let name = format!("subprocess {s} transition");
            if matrix.rows() != l || matrix.cols() != l {
                report.push(
                    name,
                    None,
                    0.0,
                    format!(
                        "subprocess {s} transition is {}x{}, expected {l}x{l}",
                        matrix.rows(),
                        matrix.cols()
                    ),
                );
            } else {
                check_rows(&mut report, &name, matrix);
            }
            check_vector(&mut report, &format!("subprocess {s} initial"), initial);
        }

        for (k, stream) in self.streams.iter().enumerate() {
            let name = format!("stream {k}");
            let mut in_range = true;
            for window in stream.parents.windows(2) {
                if window[0] >= window[1] {
                    report.push(
                        name.clone(),
                        None,
                        0.0,
                        format!("stream {k} parent indices are not strictly increasing"),
                    );
                    in_range = false;
                    break;
                }
            }
            for &p in &stream.parents {
                if p >= self.subprocesses.len() {
                    report.push(
                        name.clone(),
                        None,
                        0.0,
                        format!(
                            "stream {k} references subprocess {p} but model has {}",
                            self.subprocesses.len()
                        ),
                    );
                    in_range = false;
                }
            }
            if stream.parents.is_empty() {
                report.push(
                    name.clone(),
                    None,
                    0.0,
                    format!("stream {k} has no parent subprocesses"),
                );
                in_range = false;
            }
            if in_range {
                let expected_rows: usize = stream.parents.iter().map(|&p| counts[p]).product();
                if stream.matrix.rows() != expected_rows {
                    report.push(
                        name.clone(),
                        None,
                        0.0,
                        format!(
                            "stream {k} has {} rows, expected {expected_rows} for its parents",
                            stream.matrix.rows()
                        ),
                    );
                } else {
                    check_rows(&mut report, &name, &stream.matrix);
                }
            }
            if stream.matrix.cols() < 2 {
                report.push(
                    name,
                    None,
                    0.0,
                    format!(
                        "stream {k} has {} values, at least 2 required",
                        stream.matrix.cols()
                    ),
                );
            }
        }
        report
    }

    /// Flatten to a single-process model, with the default joint-state cap.
    pub fn flatten(&self) -> Result<HmmModel<R>, ModelError> {
        self.flatten_with_cap(DEFAULT_STATE_CAP)
    }

    /// Flatten to a single-process model, refusing joint state spaces larger
    /// than `cap`.
    pub fn flatten_with_cap(&self, cap: usize) -> Result<HmmModel<R>, ModelError> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        let joint = self.joint_states();
        if joint > cap {
            return Err(ModelError::StateCapExceeded { states: joint, cap });
        }

        let mut transition = Matrix::identity(1);
        for sub in &self.subprocesses {
            transition = transition.kronecker(sub);
        }

        let counts = self.state_counts();
        let mut initial = vec![R::one()];
        for init in &self.initials {
            let mut next = Vec::with_capacity(initial.len() * init.len());
            for &a in &initial {
                for &b in init {
                    next.push(a * b);
                }
            }
            initial = next;
        }

        let streams = self
            .streams
            .iter()
            .map(|stream| expand_stream(stream, &counts, joint))
            .collect();

        HmmModel::new(transition, streams, initial)
    }
}

/// Replicate a stream's rows across the values of non-parent subprocesses.
fn expand_stream<R: Real>(
    stream: &ObservationStream<R>,
    counts: &[usize],
    joint: usize,
) -> Matrix<R> {
    let cols = stream.matrix.cols();
    let mut out = Matrix::zeros(joint, cols);
    for state in 0..joint {
        let digits = joint_digits(state, counts);
        let mut parent_row = 0;
        for &p in &stream.parents {
            parent_row = parent_row * counts[p] + digits[p];
        }
        for j in 0..cols {
            out.set(state, j, stream.matrix.get(parent_row, j));
        }
    }
    out
}

/// Decompose a joint state index into per-subprocess values (subprocess 0
/// most significant).
pub(crate) fn joint_digits(mut state: usize, counts: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; counts.len()];
    for (s, &count) in counts.iter().enumerate().rev() {
        digits[s] = state % count;
        state /= count;
    }
    digits
}

fn check_rows<R: Real>(report: &mut ValidationReport, name: &str, matrix: &Matrix<R>) {
    for i in 0..matrix.rows() {
        check_row(report, name, Some(i), matrix.row(i));
    }
}

fn check_vector<R: Real>(report: &mut ValidationReport, name: &str, values: &[R]) {
    check_row(report, name, None, values);
}

fn check_row<R: Real>(
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
