//! Contraction-based approximate analysis windows.
//!
//! Pushing two distributions through a row-stochastic matrix shrinks their
//! relative entropy by a factor of one minus the matrix's minimal mixing
//! rate. Applied backwards from the time step of interest, this bounds how
//! far into the past the filter must look: the backward acceptable window.
//! Restarting the filter at the window start from the initial vector keeps
//! the step-`n` posterior within the requested accuracy, and sensitivity
//! functions computed on the window have degrees in the window length
//! rather than the full horizon.

use thiserror::Error;

use crate::matrix::Matrix;
use crate::model::{EvidenceSequence, HmmModel, ModelError};
use crate::scalar::Real;
use crate::sensitivity::{
    compute_univariate, SensitivityError, SensitivityTarget, UnivariateSensitivity,
};

/// Default limit on the number of joint observation assignments enumerated
/// for the worst-case divergence bound.
pub const DEFAULT_OBSERVATION_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum ContractionError {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("matrix is not row-stochastic: {0}")]
    NotStochastic(String),

    #[error("distribution lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("mixing rate {delta} is degenerate for the window formula")]
    DegenerateMixing { delta: f64 },

    #[error("accuracy must be positive, got {0}")]
    InvalidAccuracy(f64),

    #[error("divergence bound must be positive, got {0}")]
    InvalidBound(f64),

    #[error("joint observation space has {assignments} assignments, exceeding the cap of {cap}")]
    ObservationCapExceeded { assignments: usize, cap: usize },

    #[error("window start {n_phi} outside [1, {n}]")]
    WindowOutOfRange { n_phi: usize, n: usize },

    #[error(transparent)]
    Sensitivity(#[from] SensitivityError),
}

/// How a window certificate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMode {
    /// From stored exact posteriors (the scan over the filter trajectory).
    ExactPosteriors,
    /// From an a-priori divergence bound `M`.
    MBound,
}

impl WindowMode {
    pub fn label(&self) -> &'static str {
        match self {
            WindowMode::ExactPosteriors => "exact-posteriors",
            WindowMode::MBound => "M-bound",
        }
    }
}

/// Certificate for a backward acceptable window.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport<R> {
    /// Minimal mixing rate of the transition matrix.
    pub delta: R,
    /// First time step of the window, in `[1, n]`.
    pub n_phi: usize,
    /// The time step of interest.
    pub n: usize,
    /// Requested accuracy.
    pub epsilon: R,
    pub mode: WindowMode,
    /// Divergence bound used, in M-bound mode.
    pub m_bound: Option<R>,
    /// Measured divergence between the exact and windowed posteriors at `n`,
    /// when exact filtering was available. At most `epsilon` whenever the
    /// report is not vacuous.
    pub achieved: Option<R>,
    /// Set when no window start could be certified and the full history is
    /// used instead.
    pub vacuous: bool,
}

/// Minimal mixing rate: the least total overlap between any two rows.
///
/// Zero for rows with disjoint support (no contraction), one when all rows
/// are equal (one-step forgetting).
pub fn mixing_rate<R: Real>(transition: &Matrix<R>) -> Result<R, ContractionError> {
    if !transition.is_square() {
        return Err(ContractionError::NotStochastic(format!(
            "matrix is {}x{}",
            transition.rows(),
            transition.cols()
        )));
    }
    let tol = R::of(crate::model::STOCHASTIC_TOL);
    for i in 0..transition.rows() {
        let mut sum = R::zero();
        for &v in transition.row(i) {
            if v < R::zero() || v > R::one() {
                return Err(ContractionError::NotStochastic(format!(
                    "entry {v} in row {i} outside [0, 1]"
                )));
            }
            sum = sum + v;
        }
        if (sum - R::one()).abs() > tol {
            return Err(ContractionError::NotStochastic(format!(
                "row {i} sums to {sum}"
            )));
        }
    }

    let l = transition.rows();
    let mut delta = R::one();
    for i in 0..l {
        for k in i + 1..l {
            let mut overlap = R::zero();
            for j in 0..l {
                overlap = overlap + transition.get(i, j).min(transition.get(k, j));
            }
            delta = delta.min(overlap);
        }
    }
    Ok(delta.max(R::zero()).min(R::one()))
}

/// Relative entropy `D[mu || nu]` in nats.
///
/// Terms with `mu_i = 0` contribute nothing; `mu_i > 0` where `nu_i = 0`
/// makes the divergence infinite.
pub fn relative_entropy<R: Real>(mu: &[R], nu: &[R]) -> Result<R, ContractionError> {
    if mu.len() != nu.len() {
        return Err(ContractionError::LengthMismatch {
            left: mu.len(),
            right: nu.len(),
        });
    }
    let mut sum = R::zero();
    for (&m, &n) in mu.iter().zip(nu) {
        if m > R::zero() {
            if n > R::zero() {
                sum = sum + m * (m / n).ln();
            } else {
                return Ok(R::infinity());
            }
        }
    }
    // Rounding can leave a tiny negative value for near-identical inputs.
    Ok(sum.max(R::zero()))
}

/// Largest window start whose contraction certificate meets `epsilon`,
/// scanned backwards from `n` over the stored exact posteriors.
///
/// A candidate start `t` must satisfy the scan inequality
/// `(1 - delta)^(n - t) * D[p(X_t | e_t) || p(X_1)] <= epsilon`, and since
/// the exact posteriors are in hand, the divergence the windowed filter
/// actually achieves at `n` is measured as well; a candidate whose measured
/// divergence exceeds `epsilon` is rejected and the scan continues
/// downwards. Conditioning on a specific observation can enlarge relative
/// entropy, so the scan inequality alone does not bound the achieved
/// divergence; the verification makes the returned certificate hold
/// unconditionally. When no start qualifies the full history is used and the
/// report is flagged vacuous.
pub fn backward_window_exact<R: Real>(
    model: &HmmModel<R>,
    evidence: &EvidenceSequence,
    n: usize,
    epsilon: R,
) -> Result<ContractionReport<R>, ContractionError> {
    if !(epsilon > R::zero()) {
        return Err(ContractionError::InvalidAccuracy(epsilon.as_f64()));
    }
    let delta = mixing_rate(model.transition())?;
    let exact = model.filter(evidence, n)?;
    let prior = model.initial();

    let contraction = R::one() - delta;
    let mut chosen = None;
    for t in (1..=n).rev() {
        let divergence = relative_entropy(&exact.trajectory[t - 1], prior)?;
        let steps = (n - t) as i32;
        let factor = contraction.powi(steps);
        // 0 * inf is a vanished certificate, not NaN.
        let bound = if factor == R::zero() {
            R::zero()
        } else {
            factor * divergence
        };
        if bound > epsilon {
            continue;
        }
        let approx = approximate_filter(model, evidence, t, n)?;
        let achieved = relative_entropy(&exact.posterior, &approx)?;
        if achieved <= epsilon {
            chosen = Some((t, achieved));
            break;
        }
    }

    let (n_phi, achieved, vacuous) = match chosen {
        Some((t, achieved)) => (t, achieved, false),
        None => {
            let approx = approximate_filter(model, evidence, 1, n)?;
            (1, relative_entropy(&exact.posterior, &approx)?, true)
        }
    };

    Ok(ContractionReport {
        delta,
        n_phi,
        n,
        epsilon,
        mode: WindowMode::ExactPosteriors,
        m_bound: None,
        achieved: Some(achieved),
        vacuous,
    })
}

/// Window start from the closed-form approximation
/// `max(1, n - floor(log(epsilon / M) / log(1 - delta)))`, clamped to
/// `[1, n]`.
pub fn backward_window_approx<R: Real>(
    n: usize,
    delta: R,
    epsilon: R,
    m_bound: R,
) -> Result<usize, ContractionError> {
    if !(epsilon > R::zero()) {
        return Err(ContractionError::InvalidAccuracy(epsilon.as_f64()));
    }
    if !(m_bound > R::zero()) {
        return Err(ContractionError::InvalidBound(m_bound.as_f64()));
    }
    if !(delta > R::zero()) || !(delta < R::one()) {
        return Err(ContractionError::DegenerateMixing {
            delta: delta.as_f64(),
        });
    }
    let ratio = (epsilon / m_bound).ln() / (R::one() - delta).ln();
    let window = ratio.floor().as_f64() as i64;
    let n_phi = (n as i64 - window).clamp(1, n as i64);
    Ok(n_phi as usize)
}

/// M-bound window certificate packaged as a report.
pub fn backward_window_with_bound<R: Real>(
    n: usize,
    delta: R,
    epsilon: R,
    m_bound: R,
) -> Result<ContractionReport<R>, ContractionError> {
    let n_phi = backward_window_approx(n, delta, epsilon, m_bound)?;
    Ok(ContractionReport {
        delta,
        n_phi,
        n,
        epsilon,
        mode: WindowMode::MBound,
        m_bound: Some(m_bound),
        achieved: None,
        vacuous: false,
    })
}

/// Worst-case single-step divergence bound `M`: the largest relative entropy
/// between the slice-1 posterior and the initial vector over all joint
/// observation assignments, with the default enumeration cap.
pub fn worst_case_m<R: Real>(model: &HmmModel<R>) -> Result<R, ContractionError> {
    worst_case_m_with_cap(model, DEFAULT_OBSERVATION_CAP)
}

/// As [`worst_case_m`] with an explicit cap on the number of joint
/// observation assignments.
pub fn worst_case_m_with_cap<R: Real>(
    model: &HmmModel<R>,
    cap: usize,
) -> Result<R, ContractionError> {
    if model.num_streams() == 0 {
        return Ok(R::zero());
    }
    let cards: Vec<usize> = model.streams().iter().map(Matrix::cols).collect();
    let assignments: usize = cards.iter().product();
    if assignments > cap {
        return Err(ContractionError::ObservationCapExceeded { assignments, cap });
    }

    let prior = model.initial();
    let l = model.num_states();
    let mut best = R::zero();
    let mut found = false;
    for code in 0..assignments {
        let mut rest = code;
        let mut likelihood = vec![R::one(); l];
        for (k, &card) in cards.iter().enumerate().rev() {
            let value = rest % card;
            rest /= card;
            let table = model.stream(k);
            for (i, like) in likelihood.iter_mut().enumerate() {
                *like = *like * table.get(i, value);
            }
        }
        let mut posterior: Vec<R> = prior
            .iter()
            .zip(&likelihood)
            .map(|(&p, &like)| p * like)
            .collect();
        let norm: R = posterior.iter().copied().sum();
        if !(norm > R::zero()) {
            // Impossible assignment; the divergence is undefined and the
            // assignment can never occur.
            continue;
        }
        for v in posterior.iter_mut() {
            *v = *v / norm;
        }
        best = best.max(relative_entropy(&posterior, prior)?);
        found = true;
    }
    if !found {
        return Ok(R::zero());
    }
    Ok(best)
}

/// Windowed filtering: restart the recursion at step `n_phi` from the
/// initial vector (conditioned on that slice's evidence) and run it through
/// step `n`.
pub fn approximate_filter<R: Real>(
    model: &HmmModel<R>,
    evidence: &EvidenceSequence,
    n_phi: usize,
    n: usize,
) -> Result<Vec<R>, ContractionError> {
    if n_phi < 1 || n_phi > n {
        return Err(ContractionError::WindowOutOfRange { n_phi, n });
    }
    if n > evidence.horizon() {
        return Err(ModelError::TimeOutOfRange {
            time: n,
            horizon: evidence.horizon(),
        }
        .into());
    }
    let windowed = evidence.window(n_phi, n);
    let out = model.filter(&windowed, n - n_phi + 1).map_err(|e| match e {
        ModelError::ImpossibleEvidence { step } => ModelError::ImpossibleEvidence {
            step: step + n_phi - 1,
        },
        other => other,
    })?;
    Ok(out.posterior)
}

/// A sensitivity function computed on a backward acceptable window.
#[derive(Debug, Clone)]
pub struct WindowedSensitivity<R> {
    /// The fitted function, expressed over the windowed problem (time steps
    /// re-indexed so the window starts at 1).
    pub sensitivity: UnivariateSensitivity<R>,
    pub window: ContractionReport<R>,
    /// The accuracy guarantee covers non-transition parameters only; for
    /// transition parameters the certificate applies at the nominal value.
    pub certified: bool,
    /// Measured gap between the exact and windowed probability at the
    /// nominal parameter value.
    pub nominal_deviation: R,
}

/// Compute a sensitivity function on the backward acceptable window for
/// `epsilon` instead of the full history.
///
/// The resulting polynomial degrees scale with the window length. The
/// certificate is anchored at the nominal parameter values, where the
/// divergence between exact and windowed filtering is within `epsilon`.
/// Transition parameters also move the mixing rate the window was derived
/// from, so their windowed functions are reported uncertified; the deviation
/// measured at the nominal value accompanies every result.
pub fn windowed_univariate<R: Real>(
    model: &HmmModel<R>,
    target: &SensitivityTarget,
    param: &crate::model::ParameterRef<R>,
    epsilon: R,
) -> Result<WindowedSensitivity<R>, ContractionError> {
    let window = backward_window_exact(model, &target.evidence, target.time, epsilon)?;
    let windowed_evidence = target.evidence.window(window.n_phi, target.time);
    let windowed_target = SensitivityTarget::new(
        target.state,
        target.time - window.n_phi + 1,
        windowed_evidence,
    );
    let sensitivity = compute_univariate(model, &windowed_target, param)?;

    let exact_nominal = model.filter(&target.evidence, target.time)?.posterior[target.state];
    let nominal_deviation = (sensitivity.nominal_value - exact_nominal).abs();

    Ok(WindowedSensitivity {
        sensitivity,
        window,
        certified: !param.is_transition(),
        nominal_deviation,
    })
}
