//! Sensitivity functions of filtered probabilities.
//!
//! A filtered probability, viewed as a function of one network parameter
//! under proportional co-variation, is a quotient of two polynomials whose
//! degrees are known a priori from the parameter kind and the time step.
//! The coefficients are recovered by refiltering the varied model at
//! Chebyshev nodes and interpolating the unnormalized joint and likelihood
//! separately; extra nodes are held out to confirm the degree bound. The
//! two-parameter variant fits a full bivariate coefficient grid over the
//! sensitivity/specificity pair of one observation stream.

use thiserror::Error;

use crate::model::{EvidenceSequence, HmmModel, ModelError, ParameterRef};
use crate::polynomials::{
    chebyshev_nodes, interpolate, roots_in_unit_interval, PolyError, Polynomial, RationalFunction,
};
use crate::scalar::Real;

/// Residual limit above which a fit is rejected as a degree-bound violation.
pub const FIT_RESIDUAL_LIMIT: f64 = 1e-8;

/// Largest polynomial degree the exact analysis will fit. Beyond this the
/// monomial coefficients lose too much precision; longer horizons go through
/// the windowed analysis instead.
pub const EXACT_DEGREE_CAP: usize = 20;

/// Number of held-out validation nodes per fit.
const HELD_OUT: usize = 3;

#[derive(Debug, Error)]
pub enum SensitivityError {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Poly(#[from] PolyError),

    #[error("evidence is degenerate under variation: zero likelihood at theta = {theta} (step {step})")]
    EvidenceDegeneracy { theta: f64, step: usize },

    #[error("fit residual {residual} exceeds {limit}: degree bound violated")]
    FitFailure { residual: f64, limit: f64 },

    #[error("invalid parameter pair: {0}")]
    InvalidParams(String),

    #[error("invalid sensitivity target: {0}")]
    InvalidTarget(String),
}

/// The probability whose sensitivity is being studied: one hidden state at
/// one time step, given the evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitivityTarget {
    /// Hidden-state index `r`.
    pub state: usize,
    /// Time step `n` (1-based).
    pub time: usize,
    /// Accumulated evidence; slices may be empty (unobserved).
    pub evidence: EvidenceSequence,
}

impl SensitivityTarget {
    pub fn new(state: usize, time: usize, evidence: EvidenceSequence) -> Self {
        Self {
            state,
            time,
            evidence,
        }
    }

    /// Target with no evidence at all: the prior probability at step `time`.
    pub fn prior(state: usize, time: usize) -> Self {
        Self::new(state, time, EvidenceSequence::empty(time))
    }

    fn check<R: Real>(&self, model: &HmmModel<R>) -> Result<(), SensitivityError> {
        if self.time < 1 {
            return Err(SensitivityError::InvalidTarget(
                "time step must be at least 1".into(),
            ));
        }
        if self.state >= model.num_states() {
            return Err(SensitivityError::InvalidTarget(format!(
                "state {} out of range (model has {} states)",
                self.state,
                model.num_states()
            )));
        }
        if self.evidence.horizon() < self.time {
            return Err(SensitivityError::InvalidTarget(format!(
                "time step {} exceeds evidence horizon {}",
                self.time,
                self.evidence.horizon()
            )));
        }
        Ok(())
    }

    fn is_vacuous(&self) -> bool {
        self.evidence.is_vacuous_through(self.time)
    }
}

/// Degree bounds for the numerator and denominator polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeBounds {
    pub numerator: usize,
    pub denominator: usize,
}

impl DegreeBounds {
    fn max(&self) -> usize {
        self.numerator.max(self.denominator)
    }
}

/// Degree bounds for the sensitivity function of `target` in `param`.
///
/// With evidence present, a transition parameter yields a quotient of two
/// polynomials of degree `n - 1`; an observation parameter yields numerator
/// degree `n` when the target state is the parameter's own state row and
/// `n - 1` otherwise, over a denominator of degree `n`; an initial parameter
/// yields a quotient of two linear functions. Without evidence the
/// denominator is the constant 1 and observation parameters cannot matter.
pub fn expected_degrees<R: Real>(
    param: &ParameterRef<R>,
    target: &SensitivityTarget,
) -> DegreeBounds {
    let n = target.time.max(1);
    let vacuous = target.is_vacuous();
    let (numerator, denominator) = match (param, vacuous) {
        (ParameterRef::Initial { .. }, true) => (1, 0),
        (ParameterRef::Initial { .. }, false) => (1, 1),
        (ParameterRef::Transition { .. }, true) => (n - 1, 0),
        (ParameterRef::Transition { .. }, false) => (n - 1, n - 1),
        (ParameterRef::Observation { .. }, true) => (0, 0),
        (ParameterRef::Observation { state, .. }, false) => {
            (if target.state == *state { n } else { n - 1 }, n)
        }
    };
    DegreeBounds {
        numerator,
        denominator,
    }
}

/// A fitted one-parameter sensitivity function.
#[derive(Debug, Clone)]
pub struct UnivariateSensitivity<R> {
    /// The quotient representation; numerator and denominator share a common
    /// positive scaling, so the quotient equals the filtered probability.
    pub function: RationalFunction<R>,
    pub param: ParameterRef<R>,
    pub target: SensitivityTarget,
    pub degree_bounds: DegreeBounds,
    /// Largest residual over the held-out validation nodes.
    pub fit_residual: R,
    /// The directly filtered probability at the nominal parameter value.
    pub nominal_value: R,
    /// Sub-interval of `[0, 1]` around the nominal value on which the
    /// denominator is strictly positive; `(0, 1)` means the whole interval.
    pub valid_interval: (R, R),
}

impl<R: Real> UnivariateSensitivity<R> {
    pub fn eval(&self, theta: R) -> R {
        self.function.eval(theta)
    }

    /// Denominator positive on all of `[0, 1]`.
    pub fn valid_everywhere(&self) -> bool {
        self.valid_interval.0 == R::zero() && self.valid_interval.1 == R::one()
    }
}

/// Compute the sensitivity function of `target` in `param` using the known
/// degree bounds for its parameter kind.
pub fn compute_univariate<R: Real>(
    model: &HmmModel<R>,
    target: &SensitivityTarget,
    param: &ParameterRef<R>,
) -> Result<UnivariateSensitivity<R>, SensitivityError> {
    let bounds = expected_degrees(param, target);
    compute_univariate_with_bounds(model, target, param, bounds)
}

/// As [`compute_univariate`], with explicit degree bounds. Fitting with
/// inflated bounds and inspecting the excess coefficients turns the degree
/// claims into a measurement.
pub fn compute_univariate_with_bounds<R: Real>(
    model: &HmmModel<R>,
    target: &SensitivityTarget,
    param: &ParameterRef<R>,
    bounds: DegreeBounds,
) -> Result<UnivariateSensitivity<R>, SensitivityError> {
    target.check(model)?;
    if bounds.max() > EXACT_DEGREE_CAP {
        return Err(SensitivityError::InvalidTarget(format!(
            "degree bound {} exceeds the exact-analysis cap of {EXACT_DEGREE_CAP}; \
             use a windowed analysis for long horizons",
            bounds.max()
        )));
    }
    let vacuous = target.is_vacuous();
    let fit_count = bounds.max() + 1;

    let samples = sample_with_reseed(fit_count, |theta| {
        let varied = model.apply_parameter(param, theta)?;
        let out = varied.filter(&target.evidence, target.time)?;
        let likelihood = out.log_likelihood.exp();
        Ok((out.posterior[target.state] * likelihood, likelihood))
    })?;

    // One common positive scaling keeps all fitted values in [0, 1] without
    // changing the quotient.
    let scale = samples
        .iter()
        .map(|s| s.value.1)
        .fold(R::zero(), R::max)
        .max(R::of(f64::MIN_POSITIVE));
    let joint_nodes: Vec<(R, R)> = samples.iter().map(|s| (s.theta, s.value.0 / scale)).collect();
    let like_nodes: Vec<(R, R)> = samples.iter().map(|s| (s.theta, s.value.1 / scale)).collect();

    let numerator = interpolate(&joint_nodes, bounds.numerator)?;
    let mut fit_residual = numerator.max_residual();
    let denominator = if vacuous {
        Polynomial::one()
    } else {
        let fit = interpolate(&like_nodes, bounds.denominator)?;
        fit_residual = fit_residual.max(fit.max_residual());
        fit.polynomial
    };
    if fit_residual > R::of(FIT_RESIDUAL_LIMIT) {
        return Err(SensitivityError::FitFailure {
            residual: fit_residual.as_f64(),
            limit: FIT_RESIDUAL_LIMIT,
        });
    }

    let nominal_value = model.filter(&target.evidence, target.time)?.posterior[target.state];
    let valid_interval = denominator_support(&denominator, param.nominal())?;
    let function = RationalFunction::new(numerator.polynomial, denominator)?;

    Ok(UnivariateSensitivity {
        function,
        param: *param,
        target: target.clone(),
        degree_bounds: bounds,
        fit_residual,
        nominal_value,
        valid_interval,
    })
}

struct Sample<R, V> {
    theta: R,
    value: V,
}

/// Evaluate `eval` at Chebyshev fit nodes plus held-out nodes. If evidence
/// becomes impossible at some node the node set is re-seeded once on an
/// interior interval; persistent failure is a degeneracy of the evidence.
fn sample_with_reseed<R: Real, V>(
    fit_count: usize,
    mut eval: impl FnMut(R) -> Result<V, ModelError>,
) -> Result<Vec<Sample<R, V>>, SensitivityError> {
    let mut first_failure = None;
    for (lo, hi) in [(0.0, 1.0), (0.05, 0.95)] {
        let thetas = nodes_with_held_out(fit_count, R::of(lo), R::of(hi));
        let mut samples = Vec::with_capacity(thetas.len());
        let mut failed = false;
        for theta in thetas {
            match eval(theta) {
                Ok(value) => samples.push(Sample { theta, value }),
                Err(ModelError::ImpossibleEvidence { step }) => {
                    if first_failure.is_none() {
                        first_failure = Some((theta.as_f64(), step));
                    }
                    failed = true;
                    break;
                }
                Err(other) => return Err(other.into()),
            }
        }
        if !failed {
            return Ok(samples);
        }
    }
    let (theta, step) = first_failure.expect("loop only exits early on failure");
    Err(SensitivityError::EvidenceDegeneracy { theta, step })
}

/// Chebyshev fit nodes followed by held-out nodes drawn from a finer
/// Chebyshev family, chosen to stay clear of the fit nodes.
fn nodes_with_held_out<R: Real>(fit_count: usize, lo: R, hi: R) -> Vec<R> {
    let mut nodes = chebyshev_nodes(fit_count, lo, hi);
    let candidates = chebyshev_nodes(fit_count + HELD_OUT, lo, hi);
    let mut scored: Vec<(R, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let gap = nodes
                .iter()
                .map(|&x| (x - c).abs())
                .fold(R::infinity(), R::min);
            (gap, i)
        })
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite").then(a.1.cmp(&b.1)));
    for &(_, i) in scored.iter().take(HELD_OUT) {
        nodes.push(candidates[i]);
    }
    nodes
}

/// The maximal subinterval around `nominal` where the denominator stays
/// positive, bounded by its roots in `[0, 1]`.
fn denominator_support<R: Real>(
    denominator: &Polynomial<R>,
    nominal: R,
) -> Result<(R, R), SensitivityError> {
    if denominator.is_constant() {
        return Ok((R::zero(), R::one()));
    }
    let roots = roots_in_unit_interval(denominator)?;
    let mut lo = R::zero();
    let mut hi = R::one();
    for &r in &roots {
        if r <= nominal {
            lo = r;
        } else {
            hi = r;
            break;
        }
    }
    Ok((lo, hi))
}

/// A polynomial in two variables, stored as a coefficient grid:
/// `coeffs[i][j]` multiplies `x^i * y^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariatePolynomial<R> {
    coeffs: Vec<Vec<R>>,
}

impl<R: Real> BivariatePolynomial<R> {
    pub fn new(coeffs: Vec<Vec<R>>) -> Self {
        Self { coeffs }
    }

    pub fn one() -> Self {
        Self {
            coeffs: vec![vec![R::one()]],
        }
    }

    pub fn coefficients(&self) -> &[Vec<R>] {
        &self.coeffs
    }

    pub fn eval(&self, x: R, y: R) -> R {
        let mut acc = R::zero();
        for row in self.coeffs.iter().rev() {
            let mut inner = R::zero();
            for &c in row.iter().rev() {
                inner = inner * y + c;
            }
            acc = acc * x + inner;
        }
        acc
    }

    /// Substitute the first variable, leaving a polynomial in `y`.
    pub fn fix_first(&self, x: R) -> Polynomial<R> {
        let cols = self.coeffs.iter().map(Vec::len).max().unwrap_or(1);
        let mut out = vec![R::zero(); cols];
        let mut power = R::one();
        for row in &self.coeffs {
            for (j, &c) in row.iter().enumerate() {
                out[j] = out[j] + c * power;
            }
            power = power * x;
        }
        Polynomial::new(out)
    }

    /// Substitute the second variable, leaving a polynomial in `x`.
    pub fn fix_second(&self, y: R) -> Polynomial<R> {
        let out = self
            .coeffs
            .iter()
            .map(|row| {
                let mut inner = R::zero();
                for &c in row.iter().rev() {
                    inner = inner * y + c;
                }
                inner
            })
            .collect();
        Polynomial::new(out)
    }

    /// Largest coefficient magnitude among terms where both variables have
    /// positive degree.
    fn cross_term_magnitude(&self) -> R {
        let mut best = R::zero();
        for row in self.coeffs.iter().skip(1) {
            for &c in row.iter().skip(1) {
                best = best.max(c.abs());
            }
        }
        best
    }
}

/// A fitted two-parameter sensitivity function over one observation stream's
/// sensitivity/specificity pair.
#[derive(Debug, Clone)]
pub struct BivariateSensitivity<R> {
    pub numerator: BivariatePolynomial<R>,
    pub denominator: BivariatePolynomial<R>,
    /// `(theta_se, theta_sp)` references, in distinct rows of one stream.
    pub params: (ParameterRef<R>, ParameterRef<R>),
    pub target: SensitivityTarget,
    /// Per-variable degree bound (`n`).
    pub degree: usize,
    pub fit_residual: R,
    /// Largest mixed-term coefficient: a separability diagnostic for the
    /// sum-of-univariate-polynomials form.
    pub cross_term_magnitude: R,
    pub nominal_value: R,
}

impl<R: Real> BivariateSensitivity<R> {
    pub fn eval(&self, se: R, sp: R) -> R {
        self.numerator.eval(se, sp) / self.denominator.eval(se, sp)
    }

    /// Restrict to a rational function of the second parameter.
    pub fn fix_first(&self, se: R) -> Result<RationalFunction<R>, PolyError> {
        RationalFunction::new(self.numerator.fix_first(se), self.denominator.fix_first(se))
    }

    /// Restrict to a rational function of the first parameter.
    pub fn fix_second(&self, sp: R) -> Result<RationalFunction<R>, PolyError> {
        RationalFunction::new(
            self.numerator.fix_second(sp),
            self.denominator.fix_second(sp),
        )
    }

    pub fn nominal_pair(&self) -> (R, R) {
        (self.params.0.nominal(), self.params.1.nominal())
    }
}

/// Compute the two-parameter sensitivity function for a pair of observation
/// parameters in distinct state rows of the same stream.
pub fn compute_bivariate<R: Real>(
    model: &HmmModel<R>,
    target: &SensitivityTarget,
    params: (&ParameterRef<R>, &ParameterRef<R>),
) -> Result<BivariateSensitivity<R>, SensitivityError> {
    target.check(model)?;
    let (first, second) = params;
    match (first, second) {
        (
            ParameterRef::Observation {
                stream: s1,
                state: r1,
                ..
            },
            ParameterRef::Observation {
                stream: s2,
                state: r2,
                ..
            },
        ) => {
            if s1 != s2 {
                return Err(SensitivityError::InvalidParams(format!(
                    "parameters come from different streams ({s1} and {s2})"
                )));
            }
            if r1 == r2 {
                return Err(SensitivityError::InvalidParams(format!(
                    "parameters share state row {r1}; co-variation requires distinct rows"
                )));
            }
        }
        _ => {
            return Err(SensitivityError::InvalidParams(
                "both parameters must be observation parameters".into(),
            ))
        }
    }

    let degree = target.time;
    if degree > EXACT_DEGREE_CAP {
        return Err(SensitivityError::InvalidTarget(format!(
            "per-variable degree {degree} exceeds the exact-analysis cap of {EXACT_DEGREE_CAP}"
        )));
    }
    let count = degree + 1;
    let vacuous = target.is_vacuous();

    let refilter = |se: R, sp: R| -> Result<(R, R), ModelError> {
        let varied = model.apply_parameter(first, se)?.apply_parameter(second, sp)?;
        let out = varied.filter(&target.evidence, target.time)?;
        let likelihood = out.log_likelihood.exp();
        Ok((out.posterior[target.state] * likelihood, likelihood))
    };

    let axis = chebyshev_nodes(count, R::zero(), R::one());
    let mut joints = vec![vec![R::zero(); count]; count];
    let mut likes = vec![vec![R::zero(); count]; count];
    let mut scale = R::of(f64::MIN_POSITIVE);
    for (a, &se) in axis.iter().enumerate() {
        for (b, &sp) in axis.iter().enumerate() {
            let (joint, like) = refilter(se, sp).map_err(|e| match e {
                ModelError::ImpossibleEvidence { step } => SensitivityError::EvidenceDegeneracy {
                    theta: se.as_f64(),
                    step,
                },
                other => other.into(),
            })?;
            joints[a][b] = joint;
            likes[a][b] = like;
            scale = scale.max(like);
        }
    }

    let numerator = fit_grid(&axis, &joints, scale, degree)?;
    let denominator = if vacuous {
        BivariatePolynomial::one()
    } else {
        fit_grid(&axis, &likes, scale, degree)?
    };

    // Held-out validation at off-grid points; a finer Chebyshev family has
    // the opposite parity, so it never collides with the fit grid.
    let held = chebyshev_nodes(count + HELD_OUT, R::zero(), R::one());
    let mut fit_residual = R::zero();
    for &(se, sp) in &[(held[0], held[1]), (held[1], held[0]), (held[2], held[2])] {
        let (joint, like) = refilter(se, sp).map_err(|e| match e {
            ModelError::ImpossibleEvidence { step } => SensitivityError::EvidenceDegeneracy {
                theta: se.as_f64(),
                step,
            },
            other => other.into(),
        })?;
        fit_residual = fit_residual.max((numerator.eval(se, sp) - joint / scale).abs());
        fit_residual = fit_residual.max((denominator.eval(se, sp) - like / scale).abs());
    }
    if fit_residual > R::of(FIT_RESIDUAL_LIMIT) {
        return Err(SensitivityError::FitFailure {
            residual: fit_residual.as_f64(),
            limit: FIT_RESIDUAL_LIMIT,
        });
    }

    let nominal_value = model.filter(&target.evidence, target.time)?.posterior[target.state];
    let cross_term_magnitude = numerator
        .cross_term_magnitude()
        .max(denominator.cross_term_magnitude());

    Ok(BivariateSensitivity {
        numerator,
        denominator,
        params: (*first, *second),
        target: target.clone(),
        degree,
        fit_residual,
        cross_term_magnitude,
        nominal_value,
    })
}

/// Successive univariate interpolation: fit along the first axis per column,
/// then fit each coefficient along the second axis.
fn fit_grid<R: Real>(
    axis: &[R],
    values: &[Vec<R>],
    scale: R,
    degree: usize,
) -> Result<BivariatePolynomial<R>, SensitivityError> {
    let count = axis.len();
    // first_fit[b] = coefficients in x of the slice at y = axis[b]
    let mut first_fit = Vec::with_capacity(count);
    for b in 0..count {
        let nodes: Vec<(R, R)> = axis
            .iter()
            .zip(values)
            .map(|(&x, row)| (x, row[b] / scale))
            .collect();
        let fit = interpolate(&nodes, degree)?;
        first_fit.push(padded(&fit.polynomial, degree));
    }
    let mut coeffs = Vec::with_capacity(count);
    for i in 0..=degree {
        let nodes: Vec<(R, R)> = axis
            .iter()
            .zip(&first_fit)
            .map(|(&y, slice)| (y, slice[i]))
            .collect();
        let fit = interpolate(&nodes, degree)?;
        coeffs.push(padded(&fit.polynomial, degree));
    }
    Ok(BivariatePolynomial::new(coeffs))
}

fn padded<R: Real>(p: &Polynomial<R>, degree: usize) -> Vec<R> {
    let mut out = p.coefficients().to_vec();
    out.resize(degree + 1, R::zero());
    out
}
