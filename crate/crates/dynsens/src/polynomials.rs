//! Univariate polynomials, rational functions, interpolation, and real-root
//! isolation on the unit interval.
//!
//! Coefficients are stored in ascending degree order. Root isolation scans
//! sign changes over a uniform grid augmented with the critical points of the
//! polynomial (found recursively through the derivative), then refines each
//! bracket by bisection; tangential roots are picked up at critical points
//! where the polynomial value is negligible.

use thiserror::Error;

use crate::scalar::Real;

/// Relative tolerance for trimming trailing coefficients.
const TRIM_TOL: f64 = 1e-10;

/// Uniform subintervals scanned for sign changes in `[0, 1]`.
const SCAN_INTERVALS: usize = 4096;

/// Bisection refinement width for isolated roots.
const ROOT_WIDTH: f64 = 1e-12;

/// Distance under which two root candidates are merged.
const ROOT_MERGE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("interpolation nodes are degenerate: duplicate x value {x}")]
    DegenerateNodes { x: f64 },

    #[error("need at least {needed} nodes for degree bound {bound}, got {got}")]
    InsufficientNodes {
        needed: usize,
        bound: usize,
        got: usize,
    },

    #[error("interpolation node x = {x} outside [0, 1]")]
    NodeOutOfRange { x: f64 },

    #[error("zero polynomial: every point is a root")]
    ZeroPolynomial,

    #[error("rational function has a zero denominator polynomial")]
    ZeroDenominator,
}

/// A univariate polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<R> {
    coefficients: Vec<R>,
}

impl<R: Real> Polynomial<R> {
    /// Build from ascending coefficients, trimming trailing entries smaller
    /// than `1e-10` relative to the largest coefficient.
    pub fn new(coefficients: Vec<R>) -> Self {
        let mut p = Self { coefficients };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self {
            coefficients: vec![R::zero()],
        }
    }

    pub fn one() -> Self {
        Self {
            coefficients: vec![R::one()],
        }
    }

    pub fn constant(c: R) -> Self {
        Self::new(vec![c])
    }

    fn trim(&mut self) {
        if self.coefficients.is_empty() {
            self.coefficients.push(R::zero());
            return;
        }
        let scale = self
            .coefficients
            .iter()
            .map(|c| c.abs())
            .fold(R::zero(), R::max);
        let cutoff = scale * R::of(TRIM_TOL);
        while self.coefficients.len() > 1 {
            let last = *self.coefficients.last().expect("non-empty");
            if last.abs() <= cutoff {
                self.coefficients.pop();
            } else {
                break;
            }
        }
        if self.coefficients.len() == 1 && self.coefficients[0].abs() <= cutoff {
            self.coefficients[0] = R::zero();
        }
    }

    pub fn coefficients(&self) -> &[R] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.len() == 1 && self.coefficients[0] == R::zero()
    }

    pub fn is_constant(&self) -> bool {
        self.coefficients.len() == 1
    }

    /// Horner evaluation.
    pub fn eval(&self, x: R) -> R {
        let mut acc = R::zero();
        for &c in self.coefficients.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Derivative by the coefficient rule.
    pub fn derivative(&self) -> Self {
        if self.coefficients.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * R::of(k as f64))
            .collect();
        Self::new(coeffs)
    }

    /// `self - scale * other`, trimmed.
    pub fn sub_scaled(&self, other: &Self, scale: R) -> Self {
        let len = self.coefficients.len().max(other.coefficients.len());
        let mut coeffs = vec![R::zero(); len];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let a = self.coefficients.get(k).copied().unwrap_or_else(R::zero);
            let b = other.coefficients.get(k).copied().unwrap_or_else(R::zero);
            *c = a - b * scale;
        }
        Self::new(coeffs)
    }

    fn max_abs_coefficient(&self) -> R {
        self.coefficients
            .iter()
            .map(|c| c.abs())
            .fold(R::zero(), R::max)
    }
}

/// A quotient of two polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction<R> {
    numerator: Polynomial<R>,
    denominator: Polynomial<R>,
}

impl<R: Real> RationalFunction<R> {
    pub fn new(numerator: Polynomial<R>, denominator: Polynomial<R>) -> Result<Self, PolyError> {
        if denominator.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    /// The polynomial `p` viewed as `p / 1`.
    pub fn from_polynomial(numerator: Polynomial<R>) -> Self {
        Self {
            numerator,
            denominator: Polynomial::one(),
        }
    }

    pub fn numerator(&self) -> &Polynomial<R> {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial<R> {
        &self.denominator
    }

    pub fn eval(&self, x: R) -> R {
        self.numerator.eval(x) / self.denominator.eval(x)
    }

    /// First derivative by the quotient rule.
    pub fn derivative_at(&self, x: R) -> R {
        let n = self.numerator.eval(x);
        let d = self.denominator.eval(x);
        let dn = self.numerator.derivative().eval(x);
        let dd = self.denominator.derivative().eval(x);
        (dn * d - n * dd) / (d * d)
    }
}

/// Chebyshev points of the first kind mapped to `[lo, hi]`, ascending.
pub fn chebyshev_nodes<R: Real>(count: usize, lo: R, hi: R) -> Vec<R> {
    let half = R::of(0.5);
    let pi = R::of(std::f64::consts::PI);
    let n = R::of(count as f64);
    let mut nodes: Vec<R> = (0..count)
        .map(|k| {
            let angle = pi * (R::of(2.0 * k as f64) + R::one()) / (R::of(2.0) * n);
            let unit = (R::one() + angle.cos()) * half;
            lo + (hi - lo) * unit
        })
        .collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("nodes are finite"));
    nodes
}

/// An interpolated polynomial together with its residuals at the nodes not
/// used for fitting.
#[derive(Debug, Clone)]
pub struct Interpolation<R> {
    pub polynomial: Polynomial<R>,
    /// `|p(x) - y|` at each node beyond the first `degree_bound + 1`.
    pub residuals: Vec<R>,
}

impl<R: Real> Interpolation<R> {
    pub fn max_residual(&self) -> R {
        self.residuals.iter().copied().fold(R::zero(), R::max)
    }
}

/// Fit the unique polynomial of degree `<= degree_bound` through the first
/// `degree_bound + 1` nodes by Newton divided differences; any further nodes
/// are held out and their residuals reported.
pub fn interpolate<R: Real>(
    nodes: &[(R, R)],
    degree_bound: usize,
) -> Result<Interpolation<R>, PolyError> {
    let needed = degree_bound + 1;
    if nodes.len() < needed {
        return Err(PolyError::InsufficientNodes {
            needed,
            bound: degree_bound,
            got: nodes.len(),
        });
    }
    let slack = R::of(1e-12);
    for &(x, _) in nodes {
        if x < -slack || x > R::one() + slack {
            return Err(PolyError::NodeOutOfRange { x: x.as_f64() });
        }
    }
    let mut fit: Vec<(R, R)> = nodes[..needed].to_vec();
    for (i, &(xi, _)) in fit.iter().enumerate() {
        for &(xj, _) in &fit[..i] {
            if (xi - xj).abs() < R::of(1e-14) {
                return Err(PolyError::DegenerateNodes { x: xi.as_f64() });
            }
        }
    }

    // Leja ordering keeps the divided-difference table well conditioned; the
    // interpolant itself is order-independent.
    for i in 0..fit.len() {
        let mut best = i;
        let mut best_score = R::neg_infinity();
        for j in i..fit.len() {
            let score = if i == 0 {
                fit[j].0.abs()
            } else {
                fit[..i]
                    .iter()
                    .map(|&(x, _)| (fit[j].0 - x).abs().ln())
                    .fold(R::zero(), |a, b| a + b)
            };
            if score > best_score {
                best = j;
                best_score = score;
            }
        }
        fit.swap(i, best);
    }

    // The monomial basis on [0, 1] is poorly conditioned at higher degrees;
    // one round of iterative refinement on the fit nodes recovers the digits
    // the expansion loses.
    let mut coeffs = newton_monomial(&fit);
    let residual_nodes: Vec<(R, R)> = fit
        .iter()
        .map(|&(x, y)| (x, y - horner(&coeffs, x)))
        .collect();
    for (k, c) in newton_monomial(&residual_nodes).into_iter().enumerate() {
        coeffs[k] = coeffs[k] + c;
    }
    let polynomial = Polynomial::new(coeffs);

    let residuals = nodes[needed..]
        .iter()
        .map(|&(x, y)| (polynomial.eval(x) - y).abs())
        .collect();

    Ok(Interpolation {
        polynomial,
        residuals,
    })
}

/// Newton divided differences expanded to monomial coefficients; the node
/// order is taken as given.
fn newton_monomial<R: Real>(fit: &[(R, R)]) -> Vec<R> {
    let count = fit.len();
    let xs: Vec<R> = fit.iter().map(|&(x, _)| x).collect();
    let mut table: Vec<R> = fit.iter().map(|&(_, y)| y).collect();
    for j in 1..count {
        for i in (j..count).rev() {
            table[i] = (table[i] - table[i - 1]) / (xs[i] - xs[i - j]);
        }
    }

    let mut coeffs = vec![R::zero(); count];
    coeffs[0] = table[count - 1];
    let mut used = 1;
    for j in (0..count - 1).rev() {
        // coeffs <- coeffs * (x - xs[j]) + table[j]
        coeffs.copy_within(0..used, 1);
        coeffs[0] = R::zero();
        used += 1;
        let shift = xs[j];
        for k in 0..used - 1 {
            let high = coeffs[k + 1];
            coeffs[k] = coeffs[k] - shift * high;
        }
        coeffs[0] = coeffs[0] + table[j];
    }
    coeffs
}

fn horner<R: Real>(coeffs: &[R], x: R) -> R {
    let mut acc = R::zero();
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// All real roots of `p` in `[0, 1]`, ascending, refined to width `1e-12`.
///
/// Sign changes are bracketed over 4096 uniform subintervals together with
/// the critical points of `p`, so closely spaced simple roots are separated;
/// critical points where `|p|` is negligible are reported as tangential
/// roots. Roots closer than `1e-9` are merged.
pub fn roots_in_unit_interval<R: Real>(p: &Polynomial<R>) -> Result<Vec<R>, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if p.is_constant() {
        return Ok(Vec::new());
    }

    let value_tol = R::of(1e-8) * (R::one() + p.max_abs_coefficient());

    // Critical points partition [0, 1] into monotone pieces.
    let derivative = p.derivative();
    let critical = if derivative.is_zero() {
        Vec::new()
    } else {
        roots_in_unit_interval(&derivative)?
    };

    let mut breakpoints: Vec<R> = Vec::with_capacity(SCAN_INTERVALS + critical.len() + 2);
    let step = R::one() / R::of(SCAN_INTERVALS as f64);
    for i in 0..=SCAN_INTERVALS {
        breakpoints.push(step * R::of(i as f64));
    }
    breakpoints.extend(critical.iter().copied());
    breakpoints.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    breakpoints.dedup_by(|a, b| (*a - *b).abs() < R::of(1e-15));

    let mut roots = Vec::new();
    let mut prev_x = breakpoints[0];
    let mut prev_v = p.eval(prev_x);
    if prev_v == R::zero() {
        roots.push(prev_x);
    }
    for &x in &breakpoints[1..] {
        let v = p.eval(x);
        if v == R::zero() {
            roots.push(x);
        } else if prev_v != R::zero() && (prev_v > R::zero()) != (v > R::zero()) {
            roots.push(bisect(p, prev_x, x, prev_v));
        }
        prev_x = x;
        prev_v = v;
    }

    // Tangential (even multiplicity) roots sit at critical points where the
    // polynomial all but vanishes. A critical point whose adjoining monotone
    // segments already contain a sign-change root is a crossing, not a touch
    // — unless the value at the critical point is below float noise, in
    // which case those "crossings" are the edges of a cancellation plateau
    // and the critical point itself is the root.
    let noise_tol = R::epsilon() * R::of(512.0) * (R::one() + p.max_abs_coefficient());
    for (i, &c) in critical.iter().enumerate() {
        let at_c = p.eval(c).abs();
        if at_c >= value_tol {
            continue;
        }
        let lo = if i > 0 { critical[i - 1] } else { R::zero() };
        let hi = critical.get(i + 1).copied().unwrap_or_else(R::one);
        if at_c < noise_tol {
            let cluster = R::of(1e-7);
            roots.retain(|&r| !(r >= lo && r <= hi && (r - c).abs() < cluster));
            roots.push(c);
        } else if !roots.iter().any(|&r| r >= lo && r <= hi) {
            roots.push(c);
        }
    }

    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    roots.dedup_by(|a, b| (*a - *b).abs() < R::of(ROOT_MERGE));
    Ok(roots)
}

fn bisect<R: Real>(p: &Polynomial<R>, mut lo: R, mut hi: R, mut lo_val: R) -> R {
    let width = R::of(ROOT_WIDTH);
    let half = R::of(0.5);
    while hi - lo > width {
        let mid = (lo + hi) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        let v = p.eval(mid);
        if v == R::zero() {
            return mid;
        }
        if (v > R::zero()) == (lo_val > R::zero()) {
            lo = mid;
            lo_val = v;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * half
}

/// The polynomial whose roots (where the denominator is nonzero) solve
/// `f(x) = threshold`: `numerator - threshold * denominator`, trimmed.
///
/// A zero result means `f` is identically at the threshold; callers treat
/// that as a degenerate case.
pub fn threshold_polynomial<R: Real>(f: &RationalFunction<R>, threshold: R) -> Polynomial<R> {
    f.numerator().sub_scaled(f.denominator(), threshold)
}
