//! Threshold decision making and decision-region derivation.
//!
//! A probability of interest is mapped to one of three actions by two
//! threshold probabilities: below the lower threshold treatment is withheld,
//! above the upper threshold treatment starts immediately, and the closed
//! band between them calls for gathering further information. Equating a
//! sensitivity function to the thresholds and isolating the roots yields the
//! parameter regions within which the recommended action is unchanged.

use thiserror::Error;

use crate::polynomials::{roots_in_unit_interval, threshold_polynomial, PolyError, Polynomial};
use crate::scalar::Real;
use crate::sensitivity::{BivariateSensitivity, UnivariateSensitivity};

/// Boundaries this close to two root candidates are merged.
const BOUNDARY_MERGE: f64 = 1e-9;

/// Derivative magnitudes below this are reported as sign 0.
const FLAT_DERIVATIVE: f64 = 1e-8;

/// Neighboring curve points further apart than this start a new branch.
const BRANCH_GAP: f64 = 0.1;

#[derive(Debug, Error)]
pub enum DecisionError {
    #[error("thresholds must satisfy 0 <= lower <= treatment <= upper <= 1, got ({lower}, {treatment}, {upper})")]
    InvalidThresholds {
        lower: f64,
        treatment: f64,
        upper: f64,
    },

    #[error("sensitivity function is identically equal to threshold {threshold}: regions are degenerate")]
    DegenerateRegion { threshold: f64 },

    #[error("grid resolution must be at least 2, got {0}")]
    InvalidResolution(usize),

    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The three threshold probabilities of the decision model.
///
/// `p_star` is the treatment threshold, carried for reporting; only the
/// lower (`p_minus`) and upper (`p_plus`) thresholds shape the regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdModel<R> {
    p_minus: R,
    p_star: R,
    p_plus: R,
}

impl<R: Real> ThresholdModel<R> {
    pub fn new(p_minus: R, p_star: R, p_plus: R) -> Result<Self, DecisionError> {
        let ordered = R::zero() <= p_minus
            && p_minus <= p_star
            && p_star <= p_plus
            && p_plus <= R::one();
        if !ordered {
            return Err(DecisionError::InvalidThresholds {
                lower: p_minus.as_f64(),
                treatment: p_star.as_f64(),
                upper: p_plus.as_f64(),
            });
        }
        Ok(Self {
            p_minus,
            p_star,
            p_plus,
        })
    }

    pub fn p_minus(&self) -> R {
        self.p_minus
    }

    pub fn p_star(&self) -> R {
        self.p_star
    }

    pub fn p_plus(&self) -> R {
        self.p_plus
    }
}

/// The recommended action, ordered along the probability axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Decision {
    Withhold,
    Test,
    Treat,
}

impl Decision {
    pub fn label(&self) -> &'static str {
        match self {
            Decision::Withhold => "withhold",
            Decision::Test => "test",
            Decision::Treat => "treat",
        }
    }
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Map a probability to a decision. The test band is closed: probabilities
/// exactly at either threshold call for gathering further information.
pub fn decide<R: Real>(p: R, thresholds: &ThresholdModel<R>) -> Decision {
    if p < thresholds.p_minus {
        Decision::Withhold
    } else if p <= thresholds.p_plus {
        Decision::Test
    } else {
        Decision::Treat
    }
}

/// Parameter intervals on `[0, 1]` and the decision holding on each.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRegions<R> {
    /// Interior boundaries, ascending; each is a root of a threshold
    /// equation. The boundaries partition `[0, 1]`.
    pub boundaries: Vec<R>,
    /// One decision per open subinterval; `boundaries.len() + 1` entries,
    /// adjacent entries differ.
    pub labels: Vec<Decision>,
    /// Index of the subinterval containing the nominal parameter value.
    pub nominal_region_index: usize,
    /// Distance from the nominal value to the nearest boundary of its
    /// region; infinite when the region is all of `[0, 1]`.
    pub margin: R,
    /// Sign of the sensitivity function's first derivative at each boundary
    /// (`-1`, `0`, `+1`).
    pub derivative_signs: Vec<i8>,
}

impl<R: Real> DecisionRegions<R> {
    /// The decision at the nominal parameter value.
    pub fn nominal_decision(&self) -> Decision {
        self.labels[self.nominal_region_index]
    }

    /// Bounds of the region at `index`: `(lower, upper)` with the domain
    /// endpoints standing in at the ends.
    pub fn region_bounds(&self, index: usize) -> (R, R) {
        let lo = if index == 0 {
            R::zero()
        } else {
            self.boundaries[index - 1]
        };
        let hi = if index == self.boundaries.len() {
            R::one()
        } else {
            self.boundaries[index]
        };
        (lo, hi)
    }
}

/// Assemble decision regions from precomputed threshold-equation roots.
///
/// Interior subintervals are labeled by the decision at their midpoint;
/// subintervals with equal labels (tangential roots) are merged, so adjacent
/// labels always differ. Derivative signs are estimated by central
/// differences of `f`.
pub fn assemble_regions<R: Real>(
    lower_roots: &[R],
    upper_roots: &[R],
    thresholds: &ThresholdModel<R>,
    nominal: R,
    f: impl Fn(R) -> R,
) -> DecisionRegions<R> {
    let merge = R::of(BOUNDARY_MERGE);
    let mut boundaries: Vec<R> = lower_roots
        .iter()
        .chain(upper_roots)
        .copied()
        .filter(|&r| r > R::of(1e-12) && r < R::one() - R::of(1e-12))
        .collect();
    boundaries.sort_by(|a, b| a.partial_cmp(b).expect("roots are finite"));
    boundaries.dedup_by(|a, b| (*a - *b).abs() < merge);

    // Label every subinterval by its midpoint, then merge equal neighbors.
    let half = R::of(0.5);
    let mut kept: Vec<R> = Vec::with_capacity(boundaries.len());
    let mut labels: Vec<Decision> = Vec::with_capacity(boundaries.len() + 1);
    let mut lo = R::zero();
    for i in 0..=boundaries.len() {
        let hi = boundaries.get(i).copied().unwrap_or_else(R::one);
        let label = decide(f((lo + hi) * half), thresholds);
        if labels.last() == Some(&label) {
            kept.pop();
        } else {
            labels.push(label);
        }
        if i < boundaries.len() {
            kept.push(boundaries[i]);
        }
        lo = hi;
    }
    let boundaries = kept;

    let derivative_signs = boundaries
        .iter()
        .map(|&b| {
            let h = R::of(1e-6).min(b * half).min((R::one() - b) * half);
            let v = (f(b + h) - f(b - h)) / (h + h);
            if v > R::of(FLAT_DERIVATIVE) {
                1
            } else if v < -R::of(FLAT_DERIVATIVE) {
                -1
            } else {
                0
            }
        })
        .collect();

    let nominal_region_index = boundaries.partition_point(|&b| b < nominal);
    let mut margin = R::infinity();
    if nominal_region_index > 0 {
        margin = margin.min(nominal - boundaries[nominal_region_index - 1]);
    }
    if nominal_region_index < boundaries.len() {
        margin = margin.min(boundaries[nominal_region_index] - nominal);
    }

    DecisionRegions {
        boundaries,
        labels,
        nominal_region_index,
        margin,
        derivative_signs,
    }
}

/// Decision regions for a one-parameter sensitivity function: the sorted
/// roots of `f = p_minus` and `f = p_plus` in `[0, 1]`, with each subinterval
/// labeled by the decision holding there.
pub fn single_param_regions<R: Real>(
    f: &UnivariateSensitivity<R>,
    thresholds: &ThresholdModel<R>,
) -> Result<DecisionRegions<R>, DecisionError> {
    let lower = threshold_roots(f, thresholds.p_minus)?;
    let upper = threshold_roots(f, thresholds.p_plus)?;
    Ok(assemble_regions(
        &lower,
        &upper,
        thresholds,
        f.param.nominal(),
        |x| f.eval(x),
    ))
}

fn threshold_roots<R: Real>(
    f: &UnivariateSensitivity<R>,
    threshold: R,
) -> Result<Vec<R>, DecisionError> {
    let poly = threshold_polynomial(&f.function, threshold);
    if poly.is_zero() {
        return Err(DecisionError::DegenerateRegion {
            threshold: threshold.as_f64(),
        });
    }
    rational_threshold_roots(&poly, f.function.denominator())
}

/// Roots of the threshold polynomial, discarding points where the
/// denominator vanishes (poles, not crossings).
fn rational_threshold_roots<R: Real>(
    poly: &Polynomial<R>,
    denominator: &Polynomial<R>,
) -> Result<Vec<R>, DecisionError> {
    if poly.is_constant() {
        return Ok(Vec::new());
    }
    let den_scale = denominator
        .coefficients()
        .iter()
        .map(|c| c.abs())
        .fold(R::zero(), R::max);
    let cutoff = R::of(1e-9) * (R::one() + den_scale);
    let roots = roots_in_unit_interval(poly)?
        .into_iter()
        .filter(|&r| denominator.eval(r).abs() > cutoff)
        .collect();
    Ok(roots)
}

/// Which threshold a boundary curve belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdSide {
    /// The no treatment-test threshold `p_minus`.
    Lower,
    /// The test-treatment threshold `p_plus`.
    Upper,
}

impl ThresholdSide {
    pub fn label(&self) -> &'static str {
        match self {
            ThresholdSide::Lower => "lower",
            ThresholdSide::Upper => "upper",
        }
    }
}

/// Points in the unit square where a two-parameter sensitivity function
/// attains one threshold, grouped into branches by continuity.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve<R> {
    pub side: ThresholdSide,
    pub threshold: R,
    /// Point sequences `(theta_se, theta_sp)`, each continuous under the
    /// branch gap.
    pub branches: Vec<Vec<(R, R)>>,
}

impl<R: Real> BoundaryCurve<R> {
    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &(R, R)> {
        self.branches.iter().flatten()
    }
}

/// Trace both threshold boundary curves of a two-parameter sensitivity
/// function over a `samples`-column grid.
///
/// For each sampled first parameter the function is restricted to a
/// univariate rational function of the second and all threshold crossings in
/// `[0, 1]` are isolated. When the restriction is identically at the
/// threshold the whole grid column lies on the curve.
pub fn boundary_curves<R: Real>(
    f: &BivariateSensitivity<R>,
    thresholds: &ThresholdModel<R>,
    samples: usize,
) -> Result<(BoundaryCurve<R>, BoundaryCurve<R>), DecisionError> {
    if samples < 2 {
        return Err(DecisionError::InvalidResolution(samples));
    }
    let lower = trace_curve(f, ThresholdSide::Lower, thresholds.p_minus, samples)?;
    let upper = trace_curve(f, ThresholdSide::Upper, thresholds.p_plus, samples)?;
    Ok((lower, upper))
}

fn trace_curve<R: Real>(
    f: &BivariateSensitivity<R>,
    side: ThresholdSide,
    threshold: R,
    samples: usize,
) -> Result<BoundaryCurve<R>, DecisionError> {
    let step = R::one() / R::of((samples - 1) as f64);
    let gap = R::of(BRANCH_GAP);
    let mut branches: Vec<Vec<(R, R)>> = Vec::new();
    // (branch index, endpoint) of each branch extended in the previous column.
    let mut active: Vec<(usize, (R, R))> = Vec::new();

    for col in 0..samples {
        let se = (step * R::of(col as f64)).min(R::one());
        let restricted = f.fix_first(se)?;
        let poly = threshold_polynomial(&restricted, threshold);

        if poly.is_zero() {
            // Identically at the threshold along this column: the whole grid
            // column is one vertical branch.
            let column: Vec<(R, R)> = (0..samples)
                .map(|row| (se, (step * R::of(row as f64)).min(R::one())))
                .collect();
            branches.push(column);
            active.clear();
            continue;
        }

        let roots = rational_threshold_roots(&poly, restricted.denominator())?;
        let mut next_active = Vec::with_capacity(roots.len());
        let mut claimed = vec![false; active.len()];
        for &sp in &roots {
            let point = (se, sp);
            let mut best: Option<(usize, R)> = None;
            for (slot, &(_, end)) in active.iter().enumerate() {
                if claimed[slot] {
                    continue;
                }
                let dx = end.0 - point.0;
                let dy = end.1 - point.1;
                let dist = (dx * dx + dy * dy).sqrt();
                if dist <= gap && best.is_none_or(|(_, d)| dist < d) {
                    best = Some((slot, dist));
                }
            }
            match best {
                Some((slot, _)) => {
                    claimed[slot] = true;
                    let branch = active[slot].0;
                    branches[branch].push(point);
                    next_active.push((branch, point));
                }
                None => {
                    branches.push(vec![point]);
                    next_active.push((branches.len() - 1, point));
                }
            }
        }
        active = next_active;
    }

    Ok(BoundaryCurve {
        side,
        threshold,
        branches,
    })
}

/// Classify one `(theta_se, theta_sp)` pair by evaluating the two-parameter
/// sensitivity function and applying the threshold model.
pub fn classify_2d<R: Real>(
    f: &BivariateSensitivity<R>,
    thresholds: &ThresholdModel<R>,
    point: (R, R),
) -> Decision {
    decide(f.eval(point.0, point.1), thresholds)
}
