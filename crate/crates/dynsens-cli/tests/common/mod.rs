#![allow(dead_code)] // each test target uses a subset of these helpers

//! Shared helpers for the integration suites: seeded random models and an
//! independent brute-force filtering oracle.

use std::collections::BTreeMap;

use dynsens::{EvidenceSequence, FactoredDbn, HmmModel, Matrix, ObservationStream};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random stochastic row (flat Dirichlet via exponential spacings).
pub fn stochastic_row(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len)
        .map(|_| -(rng.gen::<f64>().max(1e-12)).ln())
        .collect();
    let sum: f64 = row.iter().sum();
    for v in &mut row {
        *v /= sum;
    }
    row
}

pub fn random_stochastic_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_rows((0..rows).map(|_| stochastic_row(rng, cols)).collect()).unwrap()
}

/// A stochastic row bounded away from determinism: a flat Dirichlet draw
/// mixed with the uniform vector, so every entry is at least
/// `0.25 / len`.
pub fn moderate_row(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let base = stochastic_row(rng, len);
    base.into_iter()
        .map(|v| 0.75 * v + 0.25 / len as f64)
        .collect()
}

pub fn moderate_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_rows((0..rows).map(|_| moderate_row(rng, cols)).collect()).unwrap()
}

/// A model whose processes are moderately stochastic: transition rows and
/// emission rows keep a uniform floor, the setting the contraction analysis
/// is aimed at.
pub fn moderate_model(rng: &mut ChaCha8Rng, states: usize, stream_cards: &[usize]) -> HmmModel {
    let transition = moderate_matrix(rng, states, states);
    let streams = stream_cards
        .iter()
        .map(|&m| moderate_matrix(rng, states, m))
        .collect();
    let initial = moderate_row(rng, states);
    HmmModel::new(transition, streams, initial).unwrap()
}

/// A random model with `states` hidden states and one observation stream per
/// entry of `stream_cards`.
pub fn random_model(rng: &mut ChaCha8Rng, states: usize, stream_cards: &[usize]) -> HmmModel {
    let transition = random_stochastic_matrix(rng, states, states);
    let streams = stream_cards
        .iter()
        .map(|&m| random_stochastic_matrix(rng, states, m))
        .collect();
    let initial = stochastic_row(rng, states);
    HmmModel::new(transition, streams, initial).unwrap()
}

/// Evidence sampled from the model's own generative process: a hidden
/// trajectory is simulated and each stream is reported with probability
/// `density` per step.
pub fn sampled_evidence(
    rng: &mut ChaCha8Rng,
    model: &HmmModel,
    horizon: usize,
    density: f64,
) -> EvidenceSequence {
    let mut slices = Vec::with_capacity(horizon);
    let mut state = sample_index(rng, model.initial());
    for t in 0..horizon {
        if t > 0 {
            state = sample_index(rng, model.transition().row(state));
        }
        let mut slice = BTreeMap::new();
        for (k, table) in model.streams().iter().enumerate() {
            if rng.gen::<f64>() < density {
                slice.insert(k, sample_index(rng, table.row(state)));
            }
        }
        slices.push(slice);
    }
    EvidenceSequence::new(slices)
}

pub fn sample_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let mut u = rng.gen::<f64>();
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Brute-force filtering by explicit enumeration of all hidden trajectories.
/// Returns the posterior at step `n` and the evidence likelihood.
pub fn brute_force_filter(
    model: &HmmModel,
    evidence: &EvidenceSequence,
    n: usize,
) -> (Vec<f64>, f64) {
    let l = model.num_states();
    let mut posterior = vec![0.0; l];
    let mut likelihood = 0.0;
    let mut path = vec![0usize; n];
    enumerate_paths(model, evidence, n, 0, 1.0, &mut path, &mut |weight, last| {
        posterior[last] += weight;
        likelihood += weight;
    });
    for p in posterior.iter_mut() {
        *p /= likelihood;
    }
    (posterior, likelihood)
}

fn enumerate_paths(
    model: &HmmModel,
    evidence: &EvidenceSequence,
    n: usize,
    depth: usize,
    weight: f64,
    path: &mut [usize],
    visit: &mut impl FnMut(f64, usize),
) {
    if depth == n {
        visit(weight, path[n - 1]);
        return;
    }
    let l = model.num_states();
    for state in 0..l {
        let mut w = weight;
        w *= if depth == 0 {
            model.initial()[state]
        } else {
            model.transition().get(path[depth - 1], state)
        };
        for (&stream, &value) in evidence.slice(depth + 1) {
            w *= model.stream(stream).get(state, value);
        }
        if w == 0.0 {
            continue;
        }
        path[depth] = state;
        enumerate_paths(model, evidence, n, depth + 1, w, path, visit);
    }
}

/// A random factored model with the given per-subprocess state counts and
/// one stream per entry of `stream_specs` (parent subset, cardinality).
pub fn random_factored(
    rng: &mut ChaCha8Rng,
    state_counts: &[usize],
    stream_specs: &[(Vec<usize>, usize)],
) -> FactoredDbn {
    let subprocesses = state_counts
        .iter()
        .map(|&l| random_stochastic_matrix(rng, l, l))
        .collect();
    let initials = state_counts
        .iter()
        .map(|&l| stochastic_row(rng, l))
        .collect();
    let streams = stream_specs
        .iter()
        .map(|(parents, card)| {
            let rows: usize = parents.iter().map(|&p| state_counts[p]).product();
            ObservationStream {
                parents: parents.clone(),
                matrix: random_stochastic_matrix(rng, rows, *card),
            }
        })
        .collect();
    FactoredDbn::new(subprocesses, streams, initials).unwrap()
}

/// Brute-force filtering of a factored model by enumerating joint
/// trajectories directly in the factored representation (independent of the
/// flattening code path).
pub fn brute_force_factored_filter(
    dbn: &FactoredDbn,
    evidence: &EvidenceSequence,
    n: usize,
) -> (Vec<f64>, f64) {
    let counts: Vec<usize> = dbn.initials().iter().map(Vec::len).collect();
    let joint: usize = counts.iter().product();

    let digits = |mut state: usize| -> Vec<usize> {
        let mut out = vec![0; counts.len()];
        for (s, &c) in counts.iter().enumerate().rev() {
            out[s] = state % c;
            state /= c;
        }
        out
    };

    let mut posterior = vec![0.0; joint];
    let mut likelihood = 0.0;
    let mut stack = vec![(0usize, 0usize, 1.0f64)];
    // Depth-first over (depth, previous joint state, weight).
    while let Some((depth, prev, weight)) = stack.pop() {
        for state in 0..joint {
            let to = digits(state);
            let mut w = weight;
            if depth == 0 {
                for (s, init) in dbn.initials().iter().enumerate() {
                    w *= init[to[s]];
                }
            } else {
                let from = digits(prev);
                for (s, sub) in dbn.subprocesses().iter().enumerate() {
                    w *= sub.get(from[s], to[s]);
                }
            }
            for (&stream, &value) in evidence.slice(depth + 1) {
                let spec = &dbn.streams()[stream];
                let mut row = 0;
                for &p in &spec.parents {
                    row = row * counts[p] + to[p];
                }
                w *= spec.matrix.get(row, value);
            }
            if w == 0.0 {
                continue;
            }
            if depth + 1 == n {
                posterior[state] += w;
                likelihood += w;
            } else {
                stack.push((depth + 1, state, w));
            }
        }
    }
    for p in posterior.iter_mut() {
        *p /= likelihood;
    }
    (posterior, likelihood)
}
