//! Independent oracles shared by the integration suites. Everything here
//! is a from-first-principles reimplementation kept deliberately separate
//! from the library's code paths.

#![allow(dead_code)]

use fedvet::data::Dataset;
use fedvet::model::WeightVector;
use fedvet::snowball::{ConsensusOutcome, ConsensusParams, TraceRecord};

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// k nearest indices of `target` among `points`, optionally skipping one
// index, ties broken by index.
fn knn(points: &[Vec<f64>], target: &[f64], skip: Option<usize>, k: usize) -> Vec<usize> {
    let mut dists: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(j, p)| (euclid(target, p), j))
        .collect();
    dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    dists.truncate(k);
    dists.into_iter().map(|(_, j)| j).collect()
}

fn k_distance(points: &[Vec<f64>], index: usize, k: usize) -> f64 {
    let neighbors = knn(points, &points[index], Some(index), k);
    euclid(&points[index], &points[*neighbors.last().unwrap()])
}

fn lrd_of_point(points: &[Vec<f64>], index: usize, k: usize) -> f64 {
    let neighbors = knn(points, &points[index], Some(index), k);
    let total: f64 = neighbors
        .iter()
        .map(|&j| euclid(&points[index], &points[j]).max(k_distance(points, j, k)))
        .sum();
    if total == 0.0 {
        f64::INFINITY
    } else {
        k as f64 / total
    }
}

fn ratio(neighbor_lrd: f64, own_lrd: f64) -> f64 {
    if neighbor_lrd.is_infinite() && own_lrd.is_infinite() {
        1.0
    } else {
        neighbor_lrd / own_lrd
    }
}

/// O(n^2) textbook LOF of a query point against a training set, computed
/// from scratch on every call.
pub fn brute_force_lof_query(points: &[Vec<f64>], k: usize, query: &[f64]) -> f64 {
    let neighbors = knn(points, query, None, k);
    let total: f64 = neighbors
        .iter()
        .map(|&j| euclid(query, &points[j]).max(k_distance(points, j, k)))
        .sum();
    let own_lrd = if total == 0.0 { f64::INFINITY } else { k as f64 / total };
    let sum: f64 = neighbors
        .iter()
        .map(|&j| ratio(lrd_of_point(points, j, k), own_lrd))
        .sum();
    sum / k as f64
}

/// O(n^2) textbook LOF of every training point against the others.
pub fn brute_force_lof_training(points: &[Vec<f64>], k: usize) -> Vec<f64> {
    (0..points.len())
        .map(|i| {
            let own_lrd = lrd_of_point(points, i, k);
            let neighbors = knn(points, &points[i], Some(i), k);
            let sum: f64 = neighbors
                .iter()
                .map(|&j| ratio(lrd_of_point(points, j, k), own_lrd))
                .sum();
            sum / k as f64
        })
        .collect()
}

/// Compensated (Kahan) weighted mean of flattened weight vectors: the
/// extended-precision summation oracle for the aggregation routines.
pub fn kahan_weighted_mean(entries: &[(Vec<f64>, f64)]) -> Vec<f64> {
    let dim = entries[0].0.len();
    let mut total_weight = 0.0;
    for (_, w) in entries {
        total_weight += w;
    }
    let mut out = Vec::with_capacity(dim);
    for coord in 0..dim {
        let mut sum = 0.0;
        let mut carry = 0.0;
        for (vector, weight) in entries {
            let term = vector[coord] * (weight / total_weight);
            let y = term - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
        out.push(sum);
    }
    out
}

/// Reference batch gradient descent for logistic regression, run to a
/// fixed large iteration budget; the convergence oracle for train_local.
pub fn reference_logistic_gd(data: &Dataset, learning_rate: f64, iterations: u32) -> WeightVector {
    let d = data.n_features();
    let n = data.n_samples() as f64;
    let mut coef = vec![0.0; d];
    let mut intercept = 0.0;
    for _ in 0..iterations {
        let mut grad = vec![0.0; d];
        let mut grad_b = 0.0;
        for (i, row) in data.rows().enumerate() {
            let z: f64 = coef.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + intercept;
            let p = if z >= 0.0 {
                1.0 / (1.0 + (-z).exp())
            } else {
                let e = z.exp();
                e / (1.0 + e)
            };
            let err = p - f64::from(data.label(i));
            for (g, x) in grad.iter_mut().zip(row) {
                *g += err * x;
            }
            grad_b += err;
        }
        for (w, g) in coef.iter_mut().zip(&grad) {
            *w -= learning_rate * g / n;
        }
        intercept -= learning_rate * grad_b / n;
    }
    WeightVector {
        coefficients: coef,
        intercept,
        sample_count: data.n_samples() as u64,
    }
}

pub fn oracle_accuracy(weights: &WeightVector, data: &Dataset) -> f64 {
    let mut correct = 0usize;
    for (i, row) in data.rows().enumerate() {
        let z: f64 = weights
            .coefficients
            .iter()
            .zip(row)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + weights.intercept;
        let predicted = u8::from(z > 0.0);
        if predicted == data.label(i) {
            correct += 1;
        }
    }
    correct as f64 / data.n_samples() as f64
}

#[derive(Clone, Copy)]
struct ReplayState {
    preference: bool,
    previous: bool,
    count: u32,
    decided: bool,
    decision: bool,
}

/// Replays a recorded consensus run through an independently transcribed
/// Snowball state machine and checks every trace record and the final
/// outcome against it. Panics on any divergence.
pub fn replay_consensus_trace(
    initial_opinions: &[bool],
    params: &ConsensusParams,
    outcome: &ConsensusOutcome,
) {
    let n = initial_opinions.len();
    let mut states: Vec<ReplayState> = initial_opinions
        .iter()
        .map(|&o| ReplayState {
            preference: o,
            previous: o,
            count: 0,
            decided: false,
            decision: o,
        })
        .collect();

    let mut records: &[TraceRecord] = &outcome.trace;
    let mut round = 1u32;
    while !records.is_empty() {
        let split = records.iter().position(|r| r.round != round).unwrap_or(records.len());
        let (this_round, rest) = records.split_at(split);
        assert!(!this_round.is_empty(), "round {round} has no records");
        records = rest;

        let snapshot: Vec<(bool, bool)> = states.iter().map(|s| (s.decided, if s.decided { s.decision } else { s.preference })).collect();

        let expected_nodes: Vec<usize> = (0..n).filter(|&i| !states[i].decided).collect();
        let polled: Vec<usize> = this_round.iter().map(|r| r.node).collect();
        assert_eq!(polled, expected_nodes, "round {round}: wrong polling set");

        for record in this_round {
            let node = record.node;
            assert_eq!(record.peers.len(), params.quorum_k);
            for (peer, response) in record.peers.iter().zip(&record.responses) {
                assert_ne!(*peer, node, "node polled itself");
                assert_eq!(
                    *response, snapshot[*peer].1,
                    "round {round}: response from {peer} does not match its snapshot state"
                );
            }

            let accepts = record.responses.iter().filter(|&&r| r).count() as u32;
            let rejects = params.quorum_k as u32 - accepts;
            let state = &mut states[node];
            let (max_votes, winner) = if accepts > rejects {
                (accepts, true)
            } else {
                (rejects, false)
            };
            if max_votes >= params.alpha {
                if winner == state.previous {
                    state.count += 1;
                } else {
                    state.previous = winner;
                    state.count = 1;
                }
                state.preference = winner;
                if state.count >= params.beta {
                    state.count = params.beta;
                    state.decided = true;
                    state.decision = winner;
                }
            } else {
                state.count = 0;
            }

            assert_eq!(record.count, state.count, "round {round} node {node}: count");
            assert_eq!(
                record.preference, state.preference,
                "round {round} node {node}: preference"
            );
            assert_eq!(
                record.decided, state.decided,
                "round {round} node {node}: decided flag"
            );
        }
        round += 1;
    }

    for (i, state) in states.iter().enumerate() {
        let expected = state.decided.then_some(state.decision);
        assert_eq!(
            outcome.node_decisions[i], expected,
            "node {i}: final decision mismatch"
        );
    }
    let accepts = states
        .iter()
        .map(|s| if s.decided { s.decision } else { s.preference })
        .filter(|&v| v)
        .count();
    let expected_decision = accepts * 2 > n;
    assert_eq!(outcome.decision, expected_decision, "network decision");
}
