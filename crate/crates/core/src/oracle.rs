//! Independent reference calculations: closed-form queueing results, the
//! supermarket-model fixed point and brute-force search of the weighted
//! cost/delay objective on tiny fixed traces.
//!
//! Sojourn times here come from the Lindley recursion on each server, not
//! from the event engine, so the two can be checked against each other.

use rand::Rng;
use thiserror::Error;

use crate::engine::{replay_trace, sample_service, Arrival, SimError};
use crate::model::{CacheAllocation, CostMatrix, ServiceDist, StrategySpec};
use crate::popularity::CandidateIndex;
use crate::strategies::StrategyRngs;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("unstable queue: arrival rate {lambda} >= service rate {mu}")]
    Unstable { lambda: f64, mu: f64 },
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("{sequences} assignment sequences exceed the enumeration bound {bound}")]
    TooLarge { sequences: u128, bound: u128 },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Mean sojourn time of an M/M/1 queue, `1 / (mu - lambda)`.
pub fn mm1_mean_sojourn(lambda: f64, mu: f64) -> Result<f64, OracleError> {
    if !(lambda > 0.0 && mu > 0.0) {
        return Err(OracleError::Domain(format!("rates must be positive: {lambda}, {mu}")));
    }
    if lambda >= mu {
        return Err(OracleError::Unstable { lambda, mu });
    }
    Ok(1.0 / (mu - lambda))
}

/// Expected jobs per server in the large-system supermarket model where each
/// job joins the shortest of `d` uniformly sampled queues: the sum over
/// `i >= 1` of the tail fractions `lambda^((d^i - 1) / (d - 1))`
/// (`lambda^i` for `d = 1`), truncated once a term drops below 1e-12.
pub fn supermarket_mean_queue(lambda: f64, d: u32) -> Result<f64, OracleError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(OracleError::Domain(format!(
            "per-server load must be in (0, 1), got {lambda}"
        )));
    }
    if d == 0 {
        return Err(OracleError::Domain("d must be >= 1".into()));
    }
    let mut total = 0.0;
    // exponent_i = 1 + d + ... + d^(i-1)
    let mut exponent = 0.0f64;
    let mut power = 1.0f64;
    loop {
        exponent += power;
        power *= d as f64;
        let term = lambda.powf(exponent);
        if term < 1e-12 {
            break;
        }
        total += term;
    }
    Ok(total)
}

/// A request of a fixed trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRequest {
    pub time: f64,
    pub user: usize,
    pub file: usize,
}

/// Toy instance for exhaustive search: at most a few servers, users, files
/// and requests.
#[derive(Debug, Clone)]
pub struct TinyInstance {
    pub costs: CostMatrix,
    pub allocation: CacheAllocation,
    /// Sorted by time.
    pub requests: Vec<TraceRequest>,
    pub service: ServiceDist,
}

/// Bound on the number of enumerated assignment sequences.
pub const ENUMERATION_BOUND: u128 = 10_000;

impl TinyInstance {
    /// Random instance with real-valued costs in `[0, 10)`; arrivals spaced
    /// by exponential gaps of mean 0.6.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_len: usize, service: ServiceDist) -> Self {
        let n_servers: usize = rng.random_range(1..=3);
        let n_users = rng.random_range(1..=3);
        let n_files: usize = rng.random_range(1..=3);
        let min_cache = n_files.div_ceil(n_servers);
        let cache_size = rng.random_range(min_cache..=n_files);
        let allocation = loop {
            let sets: Vec<Vec<usize>> = (0..n_servers)
                .map(|_| {
                    let mut files: Vec<usize> = (0..n_files).collect();
                    for i in 0..cache_size {
                        let j = rng.random_range(i..n_files);
                        files.swap(i, j);
                    }
                    files.truncate(cache_size);
                    files
                })
                .collect();
            if let Ok(a) = CacheAllocation::new(sets, n_files, cache_size) {
                break a;
            }
        };
        let entries = (0..n_users * n_servers).map(|_| rng.random_range(0.0..10.0)).collect();
        let costs = CostMatrix::new(n_users, n_servers, entries).expect("valid random costs");
        let len = rng.random_range(1..=max_len);
        let mut t = 0.0;
        let requests = (0..len)
            .map(|_| {
                t += -0.6 * (1.0 - rng.random::<f64>()).ln();
                TraceRequest {
                    time: t,
                    user: rng.random_range(0..n_users),
                    file: rng.random_range(0..n_files),
                }
            })
            .collect();
        TinyInstance {
            costs,
            allocation,
            requests,
            service,
        }
    }

    pub fn candidate_lists(&self) -> Vec<Vec<usize>> {
        let index = CandidateIndex::new(&self.allocation);
        self.requests.iter().map(|r| index.get(r.file).to_vec()).collect()
    }

    /// Independent service-time sample paths, one duration per request.
    pub fn service_samples<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                self.requests
                    .iter()
                    .map(|_| sample_service(&self.service, rng))
                    .collect()
            })
            .collect()
    }

    /// `alpha * mean cost + (1 - alpha) * mean sojourn` of a fixed assignment,
    /// averaged over the given service sample paths.
    pub fn objective(&self, assignment: &[usize], alpha: f64, samples: &[Vec<f64>]) -> f64 {
        let n = self.requests.len() as f64;
        let cost: f64 = self
            .requests
            .iter()
            .zip(assignment)
            .map(|(r, &k)| self.costs.get(r.user, k))
            .sum::<f64>()
            / n;
        let wait = samples
            .iter()
            .map(|s| lindley_mean_sojourn(&self.requests, assignment, s, self.costs.servers()))
            .sum::<f64>()
            / samples.len() as f64;
        alpha * cost + (1.0 - alpha) * wait
    }
}

/// Mean sojourn under FIFO service: each server finishes a job at
/// `max(arrival, previous finish) + service`.
fn lindley_mean_sojourn(requests: &[TraceRequest], assignment: &[usize], service: &[f64], n_servers: usize) -> f64 {
    let mut free_at = vec![f64::NEG_INFINITY; n_servers];
    let mut total = 0.0;
    for ((r, &k), &s) in requests.iter().zip(assignment).zip(service) {
        let finish = free_at[k].max(r.time) + s;
        free_at[k] = finish;
        total += finish - r.time;
    }
    total / requests.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub assignment: Vec<usize>,
    pub objective: f64,
    pub sequences_evaluated: u64,
}

/// Enumerates every feasible assignment sequence and returns the one with the
/// smallest objective (first in enumeration order among equals). All
/// sequences share the same `n_service_samples` sample paths.
pub fn exhaustive_objective_search<R: Rng + ?Sized>(
    inst: &TinyInstance,
    alpha: f64,
    n_service_samples: usize,
    rng: &mut R,
) -> Result<SearchResult, OracleError> {
    let samples = inst.service_samples(n_service_samples.max(1), rng);
    search_with_samples(inst, alpha, &samples)
}

pub fn search_with_samples(inst: &TinyInstance, alpha: f64, samples: &[Vec<f64>]) -> Result<SearchResult, OracleError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(OracleError::Domain(format!("alpha {alpha} outside [0, 1]")));
    }
    if inst.requests.is_empty() || samples.is_empty() {
        return Err(OracleError::Domain("empty trace or no service samples".into()));
    }
    let lists = inst.candidate_lists();
    let sequences = lists
        .iter()
        .try_fold(1u128, |acc, l| acc.checked_mul(l.len() as u128))
        .unwrap_or(u128::MAX);
    if sequences > ENUMERATION_BOUND {
        return Err(OracleError::TooLarge {
            sequences,
            bound: ENUMERATION_BOUND,
        });
    }

    let mut digits = vec![0usize; lists.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluated = 0u64;
    loop {
        let assignment: Vec<usize> = digits.iter().zip(&lists).map(|(&d, l)| l[d]).collect();
        let value = inst.objective(&assignment, alpha, samples);
        evaluated += 1;
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, assignment));
        }
        // odometer increment, last request fastest
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                let (objective, assignment) = best.unwrap();
                return Ok(SearchResult {
                    assignment,
                    objective,
                    sequences_evaluated: evaluated,
                });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < lists[pos].len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Objective of an implemented strategy replayed through the event engine on
/// the instance's trace, averaged over the same service sample paths.
pub fn replayed_strategy_objective(
    inst: &TinyInstance,
    strategy: &StrategySpec,
    alpha: f64,
    samples: &[Vec<f64>],
    seed: u64,
) -> Result<(f64, Vec<Vec<usize>>), OracleError> {
    let index = CandidateIndex::new(&inst.allocation);
    let mut rngs = StrategyRngs::from_seed(seed);
    let mut total = 0.0;
    let mut assignments = Vec::with_capacity(samples.len());
    for path in samples {
        let arrivals: Vec<Arrival> = inst
            .requests
            .iter()
            .zip(path)
            .map(|(r, &s)| Arrival {
                time: r.time,
                user: r.user,
                file: r.file,
                service: s,
            })
            .collect();
        let out = replay_trace(&inst.costs, &index, &arrivals, strategy, &mut rngs)?;
        total += alpha * out.avg_cost + (1.0 - alpha) * out.avg_wait;
        assignments.push(out.assignments);
    }
    Ok((total / samples.len() as f64, assignments))
}
