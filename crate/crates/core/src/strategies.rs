//! Request-mapping policies.
//!
//! Every policy picks a server from the candidate set (servers caching the
//! requested file) and reports how many queue-length queries it issued.
//! Ties are broken uniformly at random from the `ties` stream; a singleton
//! tie set consumes no randomness, so policies that reduce to one another
//! consume identical draws and yield identical decision traces.

use rand::Rng;

use crate::model::{QueueSnapshot, StrategySpec};
use crate::seeding::{stream, SimRng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MappingDecision {
    pub server: usize,
    pub queries_used: usize,
}

/// Inputs of one assignment.
#[derive(Debug, Clone, Copy)]
pub struct Request<'a> {
    pub user: usize,
    /// Servers caching the file, ascending.
    pub candidates: &'a [usize],
    /// The user's cost row, indexed by server.
    pub costs: &'a [f64],
    pub queues: QueueSnapshot<'a>,
}

/// Random streams owned by the mapping layer of one run.
#[derive(Debug, Clone)]
pub struct StrategyRngs {
    pub branch: SimRng,
    pub ties: SimRng,
}

impl StrategyRngs {
    pub fn from_seed(seed: u64) -> Self {
        StrategyRngs {
            branch: stream(seed, Stream::Branch),
            ties: stream(seed, Stream::Ties),
        }
    }
}

fn pick_uniform<R: Rng + ?Sized>(items: &[usize], rng: &mut R) -> usize {
    match items.len() {
        0 => panic!("empty tie set"),
        1 => items[0],
        n => items[rng.random_range(0..n)],
    }
}

/// All members of `items` attaining the minimum key, in input order.
fn argmin_set<K: PartialOrd + Copy>(items: &[usize], key: impl Fn(usize) -> K) -> Vec<usize> {
    let mut best: Option<K> = None;
    let mut set = Vec::new();
    for &k in items {
        let v = key(k);
        match best {
            Some(b) if v > b => {}
            Some(b) if v == b => set.push(k),
            _ => {
                best = Some(v);
                set.clear();
                set.push(k);
            }
        }
    }
    set
}

pub fn min_cost_map<R: Rng + ?Sized>(candidates: &[usize], costs: &[f64], ties: &mut R) -> MappingDecision {
    let best = argmin_set(candidates, |k| costs[k]);
    MappingDecision {
        server: pick_uniform(&best, ties),
        queries_used: 0,
    }
}

pub fn min_queue_map<R: Rng + ?Sized>(
    candidates: &[usize],
    queues: &QueueSnapshot<'_>,
    ties: &mut R,
) -> MappingDecision {
    let best = argmin_set(candidates, |k| queues.len_of(k));
    MappingDecision {
        server: pick_uniform(&best, ties),
        queries_used: candidates.len(),
    }
}

/// Min-queue with probability `zeta`, min-cost otherwise. Draws exactly one
/// branch variable in `(0, 1]` per call, so `zeta = 0` never and `zeta = 1`
/// always takes the min-queue branch.
pub fn pss_map<B: Rng + ?Sized, R: Rng + ?Sized>(
    candidates: &[usize],
    costs: &[f64],
    queues: &QueueSnapshot<'_>,
    zeta: f64,
    branch: &mut B,
    ties: &mut R,
) -> MappingDecision {
    let x = 1.0 - branch.random::<f64>();
    if x <= zeta {
        min_queue_map(candidates, queues, ties)
    } else {
        min_cost_map(candidates, costs, ties)
    }
}

/// Weighted desirability `alpha * c_k / sum(c) + (1 - alpha) * q_k / sum(q)`;
/// a term whose denominator is zero contributes nothing.
pub fn wmc_map<R: Rng + ?Sized>(
    candidates: &[usize],
    costs: &[f64],
    queues: &QueueSnapshot<'_>,
    alpha: f64,
    ties: &mut R,
) -> MappingDecision {
    let cost_sum: f64 = candidates.iter().map(|&k| costs[k]).sum();
    let queue_sum: u64 = candidates.iter().map(|&k| queues.len_of(k) as u64).sum();
    let desirability = |k: usize| {
        let cost_term = if cost_sum > 0.0 {
            alpha * (costs[k] / cost_sum)
        } else {
            0.0
        };
        let queue_term = if queue_sum > 0 {
            (1.0 - alpha) * (queues.len_of(k) as f64 / queue_sum as f64)
        } else {
            0.0
        };
        cost_term + queue_term
    };
    let best = argmin_set(candidates, desirability);
    MappingDecision {
        server: pick_uniform(&best, ties),
        queries_used: candidates.len(),
    }
}

/// The `min(delta, |candidates|)` cheapest candidates, returned in ascending
/// server order. Members tied at the boundary cost are chosen uniformly.
pub fn cheapest_candidates<R: Rng + ?Sized>(
    candidates: &[usize],
    costs: &[f64],
    delta: usize,
    ties: &mut R,
) -> Vec<usize> {
    let take = delta.min(candidates.len());
    if take == candidates.len() {
        return candidates.to_vec();
    }
    let mut by_cost = candidates.to_vec();
    by_cost.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
    let boundary = costs[by_cost[take - 1]];
    let mut selected: Vec<usize> = candidates.iter().copied().filter(|&k| costs[k] < boundary).collect();
    let mut tied: Vec<usize> = candidates.iter().copied().filter(|&k| costs[k] == boundary).collect();
    let need = take - selected.len();
    if need < tied.len() {
        // partial Fisher-Yates
        for i in 0..need {
            let j = ties.random_range(i..tied.len());
            tied.swap(i, j);
        }
        tied.truncate(need);
    }
    selected.extend(tied);
    selected.sort_unstable();
    selected
}

/// Least-loaded among the `delta` cheapest candidates.
pub fn mcs_map<R: Rng + ?Sized>(
    candidates: &[usize],
    costs: &[f64],
    queues: &QueueSnapshot<'_>,
    delta: usize,
    ties: &mut R,
) -> MappingDecision {
    let shortlist = cheapest_candidates(candidates, costs, delta, ties);
    let best = argmin_set(&shortlist, |k| queues.len_of(k));
    MappingDecision {
        server: pick_uniform(&best, ties),
        queries_used: shortlist.len(),
    }
}

impl StrategySpec {
    pub fn decide(&self, req: &Request<'_>, rngs: &mut StrategyRngs) -> MappingDecision {
        let Request {
            candidates,
            costs,
            queues,
            ..
        } = *req;
        match *self {
            StrategySpec::MinCost => min_cost_map(candidates, costs, &mut rngs.ties),
            StrategySpec::MinQueue => min_queue_map(candidates, &queues, &mut rngs.ties),
            StrategySpec::Pss { zeta } => pss_map(candidates, costs, &queues, zeta, &mut rngs.branch, &mut rngs.ties),
            StrategySpec::Wmc { alpha } => wmc_map(candidates, costs, &queues, alpha, &mut rngs.ties),
            StrategySpec::Mcs { delta } => mcs_map(candidates, costs, &queues, delta, &mut rngs.ties),
        }
    }
}
