//! Zipf popularity, request sampling and popularity-proportional cache placement.

use rand::Rng;

use crate::model::{CacheAllocation, ConfigError};

/// Request probability of each file, in rank order (file 0 most popular).
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityProfile {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PopularityProfile {
    /// Builds a profile from explicit probabilities, normalizing them.
    pub fn from_weights(weights: &[f64]) -> Result<Self, ConfigError> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(ConfigError::InvalidWeights);
        }
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(PopularityProfile { probs, cumulative })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_files(&self) -> usize {
        self.probs.len()
    }
}

/// `p_i = i^-beta / sum_j j^-beta` over ranks `1..=n_files`.
pub fn zipf_profile(n_files: usize, beta: f64) -> Result<PopularityProfile, ConfigError> {
    if n_files == 0 {
        return Err(ConfigError::ZeroCount("n_files"));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(ConfigError::InvalidBeta(beta));
    }
    let weights: Vec<f64> = (1..=n_files).map(|i| (i as f64).powf(-beta)).collect();
    PopularityProfile::from_weights(&weights)
}

/// Draws one file index by inverse-CDF lookup; consumes exactly one uniform.
pub fn sample_file<R: Rng + ?Sized>(profile: &PopularityProfile, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let idx = profile.cumulative.partition_point(|&c| c <= u);
    idx.min(profile.probs.len() - 1)
}

/// Fills each of `n_servers` caches with `cache_size` distinct files drawn
/// proportionally to popularity without replacement, then repairs coverage.
///
/// Repair visits uncovered files in ascending order. Each one replaces, on the
/// lowest-indexed server holding a file of maximal replication, that file
/// (lowest index among equals).
pub fn proportional_placement<R: Rng + ?Sized>(
    profile: &PopularityProfile,
    n_servers: usize,
    cache_size: usize,
    rng: &mut R,
) -> Result<CacheAllocation, ConfigError> {
    let n_files = profile.n_files();
    if cache_size == 0 || n_servers == 0 {
        return Err(ConfigError::ZeroCount("cache_size"));
    }
    if cache_size > n_files {
        return Err(ConfigError::CacheExceedsLibrary {
            cache_size,
            files: n_files,
        });
    }
    if n_servers * cache_size < n_files {
        return Err(ConfigError::AggregateMemory {
            servers: n_servers,
            cache_size,
            files: n_files,
        });
    }

    let mut sets: Vec<Vec<usize>> = if cache_size == n_files {
        vec![(0..n_files).collect(); n_servers]
    } else {
        (0..n_servers)
            .map(|_| sample_without_replacement(profile.probs(), cache_size, rng))
            .collect()
    };

    repair_coverage(&mut sets, n_files);
    CacheAllocation::new(sets, n_files, cache_size)
}

/// Ensures every file in `0..n_files` is cached at least once.
fn repair_coverage(sets: &mut [Vec<usize>], n_files: usize) {
    let mut replicas = vec![0usize; n_files];
    for set in sets.iter() {
        for &f in set {
            replicas[f] += 1;
        }
    }
    for missing in 0..n_files {
        if replicas[missing] > 0 {
            continue;
        }
        let top = *replicas.iter().max().unwrap();
        debug_assert!(top >= 2, "pigeonhole guarantees a duplicated file");
        let (server, slot) = sets
            .iter()
            .enumerate()
            .find_map(|(k, set)| {
                set.iter()
                    .enumerate()
                    .filter(|(_, &f)| replicas[f] == top)
                    .min_by_key(|(_, &f)| f)
                    .map(|(slot, _)| (k, slot))
            })
            .unwrap();
        replicas[sets[server][slot]] -= 1;
        sets[server][slot] = missing;
        replicas[missing] = 1;
    }
}

/// Sequential draw-remove-renormalize sampling of `count` distinct indices.
fn sample_without_replacement<R: Rng + ?Sized>(weights: &[f64], count: usize, rng: &mut R) -> Vec<usize> {
    let mut remaining = weights.to_vec();
    let mut chosen = Vec::with_capacity(count);
    for _ in 0..count {
        let total: f64 = remaining.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in remaining.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            pick = Some(i);
            if target < acc {
                break;
            }
        }
        let pick = pick.expect("count <= number of positive weights");
        remaining[pick] = 0.0;
        chosen.push(pick);
    }
    chosen
}

/// Precomputed candidate sets: for each file, the servers caching it in
/// ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateIndex {
    by_file: Vec<Vec<usize>>,
}

impl CandidateIndex {
    pub fn new(alloc: &CacheAllocation) -> Self {
        let mut by_file = vec![Vec::new(); alloc.n_files()];
        for k in 0..alloc.n_servers() {
            for &f in alloc.files(k) {
                by_file[f].push(k);
            }
        }
        assert!(by_file.iter().all(|c| !c.is_empty()), "allocation violates coverage");
        CandidateIndex { by_file }
    }

    pub fn get(&self, file: usize) -> &[usize] {
        &self.by_file[file]
    }

    /// Expected candidate-set size of a request under `profile`.
    pub fn mean_size(&self, profile: &PopularityProfile) -> f64 {
        self.by_file
            .iter()
            .zip(profile.probs())
            .map(|(c, p)| c.len() as f64 * p)
            .sum()
    }
}

/// The servers caching `file`, in ascending order.
pub fn candidate_set(alloc: &CacheAllocation, file: usize) -> Vec<usize> {
    let set: Vec<usize> = (0..alloc.n_servers()).filter(|&k| alloc.contains(k, file)).collect();
    assert!(!set.is_empty(), "file {file} has no replica");
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::{stream, Stream};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn zipf_examples() {
        assert!(close(zipf_profile(4, 0.0).unwrap().probs(), &[0.25; 4], 1e-15));
        // H_4 = 25/12, so p = (12/25)(1, 1/2, 1/3, 1/4).
        assert!(close(
            zipf_profile(4, 1.0).unwrap().probs(),
            &[0.48, 0.24, 0.16, 0.12],
            1e-12
        ));
        assert_eq!(zipf_profile(1, 2.5).unwrap().probs(), &[1.0]);
        assert!(zipf_profile(0, 1.0).is_err());
        assert!(zipf_profile(3, -0.1).is_err());
    }

    #[test]
    fn degenerate_profile_always_samples_first_file() {
        let p = zipf_profile(1, 2.5).unwrap();
        let mut rng = stream(3, Stream::Files);
        assert!((0..1000).all(|_| sample_file(&p, &mut rng) == 0));
    }

    #[test]
    fn uniform_sampling_passes_chi_square() {
        let p = zipf_profile(4, 0.0).unwrap();
        let mut rng = stream(11, Stream::Files);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_file(&p, &mut rng)] += 1;
        }
        let expected = n as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // chi-square critical value, 3 degrees of freedom, 0.01 significance
        assert!(chi2 < 11.345, "chi2 = {chi2}");
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() <= 0.01);
        }
    }

    #[test]
    fn zipf_sampling_matches_profile() {
        let p = zipf_profile(4, 1.0).unwrap();
        let mut rng = stream(12, Stream::Files);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_file(&p, &mut rng)] += 1;
        }
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        assert!(close(&freq, &[0.48, 0.24, 0.16, 0.12], 0.01), "{freq:?}");
    }

    #[test]
    fn full_replication_when_cache_holds_library() {
        let p = zipf_profile(5, 1.3).unwrap();
        let alloc = proportional_placement(&p, 4, 5, &mut stream(1, Stream::Placement)).unwrap();
        for k in 0..4 {
            assert_eq!(alloc.files(k), &[0, 1, 2, 3, 4]);
        }
        let idx = CandidateIndex::new(&alloc);
        for f in 0..5 {
            assert_eq!(idx.get(f), &[0, 1, 2, 3]);
        }
    }

    #[test]
    fn repair_on_two_single_slot_servers() {
        // Both pre-repair duplicate outcomes: {0},{0} and {1},{1}.
        let mut sets = vec![vec![0], vec![0]];
        repair_coverage(&mut sets, 2);
        assert_eq!(sets, vec![vec![1], vec![0]]);
        let mut sets = vec![vec![1], vec![1]];
        repair_coverage(&mut sets, 2);
        assert_eq!(sets, vec![vec![0], vec![1]]);
        // Already-covered outcomes are left alone.
        let mut sets = vec![vec![1], vec![0]];
        repair_coverage(&mut sets, 2);
        assert_eq!(sets, vec![vec![1], vec![0]]);
        // And through the real placement path, across many seeds.
        let p = zipf_profile(2, 1.0).unwrap();
        for seed in 0..500 {
            let alloc = proportional_placement(&p, 2, 1, &mut stream(seed, Stream::Placement)).unwrap();
            let idx = CandidateIndex::new(&alloc);
            assert_eq!(idx.get(0).len(), 1);
            assert_eq!(idx.get(1).len(), 1);
        }
    }

    #[test]
    fn candidate_set_examples() {
        // Z_0 = {0,1}, Z_1 = {1,2}
        let alloc = CacheAllocation::new(vec![vec![0, 1], vec![1, 2]], 3, 2).unwrap();
        assert_eq!(candidate_set(&alloc, 1), vec![0, 1]);
        assert_eq!(candidate_set(&alloc, 2), vec![1]);
        let idx = CandidateIndex::new(&alloc);
        assert_eq!(idx.get(1), &[0, 1]);
        assert_eq!(idx.get(2), &[1]);
    }

    #[test]
    fn placement_rejects_bad_shapes() {
        let p = zipf_profile(3, 0.0).unwrap();
        let mut rng = stream(1, Stream::Placement);
        assert!(proportional_placement(&p, 2, 1, &mut rng).is_err());
        assert!(proportional_placement(&p, 10, 4, &mut rng).is_err());
    }
}
