use proptest::prelude::*;
use proptest::sample::subsequence;
use rand::SeedableRng;

use cdnmap::model::CacheAllocation;
use cdnmap::popularity::{candidate_set, proportional_placement, zipf_profile, CandidateIndex};
use cdnmap::seeding::SimRng;

#[test]
fn placements_keep_cache_size_and_coverage() {
    let profile = zipf_profile(70, 0.8).unwrap();
    let mut rng = SimRng::seed_from_u64(17);
    for m in [1usize, 2, 4, 8, 70] {
        for _ in 0..10_000 {
            let alloc = proportional_placement(&profile, 100, m, &mut rng).unwrap();
            let mut covered = [false; 70];
            for k in 0..alloc.n_servers() {
                let files = alloc.files(k);
                assert_eq!(files.len(), m);
                assert!(files.windows(2).all(|w| w[0] < w[1]), "duplicate file on server {k}");
                for &f in files {
                    covered[f] = true;
                }
            }
            assert!(covered.iter().all(|&c| c), "M={m}: file without replica");
        }
    }
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut rank = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &o in &order[i..=j] {
            rank[o] = avg;
        }
        i = j + 1;
    }
    rank
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - mean) * (y - mean)).sum();
    let var = |r: &[f64]| r.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    cov / (var(&ra) * var(&rb)).sqrt()
}

#[test]
fn inclusion_frequency_follows_popularity() {
    let profile = zipf_profile(70, 1.0).unwrap();
    let mut rng = SimRng::seed_from_u64(23);
    let mut hits = vec![0u64; 70];
    let trials = 10_000;
    for _ in 0..trials {
        let alloc = proportional_placement(&profile, 100, 4, &mut rng).unwrap();
        for k in 0..alloc.n_servers() {
            for &f in alloc.files(k) {
                hits[f] += 1;
            }
        }
    }
    let freq: Vec<f64> = hits.iter().map(|&h| h as f64 / (trials * 100) as f64).collect();
    let rho = spearman(&freq, profile.probs());
    assert!(rho > 0.95, "rank correlation {rho}");
    // The most popular files are all far apart, so their order is exact.
    assert!(freq[..10].windows(2).all(|w| w[0] > w[1]), "{:?}", &freq[..10]);
}

#[test]
fn uniform_popularity_gives_equal_inclusion() {
    let profile = zipf_profile(70, 0.0).unwrap();
    let mut rng = SimRng::seed_from_u64(29);
    let mut hits = vec![0u64; 70];
    let trials = 2_000;
    for _ in 0..trials {
        let alloc = proportional_placement(&profile, 100, 8, &mut rng).unwrap();
        for k in 0..alloc.n_servers() {
            for &f in alloc.files(k) {
                hits[f] += 1;
            }
        }
    }
    for (f, &h) in hits.iter().enumerate() {
        let p = h as f64 / (trials * 100) as f64;
        assert!((p - 8.0 / 70.0).abs() < 0.01, "file {f}: {p}");
    }
}

fn allocation() -> impl Strategy<Value = CacheAllocation> {
    (1usize..8, 1usize..10)
        .prop_flat_map(|(servers, files)| (Just(servers), Just(files), files.div_ceil(servers)..=files))
        .prop_flat_map(|(servers, files, m)| {
            proptest::collection::vec(subsequence((0..files).collect::<Vec<_>>(), m), servers)
                .prop_filter_map("coverage", move |sets| CacheAllocation::new(sets, files, m).ok())
        })
}

proptest! {
    #[test]
    fn index_matches_brute_force_scan(alloc in allocation()) {
        let index = CandidateIndex::new(&alloc);
        for f in 0..alloc.n_files() {
            prop_assert_eq!(index.get(f).to_vec(), candidate_set(&alloc, f));
        }
    }
}
