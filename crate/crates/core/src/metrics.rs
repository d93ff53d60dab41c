//! Cross-replication statistics and trade-off curve helpers.

use thiserror::Error;

use crate::model::RunResult;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("cannot aggregate an empty list of runs")]
    NoRuns,
}

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateResult {
    pub mean_cost: f64,
    pub mean_wait: f64,
    pub mean_queries: f64,
    pub mean_jobs_per_server: f64,
    /// Half-widths of normal-approximation 95% intervals.
    pub ci95_cost: f64,
    pub ci95_wait: f64,
    pub n_runs: usize,
}

fn mean_and_half_width(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Z95 * var.sqrt() / (n as f64).sqrt())
}

pub fn aggregate_runs(results: &[RunResult]) -> Result<AggregateResult, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::NoRuns);
    }
    // Summing in a canonical order makes the result independent of input order.
    let sorted = |f: fn(&RunResult) -> f64| {
        let mut v: Vec<f64> = results.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let costs = sorted(|r| r.avg_cost);
    let waits = sorted(|r| r.avg_wait);
    let (mean_cost, ci95_cost) = mean_and_half_width(costs.iter().copied());
    let (mean_wait, ci95_wait) = mean_and_half_width(waits.iter().copied());
    let (mean_queries, _) = mean_and_half_width(sorted(|r| r.avg_queries).into_iter());
    let (mean_jobs_per_server, _) = mean_and_half_width(sorted(|r| r.mean_jobs_per_server).into_iter());
    Ok(AggregateResult {
        mean_cost,
        mean_wait,
        mean_queries,
        mean_jobs_per_server,
        ci95_cost,
        ci95_wait,
        n_runs: results.len(),
    })
}

/// One operating point of a cost/wait trade-off curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub wait: f64,
    pub cost: f64,
    pub ci95_cost: f64,
}

impl From<&AggregateResult> for CurvePoint {
    fn from(a: &AggregateResult) -> Self {
        CurvePoint {
            wait: a.mean_wait,
            cost: a.mean_cost,
            ci95_cost: a.ci95_cost,
        }
    }
}

/// Trade-off curve ordered by waiting time, for reading off the cost at a
/// fixed waiting time.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    points: Vec<CurvePoint>,
}

impl TradeoffCurve {
    pub fn new(mut points: Vec<CurvePoint>) -> Self {
        points.retain(|p| p.wait > 0.0 && p.wait.is_finite());
        points.sort_by(|a, b| a.wait.total_cmp(&b.wait));
        TradeoffCurve { points }
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    /// Efficient frontier: drops every point that some point with a lower
    /// waiting time matches or beats on cost.
    pub fn pareto_front(&self) -> TradeoffCurve {
        let mut best = f64::INFINITY;
        let points = self
            .points
            .iter()
            .filter(|p| {
                let keep = p.cost < best;
                best = best.min(p.cost);
                keep
            })
            .copied()
            .collect();
        TradeoffCurve { points }
    }

    /// Waiting-time range covered by the curve.
    pub fn wait_range(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.wait, self.points.last()?.wait))
    }

    /// Cost (and its CI half-width) at `wait`, interpolated linearly in
    /// `log(wait)` between the two bracketing points. `None` outside the range.
    pub fn cost_at_wait(&self, wait: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.wait_range()?;
        if !(lo..=hi).contains(&wait) {
            return None;
        }
        let i = self.points.partition_point(|p| p.wait < wait);
        if self.points[i].wait == wait || i == 0 {
            let p = &self.points[i];
            return Some((p.cost, p.ci95_cost));
        }
        let (a, b) = (&self.points[i - 1], &self.points[i]);
        let t = (wait.ln() - a.wait.ln()) / (b.wait.ln() - a.wait.ln());
        let lerp = |x: f64, y: f64| x + t * (y - x);
        Some((lerp(a.cost, b.cost), lerp(a.ci95_cost, b.ci95_cost)))
    }
}

/// Waiting times covered by every curve, `n` of them geometrically spaced.
pub fn common_wait_grid(curves: &[&TradeoffCurve], n: usize) -> Vec<f64> {
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for c in curves {
        match c.wait_range() {
            Some((a, b)) => {
                lo = lo.max(a);
                hi = hi.min(b);
            }
            None => return Vec::new(),
        }
    }
    if !(lo > 0.0 && hi >= lo) || n == 0 {
        return Vec::new();
    }
    if n == 1 || hi == lo {
        return vec![lo];
    }
    let ratio = (hi / lo).ln();
    (0..n)
        .map(|i| (lo.ln() + ratio * i as f64 / (n - 1) as f64).exp().clamp(lo, hi))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn run(cost: f64, wait: f64) -> RunResult {
        RunResult {
            avg_cost: cost,
            avg_wait: wait,
            avg_queries: 1.0,
            mean_jobs_per_server: 0.5,
            counted_events: 10,
            counted_departures: 10,
            seed_used: 0,
        }
    }

    #[test]
    fn single_run_has_zero_interval() {
        let a = aggregate_runs(&[run(3.0, 5.0)]).unwrap();
        assert_eq!(
            (a.mean_cost, a.mean_wait, a.ci95_cost, a.ci95_wait, a.n_runs),
            (3.0, 5.0, 0.0, 0.0, 1)
        );
    }

    #[test]
    fn two_runs_interval() {
        // sample sd of {2, 4} is sqrt(2); half-width = 1.96 * sqrt(2) / sqrt(2)
        let a = aggregate_runs(&[run(2.0, 1.0), run(4.0, 1.0)]).unwrap();
        assert_eq!(a.mean_cost, 3.0);
        assert!((a.ci95_cost - 1.96).abs() < 1e-12);
        assert_eq!(a.ci95_wait, 0.0);
    }

    #[test]
    fn identical_runs_and_empty_input() {
        let a = aggregate_runs(&vec![run(7.25, 2.5); 9]).unwrap();
        assert_eq!((a.mean_cost, a.ci95_cost, a.mean_wait), (7.25, 0.0, 2.5));
        assert_eq!(aggregate_runs(&[]), Err(MetricsError::NoRuns));
    }

    #[test]
    fn interpolation_in_log_wait() {
        let curve = TradeoffCurve::new(vec![
            CurvePoint {
                wait: 100.0,
                cost: 1.0,
                ci95_cost: 0.1,
            },
            CurvePoint {
                wait: 1.0,
                cost: 5.0,
                ci95_cost: 0.3,
            },
        ]);
        assert_eq!(curve.cost_at_wait(1.0), Some((5.0, 0.3)));
        let (c, ci) = curve.cost_at_wait(10.0).unwrap();
        assert!((c - 3.0).abs() < 1e-12 && (ci - 0.2).abs() < 1e-12);
        assert_eq!(curve.cost_at_wait(1000.0), None);
        let other = TradeoffCurve::new(vec![
            CurvePoint {
                wait: 10.0,
                cost: 0.0,
                ci95_cost: 0.0,
            },
            CurvePoint {
                wait: 1000.0,
                cost: 0.0,
                ci95_cost: 0.0,
            },
        ]);
        let grid = common_wait_grid(&[&curve, &other], 3);
        assert_eq!(grid.len(), 3);
        assert!((grid[0] - 10.0).abs() < 1e-9 && (grid[2] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn pareto_front_drops_dominated_points() {
        let p = |wait, cost| CurvePoint {
            wait,
            cost,
            ci95_cost: 0.0,
        };
        let curve = TradeoffCurve::new(vec![
            p(40.0, 13.0),
            p(30.0, 9.0),
            p(33.0, 8.0),
            p(160.0, 7.5),
            p(170.0, 7.7),
        ]);
        let front = curve.pareto_front();
        let kept: Vec<(f64, f64)> = front.points().iter().map(|q| (q.wait, q.cost)).collect();
        assert_eq!(kept, vec![(30.0, 9.0), (33.0, 8.0), (160.0, 7.5)]);
        assert_eq!(front.pareto_front(), front);
    }

    proptest! {
        #[test]
        fn permutation_invariant_and_bounded(costs in proptest::collection::vec(0.0f64..100.0, 1..30), seed in any::<u64>()) {
            let runs: Vec<RunResult> = costs.iter().map(|&c| run(c, c * 0.5 + 1.0)).collect();
            let mut shuffled = runs.clone();
            let n = shuffled.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = crate::seeding::splitmix64(s);
                shuffled.swap(i, (s % (i as u64 + 1)) as usize);
            }
            let a = aggregate_runs(&runs).unwrap();
            let b = aggregate_runs(&shuffled).unwrap();
            prop_assert_eq!(a, b);
            let lo = costs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(a.mean_cost >= lo - 1e-9 && a.mean_cost <= hi + 1e-9);
            prop_assert!(a.ci95_cost >= 0.0 && a.ci95_wait >= 0.0);
        }
    }
}
