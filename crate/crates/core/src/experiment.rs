//! Parameter sweeps over strategies and cache sizes, and CSV output.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{run_on_network, Network, SimError, SimOptions};
use crate::metrics::{aggregate_runs, AggregateResult, MetricsError};
use crate::model::{ConfigError, CostMatrix, RunResult, SimConfig, StrategySpec};
use crate::seeding::run_seed;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("sweep has no parameter values")]
    EmptySweep,
    #[error("sweep has no cache sizes")]
    NoCacheSizes,
    #[error("n_runs must be at least 1")]
    NoRuns,
    #[error("point {strategy} at M={cache_size}: {source}")]
    Point {
        strategy: StrategySpec,
        cache_size: usize,
        #[source]
        source: SimError,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// Where each replication's topology and placement come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnvironmentMode {
    /// Redrawn from every run seed.
    #[default]
    PerRun,
    /// One topology for the whole sweep and one placement per cache size.
    FixedPerSweep,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// One entry per parameter value, all of the same family.
    pub strategies: Vec<StrategySpec>,
    pub cache_sizes: Vec<usize>,
    pub n_runs: usize,
    pub base_seed: u64,
    pub environment: EnvironmentMode,
    /// Replaces the lattice topology with a fixed matrix.
    pub costs: Option<CostMatrix>,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
}

impl SweepSpec {
    /// Sweep of `family` (a parameterized strategy) over `values`.
    pub fn parameter_sweep(
        family: StrategySpec,
        values: &[f64],
        cache_sizes: Vec<usize>,
        n_runs: usize,
        base_seed: u64,
    ) -> Result<Self, ExperimentError> {
        if values.is_empty() {
            return Err(ExperimentError::EmptySweep);
        }
        let strategies = values
            .iter()
            .map(|&v| family.with_param(v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(strategies, cache_sizes, n_runs, base_seed))
    }

    pub fn new(strategies: Vec<StrategySpec>, cache_sizes: Vec<usize>, n_runs: usize, base_seed: u64) -> Self {
        SweepSpec {
            strategies,
            cache_sizes,
            n_runs,
            base_seed,
            environment: EnvironmentMode::PerRun,
            costs: None,
            workers: 0,
        }
    }

    pub fn with_environment(mut self, mode: EnvironmentMode) -> Self {
        self.environment = mode;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_costs(mut self, costs: CostMatrix) -> Self {
        self.costs = Some(costs);
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.strategies.is_empty() {
            return Err(ExperimentError::EmptySweep);
        }
        if self.cache_sizes.is_empty() {
            return Err(ExperimentError::NoCacheSizes);
        }
        if self.n_runs == 0 {
            return Err(ExperimentError::NoRuns);
        }
        for s in &self.strategies {
            s.validate()?;
        }
        Ok(())
    }

    /// Sweep points in canonical order: cache size ascending, then parameter
    /// ascending. A point's position here is its seed-mixing index.
    pub fn points(&self) -> Vec<(usize, StrategySpec)> {
        let mut sizes = self.cache_sizes.clone();
        sizes.sort_unstable();
        sizes.dedup();
        let mut strategies = self.strategies.clone();
        strategies.sort_by(|a, b| {
            a.param()
                .unwrap_or(f64::NEG_INFINITY)
                .total_cmp(&b.param().unwrap_or(f64::NEG_INFINITY))
        });
        strategies.dedup();
        sizes
            .iter()
            .flat_map(|&m| strategies.iter().map(move |&s| (m, s)))
            .collect()
    }
}

/// Aggregated outcome of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub strategy: StrategySpec,
    pub cache_size: usize,
    pub zipf_beta: f64,
    pub horizon_events: u64,
    pub aggregate: AggregateResult,
    pub runs: Vec<RunResult>,
}

fn point_config(cfg: &SimConfig, cache_size: usize) -> Result<SimConfig, ConfigError> {
    let c = SimConfig {
        cache_size,
        ..cfg.clone()
    };
    c.validate()?;
    Ok(c)
}

/// Seed of the shared environment in [`EnvironmentMode::FixedPerSweep`].
pub fn environment_seed(base_seed: u64) -> u64 {
    run_seed(base_seed, u64::MAX, 0)
}

fn build_network(cfg: &SimConfig, costs: Option<&CostMatrix>, seed: u64) -> Result<Network, SimError> {
    match costs {
        Some(c) => Network::with_costs(cfg, c.clone(), seed),
        None => Network::generate(cfg, seed),
    }
}

/// Runs every point of `sweep` for `n_runs` replications. Replication `r` of
/// point `p` uses seed `run_seed(base_seed, p, r)`; results never depend on
/// the worker count.
pub fn run_sweep(cfg: &SimConfig, sweep: &SweepSpec) -> Result<Vec<PointResult>, ExperimentError> {
    sweep.validate()?;
    let points = sweep.points();
    let configs = points
        .iter()
        .map(|&(m, _)| point_config(cfg, m))
        .collect::<Result<Vec<_>, _>>()?;

    let fixed: Vec<Option<Network>> = match sweep.environment {
        EnvironmentMode::PerRun => vec![None; points.len()],
        EnvironmentMode::FixedPerSweep => {
            let seed = environment_seed(sweep.base_seed);
            points
                .iter()
                .zip(&configs)
                .map(|(&(m, s), c)| {
                    build_network(c, sweep.costs.as_ref(), seed)
                        .map(Some)
                        .map_err(|source| ExperimentError::Point {
                            strategy: s,
                            cache_size: m,
                            source,
                        })
                })
                .collect::<Result<_, _>>()?
        }
    };

    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..sweep.n_runs).map(move |r| (p, r)))
        .collect();
    let run_job = |&(p, r): &(usize, usize)| -> Result<RunResult, ExperimentError> {
        let (m, strategy) = points[p];
        let seed = run_seed(sweep.base_seed, p as u64, r as u64);
        let wrap = |source| ExperimentError::Point {
            strategy,
            cache_size: m,
            source,
        };
        let cfg = &configs[p];
        let owned;
        let network = match &fixed[p] {
            Some(n) => n,
            None => {
                owned = build_network(cfg, sweep.costs.as_ref(), seed).map_err(wrap)?;
                &owned
            }
        };
        run_on_network(cfg, network, &strategy, seed, &mut SimOptions::default())
            .map(|(result, _)| result)
            .map_err(wrap)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep.workers)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let runs: Vec<RunResult> = pool.install(|| jobs.par_iter().map(run_job).collect::<Result<Vec<_>, _>>())?;

    points
        .iter()
        .enumerate()
        .map(|(p, &(m, strategy))| {
            let mine = runs[p * sweep.n_runs..(p + 1) * sweep.n_runs].to_vec();
            Ok(PointResult {
                strategy,
                cache_size: m,
                zipf_beta: cfg.zipf_beta,
                horizon_events: cfg.horizon_events,
                aggregate: aggregate_runs(&mine)?,
                runs: mine,
            })
        })
        .collect()
}

/// Re-runs replication `run` of point `point` with a per-assignment trace.
pub fn trace_run(
    cfg: &SimConfig,
    sweep: &SweepSpec,
    point: usize,
    run: usize,
    out: &mut dyn Write,
) -> Result<RunResult, ExperimentError> {
    sweep.validate()?;
    let points = sweep.points();
    let (m, strategy) = *points.get(point).ok_or(ExperimentError::EmptySweep)?;
    let cfg = point_config(cfg, m)?;
    let seed = run_seed(sweep.base_seed, point as u64, run as u64);
    let env_seed = match sweep.environment {
        EnvironmentMode::PerRun => seed,
        EnvironmentMode::FixedPerSweep => environment_seed(sweep.base_seed),
    };
    let wrap = |source| ExperimentError::Point {
        strategy,
        cache_size: m,
        source,
    };
    let network = build_network(&cfg, sweep.costs.as_ref(), env_seed).map_err(wrap)?;
    let mut opts = SimOptions {
        trace: Some(out),
        ..SimOptions::default()
    };
    run_on_network(&cfg, &network, &strategy, seed, &mut opts)
        .map(|(r, _)| r)
        .map_err(wrap)
}

/// Formats like C's `%.6g`: six significant digits, trailing zeros trimmed,
/// exponent notation outside `[1e-5, 1e6)`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-5..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const CSV_HEADER: &str = "strategy,param,M,beta,n_runs,events,avg_cost,ci95_cost,avg_wait,ci95_wait,avg_queries";

/// CSV text of `results`, rows ordered by cache size then parameter.
pub fn to_csv(results: &[PointResult]) -> String {
    let mut rows: Vec<&PointResult> = results.iter().collect();
    rows.sort_by(|a, b| {
        a.cache_size.cmp(&b.cache_size).then(
            a.strategy
                .param()
                .unwrap_or(f64::NEG_INFINITY)
                .total_cmp(&b.strategy.param().unwrap_or(f64::NEG_INFINITY)),
        )
    });
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let a = &r.aggregate;
        let param = r.strategy.param().map(format_sig6).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.strategy.family(),
            param,
            r.cache_size,
            format_sig6(r.zipf_beta),
            a.n_runs,
            r.horizon_events,
            format_sig6(a.mean_cost),
            format_sig6(a.ci95_cost),
            format_sig6(a.mean_wait),
            format_sig6(a.ci95_wait),
            format_sig6(a.mean_queries),
        )
        .unwrap();
    }
    out
}

pub fn write_csv(results: &[PointResult], path: &Path) -> Result<(), ExperimentError> {
    if results.is_empty() {
        return Err(ExperimentError::EmptySweep);
    }
    std::fs::write(path, to_csv(results))?;
    Ok(())
}
