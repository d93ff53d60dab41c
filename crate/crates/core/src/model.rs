//! Shared domain types: simulation configuration, strategy descriptors,
//! cost matrices, cache allocations and per-run results.
//!
//! Indices are zero-based throughout: users `0..K`, servers `0..L`,
//! files `0..N` (file 0 is the most popular).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    ZeroCount(&'static str),
    #[error("aggregate memory too small: {servers} servers x {cache_size} files < {files} files")]
    AggregateMemory {
        servers: usize,
        cache_size: usize,
        files: usize,
    },
    #[error("cache size {cache_size} exceeds library size {files}")]
    CacheExceedsLibrary { cache_size: usize, files: usize },
    #[error("arrival rate of user {user} must be positive and finite, got {rate}")]
    NonPositiveRate { user: usize, rate: f64 },
    #[error("expected {expected} arrival rates (one per user), got {got}")]
    RateCountMismatch { expected: usize, got: usize },
    #[error("service parameter must be positive and finite, got {0}")]
    NonPositiveService(f64),
    #[error("warmup_events ({warmup}) must be smaller than horizon_events ({horizon})")]
    WarmupNotBeforeHorizon { warmup: u64, horizon: u64 },
    #[error("zipf_beta must be nonnegative and finite, got {0}")]
    InvalidBeta(f64),
    #[error("popularity weights must be finite and positive")]
    InvalidWeights,
    #[error("invalid strategy parameter: {0}")]
    InvalidStrategy(String),
    #[error("cost matrix: {0}")]
    CostMatrix(String),
    #[error("cache allocation: {0}")]
    Allocation(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Service-time distribution of every server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServiceDist {
    Exponential { rate: f64 },
    Constant { duration: f64 },
}

impl ServiceDist {
    pub fn mean(&self) -> f64 {
        match *self {
            ServiceDist::Exponential { rate } => 1.0 / rate,
            ServiceDist::Constant { duration } => duration,
        }
    }

    fn parameter(&self) -> f64 {
        match *self {
            ServiceDist::Exponential { rate } => rate,
            ServiceDist::Constant { duration } => duration,
        }
    }
}

impl FromStr for ServiceDist {
    type Err = String;

    /// Accepts `exp:<rate>` or `const:<duration>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, value) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| format!("expected exp:<rate> or const:<duration>, got {s:?}"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("bad service parameter {value:?}"))?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(ServiceDist::Exponential { rate: value }),
            "const" | "constant" => Ok(ServiceDist::Constant { duration: value }),
            other => Err(format!("unknown service distribution {other:?}")),
        }
    }
}

impl fmt::Display for ServiceDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ServiceDist::Exponential { rate } => write!(f, "exp:{rate}"),
            ServiceDist::Constant { duration } => write!(f, "const:{duration}"),
        }
    }
}

/// All parameters of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_servers: usize,
    pub n_users: usize,
    pub n_files: usize,
    pub cache_size: usize,
    pub zipf_beta: f64,
    /// One rate per user, requests per unit time.
    pub arrival_rates: Vec<f64>,
    pub service: ServiceDist,
    pub horizon_events: u64,
    pub warmup_events: u64,
    pub lattice_side: usize,
    pub base_seed: u64,
}

impl Default for SimConfig {
    /// The evaluation setup: 100 servers, 100 users at rate 0.9, 70 files,
    /// unit-rate exponential service and 1e5 request events.
    fn default() -> Self {
        SimConfig {
            n_servers: 100,
            n_users: 100,
            n_files: 70,
            cache_size: 8,
            zipf_beta: 0.8,
            arrival_rates: vec![0.9; 100],
            service: ServiceDist::Exponential { rate: 1.0 },
            horizon_events: 100_000,
            warmup_events: 0,
            lattice_side: 20,
            base_seed: 1,
        }
    }
}

impl SimConfig {
    /// Sets `n_users` and gives every user the same rate.
    pub fn with_uniform_rate(mut self, n_users: usize, rate: f64) -> Self {
        self.n_users = n_users;
        self.arrival_rates = vec![rate; n_users];
        self
    }

    pub fn total_arrival_rate(&self) -> f64 {
        self.arrival_rates.iter().sum()
    }

    pub fn counted_events(&self) -> u64 {
        self.horizon_events - self.warmup_events
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [
            ("n_servers", self.n_servers),
            ("n_users", self.n_users),
            ("n_files", self.n_files),
            ("cache_size", self.cache_size),
            ("lattice_side", self.lattice_side),
        ] {
            if value == 0 {
                return Err(ConfigError::ZeroCount(name));
            }
        }
        if self.horizon_events == 0 {
            return Err(ConfigError::ZeroCount("horizon_events"));
        }
        if self.cache_size > self.n_files {
            return Err(ConfigError::CacheExceedsLibrary {
                cache_size: self.cache_size,
                files: self.n_files,
            });
        }
        if self.n_servers.saturating_mul(self.cache_size) < self.n_files {
            return Err(ConfigError::AggregateMemory {
                servers: self.n_servers,
                cache_size: self.cache_size,
                files: self.n_files,
            });
        }
        if !(self.zipf_beta.is_finite() && self.zipf_beta >= 0.0) {
            return Err(ConfigError::InvalidBeta(self.zipf_beta));
        }
        if self.arrival_rates.len() != self.n_users {
            return Err(ConfigError::RateCountMismatch {
                expected: self.n_users,
                got: self.arrival_rates.len(),
            });
        }
        if let Some((user, &rate)) = self
            .arrival_rates
            .iter()
            .enumerate()
            .find(|(_, r)| !(r.is_finite() && **r > 0.0))
        {
            return Err(ConfigError::NonPositiveRate { user, rate });
        }
        let p = self.service.parameter();
        if !(p.is_finite() && p > 0.0) {
            return Err(ConfigError::NonPositiveService(p));
        }
        if self.warmup_events >= self.horizon_events {
            return Err(ConfigError::WarmupNotBeforeHorizon {
                warmup: self.warmup_events,
                horizon: self.horizon_events,
            });
        }
        Ok(())
    }
}

/// Returns the configuration unchanged if every invariant holds.
pub fn validate_config(cfg: SimConfig) -> Result<SimConfig, ConfigError> {
    cfg.validate()?;
    Ok(cfg)
}

/// A request-mapping policy together with its tuning parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategySpec {
    MinCost,
    MinQueue,
    /// Probabilistic switching: min-queue with probability `zeta`, else min-cost.
    Pss {
        zeta: f64,
    },
    /// Weighted combination of normalized cost and normalized queue length.
    Wmc {
        alpha: f64,
    },
    /// Least-loaded among the `delta` cheapest candidates.
    Mcs {
        delta: usize,
    },
}

impl StrategySpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            StrategySpec::Pss { zeta: x } | StrategySpec::Wmc { alpha: x } => {
                if !(0.0..=1.0).contains(&x) {
                    return Err(ConfigError::InvalidStrategy(format!(
                        "{} parameter {x} outside [0, 1]",
                        self.family()
                    )));
                }
            }
            StrategySpec::Mcs { delta } => {
                if delta == 0 {
                    return Err(ConfigError::InvalidStrategy("mcs delta must be >= 1".into()));
                }
            }
            StrategySpec::MinCost | StrategySpec::MinQueue => {}
        }
        Ok(())
    }

    pub fn family(&self) -> &'static str {
        match self {
            StrategySpec::MinCost => "mincost",
            StrategySpec::MinQueue => "minqueue",
            StrategySpec::Pss { .. } => "pss",
            StrategySpec::Wmc { .. } => "wmc",
            StrategySpec::Mcs { .. } => "mcs",
        }
    }

    pub fn param(&self) -> Option<f64> {
        match *self {
            StrategySpec::MinCost | StrategySpec::MinQueue => None,
            StrategySpec::Pss { zeta } => Some(zeta),
            StrategySpec::Wmc { alpha } => Some(alpha),
            StrategySpec::Mcs { delta } => Some(delta as f64),
        }
    }

    /// Same family with a different parameter value.
    pub fn with_param(&self, value: f64) -> Result<StrategySpec, ConfigError> {
        let spec = match self {
            StrategySpec::Pss { .. } => StrategySpec::Pss { zeta: value },
            StrategySpec::Wmc { .. } => StrategySpec::Wmc { alpha: value },
            StrategySpec::Mcs { .. } => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(ConfigError::InvalidStrategy(format!(
                        "mcs delta must be a positive integer, got {value}"
                    )));
                }
                StrategySpec::Mcs { delta: value as usize }
            }
            StrategySpec::MinCost | StrategySpec::MinQueue => {
                return Err(ConfigError::InvalidStrategy(format!(
                    "{} takes no parameter",
                    self.family()
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl FromStr for StrategySpec {
    type Err = ConfigError;

    /// Parses `mincost`, `minqueue`, `pss:<zeta>`, `wmc:<alpha>` or `mcs:<delta>`.
    /// A bare family name (`pss`) defaults its parameter to the family's midpoint
    /// and is meant to be combined with a sweep.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        let (family, value) = match s.split_once(':') {
            Some((f, v)) => (f.trim().to_string(), Some(v.trim().to_string())),
            None => (s.clone(), None),
        };
        let bad = |msg: String| ConfigError::InvalidStrategy(msg);
        let real = |v: &Option<String>, default: f64| -> Result<f64, ConfigError> {
            match v {
                Some(v) => v.parse().map_err(|_| bad(format!("bad parameter {v:?}"))),
                None => Ok(default),
            }
        };
        let spec = match family.as_str() {
            "mincost" => StrategySpec::MinCost,
            "minqueue" => StrategySpec::MinQueue,
            "pss" => StrategySpec::Pss {
                zeta: real(&value, 0.5)?,
            },
            "wmc" => StrategySpec::Wmc {
                alpha: real(&value, 0.5)?,
            },
            "mcs" => StrategySpec::Mcs {
                delta: match &value {
                    Some(v) => v.parse().map_err(|_| bad(format!("bad delta {v:?}")))?,
                    None => 2,
                },
            },
            other => return Err(bad(format!("unknown strategy {other:?}"))),
        };
        if matches!(spec, StrategySpec::MinCost | StrategySpec::MinQueue) && value.is_some() {
            return Err(bad(format!("{family} takes no parameter")));
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::MinCost | StrategySpec::MinQueue => f.write_str(self.family()),
            StrategySpec::Pss { zeta } => write!(f, "pss:{zeta}"),
            StrategySpec::Wmc { alpha } => write!(f, "wmc:{alpha}"),
            StrategySpec::Mcs { delta } => write!(f, "mcs:{delta}"),
        }
    }
}

/// Dense `K x L` matrix of per-delivery costs, row = user.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    users: usize,
    servers: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(users: usize, servers: usize, entries: Vec<f64>) -> Result<Self, ConfigError> {
        if users == 0 || servers == 0 {
            return Err(ConfigError::CostMatrix("dimensions must be positive".into()));
        }
        if entries.len() != users * servers {
            return Err(ConfigError::CostMatrix(format!(
                "expected {} entries for {users}x{servers}, got {}",
                users * servers,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(ConfigError::CostMatrix(format!(
                "entries must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(CostMatrix {
            users,
            servers,
            entries,
        })
    }

    /// Every entry equal to `value`.
    pub fn uniform(users: usize, servers: usize, value: f64) -> Result<Self, ConfigError> {
        Self::new(users, servers, vec![value; users * servers])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ConfigError> {
        let servers = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != servers) {
            return Err(ConfigError::CostMatrix(format!(
                "row {i} has {} columns, expected {servers}",
                rows[i].len()
            )));
        }
        Self::new(rows.len(), servers, rows.concat())
    }

    /// Parses headerless CSV: one row per user, one column per server.
    pub fn from_csv(text: &str) -> Result<Self, ConfigError> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ConfigError::Parse {
                    line: n + 1,
                    msg: format!("cost matrix entry: {e}"),
                })?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.users {
            let row: Vec<String> = self.row(i).iter().map(|c| c.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn servers(&self) -> usize {
        self.servers
    }

    pub fn get(&self, user: usize, server: usize) -> f64 {
        self.entries[user * self.servers + server]
    }

    /// Costs from `user` to every server.
    pub fn row(&self, user: usize) -> &[f64] {
        &self.entries[user * self.servers..(user + 1) * self.servers]
    }
}

/// Per-server cached file sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheAllocation {
    n_files: usize,
    /// Sorted, duplicate-free file list of each server.
    sets: Vec<Vec<usize>>,
}

impl CacheAllocation {
    /// Checks that every server holds exactly `cache_size` distinct files and
    /// that every file is cached somewhere.
    pub fn new(mut sets: Vec<Vec<usize>>, n_files: usize, cache_size: usize) -> Result<Self, ConfigError> {
        let mut covered = vec![false; n_files];
        for (k, set) in sets.iter_mut().enumerate() {
            set.sort_unstable();
            set.dedup();
            if set.len() != cache_size {
                return Err(ConfigError::Allocation(format!(
                    "server {k} holds {} distinct files, expected {cache_size}",
                    set.len()
                )));
            }
            for &f in set.iter() {
                if f >= n_files {
                    return Err(ConfigError::Allocation(format!(
                        "server {k} holds file {f} outside library of {n_files}"
                    )));
                }
                covered[f] = true;
            }
        }
        if let Some(f) = covered.iter().position(|c| !c) {
            return Err(ConfigError::Allocation(format!("file {f} is not cached anywhere")));
        }
        Ok(CacheAllocation { n_files, sets })
    }

    pub fn n_servers(&self) -> usize {
        self.sets.len()
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn files(&self, server: usize) -> &[usize] {
        &self.sets[server]
    }

    pub fn contains(&self, server: usize, file: usize) -> bool {
        self.sets[server].binary_search(&file).is_ok()
    }

    /// Debug dump, one `server: file,file,...` line per server.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, set) in self.sets.iter().enumerate() {
            let files: Vec<String> = set.iter().map(usize::to_string).collect();
            out.push_str(&format!("{k}: {}\n", files.join(",")));
        }
        out
    }
}

/// Jobs in system (including the one in service) at each server, at `time`.
#[derive(Debug, Clone, Copy)]
pub struct QueueSnapshot<'a> {
    pub lengths: &'a [u32],
    pub time: f64,
}

impl<'a> QueueSnapshot<'a> {
    pub fn new(lengths: &'a [u32], time: f64) -> Self {
        QueueSnapshot { lengths, time }
    }

    pub fn len_of(&self, server: usize) -> u32 {
        self.lengths[server]
    }
}

/// Averages from one simulation replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunResult {
    /// Mean delivery cost per counted request.
    pub avg_cost: f64,
    /// Mean sojourn time (queueing plus service) per counted request.
    pub avg_wait: f64,
    /// Mean queue-length queries per counted assignment.
    pub avg_queries: f64,
    /// Time-averaged jobs in system per server over the counted window.
    pub mean_jobs_per_server: f64,
    pub counted_events: u64,
    pub counted_departures: u64,
    pub seed_used: u64,
}

/// Contents of a `key = value` configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub config: SimConfig,
    pub strategy: Option<StrategySpec>,
    pub cost_matrix: Option<PathBuf>,
}

impl ConfigFile {
    /// Parses the flat key-value format. Unset keys keep their defaults;
    /// `arrival_rate` gives every user the same rate while `arrival_rates`
    /// takes a comma-separated list.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SimConfig::default();
        let mut strategy = None;
        let mut cost_matrix = None;
        let mut uniform_rate: Option<f64> = None;
        let mut rates: Option<Vec<f64>> = None;

        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ConfigError::Parse { line: n + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let count = || value.parse::<usize>().map_err(|e| err(format!("{key}: {e}")));
            let big = || value.parse::<u64>().map_err(|e| err(format!("{key}: {e}")));
            let real = || value.parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
            match key {
                "n_servers" => cfg.n_servers = count()?,
                "n_users" => cfg.n_users = count()?,
                "n_files" => cfg.n_files = count()?,
                "cache_size" => cfg.cache_size = count()?,
                "zipf_beta" => cfg.zipf_beta = real()?,
                "arrival_rate" => uniform_rate = Some(real()?),
                "arrival_rates" => {
                    rates = Some(
                        value
                            .split(',')
                            .map(|v| v.trim().parse::<f64>())
                            .collect::<Result<_, _>>()
                            .map_err(|e| err(format!("{key}: {e}")))?,
                    )
                }
                "service" => cfg.service = value.parse().map_err(err)?,
                "horizon_events" => cfg.horizon_events = big()?,
                "warmup_events" => cfg.warmup_events = big()?,
                "lattice_side" => cfg.lattice_side = count()?,
                "base_seed" => cfg.base_seed = big()?,
                "strategy" => strategy = Some(value.parse().map_err(|e: ConfigError| err(e.to_string()))?),
                "cost_matrix" => cost_matrix = Some(PathBuf::from(value)),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }

        cfg.arrival_rates = match (rates, uniform_rate) {
            (Some(r), _) => r,
            (None, Some(rate)) => vec![rate; cfg.n_users],
            (None, None) => {
                let rate = cfg.arrival_rates.first().copied().unwrap_or(0.9);
                vec![rate; cfg.n_users]
            }
        };
        Ok(ConfigFile {
            config: cfg,
            strategy,
            cost_matrix,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_setup_is_valid() {
        let cfg = SimConfig::default();
        assert_eq!((cfg.n_servers, cfg.n_users, cfg.n_files), (100, 100, 70));
        assert_eq!(validate_config(cfg.clone()), Ok(cfg));
    }

    #[test]
    fn aggregate_memory_violation() {
        let cfg = SimConfig {
            n_servers: 2,
            cache_size: 1,
            n_files: 3,
            ..SimConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::AggregateMemory {
                servers: 2,
                cache_size: 1,
                files: 3
            })
        ));
    }

    #[test]
    fn cache_larger_than_library() {
        let cfg = SimConfig {
            cache_size: 5,
            n_files: 4,
            ..SimConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(ConfigError::CacheExceedsLibrary { .. })));
    }

    #[test]
    fn rates_and_warmup() {
        let mut cfg = SimConfig::default();
        cfg.arrival_rates[7] = 0.0;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::NonPositiveRate { user: 7, .. })
        ));

        let cfg = SimConfig {
            service: ServiceDist::Exponential { rate: -1.0 },
            ..SimConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(ConfigError::NonPositiveService(_))));

        let cfg = SimConfig {
            warmup_events: 100_000,
            ..SimConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::WarmupNotBeforeHorizon { .. })
        ));
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("pss:0.5".parse(), Ok(StrategySpec::Pss { zeta: 0.5 }));
        assert_eq!("wmc:0.3".parse(), Ok(StrategySpec::Wmc { alpha: 0.3 }));
        assert_eq!("mcs:2".parse(), Ok(StrategySpec::Mcs { delta: 2 }));
        assert_eq!("mincost".parse(), Ok(StrategySpec::MinCost));
        assert_eq!(" MinQueue ".parse(), Ok(StrategySpec::MinQueue));
        assert!("pss:1.5".parse::<StrategySpec>().is_err());
        assert!("mcs:0".parse::<StrategySpec>().is_err());
        assert!("mincost:1".parse::<StrategySpec>().is_err());
        assert!("greedy".parse::<StrategySpec>().is_err());
        for s in ["pss:0.25", "wmc:1", "mcs:7", "mincost"] {
            let spec: StrategySpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<StrategySpec>().unwrap(), spec);
        }
    }

    #[test]
    fn cost_matrix_csv() {
        let m = CostMatrix::from_csv("0,1,2\n3,4,5\n").unwrap();
        assert_eq!((m.users(), m.servers()), (2, 3));
        assert_eq!(m.get(1, 2), 5.0);
        assert_eq!(m.row(0), &[0.0, 1.0, 2.0]);
        assert_eq!(CostMatrix::from_csv(&m.to_csv()).unwrap(), m);
        assert!(CostMatrix::from_csv("0,1\n2\n").is_err());
        assert!(CostMatrix::from_csv("0,-1\n").is_err());
    }

    #[test]
    fn allocation_invariants() {
        let a = CacheAllocation::new(vec![vec![1, 0], vec![2, 1]], 3, 2).unwrap();
        assert_eq!(a.files(0), &[0, 1]);
        assert!(a.contains(1, 2) && !a.contains(0, 2));
        assert_eq!(a.dump(), "0: 0,1\n1: 1,2\n");
        assert!(CacheAllocation::new(vec![vec![0, 0], vec![1, 2]], 3, 2).is_err());
        assert!(CacheAllocation::new(vec![vec![0, 1], vec![0, 1]], 3, 2).is_err());
    }

    #[test]
    fn config_file_round() {
        let text = "# small setup\nn_servers = 10\nn_users = 4\nn_files = 5\ncache_size = 2\n\
                    zipf_beta = 1.0\narrival_rate = 0.5  # all users\nservice = const:2\n\
                    horizon_events = 1000\nwarmup_events = 10\nlattice_side = 5\nbase_seed = 42\n\
                    strategy = mcs:2\n";
        let file = ConfigFile::parse(text).unwrap();
        let cfg = &file.config;
        assert_eq!(cfg.arrival_rates, vec![0.5; 4]);
        assert_eq!(cfg.service, ServiceDist::Constant { duration: 2.0 });
        assert_eq!(cfg.base_seed, 42);
        assert_eq!(file.strategy, Some(StrategySpec::Mcs { delta: 2 }));
        cfg.validate().unwrap();

        let err = ConfigFile::parse("n_servers = 3\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
        let file = ConfigFile::parse("n_users = 2\narrival_rates = 1, 3\n").unwrap();
        assert_eq!(file.config.arrival_rates, vec![1.0, 3.0]);
    }
}
