//! Discrete-event core: superposed Poisson arrivals, strategy dispatch,
//! FIFO servers and per-request measurement.
//!
//! Queue lengths seen by strategies count jobs in system, including the one
//! in service. The recorded delay of a request is its sojourn time, from
//! joining a queue to service completion. Departures scheduled at the same
//! instant as an arrival are processed first.

use std::collections::VecDeque;
use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::calendar::EventCalendar;
use crate::model::{
    CacheAllocation, ConfigError, CostMatrix, QueueSnapshot, RunResult, ServiceDist, SimConfig, StrategySpec,
};
use crate::popularity::{proportional_placement, sample_file, zipf_profile, CandidateIndex, PopularityProfile};
use crate::seeding::{stream, SimRng, Stream};
use crate::strategies::{MappingDecision, Request, StrategyRngs};
use crate::topology::{manhattan_cost_matrix, random_lattice_layout};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("strategy chose server {server}, which does not cache file {file}")]
    Infeasible { server: usize, file: usize },
    #[error("invariant violated at t={time}: {what}")]
    Invariant { time: f64, what: String },
    #[error("trace output: {0}")]
    Io(#[from] io::Error),
}

/// Static part of one replication: costs, popularity and cache contents.
#[derive(Debug, Clone)]
pub struct Network {
    pub costs: CostMatrix,
    pub profile: PopularityProfile,
    pub allocation: CacheAllocation,
    pub candidates: CandidateIndex,
}

impl Network {
    /// Draws a lattice topology and a proportional placement from `seed`.
    pub fn generate(cfg: &SimConfig, seed: u64) -> Result<Self, SimError> {
        let layout = random_lattice_layout(
            cfg.n_users,
            cfg.n_servers,
            cfg.lattice_side,
            &mut stream(seed, Stream::Topology),
        );
        Self::with_costs(cfg, manhattan_cost_matrix(&layout), seed)
    }

    /// Uses the given costs and draws only the placement from `seed`.
    pub fn with_costs(cfg: &SimConfig, costs: CostMatrix, seed: u64) -> Result<Self, SimError> {
        if costs.users() != cfg.n_users || costs.servers() != cfg.n_servers {
            return Err(ConfigError::CostMatrix(format!(
                "matrix is {}x{}, config needs {}x{}",
                costs.users(),
                costs.servers(),
                cfg.n_users,
                cfg.n_servers
            ))
            .into());
        }
        let profile = zipf_profile(cfg.n_files, cfg.zipf_beta)?;
        let allocation = proportional_placement(
            &profile,
            cfg.n_servers,
            cfg.cache_size,
            &mut stream(seed, Stream::Placement),
        )?;
        Ok(Self::from_parts(costs, profile, allocation))
    }

    pub fn from_parts(costs: CostMatrix, profile: PopularityProfile, allocation: CacheAllocation) -> Self {
        let candidates = CandidateIndex::new(&allocation);
        Network {
            costs,
            profile,
            allocation,
            candidates,
        }
    }
}

/// Superposition of independent per-user Poisson processes.
#[derive(Debug, Clone)]
pub struct ArrivalProcess {
    cumulative: Vec<f64>,
    interarrival: Exp<f64>,
}

impl ArrivalProcess {
    pub fn new(rates: &[f64]) -> Result<Self, ConfigError> {
        if let Some((user, &rate)) = rates.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r > 0.0)) {
            return Err(ConfigError::NonPositiveRate { user, rate });
        }
        if rates.is_empty() {
            return Err(ConfigError::ZeroCount("n_users"));
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = rates
            .iter()
            .map(|r| {
                acc += r;
                acc
            })
            .collect();
        let interarrival = Exp::new(acc).map_err(|_| ConfigError::NonPositiveRate { user: 0, rate: acc })?;
        Ok(ArrivalProcess {
            cumulative,
            interarrival,
        })
    }

    pub fn total_rate(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Exponential gap at the total rate, then the emitting user chosen with
    /// probability proportional to its rate by a second, independent draw.
    pub fn next_arrival<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, usize) {
        let gap = self.interarrival.sample(rng);
        let u = rng.random::<f64>() * self.total_rate();
        let user = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1);
        (gap, user)
    }
}

/// One draw from the service distribution; constant service draws nothing.
pub fn sample_service<R: Rng + ?Sized>(service: &ServiceDist, rng: &mut R) -> f64 {
    match *service {
        ServiceDist::Exponential { rate } => Exp::new(rate).expect("positive service rate").sample(rng),
        ServiceDist::Constant { duration } => duration,
    }
}

/// A request entering the system, with its service requirement pre-drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub time: f64,
    pub user: usize,
    pub file: usize,
    pub service: f64,
}

/// Source of arrivals in nondecreasing time order.
pub trait ArrivalSource {
    fn next_arrival(&mut self) -> Option<Arrival>;
}

/// Poisson arrivals with Zipf file choice, on dedicated random streams.
pub struct PoissonArrivals<'a> {
    process: ArrivalProcess,
    profile: &'a PopularityProfile,
    service: ServiceDist,
    remaining: u64,
    clock: f64,
    arrival_rng: SimRng,
    file_rng: SimRng,
    service_rng: SimRng,
}

impl<'a> PoissonArrivals<'a> {
    pub fn new(cfg: &SimConfig, profile: &'a PopularityProfile, run_seed: u64) -> Result<Self, ConfigError> {
        Ok(PoissonArrivals {
            process: ArrivalProcess::new(&cfg.arrival_rates)?,
            profile,
            service: cfg.service,
            remaining: cfg.horizon_events,
            clock: 0.0,
            arrival_rng: stream(run_seed, Stream::Arrivals),
            file_rng: stream(run_seed, Stream::Files),
            service_rng: stream(run_seed, Stream::Service),
        })
    }
}

impl ArrivalSource for PoissonArrivals<'_> {
    fn next_arrival(&mut self) -> Option<Arrival> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let (gap, user) = self.process.next_arrival(&mut self.arrival_rng);
        self.clock += gap;
        Some(Arrival {
            time: self.clock,
            user,
            file: sample_file(self.profile, &mut self.file_rng),
            service: sample_service(&self.service, &mut self.service_rng),
        })
    }
}

/// Replays a fixed list of arrivals.
pub struct ScriptedArrivals<'a> {
    items: std::slice::Iter<'a, Arrival>,
}

impl<'a> ScriptedArrivals<'a> {
    pub fn new(items: &'a [Arrival]) -> Self {
        debug_assert!(items.windows(2).all(|w| w[0].time <= w[1].time));
        ScriptedArrivals { items: items.iter() }
    }
}

impl ArrivalSource for ScriptedArrivals<'_> {
    fn next_arrival(&mut self) -> Option<Arrival> {
        self.items.next().copied()
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    arrival: f64,
    service: f64,
    counted: bool,
}

#[derive(Debug, Default)]
struct ServerState {
    waiting: VecDeque<Job>,
    in_service: Option<Job>,
}

/// Running sums for the counted window.
#[derive(Debug, Default, Clone, Copy)]
pub struct MetricAccumulator {
    pub sum_cost: f64,
    pub sum_wait: f64,
    pub sum_queries: u64,
    pub n_counted: u64,
    pub n_departed: u64,
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Arrival,
    Departure(usize),
}

const DEPARTURE_RANK: u8 = 0;
const ARRIVAL_RANK: u8 = 1;

#[derive(Default)]
pub struct SimOptions<'w> {
    /// Per-assignment text trace.
    pub trace: Option<&'w mut dyn Write>,
    /// Re-check queue invariants after every event.
    pub check_invariants: bool,
    /// Keep the chosen server of every arrival.
    pub record_assignments: bool,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub metrics: MetricAccumulator,
    pub mean_jobs_per_server: f64,
    pub assignments: Vec<usize>,
}

pub const TRACE_HEADER: &str = "# time user file server queue_len queries\n";

/// Runs arrivals from `source` through the FIFO servers until every job has
/// departed. Arrivals with index below `warmup` are simulated but excluded
/// from all sums.
pub fn simulate<S: ArrivalSource>(
    costs: &CostMatrix,
    candidates: &CandidateIndex,
    strategy: &StrategySpec,
    source: &mut S,
    warmup: u64,
    rngs: &mut StrategyRngs,
    opts: &mut SimOptions<'_>,
) -> Result<SimOutcome, SimError> {
    let n_servers = costs.servers();
    let mut servers: Vec<ServerState> = (0..n_servers).map(|_| ServerState::default()).collect();
    let mut lengths = vec![0u32; n_servers];
    let mut calendar: EventCalendar<Event> = EventCalendar::new();
    let mut acc = MetricAccumulator::default();
    let mut assignments = Vec::new();

    let mut pending = source.next_arrival();
    if let Some(a) = pending {
        calendar.schedule(a.time, ARRIVAL_RANK, Event::Arrival);
    }
    if let Some(t) = opts.trace.as_mut() {
        t.write_all(TRACE_HEADER.as_bytes())?;
    }

    let mut arrival_index: u64 = 0;
    let mut jobs_in_system: u64 = 0;
    let mut measuring = false;
    let (mut window_start, mut window_end, mut last_time, mut area) = (0.0, 0.0, 0.0, 0.0);

    while let Some((now, event)) = calendar.pop() {
        if measuring {
            area += jobs_in_system as f64 * (now - last_time);
            last_time = now;
        }
        let touched = match event {
            Event::Departure(k) => {
                let server = &mut servers[k];
                let job = server.in_service.take().expect("departure from idle server");
                if job.counted {
                    acc.sum_wait += now - job.arrival;
                    acc.n_departed += 1;
                }
                if let Some(next) = server.waiting.pop_front() {
                    calendar.schedule(now + next.service, DEPARTURE_RANK, Event::Departure(k));
                    server.in_service = Some(next);
                }
                lengths[k] -= 1;
                jobs_in_system -= 1;
                k
            }
            Event::Arrival => {
                let arrival = pending.take().expect("scheduled arrival");
                let counted = arrival_index >= warmup;
                if arrival_index == warmup {
                    measuring = true;
                    window_start = now;
                    last_time = now;
                }
                let cands = candidates.get(arrival.file);
                let req = Request {
                    user: arrival.user,
                    candidates: cands,
                    costs: costs.row(arrival.user),
                    queues: QueueSnapshot::new(&lengths, now),
                };
                let MappingDecision { server, queries_used } = strategy.decide(&req, rngs);
                if cands.binary_search(&server).is_err() {
                    return Err(SimError::Infeasible {
                        server,
                        file: arrival.file,
                    });
                }
                if let Some(t) = opts.trace.as_mut() {
                    writeln!(
                        t,
                        "{} {} {} {} {} {}",
                        now, arrival.user, arrival.file, server, lengths[server], queries_used
                    )?;
                }
                if opts.record_assignments {
                    assignments.push(server);
                }
                if counted {
                    acc.sum_cost += costs.get(arrival.user, server);
                    acc.sum_queries += queries_used as u64;
                    acc.n_counted += 1;
                }
                let job = Job {
                    arrival: now,
                    service: arrival.service,
                    counted,
                };
                let state = &mut servers[server];
                if state.in_service.is_none() {
                    calendar.schedule(now + job.service, DEPARTURE_RANK, Event::Departure(server));
                    state.in_service = Some(job);
                } else {
                    state.waiting.push_back(job);
                }
                lengths[server] += 1;
                jobs_in_system += 1;

                arrival_index += 1;
                pending = source.next_arrival();
                match pending {
                    Some(a) => calendar.schedule(a.time, ARRIVAL_RANK, Event::Arrival),
                    None => {
                        measuring = false;
                        window_end = now;
                    }
                }
                server
            }
        };
        if opts.check_invariants {
            check_server(&servers[touched], lengths[touched], now)?;
        }
    }

    if acc.n_departed != acc.n_counted {
        return Err(SimError::Invariant {
            time: calendar.now(),
            what: format!("{} counted arrivals but {} departures", acc.n_counted, acc.n_departed),
        });
    }
    let span = window_end - window_start;
    let mean_jobs_per_server = if span > 0.0 {
        area / span / n_servers as f64
    } else {
        0.0
    };
    Ok(SimOutcome {
        metrics: acc,
        mean_jobs_per_server,
        assignments,
    })
}

fn check_server(server: &ServerState, reported: u32, time: f64) -> Result<(), SimError> {
    let fail = |what: String| Err(SimError::Invariant { time, what });
    let actual = server.waiting.len() as u32 + u32::from(server.in_service.is_some());
    if actual != reported {
        return fail(format!("reported queue length {reported}, actual {actual}"));
    }
    if server.in_service.is_none() && !server.waiting.is_empty() {
        return fail("idle server with waiting jobs".into());
    }
    let mut last = server.in_service.map_or(f64::NEG_INFINITY, |j| j.arrival);
    for job in &server.waiting {
        if job.arrival < last {
            return fail("FIFO order broken".into());
        }
        last = job.arrival;
    }
    Ok(())
}

fn to_result(outcome: &SimOutcome, seed: u64) -> RunResult {
    let m = &outcome.metrics;
    let n = m.n_counted.max(1) as f64;
    RunResult {
        avg_cost: m.sum_cost / n,
        avg_wait: m.sum_wait / n,
        avg_queries: m.sum_queries as f64 / n,
        mean_jobs_per_server: outcome.mean_jobs_per_server,
        counted_events: m.n_counted,
        counted_departures: m.n_departed,
        seed_used: seed,
    }
}

/// One replication on a fixed network. Arrivals, files, service times and
/// strategy randomness come from separate streams of `run_seed`.
pub fn run_on_network(
    cfg: &SimConfig,
    network: &Network,
    strategy: &StrategySpec,
    run_seed: u64,
    opts: &mut SimOptions<'_>,
) -> Result<(RunResult, SimOutcome), SimError> {
    cfg.validate()?;
    strategy.validate()?;
    let mut source = PoissonArrivals::new(cfg, &network.profile, run_seed)?;
    let mut rngs = StrategyRngs::from_seed(run_seed);
    let outcome = simulate(
        &network.costs,
        &network.candidates,
        strategy,
        &mut source,
        cfg.warmup_events,
        &mut rngs,
        opts,
    )?;
    Ok((to_result(&outcome, run_seed), outcome))
}

/// One replication with topology and placement drawn from `run_seed`.
pub fn run_simulation(cfg: &SimConfig, strategy: &StrategySpec, run_seed: u64) -> Result<RunResult, SimError> {
    cfg.validate()?;
    let network = Network::generate(cfg, run_seed)?;
    run_on_network(cfg, &network, strategy, run_seed, &mut SimOptions::default()).map(|(r, _)| r)
}

/// Result of replaying a fixed trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub assignments: Vec<usize>,
    pub avg_cost: f64,
    pub avg_wait: f64,
}

/// Feeds a fixed request list (with pre-drawn service times) through a
/// strategy, counting every request.
pub fn replay_trace(
    costs: &CostMatrix,
    candidates: &CandidateIndex,
    arrivals: &[Arrival],
    strategy: &StrategySpec,
    rngs: &mut StrategyRngs,
) -> Result<ReplayOutcome, SimError> {
    let mut source = ScriptedArrivals::new(arrivals);
    let mut opts = SimOptions {
        record_assignments: true,
        check_invariants: true,
        ..SimOptions::default()
    };
    let out = simulate(costs, candidates, strategy, &mut source, 0, rngs, &mut opts)?;
    let n = out.metrics.n_counted.max(1) as f64;
    Ok(ReplayOutcome {
        avg_cost: out.metrics.sum_cost / n,
        avg_wait: out.metrics.sum_wait / n,
        assignments: out.assignments,
    })
}
