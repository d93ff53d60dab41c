use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use cdnmap::experiment::{self, to_csv};
use cdnmap::oracle::{mm1_mean_sojourn, supermarket_mean_queue};
use cdnmap::{ConfigFile, CostMatrix, EnvironmentMode, Network, SimConfig, StrategySpec, SweepSpec};

/// Simulate request mapping policies and write trade-off curves as CSV.
#[derive(Debug, Parser)]
#[command(name = "simulate", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Key-value configuration file; defaults to the built-in evaluation setup.
    #[arg(long)]
    config: Option<PathBuf>,

    /// mincost | minqueue | pss:<zeta> | wmc:<alpha> | mcs:<delta>
    #[arg(long)]
    strategy: Option<String>,

    /// Parameter grid, e.g. `zeta:0,0.5,1`, `alpha:1,0.5,0` or `delta:1,2,4`.
    #[arg(long)]
    sweep: Option<String>,

    /// Comma-separated cache sizes; defaults to the configured cache_size.
    #[arg(long, value_delimiter = ',')]
    cache_sizes: Option<Vec<usize>>,

    /// Independent replications per point.
    #[arg(long, default_value_t = 10)]
    runs: usize,

    /// Base seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,

    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,

    /// Write the per-assignment trace of the first run of a single-point sweep.
    #[arg(long)]
    trace: Option<PathBuf>,

    /// Initial arrivals excluded from the averages; overrides the config file.
    #[arg(long)]
    warmup: Option<u64>,

    /// Request arrivals per run; overrides the config file.
    #[arg(long)]
    events: Option<u64>,

    /// Draw topology and placement once per sweep instead of once per run.
    #[arg(long)]
    fixed_environment: bool,

    /// Dump the cache allocation of the first run of each cache size.
    #[arg(long)]
    dump_allocation: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form reference values.
    #[command(hide = true)]
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// M/M/1 mean sojourn time.
    Mm1 {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
    },
    /// Supermarket-model mean jobs per server.
    Supermarket {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        d: u32,
    },
}

fn parse_sweep(spec: &str, family: StrategySpec) -> Result<Vec<f64>> {
    let (name, list) = match spec.split_once(':') {
        Some((n, l)) => (Some(n.trim().to_ascii_lowercase()), l),
        None => (None, spec),
    };
    if let Some(name) = name {
        let expected = match family {
            StrategySpec::Pss { .. } => ["zeta", "pss"],
            StrategySpec::Wmc { .. } => ["alpha", "wmc"],
            StrategySpec::Mcs { .. } => ["delta", "mcs"],
            _ => bail!("{} takes no parameter to sweep", family.family()),
        };
        if !expected.contains(&name.as_str()) {
            bail!(
                "sweep parameter {name:?} does not belong to strategy {}",
                family.family()
            );
        }
    }
    list.split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("bad sweep value {v:?}"))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    if let Some(Command::Oracle { which }) = cli.command {
        let value = match which {
            OracleCommand::Mm1 { lambda, mu } => mm1_mean_sojourn(lambda, mu)?,
            OracleCommand::Supermarket { lambda, d } => supermarket_mean_queue(lambda, d)?,
        };
        println!("{value}");
        return Ok(());
    }

    let file = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ConfigFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ConfigFile {
            config: SimConfig::default(),
            strategy: None,
            cost_matrix: None,
        },
    };
    let mut cfg = file.config;
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(n) = cli.events {
        cfg.horizon_events = n;
    }
    if let Some(w) = cli.warmup {
        cfg.warmup_events = w;
    }
    cfg.validate()?;

    let strategy = match (&cli.strategy, file.strategy) {
        (Some(s), _) => s.parse::<StrategySpec>()?,
        (None, Some(s)) => s,
        (None, None) => bail!("no strategy given (use --strategy or `strategy =` in the config)"),
    };
    let cache_sizes = cli.cache_sizes.clone().unwrap_or_else(|| vec![cfg.cache_size]);
    let mut sweep = match &cli.sweep {
        Some(s) => SweepSpec::parameter_sweep(
            strategy,
            &parse_sweep(s, strategy)?,
            cache_sizes,
            cli.runs,
            cfg.base_seed,
        )?,
        None => SweepSpec::new(vec![strategy], cache_sizes, cli.runs, cfg.base_seed),
    }
    .with_workers(cli.workers);
    if cli.fixed_environment {
        sweep = sweep.with_environment(EnvironmentMode::FixedPerSweep);
    }
    if let Some(path) = &file.cost_matrix {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        sweep = sweep.with_costs(CostMatrix::from_csv(&text)?);
    }
    sweep.validate()?;

    let results = experiment::run_sweep(&cfg, &sweep)?;
    let csv = to_csv(&results);
    match &cli.out {
        Some(path) => fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(csv.as_bytes())?,
    }

    if let Some(path) = &cli.trace {
        if sweep.points().len() != 1 {
            bail!(
                "--trace needs a single-point sweep, got {} points",
                sweep.points().len()
            );
        }
        let mut out = BufWriter::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?);
        experiment::trace_run(&cfg, &sweep, 0, 0, &mut out)?;
        out.flush()?;
    }

    if let Some(path) = &cli.dump_allocation {
        let mut text = String::new();
        let points = sweep.points();
        for (p, &(m, _)) in points.iter().enumerate() {
            if p > 0 && points[p - 1].0 == m {
                continue;
            }
            let point_cfg = SimConfig {
                cache_size: m,
                ..cfg.clone()
            };
            let seed = match sweep.environment {
                EnvironmentMode::PerRun => cdnmap::seeding::run_seed(sweep.base_seed, p as u64, 0),
                EnvironmentMode::FixedPerSweep => experiment::environment_seed(sweep.base_seed),
            };
            let network = match &sweep.costs {
                Some(c) => Network::with_costs(&point_cfg, c.clone(), seed)?,
                None => Network::generate(&point_cfg, seed)?,
            };
            text.push_str(&format!("# M={m}\n"));
            text.push_str(&network.allocation.dump());
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
