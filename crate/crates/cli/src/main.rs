use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use dualcbf::config::RunConfig;
use dualcbf::sim::{run_episode, Episode, Scenario};

mod table;
mod verify;

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_CONTACT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dualcbf",
    version,
    about = "Dual-barrier safety filter for frontier exploration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write trace.csv and summary.txt.
    Run {
        #[command(flatten)]
        common: Common,
        /// Exit with status 3 if the robot touched an obstacle.
        #[arg(long)]
        fail_on_contact: bool,
    },
    /// Paired filtered and baseline episodes over consecutive seeds.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Number of seeds, starting at --seed.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
    },
    /// Oracle sweeps for the projection, soft QP, distance fields and shaping class.
    Verify {
        /// Agreement tolerance between the closed form and Dykstra's method.
        #[arg(long, default_value_t = 1e-6)]
        verify_tolerance: f64,
        /// Base seed for the random instances.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the T1-T4 report for each shaping function.
    Admissibility,
}

#[derive(Args)]
struct Common {
    /// Bundled scenario name (corridor, rooms, open_hall) or a scenario file.
    #[arg(long)]
    scenario: Option<String>,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ticks: Option<usize>,
    /// Bypass the safety filter (speed ceiling only).
    #[arg(long)]
    no_filter: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Common {
    /// Defaults, then the config file, then flags.
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(s) = &self.scenario {
            cfg.scenario = s.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(ticks) = self.ticks {
            cfg.ticks = ticks;
        }
        if self.no_filter {
            cfg.filter_enabled = false;
        }
        if let Some(dir) = &self.out_dir {
            cfg.out_dir = dir.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn scenario_for(cfg: &RunConfig) -> Result<Scenario> {
    Scenario::resolve(&cfg.scenario).with_context(|| format!("loading scenario `{}`", cfg.scenario))
}

fn print_metrics(episode: &Episode) {
    for (k, v) in episode.metrics.entries() {
        println!("  {k:<26} {v}");
    }
}

fn run(common: &Common, fail_on_contact: bool) -> Result<u8> {
    let cfg = common.resolve()?;
    let scenario = scenario_for(&cfg)?;
    let episode = run_episode(&cfg, &scenario)?;
    let dir = episode.write_outputs()?;
    println!("wrote {}", dir.display());
    print_metrics(&episode);
    if fail_on_contact && episode.metrics.contacts > 0 {
        eprintln!("contact occurred ({} ticks)", episode.metrics.contacts);
        return Ok(EXIT_CONTACT);
    }
    Ok(0)
}

fn compare(common: &Common, seeds: u64) -> Result<u8> {
    use rayon::prelude::*;

    anyhow::ensure!(seeds > 0, "--seeds must be at least 1");
    let base = common.resolve()?;
    let scenario = scenario_for(&base)?;
    let arms = |seed: u64| {
        let first = RunConfig {
            seed: base.seed + seed,
            filter_enabled: !common.no_filter,
            ..base.clone()
        };
        let second = RunConfig {
            filter_enabled: false,
            ..first.clone()
        };
        (first, second)
    };
    let pairs: Vec<(Episode, Episode)> = (0..seeds)
        .into_par_iter()
        .map(|k| -> Result<(Episode, Episode)> {
            let (a, b) = arms(k);
            let a = run_episode(&a, &scenario)?;
            let b = run_episode(&b, &scenario)?;
            a.write_outputs()?;
            b.write_outputs()?;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;

    let left = if common.no_filter {
        "Baseline A"
    } else {
        "CBF (filtered)"
    };
    let text = table::render(&pairs, left, "Baseline (APF only)", base.dt);
    print!("{text}");
    let path = base.out_dir.join(format!("{}_compare.txt", scenario.name));
    std::fs::create_dir_all(&base.out_dir)
        .and_then(|_| std::fs::write(&path, &text))
        .with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn admissibility() -> u8 {
    let reports = dualcbf::oracle::sweep::admissibility_reports();
    for r in &reports {
        println!("{r}");
    }
    if reports.iter().all(|r| r.all_pass()) {
        0
    } else {
        EXIT_VERIFY
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run {
            common,
            fail_on_contact,
        } => run(&common, fail_on_contact),
        Command::Compare { common, seeds } => compare(&common, seeds),
        Command::Verify { verify_tolerance, seed } => {
            anyhow::ensure!(
                verify_tolerance.is_finite() && verify_tolerance > 0.0,
                "--verify-tolerance must be positive"
            );
            Ok(if verify::run(verify_tolerance, seed) {
                0
            } else {
                EXIT_VERIFY
            })
        }
        Command::Admissibility => Ok(admissibility()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
