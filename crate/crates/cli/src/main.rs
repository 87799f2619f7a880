mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use kuhn_mbbr::best_response::exploitability;
use kuhn_mbbr::harness::{
    run_match, run_sweep, run_tournament, standin_groupings, zoo_pairs, AgentSpec, DealSchedule,
    MatchSpec, SweepSpec, TournamentSpec,
};
use kuhn_mbbr::strategy::{nash_profile, parse_profile, table_profile, NashPoint};

use config::RunConfig;

/// Largest best-response gain accepted as an equilibrium.
const NASH_TOLERANCE: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "mbbr",
    version,
    about = "Bayesian best-response agents for three-player Kuhn poker"
)]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    /// JSON file with default values for the shared flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report per-position exploitability of the equilibrium agents
    VerifyNash {
        /// lower, mid or upper; all three when omitted
        point: Option<String>,
        #[arg(long, conflicts_with = "point")]
        all: bool,
        /// Verify a strategy file instead
        #[arg(long, conflicts_with_all = ["point", "all"])]
        profile: Option<PathBuf>,
        /// Use the printed tables without equilibrium corrections
        #[arg(long)]
        verbatim: bool,
    },
    /// Play one match; `--out` receives the hand log
    Match {
        /// Three agents in starting seat order
        #[arg(long, value_delimiter = ',', required = true)]
        agents: Vec<String>,
        /// Deal schedule file, one deal per line
        #[arg(long)]
        deals: Option<PathBuf>,
    },
    /// Duplicate-set tournament over one or more groupings
    Tournament {
        /// Agent pool; every 3-agent combination is played. Without it the
        /// stand-in field is used.
        #[arg(long, value_delimiter = ',')]
        agents: Vec<String>,
        /// JSON summary with rows, ranking and per-set winrates
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// MBBR winrate as a function of one parameter
    Sweep {
        /// epsilon, H, eta or k
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Opponent pairs written `a+b`; defaults to the zoo pairs
        #[arg(long, value_delimiter = ',')]
        opponents: Vec<String>,
    },
    /// Write a seeded deal schedule
    ExportDeals,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let run = match &cli.config {
        Some(path) => cli.run.or(RunConfig::load(path)?),
        None => cli.run,
    };
    if let Some(n) = run.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::VerifyNash {
            point,
            all: _,
            profile,
            verbatim,
        } => verify_nash(point, profile, verbatim),
        Command::Match { agents, deals } => {
            play_match(&run, &agents, deals).map(|_| ExitCode::SUCCESS)
        }
        Command::Tournament { agents, summary } => {
            tournament(&run, &agents, summary).map(|_| ExitCode::SUCCESS)
        }
        Command::Sweep {
            param,
            values,
            opponents,
        } => sweep(&run, &param, values, &opponents).map(|_| ExitCode::SUCCESS),
        Command::ExportDeals => {
            let seed = seed(&run);
            let text = DealSchedule::generate(seed, run.hands()).to_text();
            report::emit(run.out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn seed(run: &RunConfig) -> u64 {
    run.seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn verify_nash(
    point: Option<String>,
    profile: Option<PathBuf>,
    verbatim: bool,
) -> Result<ExitCode> {
    let profiles = if let Some(path) = profile {
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        vec![(path.display().to_string(), parse_profile(&text)?)]
    } else {
        let points = match point {
            Some(p) => vec![p.parse::<NashPoint>()?],
            None => NashPoint::ALL.to_vec(),
        };
        points
            .into_iter()
            .map(|p| {
                let profile = if verbatim {
                    table_profile(p)
                } else {
                    nash_profile(p)
                };
                (format!("{} ({p})", p.agent_name()), profile)
            })
            .collect()
    };
    let mut ok = true;
    for (name, profile) in &profiles {
        let gains = exploitability(profile);
        let pass = gains.iter().all(|&g| g <= NASH_TOLERANCE);
        ok &= pass;
        println!(
            "{name}: P1 {:.3e} P2 {:.3e} P3 {:.3e} {}",
            gains[0],
            gains[1],
            gains[2],
            if pass { "ok" } else { "NOT AN EQUILIBRIUM" }
        );
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn play_match(run: &RunConfig, names: &[String], deals: Option<PathBuf>) -> Result<()> {
    let mbbr = run.mbbr()?;
    let agents = config::triple(config::agents(names, &mbbr)?)?;
    let seed = seed(run);
    let schedule = match deals {
        Some(path) => DealSchedule::parse(
            &std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?,
        )?,
        None => DealSchedule::generate(seed, run.hands()),
    };
    let hands = run.hands.unwrap_or(schedule.len());
    let spec = MatchSpec {
        rotate_seats: run.rotate_seats(),
        ..MatchSpec::new(agents, hands, seed)
    };
    let result = run_match(&spec, &schedule)?;
    for slot in 0..3 {
        println!(
            "{} chips {} winrate {:.4} mchips/hand",
            result.agents[slot],
            result.chips[slot],
            result.winrate_mchips(slot)
        );
    }
    if let Some(path) = &run.out {
        report::write_hand_log(path, &result)?;
    }
    Ok(())
}

fn groupings(pool: Vec<AgentSpec>) -> Result<Vec<[AgentSpec; 3]>> {
    if pool.len() < 3 {
        bail!("a tournament needs at least 3 agents, got {}", pool.len());
    }
    let mut out = Vec::new();
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            for k in j + 1..pool.len() {
                out.push([pool[i].clone(), pool[j].clone(), pool[k].clone()]);
            }
        }
    }
    Ok(out)
}

fn tournament(run: &RunConfig, names: &[String], summary: Option<PathBuf>) -> Result<()> {
    let mbbr = run.mbbr()?;
    let groupings = if names.is_empty() {
        standin_groupings(&mbbr)
    } else {
        groupings(config::agents(names, &mbbr)?)?
    };
    let seed = seed(run);
    let result = run_tournament(&TournamentSpec {
        groupings,
        sets: run.matches(),
        hands: run.hands(),
        seed,
        rotate_seats: run.rotate_seats(),
    })?;
    print!("{}", report::ranking_table(&result));
    if let Some(path) = &run.out {
        report::write_tournament_csv(path, &result)?;
    }
    if let Some(path) = &summary {
        report::write_json(path, &result)?;
    }
    Ok(())
}

fn sweep(run: &RunConfig, param: &str, values: Vec<f64>, opponents: &[String]) -> Result<()> {
    if values.is_empty() {
        bail!("no sweep values given");
    }
    let mbbr = run.mbbr()?;
    let opponents = if opponents.is_empty() {
        zoo_pairs()
    } else {
        opponents
            .iter()
            .map(|pair| {
                let (a, b) = pair
                    .split_once('+')
                    .with_context(|| format!("opponent pair `{pair}` is not written `a+b`"))?;
                Ok([config::agent(a, &mbbr)?, config::agent(b, &mbbr)?])
            })
            .collect::<Result<Vec<_>>>()?
    };
    let seed = seed(run);
    let rows = run_sweep(&SweepSpec {
        param: param.parse()?,
        values,
        base: mbbr,
        opponents,
        sets: run.matches(),
        hands: run.hands(),
        seed,
        rotate_seats: run.rotate_seats(),
    })?;
    let csv = report::sweep_csv(&rows)?;
    print!("{csv}");
    if let Some(path) = &run.out {
        report::emit(Some(path), &csv)?;
    }
    Ok(())
}
