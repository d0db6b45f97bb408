use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::mpsc;

use clap::{Parser, Subcommand};
use log::info;
use odaframe::config::{DaemonConfig, Role};
use odaframe::scenario::{self, Case, Options};
use odaframe::{dryrun, Daemon};

#[derive(Parser)]
#[command(name = "odaframe", version, about = "Operational data analytics daemons and case-study harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a pusher: sample sources, run in-band operators, publish.
    Pusher {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a collector: receive, store, run out-of-band operators.
    Collector {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a case study on a simulated cluster and write CSV files.
    Scenario {
        /// power, jobs, clustering or overhead
        #[arg(long)]
        case: Case,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Simulated duration in seconds (case default when omitted).
        #[arg(long)]
        duration_s: Option<u64>,
        /// Wall-clock seconds of steady-state measurement (overhead only).
        #[arg(long, default_value_t = 30)]
        steady_s: u64,
    },
    /// Print the blocks a plugin configuration would get for a topic list.
    Blocks {
        #[arg(long)]
        topics: PathBuf,
        #[arg(long)]
        template: PathBuf,
    },
}

fn run_daemon(role: Role, path: &PathBuf) -> Result<(), String> {
    let cfg = DaemonConfig::load(path).map_err(|e| e.to_string())?;
    if cfg.role != role {
        return Err(format!("{}: configured role is {}, not {}", path.display(), cfg.role.as_str(), role.as_str()));
    }
    let daemon = Daemon::start(&cfg).map_err(|e| e.to_string())?;
    if let Some(a) = daemon.data_addr() {
        info!("data listener on {a}");
    }
    if let Some(a) = daemon.rest_addr() {
        info!("REST API on http://{a}");
    }
    let (tx, rx) = mpsc::channel();
    ctrlc::set_handler(move || {
        let _ = tx.send(());
    })
    .map_err(|e| format!("cannot install signal handler: {e}"))?;
    let _ = rx.recv();
    info!("shutting down");
    daemon.shutdown().map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Pusher { config } => run_daemon(Role::Pusher, &config),
        Command::Collector { config } => run_daemon(Role::Collector, &config),
        Command::Scenario {
            case,
            seed,
            out,
            duration_s,
            steady_s,
        } => {
            let mut opts = Options::new(seed, out);
            opts.duration_s = duration_s;
            opts.steady_s = steady_s;
            let report = scenario::run(case, &opts).map_err(|e| e.to_string())?;
            for (k, v) in &report.summary {
                println!("{k} = {v}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Blocks { topics, template } => {
            let read = |p: &PathBuf| std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
            let topics = dryrun::parse_topics(&read(&topics)?).map_err(|e| format!("{}: {e}", topics.display()))?;
            print!("{}", dryrun::render(&topics, &read(&template)?)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
