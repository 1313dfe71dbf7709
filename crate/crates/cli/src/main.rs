use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use tasklearn::transcript::{self, ReplayReport, Transcript};
use tasklearn_cli::{run_script, RunConfig, Script};
use tasklearn_server::{default_factory, SessionHost};

#[derive(Parser)]
#[command(name = "tasklearn", version, about = "Teach a kitchen agent new tasks from scripted dialogs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Mock,
    Remote,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run a teaching script against an in-process session.
    Teach {
        #[arg(long)]
        script: PathBuf,
        #[arg(long, value_enum, default_value = "mock")]
        backend: Backend,
        #[arg(long, value_enum, default_value = "on")]
        confirmations: Switch,
        /// Kitchen layout file; the bundled kitchen by default.
        #[arg(long)]
        layout: Option<PathBuf>,
        /// Where to write the metrics JSON (also printed to stdout).
        #[arg(long)]
        metrics_out: Option<PathBuf>,
        /// Where to write the JSON-lines transcript.
        #[arg(long)]
        transcript_out: Option<PathBuf>,
    },
    /// Re-run a transcript offline and compare it with the recording.
    Replay {
        #[arg(long)]
        transcript: PathBuf,
    },
    /// Serve sessions over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: std::net::IpAddr,
        /// Directory for transcripts; sessions are kept in memory when absent.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &PathBuf) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &PathBuf, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Teach {
            script,
            backend,
            confirmations,
            layout,
            metrics_out,
            transcript_out,
        } => {
            let parsed = Script::parse(&read(&script)?).map_err(|e| format!("{}: {e}", script.display()))?;
            let label = match backend {
                Backend::Mock => "mock",
                Backend::Remote => "remote",
            };
            let mut config = RunConfig::new(default_factory()(label)?);
            config.confirmations = matches!(confirmations, Switch::On);
            config.layout = layout.as_ref().map(read).transpose()?;
            let outcome = run_script(&parsed, &config).map_err(|e| e.to_string())?;
            let metrics = serde_json::to_string_pretty(outcome.session.metrics()).expect("metrics serialize");
            println!("{metrics}");
            if let Some(path) = &metrics_out {
                write(path, &(metrics + "\n"))?;
            }
            if let Some(path) = &transcript_out {
                write(path, &Transcript::of(&outcome.session).to_jsonl())?;
            }
            Ok(match outcome.failure {
                Some(f) => {
                    eprintln!("{}: {f}", script.display());
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            })
        }
        Command::Replay { transcript: path } => {
            let t = Transcript::from_jsonl(&read(&path)?).map_err(|e| format!("{}: {e}", path.display()))?;
            let report = transcript::replay(&t).map_err(|e| e.to_string())?;
            println!("{report}");
            Ok(if report == ReplayReport::Equal {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Serve { port, bind, data_dir } => {
            let host = match data_dir {
                Some(dir) => SessionHost::open(dir, default_factory()).map_err(|e| e.to_string())?,
                None => SessionHost::in_memory(default_factory()),
            };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            runtime
                .block_on(tasklearn_server::serve(Arc::new(host), SocketAddr::new(bind, port)))
                .map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
