use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use overtake_core::harness::{
    compute_tracking_metrics, load_pipeline_config, read_jsonl, run_scenario, sweep_speed_scaler,
    HarnessError, PipelineConfig, RunConfig,
};
use overtake_core::sim::{Mode, Scenario};
use overtake_core::tracker::TrackerTraceRecord;

#[derive(Parser)]
#[command(
    name = "overtake",
    version,
    about = "Closed-track overtaking simulator and metrics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write its report and logs.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the scenario's mode.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        /// Pipeline configuration JSON; missing fields keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Overtake success rate per opponent speed scaler.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        scalers: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Seeds run per scaler; defaults to the scenario seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Tracking metrics from a tracker log and a ground-truth log.
    Metrics {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown mode '{s}' (track_only, trail_and_overtake, tracking_eval)"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.cmd) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cmd: Cmd) -> Result<String, HarnessError> {
    match cmd {
        Cmd::Run {
            scenario,
            out,
            seed,
            mode,
            config,
        } => {
            let pipeline = pipeline(config)?;
            let cfg = RunConfig {
                scenario,
                mode,
                stop: None,
                seed,
                out_dir: Some(out),
                pipeline,
            };
            let report = run_scenario(&cfg)?;
            Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
        }
        Cmd::Sweep {
            scenario,
            scalers,
            out,
            seeds,
            config,
        } => {
            let cfg = pipeline(config)?;
            let sc = Scenario::load(&scenario)?;
            let seeds = if seeds.is_empty() {
                vec![sc.seed]
            } else {
                seeds
            };
            let rep = sweep_speed_scaler(&sc, &scalers, &seeds, &cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| HarnessError::Io {
                path: out.clone(),
                source: e,
            })?;
            let text = serde_json::to_string_pretty(&rep).expect("sweep serializes");
            let path = out.join("sweep.json");
            std::fs::write(&path, format!("{text}\n"))
                .map_err(|e| HarnessError::Io { path, source: e })?;
            Ok(text)
        }
        Cmd::Metrics { trace, truth } => {
            let tr: Vec<TrackerTraceRecord> = read_jsonl(&trace)?;
            let gt = read_jsonl(&truth)?;
            let m = compute_tracking_metrics(&tr, &gt)?;
            Ok(serde_json::to_string_pretty(&m).expect("metrics serialize"))
        }
    }
}

fn pipeline(path: Option<PathBuf>) -> Result<PipelineConfig, HarnessError> {
    path.map_or_else(
        || Ok(PipelineConfig::default()),
        |p| load_pipeline_config(&p),
    )
}
