use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use procsim::discovery::{discover_mas, Architecture, Assignment, DiscoveryOptions, Mas};
use procsim::error::{Error, Result};
use procsim::event_log::{read_log_file, write_log_file, ColumnMap};
use procsim::metrics::{interaction_matrix, write_reports_csv, MetricsReport};
use procsim::pipeline::{run_pipeline, PipelineConfig};
use procsim::simulation::{simulate, SimulationConfig, SimulationReport};
use procsim::time::Timestamp;

#[derive(Parser)]
#[command(name = "procsim", version, about = "Discover, simulate and evaluate agent-based process models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discover a model from an event log.
    Discover {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        columns: Columns,
        #[arg(long, value_enum)]
        architecture: Option<Arch>,
        #[arg(long, value_enum)]
        assignment: Option<Assign>,
        /// Share local behaviour per agent type.
        #[arg(long)]
        type_level: bool,
    },
    /// Simulate a discovered model.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        architecture: Option<Arch>,
        #[arg(long, value_enum)]
        assignment: Option<Assign>,
        #[arg(long, value_enum, default_value_t = OnOff::Off)]
        delays: OnOff,
        /// Exactly n arrivals instead of running until n completions.
        #[arg(long)]
        evaluation: bool,
        /// First arrival; defaults to the model's last training arrival.
        #[arg(long)]
        start: Option<String>,
    },
    /// Compare a simulated log with a reference log.
    Evaluate {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        sim: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        ngram: usize,
        /// Also write the simulated log's interaction matrix here.
        #[arg(long)]
        interactions: Option<PathBuf>,
        #[command(flatten)]
        columns: Columns,
    },
    /// Split, discover, select, simulate and evaluate in one go.
    Pipeline {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[arg(long, value_enum)]
        architecture: Option<Arch>,
        #[arg(long, value_enum)]
        assignment: Option<Assign>,
        #[arg(long, value_enum)]
        delays: Option<OnOff>,
        #[arg(long, default_value_t = 2)]
        ngram: usize,
        #[command(flatten)]
        columns: Columns,
    },
}

#[derive(Args)]
struct Columns {
    #[arg(long, default_value = "case_id")]
    case_col: String,
    #[arg(long, default_value = "activity")]
    activity_col: String,
    #[arg(long, default_value = "start_time")]
    start_col: String,
    #[arg(long, default_value = "end_time")]
    end_col: String,
    #[arg(long, default_value = "resource")]
    resource_col: String,
}

impl From<Columns> for ColumnMap {
    fn from(c: Columns) -> Self {
        ColumnMap {
            case: c.case_col,
            activity: c.activity_col,
            start: c.start_col,
            end: c.end_col,
            resource: c.resource_col,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Arch {
    Orchestrated,
    Autonomous,
}

impl From<Arch> for Architecture {
    fn from(a: Arch) -> Self {
        match a {
            Arch::Orchestrated => Architecture::Orchestrated,
            Arch::Autonomous => Architecture::Autonomous,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Assign {
    Iterative,
    Direct,
}

impl From<Assign> for Assignment {
    fn from(a: Assign) -> Self {
        match a {
            Assign::Iterative => Assignment::Iterative,
            Assign::Direct => Assignment::Direct,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Serialize)]
struct SimulateMeta<'a> {
    config: &'a SimulationConfig,
    report: &'a SimulationReport,
    wall_clock_secs: f64,
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Discover { log, out, columns, architecture, assignment, type_level } => {
            let log = read_log_file(&log, &columns.into()).map_err(|e| e.in_stage("read"))?;
            let options = DiscoveryOptions {
                architecture: architecture.map_or(Architecture::Orchestrated, Into::into),
                assignment: assignment.map_or(Assignment::Iterative, Into::into),
                type_level_behavior: type_level,
                ..DiscoveryOptions::default()
            };
            let mas = discover_mas(&log, &options).map_err(|e| e.in_stage("discover"))?;
            mas.save(&out).map_err(|e| e.in_stage("write"))?;
            println!(
                "discovered {} agents over {} activities from {} cases",
                mas.agents.len(),
                mas.activities.len(),
                log.num_cases()
            );
        }
        Command::Simulate { model, n, seed, out, architecture, assignment, delays, evaluation, start } => {
            let mas = Mas::load(&model).map_err(|e| e.in_stage("load"))?;
            let mut config = SimulationConfig::for_model(&mas, n, seed);
            if let Some(a) = architecture {
                config.architecture = a.into();
            }
            if let Some(a) = assignment {
                config.assignment = a.into();
            }
            config.use_extraneous_delays = delays == OnOff::On;
            config.evaluation_mode = evaluation;
            if let Some(s) = start {
                config.start_time = Timestamp::parse(&s)
                    .ok_or_else(|| Error::Config(format!("unparseable start '{s}'")).in_stage("config"))?;
            }
            let clock = Instant::now();
            let output = simulate(&mas, &config).map_err(|e| e.in_stage("simulate"))?;
            let wall_clock_secs = clock.elapsed().as_secs_f64();
            write_log_file(&output.log, &out).map_err(|e| e.in_stage("write"))?;
            let meta = SimulateMeta { config: &config, report: &output.report, wall_clock_secs };
            let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::from(e).in_stage("write"))?;
            std::fs::write(sidecar(&out), text + "\n").map_err(|e| Error::from(e).in_stage("write"))?;
            println!("simulated {} cases, {} events", output.report.completed, output.report.events);
        }
        Command::Evaluate { real, sim, out, ngram, interactions, columns } => {
            let columns: ColumnMap = columns.into();
            let real_log = read_log_file(&real, &columns).map_err(|e| e.in_stage("read"))?;
            let sim_log = read_log_file(&sim, &ColumnMap::default()).map_err(|e| e.in_stage("read"))?;
            let report = MetricsReport::evaluate_with(&real_log, &sim_log, ngram).map_err(|e| e.in_stage("evaluate"))?;
            let file = std::fs::File::create(&out).map_err(|e| Error::from(e).in_stage("write"))?;
            let row = (real.display().to_string(), sim.display().to_string(), report);
            write_reports_csv(file, &[row]).map_err(|e| e.in_stage("write"))?;
            if let Some(path) = interactions {
                let file = std::fs::File::create(path).map_err(|e| Error::from(e).in_stage("write"))?;
                interaction_matrix(&sim_log).write_csv(file).map_err(|e| e.in_stage("write"))?;
            }
            println!("{report}");
        }
        Command::Pipeline {
            log,
            runs,
            seed,
            out,
            train_fraction,
            architecture,
            assignment,
            delays,
            ngram,
            columns,
        } => {
            let config = PipelineConfig {
                columns: columns.into(),
                train_fraction,
                num_runs: runs,
                seed,
                architecture: architecture.map(Into::into),
                delays: delays.map(|d| d == OnOff::On),
                assignment: assignment.map_or(Assignment::Iterative, Into::into),
                ngram,
                ..PipelineConfig::new(log, out)
            };
            let outcome = run_pipeline(&config)?;
            println!(
                "train {} / test {} cases ({} straddling dropped); {:?}, delays {}",
                outcome.train_cases,
                outcome.test_cases,
                outcome.dropped_cases,
                outcome.architecture,
                if outcome.use_extraneous_delays { "on" } else { "off" }
            );
            println!("mean over {} runs:\n{}", outcome.runs.len(), outcome.mean);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
