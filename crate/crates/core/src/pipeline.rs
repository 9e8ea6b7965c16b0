//! End-to-end evaluation: split, discover, pick a configuration, simulate
//! repeatedly, evaluate against the held-out cases and write artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discovery::{discover_mas, Architecture, Assignment, DiscoveryOptions, Mas};
use crate::error::{Error, Result};
use crate::event_log::{read_log_file, temporal_split, write_log_file, ColumnMap, EventLog};
use crate::metrics::{ctd, interaction_matrix, write_reports_csv, MetricsReport};
use crate::simulation::{simulate, SimulationConfig, SimulationReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub log_path: PathBuf,
    pub columns: ColumnMap,
    pub train_fraction: f64,
    pub num_runs: usize,
    pub seed: u64,
    /// Skip auto-selection of the architecture.
    pub architecture: Option<Architecture>,
    /// Skip auto-selection of extraneous delays.
    pub delays: Option<bool>,
    pub assignment: Assignment,
    pub ngram: usize,
    pub discovery: DiscoveryOptions,
    pub output_dir: PathBuf,
}

impl PipelineConfig {
    pub fn new(log_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            log_path: log_path.into(),
            columns: ColumnMap::default(),
            train_fraction: 0.8,
            num_runs: 10,
            seed: 42,
            architecture: None,
            delays: None,
            assignment: Assignment::Iterative,
            ngram: 2,
            discovery: DiscoveryOptions::default(),
            output_dir: output_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_runs == 0 {
            return Err(Error::Config("num_runs must be at least 1".into()));
        }
        if self.assignment == Assignment::Direct && self.architecture != Some(Architecture::Autonomous) {
            return Err(Error::Config("direct assignment requires --architecture autonomous".into()));
        }
        Ok(())
    }
}

/// The four candidate configurations in tie-break order.
pub const CANDIDATES: [(Architecture, bool); 4] = [
    (Architecture::Orchestrated, false),
    (Architecture::Orchestrated, true),
    (Architecture::Autonomous, false),
    (Architecture::Autonomous, true),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub architecture: Architecture,
    pub use_extraneous_delays: bool,
    /// Validation CTD per candidate, in `CANDIDATES` order.
    pub scores: Vec<(Architecture, bool, f64)>,
}

/// Picks the configuration whose simulation of the last 20% of `train`
/// (by a nested temporal split) has the smallest cycle-time distance.
pub fn auto_select_config(train: &EventLog, seed: u64, options: &DiscoveryOptions) -> Result<Selection> {
    if train.num_cases() < 5 {
        return Err(Error::Split(format!("auto-selection needs at least 5 training cases, got {}", train.num_cases())));
    }
    let inner = temporal_split(train, 0.8)?;
    if inner.train.num_cases() < 2 || inner.test.is_empty() {
        return Err(Error::Split("inner split left too few cases on one side".into()));
    }
    let mas = discover_mas(&inner.train, options)?;
    let start = inner.test.first_start().expect("non-empty");
    let n = inner.test.num_cases();
    let scores: Vec<(Architecture, bool, f64)> = CANDIDATES
        .par_iter()
        .map(|&(architecture, delays)| {
            let config = SimulationConfig {
                architecture,
                use_extraneous_delays: delays,
                ..SimulationConfig::new(n, start, seed)
            };
            let sim = simulate(&mas, &config)?;
            Ok((architecture, delays, ctd(&inner.test, &sim.log)?))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, s) in scores.iter().enumerate() {
        if s.2 < scores[best].2 {
            best = k;
        }
    }
    Ok(Selection { architecture: scores[best].0, use_extraneous_delays: scores[best].1, scores })
}

/// Deterministic per-run record written next to each simulated log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub run: usize,
    pub config: SimulationConfig,
    pub report: SimulationReport,
    pub metrics: MetricsReport,
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub train_cases: usize,
    pub test_cases: usize,
    pub dropped_cases: usize,
    pub mas: Mas,
    pub selection: Option<Selection>,
    pub architecture: Architecture,
    pub use_extraneous_delays: bool,
    pub runs: Vec<RunMeta>,
    pub simulated: Vec<EventLog>,
    pub mean: MetricsReport,
    pub test: EventLog,
}

#[derive(Serialize)]
struct Timings {
    discover_secs: f64,
    select_secs: f64,
    simulate_and_evaluate_secs: f64,
    total_secs: f64,
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    let log = read_log_file(&config.log_path, &config.columns).map_err(|e| e.in_stage("read"))?;
    run_pipeline_on_log(&log, config)
}

/// As [`run_pipeline`] but on an already loaded log; `config.log_path` is ignored.
pub fn run_pipeline_on_log(log: &EventLog, config: &PipelineConfig) -> Result<PipelineOutcome> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let total = Instant::now();
    let out = &config.output_dir;
    fs::create_dir_all(out.join("sim")).map_err(|e| Error::from(e).in_stage("output"))?;

    let split = temporal_split(log, config.train_fraction).map_err(|e| e.in_stage("split"))?;
    if split.train.num_cases() < 2 || split.test.is_empty() {
        return Err(Error::Split(format!(
            "split left {} training and {} test cases",
            split.train.num_cases(),
            split.test.num_cases()
        ))
        .in_stage("split"));
    }
    write_log_file(&split.train, out.join("train.csv")).map_err(|e| e.in_stage("split"))?;
    write_log_file(&split.test, out.join("test.csv")).map_err(|e| e.in_stage("split"))?;

    let t = Instant::now();
    let mut mas = discover_mas(&split.train, &config.discovery).map_err(|e| e.in_stage("discover"))?;
    let discover_secs = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let selection = if config.architecture.is_none() || config.delays.is_none() {
        Some(auto_select_config(&split.train, config.seed, &config.discovery).map_err(|e| e.in_stage("select"))?)
    } else {
        None
    };
    let select_secs = t.elapsed().as_secs_f64();
    let architecture = config.architecture.or(selection.as_ref().map(|s| s.architecture)).expect("set");
    let use_delays = config.delays.or(selection.as_ref().map(|s| s.use_extraneous_delays)).expect("set");
    mas.architecture = architecture;
    mas.assignment = config.assignment;
    mas.save(out.join("model.json")).map_err(|e| e.in_stage("discover"))?;
    if let Some(s) = &selection {
        write_json(&out.join("selection.json"), s).map_err(|e| e.in_stage("select"))?;
    }

    let t = Instant::now();
    let start = split.test.first_start().expect("non-empty");
    let n = split.test.num_cases();
    let results: Vec<(EventLog, RunMeta)> = (0..config.num_runs)
        .into_par_iter()
        .map(|run| -> Result<(EventLog, RunMeta)> {
            let sim_config = SimulationConfig {
                architecture,
                assignment: config.assignment,
                use_extraneous_delays: use_delays,
                ..SimulationConfig::new(n, start, config.seed.wrapping_add(run as u64))
            };
            let output = simulate(&mas, &sim_config).map_err(|e| e.in_stage("simulate"))?;
            let metrics = MetricsReport::evaluate_with(&split.test, &output.log, config.ngram)
                .map_err(|e| e.in_stage("evaluate"))?;
            Ok((output.log, RunMeta { run, config: sim_config, report: output.report, metrics }))
        })
        .collect::<Result<_>>()?;
    let simulate_secs = t.elapsed().as_secs_f64();

    let (simulated, runs): (Vec<EventLog>, Vec<RunMeta>) = results.into_iter().unzip();
    let reports: Vec<MetricsReport> = runs.iter().map(|r| r.metrics).collect();
    let mean = MetricsReport::mean(&reports).expect("num_runs >= 1");

    let write = || -> Result<()> {
        for (sim, meta) in simulated.iter().zip(&runs) {
            write_log_file(sim, out.join("sim").join(format!("run_{}.csv", meta.run)))?;
            write_json(&out.join("sim").join(format!("run_{}.meta.json", meta.run)), meta)?;
        }
        let mut rows: Vec<(String, String, MetricsReport)> =
            runs.iter().map(|r| ("test".to_string(), format!("run_{}", r.run), r.metrics)).collect();
        rows.push(("test".into(), "mean".into(), mean));
        write_reports_csv(fs::File::create(out.join("metrics.csv"))?, &rows)?;
        fs::write(out.join("metrics.txt"), format!("{mean}\n"))?;
        interaction_matrix(&split.test).write_csv(fs::File::create(out.join("interactions_test.csv"))?)?;
        interaction_matrix(&simulated[0]).write_csv(fs::File::create(out.join("interactions_run_0.csv"))?)?;
        let timings = Timings {
            discover_secs,
            select_secs,
            simulate_and_evaluate_secs: simulate_secs,
            total_secs: total.elapsed().as_secs_f64(),
        };
        write_json(&out.join("timings.json"), &timings)
    };
    write().map_err(|e| e.in_stage("report"))?;

    Ok(PipelineOutcome {
        train_cases: split.train.num_cases(),
        test_cases: n,
        dropped_cases: split.dropped.len(),
        mas,
        selection,
        architecture,
        use_extraneous_delays: use_delays,
        runs,
        simulated,
        mean,
        test: split.test,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
