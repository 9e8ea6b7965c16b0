//! One line per acceptance criterion. Hard criteria fail the run; the anchor
//! comparison only warns.
//!
//! The public loan and production logs are not shipped. Set
//! `PROCSIM_LOAN_LOG` / `PROCSIM_PRODUCTION_LOG` to CSV paths to use them;
//! otherwise synthetic logs of the same shape stand in.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use procsim::distributions::{fit_distribution, Family};
use procsim::event_log::{read_log_file, ColumnMap, EventLog};
use procsim::metrics::MetricsReport;
use procsim::pipeline::{run_pipeline_on_log, PipelineConfig, PipelineOutcome};
use procsim::simulation::{simulate, SimulationConfig};
use procsim::synth::{self, single_agent_model, EPOCH_MONDAY};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp, Normal, Uniform};

const WEEK_HOURS: f64 = 168.0;
const ANCHOR_NGD: f64 = 0.25;
const ANCHOR_CTD_HOURS: f64 = 1.49;

enum Verdict {
    Pass(String),
    Fail(String),
    Warn(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn log_or_standin(var: &str, standin: impl FnOnce() -> EventLog) -> (EventLog, String) {
    match std::env::var(var) {
        Ok(path) => (read_log_file(&path, &ColumnMap::default()).expect("log from environment"), path),
        Err(_) => (standin(), "synthetic stand-in".into()),
    }
}

fn artifacts(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "timings.json" {
                out.insert(path.strip_prefix(dir).unwrap().display().to_string(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn self_distance() -> Verdict {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (name, log) in synth::fixture_suite(1) {
        let t = Instant::now();
        let r = MetricsReport::evaluate(&log, &log).unwrap();
        let secs = t.elapsed().as_secs_f64();
        worst = worst.max(secs);
        if r.values() != [0.0; 5] || secs >= 1.0 {
            failures.push(format!("{name}: {:?} in {secs:.3}s", r.values()));
        }
    }
    verdict(failures.is_empty(), format!("9 fixtures, all metrics 0, slowest {worst:.3}s {}", failures.join("; ")))
}

fn probability_oracles() -> Verdict {
    let mut checked = 0;
    for (name, log) in [
        ("credit_handover", synth::credit_handover()),
        ("credit_local", synth::credit_local()),
        ("backoff", synth::backoff_log()),
    ] {
        let run = || -> Result<usize, String> {
            Ok(common::check_transition_tables(&log)? + common::check_backoff(&log, 3)? + common::check_handover(&log)?)
        };
        match run() {
            Ok(n) => checked += n,
            Err(e) => return Verdict::Fail(format!("{name}: {e}")),
        }
    }
    let log = synth::credit_handover();
    let patrick = common::handover_probability(&log, "Angela", "Patrick");
    let maria = common::handover_probability(&log, "Angela", "Maria");
    verdict(
        patrick == 1.0 && maria == 0.0,
        format!("{checked} rows/lookups equal as rationals; P(Patrick|Angela)={patrick} P(Maria|Angela)={maria}"),
    )
}

fn wasserstein_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut sample = || -> Vec<f64> { (0..rng.random_range(1..=20)).map(|_| rng.random_range(-100.0..100.0)).collect() };
        let (a, b) = (sample(), sample());
        let got = procsim::distributions::wasserstein_1d(&a, &b).unwrap();
        worst = worst.max((got - common::brute_w1(&a, &b)).abs());
    }
    verdict(worst <= 1e-9, format!("100 pairs, max abs error {worst:.2e} (tolerance 1e-9)"))
}

fn determinism(a: &Path, b: &Path) -> Verdict {
    let (fa, fb) = (artifacts(a), artifacts(b));
    let differing: Vec<&String> = fa.keys().filter(|k| fb.get(*k) != fa.get(*k)).collect();
    verdict(
        differing.is_empty() && fa.len() == fb.len(),
        format!("{} artifacts compared byte for byte, {} differ {:?}", fa.len(), differing.len(), differing),
    )
}

fn contention() -> Verdict {
    let out = simulate(&single_agent_model(3600, 0), &SimulationConfig::new(2, EPOCH_MONDAY, 1)).unwrap();
    let mut cycles: Vec<i64> = out.cycle_times().into_iter().map(|(_, c)| c).collect();
    cycles.sort();
    verdict(cycles == [3600, 7200], format!("cycle times {cycles:?} s"))
}

fn distribution_recovery() -> Verdict {
    const N: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let cases: Vec<(Family, f64, Vec<f64>)> = vec![
        (Family::Fixed, 300.0, vec![300.0; N]),
        (Family::Normal, 600.0, Normal::new(600.0, 120.0).unwrap().sample_iter(&mut rng).take(N).collect()),
        (Family::Exponential, 300.0, Exp::new(1.0 / 300.0).unwrap().sample_iter(&mut rng).take(N).collect()),
        (Family::Uniform, 300.0, Uniform::new(100.0, 500.0).unwrap().sample_iter(&mut rng).take(N).collect()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (family, mean, sample) in cases {
        let fit = fit_distribution(&sample).unwrap();
        let rel = (fit.mean() - mean).abs() / mean;
        ok &= fit.family() == family && rel <= 0.05;
        parts.push(format!("{family}->{} mean err {:.2}%", fit.family(), rel * 100.0));
    }
    verdict(ok, parts.join(", "))
}

fn simulated_validity(outcome: &PipelineOutcome, source: &str) -> Verdict {
    let mut problems = Vec::new();
    for (run, sim) in outcome.runs.iter().zip(&outcome.simulated) {
        if sim.num_cases() != outcome.test_cases {
            problems.push(format!("run {} has {} cases", run.run, sim.num_cases()));
        }
        if !run.report.truncated.is_empty() {
            problems.push(format!("run {} truncated {} cases", run.run, run.report.truncated.len()));
        }
        if let Err(e) = common::check_simulated_log(&outcome.mas, sim, outcome.architecture, &[]) {
            problems.push(format!("run {}: {e}", run.run));
        }
    }
    verdict(
        problems.is_empty() && outcome.test_cases == 200,
        format!(
            "{source}: {} runs x {} cases, capability/overlap/order/replay all hold {}",
            outcome.runs.len(),
            outcome.test_cases,
            problems.join("; ")
        ),
    )
}

fn anchors(outcome: &PipelineOutcome) -> Verdict {
    let (ngd, ctd) = (outcome.mean.ngd, outcome.mean.ctd);
    let ctd_ok = (ANCHOR_CTD_HOURS / 10.0..=10.0 * ANCHOR_CTD_HOURS).contains(&ctd);
    let detail = format!(
        "mean NGD {ngd:.4} (anchor <= {ANCHOR_NGD}, diff {:+.4}), mean CTD {ctd:.3} h (anchor 1.49 h, ratio {:.2})",
        ngd - ANCHOR_NGD,
        ctd / ANCHOR_CTD_HOURS
    );
    if ngd <= ANCHOR_NGD && ctd_ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Warn(detail)
    }
}

fn runtime(dir: &Path) -> Verdict {
    let (log, source) = log_or_standin("PROCSIM_PRODUCTION_LOG", || synth::production_like(1));
    let t = Instant::now();
    let outcome = run_pipeline_on_log(&log, &PipelineConfig::new("", dir));
    let secs = t.elapsed().as_secs_f64();
    match outcome {
        Ok(o) => verdict(
            secs < 120.0,
            format!(
                "{source}: {} traces / {} events, {} runs in {secs:.2}s (limit 120s)",
                log.num_cases(),
                log.num_events(),
                o.runs.len()
            ),
        ),
        Err(e) => Verdict::Fail(format!("{source}: {e}")),
    }
}

fn week_shift(sim: &EventLog) -> Verdict {
    let r = MetricsReport::evaluate(sim, &sim.shifted(7 * 24 * 3600)).unwrap();
    verdict(
        (r.aed - WEEK_HOURS).abs() <= 0.5 && r.ced.abs() <= 1e-9 && r.red.abs() <= 1e-9,
        format!("AED {:.6} h, CED {:.1e}, RED {:.1e}", r.aed, r.ced, r.red),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let (loan, loan_source) = log_or_standin("PROCSIM_LOAN_LOG", || synth::loan_like(1));
    let config = |dir: &str| PipelineConfig::new("", tmp.path().join(dir));
    let first = run_pipeline_on_log(&loan, &config("loan_a")).expect("loan pipeline");
    run_pipeline_on_log(&loan, &config("loan_b")).expect("loan pipeline");

    let results: Vec<(u32, &str, Verdict)> = vec![
        (1, "self-distance", self_distance()),
        (2, "probability oracles", probability_oracles()),
        (3, "wasserstein oracle", wasserstein_oracle()),
        (4, "determinism", determinism(&tmp.path().join("loan_a"), &tmp.path().join("loan_b"))),
        (5, "contention", contention()),
        (6, "distribution recovery", distribution_recovery()),
        (7, "simulated-log validity", simulated_validity(&first, &loan_source)),
        (8, "anchor check (report only)", anchors(&first)),
        (9, "runtime", runtime(&tmp.path().join("production"))),
        (10, "week shift", week_shift(&first.simulated[0])),
    ];

    let mut failed = 0;
    for (n, name, v) in &results {
        let (tag, detail) = match v {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Warn(d) => ("WARN", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n:>2} {tag} {name}: {}", detail.trim_end());
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
