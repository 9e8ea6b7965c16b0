//! Discover a model from a training log and simulate new cases.

use procsim::discovery::{discover_mas, Architecture, DiscoveryOptions};
use procsim::event_log::temporal_split;
use procsim::simulation::{simulate, SimulationConfig};
use procsim::synth;

fn main() -> procsim::error::Result<()> {
    let split = temporal_split(&synth::loan_like(3), 0.8)?;
    let mas = discover_mas(&split.train, &DiscoveryOptions::default())?;

    for architecture in [Architecture::Orchestrated, Architecture::Autonomous] {
        let config = SimulationConfig {
            architecture,
            use_extraneous_delays: true,
            ..SimulationConfig::new(split.test.num_cases(), split.test.first_start().unwrap(), 42)
        };
        let out = simulate(&mas, &config)?;
        let mean_ct: f64 = out.log.traces().iter().map(|t| t.cycle_time() as f64).sum::<f64>()
            / out.log.num_cases() as f64
            / 3600.0;
        println!(
            "{architecture:?}: {} cases, {} events, mean cycle time {mean_ct:.2} h, warnings {}",
            out.log.num_cases(),
            out.log.num_events(),
            out.report.warnings.len()
        );
    }

    // Open-ended run: arrivals continue until 300 cases have finished.
    let config = SimulationConfig {
        evaluation_mode: false,
        ..SimulationConfig::new(300, mas.last_arrival, 1)
    };
    let out = simulate(&mas, &config)?;
    println!("open run: {} arrivals for {} completed cases", out.report.arrivals, out.report.completed);
    for e in out.log.traces()[0].events.iter() {
        println!("  {} {:<38} {} .. {}", e.case_id, e.activity, e.start, e.end);
    }
    Ok(())
}
