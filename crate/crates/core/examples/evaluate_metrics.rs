//! Log distances between a held-out log and a simulation.

use procsim::discovery::{discover_mas, DiscoveryOptions};
use procsim::event_log::temporal_split;
use procsim::metrics::{event_distribution_distance, EventDistribution, MetricsReport};
use procsim::simulation::{simulate, SimulationConfig};
use procsim::synth;
use procsim::time::WEEK;

fn main() -> procsim::error::Result<()> {
    let split = temporal_split(&synth::production_like(5), 0.8)?;
    let mas = discover_mas(&split.train, &DiscoveryOptions::default())?;
    let config = SimulationConfig::new(split.test.num_cases(), split.test.first_start().unwrap(), 9);
    let sim = simulate(&mas, &config)?.log;

    println!("test vs simulation:\n{}\n", MetricsReport::evaluate(&split.test, &sim)?);
    println!("test vs itself:\n{}\n", MetricsReport::evaluate(&split.test, &split.test)?);

    let shifted = sim.shifted(WEEK);
    for kind in [EventDistribution::Absolute, EventDistribution::Circadian, EventDistribution::Relative] {
        let d = event_distribution_distance(&sim, &shifted, kind)?;
        println!("simulation vs itself one week later, {kind:?}: {d:.3} h");
    }
    Ok(())
}
