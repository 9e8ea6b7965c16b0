//! Who hands work to whom, in a log and in its simulation.

use procsim::discovery::{discover_mas, Architecture, DiscoveryOptions};
use procsim::metrics::{interaction_matrix, InteractionMatrix};
use procsim::simulation::{simulate, SimulationConfig};
use procsim::synth;

fn print(title: &str, m: &InteractionMatrix) {
    println!("{title} ({} handovers)", m.total());
    print!("{:>15}", "");
    for l in &m.labels {
        print!("{:>15}", l);
    }
    println!();
    for (l, row) in m.labels.iter().zip(&m.counts) {
        print!("{l:>15}");
        for c in row {
            print!("{c:>15}");
        }
        println!();
    }
    println!();
}

fn main() -> procsim::error::Result<()> {
    let log = synth::team_handover(2, 600);
    let mas = discover_mas(&log, &DiscoveryOptions::default())?;
    print("training log", &interaction_matrix(&log));
    for architecture in [Architecture::Orchestrated, Architecture::Autonomous] {
        let config = SimulationConfig { architecture, ..SimulationConfig::new(600, mas.last_arrival, 4) };
        let sim = simulate(&mas, &config)?.log;
        print(&format!("{architecture:?} simulation"), &interaction_matrix(&sim));
    }
    Ok(())
}
