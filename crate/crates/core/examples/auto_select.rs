//! Choose between orchestrated and autonomous handovers by validation CTD.

use procsim::discovery::DiscoveryOptions;
use procsim::pipeline::auto_select_config;
use procsim::synth;

fn main() -> procsim::error::Result<()> {
    for (name, log) in [("team_handover", synth::team_handover(1, 1000)), ("loan_like", synth::loan_like(1))] {
        let selection = auto_select_config(&log, 7, &DiscoveryOptions::default())?;
        println!("{name}:");
        for (arch, delays, score) in &selection.scores {
            println!("  {arch:?}, delays {delays:<5} -> CTD {score:.3} h");
        }
        println!("  selected {:?}, delays {}", selection.architecture, selection.use_extraneous_delays);
    }
    Ok(())
}
