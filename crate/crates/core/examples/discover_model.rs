//! Discover agents, schedules and behaviour from a small credit log.

use procsim::discovery::{discover_mas, DiscoveryOptions, Next, TransitionMode};
use procsim::synth;

fn main() -> procsim::error::Result<()> {
    let log = synth::credit_handover();
    let mas = discover_mas(&log, &DiscoveryOptions::default())?;

    println!("agents:");
    for a in &mas.agents {
        println!(
            "  {:<28} type {} working slots {:>3}  activities {:?}",
            a.name,
            a.agent_type,
            a.schedule.working_slot_count(),
            a.capabilities.alloc
        );
    }

    let roster = mas.roster();
    let angela = roster.resource("Angela").unwrap();
    println!("handovers from Angela:");
    for (to, p) in mas.handovers.row(angela).iter().enumerate() {
        if *p > 0.0 || mas.agents[to].name == "Maria" {
            println!("  P({} | Angela) = {p}", mas.agents[to].name);
        }
    }

    let received = mas.activity_id(synth::RECEIVED).unwrap();
    let row = mas.global_transitions.lookup(&[received], None)?;
    assert_eq!(mas.global_transitions.mode(), TransitionMode::Global);
    println!("after '{}':", synth::RECEIVED);
    for (next, p) in row.probabilities() {
        let label = match next {
            Next::Activity(a) => mas.activities[a].as_str(),
            Next::End => "END",
        };
        println!("  {label:<24} {p:.3}");
    }

    let path = std::env::temp_dir().join("credit_model.json");
    mas.save(&path)?;
    println!("model written to {}", path.display());
    Ok(())
}
