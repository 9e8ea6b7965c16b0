//! The full evaluation protocol with artifacts on disk.
//!
//! cargo run --release --example pipeline [-- log.csv [out_dir]]

use procsim::event_log::write_log_file;
use procsim::pipeline::{run_pipeline, PipelineConfig};
use procsim::synth;

fn main() -> procsim::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let log_path = match args.next() {
        Some(p) => p.into(),
        None => {
            let p = std::env::temp_dir().join("production_like.csv");
            write_log_file(&synth::production_like(1), &p)?;
            p
        }
    };
    let out = args.next().map(Into::into).unwrap_or_else(|| std::env::temp_dir().join("procsim_pipeline"));
    let config = PipelineConfig { seed: 42, ..PipelineConfig::new(log_path, &out) };
    let outcome = run_pipeline(&config)?;
    println!("selected {:?}, delays {}", outcome.architecture, outcome.use_extraneous_delays);
    for run in &outcome.runs {
        let m = run.metrics;
        println!(
            "run {:>2} seed {:>3}: NGD {:.3} AED {:8.2} CED {:.2} RED {:7.2} CTD {:7.2}",
            run.run, run.config.seed, m.ngd, m.aed, m.ced, m.red, m.ctd
        );
    }
    println!("mean:\n{}", outcome.mean);
    println!("artifacts in {}", out.display());
    Ok(())
}
