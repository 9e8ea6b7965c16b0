//! Fit duration distributions and see which family wins.

use procsim::distributions::{fit_distribution, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> procsim::error::Result<()> {
    let truths = [
        Distribution::Fixed { value: 600.0 },
        Distribution::Exponential { mean: 900.0 },
        Distribution::Normal { mean: 3600.0, std_dev: 300.0 },
        Distribution::Uniform { low: 60.0, high: 240.0 },
        Distribution::Gamma { shape: 3.0, scale: 400.0 },
        Distribution::LogNormal { mu: 6.0, sigma: 0.5 },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    println!("{:<12} {:<12} {:>12} {:>12} {:>10}", "truth", "fitted", "true mean", "fit mean", "W1");
    for truth in truths {
        let samples: Vec<f64> = (0..10_000).map(|_| truth.sample(&mut rng)).collect();
        let fit = fit_distribution(&samples)?;
        println!(
            "{:<12} {:<12} {:>12.1} {:>12.1} {:>10.3}",
            truth.family().to_string(),
            fit.family().to_string(),
            truth.mean(),
            fit.mean(),
            fit.fit_error
        );
    }
    Ok(())
}
