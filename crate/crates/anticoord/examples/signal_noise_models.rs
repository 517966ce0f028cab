//! The two readings of "reads some other false signal": drawn from all K
//! values (so the error may coincide with the truth) or from the K-1 others.
//! The full-support model has effective error rate p * (K-1)/K.
//!
//!     cargo run --release --example signal_noise_models

use anticoord::game::{perturb_signal, GameShape, NoiseParams, SignalNoiseModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let shape = GameShape::new(8, 1, 8)?;
    let noise = NoiseParams::new(0.0, 0.2)?;
    let draws = 200_000;
    let truth = 3;

    println!("K = 8, p_signal = 0.2, {draws} perturbations of the true value {truth}");
    println!();
    for model in [SignalNoiseModel::FullSupport, SignalNoiseModel::ExcludeTrue] {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut histogram = [0usize; 8];
        for _ in 0..draws {
            histogram[perturb_signal(truth, &shape, &noise, model, &mut rng)] += 1;
        }
        let wrong: usize = histogram
            .iter()
            .enumerate()
            .filter(|&(value, _)| value != truth)
            .map(|(_, &count)| count)
            .sum();
        println!("{model:?}:");
        println!("  observed error rate {:.4}", wrong as f64 / draws as f64);
        println!(
            "  expected           {:.4}",
            match model {
                SignalNoiseModel::FullSupport => 0.2 * 7.0 / 8.0,
                SignalNoiseModel::ExcludeTrue => 0.2,
            }
        );
        print!("  histogram          ");
        for count in histogram {
            print!("{:>7.4}", count as f64 / draws as f64);
        }
        println!();
        println!();
    }
    println!("full-support is the default; exclude-true is selectable per scenario");
    println!("(CLI: --signal-noise exclude-true).");
    Ok(())
}
