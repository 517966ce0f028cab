//! Exact analysis of the single-channel learning chain: hitting times,
//! absorption probabilities, and the closed-form upper bounds.
//!
//!     cargo run --release --example markov_analysis

use anticoord::markov::{
    contraction_hitting_bound, multi_signal_convergence_bound, single_channel_convergence_bound,
    verify_success_before_restart, ChainModel, ChainVariant,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = 0.5;

    println!("expected slots to single ownership, starting from everyone transmitting (p = {p})");
    println!("{:>6} {:>12} {:>12} {:>14}", "N", "exact", "bound", "Monte-Carlo");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [2usize, 4, 8, 16, 32, 64] {
        let chain = ChainModel::new(n, p, ChainVariant::Original)?;
        let exact = chain.expected_hitting_time(&[1])?.value(n);
        let bound = single_channel_convergence_bound(n, p)?;
        let trials = 2000;
        let mc: f64 = (0..trials)
            .map(|_| chain.simulate_hitting_time(n, &[1], 1_000_000, &mut rng).unwrap() as f64)
            .sum::<f64>()
            / trials as f64;
        println!("{n:>6} {exact:>12.4} {bound:>12.4} {mc:>14.4}");
    }

    println!();
    println!("probability of reaching single ownership before a full restart");
    println!("{:>6} {:>10} {:>10} {:>10}", "p", "h_2", "h_8", "1-p");
    for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let chain = ChainModel::new(8, p, ChainVariant::AbsorbedAtZeroAndOne)?;
        let h = chain.hitting_probability(&[1])?;
        println!(
            "{p:>6.1} {:>10.4} {:>10.4} {:>10.4}",
            h.value(2),
            h.value(8),
            1.0 - p
        );
        assert!(verify_success_before_restart(64, p)?);
    }

    println!();
    println!("contraction bound vs the exact decay-to-empty time (absorbed-at-zero chain)");
    let chain = ChainModel::new(256, p, ChainVariant::ModifiedY)?;
    let times = chain.expected_hitting_time(&[0])?;
    let beta = 1.0 / (1.0 - p);
    for i in [1usize, 4, 16, 64, 256] {
        println!(
            "  from {i:>3} transmitters: exact {:>8.3}, bound {:>8.3}",
            times.value(i),
            contraction_hitting_bound(beta, i)?
        );
    }

    println!();
    println!("composed multi-signal bound (reporting scale, C = N/2, K = N)");
    for n in [8usize, 16, 32, 64] {
        let bound = multi_signal_convergence_bound(n, n / 2, n, p)?;
        println!("  N = {n:>2}: at most {bound:>12.0} slots in expectation");
    }
    Ok(())
}
