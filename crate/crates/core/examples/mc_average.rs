//! Averages fixed-configuration curves over random beam snapshots, comparing
//! the plain and the photon-number-weighted schemes.

use cqed_beam::analytics::{g2_ideal, g2_mc_average, tau_grid, Scheme};
use cqed_beam::PhysicalParameters;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cqed_beam::Result<()> {
    let p = PhysicalParameters::set1();
    let tau = tau_grid(8.0, 9);
    let ideal = g2_ideal(&p, &tau);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let naive = g2_mc_average(&p, Scheme::Naive, 20_000, &tau, &mut rng)?;
    let weighted = g2_mc_average(&p, Scheme::Weighted, 20_000, &tau, &mut rng)?;
    println!("mean atoms per snapshot: {:.1}", weighted.mean_atoms);
    println!("limits: naive {:.4}, weighted {:.4}", naive.limit, weighted.limit);

    println!("{:>8} {:>9} {:>9} {:>9}", "tau_ns", "ideal", "naive", "weighted");
    for i in 0..tau.len() {
        println!(
            "{:8.1} {:9.4} {:9.4} {:9.4}",
            ideal.tau_ns[i], ideal.values[i], naive.curve.values[i], weighted.curve.values[i]
        );
    }
    Ok(())
}
