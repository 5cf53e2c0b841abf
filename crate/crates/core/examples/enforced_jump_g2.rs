//! Full quantum-trajectory estimate of g²(τ) for a thinned thermal beam.
//!
//! Each trajectory is conditioned by an enforced photon detection at a
//! regular spacing; the curve is the ratio of post-jump to stationary
//! photon number.

use cqed_beam::trajectory::{run_g2, TrajectoryConfig};
use cqed_beam::PhysicalParameters;

fn main() -> cqed_beam::Result<()> {
    let p = PhysicalParameters { n_eff_bar: 2.0, ..PhysicalParameters::set2() };
    let mut cfg = TrajectoryConfig::for_params(&p);
    cfg.tau_max = 4.0;
    cfg.tau_points = 9;
    cfg.exclusion_window = 6.0;
    cfg.sample_spacing = 11.0;
    cfg.duration = 11_000.0;
    cfg.trajectories = 4;
    cfg.workers = 0;

    let run = run_g2(&p, &cfg)?;
    let e = &run.estimate;
    println!("{} samples, mean atoms {:.1}, {} jumps", e.samples, run.mean_atoms, run.jumps.len());
    for i in 0..e.g2.len() {
        println!("{:6.1} ns  {:.3} ± {:.3}", e.tau_ns[i], e.g2[i], e.stderr[i]);
    }
    Ok(())
}
