//! Semiclassical photon-number fluctuations from beam transit noise, with
//! and without a small beam tilt.

use cqed_beam::analytics::{correlation_time, g2_semiclassical, photon_histogram, tau_grid};
use cqed_beam::trajectory::{run_semiclassical, Mode, TrajectoryConfig};
use cqed_beam::PhysicalParameters;

fn main() -> cqed_beam::Result<()> {
    let base = PhysicalParameters::set2();
    let tau = tau_grid(10.0, 6);
    for tilt in [0.0, 9.6e-3] {
        let p = PhysicalParameters { tilt, ..base.clone() };
        let mut cfg = TrajectoryConfig::for_params(&p);
        cfg.mode = Mode::Semiclassical;
        cfg.duration = 1500.0;
        cfg.workers = 0;
        let series = run_semiclassical(&p, &cfg)?;

        let tc = correlation_time(&series)? / p.kappa * 1e9;
        let hist = photon_histogram(&series.values, 30)?;
        let g2 = g2_semiclassical(&series, &tau, p.kappa)?;
        println!("tilt {:.1} mrad", tilt * 1e3);
        println!("  mean <n> = {:.3e}, relative variance = {:.3}", hist.mean, hist.relative_variance);
        println!("  correlation time = {tc:.0} ns");
        for (t, g) in g2.tau_ns.iter().zip(&g2.values) {
            println!("  g2({t:.0} ns) = {g:.4}");
        }
    }
    Ok(())
}
