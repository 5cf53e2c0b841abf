//! Three-quanta truncation with a veto on rapid jump bursts, compared with
//! the default two-quanta run on the same seed.

use cqed_beam::trajectory::{run_g2, TrajectoryConfig};
use cqed_beam::{PhysicalParameters, Truncation};

fn main() -> cqed_beam::Result<()> {
    // A strong drive, so that side scattering and bursts actually happen.
    let set1 = PhysicalParameters::set1();
    let base = PhysicalParameters { n_eff_bar: 1.0, drive: 1.0 * set1.kappa, ..set1 };
    for truncation in [Truncation::TwoQuanta, Truncation::ThreeQuanta] {
        let p = PhysicalParameters { truncation, ..base.clone() };
        let mut cfg = TrajectoryConfig::for_params(&p);
        cfg.tau_max = 2.0;
        cfg.tau_points = 5;
        cfg.exclusion_window = 3.0;
        cfg.sample_spacing = 6.0;
        cfg.duration = 1200.0;
        cfg.trajectories = 4;
        cfg.workers = 0;
        if truncation == Truncation::ThreeQuanta {
            cfg.veto = Some(TrajectoryConfig::default_veto(&p));
        }
        let run = run_g2(&p, &cfg)?;
        let e = &run.estimate;
        let curve: Vec<String> = e.g2.iter().zip(&e.stderr).map(|(g, s)| format!("{g:.3}±{s:.3}")).collect();
        let vetoed = run.jumps.iter().filter(|(_, j)| j.vetoed).count();
        println!("{truncation}: {} samples, {} jumps ({vetoed} vetoed)", e.samples, run.jumps.len());
        println!("  {}", curve.join("  "));
    }
    Ok(())
}
