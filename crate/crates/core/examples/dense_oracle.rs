use cqed_beam::analytics::{g2_fixed, tau_grid, AtomConfiguration};
use cqed_beam::oracle::dense_g2;
use cqed_beam::PhysicalParameters;

// Master-equation g²(τ) next to the weak-drive closed form, for a drive
// that is weak and one that is not.
fn main() -> cqed_beam::Result<()> {
    let tau = tau_grid(3.0, 7);
    for drive in [1e-3, 0.1] {
        let base = PhysicalParameters::set1();
        let p = PhysicalParameters { drive: drive * base.kappa, ..base };
        let config = AtomConfiguration::from_positions(vec![[0.0; 3], [0.2 * p.w0, 0.0, 0.0]], &p);
        let dense = dense_g2(&config, 4, &p, &tau)?;
        let weak = g2_fixed(&config, &p, &tau);
        println!("drive = {drive} kappa");
        for i in 0..tau.len() {
            println!("  tau {:.1}  dense {:.5}  weak-drive {:.5}", tau[i], dense.values[i], weak.values[i]);
        }
    }
    Ok(())
}
