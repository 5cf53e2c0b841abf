//! Weak-drive g²(τ) for a hand-placed set of stationary atoms.

use cqed_beam::analytics::{g2_fixed, scattering_diagnostics, tau_grid, AtomConfiguration};
use cqed_beam::PhysicalParameters;

fn main() {
    let p = PhysicalParameters::set2();
    let w = p.w0;
    let l = p.lambda;
    // One atom on an antinode, one near a node, one off axis.
    let positions = vec![[0.0, 0.0, 0.0], [0.1 * w, 0.0, 0.23 * l], [0.8 * w, 0.4 * w, 0.05 * l]];
    let config = AtomConfiguration::from_positions(positions, &p);

    let rates = scattering_diagnostics(&config, &p);
    println!("<n> = {:.3e}", config.photon_number(&p));
    println!("side/forward scattering = {:.2}", rates.ratio);
    println!("weak-field bound on <n> = {:.3e}", rates.weak_field_bound);

    let tau = tau_grid(4.0, 9);
    let curve = g2_fixed(&config, &p, &tau);
    for (t, g) in curve.tau_kappa.iter().zip(&curve.values) {
        println!("tau = {t:.1}/kappa  g2 = {g:.4}");
    }
}
