//! Closed-form g²(τ) for N̄_eff atoms sitting at antinodes, both presets.

use cqed_beam::analytics::{g2_ideal, tau_grid};
use cqed_beam::model::derive;
use cqed_beam::PhysicalParameters;

fn main() {
    let tau = tau_grid(6.0, 13);
    for (name, p) in [("set1", PhysicalParameters::set1()), ("set2", PhysicalParameters::set2())] {
        let d = derive(&p);
        println!(
            "{name}: C1 = {:.3}, 2C = {:.1}, overdamped = {}, decay time = {:.1} ns",
            d.c1,
            d.two_c,
            d.overdamped,
            d.decay_time * 1e9
        );
        let curve = g2_ideal(&p, &tau);
        for (t, g) in curve.tau_ns.iter().zip(&curve.values) {
            println!("  {t:7.1} ns  {g:.4}");
        }
    }
}
