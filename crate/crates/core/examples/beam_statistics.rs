//! Runs the atomic beam on its own and checks occupancy and flux against
//! the values the source rate implies.

use cqed_beam::beam::BeamState;
use cqed_beam::trajectory::streams;
use cqed_beam::PhysicalParameters;

fn main() {
    let p = PhysicalParameters::set2();
    let (beam_rng, _) = streams(3, 0);
    let mut beam = BeamState::new(&p, beam_rng);
    let initial = beam.prefill().len();

    let dt = 0.5;
    let steps = 100_000;
    let (mut entered, mut left, mut occupancy) = (0usize, 0usize, 0.0);
    for _ in 0..steps {
        let (born, gone) = beam.step(dt);
        entered += born.len();
        left += gone.len();
        occupancy += beam.atoms.len() as f64;
    }
    let mean = occupancy / steps as f64;
    println!("prefilled {initial} atoms");
    println!("mean occupation {mean:.2} (expected {:.2})", beam.expected_occupation());
    println!("entered {entered}, left {left} over {} / kappa", steps as f64 * dt);
}
