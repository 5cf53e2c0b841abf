//! Photon-correlation simulator for cavity QED with a thermal atomic beam.
//!
//! The crate combines a Monte-Carlo model of an effusive (and possibly
//! tilted) atomic beam with quantum-trajectory evolution of the conditional
//! cavity-plus-atoms state in a truncated basis whose size follows the number
//! of atoms in the interaction volume. The second-order correlation function
//! g²(τ) of the forwards-scattered light is estimated with enforced cavity
//! jumps and compared against closed-form stationary-atom results and a
//! dense master-equation oracle.
//!
//! Module map:
//!
//! - [`model`]: parameter sets, derived constants, mode geometry, couplings
//! - [`beam`]: atomic-beam Monte Carlo
//! - [`state`]: dynamic truncated state and its collapses
//! - [`trajectory`]: non-Hermitian propagation, jumps, g² and semiclassical runs
//! - [`analytics`]: closed-form g², configuration averages, series statistics
//! - [`oracle`]: dense density-matrix reference for a few fixed atoms
//! - [`io`]: configuration files, CSV output, run manifests
//! - [`cli`]: command-line front end used by the `cqed-beam` binary

pub mod analytics;
pub mod beam;
pub mod cli;
pub mod constants;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod scenario;
pub mod state;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{CavityKind, PhysicalParameters, Truncation};
