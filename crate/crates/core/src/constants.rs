//! Physical constants (CODATA 2018) and atomic masses.

/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of ¹³³Cs in atomic mass units.
pub const CESIUM_MASS_U: f64 = 132.905_451_933;

/// Standard atomic weight of rubidium (natural isotopic mixture).
pub const RUBIDIUM_MASS_U: f64 = 85.4678;

/// Atomic mass in kg for a species identified by its resonance wavelength.
///
/// 852 nm resolves to caesium, 780 nm to rubidium. Returns `None` for
/// anything else.
pub fn mass_for_wavelength(lambda: f64) -> Option<f64> {
    let nm = lambda * 1e9;
    if (nm - 852.0).abs() < 2.0 {
        Some(CESIUM_MASS_U * ATOMIC_MASS_UNIT)
    } else if (nm - 780.0).abs() < 2.0 {
        Some(RUBIDIUM_MASS_U * ATOMIC_MASS_UNIT)
    } else {
        None
    }
}
