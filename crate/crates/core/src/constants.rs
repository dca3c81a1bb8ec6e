//! CODATA 2018 exact SI values and unit helpers.

/// J/K
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// J·s
pub const PLANCK: f64 = 6.626_070_15e-34;
/// m/s
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// kg
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Pa
pub const ATM_PA: f64 = 101_325.0;

/// Vacuum wavelength in nm to wavenumber in cm⁻¹.
pub fn nm_to_wavenumber(nm: f64) -> f64 {
    1e7 / nm
}

/// Photon energy in J at a wavenumber in cm⁻¹.
pub fn photon_energy(wavenumber: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT * wavenumber * 100.0
}
