//! Unit conventions and physical constants.
//!
//! Every frequency, detuning, Rabi frequency and decay rate is expressed in
//! MHz and enters the equations of motion directly, i.e. `dρ/dt = -i[H, ρ] + …`
//! with `H` in MHz. Time is therefore measured in units of `1 / MHz` and a
//! duration of `1 / Γ` is one excited-state lifetime. Velocities are in m/s,
//! temperatures in kelvin, masses in atomic mass units.

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Wavelength of the D2 line driven by all three beams, in µm.
pub const D2_WAVELENGTH_UM: f64 = 0.780_241;

/// Doppler shift `k·v` in MHz for an atom moving at `velocity` m/s along the beam.
///
/// With `k = 1/λ` in the MHz convention above, `(m/s) / µm = MHz`.
pub fn doppler_shift(velocity: f64) -> f64 {
    velocity / D2_WAVELENGTH_UM
}

/// Rabi frequency for a drive at `saturation` = I / I_s: `Ω = Γ·sqrt(I / (2·I_s))`.
pub fn rabi_from_saturation(gamma_e: f64, saturation: f64) -> f64 {
    gamma_e * (saturation / 2.0).sqrt()
}

/// Inverse of [`rabi_from_saturation`].
pub fn saturation_from_rabi(gamma_e: f64, rabi: f64) -> f64 {
    2.0 * (rabi / gamma_e).powi(2)
}

/// Most probable speed `sqrt(2 kB T / m)` in m/s.
pub fn most_probable_speed(temperature: f64, mass_amu: f64) -> f64 {
    (2.0 * BOLTZMANN * temperature / (mass_amu * ATOMIC_MASS_UNIT)).sqrt()
}
