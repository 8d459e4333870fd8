//! Physical constants and the handful of conversions used across the crate.

use crate::{Error, Result};

/// Reduced Planck constant in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.658_211_956_9;

/// Boltzmann constant in meV/K.
pub const KB_MEV_PER_K: f64 = 0.086_173_332_62;

/// Reduced Planck constant in J·s.
pub const HBAR_J_S: f64 = 1.054_571_817e-34;

/// Elementary charge, J per eV.
pub const J_PER_EV: f64 = 1.602_176_634e-19;

/// Multiplier taking a rate in ps⁻¹ to s⁻¹.
pub const PS_INV_TO_S_INV: f64 = 1e12;

/// ω = E/ħ, meV to rad/ps.
pub fn energy_to_angular_frequency(energy_mev: f64) -> Result<f64> {
    if !energy_mev.is_finite() {
        return Err(Error::InvalidArgument(format!("energy must be finite, got {energy_mev}")));
    }
    Ok(energy_mev / HBAR_MEV_PS)
}

/// E = ħω, rad/ps to meV.
pub fn angular_frequency_to_energy(omega: f64) -> f64 {
    omega * HBAR_MEV_PS
}

/// k_B T / ħ in rad/ps.
pub fn thermal_frequency(temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    Ok(KB_MEV_PER_K * temperature / HBAR_MEV_PS)
}

/// log₁₀ of a rate given in ps⁻¹, expressed in s⁻¹.
pub fn log10_per_second(rate_ps_inv: f64) -> f64 {
    rate_ps_inv.log10() + PS_INV_TO_S_INV.log10()
}
