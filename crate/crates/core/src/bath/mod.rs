//! Super-ohmic deformation-potential phonon bath.
//!
//! The bath enters the dynamics only through its spectral density
//! `J(ω) = Θ(ω) η ω³ exp(−ω²/ω_c²)`, the thermal occupation, and the spatial
//! correlation kernel `exp(−R/R_corr)` between sites.

pub mod quadrature;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::units::{thermal_frequency, HBAR_J_S, J_PER_EV};
use crate::{Error, Result};

pub use quadrature::{Estimate, PrincipalValue};

/// Spectral-density parameters plus correlation length and temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathModel {
    /// Coupling prefactor η in ps².
    pub eta: f64,
    /// Cutoff frequency ω_c in rad/ps.
    pub omega_c: f64,
    /// Phonon correlation length in nm.
    pub r_corr: f64,
    /// Temperature in K.
    pub temperature: f64,
}

impl BathModel {
    pub const GAAS_10K: BathModel = BathModel { eta: 0.035, omega_c: 1.41, r_corr: 3.0, temperature: 10.0 };

    pub fn new(eta: f64, omega_c: f64, r_corr: f64, temperature: f64) -> Result<Self> {
        let bath = Self { eta, omega_c, r_corr, temperature };
        bath.validate()?;
        Ok(bath)
    }

    /// GaAs quantum dots at 10 K.
    pub fn gaas_10k() -> Self {
        Self::GAAS_10K
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "GaAs-10K" => Some(Self::GAAS_10K),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str, value: f64| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{what} out of range: {value}")))
            }
        };
        check(self.eta >= 0.0 && self.eta.is_finite(), "eta", self.eta)?;
        check(self.omega_c > 0.0 && self.omega_c.is_finite(), "omega_c", self.omega_c)?;
        check(self.r_corr > 0.0, "r_corr", self.r_corr)?;
        check(self.temperature > 0.0 && self.temperature.is_finite(), "temperature", self.temperature)
    }

    /// k_B T/ħ in rad/ps.
    pub fn thermal_frequency(&self) -> f64 {
        thermal_frequency(self.temperature).expect("validated temperature")
    }

    pub fn spectral_density(&self, omega: f64) -> f64 {
        spectral_density(omega, self)
    }

    pub fn correlation(&self, omega: f64) -> f64 {
        correlation_c(omega, self)
    }
}

/// Deformation potentials and lattice constants of the dot material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Electron deformation potential, eV.
    pub d_e: f64,
    /// Hole deformation potential, eV.
    pub d_h: f64,
    /// Mass density, kg/m³.
    pub rho: f64,
    /// Speed of sound, m/s.
    pub u: f64,
    /// Ground-state localization length, nm.
    pub l: f64,
}

/// η = (D_e − D_h)²/(4π²ρu⁵ħ) in ps² and ω_c = √2·u/l in rad/ps.
pub fn derive_bath_params(m: &MaterialParams) -> Result<(f64, f64)> {
    for (name, v) in [("rho", m.rho), ("u", m.u), ("l", m.l)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    for (name, v) in [("d_e", m.d_e), ("d_h", m.d_h)] {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} must be finite, got {v}")));
        }
    }
    let dd = (m.d_e - m.d_h) * J_PER_EV;
    let eta_s2 = dd * dd / (4.0 * PI * PI * m.rho * m.u.powi(5) * HBAR_J_S);
    let eta = eta_s2 * 1e24;
    // m/s -> nm/ps
    let u_nm_ps = m.u * 1e-3;
    let omega_c = std::f64::consts::SQRT_2 * u_nm_ps / m.l;
    Ok((eta, omega_c))
}

/// J(ω) in ps⁻¹; zero for ω ≤ 0.
pub fn spectral_density(omega: f64, bath: &BathModel) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let x = omega / bath.omega_c;
    bath.eta * omega.powi(3) * (-x * x).exp()
}

/// n(ω) = 1/(exp(ħω/k_BT) − 1). Negative frequencies give negative values.
pub fn bose_einstein(omega: f64, temperature: f64) -> Result<f64> {
    if omega == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let x = omega / thermal_frequency(temperature)?;
    Ok(1.0 / x.exp_m1())
}

/// n(ω) + 1 = 1/(1 − exp(−ħω/k_BT)), evaluated without cancellation.
fn bose_einstein_plus_one(omega: f64, thermal: f64) -> f64 {
    -1.0 / (-omega / thermal).exp_m1()
}

/// C(ω) = 2π[n(ω) + 1](J(ω) − J(−ω)) in ps⁻¹. Non-negative, with C(0) = 0.
pub fn correlation_c(omega: f64, bath: &BathModel) -> f64 {
    if omega == 0.0 {
        // J ~ ω³ cancels the 1/ω pole of the occupation.
        return 0.0;
    }
    let occupation = bose_einstein_plus_one(omega, bath.thermal_frequency());
    let odd = spectral_density(omega, bath) - spectral_density(-omega, bath);
    let c = 2.0 * PI * occupation * odd;
    if c.is_nan() {
        0.0
    } else {
        c
    }
}

/// exp(−R/R_corr).
pub fn spatial_correlation(distance: f64, r_corr: f64) -> Result<f64> {
    if !(distance >= 0.0) {
        return Err(Error::InvalidArgument(format!("distance must be non-negative, got {distance}")));
    }
    if !(r_corr > 0.0) {
        return Err(Error::InvalidArgument(format!("correlation length must be positive, got {r_corr}")));
    }
    Ok((-distance / r_corr).exp())
}

/// Principal value `P∫ C(ω)/(ω₀ − ω) dω` over the real line.
pub fn pv_hilbert(omega0: f64, bath: &BathModel, rel_tol: f64) -> Result<f64> {
    if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
        return Err(Error::InvalidArgument(format!("tolerance must lie in (0, 1e-3], got {rel_tol}")));
    }
    if bath.eta == 0.0 {
        return Ok(0.0);
    }
    let pv = PrincipalValue::new(bath.omega_c, rel_tol);
    pv.integrate(|w| correlation_c(w, bath), omega0).map(|e| e.value)
}
