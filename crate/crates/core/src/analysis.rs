//! Rate tables, dominant transfer pathways and Hamiltonian scale scans.

use rayon::prelude::*;
use serde::Serialize;

use crate::bath::BathModel;
use crate::propagate::{
    build_liouvillian, evolve, site_populations, steady_state, thermal_state, DensityMatrix, Liouvillian, Method,
    Trajectory,
};
use crate::redfield::{assemble_tensor, compute_rates, compute_zeta, RateMatrix, RedfieldOptions, RedfieldTensor, ZetaTensor};
use crate::scenario::Scenario;
use crate::system::{argmax, build_hamiltonian, diagonalize, ExcitonBasis, SiteHamiltonian, SiteNetwork};
use crate::units::{log10_per_second, PS_INV_TO_S_INV};
use crate::{Error, Result};

/// A site network together with its eigenbasis, bath, system factors and rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub network: SiteNetwork,
    pub hamiltonian: SiteHamiltonian,
    pub basis: ExcitonBasis,
    pub bath: BathModel,
    pub zeta: ZetaTensor,
    pub rates: RateMatrix,
}

impl Model {
    pub fn new(network: SiteNetwork, bath: BathModel) -> Result<Self> {
        bath.validate()?;
        let hamiltonian = build_hamiltonian(&network)?;
        let basis = diagonalize(&hamiltonian);
        Self::with_basis(network, hamiltonian, basis, bath)
    }

    fn with_basis(network: SiteNetwork, hamiltonian: SiteHamiltonian, basis: ExcitonBasis, bath: BathModel) -> Result<Self> {
        let zeta = compute_zeta(&basis, &hamiltonian.distances, bath.r_corr)?;
        let rates = compute_rates(&zeta, &basis, &bath)?;
        Ok(Self { network, hamiltonian, basis, bath, zeta, rates })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn tensor(&self, options: &RedfieldOptions) -> Result<RedfieldTensor> {
        assemble_tensor(&self.basis, &self.zeta, &self.bath, options)
    }

    pub fn liouvillian(&self, options: &RedfieldOptions) -> Result<Liouvillian> {
        build_liouvillian(&self.basis, &self.tensor(options)?)
    }

    /// Energy-only rescaling: ε → s·ε with the eigenvectors and ζ left untouched.
    pub fn energy_scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {factor}")));
        }
        let basis = self.basis.scaled(factor);
        let rates = compute_rates(&self.zeta, &basis, &self.bath)?;
        let hamiltonian = SiteHamiltonian {
            matrix: &self.hamiltonian.matrix * factor,
            distances: self.hamiltonian.distances.clone(),
        };
        Ok(Self { basis, hamiltonian, rates, ..self.clone() })
    }

    /// Geometry rescaling: energies ×s, distances ×s^(−1/3), then rebuilt from scratch.
    pub fn geometry_scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.network.scaled_geometry(factor)?, self.bath)
    }
}

/// One line of a rate table; states are 0-based, logarithms are base 10 with C and k in s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateTableRow {
    pub from_state: usize,
    pub to_state: usize,
    pub log10_zeta: f64,
    pub log10_c: f64,
    pub log10_k: f64,
    /// Rate in ps⁻¹.
    pub k: f64,
}

/// Every ordered pair a ≠ b, sorted by source then destination. Zero factors show up
/// as −∞ logarithms; `log10_k` is always the sum of the other two.
pub fn rate_table(model: &Model) -> Vec<RateTableRow> {
    let rates = &model.rates;
    let n = rates.dim();
    let mut rows = Vec::with_capacity(n * n.saturating_sub(1));
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let log10 = |x: f64| if x > 0.0 { x.log10() } else { f64::NEG_INFINITY };
            let log10_zeta = log10(rates.zeta_part[(a, b)]);
            let c = rates.c_part[(a, b)];
            let log10_c = if c > 0.0 { log10_per_second(c) } else { f64::NEG_INFINITY };
            rows.push(RateTableRow {
                from_state: a,
                to_state: b,
                log10_zeta,
                log10_c,
                log10_k: log10_zeta + log10_c,
                k: rates.k[(a, b)],
            });
        }
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominantTarget {
    pub from_state: usize,
    pub to_state: usize,
    /// Majority site of the destination exciton state.
    pub site: usize,
    /// ps⁻¹
    pub rate: f64,
}

impl DominantTarget {
    pub fn rate_per_second(&self) -> f64 {
        self.rate * PS_INV_TO_S_INV
    }
}

fn dominant_in(rates: &RateMatrix, basis: &ExcitonBasis, from: usize) -> Option<DominantTarget> {
    let n = rates.dim();
    let row: Vec<f64> = (0..n).map(|b| if b == from { f64::NEG_INFINITY } else { rates.k[(from, b)] }).collect();
    let to = argmax(row.iter().copied());
    let rate = row[to];
    if !(rate > 0.0) {
        return None;
    }
    Some(DominantTarget { from_state: from, to_state: to, site: basis.majority_site(to), rate })
}

/// Fastest transfer out of exciton state `from`; `None` when every rate vanishes.
pub fn dominant_target(model: &Model, from: usize) -> Result<Option<DominantTarget>> {
    if from >= model.dim() {
        return Err(Error::InvalidArgument(format!("exciton state {} out of range", from + 1)));
    }
    Ok(dominant_in(&model.rates, &model.basis, from))
}

/// Ratio of the dominant outgoing rate to the sum of the competing ones.
pub fn directedness(rates: &RateMatrix, from: usize) -> f64 {
    let n = rates.dim();
    let out: Vec<f64> = (0..n).filter(|&b| b != from).map(|b| rates.k[(from, b)]).collect();
    let best = out.iter().copied().fold(0.0, f64::max);
    if best == 0.0 {
        return 0.0;
    }
    let rest: f64 = out.iter().sum::<f64>() - best;
    best / rest
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    /// Scale the eigenenergies only; ζ is unchanged.
    #[default]
    Energy,
    /// Scale energies and shrink distances so 1/R³ couplings follow; ζ shifts through exp(−R/R_corr).
    Geometry,
}

impl std::str::FromStr for ScanMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "energy" => Ok(ScanMode::Energy),
            "geometry" => Ok(ScanMode::Geometry),
            other => Err(format!("unknown scan mode {other:?}, expected energy or geometry")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub factor: f64,
    pub from_state: usize,
    pub dominant: Option<DominantTarget>,
    pub directedness: f64,
    pub rates: RateMatrix,
}

/// Evaluates the dominant pathway out of `from` for each scale factor, in input order.
pub fn scale_scan(model: &Model, from: usize, factors: &[f64], mode: ScanMode) -> Result<Vec<ScanResult>> {
    if from >= model.dim() {
        return Err(Error::InvalidArgument(format!("exciton state {} out of range", from + 1)));
    }
    if let Some(bad) = factors.iter().find(|f| !(**f > 0.0) || !f.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale factors must be positive, got {bad}")));
    }
    factors
        .par_iter()
        .map(|&factor| {
            let scaled = match mode {
                ScanMode::Energy => model.energy_scaled(factor)?,
                ScanMode::Geometry => model.geometry_scaled(factor)?,
            };
            Ok(ScanResult {
                factor,
                from_state: from,
                dominant: dominant_in(&scaled.rates, &scaled.basis, from),
                directedness: directedness(&scaled.rates, from),
                rates: scaled.rates,
            })
        })
        .collect()
}

/// Everything produced by running a scenario forward in time.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub model: Model,
    pub tensor: RedfieldTensor,
    pub liouvillian: Liouvillian,
    pub trajectory: Trajectory,
    pub dt: f64,
    pub stride: usize,
    pub thermal: DensityMatrix,
    pub thermal_site_populations: Vec<f64>,
    /// Fixed point of the generator when it is unique.
    pub steady_state: Option<DensityMatrix>,
}

impl Simulation {
    pub fn steady_site_populations(&self) -> Option<Vec<f64>> {
        self.steady_state.as_ref().and_then(|s| site_populations(s, &self.model.basis).ok())
    }

    /// Largest |p_steady − p_thermal| over sites, when a steady state exists.
    pub fn steady_state_gap(&self) -> Option<f64> {
        self.steady_site_populations().map(|p| {
            p.iter()
                .zip(&self.thermal_site_populations)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }
}

pub fn simulate(scenario: &Scenario) -> Result<Simulation> {
    let model = scenario.model()?;
    let options = &scenario.options;
    let tensor = model.tensor(&options.redfield)?;
    let liouvillian = build_liouvillian(&model.basis, &tensor)?;
    let dt = options.dt.unwrap_or_else(|| liouvillian.default_dt());
    let stride = options.stride.unwrap_or_else(|| ((1.0 / dt).round() as usize).max(1));
    let rho0 = scenario.initial_state(&model.basis)?;
    let trajectory = evolve(&liouvillian, &rho0, options.t_final, dt, stride, options.method)?;
    let thermal = thermal_state(&model.basis, model.bath.temperature)?;
    let thermal_site_populations = site_populations(&thermal, &model.basis)?;
    let steady_state = steady_state(&liouvillian).ok();
    Ok(Simulation {
        model,
        tensor,
        liouvillian,
        trajectory,
        dt,
        stride,
        thermal,
        thermal_site_populations,
        steady_state,
    })
}

/// Same as [`simulate`] with the integrator overridden.
pub fn simulate_with(scenario: &Scenario, method: Method) -> Result<Simulation> {
    let mut s = scenario.clone();
    s.options.method = method;
    simulate(&s)
}
