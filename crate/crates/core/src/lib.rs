//! Excitonic energy transfer in site networks coupled to a phonon bath.
//!
//! The crate builds single-exciton Hamiltonians ([`system`]), evaluates the
//! super-ohmic deformation-potential bath ([`bath`]), assembles the full
//! non-secular Redfield tensor and the factored population-transfer rates
//! ([`redfield`]), propagates the reduced density matrix ([`propagate`]) and
//! provides rate tables and Hamiltonian scale scans ([`analysis`]). Scenario
//! documents are parsed by [`scenario`].
//!
//! Internal units: rad/ps for frequencies, ps for time, nm for lengths and K
//! for temperature. Energies enter in meV and are converted at the boundary.

// `!(x > 0.0)` guards are deliberate: they reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bath;
mod error;
pub mod propagate;
pub mod redfield;
pub mod scenario;
pub mod system;
pub mod units;

pub use error::{Error, Result};

pub use analysis::{Model, RateTableRow, ScanMode, ScanResult};
pub use bath::{BathModel, MaterialParams};
pub use propagate::{Basis, DensityMatrix, Liouvillian, Method, Trajectory};
pub use redfield::{RateMatrix, RedfieldOptions, RedfieldTensor, ZetaTensor};
pub use scenario::{Scenario, ScenarioError};
pub use system::{CouplingRule, ExcitonBasis, Site, SiteHamiltonian, SiteNetwork};

/// Complex scalar used for density matrices and superoperators.
pub type C64 = num_complex::Complex64;
