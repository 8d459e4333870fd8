//! JSON scenario documents.
//!
//! ```json
//! {
//!   "name": "dimer",
//!   "sites": [
//!     { "position": [0, 0, 0], "energy": 1000.0 },
//!     { "position": [5, 0, 0], "energy": 1000.0 }
//!   ],
//!   "coupling": { "dipole_perpendicular": { "strength": 100 } },
//!   "bath": "GaAs-10K",
//!   "options": { "method": "expm", "t_final": 1000 },
//!   "initial": { "site": 2 }
//! }
//! ```
//!
//! Positions are in nm, energies in meV, times in ps. Site and exciton indices are
//! 1-based in the document. `bath` is either a preset name or an object with `eta`,
//! `omega_c`, `r_corr` and `temperature`, optionally seeded from `"preset"`.
//! Unknown fields are rejected.

use nalgebra::DMatrix;
use serde::Deserialize;
use thiserror::Error;

use crate::analysis::Model;
use crate::bath::BathModel;
use crate::propagate::{Basis, DensityMatrix, Method};
use crate::redfield::{RedfieldOptions, DEFAULT_GROUPING_TOL, DEFAULT_MAX_SITES, PV_TOL};
use crate::system::{transform_density, CouplingRule, ExcitonBasis, Site, SiteNetwork, DEFAULT_DIPOLE_STRENGTH};
use crate::{Result, C64};

/// Reference scenarios shipped with the crate.
pub mod reference {
    pub const DIMER: &str = include_str!("../scenarios/dimer.json");
    pub const CHAIN_A: &str = include_str!("../scenarios/chain-A.json");
    pub const CHAIN_A_X3_5: &str = include_str!("../scenarios/chain-A-x3.5.json");
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("physics error at `{path}`: {message}")]
    Physics { path: String, message: String },
}

impl ScenarioError {
    /// Stable identifier for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioError::Syntax { .. } => "syntax",
            ScenarioError::Schema { .. } => "schema",
            ScenarioError::Physics { .. } => "physics",
        }
    }

    pub fn path(&self) -> Option<&str> {
        match self {
            ScenarioError::Syntax { .. } => None,
            ScenarioError::Schema { path, .. } | ScenarioError::Physics { path, .. } => Some(path),
        }
    }

    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Schema { path: path.into(), message: message.into() }
    }

    fn physics(path: impl Into<String>, message: impl std::fmt::Display) -> Self {
        ScenarioError::Physics { path: path.into(), message: message.to_string() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    name: Option<String>,
    sites: Vec<SiteDoc>,
    #[serde(default)]
    coupling: Option<CouplingDoc>,
    bath: serde_json::Value,
    #[serde(default)]
    options: OptionsDoc,
    #[serde(default)]
    initial: Option<InitialDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteDoc {
    position: [f64; 3],
    energy: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum CouplingDoc {
    DipolePerpendicular {
        #[serde(default = "default_strength")]
        strength: f64,
    },
    Explicit(Vec<Vec<f64>>),
}

fn default_strength() -> f64 {
    DEFAULT_DIPOLE_STRENGTH
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BathDoc {
    preset: Option<String>,
    eta: Option<f64>,
    omega_c: Option<f64>,
    r_corr: Option<f64>,
    temperature: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OptionsDoc {
    secular: bool,
    lamb_shift: bool,
    method: Method,
    dt: Option<f64>,
    t_final: f64,
    stride: Option<usize>,
    grouping_tol: f64,
    pv_tol: f64,
    max_sites: usize,
}

impl Default for OptionsDoc {
    fn default() -> Self {
        Self {
            secular: false,
            lamb_shift: true,
            method: Method::Expm,
            dt: None,
            t_final: 1000.0,
            stride: None,
            grouping_tol: DEFAULT_GROUPING_TOL,
            pv_tol: PV_TOL,
            max_sites: DEFAULT_MAX_SITES,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum InitialDoc {
    Site(usize),
    Exciton(usize),
    Matrix(MatrixDoc),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

/// Initial condition, with 0-based indices.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Site(usize),
    Exciton(usize),
    /// Site-basis density matrix.
    Matrix(DMatrix<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub redfield: RedfieldOptions,
    pub method: Method,
    /// Integration step in ps; derived from the generator when absent.
    pub dt: Option<f64>,
    pub t_final: f64,
    /// Steps between samples; one sample per ps when absent.
    pub stride: Option<usize>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub network: SiteNetwork,
    pub bath: BathModel,
    pub options: SimulationOptions,
    pub initial: InitialState,
}

fn json_error(err: serde_json::Error, path: String) -> ScenarioError {
    use serde_json::error::Category;
    match err.classify() {
        Category::Syntax | Category::Eof | Category::Io => {
            ScenarioError::Syntax { line: err.line(), column: err.column(), message: err.to_string() }
        }
        Category::Data => {
            let path = if path.is_empty() || path == "." { "$".into() } else { path };
            ScenarioError::schema(path, strip_position(&err.to_string()))
        }
    }
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

fn parse_bath(value: serde_json::Value) -> Result<BathModel, ScenarioError> {
    let doc = match value {
        serde_json::Value::String(name) => BathDoc { preset: Some(name), ..Default::default() },
        other => serde_path_to_error::deserialize::<_, BathDoc>(other).map_err(|e| {
            let path = format!("bath.{}", e.path());
            ScenarioError::schema(path, strip_position(&e.into_inner().to_string()))
        })?,
    };
    let base = match &doc.preset {
        Some(name) => Some(
            BathModel::preset(name)
                .ok_or_else(|| ScenarioError::schema("bath.preset", format!("unknown preset {name:?}")))?,
        ),
        None => None,
    };
    let field = |value: Option<f64>, pick: fn(&BathModel) -> f64, name: &str| {
        value
            .or_else(|| base.as_ref().map(pick))
            .ok_or_else(|| ScenarioError::schema(format!("bath.{name}"), "missing field and no preset given"))
    };
    let bath = BathModel {
        eta: field(doc.eta, |b| b.eta, "eta")?,
        omega_c: field(doc.omega_c, |b| b.omega_c, "omega_c")?,
        r_corr: field(doc.r_corr, |b| b.r_corr, "r_corr")?,
        temperature: field(doc.temperature, |b| b.temperature, "temperature")?,
    };
    let checks = [
        ("eta", bath.eta >= 0.0 && bath.eta.is_finite(), "must be non-negative"),
        ("omega_c", bath.omega_c > 0.0 && bath.omega_c.is_finite(), "must be positive"),
        ("r_corr", bath.r_corr > 0.0, "must be positive"),
        ("temperature", bath.temperature > 0.0 && bath.temperature.is_finite(), "must be positive"),
    ];
    for (name, ok, message) in checks {
        if !ok {
            return Err(ScenarioError::schema(format!("bath.{name}"), message));
        }
    }
    Ok(bath)
}

fn square(rows: &[Vec<f64>], n: usize, path: &str) -> Result<DMatrix<f64>, ScenarioError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(ScenarioError::schema(path, format!("expected a {n}x{n} matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        json_error(e.into_inner(), path)
    })?;

    let n = doc.sites.len();
    if n == 0 {
        return Err(ScenarioError::schema("sites", "at least one site is required"));
    }
    let opts = doc.options;
    if n > opts.max_sites {
        return Err(ScenarioError::schema(
            "sites",
            format!("{n} sites exceed options.max_sites = {}", opts.max_sites),
        ));
    }
    for (i, s) in doc.sites.iter().enumerate() {
        if !s.energy.is_finite() {
            return Err(ScenarioError::schema(format!("sites[{i}].energy"), "must be finite"));
        }
        if s.position.iter().any(|x| !x.is_finite()) {
            return Err(ScenarioError::schema(format!("sites[{i}].position"), "must be finite"));
        }
    }
    let coupling = match doc.coupling {
        None => CouplingRule::default(),
        Some(CouplingDoc::DipolePerpendicular { strength }) => {
            if !strength.is_finite() {
                return Err(ScenarioError::schema("coupling.dipole_perpendicular.strength", "must be finite"));
            }
            CouplingRule::DipolePerpendicular { strength }
        }
        Some(CouplingDoc::Explicit(rows)) => CouplingRule::Explicit(square(&rows, n, "coupling.explicit")?),
    };
    let sites = doc.sites.iter().map(|s| Site::new(s.position, s.energy)).collect();
    let network = SiteNetwork::new(sites, coupling).map_err(|e| ScenarioError::physics("sites", e))?;
    let bath = parse_bath(doc.bath)?;

    if let Some(dt) = opts.dt {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(ScenarioError::schema("options.dt", "must be positive"));
        }
    }
    if !(opts.t_final > 0.0) || !opts.t_final.is_finite() {
        return Err(ScenarioError::schema("options.t_final", "must be positive"));
    }
    if let Some(dt) = opts.dt {
        if opts.t_final < dt {
            return Err(ScenarioError::schema("options.t_final", "must be at least options.dt"));
        }
    }
    if opts.stride == Some(0) {
        return Err(ScenarioError::schema("options.stride", "must be at least 1"));
    }
    if !(opts.grouping_tol >= 0.0) {
        return Err(ScenarioError::schema("options.grouping_tol", "must be non-negative"));
    }
    if !(opts.pv_tol > 0.0 && opts.pv_tol <= 1e-3) {
        return Err(ScenarioError::schema("options.pv_tol", "must lie in (0, 1e-3]"));
    }

    let initial = match doc.initial {
        None => InitialState::Site(n - 1),
        Some(InitialDoc::Site(k)) => {
            if k == 0 || k > n {
                return Err(ScenarioError::schema("initial.site", format!("must lie in 1..={n}")));
            }
            InitialState::Site(k - 1)
        }
        Some(InitialDoc::Exciton(k)) => {
            if k == 0 || k > n {
                return Err(ScenarioError::schema("initial.exciton", format!("must lie in 1..={n}")));
            }
            InitialState::Exciton(k - 1)
        }
        Some(InitialDoc::Matrix(m)) => {
            let re = square(&m.re, n, "initial.matrix.re")?;
            let im = match m.im {
                Some(rows) => square(&rows, n, "initial.matrix.im")?,
                None => DMatrix::zeros(n, n),
            };
            let rho = DMatrix::from_fn(n, n, |i, j| C64::new(re[(i, j)], im[(i, j)]));
            DensityMatrix::new(rho.clone(), Basis::Site).map_err(|e| ScenarioError::physics("initial.matrix", e))?;
            InitialState::Matrix(rho)
        }
    };

    Ok(Scenario {
        name: doc.name,
        network,
        bath,
        options: SimulationOptions {
            redfield: RedfieldOptions {
                secular: opts.secular,
                lamb_shift: opts.lamb_shift,
                grouping_tol: opts.grouping_tol,
                pv_tol: opts.pv_tol,
                max_sites: opts.max_sites,
            },
            method: opts.method,
            dt: opts.dt,
            t_final: opts.t_final,
            stride: opts.stride,
        },
        initial,
    })
}

impl std::str::FromStr for Scenario {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, ScenarioError> {
        parse_scenario(s)
    }
}

impl Scenario {
    pub fn model(&self) -> Result<Model> {
        Model::new(self.network.clone(), self.bath)
    }

    /// Initial density matrix expressed in the exciton basis.
    pub fn initial_state(&self, basis: &ExcitonBasis) -> Result<DensityMatrix> {
        let n = basis.dim();
        let site_state = match &self.initial {
            InitialState::Site(k) => DensityMatrix::site_projector(n, *k)?,
            InitialState::Exciton(a) => return DensityMatrix::exciton_projector(n, *a),
            InitialState::Matrix(m) => DensityMatrix::new(m.clone(), Basis::Site)?,
        };
        transform_density(&site_state, Basis::Exciton, basis)
    }

    /// Exciton state carrying the largest share of the initial population.
    pub fn initial_exciton_state(&self, basis: &ExcitonBasis) -> Result<usize> {
        let rho = self.initial_state(basis)?;
        Ok(crate::system::argmax(rho.populations()))
    }
}
