//! Liouville-space propagation of the reduced density matrix.
//!
//! Density matrices are vectorized row-major, `ρ_ab ↦ a·N + b`, so the
//! generator acting on them is `L[(ab),(cd)] = −i ω_ab δ_ac δ_bd + R_ab,cd`.

pub mod expm;

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::redfield::RedfieldTensor;
use crate::system::{transform_density, ExcitonBasis};
use crate::units::thermal_frequency;
use crate::{Error, Result, C64};

/// Trace drift beyond which a trajectory is considered unstable.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Smallest eigenvalue below which a warning is logged.
pub const POSITIVITY_WARN: f64 = -1e-6;
/// Smallest eigenvalue below which propagation aborts.
pub const POSITIVITY_ABORT: f64 = -1e-3;
/// Upper bound on the default fixed RK4 step, ps.
pub const MAX_DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Site,
    Exciton,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    #[default]
    Expm,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "expm" => Ok(Method::Expm),
            other => Err(format!("unknown method {other:?}, expected rk4 or expm")),
        }
    }
}

/// Largest entry modulus of a complex matrix.
pub fn max_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
    basis: Basis,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12) and unit trace (1e-10).
    pub fn new(matrix: DMatrix<C64>, basis: Basis) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.ncols() });
        }
        let rho = Self { matrix, basis };
        if rho.hermiticity_defect() > 1e-12 {
            return Err(Error::InvalidArgument("density matrix is not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("density matrix trace is {tr}, expected 1")));
        }
        Ok(rho)
    }

    pub(crate) fn from_parts(matrix: DMatrix<C64>, basis: Basis) -> Self {
        Self { matrix, basis }
    }

    /// |s_site⟩⟨s_site| in the site basis (0-based index).
    pub fn site_projector(n: usize, site: usize) -> Result<Self> {
        Self::projector(n, site, Basis::Site)
    }

    pub fn exciton_projector(n: usize, state: usize) -> Result<Self> {
        Self::projector(n, state, Basis::Exciton)
    }

    fn projector(n: usize, k: usize, basis: Basis) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidArgument(format!("index {} out of range for {n} levels", k + 1)));
        }
        let mut m = DMatrix::zeros(n, n);
        m[(k, k)] = C64::new(1.0, 0.0);
        Ok(Self { matrix: m, basis })
    }

    pub fn maximally_mixed(n: usize, basis: Basis) -> Self {
        Self { matrix: DMatrix::identity(n, n) * C64::new(1.0 / n as f64, 0.0), basis }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_norm(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().min()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.matrix[(a, a)].re).collect()
    }

    fn to_vector(&self) -> Vec<C64> {
        let n = self.dim();
        (0..n * n).map(|i| self.matrix[(i / n, i % n)]).collect()
    }

    fn from_vector(v: &[C64], n: usize, basis: Basis) -> Self {
        Self { matrix: DMatrix::from_fn(n, n, |a, b| v[a * n + b]), basis }
    }
}

/// Generator of the master equation on vectorized exciton-basis density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    n: usize,
    matrix: DMatrix<C64>,
    basis: ExcitonBasis,
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn basis(&self) -> &ExcitonBasis {
        &self.basis
    }

    /// dρ/dt for an exciton-basis state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DMatrix<C64>> {
        if rho.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: rho.dim() });
        }
        if rho.basis() != Basis::Exciton {
            return Err(Error::InvalidArgument("Liouvillian acts on exciton-basis states".into()));
        }
        let v = DVector::from_vec(rho.to_vector());
        let out = &self.matrix * v;
        Ok(DMatrix::from_fn(self.n, self.n, |a, b| out[a * self.n + b]))
    }

    /// max over columns of |Σ_a L[(aa), ·]|; vanishes when the trace is conserved.
    pub fn trace_defect(&self) -> f64 {
        let n = self.n;
        (0..n * n)
            .map(|col| (0..n).map(|a| self.matrix[(a * n + a, col)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }

    /// Largest |ω_ab| and |R_ab,cd| entering the generator.
    fn fastest_scales(&self) -> (f64, f64) {
        let n = self.n;
        let mut omega: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                omega = omega.max(self.basis.transition_frequency(a, b).abs());
            }
        }
        let mut relax: f64 = 0.0;
        for i in 0..n * n {
            for j in 0..n * n {
                let mut z = self.matrix[(i, j)];
                if i == j {
                    // strip the coherent −iω_ab part
                    z += C64::new(0.0, self.basis.transition_frequency(i / n, i % n));
                }
                relax = relax.max(z.norm());
            }
        }
        (omega, relax)
    }

    /// Default fixed step: min(0.05·2π/max|ω_ab|, 0.05/max|R_ab,cd|, 1 fs).
    pub fn default_dt(&self) -> f64 {
        let (omega, relax) = self.fastest_scales();
        let mut dt = MAX_DEFAULT_DT;
        if omega > 0.0 {
            dt = dt.min(0.05 * std::f64::consts::TAU / omega);
        }
        if relax > 0.0 {
            dt = dt.min(0.05 / relax);
        }
        dt
    }
}

pub fn build_liouvillian(basis: &ExcitonBasis, tensor: &RedfieldTensor) -> Result<Liouvillian> {
    let n = basis.dim();
    if tensor.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: tensor.dim() });
    }
    let nn = n * n;
    let mut matrix = DMatrix::zeros(nn, nn);
    for a in 0..n {
        for b in 0..n {
            let row = a * n + b;
            for c in 0..n {
                for d in 0..n {
                    matrix[(row, c * n + d)] = tensor.get(a, b, c, d);
                }
            }
            matrix[(row, row)] -= C64::new(0.0, basis.transition_frequency(a, b));
        }
    }
    Ok(Liouvillian { n, matrix, basis: basis.clone() })
}

/// Output of [`evolve`]: exciton-basis states at the sampled times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Sample times, ps.
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub site_populations: Vec<Vec<f64>>,
    pub min_eigenvalues: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }

    /// |ρ_ab(t)| in the exciton basis at every sample.
    pub fn coherence_magnitudes(&self, a: usize, b: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.matrix()[(a, b)].norm()).collect()
    }

    /// Largest population of `site` over the whole trajectory.
    pub fn max_site_population(&self, site: usize) -> f64 {
        self.site_populations.iter().map(|p| p[site]).fold(f64::NEG_INFINITY, f64::max)
    }
}

struct Sampler<'a> {
    liouvillian: &'a Liouvillian,
    trace0: f64,
    warned: bool,
    out: Trajectory,
}

impl Sampler<'_> {
    fn record(&mut self, time: f64, v: &[C64]) -> Result<()> {
        let n = self.liouvillian.n;
        let state = DensityMatrix::from_vector(v, n, Basis::Exciton);
        let drift = (state.trace().re - self.trace0).abs();
        if !(drift <= TRACE_DRIFT_LIMIT) {
            return Err(Error::Instability { time, drift });
        }
        let min_eig = state.min_eigenvalue();
        if min_eig < POSITIVITY_ABORT {
            return Err(Error::Positivity { time, min_eig });
        }
        if min_eig < POSITIVITY_WARN && !self.warned {
            warn!("density matrix eigenvalue {min_eig:e} at t = {time} ps");
            self.warned = true;
        }
        self.out.site_populations.push(site_populations(&state, &self.liouvillian.basis)?);
        self.out.min_eigenvalues.push(min_eig);
        self.out.times.push(time);
        self.out.states.push(state);
        Ok(())
    }
}

fn matvec(l: &[C64], x: &[C64], y: &mut [C64]) {
    let m = x.len();
    for (row, yi) in l.chunks_exact(m).zip(y.iter_mut()) {
        let mut acc = C64::new(0.0, 0.0);
        for (lij, xj) in row.iter().zip(x) {
            acc += lij * xj;
        }
        *yi = acc;
    }
}

/// Propagates `rho0` (exciton basis) to `t_final`.
///
/// `dt` is the integration step for RK4; samples are taken every `stride` steps and at
/// the end. With [`Method::Expm`] the exact propagator `exp(L·stride·dt)` is formed once
/// and applied between samples, so `dt` only sets the sampling grid.
pub fn evolve(
    liouvillian: &Liouvillian,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
    stride: usize,
    method: Method,
) -> Result<Trajectory> {
    let n = liouvillian.n;
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho0.dim() });
    }
    if rho0.basis() != Basis::Exciton {
        return Err(Error::InvalidArgument("initial state must be in the exciton basis".into()));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_final >= dt) || !t_final.is_finite() {
        return Err(Error::InvalidArgument(format!("t_final must be at least dt, got {t_final}")));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be at least 1".into()));
    }
    let steps = (t_final / dt).round() as usize;
    let mut sampler = Sampler {
        liouvillian,
        trace0: rho0.trace().re,
        warned: false,
        out: Trajectory { times: vec![], states: vec![], site_populations: vec![], min_eigenvalues: vec![] },
    };
    let mut v = rho0.to_vector();
    sampler.record(0.0, &v)?;

    match method {
        Method::Rk4 => {
            let l: Vec<C64> = liouvillian.matrix.transpose().iter().copied().collect();
            let m = v.len();
            let zero = C64::new(0.0, 0.0);
            let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
                (vec![zero; m], vec![zero; m], vec![zero; m], vec![zero; m], vec![zero; m]);
            let half = C64::new(0.5 * dt, 0.0);
            let full = C64::new(dt, 0.0);
            let sixth = C64::new(dt / 6.0, 0.0);
            let two = C64::new(2.0, 0.0);
            for step in 1..=steps {
                matvec(&l, &v, &mut k1);
                for i in 0..m {
                    tmp[i] = v[i] + half * k1[i];
                }
                matvec(&l, &tmp, &mut k2);
                for i in 0..m {
                    tmp[i] = v[i] + half * k2[i];
                }
                matvec(&l, &tmp, &mut k3);
                for i in 0..m {
                    tmp[i] = v[i] + full * k3[i];
                }
                matvec(&l, &tmp, &mut k4);
                for i in 0..m {
                    v[i] += sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
                }
                if step % stride == 0 || step == steps {
                    sampler.record(step as f64 * dt, &v)?;
                }
            }
        }
        Method::Expm => {
            let propagator = |k: usize| expm::expm(&(&liouvillian.matrix * C64::new(k as f64 * dt, 0.0)));
            let chunk = propagator(stride.min(steps))?;
            let mut step = 0;
            let mut x = DVector::from_vec(v);
            while step + stride <= steps {
                x = &chunk * x;
                step += stride;
                sampler.record(step as f64 * dt, x.as_slice())?;
            }
            if step < steps {
                x = propagator(steps - step)? * x;
                sampler.record(steps as f64 * dt, x.as_slice())?;
            }
        }
    }
    Ok(sampler.out)
}

/// Boltzmann state over the exciton energies, in the exciton basis.
pub fn thermal_state(basis: &ExcitonBasis, temperature: f64) -> Result<DensityMatrix> {
    let wt = thermal_frequency(temperature)?;
    let n = basis.dim();
    let ground = basis.energies.min();
    let weights: Vec<f64> = basis.energies.iter().map(|e| (-(e - ground) / wt).exp()).collect();
    let z: f64 = weights.iter().sum();
    let diag = DVector::from_iterator(n, weights.iter().map(|w| C64::new(w / z, 0.0)));
    Ok(DensityMatrix::from_parts(DMatrix::from_diagonal(&diag), Basis::Exciton))
}

/// Diagonal of the state in the site basis.
pub fn site_populations(state: &DensityMatrix, basis: &ExcitonBasis) -> Result<Vec<f64>> {
    Ok(transform_density(state, Basis::Site, basis)?.populations())
}

/// Normalized kernel of the generator.
pub fn steady_state(liouvillian: &Liouvillian) -> Result<DensityMatrix> {
    let n = liouvillian.n;
    let nn = n * n;
    let mut a = liouvillian.matrix.clone();
    let mut rhs = DVector::zeros(nn);
    // The population rows sum to zero, so one of them can carry the trace condition.
    for col in 0..nn {
        a[(0, col)] = C64::new(0.0, 0.0);
    }
    for k in 0..n {
        a[(0, k * n + k)] = C64::new(1.0, 0.0);
    }
    rhs[0] = C64::new(1.0, 0.0);
    let lu = a.lu();
    let x = lu.solve(&rhs).ok_or(Error::SingularGenerator)?;
    let residual = max_norm(&DMatrix::from_column_slice(nn, 1, (&liouvillian.matrix * &x).as_slice()));
    let scale = max_norm(&liouvillian.matrix).max(f64::MIN_POSITIVE);
    if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) || residual > 1e-8 * scale {
        return Err(Error::SingularGenerator);
    }
    Ok(DensityMatrix::from_vector(x.as_slice(), n, Basis::Exciton))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathModel;
    use crate::redfield::{assemble_tensor, compute_zeta, RedfieldOptions, ZetaTensor};
    use crate::system::{build_hamiltonian, diagonalize, CouplingRule, Site, SiteNetwork};
    use approx::assert_relative_eq;

    fn dimer(split_mev: f64) -> ExcitonBasis {
        let sites = vec![Site::new([0.0; 3], 1000.0), Site::new([5.0, 0.0, 0.0], 1000.0 + split_mev)];
        let h = build_hamiltonian(&SiteNetwork::new(sites, CouplingRule::Explicit(DMatrix::zeros(2, 2))).unwrap())
            .unwrap();
        diagonalize(&h)
    }

    fn chain() -> (ExcitonBasis, DMatrix<f64>) {
        let sites = vec![
            Site::new([0.0, 0.0, 0.0], 1000.0),
            Site::new([5.0, 0.0, 0.0], 1000.7),
            Site::new([10.5, 0.0, 0.0], 1001.2),
        ];
        let h = build_hamiltonian(&SiteNetwork::new(sites, CouplingRule::default()).unwrap()).unwrap();
        (diagonalize(&h), h.distances)
    }

    fn coherent(basis: &ExcitonBasis) -> Liouvillian {
        let tensor =
            assemble_tensor(basis, &ZetaTensor::zeros(basis.dim()), &BathModel::GAAS_10K, &RedfieldOptions::default())
                .unwrap();
        build_liouvillian(basis, &tensor).unwrap()
    }

    #[test]
    fn coherent_generator_actions() {
        let (basis, _) = chain();
        let l = coherent(&basis);
        let mixed = DensityMatrix::from_parts(
            DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(0.2, 0.0), C64::new(0.3, 0.0), C64::new(0.5, 0.0)])),
            Basis::Exciton,
        );
        assert_eq!(max_norm(&l.apply(&mixed).unwrap()), 0.0);

        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = C64::new(0.25, 0.1);
        m[(1, 0)] = m[(0, 1)].conj();
        let state = DensityMatrix::from_parts(m.clone(), Basis::Exciton);
        let d = l.apply(&state).unwrap();
        let w01 = basis.transition_frequency(0, 1);
        assert!((d[(0, 1)] - C64::new(0.0, -w01) * m[(0, 1)]).norm() < 1e-13);
        assert_eq!(l.trace_defect(), 0.0);
    }

    #[test]
    fn validation() {
        assert!(DensityMatrix::new(DMatrix::identity(2, 2) * C64::new(0.7, 0.0), Basis::Site).is_err());
        let mut m = DMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::new(m, Basis::Site).is_err());
        assert!(DensityMatrix::site_projector(2, 2).is_err());

        let (basis, _) = chain();
        let l = coherent(&basis);
        let rho = DensityMatrix::exciton_projector(3, 0).unwrap();
        assert!(evolve(&l, &rho, 1.0, 0.0, 1, Method::Rk4).is_err());
        assert!(evolve(&l, &rho, 0.001, 0.01, 1, Method::Rk4).is_err());
        assert!(evolve(&l, &rho, 1.0, 0.01, 0, Method::Rk4).is_err());
        assert!(evolve(&l, &DensityMatrix::site_projector(3, 0).unwrap(), 1.0, 0.01, 1, Method::Rk4).is_err());
        assert!(evolve(&l, &DensityMatrix::exciton_projector(2, 0).unwrap(), 1.0, 0.01, 1, Method::Rk4).is_err());
    }

    #[test]
    fn unitary_limit_keeps_populations_and_coherence_moduli() {
        let (basis, _) = chain();
        let l = coherent(&basis);
        let rho0 = transform_density(&DensityMatrix::site_projector(3, 2).unwrap(), Basis::Exciton, &basis).unwrap();
        for method in [Method::Rk4, Method::Expm] {
            let traj = evolve(&l, &rho0, 50.0, 0.001, 1000, method).unwrap();
            assert_eq!(traj.len(), 51);
            for s in &traj.states {
                for a in 0..3 {
                    for b in 0..3 {
                        assert!((s.matrix()[(a, b)].norm() - rho0.matrix()[(a, b)].norm()).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn single_site_is_static() {
        let net = SiteNetwork::new(vec![Site::new([0.0; 3], 1200.0)], CouplingRule::default()).unwrap();
        let h = build_hamiltonian(&net).unwrap();
        let basis = diagonalize(&h);
        let zeta = compute_zeta(&basis, &h.distances, 3.0).unwrap();
        let tensor = assemble_tensor(&basis, &zeta, &BathModel::GAAS_10K, &RedfieldOptions::default()).unwrap();
        let l = build_liouvillian(&basis, &tensor).unwrap();
        let rho0 = DensityMatrix::exciton_projector(1, 0).unwrap();
        for method in [Method::Rk4, Method::Expm] {
            let traj = evolve(&l, &rho0, 10.0, 0.01, 100, method).unwrap();
            for s in &traj.states {
                assert!((s.matrix()[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn expm_handles_partial_final_chunk() {
        let (basis, dist) = chain();
        let zeta = compute_zeta(&basis, &dist, 3.0).unwrap();
        let tensor = assemble_tensor(&basis, &zeta, &BathModel::GAAS_10K, &RedfieldOptions::default()).unwrap();
        let l = build_liouvillian(&basis, &tensor).unwrap();
        let rho0 = DensityMatrix::exciton_projector(3, 2).unwrap();
        let a = evolve(&l, &rho0, 2.5, 0.01, 100, Method::Expm).unwrap();
        assert_eq!(a.times.len(), 4);
        assert_relative_eq!(*a.times.last().unwrap(), 2.5, epsilon = 1e-12);
        let b = evolve(&l, &rho0, 2.5, 0.01, 250, Method::Expm).unwrap();
        assert!(max_norm(&(a.last().unwrap().matrix() - b.last().unwrap().matrix())) < 1e-12);
    }

    #[test]
    fn thermal_dimer() {
        let basis = dimer(1.6);
        let rho = thermal_state(&basis, 10.0).unwrap();
        let p = rho.populations();
        assert!((p[0] - 0.8649).abs() < 1e-4);
        assert!((p[1] - 0.1351).abs() < 1e-4);
        assert_relative_eq!(p[1] / p[0], (-1.6f64 / 0.86173332620).exp(), max_relative = 1e-9);

        let hot = thermal_state(&basis, 1e9).unwrap().populations();
        assert!((hot[0] - 0.5).abs() < 1e-6);
        let degenerate = thermal_state(&dimer(0.0), 10.0).unwrap().populations();
        assert_eq!(degenerate[0], degenerate[1]);
        assert!(thermal_state(&basis, 0.0).is_err());
    }

    #[test]
    fn site_population_cases() {
        let (basis, _) = chain();
        for a in 0..3 {
            let p = site_populations(&DensityMatrix::exciton_projector(3, a).unwrap(), &basis).unwrap();
            for n in 0..3 {
                assert_relative_eq!(p[n], basis.site_weight(n, a), epsilon = 1e-14);
            }
        }
        let mixed = site_populations(&DensityMatrix::maximally_mixed(3, Basis::Exciton), &basis).unwrap();
        for p in mixed {
            assert_relative_eq!(p, 1.0 / 3.0, epsilon = 1e-14);
        }
        // Symmetric dimer: both eigenstates are spread evenly over the sites.
        let sites = vec![Site::new([0.0; 3], 1000.0), Site::new([5.0, 0.0, 0.0], 1000.0)];
        let h = build_hamiltonian(&SiteNetwork::new(sites, CouplingRule::default()).unwrap()).unwrap();
        let sym = diagonalize(&h);
        let p = site_populations(&thermal_state(&sym, 10.0).unwrap(), &sym).unwrap();
        assert_relative_eq!(p[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(p[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn steady_state_of_coherent_generator_is_singular() {
        let (basis, _) = chain();
        assert_eq!(steady_state(&coherent(&basis)), Err(Error::SingularGenerator));
    }

    #[test]
    fn default_step_is_capped() {
        let (basis, dist) = chain();
        let zeta = compute_zeta(&basis, &dist, 3.0).unwrap();
        let tensor = assemble_tensor(&basis, &zeta, &BathModel::GAAS_10K, &RedfieldOptions::default()).unwrap();
        let l = build_liouvillian(&basis, &tensor).unwrap();
        let dt = l.default_dt();
        assert!(dt <= MAX_DEFAULT_DT && dt > 0.0);
    }
}
