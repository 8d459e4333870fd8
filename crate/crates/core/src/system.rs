//! Site networks, the single-exciton Hamiltonian and its eigenbasis.

use nalgebra::{DMatrix, DVector};

use crate::propagate::{Basis, DensityMatrix};
use crate::units::energy_to_angular_frequency;
use crate::{Error, Result, C64};

/// Default transition-dipole coupling strength in meV·nm³ (perpendicular dipoles).
pub const DEFAULT_DIPOLE_STRENGTH: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    /// Position in nm.
    pub position: [f64; 3],
    /// Excitation energy in meV.
    pub energy: f64,
}

impl Site {
    pub fn new(position: [f64; 3], energy: f64) -> Self {
        Self { position, energy }
    }

    pub fn distance(&self, other: &Site) -> f64 {
        self.position
            .iter()
            .zip(&other.position)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingRule {
    /// Symmetric coupling matrix in meV with zero diagonal.
    Explicit(DMatrix<f64>),
    /// J_mn = strength / R_mn³ with strength in meV·nm³.
    DipolePerpendicular { strength: f64 },
}

impl Default for CouplingRule {
    fn default() -> Self {
        CouplingRule::DipolePerpendicular { strength: DEFAULT_DIPOLE_STRENGTH }
    }
}

/// Sites with positions and energies plus the rule producing inter-site couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteNetwork {
    sites: Vec<Site>,
    coupling: CouplingRule,
}

impl SiteNetwork {
    pub fn new(sites: Vec<Site>, coupling: CouplingRule) -> Result<Self> {
        let n = sites.len();
        if n == 0 {
            return Err(Error::InvalidArgument("a network needs at least one site".into()));
        }
        for (i, site) in sites.iter().enumerate() {
            if site.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidGeometry(format!("site {} has a non-finite position", i + 1)));
            }
            if !site.energy.is_finite() {
                return Err(Error::InvalidArgument(format!("site {} has a non-finite energy", i + 1)));
            }
        }
        for m in 0..n {
            for k in (m + 1)..n {
                if !(sites[m].distance(&sites[k]) > 0.0) {
                    return Err(Error::InvalidGeometry(format!(
                        "sites {} and {} coincide",
                        m + 1,
                        k + 1
                    )));
                }
            }
        }
        match &coupling {
            CouplingRule::Explicit(j) => {
                if j.nrows() != n || j.ncols() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: j.nrows().max(j.ncols()) });
                }
                for m in 0..n {
                    if j[(m, m)] != 0.0 {
                        return Err(Error::InvalidArgument(format!(
                            "coupling matrix has nonzero diagonal at site {}",
                            m + 1
                        )));
                    }
                    for k in 0..n {
                        if !j[(m, k)].is_finite() || j[(m, k)] != j[(k, m)] {
                            return Err(Error::InvalidArgument(format!(
                                "coupling matrix is not finite and symmetric at ({}, {})",
                                m + 1,
                                k + 1
                            )));
                        }
                    }
                }
            }
            CouplingRule::DipolePerpendicular { strength } => {
                if !strength.is_finite() {
                    return Err(Error::InvalidArgument("dipole strength must be finite".into()));
                }
            }
        }
        Ok(Self { sites, coupling })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn coupling(&self) -> &CouplingRule {
        &self.coupling
    }

    /// Multiplies the Hamiltonian by `factor` while keeping the coupling rule physical:
    /// energies scale by `factor`, distances by `factor^(-1/3)` so that 1/R³ couplings
    /// scale by `factor` as well. Explicit couplings are scaled directly.
    pub fn scaled_geometry(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {factor}")));
        }
        let shrink = factor.powf(-1.0 / 3.0);
        let sites = self
            .sites
            .iter()
            .map(|s| Site::new(s.position.map(|x| x * shrink), s.energy * factor))
            .collect();
        let coupling = match &self.coupling {
            CouplingRule::Explicit(j) => CouplingRule::Explicit(j * factor),
            rule => rule.clone(),
        };
        Self::new(sites, coupling)
    }
}

/// Real symmetric site-basis Hamiltonian in rad/ps together with the inter-site distances.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteHamiltonian {
    pub matrix: DMatrix<f64>,
    /// Pairwise distances in nm.
    pub distances: DMatrix<f64>,
}

impl SiteHamiltonian {
    /// Wraps an arbitrary symmetric matrix (rad/ps). Distances default to zero, which is
    /// only meaningful for tests that never build a bath kernel from them.
    pub fn from_matrix(matrix: DMatrix<f64>, distances: Option<DMatrix<f64>>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.ncols() });
        }
        for m in 0..n {
            for k in 0..n {
                if matrix[(m, k)] != matrix[(k, m)] {
                    return Err(Error::InvalidArgument("Hamiltonian must be symmetric".into()));
                }
            }
        }
        let distances = distances.unwrap_or_else(|| DMatrix::zeros(n, n));
        if distances.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, got: distances.nrows() });
        }
        Ok(Self { matrix, distances })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Eigenenergies (ascending, rad/ps) and the orthogonal matrix whose columns are the
/// exciton states expressed in the site basis, `vectors[(n, a)] = <s_n|e_a>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitonBasis {
    pub energies: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl ExcitonBasis {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// ω_ab = ε_a − ε_b.
    pub fn transition_frequency(&self, a: usize, b: usize) -> f64 {
        self.energies[a] - self.energies[b]
    }

    /// Matrix of all ω_ab.
    pub fn transition_frequencies(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |a, b| self.transition_frequency(a, b))
    }

    /// Weight |U_na|² of site `n` in exciton state `a`.
    pub fn site_weight(&self, n: usize, a: usize) -> f64 {
        self.vectors[(n, a)].powi(2)
    }

    /// Site with the largest weight in exciton state `a`, lowest index on ties.
    pub fn majority_site(&self, a: usize) -> usize {
        argmax((0..self.dim()).map(|n| self.site_weight(n, a)))
    }

    /// Same eigenvectors with every energy multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { energies: &self.energies * factor, vectors: self.vectors.clone() }
    }
}

/// First index of the maximum; ties go to the lowest index.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

pub fn coupling_from_distance(distance: f64, strength: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::InvalidGeometry(format!("distance must be positive, got {distance}")));
    }
    Ok(strength / distance.powi(3))
}

pub fn build_hamiltonian(network: &SiteNetwork) -> Result<SiteHamiltonian> {
    let n = network.len();
    let sites = network.sites();
    let mut matrix = DMatrix::zeros(n, n);
    let mut distances = DMatrix::zeros(n, n);
    for m in 0..n {
        matrix[(m, m)] = energy_to_angular_frequency(sites[m].energy)?;
        for k in (m + 1)..n {
            let r = sites[m].distance(&sites[k]);
            let coupling = match network.coupling() {
                CouplingRule::Explicit(j) => {
                    if !(r > 0.0) {
                        return Err(Error::InvalidGeometry(format!("sites {} and {} coincide", m + 1, k + 1)));
                    }
                    j[(m, k)]
                }
                CouplingRule::DipolePerpendicular { strength } => coupling_from_distance(r, *strength)?,
            };
            let w = energy_to_angular_frequency(coupling)?;
            matrix[(m, k)] = w;
            matrix[(k, m)] = w;
            distances[(m, k)] = r;
            distances[(k, m)] = r;
        }
    }
    Ok(SiteHamiltonian { matrix, distances })
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi diagonalization.
///
/// Eigenvalues come out ascending. Each eigenvector is normalized so that its entry of
/// largest magnitude is positive (the lowest such site index wins a tie), and exactly
/// degenerate eigenvalues are ordered by that pivot index. Rotation angles depend only
/// on ratios of matrix entries, so `s·H` yields the same vectors as `H`.
pub fn diagonalize(h: &SiteHamiltonian) -> ExcitonBasis {
    let n = h.dim();
    let mut a = h.matrix.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let norm = a.norm();

    for sweep in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum();
        if off.sqrt() <= 1e-18 * norm || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // Negligible against both diagonal entries: drop it once the sweep has settled.
                let g = 100.0 * apq.abs();
                if sweep > 3
                    && a[(p, p)].abs() + g == a[(p, p)].abs()
                    && a[(q, q)].abs() + g == a[(q, q)].abs()
                {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let g = a[(r, p)];
                        let hh = a[(r, q)];
                        let rp = g - s * (hh + g * tau);
                        let rq = hh + s * (g - hh * tau);
                        a[(r, p)] = rp;
                        a[(p, r)] = rp;
                        a[(r, q)] = rq;
                        a[(q, r)] = rq;
                    }
                    let g = v[(r, p)];
                    let hh = v[(r, q)];
                    v[(r, p)] = g - s * (hh + g * tau);
                    v[(r, q)] = hh + s * (g - hh * tau);
                }
            }
        }
    }

    let mut pivots = Vec::with_capacity(n);
    for col in 0..n {
        let max = (0..n).map(|r| v[(r, col)].abs()).fold(0.0, f64::max);
        let pivot = (0..n).find(|&r| v[(r, col)].abs() >= max * (1.0 - 1e-12)).unwrap_or(0);
        if v[(pivot, col)] < 0.0 {
            v.column_mut(col).neg_mut();
        }
        pivots.push(pivot);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let degeneracy_tol = 1e-12 * norm.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && a[(order[end], order[end])] - a[(order[end - 1], order[end - 1])] <= degeneracy_tol {
            end += 1;
        }
        order[start..end].sort_by_key(|&i| pivots[i]);
        start = end;
    }

    let energies = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    let basis = ExcitonBasis { energies, vectors };
    debug_assert!(check_eigenbasis(h, &basis).is_ok());
    basis
}

/// Verifies orthogonality (1e-12 per entry) and the eigen-residual (1e-10·‖H‖).
pub fn check_eigenbasis(h: &SiteHamiltonian, basis: &ExcitonBasis) -> Result<()> {
    let n = h.dim();
    let u = &basis.vectors;
    let gram = u.transpose() * u;
    let ortho = (&gram - DMatrix::<f64>::identity(n, n)).abs().max();
    if ortho > 1e-12 {
        return Err(Error::InvalidArgument(format!("eigenvectors not orthonormal: {ortho:e}")));
    }
    let residual = (&h.matrix * u - u * DMatrix::from_diagonal(&basis.energies)).abs().max();
    if residual > 1e-10 * h.matrix.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument(format!("eigen-residual too large: {residual:e}")));
    }
    Ok(())
}

/// Changes the basis tag of a density matrix: ρ_exciton = Uᵀ ρ_site U, ρ_site = U ρ_exciton Uᵀ.
pub fn transform_density(rho: &DensityMatrix, to: Basis, basis: &ExcitonBasis) -> Result<DensityMatrix> {
    let n = basis.dim();
    if rho.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho.dim() });
    }
    if rho.basis() == to {
        return Ok(rho.clone());
    }
    let u = basis.vectors.map(|x| C64::new(x, 0.0));
    let ut = u.transpose();
    let matrix = match to {
        Basis::Exciton => &ut * rho.matrix() * &u,
        Basis::Site => &u * rho.matrix() * &ut,
    };
    Ok(DensityMatrix::from_parts(matrix, to))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::HBAR_MEV_PS;
    use approx::assert_relative_eq;

    fn line(energies: &[f64], spacing: f64) -> SiteNetwork {
        let sites = energies
            .iter()
            .enumerate()
            .map(|(i, &e)| Site::new([i as f64 * spacing, 0.0, 0.0], e))
            .collect();
        SiteNetwork::new(sites, CouplingRule::default()).unwrap()
    }

    #[test]
    fn dipole_coupling() {
        assert_eq!(coupling_from_distance(1.0, 100.0).unwrap(), 100.0);
        assert_relative_eq!(coupling_from_distance(5.0, 100.0).unwrap(), 0.8, epsilon = 1e-14);
        assert_relative_eq!(coupling_from_distance(10.0, 100.0).unwrap(), 0.1, epsilon = 1e-14);
        assert!(matches!(coupling_from_distance(0.0, 100.0), Err(Error::InvalidGeometry(_))));
        assert!(matches!(coupling_from_distance(-2.0, 100.0), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn hamiltonian_entries() {
        let h = build_hamiltonian(&line(&[1000.0], 1.0)).unwrap();
        assert!((h.matrix[(0, 0)] - 1519.27).abs() < 0.01);

        let h = build_hamiltonian(&line(&[1000.0, 1000.0], 5.0)).unwrap();
        assert!((h.matrix[(0, 1)] - 1.21541).abs() < 1e-4);
        assert_eq!(h.matrix[(0, 1)], h.matrix[(1, 0)]);
        assert_eq!(h.distances[(0, 1)], 5.0);

        let sites = vec![Site::new([0.0; 3], 10.0), Site::new([2.0, 0.0, 0.0], 12.0)];
        let net = SiteNetwork::new(sites, CouplingRule::Explicit(DMatrix::zeros(2, 2))).unwrap();
        let h = build_hamiltonian(&net).unwrap();
        assert_eq!(h.matrix[(0, 1)], 0.0);
        assert_relative_eq!(h.matrix[(1, 1)], 12.0 / HBAR_MEV_PS);
    }

    #[test]
    fn network_validation() {
        let same = vec![Site::new([1.0, 2.0, 3.0], 0.0), Site::new([1.0, 2.0, 3.0], 1.0)];
        assert!(matches!(
            SiteNetwork::new(same, CouplingRule::default()),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(SiteNetwork::new(vec![], CouplingRule::default()).is_err());
        let sites = vec![Site::new([0.0; 3], 0.0), Site::new([1.0, 0.0, 0.0], 0.0)];
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(SiteNetwork::new(sites.clone(), CouplingRule::Explicit(asym)).is_err());
        let diag = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(SiteNetwork::new(sites, CouplingRule::Explicit(diag)).is_err());
    }

    #[test]
    fn diagonal_input_gives_identity() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let basis = diagonalize(&SiteHamiltonian::from_matrix(m, None).unwrap());
        assert_eq!(basis.energies.as_slice(), &[-1.0, 2.0, 3.0]);
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(basis.vectors, expected);
    }

    #[test]
    fn symmetric_dimer() {
        let (e, j) = (5.0, 0.75);
        let m = DMatrix::from_row_slice(2, 2, &[e, j, j, e]);
        let basis = diagonalize(&SiteHamiltonian::from_matrix(m, None).unwrap());
        assert_relative_eq!(basis.energies[0], e - j, epsilon = 1e-14);
        assert_relative_eq!(basis.energies[1], e + j, epsilon = 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(basis.vectors[(0, 0)], r, epsilon = 1e-14);
        assert_relative_eq!(basis.vectors[(1, 0)], -r, epsilon = 1e-14);
        assert_relative_eq!(basis.vectors[(0, 1)], r, epsilon = 1e-14);
        assert_relative_eq!(basis.vectors[(1, 1)], r, epsilon = 1e-14);
    }

    #[test]
    fn degenerate_levels_are_ordered_by_pivot() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]));
        let basis = diagonalize(&SiteHamiltonian::from_matrix(m, None).unwrap());
        assert_eq!(basis.energies.as_slice(), &[0.0, 0.0, 1.0, 1.0]);
        let pivots: Vec<usize> = (0..4).map(|a| basis.majority_site(a)).collect();
        assert_eq!(pivots, vec![1, 3, 0, 2]);
    }

    #[test]
    fn dimer_density_transform() {
        let network = line(&[1000.0, 1000.0], 5.0);
        let basis = diagonalize(&build_hamiltonian(&network).unwrap());
        let rho = DensityMatrix::site_projector(2, 0).unwrap();
        let ex = transform_density(&rho, Basis::Exciton, &basis).unwrap();
        assert_relative_eq!(ex.matrix()[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(ex.matrix()[(1, 1)].re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(ex.matrix()[(0, 1)].norm(), 0.5, epsilon = 1e-12);
        let back = transform_density(&ex, Basis::Site, &basis).unwrap();
        assert!(crate::propagate::max_norm(&(back.matrix() - rho.matrix())) < 1e-12);
        assert!(transform_density(&DensityMatrix::site_projector(3, 0).unwrap(), Basis::Exciton, &basis).is_err());
    }

    #[test]
    fn identity_transform_leaves_state() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 2.0]));
        let basis = diagonalize(&SiteHamiltonian::from_matrix(m, None).unwrap());
        let rho = DensityMatrix::site_projector(3, 2).unwrap();
        let ex = transform_density(&rho, Basis::Exciton, &basis).unwrap();
        assert_eq!(ex.matrix(), rho.matrix());
    }

    #[test]
    fn site_three_projector_weights() {
        let network = line(&[0.0, 0.6, 1.1], 4.0);
        let basis = diagonalize(&build_hamiltonian(&network).unwrap());
        let rho = DensityMatrix::site_projector(3, 2).unwrap();
        let ex = transform_density(&rho, Basis::Exciton, &basis).unwrap();
        let pops: f64 = (0..3).map(|a| ex.matrix()[(a, a)].re).sum();
        assert_relative_eq!(pops, 1.0, epsilon = 1e-12);
        for a in 0..3 {
            assert_relative_eq!(ex.matrix()[(a, a)].re, basis.site_weight(2, a), epsilon = 1e-12);
        }
    }
}
