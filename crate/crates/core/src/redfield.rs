//! Redfield relaxation tensor and factored population-transfer rates.
//!
//! With real eigenvectors `U` the system factor is
//! `ζ_ab,cd = Σ_nm U_na U_nb U_mc U_md exp(−R_mn/R_corr)`, and
//! `Γ_ab,cd = ζ_ab,cd [½ C(ω_dc) + (i/2π) P∫ C(ω)/(ω_dc − ω) dω]`.
//! The full tensor is
//!
//! ```text
//! R_ab,cd = Γ_db,ac + Γ*_ca,bd − δ_bd Σ_e Γ_ae,ec − δ_ac Σ_e Γ*_be,ed
//! ```
//!
//! and its population block reduces to `k_ab = R_bb,aa = ζ_ab,ba C(ω_ab)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::bath::{correlation_c, pv_hilbert, spatial_correlation, BathModel};
use crate::system::ExcitonBasis;
use crate::{Error, Result, C64};

/// Relative tolerance for the principal-value integrals inside Γ.
pub const PV_TOL: f64 = 1e-10;

/// Default |ω_ab − ω_cd| below which the secular filter keeps a coupling (rad/ps).
pub const DEFAULT_GROUPING_TOL: f64 = 1e-9;

pub const DEFAULT_MAX_SITES: usize = 10;

#[inline]
fn idx4(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * n + b) * n + c) * n + d
}

/// Dense four-index system factor ζ_ab,cd.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaTensor {
    n: usize,
    data: Vec<f64>,
}

impl ZetaTensor {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[idx4(self.n, a, b, c, d)]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&z| z == 0.0)
    }

    /// All-zero tensor: a system that does not see the bath.
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n.pow(4)] }
    }
}

pub fn compute_zeta(basis: &ExcitonBasis, distances: &DMatrix<f64>, r_corr: f64) -> Result<ZetaTensor> {
    let n = basis.dim();
    if distances.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, got: distances.nrows() });
    }
    let mut kernel = DMatrix::zeros(n, n);
    for m in 0..n {
        for k in 0..n {
            kernel[(m, k)] = spatial_correlation(distances[(m, k)], r_corr)?;
        }
    }
    let u = &basis.vectors;
    // q[(ab, n)] = U_na U_nb
    let q = DMatrix::from_fn(n * n, n, |ab, site| u[(site, ab / n)] * u[(site, ab % n)]);
    let zeta = &q * &kernel * q.transpose();
    let mut data = vec![0.0; n.pow(4)];
    for ab in 0..n * n {
        for cd in 0..n * n {
            data[ab * n * n + cd] = zeta[(ab, cd)];
        }
    }
    Ok(ZetaTensor { n, data })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedfieldOptions {
    pub secular: bool,
    pub lamb_shift: bool,
    pub grouping_tol: f64,
    pub pv_tol: f64,
    pub max_sites: usize,
}

impl Default for RedfieldOptions {
    fn default() -> Self {
        Self {
            secular: false,
            lamb_shift: true,
            grouping_tol: DEFAULT_GROUPING_TOL,
            pv_tol: PV_TOL,
            max_sites: DEFAULT_MAX_SITES,
        }
    }
}

/// Complex relaxation tensor R_ab,cd in rad/ps.
#[derive(Debug, Clone, PartialEq)]
pub struct RedfieldTensor {
    n: usize,
    data: Vec<C64>,
    /// ω_ab in rad/ps.
    pub omega: DMatrix<f64>,
    pub secular: bool,
    pub lamb_shift: bool,
}

impl RedfieldTensor {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> C64 {
        self.data[idx4(self.n, a, b, c, d)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max over (c, d) of |Σ_a R_aa,cd|.
    pub fn trace_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for c in 0..n {
            for d in 0..n {
                let s: C64 = (0..n).map(|a| self.get(a, a, c, d)).sum();
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    /// max |R_ab,cd − conj(R_ba,dc)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        worst = worst.max((self.get(a, b, c, d) - self.get(b, a, d, c).conj()).norm());
                    }
                }
            }
        }
        worst
    }
}

/// Γ for one index quadruple at frequency `omega`.
pub fn compute_gamma(
    zeta: &ZetaTensor,
    (a, b, c, d): (usize, usize, usize, usize),
    omega: f64,
    bath: &BathModel,
    lamb_shift: bool,
) -> Result<C64> {
    let z = zeta.get(a, b, c, d);
    if z == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let re = 0.5 * z * correlation_c(omega, bath);
    let im = if lamb_shift { z / (2.0 * PI) * pv_hilbert(omega, bath, PV_TOL)? } else { 0.0 };
    Ok(C64::new(re, im))
}

/// Bath response `½C(ω_sr) + (i/2π)PV(ω_sr)` for every ordered pair of levels,
/// with each distinct frequency evaluated once.
fn bath_response(basis: &ExcitonBasis, bath: &BathModel, options: &RedfieldOptions) -> Result<DMatrix<C64>> {
    let n = basis.dim();
    let omega = basis.transition_frequencies();
    let mut distinct: Vec<f64> = omega.iter().copied().collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|x, y| x.to_bits() == y.to_bits());
    let values: Vec<(u64, C64)> = distinct
        .par_iter()
        .map(|&w| {
            let re = 0.5 * correlation_c(w, bath);
            let im = if options.lamb_shift { pv_hilbert(w, bath, options.pv_tol)? / (2.0 * PI) } else { 0.0 };
            Ok((w.to_bits(), C64::new(re, im)))
        })
        .collect::<Result<_>>()?;
    let memo: HashMap<u64, C64> = values.into_iter().collect();
    Ok(DMatrix::from_fn(n, n, |s, r| memo[&omega[(s, r)].to_bits()]))
}

pub fn assemble_tensor(
    basis: &ExcitonBasis,
    zeta: &ZetaTensor,
    bath: &BathModel,
    options: &RedfieldOptions,
) -> Result<RedfieldTensor> {
    let n = basis.dim();
    if zeta.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: zeta.dim() });
    }
    if n > options.max_sites {
        return Err(Error::InvalidArgument(format!(
            "{n} sites exceed the configured maximum of {}",
            options.max_sites
        )));
    }
    let omega = basis.transition_frequencies();
    if zeta.is_zero() {
        let tensor = RedfieldTensor {
            n,
            data: vec![C64::new(0.0, 0.0); n.pow(4)],
            omega,
            secular: false,
            lamb_shift: options.lamb_shift,
        };
        return Ok(if options.secular { secular_filter(&tensor, options.grouping_tol) } else { tensor });
    }

    // Γ_pq,rs is evaluated at ω_sr.
    let response = bath_response(basis, bath, options)?;
    let gamma = |p: usize, q: usize, r: usize, s: usize| response[(s, r)] * zeta.get(p, q, r, s);

    // sums[(a, c)] = Σ_e Γ_ae,ec
    let sums = DMatrix::from_fn(n, n, |a, c| (0..n).map(|e| gamma(a, e, e, c)).sum::<C64>());

    let mut data = vec![C64::new(0.0, 0.0); n.pow(4)];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut r = gamma(d, b, a, c) + gamma(c, a, b, d).conj();
                    if b == d {
                        r -= sums[(a, c)];
                    }
                    if a == c {
                        r -= sums[(b, d)].conj();
                    }
                    data[idx4(n, a, b, c, d)] = r;
                }
            }
        }
    }
    let tensor = RedfieldTensor { n, data, omega, secular: false, lamb_shift: options.lamb_shift };
    Ok(if options.secular { secular_filter(&tensor, options.grouping_tol) } else { tensor })
}

/// Keeps R_ab,cd only where |ω_ab − ω_cd| ≤ `grouping_tol`.
pub fn secular_filter(tensor: &RedfieldTensor, grouping_tol: f64) -> RedfieldTensor {
    let n = tensor.n;
    let mut out = tensor.clone();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    if (tensor.omega[(a, b)] - tensor.omega[(c, d)]).abs() > grouping_tol {
                        out.data[idx4(n, a, b, c, d)] = C64::new(0.0, 0.0);
                    }
                }
            }
        }
    }
    out.secular = true;
    debug_assert!(out.trace_defect() <= 1e-12 * tensor.max_abs().max(1.0));
    out
}

/// k_ab = ζ_ab,ba C(ω_ab), with both factors retained for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    /// Transfer rate from exciton state a to b, ps⁻¹.
    pub k: DMatrix<f64>,
    pub zeta_part: DMatrix<f64>,
    /// C(ω_ab), ps⁻¹.
    pub c_part: DMatrix<f64>,
}

impl RateMatrix {
    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    /// Sum of all rates out of state `a`.
    pub fn outflow(&self, a: usize) -> f64 {
        self.k.row(a).sum()
    }
}

pub fn compute_rates(zeta: &ZetaTensor, basis: &ExcitonBasis, bath: &BathModel) -> Result<RateMatrix> {
    let n = basis.dim();
    if zeta.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: zeta.dim() });
    }
    let mut k = DMatrix::zeros(n, n);
    let mut zeta_part = DMatrix::zeros(n, n);
    let mut c_part = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let z = zeta.get(a, b, b, a);
            let c = correlation_c(basis.transition_frequency(a, b), bath);
            zeta_part[(a, b)] = z;
            c_part[(a, b)] = c;
            k[(a, b)] = z * c;
        }
    }
    Ok(RateMatrix { k, zeta_part, c_part })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{build_hamiltonian, diagonalize, CouplingRule, Site, SiteHamiltonian, SiteNetwork};
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    const BATH: BathModel = BathModel::GAAS_10K;

    fn dimer(distance: f64) -> (ExcitonBasis, DMatrix<f64>) {
        let sites = vec![Site::new([0.0; 3], 1000.0), Site::new([distance, 0.0, 0.0], 1000.0)];
        let h = build_hamiltonian(&SiteNetwork::new(sites, CouplingRule::default()).unwrap()).unwrap();
        (diagonalize(&h), h.distances)
    }

    fn chain3() -> (ExcitonBasis, DMatrix<f64>) {
        let sites = vec![
            Site::new([0.0, 0.0, 0.0], 1000.0),
            Site::new([4.0, 0.5, 0.0], 1000.9),
            Site::new([-3.5, 1.0, 0.2], 1001.3),
        ];
        let h = build_hamiltonian(&SiteNetwork::new(sites, CouplingRule::default()).unwrap()).unwrap();
        (diagonalize(&h), h.distances)
    }

    #[test]
    fn decoupled_sites_have_no_relaxation_factor() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 2.5]));
        let dist = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 4.0, 2.0, 0.0, 3.0, 4.0, 3.0, 0.0]);
        let h = SiteHamiltonian::from_matrix(m, Some(dist.clone())).unwrap();
        let basis = diagonalize(&h);
        let zeta = compute_zeta(&basis, &dist, 3.0).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    assert_eq!(zeta.get(a, b, b, a), 0.0);
                }
            }
        }
        let rates = compute_rates(&zeta, &basis, &BATH).unwrap();
        assert_eq!(rates.k.max(), 0.0);
    }

    #[test]
    fn dimer_closed_form() {
        let (basis, dist) = dimer(5.0);
        let zeta = compute_zeta(&basis, &dist, 3.0).unwrap();
        let expected = 0.5 * (1.0 - (-5.0f64 / 3.0).exp());
        assert!((zeta.get(0, 1, 1, 0) - 0.40556).abs() < 1e-5);
        assert_relative_eq!(zeta.get(0, 1, 1, 0), expected, epsilon = 1e-12);
        assert_relative_eq!(zeta.get(1, 0, 0, 1), expected, epsilon = 1e-12);

        let wide = compute_zeta(&basis, &dist, 1e9).unwrap();
        assert!(wide.get(0, 1, 1, 0) < 1e-8);
    }

    #[test]
    fn dimer_gamma_and_rate() {
        let (basis, dist) = dimer(5.0);
        let zeta = compute_zeta(&basis, &dist, 3.0).unwrap();
        let w = basis.transition_frequency(1, 0);
        assert!((w - 2.43082).abs() < 1e-4);
        assert!((correlation_c(w, &BATH) - 0.19154).abs() < 2e-4);
        let g = compute_gamma(&zeta, (1, 0, 0, 1), w, &BATH, false).unwrap();
        assert!((g.re - 0.03884).abs() < 2e-4);
        assert_eq!(g.im, 0.0);
        let g_down = compute_gamma(&zeta, (1, 0, 0, 1), -w, &BATH, false).unwrap();
        assert_relative_eq!(g_down.re / g.re, (-w / BATH.thermal_frequency()).exp(), max_relative = 1e-12);
        let zero = ZetaTensor::zeros(2);
        assert_eq!(compute_gamma(&zero, (0, 1, 1, 0), w, &BATH, true).unwrap(), C64::new(0.0, 0.0));

        let rates = compute_rates(&zeta, &basis, &BATH).unwrap();
        assert!((rates.k[(1, 0)] - 0.0777).abs() < 1e-3);
        assert!(rates.k[(1, 0)] > rates.k[(0, 1)]);
    }

    #[test]
    fn tensor_population_block_matches_rates() {
        let (basis, dist) = chain3();
        let zeta = compute_zeta(&basis, &dist, 3.0).unwrap();
        let tensor = assemble_tensor(&basis, &zeta, &BATH, &RedfieldOptions::default()).unwrap();
        let rates = compute_rates(&zeta, &basis, &BATH).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    let r = tensor.get(b, b, a, a);
                    assert_relative_eq!(r.re, rates.k[(a, b)], max_relative = 1e-12);
                    assert!(r.im.abs() <= 1e-15 * tensor.max_abs());
                    assert!(r.re >= 0.0);
                }
            }
        }
        assert!(tensor.trace_defect() <= 1e-12 * tensor.max_abs());
        assert!(tensor.hermiticity_defect() <= 1e-12 * tensor.max_abs());
    }

    #[test]
    fn zero_zeta_gives_zero_tensor() {
        let (basis, _) = chain3();
        let tensor = assemble_tensor(&basis, &ZetaTensor::zeros(3), &BATH, &RedfieldOptions::default()).unwrap();
        assert_eq!(tensor.max_abs(), 0.0);
    }

    #[test]
    fn lamb_shift_only_touches_imaginary_parts() {
        let (basis, dist) = chain3();
        let zeta = compute_zeta(&basis, &dist, 3.0).unwrap();
        let with = assemble_tensor(&basis, &zeta, &BATH, &RedfieldOptions::default()).unwrap();
        let without = assemble_tensor(
            &basis,
            &zeta,
            &BATH,
            &RedfieldOptions { lamb_shift: false, ..Default::default() },
        )
        .unwrap();
        let mut differs = false;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let (x, y) = (with.get(a, b, c, d), without.get(a, b, c, d));
                        assert_relative_eq!(x.re, y.re, epsilon = 1e-15);
                        differs |= (x.im - y.im).abs() > 1e-8;
                    }
                }
            }
        }
        assert!(differs);
    }

    #[test]
    fn rate_detailed_balance() {
        let (basis, dist) = chain3();
        let zeta = compute_zeta(&basis, &dist, 3.0).unwrap();
        let rates = compute_rates(&zeta, &basis, &BATH).unwrap();
        let wt = BATH.thermal_frequency();
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    assert!(rates.k[(a, b)] >= 0.0);
                    assert!(rates.zeta_part[(a, b)] >= 0.0);
                    let ratio = rates.k[(a, b)] / rates.k[(b, a)];
                    assert_relative_eq!(ratio, (basis.transition_frequency(a, b) / wt).exp(), max_relative = 1e-8);
                }
            }
        }
    }

    #[test]
    fn secular_filter_nondegenerate() {
        let (basis, dist) = chain3();
        let zeta = compute_zeta(&basis, &dist, 3.0).unwrap();
        let full = assemble_tensor(&basis, &zeta, &BATH, &RedfieldOptions::default()).unwrap();
        let sec = secular_filter(&full, DEFAULT_GROUPING_TOL);
        assert!(sec.secular);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let kept = sec.get(a, b, c, d) != C64::new(0.0, 0.0);
                        let population = a == b && c == d;
                        let same_coherence = a != b && a == c && b == d;
                        if population {
                            assert_eq!(sec.get(a, b, c, d), full.get(a, b, c, d));
                        }
                        if kept {
                            assert!(population || same_coherence, "({a}{b},{c}{d}) survived");
                        }
                    }
                }
            }
        }
        assert!(sec.trace_defect() <= 1e-12 * full.max_abs());
    }

    #[test]
    fn secular_filter_keeps_degenerate_cross_coherences() {
        // Two uncoupled dimers with identical splittings give coincident ω.
        let e = 1000.0;
        let sites = vec![
            Site::new([0.0, 0.0, 0.0], e),
            Site::new([5.0, 0.0, 0.0], e),
            Site::new([0.0, 40.0, 0.0], e + 3.0),
            Site::new([5.0, 40.0, 0.0], e + 3.0),
        ];
        let mut j = DMatrix::zeros(4, 4);
        j[(0, 1)] = 0.8;
        j[(1, 0)] = 0.8;
        j[(2, 3)] = 0.8;
        j[(3, 2)] = 0.8;
        let net = SiteNetwork::new(sites, CouplingRule::Explicit(j)).unwrap();
        let h = build_hamiltonian(&net).unwrap();
        let basis = diagonalize(&h);
        let zeta = compute_zeta(&basis, &h.distances, 30.0).unwrap();
        let full = assemble_tensor(&basis, &zeta, &BATH, &RedfieldOptions::default()).unwrap();
        // Grouping tolerance wide enough to absorb rounding of the two splittings.
        let sec = secular_filter(&full, 1e-9);
        let w = &basis.energies;
        assert!(((w[1] - w[0]) - (w[3] - w[2])).abs() < 1e-9);
        let mut coherence_links = 0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let resonant =
                            (basis.transition_frequency(a, b) - basis.transition_frequency(c, d)).abs() <= 1e-9;
                        let expected = if resonant { full.get(a, b, c, d) } else { C64::new(0.0, 0.0) };
                        assert_eq!(sec.get(a, b, c, d), expected);
                        if resonant && a != b && (a, b) != (c, d) {
                            coherence_links += 1;
                        }
                    }
                }
            }
        }
        // ω_10 = ω_32 and ω_20 = ω_31, with their mirrors, each in both directions.
        assert_eq!(coherence_links, 8);
    }
}
