#![allow(dead_code)]

use eet_core::redfield::RedfieldOptions;
use eet_core::scenario::{InitialState, SimulationOptions};
use eet_core::{BathModel, CouplingRule, Method, Scenario, Site, SiteNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Closest allowed approach between two sites, nm.
pub const MIN_SEPARATION: f64 = 3.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sites scattered in a 15 nm box with energies spread over `spread` meV.
pub fn random_network(rng: &mut impl Rng, n: usize, spread: f64) -> SiteNetwork {
    let mut sites: Vec<Site> = Vec::with_capacity(n);
    while sites.len() < n {
        let position = [rng.gen_range(0.0..15.0), rng.gen_range(0.0..15.0), rng.gen_range(0.0..15.0)];
        let candidate = Site::new(position, 1000.0 + rng.gen_range(0.0..spread));
        if sites.iter().all(|s| s.distance(&candidate) >= MIN_SEPARATION) {
            sites.push(candidate);
        }
    }
    SiteNetwork::new(sites, CouplingRule::default()).unwrap()
}

pub fn scenario(network: SiteNetwork, bath: BathModel, t_final: f64) -> Scenario {
    let n = network.len();
    Scenario {
        name: None,
        network,
        bath,
        options: SimulationOptions {
            redfield: RedfieldOptions::default(),
            method: Method::Expm,
            dt: None,
            t_final,
            stride: None,
        },
        initial: InitialState::Site(n - 1),
    }
}

/// 2–4 sites, GaAs bath, starting on the last site.
pub fn random_scenario(rng: &mut impl Rng, t_final: f64) -> Scenario {
    let n = rng.gen_range(2..=4);
    let network = random_network(rng, n, 3.0);
    scenario(network, BathModel::GAAS_10K, t_final)
}

/// Random scenario started in the highest exciton state, redrawn until a fine-grained
/// expm run over `t_final` stays within the positivity guard of [`evolve`].
///
/// Non-secular Redfield dynamics is not completely positive; some draws dip below the
/// hard limit during the initial slip and would abort instead of testing anything.
pub fn positive_random_scenario(rng: &mut impl Rng, t_final: f64) -> Scenario {
    loop {
        let mut s = random_scenario(rng, t_final);
        s.initial = InitialState::Exciton(s.network.len() - 1);
        let model = s.model().unwrap();
        let l = model.liouvillian(&s.options.redfield).unwrap();
        let rho0 = s.initial_state(&model.basis).unwrap();
        if eet_core::propagate::evolve(&l, &rho0, t_final, 0.25, 1, Method::Expm).is_ok() {
            return s;
        }
    }
}

/// Dawson's integral from its power series. Every term is positive, so the sum carries
/// no cancellation for moderate |x|.
pub fn dawson(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x; // x^{2n+1}/n!
    let mut sum = 0.0;
    for n in 0..400 {
        let contribution = term / (2 * n + 1) as f64;
        sum += contribution;
        if contribution.abs() < 1e-18 * sum.abs() {
            break;
        }
        term *= x2 / (n + 1) as f64;
    }
    (-x2).exp() * sum
}

/// Site populations of the closed-system evolution exp(−iHt) ρ₀ exp(iHt), from an
/// independent Hermitian eigendecomposition of the site Hamiltonian.
pub fn unitary_site_populations(
    h: &nalgebra::DMatrix<f64>,
    rho0_site: &nalgebra::DMatrix<eet_core::C64>,
    times: &[f64],
) -> Vec<Vec<f64>> {
    use eet_core::C64;
    let n = h.nrows();
    // Only energy differences matter; removing the offset keeps the phases small.
    let shift = (0..n).map(|i| h[(i, i)]).fold(f64::INFINITY, f64::min);
    let shifted = h - nalgebra::DMatrix::<f64>::identity(n, n) * shift;
    let eig = nalgebra::SymmetricEigen::new(shifted);
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let vt = v.transpose();
    let rho0 = &vt * rho0_site * &v;
    times
        .iter()
        .map(|&t| {
            let rho = nalgebra::DMatrix::from_fn(n, n, |a, b| {
                let phase = -(eig.eigenvalues[a] - eig.eigenvalues[b]) * t;
                rho0[(a, b)] * C64::new(phase.cos(), phase.sin())
            });
            let site = &v * rho * &vt;
            (0..n).map(|i| site[(i, i)].re).collect()
        })
        .collect()
}
