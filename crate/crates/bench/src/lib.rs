//! Fixtures shared by the criterion benches.

use eet_core::scenario::{parse_scenario, reference};
use eet_core::{BathModel, CouplingRule, Model, Scenario, Site, SiteNetwork};

pub fn chain_a() -> Scenario {
    parse_scenario(reference::CHAIN_A).expect("shipped scenario parses")
}

/// Regular ring of `n` sites 6 nm from the centre with a 0.2 meV energy staircase.
pub fn ring(n: usize) -> Model {
    let sites = (0..n)
        .map(|i| {
            let phi = std::f64::consts::TAU * i as f64 / n as f64;
            Site::new([6.0 * phi.cos(), 6.0 * phi.sin(), 0.0], 1000.0 + 0.2 * i as f64)
        })
        .collect();
    let network = SiteNetwork::new(sites, CouplingRule::default()).expect("distinct sites");
    Model::new(network, BathModel::GAAS_10K).expect("valid model")
}
