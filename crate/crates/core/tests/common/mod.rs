#![allow(dead_code)]

use std::sync::OnceLock;

use qfluct_core::dynamics::{superoperator_snapshots, PropagationConfig, Superoperator};
use qfluct_core::models::{build_three_level, ThreeLevelParams};
use qfluct_core::operator::{energy_basis, EnergyBasis, DEFAULT_DEGENERACY_TOL};

/// Driven three-level channels `Φ_t` for `t = 0.1, 0.2, ..., 10`.
pub fn driven_channels() -> &'static [(f64, Superoperator)] {
    static CHANNELS: OnceLock<Vec<(f64, Superoperator)>> = OnceLock::new();
    CHANNELS.get_or_init(|| {
        let model = build_three_level(&ThreeLevelParams::paper()).unwrap();
        let times = PropagationConfig::uniform_snapshots(0.0, 10.0, 100);
        let config = PropagationConfig::new(0.0, 10.0).with_dt(2e-3).with_snapshots(times);
        superoperator_snapshots(&model, &config).unwrap()
    })
}

pub fn three_level_basis() -> EnergyBasis {
    let h = qfluct_core::models::three_level_hamiltonian(1.0);
    energy_basis(&h, DEFAULT_DEGENERACY_TOL).unwrap()
}
