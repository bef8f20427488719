//! Randomized invariants of propagation, protocols and statistics.

mod common;

use proptest::prelude::*;
use qfluct_core::dynamics::{propagate, PropagationConfig, QuantumMap};
use qfluct_core::models::{build_three_level, ThreeLevelParams};
use qfluct_core::operator::{
    coherence_l1, dephase_split, eigh, energy_basis, hermiticity_deviation, max_abs, trace,
    ComplexMatrix, DensityMatrix, C64,
};
use qfluct_core::protocols::{
    energy_change_distribution, epm_joint, epm_split, joint, mll_joint, DEFAULT_MERGE_TOL,
};
use qfluct_core::sampling::{random_hermitian, DensitySampler};
use qfluct_core::statistics::{
    closed_form_moments, first_moment_closed_form, moment, mutual_information,
    second_moment_closed_form, shannon_entropy,
};
use qfluct_core::Protocol;

fn case(seed: u64, slot: usize) -> (DensityMatrix, &'static qfluct_core::dynamics::Superoperator) {
    let channels = common::driven_channels();
    let rho = DensitySampler::new(seed).sample(3);
    (rho, &channels[slot % channels.len()].1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn distributions_are_normalized(seed in any::<u64>(), slot in 0usize..100) {
        let basis = common::three_level_basis();
        let (rho, map) = case(seed, slot);
        for protocol in Protocol::ALL {
            let j = joint(protocol, &rho, &basis, &basis, map).unwrap();
            prop_assert!((j.total() - 1.0).abs() <= 1e-9);
            prop_assert!(j.cells().all(|c| c.3 >= 0.0));
        }
    }

    #[test]
    fn first_moments_match_closed_form(seed in any::<u64>(), slot in 0usize..100) {
        let basis = common::three_level_basis();
        let (rho, map) = case(seed, slot);
        let expected = first_moment_closed_form(&rho, &basis, &basis, map).unwrap();
        for protocol in Protocol::ALL {
            let dist = energy_change_distribution(&joint(protocol, &rho, &basis, &basis, map).unwrap(), DEFAULT_MERGE_TOL);
            let closed = closed_form_moments(protocol, &rho, &basis, &basis, map).unwrap();
            prop_assert!((moment(&dist, 1) - closed.first).abs() <= 1e-9);
            prop_assert!((moment(&dist, 2) - closed.second).abs() <= 1e-8);
            if protocol != Protocol::Tpm {
                prop_assert!((moment(&dist, 1) - expected).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn second_moment_split_is_additive(seed in any::<u64>(), slot in 0usize..100) {
        let basis = common::three_level_basis();
        let (rho, map) = case(seed, slot);
        let m = second_moment_closed_form(&rho, &basis, &basis, map).unwrap();
        let dist = energy_change_distribution(&epm_joint(&rho, &basis, &basis, map).unwrap(), DEFAULT_MERGE_TOL);
        prop_assert!((moment(&dist, 2) - m.total).abs() <= 1e-8);
        prop_assert!((m.population_part + m.coherence_part - m.total).abs() <= 1e-10);
        let (p, _) = dephase_split(&rho, &basis).unwrap();
        prop_assert!(second_moment_closed_form(&p, &basis, &basis, map).unwrap().coherence_part.abs() <= 1e-10);
    }

    #[test]
    fn epm_is_product_of_mll_marginals(seed in any::<u64>(), slot in 0usize..100) {
        let basis = common::three_level_basis();
        let (rho, map) = case(seed, slot);
        let epm = epm_joint(&rho, &basis, &basis, map).unwrap();
        let mll = mll_joint(&rho, &basis, &basis, map).unwrap();
        let (mi, mf) = (mll.marginal_initial(), mll.marginal_final());
        let (ei, ef) = (epm.marginal_initial(), epm.marginal_final());
        for (l, k, _, p) in epm.cells() {
            prop_assert!((p - mi[l] * mf[k]).abs() <= 1e-9);
            prop_assert!((p - ei[l] * ef[k]).abs() <= 1e-14);
        }
    }

    #[test]
    fn epm_split_recombines(seed in any::<u64>(), slot in 0usize..100) {
        let basis = common::three_level_basis();
        let (rho, map) = case(seed, slot);
        let split = epm_split(&rho, &basis, &basis, map).unwrap();
        let epm = epm_joint(&rho, &basis, &basis, map).unwrap();
        prop_assert!((split.combined() - epm.raw()).abs().max() <= 1e-12);
        prop_assert!(split.p_chi.sum().abs() <= 1e-12);
    }

    #[test]
    fn entropy_and_mutual_information(seed in any::<u64>(), slot in 0usize..100) {
        let basis = common::three_level_basis();
        let (rho, map) = case(seed, slot);
        let epm = epm_joint(&rho, &basis, &basis, map).unwrap();
        let mll = mll_joint(&rho, &basis, &basis, map).unwrap();
        let info = mutual_information(&mll, &epm).unwrap();
        prop_assert!(info >= -1e-12);
        prop_assert!((info - (shannon_entropy(&epm) - shannon_entropy(&mll))).abs() <= 1e-9);
    }

    #[test]
    fn propagation_preserves_trace_and_hermiticity(seed in any::<u64>(), t in 0.05f64..3.0) {
        let model = build_three_level(&ThreeLevelParams::paper()).unwrap();
        let mut sampler = DensitySampler::new(seed);
        let config = PropagationConfig::new(0.0, t).with_dt(1e-2);
        let a = sampler.ginibre(3);
        let out = propagate(&model, &a, &config).unwrap().final_op;
        prop_assert!((trace(&out) - trace(&a)).norm() <= 1e-9);
        let h = random_hermitian(&mut sampler, 3);
        let out = propagate(&model, &h, &config).unwrap().final_op;
        prop_assert!(hermiticity_deviation(&out) <= 1e-9);
    }

    #[test]
    fn propagation_is_linear(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let model = build_three_level(&ThreeLevelParams::paper()).unwrap();
        let mut sampler = DensitySampler::new(seed);
        let config = PropagationConfig::new(0.0, 1.0).with_dt(1e-2);
        let (a, b) = (sampler.ginibre(3), sampler.ginibre(3));
        let c = C64::new(re, im);
        let run = |x: &ComplexMatrix| propagate(&model, x, &config).unwrap().final_op;
        let lhs = run(&(&a * c + &b));
        let rhs = run(&a) * c + run(&b);
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-10);
    }

    #[test]
    fn eigh_invariants(seed in any::<u64>(), d in 1usize..7) {
        let mut sampler = DensitySampler::new(seed);
        let h = random_hermitian(&mut sampler, d);
        let e = eigh(&h).unwrap();
        prop_assert!(max_abs(&(e.reconstruct() - &h)) <= 1e-9);
        let v = e.vectors();
        prop_assert!(max_abs(&(v.adjoint() * v - ComplexMatrix::identity(d, d))) <= 1e-10);
        prop_assert!(e.values().windows(2).all(|w| w[0] <= w[1]));
        let basis = energy_basis(&h, 1e-9).unwrap();
        let sum = basis.levels().iter().fold(ComplexMatrix::zeros(d, d), |acc, l| acc + &l.projector);
        prop_assert!(max_abs(&(sum - ComplexMatrix::identity(d, d))) <= 1e-10);
        let rho = sampler.sample(d);
        let (p, _) = dephase_split(&rho, &basis).unwrap();
        prop_assert!(coherence_l1(&p, &basis).unwrap() < 1e-12);
    }
}

#[test]
fn channels_are_trace_preserving() {
    let mut sampler = DensitySampler::new(3);
    for (_, map) in common::driven_channels() {
        let a = sampler.ginibre(3);
        assert!((trace(&map.apply(&a).unwrap()) - trace(&a)).norm() <= 1e-9);
    }
}
