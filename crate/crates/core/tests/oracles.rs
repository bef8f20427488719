//! Checks against independently computed references.

mod common;

use qfluct_core::dynamics::{propagate, LindbladModel, PropagationConfig, QuantumMap, Superoperator};
use qfluct_core::operator::{eigh, energy_basis, matrix_function_hermitian, max_abs, ComplexMatrix, C64};
use qfluct_core::protocols::{energy_change_distribution, joint, DEFAULT_MERGE_TOL};
use qfluct_core::sampling::{random_hermitian, DensitySampler};
use qfluct_core::statistics::characteristic_function;
use qfluct_core::Protocol;

/// `e^A` by scaling and squaring of a truncated Taylor series.
fn expm_taylor(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let norm: f64 = a.iter().map(|z| z.norm()).sum();
    let squarings = norm.log2().ceil().max(0.0) as i32 + 1;
    let scaled = a / C64::new(2f64.powi(squarings), 0.0);
    let mut term = ComplexMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn unitary_propagation_matches_taylor_exponential() {
    let mut sampler = DensitySampler::new(11);
    for d in [2, 3, 4] {
        let h = random_hermitian(&mut sampler, d);
        let model = LindbladModel::unitary(h.clone()).unwrap();
        let t = 1.7;
        let u = expm_taylor(&(&h * C64::new(0.0, -t)));
        let rho = sampler.sample(d);
        let expected = &u * rho.matrix() * u.adjoint();
        let got = propagate(&model, rho.matrix(), &PropagationConfig::new(0.0, t)).unwrap();
        assert!(max_abs(&(got.final_op - expected)) <= 1e-8);
    }
}

#[test]
fn spectral_exponential_matches_taylor() {
    let mut sampler = DensitySampler::new(12);
    for d in [2, 3, 5] {
        let h = random_hermitian(&mut sampler, d);
        let spectral = matrix_function_hermitian(&h, |x| C64::new(0.0, -0.8 * x).exp()).unwrap();
        let taylor = expm_taylor(&(&h * C64::new(0.0, -0.8)));
        assert!(max_abs(&(spectral - taylor)) <= 1e-10);
    }
}

#[test]
fn eigenvalues_match_characteristic_polynomial_of_2x2() {
    let mut sampler = DensitySampler::new(13);
    for _ in 0..50 {
        let h = random_hermitian(&mut sampler, 2);
        let (a, b, c) = (h[(0, 0)].re, h[(1, 1)].re, h[(0, 1)].norm());
        let mid = 0.5 * (a + b);
        let half_gap = (0.25 * (a - b).powi(2) + c * c).sqrt();
        let e = eigh(&h).unwrap();
        assert!((e.values()[0] - (mid - half_gap)).abs() <= 1e-12);
        assert!((e.values()[1] - (mid + half_gap)).abs() <= 1e-12);
    }
}

/// Characteristic function from the joint table by brute force over cells.
#[test]
fn characteristic_function_matches_cell_sum() {
    let basis = common::three_level_basis();
    let mut sampler = DensitySampler::new(14);
    for (_, map) in common::driven_channels().iter().step_by(17) {
        let rho = sampler.sample(3);
        for protocol in Protocol::ALL {
            let table = joint(protocol, &rho, &basis, &basis, map).unwrap();
            for u in [-3.1, 0.25, 2.0] {
                let brute: C64 = table
                    .cells()
                    .map(|(_, _, de, p)| C64::new(0.0, u * de).exp() * p)
                    .sum();
                let g = characteristic_function(protocol, &rho, &basis, &basis, map, C64::new(u, 0.0)).unwrap();
                assert!((g - brute).norm() <= 1e-9, "{protocol:?} u={u}");
                let merged = energy_change_distribution(&table, DEFAULT_MERGE_TOL);
                let atoms: C64 = merged
                    .atoms()
                    .iter()
                    .map(|a| C64::new(0.0, u * a.delta_e).exp() * a.prob)
                    .sum();
                assert!((atoms - brute).norm() <= 1e-12);
            }
        }
    }
}

#[test]
fn superoperator_unitary_matches_conjugation() {
    let mut sampler = DensitySampler::new(15);
    let h = random_hermitian(&mut sampler, 3);
    let u = expm_taylor(&(&h * C64::new(0.0, -1.0)));
    let map = Superoperator::from_unitary(&u).unwrap();
    let rho = sampler.sample(3);
    let direct = &u * rho.matrix() * u.adjoint();
    assert!(max_abs(&(map.apply(rho.matrix()).unwrap() - direct)) <= 1e-12);
    let basis = energy_basis(&h, 1e-9).unwrap();
    assert_eq!(basis.len(), 3);
}
