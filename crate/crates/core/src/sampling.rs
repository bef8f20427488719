//! Seedable random states.
//!
//! Density matrices are drawn from the Hilbert-Schmidt ensemble: `G` is a
//! `d x d` matrix of independent standard complex Gaussians and
//! `rho = G G† / Tr(G G†)`. Gaussians come from a Box-Muller transform over
//! ChaCha20, so a seed reproduces the same stream on every platform.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    coherence_l1, validate_density, ComplexMatrix, DensityMatrix, EnergyBasis, C64,
};

/// Identifier of the generator recorded next to experiment output.
pub const PRNG_ID: &str = "chacha20/box-muller";

const SAMPLE_VALIDATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct DensitySampler {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl DensitySampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Independent stream `stream` of the same seed, for parallel sampling.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn complex_normal(&mut self) -> C64 {
        let re = self.standard_normal();
        let im = self.standard_normal();
        C64::new(re, im)
    }

    pub fn ginibre(&mut self, dim: usize) -> ComplexMatrix {
        // column-major fill order is part of the reproducibility contract
        ComplexMatrix::from_fn(dim, dim, |_, _| self.complex_normal())
    }

    /// One Hilbert-Schmidt distributed density matrix.
    pub fn sample(&mut self, dim: usize) -> DensityMatrix {
        let g = self.ginibre(dim);
        let m = &g * g.adjoint();
        let norm = m.trace().re;
        let rho = (&m + m.adjoint()) / C64::new(2.0 * norm, 0.0);
        validate_density(rho, SAMPLE_VALIDATION_TOL)
            .expect("G G† / Tr(G G†) is a density matrix")
    }

    /// Haar-random unit vector.
    pub fn ket(&mut self, dim: usize) -> DVector<C64> {
        let v = DVector::from_fn(dim, |_, _| self.complex_normal());
        let norm = v.norm();
        v / C64::new(norm, 0.0)
    }

    pub fn pure(&mut self, dim: usize) -> DensityMatrix {
        DensityMatrix::pure(&self.ket(dim)).expect("normalized ket")
    }
}

/// `(G + G†) / 2` with standard complex Gaussian `G`.
pub fn random_hermitian(sampler: &mut DensitySampler, dim: usize) -> ComplexMatrix {
    let g = sampler.ginibre(dim);
    (&g + g.adjoint()) / C64::new(2.0, 0.0)
}

/// `config.count` Hilbert-Schmidt states from seed `config.seed`.
pub fn sample_density_hs(config: &SamplerConfig) -> Vec<DensityMatrix> {
    let mut sampler = DensitySampler::new(config.seed);
    (0..config.count).map(|_| sampler.sample(config.dim)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceExtremes {
    pub min_index: usize,
    pub min_value: f64,
    pub max_index: usize,
    pub max_value: f64,
}

/// Least and most coherent states of a sample by `C_L1` in `basis`.
/// Ties go to the earliest index.
pub fn coherence_extremes(
    states: &[DensityMatrix],
    basis: &EnergyBasis,
) -> Result<CoherenceExtremes> {
    let mut values = states.iter().map(|s| coherence_l1(s, basis));
    let first = values.next().ok_or(Error::EmptySample)??;
    let mut ext = CoherenceExtremes {
        min_index: 0,
        min_value: first,
        max_index: 0,
        max_value: first,
    };
    for (i, value) in values.enumerate() {
        let value = value?;
        if value < ext.min_value {
            ext.min_index = i + 1;
            ext.min_value = value;
        }
        if value > ext.max_value {
            ext.max_index = i + 1;
            ext.max_value = value;
        }
    }
    Ok(ext)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{energy_basis, real_diagonal, DEFAULT_DEGENERACY_TOL};

    #[test]
    fn one_dimensional_sample_is_unity() {
        let states = sample_density_hs(&SamplerConfig {
            dim: 1,
            count: 5,
            seed: 1,
        });
        for s in states {
            assert!((s.matrix()[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn same_seed_same_states() {
        let cfg = SamplerConfig {
            dim: 3,
            count: 20,
            seed: 42,
        };
        assert_eq!(sample_density_hs(&cfg), sample_density_hs(&cfg));
        let other = SamplerConfig { seed: 43, ..cfg };
        assert_ne!(sample_density_hs(&cfg), sample_density_hs(&other));
    }

    #[test]
    fn streams_differ() {
        let mut a = DensitySampler::with_stream(9, 0);
        let mut b = DensitySampler::with_stream(9, 1);
        assert_ne!(a.sample(3), b.sample(3));
    }

    #[test]
    fn eigenvalues_sum_to_one() {
        let mut sampler = DensitySampler::new(7);
        for _ in 0..10_000 {
            let rho = sampler.sample(3);
            let e = crate::operator::eigh(rho.matrix()).unwrap();
            assert!((e.values().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn extremes_pick_diagonal_and_first_on_ties() {
        let basis = energy_basis(&real_diagonal(&[0.0, 1.0, 3.0]), DEFAULT_DEGENERACY_TOL).unwrap();
        let mut sampler = DensitySampler::new(4);
        let mut states: Vec<DensityMatrix> = (0..5).map(|_| sampler.sample(3)).collect();
        states.insert(2, DensityMatrix::maximally_mixed(3));
        let ext = coherence_extremes(&states, &basis).unwrap();
        assert_eq!(ext.min_index, 2);
        assert_eq!(ext.min_value, 0.0);

        let single = coherence_extremes(&states[..1], &basis).unwrap();
        assert_eq!(single.min_index, single.max_index);

        let twins = vec![DensityMatrix::maximally_mixed(3), DensityMatrix::maximally_mixed(3)];
        let ext = coherence_extremes(&twins, &basis).unwrap();
        assert_eq!((ext.min_index, ext.max_index), (0, 0));

        assert!(matches!(
            coherence_extremes(&[], &basis),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn seeded_qutrit_sample_extremes() {
        let basis = energy_basis(&real_diagonal(&[0.0, 1.0, 3.0]), DEFAULT_DEGENERACY_TOL).unwrap();
        let states = sample_density_hs(&SamplerConfig {
            dim: 3,
            count: 1000,
            seed: 2020,
        });
        let ext = coherence_extremes(&states, &basis).unwrap();
        assert!(ext.max_value > 0.5 && ext.max_value <= 1.0, "{}", ext.max_value);
        assert!(ext.max_value > ext.min_value);
    }
}
