//! Joint energy distributions for the three measurement protocols.
//!
//! All three produce `p(ℓ, k)`, the probability of initial level `ℓ` of
//! `H(t_i)` and final level `k` of `H(t_f)`:
//!
//! * **EPM** (end-point measurement): only the final energy is measured. The
//!   initial level enters through the populations of `rho_i`, independently of
//!   the final outcome: `p = Tr(rho Π_ℓ) · Tr(Φ[rho] Π_k)`.
//! * **TPM** (two-point measurement): a projective energy measurement at `t_i`
//!   collapses the state before it evolves:
//!   `p = Tr(Φ[Π_ℓ rho Π_ℓ] Π_k)`.
//! * **MLL**: every eigenstate `|s>` of `rho_i` evolves separately and the
//!   outcomes are weighted by its eigenvalue `p_s`:
//!   `p = Σ_s p_s <s|Π_ℓ|s> Tr(Φ[|s><s|] Π_k)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::QuantumMap;
use crate::error::{Error, Result};
use crate::operator::{
    check_dim, dephase_split, eigh, ket_bra, max_abs, DensityMatrix, EnergyBasis,
    DEFAULT_DEGENERACY_TOL,
};

pub const NEGATIVITY_TOL: f64 = 1e-12;
pub const NORMALIZATION_TOL: f64 = 1e-9;
pub const TRACE_PRESERVATION_TOL: f64 = 1e-8;
pub const DEFAULT_MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Epm,
    Tpm,
    Mll,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Epm, Protocol::Tpm, Protocol::Mll];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Epm => "epm",
            Protocol::Tpm => "tpm",
            Protocol::Mll => "mll",
        }
    }
}

/// `p(ℓ, k)` over initial levels `ℓ` (rows) and final levels `k` (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    p: DMatrix<f64>,
    energies_i: Vec<f64>,
    energies_f: Vec<f64>,
    protocol: Protocol,
    basis_dependent: bool,
}

impl JointDistribution {
    /// Checks non-negativity (to [`NEGATIVITY_TOL`]) and normalization (to
    /// [`NORMALIZATION_TOL`]).
    pub fn new(
        p: DMatrix<f64>,
        energies_i: Vec<f64>,
        energies_f: Vec<f64>,
        protocol: Protocol,
    ) -> Result<Self> {
        if p.nrows() != energies_i.len() {
            return Err(Error::DimensionMismatch {
                expected: energies_i.len(),
                found: p.nrows(),
            });
        }
        if p.ncols() != energies_f.len() {
            return Err(Error::DimensionMismatch {
                expected: energies_f.len(),
                found: p.ncols(),
            });
        }
        for l in 0..p.nrows() {
            for k in 0..p.ncols() {
                let value = p[(l, k)];
                if !(value >= -NEGATIVITY_TOL) {
                    return Err(Error::NegativeProbability {
                        initial: l,
                        final_level: k,
                        value,
                    });
                }
            }
        }
        let total = p.sum();
        if !((total - 1.0).abs() <= NORMALIZATION_TOL) {
            return Err(Error::NormalizationViolation { total });
        }
        Ok(Self {
            p,
            energies_i,
            energies_f,
            protocol,
            basis_dependent: false,
        })
    }

    /// Probability of `(ℓ, k)`, with round-off negatives read as zero.
    pub fn get(&self, l: usize, k: usize) -> f64 {
        self.p[(l, k)].max(0.0)
    }

    /// Unclamped table.
    pub fn raw(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn n_initial(&self) -> usize {
        self.energies_i.len()
    }

    pub fn n_final(&self) -> usize {
        self.energies_f.len()
    }

    pub fn energies_i(&self) -> &[f64] {
        &self.energies_i
    }

    pub fn energies_f(&self) -> &[f64] {
        &self.energies_f
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    /// Set for MLL tables built from a degenerate `rho_i`, whose eigenbasis
    /// (and hence the table) is not unique.
    pub fn basis_dependent(&self) -> bool {
        self.basis_dependent
    }

    pub fn total(&self) -> f64 {
        self.p.sum()
    }

    /// `(ℓ, k, E_f^k - E_i^ℓ, p)` for every cell.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.n_initial()).flat_map(move |l| {
            (0..self.n_final()).map(move |k| {
                (l, k, self.energies_f[k] - self.energies_i[l], self.get(l, k))
            })
        })
    }

    pub fn marginal_initial(&self) -> Vec<f64> {
        (0..self.n_initial())
            .map(|l| (0..self.n_final()).map(|k| self.get(l, k)).sum())
            .collect()
    }

    pub fn marginal_final(&self) -> Vec<f64> {
        (0..self.n_final())
            .map(|k| (0..self.n_initial()).map(|l| self.get(l, k)).sum())
            .collect()
    }

    /// `½ Σ |p - q|` over a shared index set.
    pub fn total_variation(&self, other: &JointDistribution) -> Result<f64> {
        if self.p.shape() != other.p.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.p.len(),
                found: other.p.len(),
            });
        }
        Ok(0.5
            * self
                .cells()
                .zip(other.cells())
                .map(|(a, b)| (a.3 - b.3).abs())
                .sum::<f64>())
    }
}

fn check_inputs(
    rho: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
) -> Result<usize> {
    let d = rho.dim();
    check_dim(rho.matrix(), basis_i.dim())?;
    check_dim(rho.matrix(), basis_f.dim())?;
    if map.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: map.dim(),
        });
    }
    Ok(d)
}

fn check_trace_preserved(populations: &[f64], expected: f64) -> Result<()> {
    let total: f64 = populations.iter().sum();
    if (total - expected).abs() > TRACE_PRESERVATION_TOL {
        return Err(Error::MapNotTracePreserving { total });
    }
    Ok(())
}

fn outer(a: &[f64], b: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |l, k| a[l] * b[k])
}

/// End-point-measurement joint distribution.
pub fn epm_joint(
    rho_i: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
) -> Result<JointDistribution> {
    check_inputs(rho_i, basis_i, basis_f, map)?;
    let p_i = basis_i.populations(rho_i.matrix());
    let p_f = basis_f.populations(&map.apply(rho_i.matrix())?);
    check_trace_preserved(&p_f, 1.0)?;
    JointDistribution::new(outer(&p_i, &p_f), basis_i.energies(), basis_f.energies(), Protocol::Epm)
}

/// Two-point-measurement joint distribution with Lüders updates: level `ℓ`
/// propagates `Π_ℓ rho Π_ℓ`; unpopulated levels contribute a zero row.
pub fn tpm_joint(
    rho_i: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
) -> Result<JointDistribution> {
    check_inputs(rho_i, basis_i, basis_f, map)?;
    let mut p = DMatrix::zeros(basis_i.len(), basis_f.len());
    for (l, level) in basis_i.levels().iter().enumerate() {
        let block = &level.projector * rho_i.matrix() * &level.projector;
        if max_abs(&block) == 0.0 {
            continue;
        }
        let row = basis_f.populations(&map.apply(&block)?);
        for (k, value) in row.into_iter().enumerate() {
            p[(l, k)] = value;
        }
    }
    let finals: Vec<f64> = (0..p.ncols()).map(|k| p.column(k).sum()).collect();
    check_trace_preserved(&finals, 1.0)?;
    JointDistribution::new(p, basis_i.energies(), basis_f.energies(), Protocol::Tpm)
}

/// Eigenstate-resolved joint distribution.
pub fn mll_joint(
    rho_i: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
) -> Result<JointDistribution> {
    check_inputs(rho_i, basis_i, basis_f, map)?;
    let eig = eigh(rho_i.matrix())?;
    let mut p = DMatrix::zeros(basis_i.len(), basis_f.len());
    for (s, &weight) in eig.values().iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let ket = ket_bra(&eig.vector(s));
        let overlaps = basis_i.populations(&ket);
        let finals = basis_f.populations(&map.apply(&ket)?);
        check_trace_preserved(&finals, 1.0)?;
        for (l, &o) in overlaps.iter().enumerate() {
            for (k, &f) in finals.iter().enumerate() {
                p[(l, k)] += weight * o * f;
            }
        }
    }
    let mut joint =
        JointDistribution::new(p, basis_i.energies(), basis_f.energies(), Protocol::Mll)?;
    joint.basis_dependent = eig
        .values()
        .windows(2)
        .any(|w| w[1] - w[0] <= DEFAULT_DEGENERACY_TOL);
    Ok(joint)
}

pub fn joint(
    protocol: Protocol,
    rho_i: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
) -> Result<JointDistribution> {
    match protocol {
        Protocol::Epm => epm_joint(rho_i, basis_i, basis_f, map),
        Protocol::Tpm => tpm_joint(rho_i, basis_i, basis_f, map),
        Protocol::Mll => mll_joint(rho_i, basis_i, basis_f, map),
    }
}

/// EPM table split into population and coherence parts,
/// `p = p_i^ℓ p_P^k + p_i^ℓ p_χ^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpmSplit {
    pub p_pop: DMatrix<f64>,
    /// Signed; sums to zero.
    pub p_chi: DMatrix<f64>,
    pub initial_populations: Vec<f64>,
    pub final_populations_p: Vec<f64>,
    pub final_populations_chi: Vec<f64>,
}

impl EpmSplit {
    pub fn combined(&self) -> DMatrix<f64> {
        &self.p_pop + &self.p_chi
    }
}

pub fn epm_split(
    rho_i: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
) -> Result<EpmSplit> {
    check_inputs(rho_i, basis_i, basis_f, map)?;
    let (p_state, chi) = dephase_split(rho_i, basis_i)?;
    let p_i = basis_i.populations(rho_i.matrix());
    let p_p = basis_f.populations(&map.apply(p_state.matrix())?);
    let p_chi = basis_f.populations(&map.apply(&chi)?);
    check_trace_preserved(&p_p, 1.0)?;
    check_trace_preserved(&p_chi, 0.0)?;
    Ok(EpmSplit {
        p_pop: outer(&p_i, &p_p),
        p_chi: outer(&p_i, &p_chi),
        initial_populations: p_i,
        final_populations_p: p_p,
        final_populations_chi: p_chi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub delta_e: f64,
    pub prob: f64,
}

/// Distribution of `ΔE = E_f^k - E_i^ℓ` with coincident values merged.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyChangeDistribution {
    atoms: Vec<Atom>,
    merge_tol: f64,
}

impl EnergyChangeDistribution {
    /// Sorts `(ΔE, p)` pairs and merges runs whose consecutive gaps are at
    /// most `merge_tol`. A merged atom sits at the probability-weighted mean
    /// (plain mean when the run carries no probability).
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>, merge_tol: f64) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms = Vec::new();
        let mut run: Vec<(f64, f64)> = Vec::new();
        let flush = |run: &mut Vec<(f64, f64)>, atoms: &mut Vec<Atom>| {
            if run.is_empty() {
                return;
            }
            let prob: f64 = run.iter().map(|x| x.1).sum();
            let delta_e = if prob > 0.0 {
                run.iter().map(|x| x.0 * x.1).sum::<f64>() / prob
            } else {
                run.iter().map(|x| x.0).sum::<f64>() / run.len() as f64
            };
            atoms.push(Atom { delta_e, prob });
            run.clear();
        };
        for pair in pairs {
            if let Some(last) = run.last() {
                if pair.0 - last.0 > merge_tol {
                    flush(&mut run, &mut atoms);
                }
            }
            run.push(pair);
        }
        flush(&mut run, &mut atoms);
        Self { atoms, merge_tol }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob).sum()
    }

    pub fn support(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.delta_e).collect()
    }

    /// `Σ_atoms p f(ΔE)`.
    pub fn expect<T, F>(&self, f: F) -> T
    where
        F: Fn(f64) -> T,
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
    {
        self.atoms.iter().map(|a| f(a.delta_e) * a.prob).sum()
    }

    /// `½ Σ |p - q|` after aligning both supports within the merge tolerance.
    pub fn total_variation(&self, other: &EnergyChangeDistribution) -> f64 {
        let tol = self.merge_tol.max(other.merge_tol);
        let mut pairs: Vec<(f64, f64, f64)> = self
            .atoms
            .iter()
            .map(|a| (a.delta_e, a.prob, 0.0))
            .chain(other.atoms.iter().map(|a| (a.delta_e, 0.0, a.prob)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut tv = 0.0;
        let mut acc: (f64, f64, f64) = (f64::NEG_INFINITY, 0.0, 0.0);
        for (x, p, q) in pairs {
            if x - acc.0 > tol {
                tv += (acc.1 - acc.2).abs();
                acc = (x, 0.0, 0.0);
            }
            acc.0 = x;
            acc.1 += p;
            acc.2 += q;
        }
        tv += (acc.1 - acc.2).abs();
        0.5 * tv
    }
}

/// Collapses a joint table onto the values of `ΔE`.
pub fn energy_change_distribution(
    joint: &JointDistribution,
    merge_tol: f64,
) -> EnergyChangeDistribution {
    let pairs = joint.cells().map(|(_, _, de, p)| (de, p)).collect();
    EnergyChangeDistribution::from_pairs(pairs, merge_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::IdentityMap;
    use crate::operator::{energy_basis, real_diagonal, ComplexMatrix, C64};
    use approx::assert_abs_diff_eq;

    fn qubit_basis() -> EnergyBasis {
        energy_basis(&real_diagonal(&[0.0, 1.0]), 1e-9).unwrap()
    }

    fn plus() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::from_element(2, 2, C64::new(0.5, 0.0))).unwrap()
    }

    #[test]
    fn epm_eigenstate_identity_map() {
        let b = energy_basis(&real_diagonal(&[0.0, 1.0, 3.0]), 1e-9).unwrap();
        let rho = DensityMatrix::new(real_diagonal(&[1.0, 0.0, 0.0])).unwrap();
        let j = epm_joint(&rho, &b, &b, &IdentityMap(3)).unwrap();
        assert_eq!(j.get(0, 0), 1.0);
        assert_eq!(j.total(), 1.0);
    }

    #[test]
    fn epm_plus_state_identity_map() {
        let b = qubit_basis();
        let j = epm_joint(&plus(), &b, &b, &IdentityMap(2)).unwrap();
        for l in 0..2 {
            for k in 0..2 {
                assert_abs_diff_eq!(j.get(l, k), 0.25, epsilon = 1e-15);
            }
        }
        let dist = energy_change_distribution(&j, DEFAULT_MERGE_TOL);
        let atoms: Vec<(f64, f64)> = dist.atoms().iter().map(|a| (a.delta_e, a.prob)).collect();
        assert_eq!(atoms, vec![(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]);
    }

    #[test]
    fn tpm_identity_map_is_diagonal() {
        let b = qubit_basis();
        let j = tpm_joint(&plus(), &b, &b, &IdentityMap(2)).unwrap();
        assert_abs_diff_eq!(j.get(0, 0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(j.get(1, 1), 0.5, epsilon = 1e-15);
        assert_eq!(j.get(0, 1), 0.0);
        let dist = energy_change_distribution(&j, DEFAULT_MERGE_TOL);
        assert_eq!(dist.atoms().len(), 3);
        assert_abs_diff_eq!(dist.atoms()[1].prob, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn epm_split_cases() {
        let b = qubit_basis();
        let diag = DensityMatrix::new(real_diagonal(&[0.4, 0.6])).unwrap();
        let s = epm_split(&diag, &b, &b, &IdentityMap(2)).unwrap();
        assert!(s.p_chi.iter().all(|&x| x == 0.0));

        let s = epm_split(&plus(), &b, &b, &IdentityMap(2)).unwrap();
        assert!(s.p_pop.iter().all(|&x| (x - 0.25).abs() < 1e-15));
        assert!(s.p_chi.iter().all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn three_level_support() {
        let b = energy_basis(&real_diagonal(&[0.0, 1.0, 3.0]), 1e-9).unwrap();
        let rho = DensityMatrix::maximally_mixed(3);
        let j = epm_joint(&rho, &b, &b, &IdentityMap(3)).unwrap();
        let dist = energy_change_distribution(&j, DEFAULT_MERGE_TOL);
        assert_eq!(dist.support(), vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        let zero = dist.atoms().iter().find(|a| a.delta_e == 0.0).unwrap();
        assert_abs_diff_eq!(zero.prob, 3.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn merge_to_weighted_mean() {
        let d = EnergyChangeDistribution::from_pairs(vec![(0.0, 0.25), (0.3, 0.75)], 0.5);
        assert_eq!(d.atoms().len(), 1);
        assert_abs_diff_eq!(d.atoms()[0].delta_e, 0.225, epsilon = 1e-15);
        assert_abs_diff_eq!(d.atoms()[0].prob, 1.0, epsilon = 1e-15);

        let d = EnergyChangeDistribution::from_pairs(vec![(0.0, 0.25), (0.3, 0.75)], 0.1);
        assert_eq!(d.atoms().len(), 2);
    }

    #[test]
    fn joint_rejects_bad_tables() {
        let e = vec![0.0, 1.0];
        let neg = DMatrix::from_row_slice(2, 2, &[0.6, -0.1, 0.25, 0.25]);
        assert!(matches!(
            JointDistribution::new(neg, e.clone(), e.clone(), Protocol::Epm),
            Err(Error::NegativeProbability { .. })
        ));
        let short = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.1]);
        assert!(matches!(
            JointDistribution::new(short, e.clone(), e.clone(), Protocol::Epm),
            Err(Error::NormalizationViolation { .. })
        ));
        let tiny = DMatrix::from_row_slice(2, 2, &[0.5, -1e-13, 0.25, 0.25 + 1e-13]);
        let j = JointDistribution::new(tiny, e.clone(), e, Protocol::Epm).unwrap();
        assert_eq!(j.get(0, 1), 0.0);
    }

    #[test]
    fn non_trace_preserving_map_rejected() {
        struct Halve;
        impl QuantumMap for Halve {
            fn dim(&self) -> usize {
                2
            }
            fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
                Ok(a.scale(0.5))
            }
        }
        let b = qubit_basis();
        assert!(matches!(
            epm_joint(&plus(), &b, &b, &Halve),
            Err(Error::MapNotTracePreserving { .. })
        ));
    }

    #[test]
    fn mll_flags_degenerate_states() {
        let b = qubit_basis();
        let j = mll_joint(&DensityMatrix::maximally_mixed(2), &b, &b, &IdentityMap(2)).unwrap();
        assert!(j.basis_dependent());
        let j = mll_joint(&plus(), &b, &b, &IdentityMap(2)).unwrap();
        assert!(!j.basis_dependent());
    }

    #[test]
    fn energy_change_total_variation() {
        let a = EnergyChangeDistribution::from_pairs(vec![(0.0, 0.5), (1.0, 0.5)], 1e-9);
        let b = EnergyChangeDistribution::from_pairs(vec![(0.0, 0.25), (2.0, 0.75)], 1e-9);
        assert_abs_diff_eq!(a.total_variation(&b), 0.75, epsilon = 1e-15);
        assert_eq!(a.total_variation(&a), 0.0);
    }
}
