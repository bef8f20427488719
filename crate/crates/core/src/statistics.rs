//! Moments, entropies, characteristic functions and the fluctuation relation.
//!
//! Closed-form expressions are evaluated from traces of propagated operators
//! and are kept independent of the distribution-based route
//! ([`moment`], [`distribution_characteristic`]) so the two can check each
//! other. Hamiltonians are taken from the energy bases as `Σ_ℓ E_ℓ Π_ℓ`.

use crate::dynamics::QuantumMap;
use crate::error::{Error, Result};
use crate::operator::{
    dephase_split, eigh, energy_basis, ket_bra, max_abs, trace_product, validate_density,
    ComplexMatrix, DensityMatrix, EnergyBasis, C64, DEFAULT_DEGENERACY_TOL,
    DEFAULT_VALIDATION_TOL,
};
use crate::protocols::{
    energy_change_distribution, epm_joint, tpm_joint, EnergyChangeDistribution,
    JointDistribution, Protocol, DEFAULT_MERGE_TOL,
};

const I: C64 = C64::new(0.0, 1.0);

/// Tolerance for treating a map as unital in [`jarzynski_epm`].
pub const UNITALITY_TOL: f64 = 1e-8;
/// Largest block-diagonal part allowed in `rho_i - rho_th`.
pub const DECOMPOSITION_TOL: f64 = 1e-8;
const JARZYNSKI_TOL: f64 = 1e-8;

/// `Σ_atoms p ΔEⁿ`.
pub fn moment(dist: &EnergyChangeDistribution, n: u32) -> f64 {
    dist.expect(|de| de.powi(n as i32))
}

/// `Σ_atoms p e^{iuΔE}`.
pub fn distribution_characteristic(dist: &EnergyChangeDistribution, u: C64) -> C64 {
    dist.atoms()
        .iter()
        .map(|a| (I * u * a.delta_e).exp() * a.prob)
        .sum()
}

fn tr(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    trace_product(a, b).re
}

/// `⟨ΔE⟩ = Tr(H_f Φ[rho]) - Tr(H_i rho)`, shared by EPM and MLL.
pub fn first_moment_closed_form(
    rho_i: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
) -> Result<f64> {
    let h_i = basis_i.hamiltonian();
    let h_f = basis_f.hamiltonian();
    let rho_f = map.apply(rho_i.matrix())?;
    Ok(tr(&h_f, &rho_f) - tr(&h_i, rho_i.matrix()))
}

/// EPM second moment and its population/coherence split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMoment {
    pub total: f64,
    /// `⟨ΔE²⟩_P`, the total with `rho_i` replaced by its dephased part.
    pub population_part: f64,
    /// `Tr(H_f² Φ[χ]) - 2 Tr(Φ[χ] H_f) Tr(P H_i)`.
    pub coherence_part: f64,
}

impl SecondMoment {
    /// `(⟨ΔE²⟩ - ⟨ΔE²⟩_P) / ⟨ΔE²⟩`; zero when the total vanishes.
    pub fn relative_coherence(&self) -> f64 {
        if self.total == 0.0 {
            0.0
        } else {
            self.coherence_part / self.total
        }
    }
}

fn epm_second(h_i: &ComplexMatrix, h_f: &ComplexMatrix, rho: &ComplexMatrix, rho_f: &ComplexMatrix) -> f64 {
    let h_i2 = h_i * h_i;
    let h_f2 = h_f * h_f;
    tr(&h_i2, rho) + tr(&h_f2, rho_f) - 2.0 * tr(rho_f, h_f) * tr(rho, h_i)
}

pub fn second_moment_closed_form(
    rho_i: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
) -> Result<SecondMoment> {
    let h_i = basis_i.hamiltonian();
    let h_f = basis_f.hamiltonian();
    let (p, chi) = dephase_split(rho_i, basis_i)?;
    let rho_f = map.apply(rho_i.matrix())?;
    let p_f = map.apply(p.matrix())?;
    let chi_f = map.apply(&chi)?;

    let total = epm_second(&h_i, &h_f, rho_i.matrix(), &rho_f);
    let population_part = epm_second(&h_i, &h_f, p.matrix(), &p_f);
    let coherence_part =
        tr(&(&h_f * &h_f), &chi_f) - 2.0 * tr(&chi_f, &h_f) * tr(p.matrix(), &h_i);
    Ok(SecondMoment {
        total,
        population_part,
        coherence_part,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub first: f64,
    pub second: f64,
}

/// First and second moments of any protocol from trace formulas alone.
pub fn closed_form_moments(
    protocol: Protocol,
    rho_i: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
) -> Result<Moments> {
    let h_i = basis_i.hamiltonian();
    let h_f = basis_f.hamiltonian();
    let h_i2 = &h_i * &h_i;
    let h_f2 = &h_f * &h_f;
    let rho = rho_i.matrix();
    let e_i = tr(&h_i, rho);
    let e2_i = tr(&h_i2, rho);
    match protocol {
        Protocol::Epm => {
            let rho_f = map.apply(rho)?;
            Ok(Moments {
                first: tr(&h_f, &rho_f) - e_i,
                second: epm_second(&h_i, &h_f, rho, &rho_f),
            })
        }
        Protocol::Mll => {
            let rho_f = map.apply(rho)?;
            let eig = eigh(rho)?;
            let mut cross = 0.0;
            for (s, &weight) in eig.values().iter().enumerate() {
                let ket = ket_bra(&eig.vector(s));
                cross += weight * tr(&map.apply(&ket)?, &h_f) * tr(&ket, &h_i);
            }
            Ok(Moments {
                first: tr(&h_f, &rho_f) - e_i,
                second: e2_i + tr(&h_f2, &rho_f) - 2.0 * cross,
            })
        }
        Protocol::Tpm => {
            let dephased_f = map.apply(&basis_i.pinch(rho))?;
            let mut cross = 0.0;
            for level in basis_i.levels() {
                let block = &level.projector * rho * &level.projector;
                cross += level.energy * tr(&h_f, &map.apply(&block)?);
            }
            Ok(Moments {
                first: tr(&h_f, &dephased_f) - e_i,
                second: e2_i + tr(&h_f2, &dephased_f) - 2.0 * cross,
            })
        }
    }
}

/// `-Σ p ln p` in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(joint: &JointDistribution) -> f64 {
    -joint
        .cells()
        .map(|(_, _, _, p)| if p > 0.0 { p * p.ln() } else { 0.0 })
        .sum::<f64>()
}

/// `Σ p_MLL ln(p_MLL / p_EPM)`.
///
/// Fails with [`Error::SupportMismatch`] if the EPM table vanishes where the
/// MLL table carries more than `1e-12`.
pub fn mutual_information(p_mll: &JointDistribution, p_epm: &JointDistribution) -> Result<f64> {
    if p_mll.n_initial() != p_epm.n_initial() || p_mll.n_final() != p_epm.n_final() {
        return Err(Error::DimensionMismatch {
            expected: p_epm.n_initial() * p_epm.n_final(),
            found: p_mll.n_initial() * p_mll.n_final(),
        });
    }
    let mut info = 0.0;
    for (l, k, _, p) in p_mll.cells() {
        let q = p_epm.get(l, k);
        if q <= 0.0 {
            if p > 1e-12 {
                return Err(Error::SupportMismatch {
                    initial: l,
                    final_level: k,
                    mass: p,
                });
            }
            continue;
        }
        if p > 0.0 {
            info += p * (p / q).ln();
        }
    }
    Ok(info)
}

fn phase(basis: &EnergyBasis, sign: f64, u: C64) -> ComplexMatrix {
    basis.function(|e| (I * u * (sign * e)).exp())
}

/// `G(u) = ⟨e^{iuΔE}⟩` from trace formulas, for complex `u`.
///
/// * EPM: `Tr(e^{-iuH_i} rho) Tr(e^{iuH_f} Φ[rho])`
/// * TPM: `Tr(e^{iuH_f} Φ[e^{-iuH_i} P])` with `P` the Lüders-dephased state;
///   this is the same as using `rho` whenever `[rho, H_i] = 0`.
/// * MLL: `Σ_s p_s <s|e^{-iuH_i}|s> Tr(Φ[|s><s|] e^{iuH_f})`
pub fn characteristic_function(
    protocol: Protocol,
    rho_i: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
    u: C64,
) -> Result<C64> {
    let back = phase(basis_i, -1.0, u);
    let forward = phase(basis_f, 1.0, u);
    let rho = rho_i.matrix();
    match protocol {
        Protocol::Epm => {
            let rho_f = map.apply(rho)?;
            Ok(trace_product(&back, rho) * trace_product(&forward, &rho_f))
        }
        Protocol::Tpm => {
            let dephased = basis_i.pinch(rho);
            Ok(trace_product(&forward, &map.apply(&(&back * dephased))?))
        }
        Protocol::Mll => {
            let eig = eigh(rho)?;
            let mut g = C64::new(0.0, 0.0);
            for (s, &weight) in eig.values().iter().enumerate() {
                let ket = ket_bra(&eig.vector(s));
                g += trace_product(&ket, &back) * trace_product(&map.apply(&ket)?, &forward) * weight;
            }
            Ok(g)
        }
    }
}

/// `G = G_P + G_χ` for the EPM characteristic function:
/// `G_P = Tr(e^{-iuH_i} P) Tr(e^{iuH_f} Φ[P])`,
/// `G_χ = Tr(e^{-iuH_i} P) Tr(e^{iuH_f} Φ[χ])`.
pub fn characteristic_split(
    rho_i: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
    u: C64,
) -> Result<(C64, C64)> {
    let (p, chi) = dephase_split(rho_i, basis_i)?;
    let back = trace_product(&phase(basis_i, -1.0, u), p.matrix());
    let forward = phase(basis_f, 1.0, u);
    let g_p = back * trace_product(&forward, &map.apply(p.matrix())?);
    let g_chi = back * trace_product(&forward, &map.apply(&chi)?);
    Ok((g_p, g_chi))
}

/// Gibbs states `e^{-βH}/Z` for the initial and final Hamiltonians.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalReference {
    pub beta: f64,
    pub state_i: DensityMatrix,
    pub state_f: DensityMatrix,
    pub z_i: f64,
    pub z_f: f64,
    /// `ΔF = -β⁻¹ ln(Z_f / Z_i)`.
    pub delta_f: f64,
}

/// `(ln Z, e^{-βH}/Z)`, evaluated with the ground energy shifted out.
fn gibbs(basis: &EnergyBasis, beta: f64) -> Result<(f64, DensityMatrix)> {
    let e0 = basis.energies()[0];
    let shifted_z: f64 = basis
        .levels()
        .iter()
        .map(|l| l.multiplicity as f64 * (-beta * (l.energy - e0)).exp())
        .sum();
    let log_z = -beta * e0 + shifted_z.ln();
    let state = basis.function(|e| C64::new((-beta * (e - e0)).exp() / shifted_z, 0.0));
    let state = validate_density(state, DEFAULT_VALIDATION_TOL).map_err(Error::InvalidState)?;
    Ok((log_z, state))
}

pub fn thermal_state(h: &ComplexMatrix, beta: f64) -> Result<DensityMatrix> {
    let basis = energy_basis(h, DEFAULT_DEGENERACY_TOL)?;
    Ok(gibbs(&basis, beta)?.1)
}

impl ThermalReference {
    pub fn from_bases(basis_i: &EnergyBasis, basis_f: &EnergyBasis, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        let (log_z_i, state_i) = gibbs(basis_i, beta)?;
        let (log_z_f, state_f) = gibbs(basis_f, beta)?;
        Ok(Self {
            beta,
            state_i,
            state_f,
            z_i: log_z_i.exp(),
            z_f: log_z_f.exp(),
            delta_f: -(log_z_f - log_z_i) / beta,
        })
    }
}

pub fn thermal_reference(
    h_i: &ComplexMatrix,
    h_f: &ComplexMatrix,
    beta: f64,
) -> Result<ThermalReference> {
    let basis_i = energy_basis(h_i, DEFAULT_DEGENERACY_TOL)?;
    let basis_f = energy_basis(h_f, DEFAULT_DEGENERACY_TOL)?;
    ThermalReference::from_bases(&basis_i, &basis_f, beta)
}

/// Both sides of the EPM fluctuation relation for `rho_i = rho_th + χ`.
#[derive(Debug, Clone, PartialEq)]
pub struct JarzynskiReport {
    pub beta: f64,
    /// `⟨e^{-β(ΔE - ΔF)}⟩` over the EPM energy-change distribution.
    pub lhs: f64,
    /// `d Tr(rho_f^th Φ[rho_i^th])`.
    pub rhs_thermal: f64,
    /// `d Tr(rho_f^th Φ[χ])`.
    pub rhs_coherence: f64,
    /// `‖Φ[I] - I‖_max`.
    pub unitality_residual: f64,
    /// `d (Tr(rho_f^th Φ[rho_th]) + Tr(rho_f^th Φ[χ])) / Tr(rho_f^th Φ[I])`,
    /// the predicted `G(iβ) / G_TPM(iβ)`.
    pub ratio_general: f64,
    /// `G(iβ) / G_TPM(iβ)` from the EPM and TPM distributions.
    pub ratio_measured: f64,
    pub thermal: ThermalReference,
}

impl JarzynskiReport {
    pub fn rhs(&self) -> f64 {
        self.rhs_thermal + self.rhs_coherence
    }

    pub fn is_unital(&self) -> bool {
        self.unitality_residual <= UNITALITY_TOL
    }
}

fn real_laplace(dist: &EnergyChangeDistribution, beta: f64) -> f64 {
    dist.expect(|de| (-beta * de).exp())
}

/// Evaluates the fluctuation relation for an initial state that is the Gibbs
/// state at `beta` plus a coherence-only perturbation.
///
/// Fails with [`Error::DecompositionMismatch`] if `rho_i - rho_th` has a
/// block-diagonal part in the `H_i` eigenbasis (use
/// [`general_fluctuation_ratio`] for such states), and with
/// [`Error::InvariantViolation`] if the map is unital but the two sides of the
/// relation disagree by more than `1e-8`.
pub fn jarzynski_epm(
    rho_i: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
    beta: f64,
) -> Result<JarzynskiReport> {
    let thermal = ThermalReference::from_bases(basis_i, basis_f, beta)?;
    let chi = rho_i.matrix() - thermal.state_i.matrix();
    let residual = max_abs(&basis_i.pinch(&chi));
    if residual > DECOMPOSITION_TOL {
        return Err(Error::DecompositionMismatch { residual });
    }

    let d = rho_i.dim() as f64;
    let rho_f_th = thermal.state_f.matrix();
    let id = ComplexMatrix::identity(rho_i.dim(), rho_i.dim());
    let image_id = map.apply(&id)?;
    let unitality_residual = max_abs(&(&image_id - &id));
    let rhs_thermal = d * tr(rho_f_th, &map.apply(thermal.state_i.matrix())?);
    let rhs_coherence = d * tr(rho_f_th, &map.apply(&chi)?);
    let ratio_general = (rhs_thermal + rhs_coherence) / tr(rho_f_th, &image_id);

    let epm = energy_change_distribution(&epm_joint(rho_i, basis_i, basis_f, map)?, DEFAULT_MERGE_TOL);
    let tpm = energy_change_distribution(&tpm_joint(rho_i, basis_i, basis_f, map)?, DEFAULT_MERGE_TOL);
    let lhs = epm.expect(|de| (-beta * (de - thermal.delta_f)).exp());
    let ratio_measured = real_laplace(&epm, beta) / real_laplace(&tpm, beta);

    let report = JarzynskiReport {
        beta,
        lhs,
        rhs_thermal,
        rhs_coherence,
        unitality_residual,
        ratio_general,
        ratio_measured,
        thermal,
    };
    if report.is_unital() && (report.lhs - report.rhs()).abs() > JARZYNSKI_TOL {
        return Err(Error::InvariantViolation(format!(
            "fluctuation relation: lhs {} vs rhs {}",
            report.lhs,
            report.rhs()
        )));
    }
    Ok(report)
}

/// `G(iβ) / G_TPM(iβ)` for an arbitrary initial state, measured from the
/// distributions and predicted as `Tr(rho_f^th Φ[rho]) / Tr(rho_f^th Φ[ρ̃])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationRatio {
    pub measured: f64,
    pub predicted: f64,
}

/// Here `ρ̃ = e^{βH_i} P / Tr(e^{βH_i} P)` is built from the dephased state
/// `P`, which makes it a proper density matrix; it reduces to
/// `(rho_th)⁻¹ rho / Tr((rho_th)⁻¹ rho)` when `[rho, H_i] = 0`.
pub fn general_fluctuation_ratio(
    rho_i: &DensityMatrix,
    basis_i: &EnergyBasis,
    basis_f: &EnergyBasis,
    map: &dyn QuantumMap,
    beta: f64,
) -> Result<FluctuationRatio> {
    let thermal = ThermalReference::from_bases(basis_i, basis_f, beta)?;
    let e_max = *basis_i.energies().last().expect("non-empty basis");
    let boltzmann_inv = basis_i.function(|e| C64::new((beta * (e - e_max)).exp(), 0.0));
    let weighted = boltzmann_inv * basis_i.pinch(rho_i.matrix());
    let norm = crate::operator::trace(&weighted).re;
    let tilde = weighted / C64::new(norm, 0.0);

    let rho_f_th = thermal.state_f.matrix();
    let predicted = tr(rho_f_th, &map.apply(rho_i.matrix())?) / tr(rho_f_th, &map.apply(&tilde)?);

    let epm = energy_change_distribution(&epm_joint(rho_i, basis_i, basis_f, map)?, DEFAULT_MERGE_TOL);
    let tpm = energy_change_distribution(&tpm_joint(rho_i, basis_i, basis_f, map)?, DEFAULT_MERGE_TOL);
    Ok(FluctuationRatio {
        measured: real_laplace(&epm, beta) / real_laplace(&tpm, beta),
        predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{IdentityMap, Superoperator};
    use crate::operator::{real_diagonal, DEFAULT_DEGENERACY_TOL};
    use crate::protocols::{mll_joint, Protocol};
    use approx::assert_abs_diff_eq;

    fn qubit_basis(omega: f64) -> EnergyBasis {
        energy_basis(&real_diagonal(&[0.0, omega]), DEFAULT_DEGENERACY_TOL).unwrap()
    }

    fn plus() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::from_element(2, 2, C64::new(0.5, 0.0))).unwrap()
    }

    #[test]
    fn moments_of_delta_and_plus_state() {
        let delta = EnergyChangeDistribution::from_pairs(vec![(0.0, 1.0)], 1e-9);
        for n in 1..5 {
            assert_eq!(moment(&delta, n), 0.0);
        }
        let omega = 1.7;
        let b = qubit_basis(omega);
        let j = epm_joint(&plus(), &b, &b, &IdentityMap(2)).unwrap();
        let dist = energy_change_distribution(&j, DEFAULT_MERGE_TOL);
        assert_abs_diff_eq!(moment(&dist, 1), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(moment(&dist, 2), omega * omega / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn first_moment_identity_map_vanishes() {
        let b = qubit_basis(1.0);
        assert_abs_diff_eq!(
            first_moment_closed_form(&plus(), &b, &b, &IdentityMap(2)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn first_moment_pi_pulse() {
        let omega = 2.5;
        let b = qubit_basis(omega);
        let x = ComplexMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        );
        let flip = Superoperator::from_unitary(&x).unwrap();
        let ground = DensityMatrix::new(real_diagonal(&[1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(
            first_moment_closed_form(&ground, &b, &b, &flip).unwrap(),
            omega,
            epsilon = 1e-14
        );
    }

    #[test]
    fn coherence_part_vanishes_for_dephased_input() {
        let b = qubit_basis(1.0);
        let diag = DensityMatrix::new(real_diagonal(&[0.3, 0.7])).unwrap();
        let m = second_moment_closed_form(&diag, &b, &b, &IdentityMap(2)).unwrap();
        assert_eq!(m.coherence_part, 0.0);
        assert_eq!(m.total, m.population_part);
    }

    #[test]
    fn entropy_cases() {
        let b = qubit_basis(1.0);
        let ground = DensityMatrix::new(real_diagonal(&[1.0, 0.0])).unwrap();
        let delta = epm_joint(&ground, &b, &b, &IdentityMap(2)).unwrap();
        assert_eq!(shannon_entropy(&delta), 0.0);
        let uniform = epm_joint(&plus(), &b, &b, &IdentityMap(2)).unwrap();
        assert_abs_diff_eq!(shannon_entropy(&uniform), 4.0f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn mutual_information_pure_state_is_zero() {
        let b = qubit_basis(1.0);
        let epm = epm_joint(&plus(), &b, &b, &IdentityMap(2)).unwrap();
        let mll = mll_joint(&plus(), &b, &b, &IdentityMap(2)).unwrap();
        assert!(mutual_information(&mll, &epm).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn mutual_information_support_mismatch() {
        let b = qubit_basis(1.0);
        let ground = DensityMatrix::new(real_diagonal(&[1.0, 0.0])).unwrap();
        let delta = epm_joint(&ground, &b, &b, &IdentityMap(2)).unwrap();
        let spread = epm_joint(&plus(), &b, &b, &IdentityMap(2)).unwrap();
        assert!(matches!(
            mutual_information(&spread, &delta),
            Err(Error::SupportMismatch { .. })
        ));
    }

    #[test]
    fn characteristic_plus_state() {
        let omega = 1.3;
        let b = qubit_basis(omega);
        for &u in &[0.0, 0.4, 1.1, -2.7] {
            let g = characteristic_function(Protocol::Epm, &plus(), &b, &b, &IdentityMap(2), C64::new(u, 0.0))
                .unwrap();
            let expected = (u * omega / 2.0).cos().powi(2);
            assert_abs_diff_eq!(g.re, expected, epsilon = 1e-14);
            assert_abs_diff_eq!(g.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn characteristic_at_zero_is_one() {
        let b = qubit_basis(1.0);
        for p in Protocol::ALL {
            let g = characteristic_function(p, &plus(), &b, &b, &IdentityMap(2), C64::new(0.0, 0.0)).unwrap();
            assert!((g - C64::new(1.0, 0.0)).norm() <= 1e-12);
        }
    }

    #[test]
    fn thermal_reference_values() {
        let h = real_diagonal(&[0.0, 1.0, 3.0]);
        let t = thermal_reference(&h, &h, 1.0).unwrap();
        assert_eq!(t.delta_f, 0.0);
        assert_abs_diff_eq!(t.z_i, 1.0 + (-1.0f64).exp() + (-3.0f64).exp(), epsilon = 1e-14);

        let omega = 0.8;
        let beta = 2.0;
        let q = thermal_reference(&real_diagonal(&[0.0, omega]), &real_diagonal(&[0.0, omega]), beta).unwrap();
        assert_abs_diff_eq!(q.z_i, 1.0 + (-beta * omega).exp(), epsilon = 1e-14);

        assert!(thermal_reference(&h, &h, 0.0).is_err());
    }

    #[test]
    fn thermal_state_is_gibbs() {
        let h = real_diagonal(&[0.0, 1.0, 3.0]);
        let beta = 0.7;
        let rho = thermal_state(&h, beta).unwrap();
        let z: f64 = [0.0f64, 1.0, 3.0].iter().map(|e| (-beta * e).exp()).sum();
        for (i, e) in [0.0f64, 1.0, 3.0].iter().enumerate() {
            assert_abs_diff_eq!(rho.matrix()[(i, i)].re, (-beta * e).exp() / z, epsilon = 1e-14);
        }
    }

    #[test]
    fn jarzynski_identity_map_thermal_state() {
        // Φ = id, χ = 0: lhs = d Tr(rho_th²) = d Z(2β) / Z(β)²
        let h = real_diagonal(&[0.0, 1.0, 3.0]);
        let b = energy_basis(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let beta = 0.9;
        let rho = thermal_state(&h, beta).unwrap();
        let report = jarzynski_epm(&rho, &b, &b, &IdentityMap(3), beta).unwrap();
        let z = |b: f64| [0.0f64, 1.0, 3.0].iter().map(|e| (-b * e).exp()).sum::<f64>();
        let expected = 3.0 * z(2.0 * beta) / z(beta).powi(2);
        assert_abs_diff_eq!(report.lhs, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rhs_thermal, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rhs_coherence, 0.0, epsilon = 1e-15);
        assert!(report.is_unital());
    }

    #[test]
    fn jarzynski_rejects_non_thermal_populations() {
        let h = real_diagonal(&[0.0, 1.0]);
        let b = energy_basis(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(matches!(
            jarzynski_epm(&plus(), &b, &b, &IdentityMap(2), 1.0),
            Err(Error::DecompositionMismatch { .. })
        ));
    }
}
