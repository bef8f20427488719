//! Model builders: the driven three-level machine and small qubit fixtures.
//!
//! The three-level system lives in the ordered basis `(g, A, B)` with energies
//! `(0, ω₁, ω₃)`, `ω_k = k ω₁`. Each transition `r` is coupled to its own bath
//! at inverse temperature `β_r`:
//!
//! | transition | gap | down rate        | up rate      |
//! |------------|-----|------------------|--------------|
//! | g ↔ A      | ω₁  | `γ (n₁ + 1)`     | `γ n₁`       |
//! | A ↔ B      | ω₂  | `γ (n₂ + 1)`     | `γ n₂`       |
//! | g ↔ B      | ω₃  | `γ (n₃ + 1)`     | `γ n₃`       |
//!
//! The drive is `g(t)(|g><B| + h.c.) + f(t)(|A><B| + h.c.)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Amplitude, DriveTerm, LindbladModel};
use crate::error::{Error, Result};
use crate::operator::{matrix_unit, real_diagonal, ComplexMatrix, C64};

pub const GROUND: usize = 0;
pub const LEVEL_A: usize = 1;
pub const LEVEL_B: usize = 2;

/// Bath occupation number convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occupation {
    /// `n = 1 / (e^{βω} + 1)`, as used for the published three-level runs.
    #[default]
    Paper,
    /// Bose-Einstein `n = 1 / (e^{βω} - 1)`; satisfies detailed balance.
    Bose,
}

pub fn thermal_occupation(beta: f64, omega: f64, occupation: Occupation) -> f64 {
    match occupation {
        Occupation::Paper => 1.0 / ((beta * omega).exp() + 1.0),
        Occupation::Bose => 1.0 / (beta * omega).exp_m1(),
    }
}

/// Omitted fields take their [`ThreeLevelParams::paper`] values when
/// deserializing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThreeLevelParams {
    pub omega1: f64,
    pub gamma: f64,
    /// `(β₁, β₂, β₃)` for the `ω₁`, `ω₂`, `ω₃` transitions.
    pub betas: [f64; 3],
    /// Coupling `g(t)` of `|g><B| + h.c.`.
    pub drive_g: Amplitude,
    /// Coupling `f(t)` of `|A><B| + h.c.`.
    pub drive_f: Amplitude,
    pub include_drive: bool,
    pub occupation: Occupation,
}

impl Default for ThreeLevelParams {
    fn default() -> Self {
        Self::paper()
    }
}

impl ThreeLevelParams {
    /// `ω₁ = 1`, `γ = 0.1`, `β = (3, 1, 2)`, `g(t) = 1.5 sin²(t)`,
    /// `f(t) = 1.5 [1 - sin²(2t)]`.
    pub fn paper() -> Self {
        Self {
            omega1: 1.0,
            gamma: 0.1,
            betas: [3.0, 1.0, 2.0],
            drive_g: Amplitude::SinSquared {
                amplitude: 1.5,
                frequency: 1.0,
            },
            drive_f: Amplitude::CosSquared {
                amplitude: 1.5,
                frequency: 2.0,
            },
            include_drive: true,
            occupation: Occupation::Paper,
        }
    }

    /// Undriven, all three baths at `beta`.
    pub fn equal_temperature(beta: f64, occupation: Occupation) -> Self {
        Self {
            betas: [beta; 3],
            include_drive: false,
            occupation,
            ..Self::paper()
        }
    }

    pub fn omegas(&self) -> [f64; 3] {
        [self.omega1, 2.0 * self.omega1, 3.0 * self.omega1]
    }

    pub fn occupations(&self) -> [f64; 3] {
        let w = self.omegas();
        [0, 1, 2].map(|r| thermal_occupation(self.betas[r], w[r], self.occupation))
    }

    /// Transition rates `(lower, upper, rate)` for the six jump operators
    /// `√η |lower><upper|` (decay) and `√η |upper><lower|` (excitation).
    pub fn rates(&self) -> [(usize, usize, f64); 6] {
        let [n1, n2, n3] = self.occupations();
        let g = self.gamma;
        [
            (GROUND, LEVEL_A, g * (n1 + 1.0)),
            (LEVEL_A, GROUND, g * n1),
            (LEVEL_A, LEVEL_B, g * (n2 + 1.0)),
            (LEVEL_B, LEVEL_A, g * n2),
            (GROUND, LEVEL_B, g * (n3 + 1.0)),
            (LEVEL_B, GROUND, g * n3),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.omega1) {
            return Err(Error::InvalidParams(format!("omega1 must be positive, got {}", self.omega1)));
        }
        if !positive(self.gamma) {
            return Err(Error::InvalidParams(format!("gamma must be positive, got {}", self.gamma)));
        }
        if let Some(b) = self.betas.iter().find(|&&b| !positive(b)) {
            return Err(Error::InvalidParams(format!("inverse temperatures must be positive, got {b}")));
        }
        self.drive_g.validate()?;
        self.drive_f.validate()?;
        Ok(())
    }
}

/// `H = ω₁ |A><A| + ω₃ |B><B|`.
pub fn three_level_hamiltonian(omega1: f64) -> ComplexMatrix {
    real_diagonal(&[0.0, omega1, 3.0 * omega1])
}

fn hermitian_coupling(i: usize, j: usize) -> ComplexMatrix {
    matrix_unit(3, i, j) + matrix_unit(3, j, i)
}

pub fn build_three_level(params: &ThreeLevelParams) -> Result<LindbladModel> {
    params.validate()?;
    let h = three_level_hamiltonian(params.omega1);
    let jumps = params
        .rates()
        .iter()
        .map(|&(to, from, rate)| matrix_unit(3, to, from).scale(rate.sqrt()))
        .collect();
    let drive = if params.include_drive {
        vec![
            DriveTerm {
                operator: hermitian_coupling(GROUND, LEVEL_B),
                amplitude: params.drive_g.clone(),
            },
            DriveTerm {
                operator: hermitian_coupling(LEVEL_A, LEVEL_B),
                amplitude: params.drive_f.clone(),
            },
        ]
    } else {
        Vec::new()
    };
    LindbladModel::new(h, drive, jumps)
}

/// Qubit `H = diag(0, ω)` with pure dephasing jump `√γ σ_z`.
pub fn qubit_dephasing(omega: f64, gamma: f64) -> Result<LindbladModel> {
    LindbladModel::new(
        real_diagonal(&[0.0, omega]),
        Vec::new(),
        vec![real_diagonal(&[1.0, -1.0]).scale(gamma.sqrt())],
    )
}

/// Qubit `H = diag(0, ω)` with a constant `σ_x` drive of strength `rabi / 2`.
pub fn qubit_rabi(omega: f64, rabi: f64) -> Result<LindbladModel> {
    let sx = matrix_unit(2, 0, 1) + matrix_unit(2, 1, 0);
    LindbladModel::new(
        real_diagonal(&[0.0, omega]),
        vec![DriveTerm {
            operator: sx.map(|z| z * C64::new(0.5, 0.0)),
            amplitude: Amplitude::Constant { value: rabi },
        }],
        Vec::new(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::fixed_point_residual;
    use crate::operator::{energy_basis, max_abs, DensityMatrix};
    use crate::statistics::thermal_state;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn paper_hamiltonian() {
        let model = build_three_level(&ThreeLevelParams::paper()).unwrap();
        assert_eq!(model.h_free(), &real_diagonal(&[0.0, 1.0, 3.0]));
        assert_eq!(model.jumps().len(), 6);
        assert_eq!(model.drive_terms().len(), 2);
        let basis = energy_basis(model.h_free(), 1e-9).unwrap();
        assert_eq!(basis.energies(), vec![0.0, 1.0, 3.0]);
    }

    #[test]
    fn paper_occupation_value() {
        let n1 = ThreeLevelParams::paper().occupations()[0];
        assert_abs_diff_eq!(n1, 1.0 / (3.0f64.exp() + 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(n1, 0.047426, epsilon = 1e-6);
    }

    #[test]
    fn drive_toggle_only_changes_drive() {
        let on = build_three_level(&ThreeLevelParams::paper()).unwrap();
        let off = build_three_level(&ThreeLevelParams {
            include_drive: false,
            ..ThreeLevelParams::paper()
        })
        .unwrap();
        assert_eq!(on.h_free(), off.h_free());
        assert_eq!(on.jumps(), off.jumps());
        assert!(off.drive_terms().is_empty());
        assert_eq!(on.without_drive(), off);
    }

    #[test]
    fn drive_schedule_at_quarter_period() {
        let model = build_three_level(&ThreeLevelParams::paper()).unwrap();
        let t = std::f64::consts::FRAC_PI_2;
        let h = model.hamiltonian_at(t);
        assert_abs_diff_eq!(h[(GROUND, LEVEL_B)].re, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(h[(LEVEL_B, LEVEL_A)].re, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn gibbs_is_fixed_point_with_bose_occupation() {
        for &beta in &[0.5, 1.0, 2.0] {
            let params = ThreeLevelParams::equal_temperature(beta, Occupation::Bose);
            let model = build_three_level(&params).unwrap();
            let gibbs = thermal_state(model.h_free(), beta).unwrap();
            assert!(fixed_point_residual(&model, &gibbs, 0.0).unwrap() <= 1e-10);
            let mixed = DensityMatrix::maximally_mixed(3);
            assert!(fixed_point_residual(&model, &mixed, 0.0).unwrap() > 1e-3);
        }
    }

    #[test]
    fn gibbs_is_not_fixed_under_paper_occupation() {
        // (n + 1) / n = e^{βω} + 2 for the paper's occupation, so detailed balance fails
        let params = ThreeLevelParams::equal_temperature(1.0, Occupation::Paper);
        let model = build_three_level(&params).unwrap();
        let gibbs = thermal_state(model.h_free(), 1.0).unwrap();
        assert!(fixed_point_residual(&model, &gibbs, 0.0).unwrap() > 1e-4);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = ThreeLevelParams::paper();
        p.gamma = 0.0;
        assert!(matches!(build_three_level(&p), Err(Error::InvalidParams(_))));
        let mut p = ThreeLevelParams::paper();
        p.betas[1] = -1.0;
        assert!(matches!(build_three_level(&p), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn qubit_fixtures_are_valid() {
        let m = qubit_rabi(1.0, 0.5).unwrap();
        assert!(max_abs(&(m.hamiltonian_at(0.0) - m.hamiltonian_at(9.0))) == 0.0);
        assert_eq!(qubit_dephasing(1.0, 0.1).unwrap().jumps().len(), 1);
    }

    proptest! {
        #[test]
        fn rates_are_nonnegative(
            omega1 in 1e-3f64..10.0,
            gamma in 1e-3f64..5.0,
            b1 in 1e-3f64..20.0,
            b2 in 1e-3f64..20.0,
            b3 in 1e-3f64..20.0,
            bose in any::<bool>(),
        ) {
            let params = ThreeLevelParams {
                omega1,
                gamma,
                betas: [b1, b2, b3],
                occupation: if bose { Occupation::Bose } else { Occupation::Paper },
                ..ThreeLevelParams::paper()
            };
            for (_, _, rate) in params.rates() {
                prop_assert!(rate >= 0.0 && rate.is_finite());
            }
        }
    }
}
