//! Time-dependent Lindblad dynamics.
//!
//! The generator is
//!
//! ```text
//! L_t[A] = -i[H + H_drive(t), A] + Σ_j (L_j A L_j† - ½{L_j† L_j, A})
//! ```
//!
//! and is applied to arbitrary operators, not only states: the coherence part
//! `chi` of a state and non-Hermitian operators such as `exp(-iuH) rho` are
//! propagated through the same linear map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    check_dim, check_operator, eigh, hermiticity_deviation, matrix_unit, max_abs, ComplexMatrix,
    DensityMatrix, HERMITICITY_TOL, C64, ZERO,
};

pub const DEFAULT_DT: f64 = 1e-3;

const I: C64 = C64::new(0.0, 1.0);

/// Real time-dependent coupling strength of a drive term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Amplitude {
    Constant { value: f64 },
    /// `amplitude * sin²(frequency * t)`
    SinSquared { amplitude: f64, frequency: f64 },
    /// `amplitude * (1 - sin²(frequency * t))`
    CosSquared { amplitude: f64, frequency: f64 },
    /// Piecewise-linear interpolation, held constant outside the table.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl Amplitude {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Amplitude::Constant { value } => *value,
            Amplitude::SinSquared {
                amplitude,
                frequency,
            } => amplitude * (frequency * t).sin().powi(2),
            Amplitude::CosSquared {
                amplitude,
                frequency,
            } => amplitude * (1.0 - (frequency * t).sin().powi(2)),
            Amplitude::Tabulated { times, values } => {
                let k = times.partition_point(|&x| x <= t);
                if k == 0 {
                    values[0]
                } else if k == times.len() {
                    values[k - 1]
                } else {
                    let (t0, t1) = (times[k - 1], times[k]);
                    let w = (t - t0) / (t1 - t0);
                    values[k - 1] * (1.0 - w) + values[k] * w
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match self {
            Amplitude::Constant { value } => value.is_finite(),
            Amplitude::SinSquared {
                amplitude,
                frequency,
            }
            | Amplitude::CosSquared {
                amplitude,
                frequency,
            } => amplitude.is_finite() && frequency.is_finite(),
            Amplitude::Tabulated { times, values } => {
                !times.is_empty()
                    && times.len() == values.len()
                    && finite(times)
                    && finite(values)
                    && times.windows(2).all(|w| w[0] < w[1])
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("bad drive amplitude {self:?}")))
        }
    }
}

/// `amplitude(t) * operator` with a Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveTerm {
    pub operator: ComplexMatrix,
    pub amplitude: Amplitude,
}

/// Hamiltonian schedule plus jump operators (rates folded into the operators).
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    dim: usize,
    h_free: ComplexMatrix,
    drive: Vec<DriveTerm>,
    jumps: Vec<ComplexMatrix>,
    jump_adjoints: Vec<ComplexMatrix>,
    // ½ Σ L†L
    half_decay: ComplexMatrix,
}

impl LindbladModel {
    pub fn new(
        h_free: ComplexMatrix,
        drive: Vec<DriveTerm>,
        jumps: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let dim = check_operator(&h_free)?;
        ensure_hermitian(&h_free)?;
        for term in &drive {
            check_dim(&term.operator, dim)?;
            ensure_hermitian(&term.operator)?;
            term.amplitude.validate()?;
        }
        for jump in &jumps {
            check_dim(jump, dim)?;
        }
        let jump_adjoints: Vec<_> = jumps.iter().map(|l| l.adjoint()).collect();
        let half_decay = jumps
            .iter()
            .zip(&jump_adjoints)
            .fold(ComplexMatrix::zeros(dim, dim), |acc, (l, ld)| acc + ld * l)
            .scale(0.5);
        Ok(Self {
            dim,
            h_free,
            drive,
            jumps,
            jump_adjoints,
            half_decay,
        })
    }

    /// Closed system with a constant Hamiltonian.
    pub fn unitary(h: ComplexMatrix) -> Result<Self> {
        Self::new(h, Vec::new(), Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h_free(&self) -> &ComplexMatrix {
        &self.h_free
    }

    pub fn drive_terms(&self) -> &[DriveTerm] {
        &self.drive
    }

    pub fn jumps(&self) -> &[ComplexMatrix] {
        &self.jumps
    }

    pub fn drive_at(&self, t: f64) -> ComplexMatrix {
        self.drive
            .iter()
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, term| {
                acc + term.operator.scale(term.amplitude.at(t))
            })
    }

    /// `H + H_drive(t)`.
    pub fn hamiltonian_at(&self, t: f64) -> ComplexMatrix {
        if self.drive.is_empty() {
            return self.h_free.clone();
        }
        &self.h_free + self.drive_at(t)
    }

    pub fn without_drive(&self) -> Self {
        Self {
            drive: Vec::new(),
            ..self.clone()
        }
    }

    fn generator(&self, t: f64, a: &ComplexMatrix) -> ComplexMatrix {
        // -i(K A - A K†) with K = H - i·½ΣL†L covers the commutator and the anticommutator
        let k = self.hamiltonian_at(t) - self.half_decay.map(|z| z * I);
        let ka = &k * a;
        let akd = a * k.adjoint();
        let mut out = (ka - akd).map(|z| -I * z);
        for (l, ld) in self.jumps.iter().zip(&self.jump_adjoints) {
            out += l * a * ld;
        }
        out
    }
}

fn ensure_hermitian(a: &ComplexMatrix) -> Result<()> {
    let deviation = hermiticity_deviation(a);
    if deviation > HERMITICITY_TOL * max_abs(a).max(1.0) {
        return Err(Error::NonHermitianInput { deviation });
    }
    Ok(())
}

/// Right-hand side of the master equation at time `t` applied to `a`.
pub fn generator_apply(model: &LindbladModel, t: f64, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dim(a, model.dim)?;
    Ok(model.generator(t, a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub t_i: f64,
    pub t_f: f64,
    pub dt: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

impl PropagationConfig {
    pub fn new(t_i: f64, t_f: f64) -> Self {
        Self {
            t_i,
            t_f,
            dt: DEFAULT_DT,
            snapshot_times: Vec::new(),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    /// `n` snapshots evenly spaced on `(t_i, t_f]`.
    pub fn uniform_snapshots(t_i: f64, t_f: f64, n: usize) -> Vec<f64> {
        (1..=n)
            .map(|j| {
                if j == n {
                    t_f
                } else {
                    t_i + (t_f - t_i) * j as f64 / n as f64
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_i.is_finite() && self.t_f.is_finite() && self.t_f >= self.t_i) {
            return Err(Error::InvalidConfig(format!(
                "need finite t_f >= t_i, got [{}, {}]",
                self.t_i, self.t_f
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        let span = self.t_f - self.t_i;
        if span > 0.0 && self.dt > span {
            return Err(Error::StepSizeError { dt: self.dt, span });
        }
        if !self.snapshot_times.windows(2).all(|w| w[0] <= w[1]) {
            return Err(Error::InvalidConfig("snapshot times must be sorted".into()));
        }
        if self
            .snapshot_times
            .iter()
            .any(|&s| !(s >= self.t_i && s <= self.t_f))
        {
            return Err(Error::InvalidConfig(format!(
                "snapshot times must lie in [{}, {}]",
                self.t_i, self.t_f
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub final_op: ComplexMatrix,
    /// `(time, A(time))` for every requested snapshot, in order.
    pub snapshots: Vec<(f64, ComplexMatrix)>,
}

fn rk4_step(model: &LindbladModel, t: f64, h: f64, a: &mut ComplexMatrix) {
    let half = C64::new(0.5 * h, 0.0);
    let full = C64::new(h, 0.0);
    let k1 = model.generator(t, a);
    let k2 = model.generator(t + 0.5 * h, &(&*a + &k1 * half));
    let k3 = model.generator(t + 0.5 * h, &(&*a + &k2 * half));
    let k4 = model.generator(t + h, &(&*a + &k3 * full));
    let sixth = C64::new(h / 6.0, 0.0);
    *a += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * sixth;
}

/// Fixed `dt` steps from `from`, with one shortened step landing on `to`.
fn advance(model: &LindbladModel, a: &mut ComplexMatrix, from: f64, to: f64, dt: f64) {
    let span = to - from;
    if span <= 0.0 {
        return;
    }
    let n = (span / dt).floor() as usize;
    for k in 0..n {
        rk4_step(model, from + k as f64 * dt, dt, a);
    }
    let last = from + n as f64 * dt;
    let remainder = to - last;
    if remainder > 1e-9 * dt {
        rk4_step(model, last, remainder, a);
    }
}

fn integrate<F>(
    model: &LindbladModel,
    a0: &ComplexMatrix,
    config: &PropagationConfig,
    mut on_snapshot: F,
) -> Result<Propagation>
where
    F: FnMut(f64, &ComplexMatrix) -> Result<()>,
{
    config.validate()?;
    check_dim(a0, model.dim)?;
    let mut a = a0.clone();
    let mut t = config.t_i;
    let mut snapshots = Vec::with_capacity(config.snapshot_times.len());
    for &target in &config.snapshot_times {
        advance(model, &mut a, t, target, config.dt);
        t = target;
        on_snapshot(t, &a)?;
        snapshots.push((t, a.clone()));
    }
    advance(model, &mut a, t, config.t_f, config.dt);
    on_snapshot(config.t_f, &a)?;
    Ok(Propagation {
        final_op: a,
        snapshots,
    })
}

/// Propagates an arbitrary operator (no positivity checks).
pub fn propagate(
    model: &LindbladModel,
    a0: &ComplexMatrix,
    config: &PropagationConfig,
) -> Result<Propagation> {
    integrate(model, a0, config, |_, _| Ok(()))
}

/// Propagates a state and fails with [`Error::PositivityDrift`] if any snapshot
/// or the final state has an eigenvalue below `-rho.validation_tol()`.
pub fn propagate_state(
    model: &LindbladModel,
    rho: &DensityMatrix,
    config: &PropagationConfig,
) -> Result<Propagation> {
    let tol = rho.validation_tol();
    integrate(model, rho.matrix(), config, |time, a| {
        let hermitian = (a + a.adjoint()).scale(0.5);
        let min_eigenvalue = eigh(&hermitian)?.values()[0];
        if min_eigenvalue < -tol {
            return Err(Error::PositivityDrift {
                time,
                min_eigenvalue,
            });
        }
        Ok(())
    })
}

/// A linear map on `d x d` operators.
pub trait QuantumMap {
    fn dim(&self) -> usize;
    fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityMap(pub usize);

impl QuantumMap for IdentityMap {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dim(a, self.0)?;
        Ok(a.clone())
    }
}

/// Integrates the master equation on every call.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    pub model: &'a LindbladModel,
    pub config: PropagationConfig,
}

impl<'a> Propagator<'a> {
    pub fn new(model: &'a LindbladModel, config: PropagationConfig) -> Self {
        Self {
            model,
            config: PropagationConfig {
                snapshot_times: Vec::new(),
                ..config
            },
        }
    }
}

impl QuantumMap for Propagator<'_> {
    fn dim(&self) -> usize {
        self.model.dim
    }

    fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(propagate(self.model, a, &self.config)?.final_op)
    }
}

/// Matrix of a linear map on column-stacked operators: column `j*d + i` is
/// `vec(Φ[|i><j|])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn identity(dim: usize) -> Self {
        let n = dim * dim;
        Self {
            dim,
            matrix: ComplexMatrix::identity(n, n),
        }
    }

    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        check_dim(&matrix, dim * dim)?;
        Ok(Self { dim, matrix })
    }

    /// Builds the matrix column by column from the images of the matrix units.
    pub fn from_map<F>(dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&ComplexMatrix) -> Result<ComplexMatrix>,
    {
        let n = dim * dim;
        let mut matrix = ComplexMatrix::zeros(n, n);
        for j in 0..dim {
            for i in 0..dim {
                let image = f(&matrix_unit(dim, i, j))?;
                check_dim(&image, dim)?;
                matrix
                    .column_mut(j * dim + i)
                    .copy_from_slice(image.as_slice());
            }
        }
        Ok(Self { dim, matrix })
    }

    /// `A -> U A U†`.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        let dim = check_operator(u)?;
        let ud = u.adjoint();
        Self::from_map(dim, |a| Ok(u * a * &ud))
    }

    /// `A -> Σ_k K_k A K_k†`.
    pub fn from_kraus(kraus: &[ComplexMatrix]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParams("empty Kraus list".into()))?;
        let dim = check_operator(first)?;
        for k in kraus {
            check_dim(k, dim)?;
        }
        Self::from_map(dim, |a| {
            Ok(kraus
                .iter()
                .fold(ComplexMatrix::zeros(dim, dim), |acc, k| acc + k * a * k.adjoint()))
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `‖Φ[I] - I‖_max`; zero for unital maps.
    pub fn unitality_residual(&self) -> f64 {
        let id = ComplexMatrix::identity(self.dim, self.dim);
        let image = self.apply_unchecked(&id);
        max_abs(&(image - id))
    }

    fn apply_unchecked(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d, d);
        let src = a.as_slice();
        let dst = out.as_mut_slice();
        for (col, &x) in src.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (row, y) in dst.iter_mut().enumerate() {
                *y += self.matrix[(row, col)] * x;
            }
        }
        out
    }
}

impl QuantumMap for Superoperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dim(a, self.dim)?;
        Ok(self.apply_unchecked(a))
    }
}

fn propagate_units(
    model: &LindbladModel,
    config: &PropagationConfig,
) -> Result<Vec<Propagation>> {
    let d = model.dim;
    let units: Vec<(usize, usize)> = (0..d).flat_map(|j| (0..d).map(move |i| (i, j))).collect();
    let run = |&(i, j): &(usize, usize)| propagate(model, &matrix_unit(d, i, j), config);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        units.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        units.iter().map(run).collect()
    }
}

fn assemble(dim: usize, images: impl Iterator<Item = ComplexMatrix>) -> Superoperator {
    let n = dim * dim;
    let mut matrix = ComplexMatrix::zeros(n, n);
    for (col, image) in images.enumerate() {
        matrix.column_mut(col).copy_from_slice(image.as_slice());
    }
    Superoperator { dim, matrix }
}

/// `Φ_{t_f}` as a `d² x d²` matrix, from `d²` propagations.
pub fn superoperator_matrix(
    model: &LindbladModel,
    config: &PropagationConfig,
) -> Result<Superoperator> {
    let config = PropagationConfig {
        snapshot_times: Vec::new(),
        ..config.clone()
    };
    let runs = propagate_units(model, &config)?;
    Ok(assemble(model.dim, runs.into_iter().map(|p| p.final_op)))
}

/// `Φ_t` at every snapshot time of `config`.
pub fn superoperator_snapshots(
    model: &LindbladModel,
    config: &PropagationConfig,
) -> Result<Vec<(f64, Superoperator)>> {
    let runs = propagate_units(model, config)?;
    let times: Vec<f64> = config.snapshot_times.clone();
    Ok(times
        .iter()
        .enumerate()
        .map(|(s, &t)| {
            let images = runs.iter().map(|p| p.snapshots[s].1.clone());
            (t, assemble(model.dim, images))
        })
        .collect())
}

/// `‖L_t[rho]‖_max`: zero iff `rho` is stationary under the generator at `t`.
pub fn fixed_point_residual(model: &LindbladModel, rho: &DensityMatrix, t: f64) -> Result<f64> {
    Ok(max_abs(&generator_apply(model, t, rho.matrix())?))
}
