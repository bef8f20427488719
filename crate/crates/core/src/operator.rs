//! Dense complex operator algebra.
//!
//! Everything here works on small dense `d x d` complex matrices: Hermitian
//! diagonalization with a fixed phase convention, energy eigenspace projectors,
//! spectral functions of Hermitian operators, density-matrix validation, the
//! block-dephasing split `rho = P + chi` and the l1 coherence measure.

use std::fmt;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Dense square complex matrix. Row/column indices refer to the computational
/// basis unless a function says otherwise.
pub type ComplexMatrix = DMatrix<C64>;

/// Absolute Hermiticity tolerance (scaled by `max(1, max|A_ij|)`).
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;
pub const DEFAULT_VALIDATION_TOL: f64 = 1e-8;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Checks that `a` is square, non-empty and finite; returns its dimension.
pub fn check_operator(a: &ComplexMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(a.nrows())
}

pub(crate) fn check_dim(a: &ComplexMatrix, dim: usize) -> Result<()> {
    let found = check_operator(a)?;
    if found != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found,
        });
    }
    Ok(())
}

/// Largest entry modulus, `max_ij |A_ij|`.
pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max_ij |A_ij - conj(A_ji)|`.
pub fn hermiticity_deviation(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    let deviation = hermiticity_deviation(a);
    if deviation > HERMITICITY_TOL * max_abs(a).max(1.0) {
        return Err(Error::NonHermitianInput { deviation });
    }
    Ok(())
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// The matrix unit `|i><j|` in dimension `dim`.
pub fn matrix_unit(dim: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(i, j)] = ONE;
    m
}

pub fn real_diagonal(entries: &[f64]) -> ComplexMatrix {
    let d = DVector::from_iterator(entries.len(), entries.iter().map(|&x| C64::new(x, 0.0)));
    ComplexMatrix::from_diagonal(&d)
}

/// Rank-one operator `|v><v|`.
pub fn ket_bra(v: &DVector<C64>) -> ComplexMatrix {
    v * v.adjoint()
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
///
/// Each eigenvector is rotated so that its largest-magnitude component (first
/// one on ties) is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    values: Vec<f64>,
    vectors: ComplexMatrix,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column `i` is the eigenvector of `values()[i]`.
    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> DVector<C64> {
        self.vectors.column(i).into_owned()
    }

    /// `V f(Λ) V†`.
    pub fn apply_function<F>(&self, f: F) -> ComplexMatrix
    where
        F: Fn(f64) -> C64,
    {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fj = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_function(|x| C64::new(x, 0.0))
    }
}

/// Diagonalizes a Hermitian matrix.
pub fn eigh(a: &ComplexMatrix) -> Result<Eigensystem> {
    let n = check_operator(a)?;
    check_hermitian(a)?;

    let sym = (a + a.adjoint()).scale(0.5);
    let max_iterations = (100 * n * n).max(1000);
    let decomposition = SymmetricEigen::try_new(sym, f64::EPSILON, max_iterations)
        .ok_or(Error::NoConvergence { max_iterations })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        decomposition.eigenvalues[i]
            .total_cmp(&decomposition.eigenvalues[j])
            .then(i.cmp(&j))
    });

    let values = order.iter().map(|&i| decomposition.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut column = decomposition.eigenvectors.column(src).into_owned();
        let norm = column.norm();
        column /= C64::new(norm, 0.0);
        fix_phase(&mut column);
        vectors.set_column(dst, &column);
    }
    Ok(Eigensystem { values, vectors })
}

fn fix_phase(v: &mut DVector<C64>) {
    let mut pivot = 0;
    let mut best = -1.0;
    for (i, z) in v.iter().enumerate() {
        // strict comparison with slack so near-ties resolve to the first index
        if z.norm() > best + 1e-12 {
            best = z.norm();
            pivot = i;
        }
    }
    if best > 0.0 {
        let phase = v[pivot] / C64::new(v[pivot].norm(), 0.0);
        *v *= phase.conj();
        v[pivot] = C64::new(v[pivot].re, 0.0);
    }
}

/// `V f(Λ) V†` for Hermitian `a`.
pub fn matrix_function_hermitian<F>(a: &ComplexMatrix, f: F) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> C64,
{
    Ok(eigh(a)?.apply_function(f))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLevel {
    pub energy: f64,
    /// Orthogonal projector onto the (possibly degenerate) eigenspace.
    pub projector: ComplexMatrix,
    pub multiplicity: usize,
}

/// Spectral decomposition of a Hamiltonian with eigenvalues grouped into
/// degenerate levels.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBasis {
    levels: Vec<EnergyLevel>,
    degeneracy_tol: f64,
    eigensystem: Eigensystem,
}

impl EnergyBasis {
    pub fn dim(&self) -> usize {
        self.eigensystem.dim()
    }

    pub fn levels(&self) -> &[EnergyLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn projector(&self, level: usize) -> &ComplexMatrix {
        &self.levels[level].projector
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    pub fn eigensystem(&self) -> &Eigensystem {
        &self.eigensystem
    }

    pub fn is_degenerate(&self) -> bool {
        self.levels.len() < self.dim()
    }

    /// `Σ_ℓ f(E_ℓ) Π_ℓ`, using the grouped level energies.
    pub fn function<F>(&self, f: F) -> ComplexMatrix
    where
        F: Fn(f64) -> C64,
    {
        let d = self.dim();
        self.levels
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, level| {
                acc + &level.projector * f(level.energy)
            })
    }

    /// The Hamiltonian rebuilt from its levels, `Σ_ℓ E_ℓ Π_ℓ`.
    pub fn hamiltonian(&self) -> ComplexMatrix {
        self.function(|e| C64::new(e, 0.0))
    }

    /// Populations `Tr(A Π_ℓ)` of every level.
    pub fn populations(&self, a: &ComplexMatrix) -> Vec<f64> {
        self.levels
            .iter()
            .map(|level| trace_product(a, &level.projector).re)
            .collect()
    }

    /// Lüders pinching `Σ_ℓ Π_ℓ A Π_ℓ`.
    pub fn pinch(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        self.levels
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, level| {
                acc + &level.projector * a * &level.projector
            })
    }
}

/// Groups the spectrum of `h` into levels.
///
/// Consecutive sorted eigenvalues closer than `degeneracy_tol` join the same
/// level (single linkage); the level energy is the mean of its members.
pub fn energy_basis(h: &ComplexMatrix, degeneracy_tol: f64) -> Result<EnergyBasis> {
    let eigensystem = eigh(h)?;
    let values = eigensystem.values();
    let d = values.len();

    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..d {
        if values[i] - values[i - 1] <= degeneracy_tol {
            groups.last_mut().expect("non-empty").push(i);
        } else {
            groups.push(vec![i]);
        }
    }

    let levels = groups
        .into_iter()
        .map(|members| {
            let energy = members.iter().map(|&i| values[i]).sum::<f64>() / members.len() as f64;
            let projector = members
                .iter()
                .fold(ComplexMatrix::zeros(d, d), |acc, &i| {
                    acc + ket_bra(&eigensystem.vector(i))
                });
            EnergyLevel {
                energy,
                projector,
                multiplicity: members.len(),
            }
        })
        .collect();

    Ok(EnergyBasis {
        levels,
        degeneracy_tol,
        eigensystem,
    })
}

/// Which density-matrix invariant a candidate breaks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityViolation {
    NotSquare,
    NonFinite,
    NotHermitian,
    Trace,
    Negativity,
}

/// Structured rejection from [`validate_density`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityDiagnostic {
    pub tol: f64,
    pub hermiticity_deviation: f64,
    /// Signed `Tr(M) - 1` (real part).
    pub trace_excess: f64,
    pub min_eigenvalue: f64,
    pub violations: Vec<DensityViolation>,
}

impl DensityDiagnostic {
    /// Magnitude of the most negative eigenvalue, zero if none.
    pub fn negativity(&self) -> f64 {
        (-self.min_eigenvalue).max(0.0)
    }
}

impl fmt::Display for DensityDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for v in &self.violations {
            parts.push(match v {
                DensityViolation::NotSquare => "not square".to_string(),
                DensityViolation::NonFinite => "non-finite entries".to_string(),
                DensityViolation::NotHermitian => {
                    format!("hermiticity deviation {:e}", self.hermiticity_deviation)
                }
                DensityViolation::Trace => format!("trace excess {:e}", self.trace_excess),
                DensityViolation::Negativity => format!("negativity {:e}", self.negativity()),
            });
        }
        write!(f, "{} (tol {:e})", parts.join(", "), self.tol)
    }
}

/// A validated quantum state: Hermitian, unit trace and positive semidefinite
/// within `validation_tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    validation_tol: f64,
}

impl DensityMatrix {
    /// Validates with [`DEFAULT_VALIDATION_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        validate_density(matrix, DEFAULT_VALIDATION_TOL).map_err(Error::InvalidState)
    }

    /// Normalized pure state `|psi><psi|`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidParams("zero state vector".into()));
        }
        let psi = psi / C64::new(norm, 0.0);
        Self::new(ket_bra(&psi))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let matrix = ComplexMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0);
        Self {
            matrix,
            validation_tol: DEFAULT_VALIDATION_TOL,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn validation_tol(&self) -> f64 {
        self.validation_tol
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.matrix, &self.matrix).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.matrix)
            .map(|e| e.values()[0])
            .unwrap_or(f64::NAN)
    }
}

/// Accepts `m` iff it is Hermitian, `|Tr m - 1| <= tol` and its smallest
/// eigenvalue is `>= -tol`. Never repairs the input.
pub fn validate_density(m: ComplexMatrix, tol: f64) -> Result<DensityMatrix, DensityDiagnostic> {
    let mut diag = DensityDiagnostic {
        tol,
        hermiticity_deviation: 0.0,
        trace_excess: 0.0,
        min_eigenvalue: f64::NAN,
        violations: Vec::new(),
    };
    match check_operator(&m) {
        Ok(_) => {}
        Err(Error::NonFinite) => {
            diag.violations.push(DensityViolation::NonFinite);
            return Err(diag);
        }
        Err(_) => {
            diag.violations.push(DensityViolation::NotSquare);
            return Err(diag);
        }
    }

    diag.hermiticity_deviation = hermiticity_deviation(&m);
    if diag.hermiticity_deviation > tol {
        diag.violations.push(DensityViolation::NotHermitian);
    }
    diag.trace_excess = trace(&m).re - 1.0;
    if diag.trace_excess.abs() > tol {
        diag.violations.push(DensityViolation::Trace);
    }
    let hermitian_part = (&m + m.adjoint()).scale(0.5);
    diag.min_eigenvalue = match eigh(&hermitian_part) {
        Ok(e) => e.values()[0],
        Err(_) => f64::NAN,
    };
    if !(diag.min_eigenvalue >= -tol) {
        diag.violations.push(DensityViolation::Negativity);
    }

    if diag.violations.is_empty() {
        Ok(DensityMatrix {
            matrix: m,
            validation_tol: tol,
        })
    } else {
        Err(diag)
    }
}

/// Splits `rho = P + chi` with `P = Σ_ℓ Π_ℓ rho Π_ℓ` the block-dephased state
/// and `chi` the traceless coherence remainder.
pub fn dephase_split(
    rho: &DensityMatrix,
    basis: &EnergyBasis,
) -> Result<(DensityMatrix, ComplexMatrix)> {
    check_dim(rho.matrix(), basis.dim())?;
    let p = basis.pinch(rho.matrix());
    let chi = rho.matrix() - &p;
    let p = validate_density(p, rho.validation_tol()).map_err(Error::InvalidState)?;
    Ok((p, chi))
}

/// `C_L1 = ½ Σ_{i≠j} |rho_ij|` with matrix elements taken in the eigenvector
/// basis of `basis`.
///
/// The ½ prefactor follows the convention used for the three-level
/// experiments; the resource-theory literature usually omits it.
pub fn coherence_l1(rho: &DensityMatrix, basis: &EnergyBasis) -> Result<f64> {
    check_dim(rho.matrix(), basis.dim())?;
    let v = basis.eigensystem().vectors();
    let in_basis = v.adjoint() * rho.matrix() * v;
    let n = in_basis.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += in_basis[(i, j)].norm();
            }
        }
    }
    Ok(0.5 * sum)
}
