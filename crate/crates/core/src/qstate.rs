//! Dense complex-matrix kernel for quantum states.
//!
//! Matrices are at most 16×16 here, so everything is dense and exact-ish:
//! norms come from closed forms or Hermitian eigendecompositions where
//! possible, and from an SVD otherwise.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Any square complex matrix; used for trace-norm arguments and channel inputs.
pub type MatrixOperator = DMatrix<Complex64>;

/// Hermiticity and unit-trace tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;
/// Largest supported register.
pub const MAX_QUBITS: usize = 4;

pub(crate) const SVD_MAX_ITER: usize = 1000;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Number of qubits `n` with `2^n == dim`, if any.
pub(crate) fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::Domain(format!(
            "dimension {dim} is not 2^n with n >= 1"
        )));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::Domain(format!(
            "{n} qubits requested; at most {MAX_QUBITS} are supported"
        )));
    }
    Ok(n)
}

/// A computational-basis label `i₁…iₙ`. The leftmost bit is qubit 1, the
/// left tensor factor, and therefore the most significant bit of the index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    /// The `n`-bit label of basis index `index`.
    pub fn from_index(index: usize, n: usize) -> Self {
        Self((0..n).map(|q| (index >> (n - 1 - q)) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Basis index of `|i₁…iₙ⟩`.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Spec("empty bitstring".into()));
        }
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Spec(format!("invalid bit `{other}` in `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// An `n`-qubit density matrix: Hermitian, positive semidefinite, trace one.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: MatrixOperator,
}

impl DensityMatrix {
    /// Validates `m` against the density-matrix invariants.
    pub fn new(m: MatrixOperator) -> Result<Self> {
        Self::validated(m, STATE_TOL)
    }

    pub(crate) fn validated(m: MatrixOperator, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let n = qubits_for_dim(m.nrows())?;
        let herm = hermitian_defect(&m);
        if herm > tol {
            return Err(Error::Domain(format!(
                "matrix is not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::Domain(format!("trace {tr} is not 1")));
        }
        let min = min_hermitian_eigenvalue(&m)?;
        if min < -PSD_TOL {
            return Err(Error::Domain(format!(
                "matrix is not positive semidefinite (min eigenvalue {min:.3e})"
            )));
        }
        Ok(Self { n, m })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_matrix_unchecked(m: MatrixOperator) -> Self {
        let n = m.nrows().trailing_zeros() as usize;
        Self { n, m }
    }

    /// `|v⟩⟨v|` for a computational-basis label.
    pub fn basis(v: &BitString) -> Result<Self> {
        let dim = 1usize << v.len();
        qubits_for_dim(dim)?;
        let mut m = MatrixOperator::zeros(dim, dim);
        let i = v.index();
        m[(i, i)] = c(1.0, 0.0);
        Ok(Self { n: v.len(), m })
    }

    /// `|ψ⟩⟨ψ|` for a state vector, normalized first.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let n = qubits_for_dim(psi.len())?;
        let norm = psi.norm();
        if norm < 1e-300 {
            return Err(Error::Domain("zero state vector".into()));
        }
        let u = psi / c(norm, 0.0);
        Ok(Self {
            n,
            m: &u * u.adjoint(),
        })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let dim = 1usize << n;
        qubits_for_dim(dim)?;
        Ok(Self {
            n,
            m: MatrixOperator::identity(dim, dim) / c(dim as f64, 0.0),
        })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &MatrixOperator {
        &self.m
    }

    pub fn into_matrix(self) -> MatrixOperator {
        self.m
    }

    /// `Tr(ρ²)`, equal to one exactly for pure states.
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ.
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    /// The `(p, α)` coordinates of a one-qubit state.
    pub fn p_alpha(&self) -> Result<RhoPAlpha> {
        if self.n != 1 {
            return Err(Error::Dimension {
                expected: 1,
                found: self.n,
            });
        }
        Ok(RhoPAlpha {
            p: self.m[(0, 0)].re,
            alpha: self.m[(1, 0)],
        })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let m = tensor(&self.m, &other.m);
        qubits_for_dim(m.nrows())?;
        Ok(Self::from_matrix_unchecked(m))
    }
}

/// One-qubit state coordinates: `ρ(p, α) = p|0⟩⟨0| + (1−p)|1⟩⟨1| + α|1⟩⟨0| + α*|0⟩⟨1|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoPAlpha {
    pub p: f64,
    pub alpha: Complex64,
}

impl RhoPAlpha {
    pub fn is_pure(&self, tol: f64) -> bool {
        (self.alpha.norm_sqr() - self.p * (1.0 - self.p)).abs() <= tol
    }
}

/// Builds `ρ(p, α)`; fails when `|α|² > p(1−p)` beyond tolerance.
pub fn rho_of(p: f64, alpha: Complex64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} is outside [0, 1]")));
    }
    if alpha.norm_sqr() > p * (1.0 - p) + STATE_TOL {
        return Err(Error::Domain(format!(
            "|alpha|^2 = {} exceeds p(1-p) = {}",
            alpha.norm_sqr(),
            p * (1.0 - p)
        )));
    }
    let m = MatrixOperator::from_row_slice(2, 2, &[c(p, 0.0), alpha.conj(), alpha, c(1.0 - p, 0.0)]);
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Largest elementwise deviation from Hermiticity.
pub fn hermitian_defect(m: &MatrixOperator) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of the Hermitian part `(M + M†)/2`, ascending.
pub fn hermitian_eigenvalues(m: &MatrixOperator) -> Result<Vec<f64>> {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = h
        .try_symmetric_eigen(f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numeric("Hermitian eigendecomposition did not converge".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub(crate) fn min_hermitian_eigenvalue(m: &MatrixOperator) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?[0])
}

fn trace_norm_2x2(v: &MatrixOperator) -> f64 {
    // (σ₁ + σ₂)² = ‖V‖_F² + 2|det V|
    let det = v[(0, 0)] * v[(1, 1)] - v[(0, 1)] * v[(1, 0)];
    let fro: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    (fro + 2.0 * det.norm()).max(0.0).sqrt()
}

/// Singular triples of a square matrix, read off the Hermitian dilation
/// `[[0, V], [V†, 0]]`, whose eigenvalues are `±σ`. This keeps absolute
/// precision for small singular values; nalgebra's complex SVD does not
/// reliably converge to the right values at machine tolerance.
pub(crate) struct SingularTriples {
    /// Descending.
    pub values: Vec<f64>,
    /// `left[k]`, `right[k]` with `V·right[k] = values[k]·left[k]`.
    pub left: Vec<DVector<Complex64>>,
    pub right: Vec<DVector<Complex64>>,
}

pub(crate) fn singular_triples(v: &MatrixOperator) -> Result<SingularTriples> {
    let n = v.nrows();
    if v.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            found: v.ncols(),
        });
    }
    let mut dil = MatrixOperator::zeros(2 * n, 2 * n);
    dil.view_mut((0, n), (n, n)).copy_from(v);
    dil.view_mut((n, 0), (n, n)).copy_from(&v.adjoint());
    let eig = dil
        .try_symmetric_eigen(f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numeric("Hermitian eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let scale = std::f64::consts::SQRT_2;
    let mut out = SingularTriples {
        values: Vec::with_capacity(n),
        left: Vec::with_capacity(n),
        right: Vec::with_capacity(n),
    };
    for &k in order.iter().take(n) {
        let col = eig.eigenvectors.column(k);
        out.values.push(eig.eigenvalues[k].max(0.0));
        out.left.push(col.rows(0, n) * c(scale, 0.0));
        out.right.push(col.rows(n, n) * c(scale, 0.0));
    }
    Ok(out)
}

/// Singular values of `v`, descending.
pub fn singular_values(v: &MatrixOperator) -> Result<Vec<f64>> {
    Ok(singular_triples(v)?.values)
}

/// `‖V‖₁ = Tr √(V†V)`, the sum of singular values.
pub fn trace_norm(v: &MatrixOperator) -> Result<f64> {
    if !v.is_square() {
        return Err(Error::Dimension {
            expected: v.nrows(),
            found: v.ncols(),
        });
    }
    if v.nrows() == 2 {
        return Ok(trace_norm_2x2(v));
    }
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if hermitian_defect(v) <= 1e-14 * scale.max(1.0) {
        return Ok(hermitian_eigenvalues(v)?.iter().map(|l| l.abs()).sum());
    }
    Ok(singular_values(v)?.iter().sum())
}

/// Kronecker product `A ⊗ B`; `A` is the left (more significant) factor.
pub fn tensor(a: &MatrixOperator, b: &MatrixOperator) -> MatrixOperator {
    a.kronecker(b)
}

/// `⟨v|ρ|v⟩`, the probability of observing `v` in a computational-basis measurement.
pub fn measure_prob(rho: &DensityMatrix, v: &BitString) -> Result<f64> {
    if v.len() != rho.qubits() {
        return Err(Error::Dimension {
            expected: rho.qubits(),
            found: v.len(),
        });
    }
    let i = v.index();
    Ok(rho.matrix()[(i, i)].re)
}

/// The six axis states of the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Zeta {
    XPlus,
    XMinus,
    YPlus,
    YMinus,
    ZPlus,
    ZMinus,
}

impl Zeta {
    pub const ALL: [Zeta; 6] = [
        Zeta::XPlus,
        Zeta::XMinus,
        Zeta::YPlus,
        Zeta::YMinus,
        Zeta::ZPlus,
        Zeta::ZMinus,
    ];

    pub fn ket(self) -> DVector<Complex64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = match self {
            Zeta::XPlus => [c(h, 0.0), c(h, 0.0)],
            Zeta::XMinus => [c(h, 0.0), c(-h, 0.0)],
            Zeta::YPlus => [c(h, 0.0), c(0.0, h)],
            Zeta::YMinus => [c(h, 0.0), c(0.0, -h)],
            Zeta::ZPlus => [c(1.0, 0.0), c(0.0, 0.0)],
            Zeta::ZMinus => [c(0.0, 0.0), c(1.0, 0.0)],
        };
        DVector::from_row_slice(&amps)
    }

    pub fn density(self) -> DensityMatrix {
        let k = self.ket();
        DensityMatrix::from_matrix_unchecked(&k * k.adjoint())
    }
}

/// `|Ψ⁺⟩⟨Ψ⁺|` with `|Ψ⁺⟩ = (|00⟩ + |11⟩)/√2`.
pub fn epr_density() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = DVector::from_row_slice(&[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
    DensityMatrix::from_matrix_unchecked(&psi * psi.adjoint())
}

/// `Σ_s w_s · ζ_s ⊗ ζ_s` over the six axis states.
pub fn zeta_pair_combination(weights: impl Fn(Zeta) -> f64) -> MatrixOperator {
    Zeta::ALL.iter().fold(MatrixOperator::zeros(4, 4), |acc, &z| {
        let d = z.density().into_matrix();
        acc + tensor(&d, &d) * c(weights(z), 0.0)
    })
}

/// The EPR state written through the axis states: weight ½ on the x and z
/// pairs, −½ on the y pairs.
pub fn epr_zeta_weight(z: Zeta) -> f64 {
    match z {
        Zeta::YPlus | Zeta::YMinus => -0.5,
        _ => 0.5,
    }
}

/// Trace-norm distance between `Ψ⁺` and its expansion in axis-state products.
pub fn epr_decomposition_residual() -> Result<f64> {
    let combo = zeta_pair_combination(epr_zeta_weight);
    trace_norm(&(combo - epr_density().into_matrix()))
}
