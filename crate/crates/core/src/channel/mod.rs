//! Superoperators on `n` qubits, stored by their Choi matrix.
//!
//! Convention: `J[(i·N + a), (j·N + b)] = G(|i⟩⟨j|)[a, b]`, i.e. the input
//! system is the left tensor factor and the output system the right one.
//! The transfer matrix `S` acts on column-stacked matrices,
//! `vec(G(ρ)) = S·vec(ρ)`, and is kept alongside the Choi matrix because
//! application and composition are plain matrix products in that form.
//!
//! A [`Channel`] value may hold any linear map (differences of channels,
//! the transpose map); physicality is a verdict queried with [`Channel::is_cp`]
//! and [`Channel::is_tp`], never assumed.

mod distance;
mod gates;
mod noise;
mod spec;

pub use distance::{dist_to_family, dist_to_family_with, sup_norm, sup_norm_distance, FamilyDistance, SupNorm, SupNormOptions};
pub use gates::{
    cnot, hadamard, measurement, not, phase, rotation, standard_gate, swap, transpose, GateLabel,
};
pub use noise::{apply_noise, NoiseKind, NoiseModel};
pub use spec::{matrix_to_json, GateKind, GateSpec, NoiseSpec};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{self, c, qubits_for_dim, DensityMatrix, MatrixOperator};

/// Tolerance for the CP, TP and unitarity checks.
pub const CHANNEL_TOL: f64 = 1e-10;

/// Tolerance used when re-validating a channel output as a density matrix.
const OUTPUT_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Channel {
    n: usize,
    choi: MatrixOperator,
    transfer: MatrixOperator,
}

fn choi_to_transfer(choi: &MatrixOperator, dim: usize) -> MatrixOperator {
    let d2 = dim * dim;
    let mut s = MatrixOperator::zeros(d2, d2);
    for i in 0..dim {
        for j in 0..dim {
            for a in 0..dim {
                for b in 0..dim {
                    s[(a + dim * b, i + dim * j)] = choi[(i * dim + a, j * dim + b)];
                }
            }
        }
    }
    s
}

fn transfer_to_choi(s: &MatrixOperator, dim: usize) -> MatrixOperator {
    let d2 = dim * dim;
    let mut j_mat = MatrixOperator::zeros(d2, d2);
    for i in 0..dim {
        for j in 0..dim {
            for a in 0..dim {
                for b in 0..dim {
                    j_mat[(i * dim + a, j * dim + b)] = s[(a + dim * b, i + dim * j)];
                }
            }
        }
    }
    j_mat
}

impl Channel {
    /// Wraps a Choi matrix; only the shape is checked.
    pub fn from_choi(n: usize, choi: MatrixOperator) -> Result<Self> {
        let dim = 1usize << n;
        qubits_for_dim(dim)?;
        if choi.nrows() != dim * dim || choi.ncols() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                found: choi.nrows(),
            });
        }
        let transfer = choi_to_transfer(&choi, dim);
        Ok(Self { n, choi, transfer })
    }

    /// Wraps a transfer matrix acting on column-stacked matrices.
    pub fn from_transfer(n: usize, transfer: MatrixOperator) -> Result<Self> {
        let dim = 1usize << n;
        qubits_for_dim(dim)?;
        if transfer.nrows() != dim * dim || transfer.ncols() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                found: transfer.nrows(),
            });
        }
        let choi = transfer_to_choi(&transfer, dim);
        Ok(Self { n, choi, transfer })
    }

    /// The linear map with `|i⟩⟨j| ↦ f(i, j)`.
    pub fn from_map(n: usize, f: impl Fn(usize, usize) -> MatrixOperator) -> Result<Self> {
        let dim = 1usize << n;
        qubits_for_dim(dim)?;
        let mut choi = MatrixOperator::zeros(dim * dim, dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let block = f(i, j);
                if block.shape() != (dim, dim) {
                    return Err(Error::Dimension {
                        expected: dim,
                        found: block.nrows(),
                    });
                }
                choi.view_mut((i * dim, j * dim), (dim, dim)).copy_from(&block);
            }
        }
        Self::from_choi(n, choi)
    }

    /// `ρ ↦ UρU†`. The result does not depend on the global phase of `U`.
    pub fn from_unitary(u: &MatrixOperator) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::Dimension {
                expected: u.nrows(),
                found: u.ncols(),
            });
        }
        let dim = u.nrows();
        let n = qubits_for_dim(dim)?;
        let defect = (u.adjoint() * u - MatrixOperator::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > CHANNEL_TOL {
            return Err(Error::Domain(format!(
                "matrix is not unitary (defect {defect:.3e})"
            )));
        }
        // J = |U⟩⟩⟨⟨U| with |U⟩⟩[i·N + a] = U[a, i]; column-major storage
        // of U is exactly that vectorization.
        let w = DVector::from_column_slice(u.as_slice());
        Self::from_choi(n, &w * w.adjoint())
    }

    /// `ρ ↦ Σ K ρ K†`; the operators must satisfy `Σ K†K = I`.
    pub fn from_kraus(ops: &[MatrixOperator]) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::Domain("empty Kraus list".into()))?;
        let dim = first.nrows();
        let n = qubits_for_dim(dim)?;
        let mut completeness = MatrixOperator::zeros(dim, dim);
        let mut choi = MatrixOperator::zeros(dim * dim, dim * dim);
        for k in ops {
            if k.shape() != (dim, dim) {
                return Err(Error::Dimension {
                    expected: dim,
                    found: k.nrows(),
                });
            }
            completeness += k.adjoint() * k;
            let w = DVector::from_column_slice(k.as_slice());
            choi += &w * w.adjoint();
        }
        let defect = (completeness - MatrixOperator::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > CHANNEL_TOL {
            return Err(Error::Domain(format!(
                "Kraus operators are not complete (defect {defect:.3e})"
            )));
        }
        Self::from_choi(n, choi)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let dim = 1usize << n;
        qubits_for_dim(dim)?;
        Self::from_transfer(n, MatrixOperator::identity(dim * dim, dim * dim))
    }

    /// The map sending every matrix to zero.
    pub fn zero(n: usize) -> Result<Self> {
        let dim = 1usize << n;
        qubits_for_dim(dim)?;
        Self::from_transfer(n, MatrixOperator::zeros(dim * dim, dim * dim))
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn choi(&self) -> &MatrixOperator {
        &self.choi
    }

    pub fn transfer(&self) -> &MatrixOperator {
        &self.transfer
    }

    /// `G(|i⟩⟨j|)`, read off the Choi matrix.
    pub fn image_of_unit(&self, i: usize, j: usize) -> MatrixOperator {
        let dim = self.dim();
        self.choi
            .view((i * dim, j * dim), (dim, dim))
            .into_owned()
    }

    /// Applies the map to an arbitrary matrix.
    pub fn apply_operator(&self, v: &MatrixOperator) -> Result<MatrixOperator> {
        let dim = self.dim();
        if v.shape() != (dim, dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: v.nrows(),
            });
        }
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &MatrixOperator) -> MatrixOperator {
        let dim = self.dim();
        let out = &self.transfer * DVector::from_column_slice(v.as_slice());
        MatrixOperator::from_column_slice(dim, dim, out.as_slice())
    }

    /// Applies a channel to a state. Debug builds re-validate the output,
    /// which catches maps that are not completely positive and trace preserving.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.qubits() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: rho.qubits(),
            });
        }
        let out = self.apply_unchecked(rho.matrix());
        let out = (&out + out.adjoint()) * c(0.5, 0.0);
        if cfg!(debug_assertions) {
            DensityMatrix::validated(out, OUTPUT_TOL)
        } else {
            Ok(DensityMatrix::from_matrix_unchecked(out))
        }
    }

    fn check_same_size(&self, other: &Channel) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// `self ∘ inner`: `inner` acts first.
    pub fn compose(&self, inner: &Channel) -> Result<Channel> {
        self.check_same_size(inner)?;
        Self::from_transfer(self.n, &self.transfer * &inner.transfer)
    }

    /// `G^k` by repeated squaring; `G^0` is the identity.
    pub fn power(&self, k: u64) -> Channel {
        let d2 = self.dim() * self.dim();
        let mut result = MatrixOperator::identity(d2, d2);
        let mut base = self.transfer.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Self::from_transfer(self.n, result).expect("shape preserved")
    }

    /// `self ⊗ other`; `self` acts on the leading qubits.
    pub fn tensor(&self, other: &Channel) -> Result<Channel> {
        let (da, db) = (self.dim(), other.dim());
        Self::from_map(self.n + other.n, |i, j| {
            let (i1, i2) = (i / db, i % db);
            let (j1, j2) = (j / db, j % db);
            let _ = da;
            qstate::tensor(&self.image_of_unit(i1, j1), &other.image_of_unit(i2, j2))
        })
    }

    /// The linear map `self − other`.
    pub fn sub(&self, other: &Channel) -> Result<Channel> {
        self.check_same_size(other)?;
        Self::from_transfer(self.n, &self.transfer - &other.transfer)
    }

    /// `(1 − weight)·self + weight·other`.
    pub fn mix(&self, other: &Channel, weight: f64) -> Result<Channel> {
        self.check_same_size(other)?;
        Self::from_transfer(
            self.n,
            &self.transfer * c(1.0 - weight, 0.0) + &other.transfer * c(weight, 0.0),
        )
    }

    /// Smallest eigenvalue of the Hermitian part of the Choi matrix.
    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        qstate::min_hermitian_eigenvalue(&self.choi)
    }

    /// Eigenvalues of the Hermitian part of the Choi matrix, ascending.
    pub fn choi_eigenvalues(&self) -> Result<Vec<f64>> {
        qstate::hermitian_eigenvalues(&self.choi)
    }

    /// Completely positive iff the Choi matrix is Hermitian and PSD.
    pub fn is_cp(&self) -> bool {
        qstate::hermitian_defect(&self.choi) <= CHANNEL_TOL
            && self
                .choi_min_eigenvalue()
                .map(|m| m >= -CHANNEL_TOL)
                .unwrap_or(false)
    }

    /// Largest deviation of `Tr_out J` from the identity.
    pub fn tp_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let tr: Complex64 = (0..dim).map(|a| self.choi[(i * dim + a, j * dim + a)]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((tr - c(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_tp(&self) -> bool {
        self.tp_defect() <= CHANNEL_TOL
    }

    /// Fails with the specific reason when the map is not a CP, TP channel.
    pub fn ensure_cptp(&self) -> Result<()> {
        if qstate::hermitian_defect(&self.choi) > CHANNEL_TOL {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: f64::NAN,
            });
        }
        let min = self.choi_min_eigenvalue()?;
        if min < -CHANNEL_TOL {
            return Err(Error::NotCompletelyPositive { min_eigenvalue: min });
        }
        let defect = self.tp_defect();
        if defect > CHANNEL_TOL {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(())
    }

    /// Frobenius distance between Choi matrices.
    pub fn choi_distance(&self, other: &Channel) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        (&self.choi - &other.choi).norm()
    }

    /// Channel equality up to `tol` in Choi distance.
    pub fn approx_eq(&self, other: &Channel, tol: f64) -> bool {
        self.choi_distance(other) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::affine_of_channel;
    use crate::qstate::{rho_of, trace_norm, BitString, Zeta};
    use crate::sample::{random_channel, random_state};
    use nalgebra::Matrix3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn basis(s: &str) -> DensityMatrix {
        DensityMatrix::basis(&s.parse::<BitString>().unwrap()).unwrap()
    }

    fn pauli(k: usize) -> MatrixOperator {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        match k {
            0 => MatrixOperator::identity(2, 2),
            1 => MatrixOperator::from_row_slice(2, 2, &[z, one, one, z]),
            2 => MatrixOperator::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
            _ => MatrixOperator::from_row_slice(2, 2, &[one, z, z, -one]),
        }
    }

    #[test]
    fn unitary_channel_examples() {
        let id = Channel::from_unitary(&MatrixOperator::identity(2, 2)).unwrap();
        assert!(id.approx_eq(&Channel::identity(1).unwrap(), 1e-14));

        let h0 = hadamard(0.0);
        let out = h0.apply(&basis("0")).unwrap();
        let expected = rho_of(0.5, c(0.5, 0.0)).unwrap();
        assert!((out.matrix() - expected.matrix()).norm() < 1e-14);

        let u = gates::hadamard_unitary(0.0);
        let shifted = &u * Complex64::from_polar(1.0, 1.3);
        assert!(Channel::from_unitary(&shifted).unwrap().approx_eq(&h0, 1e-12));
    }

    #[test]
    fn from_unitary_rejects_non_unitary() {
        let m = MatrixOperator::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(Channel::from_unitary(&m).is_err());
    }

    #[test]
    fn kraus_examples() {
        let p0 = basis("0").into_matrix();
        let p1 = basis("1").into_matrix();
        let m = Channel::from_kraus(&[p0.clone(), p1]).unwrap();
        let out = m.apply(&rho_of(0.7, c(0.2, 0.1)).unwrap()).unwrap();
        assert!((out.matrix() - rho_of(0.7, c(0.0, 0.0)).unwrap().matrix()).norm() < 1e-15);
        assert!(m.approx_eq(&measurement(1).unwrap(), 1e-14));

        let id = Channel::from_kraus(&[MatrixOperator::identity(2, 2)]).unwrap();
        assert!(id.approx_eq(&Channel::identity(1).unwrap(), 1e-14));

        let lambda = 0.3f64;
        let mut ops = vec![pauli(0) * c((1.0 - lambda).sqrt(), 0.0)];
        for k in 1..4 {
            ops.push(pauli(k) * c((lambda / 3.0).sqrt(), 0.0));
        }
        let dep = Channel::from_kraus(&ops).unwrap();
        let aff = affine_of_channel(&dep).unwrap();
        let expected = Matrix3::identity() * (1.0 - 4.0 * lambda / 3.0);
        assert!((aff.linear - expected).norm() < 1e-12);
        assert!(aff.offset.norm() < 1e-12);

        assert!(Channel::from_kraus(&[p0]).is_err());
        assert!(Channel::from_kraus(&[]).is_err());
    }

    #[test]
    fn apply_examples() {
        let rho = rho_of(0.3, c(0.1, -0.2)).unwrap();
        let id = Channel::identity(1).unwrap();
        assert!((id.apply(&rho).unwrap().matrix() - rho.matrix()).norm() < 1e-15);
        let out = not(0.0).apply(&basis("0")).unwrap();
        assert!((out.matrix() - basis("1").matrix()).norm() < 1e-15);
        assert!(id.apply(&basis("00")).is_err());
    }

    #[test]
    fn composition_examples() {
        let h = hadamard(0.0);
        assert!(h.power(2).approx_eq(&Channel::identity(1).unwrap(), 1e-12));
        assert!(h.power(0).approx_eq(&Channel::identity(1).unwrap(), 0.0));
        let m = measurement(1).unwrap();
        assert!(m.compose(&m).unwrap().approx_eq(&m, 1e-14));
        let id2 = Channel::identity(1).unwrap().tensor(&Channel::identity(1).unwrap()).unwrap();
        assert!(id2.approx_eq(&Channel::identity(2).unwrap(), 0.0));
        assert!(h.compose(&cnot(0.0)).is_err());
        // power agrees with repeated composition
        let r = rotation(0.7, 0.4, 1.1);
        let mut acc = Channel::identity(1).unwrap();
        for _ in 0..5 {
            acc = r.compose(&acc).unwrap();
        }
        assert!(acc.approx_eq(&r.power(5), 1e-12));
    }

    #[test]
    fn tensor_acts_factorwise() {
        let (g, h) = (hadamard(0.3), rotation(1.0, 0.5, 2.0));
        let gh = g.tensor(&h).unwrap();
        let (a, b) = (rho_of(0.8, c(0.1, 0.2)).unwrap(), rho_of(0.4, c(-0.3, 0.1)).unwrap());
        let lhs = gh.apply(&a.tensor(&b).unwrap()).unwrap();
        let rhs = g.apply(&a).unwrap().tensor(&h.apply(&b).unwrap()).unwrap();
        assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-13);
    }

    #[test]
    fn transpose_is_not_cp() {
        let t = transpose();
        assert!(!t.is_cp());
        assert!(t.is_tp());
        let min = t.choi_min_eigenvalue().unwrap();
        assert!((min + 1.0).abs() < 1e-10);
        assert!(matches!(t.ensure_cptp(), Err(Error::NotCompletelyPositive { .. })));
    }

    #[test]
    fn unitary_choi_is_rank_one() {
        for ch in [hadamard(0.4), rotation(2.0, 1.0, 0.3), cnot(1.2)] {
            let eig = ch.choi_eigenvalues().unwrap();
            let n = ch.dim() as f64;
            let (last, rest) = eig.split_last().unwrap();
            assert!((last - n).abs() < 1e-10);
            assert!(rest.iter().all(|l| l.abs() < 1e-10));
        }
    }

    #[test]
    fn contractivity_and_cp_closure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let g = random_channel(&mut rng, 1, 3);
            let (rho, tau) = (random_state(&mut rng), random_state(&mut rng));
            let before = trace_norm(&(rho.matrix() - tau.matrix())).unwrap();
            let after = trace_norm(&(g.apply(&rho).unwrap().matrix() - g.apply(&tau).unwrap().matrix())).unwrap();
            assert!(after <= before + 1e-10);
        }
        for _ in 0..20 {
            let g = random_channel(&mut rng, 1, 2);
            let h = random_channel(&mut rng, 1, 3);
            for ch in [g.compose(&h).unwrap(), g.power(3), g.tensor(&h).unwrap()] {
                assert!(ch.choi_min_eigenvalue().unwrap() >= -1e-10);
                assert!(ch.tp_defect() <= 1e-10);
            }
        }
    }

    #[test]
    fn three_fixed_points_force_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let id = Channel::identity(1).unwrap();
        let fixed = [basis("0"), basis("1"), Zeta::XPlus.density()];
        let fixes_all = |g: &Channel| {
            fixed.iter().all(|rho| {
                trace_norm(&(g.apply(rho).unwrap().matrix() - rho.matrix())).unwrap() <= 1e-9
            })
        };
        // random channels, plus dephasing channels that fix |0⟩ and |1⟩
        let mut candidates: Vec<Channel> = (0..500).map(|_| random_channel(&mut rng, 1, 2)).collect();
        for k in 0..=10 {
            let lambda = k as f64 / 10.0;
            candidates.push(id.mix(&measurement(1).unwrap(), lambda).unwrap());
        }
        for g in &candidates {
            if fixes_all(g) {
                let d = sup_norm_distance(g, &id).unwrap().value;
                assert!(d <= 1e-3, "channel fixes three points but is {d} from identity");
            }
        }
    }
}
