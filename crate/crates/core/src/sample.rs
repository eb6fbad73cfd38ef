//! Random states, unitaries and channels for probes and tests.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::Channel;
use crate::qstate::{c, DensityMatrix, MatrixOperator};

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> MatrixOperator {
    MatrixOperator::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// A unit vector drawn uniformly from the complex sphere in `C^dim`.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<num_complex::Complex64> {
    let v = ginibre(rng, dim, 1).column(0).into_owned();
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// A Haar-random unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> MatrixOperator {
    let qr = ginibre(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// A one-qubit state: uniform direction, radius uniform in `[0, 1]`, and
/// pure one time in four.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let psi = random_unit_vector(rng, 2);
    let pure = &psi * psi.adjoint();
    let r: f64 = if rng.random_bool(0.25) { 1.0 } else { rng.random() };
    let mixed = pure * c(r, 0.0) + MatrixOperator::identity(2, 2) * c(0.5 * (1.0 - r), 0.0);
    DensityMatrix::from_matrix_unchecked(mixed)
}

/// A random `n`-qubit channel with `rank` Kraus operators, from a random
/// isometry into `C^{rank·N}`.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> Channel {
    let dim = 1usize << n;
    let (q, _) = ginibre(rng, rank * dim, dim).qr().unpack();
    let ops: Vec<MatrixOperator> = (0..rank)
        .map(|k| q.rows(k * dim, dim).into_owned())
        .collect();
    Channel::from_kraus(&ops).expect("isometry blocks are complete")
}

/// `(1 − t)·I + t·G` with `G` random of Kraus rank 2: a channel within `2t`
/// of the identity.
pub fn random_perturbation<R: Rng + ?Sized>(rng: &mut R, t: f64) -> Channel {
    let g = random_channel(rng, 1, 2);
    Channel::identity(1)
        .expect("one qubit")
        .mix(&g, t)
        .expect("same size")
}
