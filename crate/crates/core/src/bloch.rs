//! One-qubit Bloch-ball picture: states as vectors in the unit ball and
//! channels as affine maps of it.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::qstate::{c, DensityMatrix, MatrixOperator, Zeta};

const BALL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        (self.as_vector() - other.as_vector()).norm()
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Pauli coordinates `(Re Tr σx M, Re Tr σy M, Re Tr σz M)` of a 2×2 matrix.
fn pauli_coordinates(m: &MatrixOperator) -> Vector3<f64> {
    Vector3::new(
        m[(1, 0)].re + m[(0, 1)].re,
        m[(1, 0)].im - m[(0, 1)].im,
        m[(0, 0)].re - m[(1, 1)].re,
    )
}

/// `(2 Re α, 2 Im α, 2p − 1)` for `ρ = ρ(p, α)`.
pub fn to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.qubits() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            found: rho.qubits(),
        });
    }
    let pa = rho.p_alpha()?;
    Ok(BlochVector::new(
        2.0 * pa.alpha.re,
        2.0 * pa.alpha.im,
        2.0 * pa.p - 1.0,
    ))
}

pub fn from_bloch(v: &BlochVector) -> Result<DensityMatrix> {
    let norm = v.norm();
    if !norm.is_finite() || norm > 1.0 + BALL_TOL {
        return Err(Error::Domain(format!(
            "Bloch vector of norm {norm} lies outside the unit ball"
        )));
    }
    let m = MatrixOperator::from_row_slice(
        2,
        2,
        &[
            c(0.5 * (1.0 + v.z), 0.0),
            c(0.5 * v.x, -0.5 * v.y),
            c(0.5 * v.x, 0.5 * v.y),
            c(0.5 * (1.0 - v.z), 0.0),
        ],
    );
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Reduces an angle into `(−π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Canonical `(α, θ, φ)`: `α ∈ (−π, π]`, `φ ∈ [0, 2π)`, and `φ = 0` when `θ = 0`.
pub fn normalize_rotation(alpha: f64, theta: f64, phi: f64) -> (f64, f64, f64) {
    let alpha = wrap_pi(alpha);
    let mut phi = phi.rem_euclid(TAU);
    if phi >= TAU {
        phi = 0.0;
    }
    if theta == 0.0 {
        phi = 0.0;
    }
    (alpha, theta, phi)
}

/// The unitary that fixes `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` and multiplies
/// the orthogonal state by `e^{iα}`.
pub fn rotation_unitary(alpha: f64, theta: f64, phi: f64) -> MatrixOperator {
    let (alpha, theta, phi) = normalize_rotation(alpha, theta, phi);
    let (s, co) = (theta / 2.0).sin_cos();
    let e = c(phi.cos(), phi.sin());
    let psi = [c(co, 0.0), e * s];
    let perp = [c(s, 0.0), -e * co];
    let phase = c(alpha.cos(), alpha.sin());
    MatrixOperator::from_fn(2, 2, |i, j| {
        psi[i] * psi[j].conj() + phase * perp[i] * perp[j].conj()
    })
}

/// `exp(−i·angle/2·n·σ)`, the rotation by `angle` about the unit axis `n`.
pub fn axis_rotation_unitary(axis: &Vector3<f64>, angle: f64) -> MatrixOperator {
    let n = axis.normalize();
    let (s, co) = (angle / 2.0).sin_cos();
    MatrixOperator::from_row_slice(
        2,
        2,
        &[
            c(co, -s * n[2]),
            c(-s * n[1], -s * n[0]),
            c(s * n[1], -s * n[0]),
            c(co, s * n[2]),
        ],
    )
}

/// `ρ ↦ linear·ρ + offset` on Bloch vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochAffine {
    pub linear: Matrix3<f64>,
    pub offset: Vector3<f64>,
}

impl BlochAffine {
    pub fn apply(&self, v: &BlochVector) -> BlochVector {
        BlochVector::from_vector(&(self.linear * v.as_vector() + self.offset))
    }

    /// Proper rotation with no translation, within `tol`.
    pub fn is_rotation(&self, tol: f64) -> bool {
        let orth = (self.linear.transpose() * self.linear - Matrix3::identity()).abs().max();
        orth <= tol && (self.linear.determinant() - 1.0).abs() <= tol && self.offset.norm() <= tol
    }

    /// Axis and angle of the linear part, assumed to be in SO(3).
    ///
    /// The angle is in `[0, π]`. At angle π the axis sign is fixed by making
    /// its first non-negligible component positive.
    pub fn rotation_axis_angle(&self) -> (Vector3<f64>, f64) {
        let r = &self.linear;
        let cos = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        let angle = cos.acos();
        let anti = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
        if anti.norm() > 1e-6 {
            return (anti.normalize(), angle);
        }
        if angle < PI / 2.0 {
            return (Vector3::z(), 0.0);
        }
        // Half-turn: (R + I)/2 = n nᵀ.
        let b = (r + Matrix3::identity()) * 0.5;
        let k = (0..3)
            .max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)]))
            .unwrap_or(2);
        let mut n: Vector3<f64> = b.column(k).into_owned().normalize();
        if let Some(first) = n.iter().copied().find(|x| x.abs() > 1e-9) {
            if first < 0.0 {
                n = -n;
            }
        }
        (n, angle)
    }
}

/// Reads off the affine map of a one-qubit linear map from the images of
/// `ζx⁺`, `ζy⁺`, `ζz⁺` and `I/2`.
pub fn affine_of_channel(g: &Channel) -> Result<BlochAffine> {
    if g.qubits() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            found: g.qubits(),
        });
    }
    let image = |m: &MatrixOperator| pauli_coordinates(&g.apply_unchecked(m));
    let half_id = MatrixOperator::identity(2, 2) * c(0.5, 0.0);
    let offset = image(&half_id);
    let mut linear = Matrix3::zeros();
    for (col, z) in [Zeta::XPlus, Zeta::YPlus, Zeta::ZPlus].into_iter().enumerate() {
        let v = image(z.density().matrix()) - offset;
        linear.set_column(col, &v);
    }
    Ok(BlochAffine { linear, offset })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{hadamard, measurement, not, rotation};
    use crate::equations::z_k;
    use crate::qstate::{rho_of, BitString};
    use crate::sample::{random_channel, random_state};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &BlochVector, b: &BlochVector, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    #[test]
    fn to_bloch_examples() {
        let zero = DensityMatrix::basis(&"0".parse::<BitString>().unwrap()).unwrap();
        assert!(close(&to_bloch(&zero).unwrap(), &BlochVector::new(0.0, 0.0, 1.0), 1e-15));
        let xp = rho_of(0.5, c(0.5, 0.0)).unwrap();
        assert!(close(&to_bloch(&xp).unwrap(), &BlochVector::new(1.0, 0.0, 0.0), 1e-15));
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        assert!(to_bloch(&mixed).unwrap().norm() < 1e-15);
        let two = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(to_bloch(&two).is_err());
    }

    #[test]
    fn from_bloch_examples() {
        let one = from_bloch(&BlochVector::new(0.0, 0.0, -1.0)).unwrap();
        let expected = DensityMatrix::basis(&"1".parse::<BitString>().unwrap()).unwrap();
        assert!((one.matrix() - expected.matrix()).norm() < 1e-15);

        let yp = from_bloch(&BlochVector::new(0.0, 1.0, 0.0)).unwrap();
        let expected = rho_of(0.5, c(0.0, 0.5)).unwrap();
        assert!((yp.matrix() - expected.matrix()).norm() < 1e-15);
        assert!((yp.matrix() - Zeta::YPlus.density().matrix()).norm() < 1e-15);
        assert!(yp.is_pure(1e-12));

        assert!(from_bloch(&BlochVector::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn roundtrip_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let rho = random_state(&mut rng);
            let back = from_bloch(&to_bloch(&rho).unwrap()).unwrap();
            assert!((back.matrix() - rho.matrix()).norm() <= 1e-12);
        }
    }

    #[test]
    fn named_rotations_match_gates() {
        assert!(Channel::from_unitary(&rotation_unitary(PI, PI / 4.0, 0.0))
            .unwrap()
            .approx_eq(&hadamard(0.0), 1e-12));
        for phi in [0.0, 0.9, 4.0] {
            assert!(Channel::from_unitary(&rotation_unitary(PI, PI / 2.0, phi))
                .unwrap()
                .approx_eq(&not(phi), 1e-12));
        }
        let a = Channel::from_unitary(&rotation_unitary(0.8, 0.0, 0.3)).unwrap();
        let b = Channel::from_unitary(&rotation_unitary(0.8, 0.0, 2.9)).unwrap();
        assert!(a.approx_eq(&b, 0.0));
    }

    #[test]
    fn affine_examples() {
        let id = affine_of_channel(&Channel::identity(1).unwrap()).unwrap();
        assert!((id.linear - Matrix3::identity()).norm() < 1e-15);
        assert!(id.offset.norm() < 1e-15);

        let m = affine_of_channel(&measurement(1).unwrap()).unwrap();
        assert!((m.linear - Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, 1.0))).norm() < 1e-15);
        assert!(m.offset.norm() < 1e-15);

        let h = affine_of_channel(&hadamard(0.0)).unwrap();
        assert!(h.is_rotation(1e-12));
        let axis = Vector3::new(1.0, 0.0, 1.0) / 2f64.sqrt();
        assert!((h.linear * axis - axis).norm() < 1e-12);
        let (n, angle) = h.rotation_axis_angle();
        assert!((n - axis).norm() < 1e-9);
        assert!((angle - PI).abs() < 1e-9);
    }

    #[test]
    fn affine_reproduces_channel_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_channel(&mut rng, 1, 3);
        let a = affine_of_channel(&g).unwrap();
        for _ in 0..500 {
            let rho = random_state(&mut rng);
            let lhs = a.apply(&to_bloch(&rho).unwrap());
            let rhs = to_bloch(&g.apply(&rho).unwrap()).unwrap();
            assert!(close(&lhs, &rhs, 1e-10));
        }
    }

    #[test]
    fn axis_rotation_matches_rotation_family() {
        // R_{α,θ,φ} turns the ball by α about ball(ψ).
        let (alpha, theta, phi) = (0.7f64, 0.6f64, 1.9f64);
        let axis = Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        let a = Channel::from_unitary(&axis_rotation_unitary(&axis, alpha)).unwrap();
        let b = rotation(alpha, theta, phi);
        assert!(a.approx_eq(&b, 1e-12));
        let (n, angle) = affine_of_channel(&b).unwrap().rotation_axis_angle();
        assert!((n - axis).norm() < 1e-9 && (angle - alpha).abs() < 1e-9);
    }

    fn arb_rotation() -> impl Strategy<Value = (f64, f64, f64)> {
        (-PI..=PI, 0.0..=PI / 2.0, 0.0..TAU)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn rotations_are_so3((alpha, theta, phi) in arb_rotation()) {
            let a = affine_of_channel(&rotation(alpha, theta, phi)).unwrap();
            let cols = (a.linear.transpose() * a.linear - Matrix3::identity()).abs().max();
            prop_assert!(cols <= 1e-10);
            prop_assert!((a.linear.determinant() - 1.0).abs() <= 1e-10);
            prop_assert!(a.offset.norm() <= 1e-10);
        }

        #[test]
        fn z_trajectory_matches_formula((alpha, theta, phi) in arb_rotation()) {
            let a = affine_of_channel(&rotation(alpha, theta, phi)).unwrap();
            let mut v = Vector3::z();
            for k in 1..=12u32 {
                v = a.linear * v + a.offset;
                prop_assert!((v[2] - z_k(alpha, theta, k as u64)).abs() <= 1e-10);
            }
        }

        #[test]
        fn purity_iff_unit_vector(p in 0.0f64..=1.0, frac in prop_oneof![Just(1.0f64), 0.0f64..=1.0], arg in 0.0f64..TAU) {
            let r = frac * (p * (1.0 - p)).sqrt();
            let rho = rho_of(p, c(r * arg.cos(), r * arg.sin())).unwrap();
            let n = to_bloch(&rho).unwrap().norm();
            let pure_by_norm = (n - 1.0).abs() <= 1e-10;
            let pure_by_trace = (rho.purity() - 1.0).abs() <= 1e-10;
            // purity = (1 + |b|²)/2, so both tests agree away from their tolerance edge
            if ((n * n - 1.0).abs() - 2e-10).abs() > 1e-11 {
                prop_assert_eq!(pure_by_norm, pure_by_trace);
            }
        }

        #[test]
        fn orthogonal_states_are_antipodal(theta in 0.0f64..PI, phi in 0.0f64..TAU) {
            let (s, co) = (theta / 2.0).sin_cos();
            let e = c(phi.cos(), phi.sin());
            let psi = nalgebra::DVector::from_vec(vec![c(co, 0.0), e * s]);
            let perp = nalgebra::DVector::from_vec(vec![c(s, 0.0), -e * co]);
            let a = to_bloch(&DensityMatrix::pure(&psi).unwrap()).unwrap();
            let b = to_bloch(&DensityMatrix::pure(&perp).unwrap()).unwrap();
            prop_assert!(close(&a, &b.neg(), 1e-10));
        }
    }
}
