use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use super::Channel;
use crate::angle::Angle;
use crate::bloch::rotation_unitary;
use crate::error::{Error, Result};
use crate::qstate::{c, BitString, DensityMatrix, MatrixOperator};

pub fn hadamard_unitary(phi: f64) -> MatrixOperator {
    let h = FRAC_1_SQRT_2;
    MatrixOperator::from_row_slice(
        2,
        2,
        &[
            c(h, 0.0),
            c(h * phi.cos(), -h * phi.sin()),
            c(h * phi.cos(), h * phi.sin()),
            c(-h, 0.0),
        ],
    )
}

pub fn not_unitary(phi: f64) -> MatrixOperator {
    MatrixOperator::from_row_slice(
        2,
        2,
        &[c(0.0, 0.0), c(phi.cos(), -phi.sin()), c(phi.cos(), phi.sin()), c(0.0, 0.0)],
    )
}

/// `diag(1, e^{iα})`.
pub fn phase_unitary(alpha: f64) -> MatrixOperator {
    MatrixOperator::from_row_slice(
        2,
        2,
        &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(alpha.cos(), alpha.sin())],
    )
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ ¬_φ`.
pub fn cnot_unitary(phi: f64) -> MatrixOperator {
    let mut u = MatrixOperator::zeros(4, 4);
    u[(0, 0)] = c(1.0, 0.0);
    u[(1, 1)] = c(1.0, 0.0);
    u.view_mut((2, 2), (2, 2)).copy_from(&not_unitary(phi));
    u
}

fn unitary_channel(u: &MatrixOperator) -> Channel {
    Channel::from_unitary(u).expect("built-in gates are unitary")
}

pub fn hadamard(phi: f64) -> Channel {
    unitary_channel(&hadamard_unitary(phi))
}

pub fn not(phi: f64) -> Channel {
    unitary_channel(&not_unitary(phi))
}

pub fn rotation(alpha: f64, theta: f64, phi: f64) -> Channel {
    unitary_channel(&rotation_unitary(alpha, theta, phi))
}

pub fn phase(alpha: f64) -> Channel {
    unitary_channel(&phase_unitary(alpha))
}

pub fn cnot(phi: f64) -> Channel {
    unitary_channel(&cnot_unitary(phi))
}

/// Von Neumann measurement in the computational basis on `n` qubits.
pub fn measurement(n: usize) -> Result<Channel> {
    let dim = 1usize << n;
    let ops = (0..dim)
        .map(|i| DensityMatrix::basis(&BitString::from_index(i, n)).map(|d| d.into_matrix()))
        .collect::<Result<Vec<_>>>()?;
    Channel::from_kraus(&ops)
}

/// The one-qubit transpose map; positive but not completely positive.
pub fn transpose() -> Channel {
    Channel::from_map(1, |i, j| {
        let mut m = MatrixOperator::zeros(2, 2);
        m[(j, i)] = c(1.0, 0.0);
        m
    })
    .expect("one qubit")
}

pub fn swap() -> Channel {
    let mut u = MatrixOperator::zeros(4, 4);
    for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        u[(a, b)] = c(1.0, 0.0);
    }
    unitary_channel(&u)
}

/// Built-in gates by name.
#[derive(Clone, Debug, PartialEq)]
pub enum GateLabel {
    Hadamard { phi: f64 },
    Not { phi: f64 },
    Rotation { alpha: f64, theta: f64, phi: f64 },
    Phase { alpha: f64 },
    Cnot { phi: f64 },
    Measurement { n: usize },
    Transpose,
    Swap,
}

impl GateLabel {
    pub fn channel(&self) -> Result<Channel> {
        Ok(match *self {
            GateLabel::Hadamard { phi } => hadamard(phi),
            GateLabel::Not { phi } => not(phi),
            GateLabel::Rotation { alpha, theta, phi } => {
                if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
                    return Err(Error::Domain(format!("theta {theta} outside [0, pi/2]")));
                }
                rotation(alpha, theta, phi)
            }
            GateLabel::Phase { alpha } => phase(alpha),
            GateLabel::Cnot { phi } => cnot(phi),
            GateLabel::Measurement { n } => measurement(n)?,
            GateLabel::Transpose => transpose(),
            GateLabel::Swap => swap(),
        })
    }

    /// Parses a label with named angle parameters; missing angles default
    /// to 0, except `alpha` of a rotation (π) and `theta` (π/4).
    pub fn parse(label: &str, params: &BTreeMap<String, Angle>) -> Result<Self> {
        let known: &[&str] = match label {
            "hadamard" | "not" | "cnot" => &["phi"],
            "rotation" => &["alpha", "theta", "phi"],
            "phase" => &["alpha"],
            "measurement" => &["n"],
            "transpose" | "swap" => &[],
            other => return Err(Error::UnknownLabel(other.to_string())),
        };
        if let Some(extra) = params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::Spec(format!("gate `{label}` takes no parameter `{extra}`")));
        }
        let get = |name: &str, default: f64| params.get(name).map_or(default, Angle::radians);
        Ok(match label {
            "hadamard" => GateLabel::Hadamard { phi: get("phi", 0.0) },
            "not" => GateLabel::Not { phi: get("phi", 0.0) },
            "cnot" => GateLabel::Cnot { phi: get("phi", 0.0) },
            "rotation" => GateLabel::Rotation {
                alpha: get("alpha", PI),
                theta: get("theta", FRAC_PI_4),
                phi: get("phi", 0.0),
            },
            "phase" => GateLabel::Phase { alpha: get("alpha", 0.0) },
            "measurement" => {
                let n = get("n", 1.0);
                if n.fract() != 0.0 || !(1.0..=2.0).contains(&n) {
                    return Err(Error::Spec(format!("measurement qubit count {n} must be 1 or 2")));
                }
                GateLabel::Measurement { n: n as usize }
            }
            "transpose" => GateLabel::Transpose,
            _ => GateLabel::Swap,
        })
    }
}

/// `standard_gate("rotation", {alpha, theta, phi})` and friends.
pub fn standard_gate(label: &str, params: &BTreeMap<String, Angle>) -> Result<Channel> {
    GateLabel::parse(label, params)?.channel()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::BitString;

    fn basis(s: &str) -> DensityMatrix {
        DensityMatrix::basis(&s.parse::<BitString>().unwrap()).unwrap()
    }

    #[test]
    fn named_gates_are_rotations() {
        for phi in [0.0, 0.5, 2.0, 5.5] {
            assert!(hadamard(phi).approx_eq(&rotation(PI, FRAC_PI_4, phi), 1e-12));
            assert!(not(phi).approx_eq(&rotation(PI, FRAC_PI_2, phi), 1e-12));
            let u = hadamard_unitary(phi);
            let r = rotation_unitary(PI, FRAC_PI_4, phi);
            assert!((u - r).norm() < 1e-12);
        }
        assert!(phase(0.7).approx_eq(&rotation(0.7, 0.0, 1.0), 1e-12));
    }

    #[test]
    fn cnot_truth_table() {
        let g = cnot(0.0);
        for (input, output) in [("00", "00"), ("01", "01"), ("10", "11"), ("11", "10")] {
            let out = g.apply(&basis(input)).unwrap();
            assert!((out.matrix() - basis(output).matrix()).norm() < 1e-14);
        }
        let g = cnot(1.3);
        for b in ["00", "01"] {
            let out = g.apply(&basis(b)).unwrap();
            assert!((out.matrix() - basis(b).matrix()).norm() < 1e-14);
        }
    }

    #[test]
    fn labels() {
        let mut p = BTreeMap::new();
        p.insert("phi".to_string(), Angle::from(1.0));
        assert!(standard_gate("hadamard", &p).unwrap().approx_eq(&hadamard(1.0), 0.0));
        assert!(matches!(standard_gate("toffoli", &p), Err(Error::UnknownLabel(_))));
        assert!(matches!(standard_gate("phase", &p), Err(Error::Spec(_))));
        let t = standard_gate("transpose", &BTreeMap::new()).unwrap();
        assert!(!t.is_cp());
        let mut m = BTreeMap::new();
        m.insert("n".to_string(), Angle::from(2.0));
        assert_eq!(standard_gate("measurement", &m).unwrap().qubits(), 2);
    }
}
