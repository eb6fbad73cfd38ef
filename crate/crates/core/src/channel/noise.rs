use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::gates::phase_unitary;
use super::Channel;
use crate::bloch::{affine_of_channel, axis_rotation_unitary};
use crate::error::{Error, Result};
use crate::qstate::{c, tensor, MatrixOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// `D_λ ∘ G` with `D_λ(ρ) = (1 − λ)ρ + λ·Tr(ρ)·I/N`.
    Depolarize,
    /// Turns a rotation gate further about its own axis by δ; other gates
    /// get `phase(δ)` on every qubit.
    Overrotate,
    /// `phase(δ)` on every qubit after the gate.
    PhaseDrift,
    /// Amplitude damping with decay probability γ on every qubit after the gate.
    AmplitudeDamp,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::Depolarize,
        NoiseKind::Overrotate,
        NoiseKind::PhaseDrift,
        NoiseKind::AmplitudeDamp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Depolarize => "depolarize",
            NoiseKind::Overrotate => "overrotate",
            NoiseKind::PhaseDrift => "phase_drift",
            NoiseKind::AmplitudeDamp => "amplitude_damp",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('-', "_");
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::Spec(format!("unknown noise kind `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub strength: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, strength: f64) -> Result<Self> {
        let m = Self { kind, strength };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.strength;
        let ok = match self.kind {
            NoiseKind::Depolarize | NoiseKind::AmplitudeDamp => (0.0..=1.0).contains(&s),
            NoiseKind::Overrotate | NoiseKind::PhaseDrift => s.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "strength {s} out of range for {} noise",
                self.kind
            )))
        }
    }
}

fn on_every_qubit(n: usize, one: &Channel) -> Channel {
    let mut acc = one.clone();
    for _ in 1..n {
        acc = acc.tensor(one).expect("small qubit count");
    }
    acc
}

fn phase_on_every_qubit(n: usize, delta: f64) -> Channel {
    let p = phase_unitary(delta);
    let mut u = p.clone();
    for _ in 1..n {
        u = tensor(&u, &p);
    }
    Channel::from_unitary(&u).expect("phase gates are unitary")
}

fn depolarizer(n: usize, lambda: f64) -> Channel {
    let dim = 1usize << n;
    let d2 = dim * dim;
    let id = MatrixOperator::identity(dim, dim);
    let vec_id = DVector::from_column_slice(id.as_slice());
    // vec(Tr(ρ)·I/N) = vec(I)·vec(I)ᵀ·vec(ρ)/N
    let transfer = MatrixOperator::identity(d2, d2) * c(1.0 - lambda, 0.0)
        + &vec_id * vec_id.transpose() * c(lambda / dim as f64, 0.0);
    Channel::from_transfer(n, transfer).expect("shape")
}

fn amplitude_damper(gamma: f64) -> Channel {
    let k0 = MatrixOperator::from_row_slice(
        2,
        2,
        &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - gamma).sqrt(), 0.0)],
    );
    let k1 = MatrixOperator::from_row_slice(
        2,
        2,
        &[c(0.0, 0.0), c(gamma.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)],
    );
    Channel::from_kraus(&[k0, k1]).expect("complete")
}

/// Returns the noisy version of `g`. The result is CP and TP whenever `g` is.
pub fn apply_noise(g: &Channel, m: &NoiseModel) -> Result<Channel> {
    m.validate()?;
    let n = g.qubits();
    let s = m.strength;
    let after = match m.kind {
        NoiseKind::Depolarize => depolarizer(n, s),
        NoiseKind::PhaseDrift => phase_on_every_qubit(n, s),
        NoiseKind::AmplitudeDamp => on_every_qubit(n, &amplitude_damper(s)),
        NoiseKind::Overrotate => {
            let rotation_axis = if n == 1 {
                let aff = affine_of_channel(g)?;
                aff.is_rotation(1e-9).then(|| aff.rotation_axis_angle())
            } else {
                None
            };
            match rotation_axis {
                Some((axis, angle)) if angle > 1e-9 => {
                    Channel::from_unitary(&axis_rotation_unitary(&axis, s))?
                }
                _ => phase_on_every_qubit(n, s),
            }
        }
    };
    after.compose(g)
}
