//! The gate families that have built-in equation sets.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::Serialize;

use crate::angle::{Angle, PiFraction};
use crate::channel::{cnot, hadamard, not, phase, rotation, Channel};
use crate::equations::{family_equations, EquationSet};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `{H_φ}`.
    Hadamard,
    /// `{R_{±α,θ,φ}}` with `α/π` rational.
    RAlphaTheta { alpha: PiFraction, theta: Angle },
    /// `{(H_φ, ¬_φ)}`.
    HadamardNot,
    /// `{H_φ} × {R_{±α}}` where `R_α = phase(α)`.
    HadamardPhase { alpha: PiFraction },
    /// `{(H_φ, c-NOT_φ)}`.
    HadamardCnot,
    /// `{(H_φ, R_{sπ/4}, c-NOT_φ) : s = ±1}`.
    HadamardPhaseCnot,
}

pub const FAMILY_IDS: [&str; 6] = [
    "hadamard",
    "r-alpha-theta",
    "hadamard-not",
    "hadamard-phase",
    "hadamard-cnot",
    "hadamard-phase-cnot",
];

impl Family {
    pub fn id(&self) -> &'static str {
        match self {
            Family::Hadamard => "hadamard",
            Family::RAlphaTheta { .. } => "r-alpha-theta",
            Family::HadamardNot => "hadamard-not",
            Family::HadamardPhase { .. } => "hadamard-phase",
            Family::HadamardCnot => "hadamard-cnot",
            Family::HadamardPhaseCnot => "hadamard-phase-cnot",
        }
    }

    /// Looks a family up by id. `alpha` must be a rational multiple of π.
    pub fn from_id(id: &str, alpha: Option<&Angle>, theta: Option<&Angle>) -> Result<Self> {
        let need_alpha = || -> Result<PiFraction> {
            let a = alpha.ok_or_else(|| Error::Spec(format!("family `{id}` needs --alpha")))?;
            a.as_pi_fraction().ok_or_else(|| {
                Error::Domain(format!("alpha = {a} must be a rational multiple of pi"))
            })
        };
        let family = match id {
            "hadamard" => Family::Hadamard,
            "r-alpha-theta" => Family::RAlphaTheta {
                alpha: need_alpha()?,
                theta: theta
                    .cloned()
                    .ok_or_else(|| Error::Spec("family `r-alpha-theta` needs --theta".into()))?,
            },
            "hadamard-not" => Family::HadamardNot,
            "hadamard-phase" => Family::HadamardPhase { alpha: need_alpha()? },
            "hadamard-cnot" => Family::HadamardCnot,
            "hadamard-phase-cnot" => Family::HadamardPhaseCnot,
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        let alpha_in_range = |a: &PiFraction| {
            if a.numer() > 0 && a.numer() <= a.denom() {
                Ok(())
            } else {
                Err(Error::Domain(format!("alpha = {a} must lie in (0, pi]")))
            }
        };
        match self {
            Family::RAlphaTheta { alpha, theta } => {
                alpha_in_range(alpha)?;
                let t = theta.radians();
                if !(t > 0.0 && t <= FRAC_PI_2 + 1e-12) {
                    return Err(Error::Domain(format!("theta = {theta} must lie in (0, pi/2]")));
                }
                if *alpha == PiFraction::pi() && (t - FRAC_PI_2).abs() <= 1e-12 {
                    return Err(Error::Domain(
                        "(alpha, theta) = (pi, pi/2) is the NOT family, which one-variable equations cannot characterize".into(),
                    ));
                }
                Ok(())
            }
            Family::HadamardPhase { alpha } => alpha_in_range(alpha),
            _ => Ok(()),
        }
    }

    pub fn arity(&self) -> usize {
        self.var_qubits().len()
    }

    /// Qubit count of each tuple component.
    pub fn var_qubits(&self) -> Vec<usize> {
        match self {
            Family::Hadamard | Family::RAlphaTheta { .. } => vec![1],
            Family::HadamardNot | Family::HadamardPhase { .. } => vec![1, 1],
            Family::HadamardCnot => vec![1, 2],
            Family::HadamardPhaseCnot => vec![1, 1, 2],
        }
    }

    /// The signs `s` of the rotation angle that the family admits.
    pub fn signs(&self) -> &'static [i8] {
        match self {
            Family::RAlphaTheta { .. } | Family::HadamardPhase { .. } | Family::HadamardPhaseCnot => &[1, -1],
            _ => &[1],
        }
    }

    /// The member tuple at latitude `φ` and sign `s`.
    pub fn member(&self, phi: f64, sign: i8) -> Result<Vec<Channel>> {
        if !self.signs().contains(&sign) {
            return Err(Error::Domain(format!("family `{}` has no sign {sign}", self.id())));
        }
        let s = f64::from(sign);
        Ok(match self {
            Family::Hadamard => vec![hadamard(phi)],
            Family::RAlphaTheta { alpha, theta } => {
                vec![rotation(s * alpha.radians(), theta.radians(), phi)]
            }
            Family::HadamardNot => vec![hadamard(phi), not(phi)],
            Family::HadamardPhase { alpha } => vec![hadamard(phi), phase(s * alpha.radians())],
            Family::HadamardCnot => vec![hadamard(phi), cnot(phi)],
            Family::HadamardPhaseCnot => vec![
                hadamard(phi),
                phase(s * std::f64::consts::FRAC_PI_4),
                cnot(phi),
            ],
        })
    }

    /// Checks that a gate tuple has this family's shape.
    pub fn check_gates(&self, gates: &[Channel]) -> Result<()> {
        let shape = self.var_qubits();
        if gates.len() != shape.len() {
            return Err(Error::Spec(format!(
                "family `{}` takes {} gate(s), got {}",
                self.id(),
                shape.len(),
                gates.len()
            )));
        }
        for (g, &q) in gates.iter().zip(&shape) {
            if g.qubits() != q {
                return Err(Error::Dimension {
                    expected: q,
                    found: g.qubits(),
                });
            }
        }
        Ok(())
    }

    pub fn equations(&self) -> Result<EquationSet> {
        family_equations(self)
    }

    /// Robustness radius known in closed form: `4579·√ε` for `{H_φ}`.
    pub fn explicit_delta(&self, eps: f64) -> Option<f64> {
        matches!(self, Family::Hadamard).then(|| 4579.0 * eps.sqrt())
    }

    pub fn descriptor(&self) -> FamilyDescriptor {
        let (alpha, theta) = match self {
            Family::RAlphaTheta { alpha, theta } => (Some(alpha.to_string()), Some(theta.to_string())),
            Family::HadamardPhase { alpha } => (Some(alpha.to_string()), None),
            _ => (None, None),
        };
        FamilyDescriptor {
            id: self.id(),
            alpha,
            theta,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::RAlphaTheta { alpha, theta } => {
                write!(f, "{}(alpha={alpha}, theta={theta})", self.id())
            }
            Family::HadamardPhase { alpha } => write!(f, "{}(alpha={alpha})", self.id()),
            _ => f.write_str(self.id()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyDescriptor {
    pub id: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
}
