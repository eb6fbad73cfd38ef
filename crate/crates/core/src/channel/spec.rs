//! Gate specifications as JSON:
//!
//! ```json
//! {"kind": "hadamard", "params": {"phi": "pi/3"},
//!  "noise": [{"kind": "depolarize", "strength": 0.01}]}
//! ```
//!
//! `unitary` takes `{"matrix": M}` and `kraus` takes `{"operators": [M, ...]}`,
//! where a matrix is a list of rows of `[re, im]` pairs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::gates::GateLabel;
use super::noise::{apply_noise, NoiseKind, NoiseModel};
use super::Channel;
use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::qstate::{c, MatrixOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Hadamard,
    Rotation,
    Phase,
    Not,
    Cnot,
    Measurement,
    Unitary,
    Kraus,
    Transpose,
    Swap,
}

impl GateKind {
    fn label(self) -> &'static str {
        match self {
            GateKind::Hadamard => "hadamard",
            GateKind::Rotation => "rotation",
            GateKind::Phase => "phase",
            GateKind::Not => "not",
            GateKind::Cnot => "cnot",
            GateKind::Measurement => "measurement",
            GateKind::Unitary => "unitary",
            GateKind::Kraus => "kraus",
            GateKind::Transpose => "transpose",
            GateKind::Swap => "swap",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub strength: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub kind: GateKind,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub noise: Vec<NoiseSpec>,
}

fn parse_matrix(v: &Value) -> Result<MatrixOperator> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Spec("matrix must be a list of rows".into()))?;
    let n = rows.len();
    let mut m = MatrixOperator::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(|| Error::Spec(format!("matrix row {i} must have {n} entries")))?;
        for (j, entry) in row.iter().enumerate() {
            let pair: [f64; 2] = serde_json::from_value(entry.clone()).map_err(|_| {
                Error::Spec(format!("matrix entry ({i}, {j}) must be a [re, im] pair"))
            })?;
            m[(i, j)] = c(pair[0], pair[1]);
        }
    }
    Ok(m)
}

/// Nested `[re, im]` rows, the inverse of the parser.
pub fn matrix_to_json(m: &MatrixOperator) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

impl GateSpec {
    pub fn new(kind: GateKind) -> Self {
        Self {
            kind,
            params: Map::new(),
            noise: Vec::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.params.insert(name.to_string(), value.into());
        self
    }

    pub fn with_noise(mut self, kind: NoiseKind, strength: f64) -> Self {
        self.noise.push(NoiseSpec { kind, strength });
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn angles(&self) -> Result<BTreeMap<String, Angle>> {
        self.params
            .iter()
            .map(|(k, v)| {
                let a: Angle = serde_json::from_value(v.clone())
                    .map_err(|e| Error::Spec(format!("parameter `{k}`: {e}")))?;
                Ok((k.clone(), a))
            })
            .collect()
    }

    fn param(&self, name: &str) -> Result<&Value> {
        self.params
            .get(name)
            .ok_or_else(|| Error::Spec(format!("`{}` gate needs parameter `{name}`", self.kind.label())))
    }

    /// Builds the gate and applies the listed noise models in order.
    pub fn build(&self) -> Result<Channel> {
        let base = match self.kind {
            GateKind::Unitary => {
                let u = parse_matrix(self.param("matrix")?)?;
                Channel::from_unitary(&u)?
            }
            GateKind::Kraus => {
                let ops = self
                    .param("operators")?
                    .as_array()
                    .ok_or_else(|| Error::Spec("`operators` must be a list of matrices".into()))?
                    .iter()
                    .map(parse_matrix)
                    .collect::<Result<Vec<_>>>()?;
                Channel::from_kraus(&ops)?
            }
            kind => GateLabel::parse(kind.label(), &self.angles()?)?.channel()?,
        };
        self.noise.iter().try_fold(base, |g, n| {
            apply_noise(&g, &NoiseModel::new(n.kind, n.strength)?)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{hadamard, measurement, rotation};

    #[test]
    fn parses_standard_gates() {
        let g = GateSpec::from_json(r#"{"kind": "hadamard", "params": {"phi": "pi/2"}}"#)
            .unwrap()
            .build()
            .unwrap();
        assert!(g.approx_eq(&hadamard(std::f64::consts::FRAC_PI_2), 1e-12));
        let g = GateSpec::from_json(r#"{"kind": "rotation", "params": {"alpha": "2/3 pi", "theta": "pi/3", "phi": 0.5}}"#)
            .unwrap()
            .build()
            .unwrap();
        let pi = std::f64::consts::PI;
        assert!(g.approx_eq(&rotation(2.0 * pi / 3.0, pi / 3.0, 0.5), 1e-12));
        let m = GateSpec::from_json(r#"{"kind": "measurement"}"#).unwrap().build().unwrap();
        assert!(m.approx_eq(&measurement(1).unwrap(), 0.0));
    }

    #[test]
    fn parses_matrices_and_noise() {
        let spec = r#"{"kind": "unitary", "params": {"matrix": [[[0,0],[1,0]],[[1,0],[0,0]]]},
                       "noise": [{"kind": "depolarize", "strength": 0.5}]}"#;
        let g = GateSpec::from_json(spec).unwrap().build().unwrap();
        assert!(g.is_cp() && g.is_tp());
        let kraus = r#"{"kind": "kraus", "params": {"operators": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]]}}"#;
        let m = GateSpec::from_json(kraus).unwrap().build().unwrap();
        assert!(m.approx_eq(&measurement(1).unwrap(), 1e-14));
        let roundtrip = parse_matrix(&matrix_to_json(m.choi())).unwrap();
        assert_eq!(&roundtrip, m.choi());
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            r#"{"kind": "toffoli"}"#,
            r#"{"kind": "unitary"}"#,
            r#"{"kind": "unitary", "params": {"matrix": [[[1,0],[1,0]],[[0,0],[1,0]]]}}"#,
            r#"{"kind": "hadamard", "params": {"phi": "banana"}}"#,
            r#"{"kind": "hadamard", "noise": [{"kind": "depolarize", "strength": 2}]}"#,
        ] {
            assert!(GateSpec::from_json(bad).and_then(|s| s.build()).is_err(), "{bad}");
        }
    }
}
