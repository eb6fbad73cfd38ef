//! Experimental equations `Pr^v[word(G₁, …, G_m)(|w⟩⟨w|)] = r`, their exact
//! evaluation, and the built-in equation sets of each family.

use std::fmt;

use nalgebra::DVector;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::angle::{Angle, PiFraction};
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::qstate::{BitString, DensityMatrix};

/// Largest exponent a program step may carry.
pub const MAX_EXPONENT: u64 = 1_000_000;

/// How a gate variable enters an `n`-qubit word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Embedding {
    /// The gate acts on all qubits of the equation.
    Whole,
    /// `X ⊗ I` on two qubits.
    LeftWithId,
    /// `I ⊗ X` on two qubits.
    RightWithId,
    /// `X ⊗ X` on two qubits.
    Pair,
}

impl Embedding {
    /// Qubit count of a gate embedded this way into an `n`-qubit word.
    fn gate_qubits(self, n: usize) -> Option<usize> {
        match self {
            Embedding::Whole => Some(n),
            _ if n == 2 => Some(1),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub var: usize,
    pub embed: Embedding,
    pub exp: u64,
}

impl Step {
    pub fn new(var: usize, embed: Embedding, exp: u64) -> Self {
        Self { var, embed, exp }
    }

    pub fn whole(var: usize, exp: u64) -> Self {
        Self::new(var, Embedding::Whole, exp)
    }
}

/// The constant term, kept in exact form where one exists.
#[derive(Clone, Debug, PartialEq)]
pub enum Constant {
    Rational(Rational64),
    /// `½ + ½·z_k(α, θ)`.
    HalfPlusHalfZ { alpha: PiFraction, theta: Angle, k: u64 },
    /// `½ + ½·cos α`.
    HalfPlusHalfCos { alpha: PiFraction },
    Real(f64),
}

impl Constant {
    pub fn ratio(num: i64, den: i64) -> Self {
        Constant::Rational(Rational64::new(num, den))
    }

    pub fn value(&self) -> f64 {
        match self {
            Constant::Rational(q) => *q.numer() as f64 / *q.denom() as f64,
            Constant::HalfPlusHalfZ { alpha, theta, k } => {
                0.5 + 0.5 * z_k(alpha.radians(), theta.radians(), *k)
            }
            Constant::HalfPlusHalfCos { alpha } => 0.5 + 0.5 * alpha.radians().cos(),
            Constant::Real(x) => *x,
        }
    }

    /// Exact text form, if the constant has one.
    pub fn expr(&self) -> Option<String> {
        match self {
            Constant::Rational(q) => Some(q.to_string()),
            Constant::HalfPlusHalfZ { alpha, theta, k } => {
                Some(format!("1/2 + 1/2 z_{k}({alpha}, {theta})"))
            }
            Constant::HalfPlusHalfCos { alpha } => Some(format!("1/2 + 1/2 cos({alpha})")),
            Constant::Real(_) => None,
        }
    }
}

/// `Pr^v[S₁ ∘ S₂ ∘ … ∘ S_t(|w⟩⟨w|)] = r` where each `S` is an embedded
/// gate variable raised to a power. `program[0]` is applied last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EquationJson", into = "EquationJson")]
pub struct ExperimentalEquation {
    n: usize,
    arity: usize,
    program: Vec<Step>,
    w: BitString,
    v: BitString,
    r: Constant,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EquationJson {
    n: usize,
    arity: usize,
    program: Vec<Step>,
    w: BitString,
    v: BitString,
    r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_expr: Option<String>,
}

impl From<ExperimentalEquation> for EquationJson {
    fn from(e: ExperimentalEquation) -> Self {
        EquationJson {
            n: e.n,
            arity: e.arity,
            r: e.r.value(),
            r_expr: e.r.expr(),
            program: e.program,
            w: e.w,
            v: e.v,
        }
    }
}

impl TryFrom<EquationJson> for ExperimentalEquation {
    type Error = Error;

    fn try_from(j: EquationJson) -> Result<Self> {
        // A rational r_expr that agrees with r is kept exact; anything else
        // falls back to the numeric value.
        let exact = j
            .r_expr
            .as_deref()
            .and_then(|s| s.trim().parse::<Rational64>().ok())
            .map(Constant::Rational)
            .filter(|c| (c.value() - j.r).abs() <= 1e-12);
        let r = exact.unwrap_or(Constant::Real(j.r));
        ExperimentalEquation::new(j.n, j.arity, j.program, j.w, j.v, r)
    }
}

impl ExperimentalEquation {
    pub fn new(
        n: usize,
        arity: usize,
        program: Vec<Step>,
        w: BitString,
        v: BitString,
        r: Constant,
    ) -> Result<Self> {
        if n == 0 || n > 2 {
            return Err(Error::Spec(format!("equations act on 1 or 2 qubits, not {n}")));
        }
        if arity == 0 {
            return Err(Error::Spec("an equation needs at least one gate variable".into()));
        }
        if w.len() != n || v.len() != n {
            return Err(Error::Spec(format!(
                "bitstrings `{w}` and `{v}` must have length {n}"
            )));
        }
        for step in &program {
            if step.var >= arity {
                return Err(Error::Spec(format!(
                    "variable {} out of range for arity {arity}",
                    step.var
                )));
            }
            if step.embed.gate_qubits(n).is_none() {
                return Err(Error::Spec(format!(
                    "embedding {:?} needs a two-qubit equation",
                    step.embed
                )));
            }
            if step.exp > MAX_EXPONENT {
                return Err(Error::Domain(format!(
                    "exponent {} exceeds {MAX_EXPONENT}",
                    step.exp
                )));
            }
        }
        let value = r.value();
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Spec(format!("constant {value} outside [0, 1]")));
        }
        Ok(Self {
            n,
            arity,
            program,
            w,
            v,
            r,
        })
    }

    /// `Pr^v[program(|b⟩⟨b|)] = r` on one qubit, with `v = b_out`.
    pub fn one_qubit(arity: usize, program: Vec<Step>, b: u8, v: u8, r: Constant) -> Result<Self> {
        let bit = |x: u8| BitString::new(vec![x == 1]);
        Self::new(1, arity, program, bit(b), bit(v), r)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn program(&self) -> &[Step] {
        &self.program
    }

    pub fn input(&self) -> &BitString {
        &self.w
    }

    pub fn outcome(&self) -> &BitString {
        &self.v
    }

    pub fn constant(&self) -> &Constant {
        &self.r
    }

    pub fn r(&self) -> f64 {
        self.r.value()
    }

    /// Total number of gate applications: the sum of the exponents.
    pub fn size(&self) -> u64 {
        self.program.iter().map(|s| s.exp).sum()
    }

    /// Qubit count each used variable must have.
    fn var_requirements(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.program
            .iter()
            .map(|s| (s.var, s.embed.gate_qubits(self.n).expect("validated")))
    }

    /// The exact probability term for a gate tuple.
    pub fn probability_term(&self, gates: &[Channel]) -> Result<f64> {
        if gates.len() != self.arity {
            return Err(Error::Spec(format!(
                "equation has arity {}, got {} gate(s)",
                self.arity,
                gates.len()
            )));
        }
        for (var, q) in self.var_requirements() {
            if gates[var].qubits() != q {
                return Err(Error::Dimension {
                    expected: q,
                    found: gates[var].qubits(),
                });
            }
        }
        let rho = DensityMatrix::basis(&self.w)?;
        let dim = rho.dim();
        let mut state = DVector::from_column_slice(rho.matrix().as_slice());
        for step in self.program.iter().rev() {
            if step.exp == 0 {
                continue;
            }
            let g = embed(&gates[step.var], step.embed)?;
            if step.exp <= 8 {
                for _ in 0..step.exp {
                    state = g.transfer() * &state;
                }
            } else {
                state = g.power(step.exp).transfer() * &state;
            }
        }
        let k = self.v.index();
        Ok(state[k + dim * k].re)
    }
}

fn embed(g: &Channel, e: Embedding) -> Result<Channel> {
    let id = || Channel::identity(1);
    match e {
        Embedding::Whole => Ok(g.clone()),
        Embedding::LeftWithId => g.tensor(&id()?),
        Embedding::RightWithId => id()?.tensor(g),
        Embedding::Pair => g.tensor(g),
    }
}

impl fmt::Display for ExperimentalEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; 4] = ["F", "G", "C", "X"];
        let name = |v: usize| NAMES.get(v).copied().unwrap_or("X");
        let word: Vec<String> = self
            .program
            .iter()
            .map(|s| {
                let base = match s.embed {
                    Embedding::Whole => name(s.var).to_string(),
                    Embedding::LeftWithId => format!("({}⊗I)", name(s.var)),
                    Embedding::RightWithId => format!("(I⊗{})", name(s.var)),
                    Embedding::Pair => format!("({0}⊗{0})", name(s.var)),
                };
                if s.exp == 1 {
                    base
                } else {
                    format!("{base}^{}", s.exp)
                }
            })
            .collect();
        let word = if word.is_empty() { "I".to_string() } else { word.join("∘") };
        let r = self.r.expr().unwrap_or_else(|| format!("{}", self.r.value()));
        write!(f, "Pr^{}[{word}(|{}⟩⟨{}|)] = {r}", self.v, self.w, self.w)
    }
}

/// A finite set of equations, optionally tagged with the family it characterizes.
#[derive(Clone, Debug, PartialEq)]
pub struct EquationSet {
    equations: Vec<ExperimentalEquation>,
    family: Option<Family>,
    var_qubits: Vec<Option<usize>>,
}

impl EquationSet {
    pub fn new(equations: Vec<ExperimentalEquation>, family: Option<Family>) -> Result<Self> {
        let first = equations
            .first()
            .ok_or_else(|| Error::Spec("an equation set needs at least one equation".into()))?;
        let arity = first.arity;
        let mut var_qubits = vec![None; arity];
        for eq in &equations {
            if eq.arity != arity {
                return Err(Error::Spec("equations disagree on the number of variables".into()));
            }
            for (var, q) in eq.var_requirements() {
                match var_qubits[var] {
                    Some(prev) if prev != q => {
                        return Err(Error::Spec(format!(
                            "variable {var} is used on both {prev} and {q} qubits"
                        )))
                    }
                    _ => var_qubits[var] = Some(q),
                }
            }
        }
        if let Some(f) = &family {
            let shape = f.var_qubits();
            let fits = shape.len() == arity
                && var_qubits
                    .iter()
                    .zip(&shape)
                    .all(|(q, s)| q.is_none_or(|q| q == *s));
            if !fits {
                return Err(Error::Spec(format!("equations do not match family `{}`", f.id())));
            }
        }
        Ok(Self {
            equations,
            family,
            var_qubits,
        })
    }

    pub fn equations(&self) -> &[ExperimentalEquation] {
        &self.equations
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    pub fn arity(&self) -> usize {
        self.var_qubits.len()
    }

    /// Qubit count each variable must have (`None` for unused variables).
    pub fn var_qubits(&self) -> &[Option<usize>] {
        &self.var_qubits
    }

    pub fn d(&self) -> usize {
        self.equations.len()
    }

    /// Largest equation size.
    pub fn k_max(&self) -> u64 {
        self.equations.iter().map(|e| e.size()).max().unwrap_or(0)
    }

    /// Checks a gate tuple against the variable shapes.
    pub fn check_gates(&self, gates: &[Channel]) -> Result<()> {
        if gates.len() != self.arity() {
            return Err(Error::Spec(format!(
                "equation set takes {} gate(s), got {}",
                self.arity(),
                gates.len()
            )));
        }
        for (g, q) in gates.iter().zip(&self.var_qubits) {
            if let Some(q) = *q {
                if g.qubits() != q {
                    return Err(Error::Dimension {
                        expected: q,
                        found: g.qubits(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `|probability term − r|` for every equation.
    pub fn violations(&self, gates: &[Channel]) -> Result<Vec<f64>> {
        self.check_gates(gates)?;
        self.equations
            .iter()
            .map(|e| Ok((e.probability_term(gates)? - e.r()).abs()))
            .collect()
    }

    /// The smallest ε for which the gates ε-satisfy the set.
    pub fn max_violation(&self, gates: &[Channel]) -> Result<f64> {
        Ok(self.violations(gates)?.into_iter().fold(0.0, f64::max))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SetJson {
            family: self.family.as_ref().map(|f| {
                let d = f.descriptor();
                FamilyTag {
                    id: d.id.to_string(),
                    alpha: d.alpha,
                    theta: d.theta,
                }
            }),
            arity: self.arity(),
            d: self.d(),
            k_max: self.k_max(),
            equations: self.equations.clone(),
        })
        .expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: SetJson = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        let family = j
            .family
            .map(|t| {
                let alpha = t.alpha.as_deref().map(str::parse::<Angle>).transpose()?;
                let theta = t.theta.as_deref().map(str::parse::<Angle>).transpose()?;
                Family::from_id(&t.id, alpha.as_ref(), theta.as_ref())
            })
            .transpose()?;
        let set = Self::new(j.equations, family)?;
        if set.arity() != j.arity {
            return Err(Error::Spec(format!(
                "declared arity {} but equations use {}",
                j.arity,
                set.arity()
            )));
        }
        Ok(set)
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyTag {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct SetJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<FamilyTag>,
    arity: usize,
    #[serde(default)]
    d: usize,
    #[serde(default)]
    k_max: u64,
    equations: Vec<ExperimentalEquation>,
}

/// Smallest `n ≥ 1` with `n·(a/b)π ≡ 0 (mod 2π)`, for `a/b` in lowest terms
/// and `0 < a/b ≤ 1`.
pub fn n_alpha(a: i64, b: i64) -> Result<u64> {
    let gcd = num_integer_gcd(a.abs(), b.abs());
    if b < 1 || a < 1 || a > b || gcd != 1 {
        return Err(Error::Domain(format!(
            "n_alpha needs a reduced fraction a/b in (0, 1], got {a}/{b}"
        )));
    }
    Ok(if a % 2 == 0 { b as u64 } else { 2 * b as u64 })
}

fn num_integer_gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `cos²θ + sin²θ·cos(kα)`, the z-coordinate of `R_{α,θ,φ}^k(|0⟩⟨0|)`.
pub fn z_k(alpha: f64, theta: f64, k: u64) -> f64 {
    let (s, c) = theta.sin_cos();
    c * c + s * s * (k as f64 * alpha).cos()
}

fn hadamard_equations(f: usize, arity: usize) -> Result<Vec<ExperimentalEquation>> {
    Ok(vec![
        ExperimentalEquation::one_qubit(arity, vec![Step::whole(f, 1)], 0, 0, Constant::ratio(1, 2))?,
        ExperimentalEquation::one_qubit(arity, vec![Step::whole(f, 2)], 0, 0, Constant::ratio(1, 1))?,
        ExperimentalEquation::one_qubit(arity, vec![Step::whole(f, 2)], 1, 0, Constant::ratio(0, 1))?,
    ])
}

/// The equations on variables `F = f` and `G = g` that pin `G` to `R_{±α}`
/// given that `F` is a Hadamard; `F`'s own equations are not included.
fn phase_equations(f: usize, g: usize, arity: usize, alpha: PiFraction) -> Result<Vec<ExperimentalEquation>> {
    let n = n_alpha(alpha.numer(), alpha.denom())?;
    let sandwich = |k: u64| vec![Step::whole(f, 1), Step::whole(g, k), Step::whole(f, 1)];
    Ok(vec![
        ExperimentalEquation::one_qubit(arity, vec![Step::whole(g, 1)], 0, 0, Constant::ratio(1, 1))?,
        ExperimentalEquation::one_qubit(arity, vec![Step::whole(g, 1)], 1, 0, Constant::ratio(0, 1))?,
        ExperimentalEquation::one_qubit(arity, sandwich(n), 0, 0, Constant::ratio(1, 1))?,
        ExperimentalEquation::one_qubit(arity, sandwich(1), 0, 0, Constant::HalfPlusHalfCos { alpha })?,
    ])
}

/// The two-qubit equations tying `G = g` to `c-NOT_φ` given `F = f` is `H_φ`.
fn cnot_equations(f: usize, g: usize, arity: usize) -> Result<Vec<ExperimentalEquation>> {
    let bits = |s: &str| s.parse::<BitString>();
    let one = Constant::ratio(1, 1);
    let eq = |program: Vec<Step>, w: &str, v: &str| {
        ExperimentalEquation::new(2, arity, program, bits(w)?, bits(v)?, one.clone())
    };
    let sandwich = |e: Embedding, k: u64| vec![Step::new(f, e, 1), Step::whole(g, k), Step::new(f, e, 1)];
    Ok(vec![
        eq(vec![Step::whole(g, 1)], "00", "00")?,
        eq(vec![Step::whole(g, 1)], "01", "01")?,
        eq(vec![Step::whole(g, 1)], "10", "11")?,
        eq(vec![Step::whole(g, 1)], "11", "10")?,
        eq(sandwich(Embedding::RightWithId, 1), "00", "00")?,
        eq(sandwich(Embedding::RightWithId, 1), "10", "10")?,
        eq(sandwich(Embedding::LeftWithId, 2), "00", "00")?,
        eq(sandwich(Embedding::LeftWithId, 2), "01", "01")?,
        eq(sandwich(Embedding::Pair, 1), "00", "00")?,
    ])
}

/// The built-in equation set characterizing `family`.
pub fn family_equations(family: &Family) -> Result<EquationSet> {
    family.validate()?;
    let equations = match family {
        Family::Hadamard => hadamard_equations(0, 1)?,
        Family::RAlphaTheta { alpha, theta } => {
            let n = n_alpha(alpha.numer(), alpha.denom())?;
            let mut eqs = (1..=n)
                .map(|k| {
                    ExperimentalEquation::one_qubit(
                        1,
                        vec![Step::whole(0, k)],
                        0,
                        0,
                        Constant::HalfPlusHalfZ {
                            alpha: *alpha,
                            theta: *theta,
                            k,
                        },
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            eqs.push(ExperimentalEquation::one_qubit(
                1,
                vec![Step::whole(0, n)],
                1,
                0,
                Constant::ratio(0, 1),
            )?);
            eqs
        }
        Family::HadamardNot => {
            let sandwich = |k: u64| vec![Step::whole(0, 1), Step::whole(1, k), Step::whole(0, 1)];
            let mut eqs = hadamard_equations(0, 2)?;
            eqs.extend([
                ExperimentalEquation::one_qubit(2, vec![Step::whole(1, 1)], 0, 0, Constant::ratio(0, 1))?,
                ExperimentalEquation::one_qubit(2, vec![Step::whole(1, 1)], 1, 0, Constant::ratio(1, 1))?,
                ExperimentalEquation::one_qubit(2, sandwich(2), 0, 0, Constant::ratio(1, 1))?,
                ExperimentalEquation::one_qubit(2, sandwich(1), 0, 0, Constant::ratio(1, 1))?,
            ]);
            eqs
        }
        Family::HadamardPhase { alpha } => {
            let mut eqs = hadamard_equations(0, 2)?;
            eqs.extend(phase_equations(0, 1, 2, *alpha)?);
            eqs
        }
        Family::HadamardCnot => {
            let mut eqs = hadamard_equations(0, 2)?;
            eqs.extend(cnot_equations(0, 1, 2)?);
            eqs
        }
        Family::HadamardPhaseCnot => {
            let mut eqs = hadamard_equations(0, 3)?;
            eqs.extend(phase_equations(0, 1, 3, PiFraction::new(1, 4)?)?);
            eqs.extend(cnot_equations(0, 2, 3)?);
            eqs
        }
    };
    EquationSet::new(equations, Some(family.clone()))
}
