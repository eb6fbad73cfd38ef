//! Angles given either as exact rational multiples of pi or as plain radians.
//!
//! Accepted text forms: `pi`, `-pi`, `2pi`, `pi/4`, `2/3pi`, `2/3 pi`,
//! `3*pi/4`, and decimals such as `0.785`. Rational forms are kept exact so
//! that quantities like the rotation order of an angle are computed from
//! integers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An angle `(num/den)·π` held as a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PiFraction(Rational64);

impl PiFraction {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("zero denominator in angle".into()));
        }
        Ok(Self(Rational64::new(num, den)))
    }

    pub fn pi() -> Self {
        Self(Rational64::from_integer(1))
    }

    /// Reduced numerator; the sign lives here.
    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    /// Reduced denominator, always positive.
    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn ratio(&self) -> Rational64 {
        self.0
    }

    pub fn radians(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64 * PI
    }

    pub fn neg(&self) -> Self {
        Self(-self.0)
    }
}

impl fmt::Display for PiFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.numer(), self.denom()) {
            (0, _) => write!(f, "0"),
            (1, 1) => write!(f, "pi"),
            (-1, 1) => write!(f, "-pi"),
            (n, 1) => write!(f, "{n} pi"),
            (n, d) => write!(f, "{n}/{d} pi"),
        }
    }
}

impl FromStr for PiFraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<Angle>()? {
            Angle::PiMultiple(p) => Ok(p),
            Angle::Radians(_) => Err(Error::Domain(format!(
                "angle `{s}` must be a rational multiple of pi (e.g. `2/3 pi`)"
            ))),
        }
    }
}

impl Serialize for PiFraction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PiFraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An angle parameter as written by a user.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    PiMultiple(PiFraction),
    Radians(f64),
}

impl Angle {
    pub fn radians(&self) -> f64 {
        match self {
            Angle::PiMultiple(p) => p.radians(),
            Angle::Radians(r) => *r,
        }
    }

    pub fn as_pi_fraction(&self) -> Option<PiFraction> {
        match self {
            Angle::PiMultiple(p) => Some(*p),
            Angle::Radians(_) => None,
        }
    }
}

impl From<f64> for Angle {
    fn from(r: f64) -> Self {
        Angle::Radians(r)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::PiMultiple(p) => p.fmt(f),
            Angle::Radians(r) => write!(f, "{r}"),
        }
    }
}

fn parse_coefficient(s: &str, whole: &str) -> Result<Rational64> {
    let bad = || Error::Domain(format!("cannot parse angle `{whole}`"));
    match s {
        "" | "+" => Ok(Rational64::from_integer(1)),
        "-" => Ok(Rational64::from_integer(-1)),
        _ => {
            if let Some((a, b)) = s.split_once('/') {
                let a: i64 = a.parse().map_err(|_| bad())?;
                let b: i64 = b.parse().map_err(|_| bad())?;
                if b == 0 {
                    return Err(bad());
                }
                Ok(Rational64::new(a, b))
            } else {
                Ok(Rational64::from_integer(s.parse().map_err(|_| bad())?))
            }
        }
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '*')
            .collect::<String>()
            .to_ascii_lowercase();
        if compact.is_empty() {
            return Err(Error::Domain("empty angle".into()));
        }
        if let Some(at) = compact.find("pi") {
            let before = &compact[..at];
            let after = &compact[at + 2..];
            let mut coef = parse_coefficient(before, s)?;
            if !after.is_empty() {
                let den = after
                    .strip_prefix('/')
                    .and_then(|d| d.parse::<i64>().ok())
                    .filter(|d| *d != 0)
                    .ok_or_else(|| Error::Domain(format!("cannot parse angle `{s}`")))?;
                coef /= Rational64::from_integer(den);
            }
            return Ok(Angle::PiMultiple(PiFraction(coef)));
        }
        compact
            .parse::<f64>()
            .ok()
            .filter(|r| r.is_finite())
            .map(Angle::Radians)
            .ok_or_else(|| Error::Domain(format!("cannot parse angle `{s}`")))
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Angle::PiMultiple(p) => s.collect_str(p),
            Angle::Radians(r) => s.serialize_f64(*r),
        }
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(r) => Ok(Angle::Radians(r)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(s: &str) -> (i64, i64) {
        let p: PiFraction = s.parse().unwrap();
        (p.numer(), p.denom())
    }

    #[test]
    fn parses_rational_forms() {
        assert_eq!(frac("pi"), (1, 1));
        assert_eq!(frac("-pi"), (-1, 1));
        assert_eq!(frac("2/3pi"), (2, 3));
        assert_eq!(frac("2/3 pi"), (2, 3));
        assert_eq!(frac("pi/3"), (1, 3));
        assert_eq!(frac("3*pi/4"), (3, 4));
        assert_eq!(frac("4/6 pi"), (2, 3));
        assert_eq!(frac("2pi"), (2, 1));
    }

    #[test]
    fn decimals_are_radians() {
        assert_eq!("0.5".parse::<Angle>().unwrap(), Angle::Radians(0.5));
        assert!("0.5".parse::<PiFraction>().is_err());
        assert!("pi/0".parse::<Angle>().is_err());
        assert!("abc".parse::<Angle>().is_err());
    }

    #[test]
    fn display_roundtrips() {
        for s in ["pi", "-pi", "2/3 pi", "1/4 pi", "3 pi"] {
            let p: PiFraction = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
    }

    #[test]
    fn json_accepts_numbers_and_strings() {
        let a: Angle = serde_json::from_str("\"pi/4\"").unwrap();
        assert!((a.radians() - PI / 4.0).abs() < 1e-15);
        let b: Angle = serde_json::from_str("1.25").unwrap();
        assert_eq!(b, Angle::Radians(1.25));
    }
}
