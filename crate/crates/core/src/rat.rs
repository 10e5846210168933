//! Exact rational scalars and their `"p/q"` wire format.
//!
//! All geometry (domain membership, parity rounding, simplex location) runs on
//! exact rationals so that boundary and tie cases are decided without floating
//! point. Floats appear only in entropies, fitted values, and reports.

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::Error;

pub type Rat = Rational64;

/// Shorthand constructor; panics on q = 0 like `Rational64::new`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(p, q)
}

pub fn rat_int(p: i64) -> Rat {
    Rat::from_integer(p)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

/// Parses `"p/q"`, `"p"`, or a decimal-free signed integer string.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let bad = || Error::BadRational(s.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        Ok(Rat::new(p, q))
    } else {
        let p: i64 = s.parse().map_err(|_| bad())?;
        Ok(Rat::from_integer(p))
    }
}

/// Formats as `"p/q"`, or `"p"` when the value is an integer.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn floor_rat(r: &Rat) -> i64 {
    r.floor().to_integer()
}

pub fn ceil_rat(r: &Rat) -> i64 {
    r.ceil().to_integer()
}

/// Largest integer strictly below `r`.
pub fn strict_floor(r: &Rat) -> i64 {
    if r.is_integer() {
        r.to_integer() - 1
    } else {
        floor_rat(r)
    }
}

/// Smallest integer strictly above `r`.
pub fn strict_ceil(r: &Rat) -> i64 {
    if r.is_integer() {
        r.to_integer() + 1
    } else {
        ceil_rat(r)
    }
}

pub fn abs_rat(r: &Rat) -> Rat {
    r.abs()
}

pub fn l1_norm(v: &[Rat]) -> Rat {
    v.iter().map(|x| x.abs()).fold(Rat::zero(), |a, b| a + b)
}

pub fn l1_dist(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).abs())
        .fold(Rat::zero(), |acc, d| acc + d)
}

/// serde adapter: a single rational as a `"p/q"` string (accepts bare JSON
/// integers on input).
pub mod rat_string {
    use super::*;
    use serde::de::Error as DeError;

    pub fn serialize<S: Serializer>(r: &Rat, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rat, D::Error> {
        let v = serde_json::Value::deserialize(de)?;
        value_to_rat(&v).map_err(DeError::custom)
    }
}

/// serde adapter: vector of rationals.
pub mod rat_vec_string {
    use super::*;
    use serde::de::Error as DeError;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rat], ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&fmt_rat(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Rat>, D::Error> {
        let vals = Vec::<serde_json::Value>::deserialize(de)?;
        vals.iter()
            .map(|v| value_to_rat(v).map_err(DeError::custom))
            .collect()
    }
}

pub fn value_to_rat(v: &serde_json::Value) -> Result<Rat, Error> {
    match v {
        serde_json::Value::String(s) => parse_rat(s),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rat::from_integer(i))
            } else {
                Err(Error::BadRational(n.to_string()))
            }
        }
        other => Err(Error::BadRational(other.to_string())),
    }
}

/// Nearest rational with denominator dividing 2^20; used when handing float
/// iterates back to the exact-arithmetic layer.
pub fn rat_from_f64(x: f64) -> Rat {
    const DEN: i64 = 1 << 20;
    let scaled = (x * DEN as f64).round();
    assert!(
        scaled.abs() < i64::MAX as f64 / 4.0,
        "float too large for exact conversion: {x}"
    );
    Rat::new(scaled as i64, DEN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-3/4", "7", "-2", "0", "10/4"] {
            let r = parse_rat(s).unwrap();
            let r2 = parse_rat(&fmt_rat(&r)).unwrap();
            assert_eq!(r, r2);
        }
        assert_eq!(parse_rat("10/4").unwrap(), rat(5, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn strict_bounds() {
        assert_eq!(strict_floor(&rat_int(3)), 2);
        assert_eq!(strict_floor(&rat(7, 2)), 3);
        assert_eq!(strict_ceil(&rat_int(3)), 4);
        assert_eq!(strict_ceil(&rat(7, 2)), 4);
        assert_eq!(strict_ceil(&rat(-7, 2)), -3);
        assert_eq!(strict_floor(&rat(-7, 2)), -4);
    }
}
