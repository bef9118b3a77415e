//! Exact-integer and exact-rational encodings for JSON.
//!
//! Integers that fit in an `i64` are written as JSON numbers; anything wider
//! falls back to a decimal string. Rationals are always strings of the form
//! `p` or `p/q`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonInt {
    Small(i64),
    Big(String),
}

impl From<&BigInt> for JsonInt {
    fn from(value: &BigInt) -> Self {
        match value.to_i64() {
            Some(v) => JsonInt::Small(v),
            None => JsonInt::Big(value.to_string()),
        }
    }
}

impl JsonInt {
    fn into_bigint<E: serde::de::Error>(self) -> Result<BigInt, E> {
        match self {
            JsonInt::Small(v) => Ok(BigInt::from(v)),
            JsonInt::Big(s) => BigInt::from_str(&s).map_err(E::custom),
        }
    }
}

pub mod bigint_vec {
    use super::*;

    pub fn serialize<S: Serializer>(value: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<JsonInt> = value.iter().map(JsonInt::from).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<JsonInt>::deserialize(d)?
            .into_iter()
            .map(JsonInt::into_bigint)
            .collect()
    }
}

pub mod bigint_rows {
    use super::*;

    pub fn serialize<S: Serializer>(value: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Vec<JsonInt>> = value
            .iter()
            .map(|row| row.iter().map(JsonInt::from).collect())
            .collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        Vec::<Vec<JsonInt>>::deserialize(d)?
            .into_iter()
            .map(|row| row.into_iter().map(JsonInt::into_bigint).collect())
            .collect()
    }
}

pub(crate) fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn parse_rational<E: serde::de::Error>(s: &str) -> Result<BigRational, E> {
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(
            BigInt::from_str(s.trim()).map_err(E::custom)?,
        )),
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(E::custom)?;
            let q = BigInt::from_str(q.trim()).map_err(E::custom)?;
            if q == BigInt::from(0) {
                return Err(E::custom("zero denominator"));
            }
            Ok(BigRational::new(p, q))
        }
    }
}

pub mod rational_rows {
    use super::*;

    pub fn serialize<S: Serializer>(value: &[Vec<BigRational>], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Vec<String>> = value
            .iter()
            .map(|row| row.iter().map(format_rational).collect())
            .collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Vec<Vec<BigRational>>, D::Error> {
        Vec::<Vec<String>>::deserialize(d)?
            .iter()
            .map(|row| row.iter().map(|s| parse_rational::<D::Error>(s)).collect())
            .collect()
    }
}
