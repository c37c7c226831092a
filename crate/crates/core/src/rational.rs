//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"` or `"p"`. Decimal notation is rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.contains(['.', 'e', 'E']) {
        return Err(Error::Parse(format!("'{s}' is not a rational of the form p/q")));
    }
    t.parse::<Rational>()
        .map_err(|_| Error::Parse(format!("'{s}' is not a rational of the form p/q")))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn vec_to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

pub fn format_point(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(|q| q.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Least common multiple of the denominators.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Scales a nonzero rational vector by a positive factor to the primitive
/// integer vector on the same ray. Returns the vector and the factor used.
pub fn primitive_integer(v: &[Rational]) -> Option<(Vec<BigInt>, Rational)> {
    if v.iter().all(Zero::is_zero) {
        return None;
    }
    let l = denominator_lcm(v);
    let ints: Vec<BigInt> = v.iter().map(|q| (q * &l).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let prim: Vec<BigInt> = ints.iter().map(|x| x / &g).collect();
    Some((prim, Rational::new(l, g)))
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_int(a: &[BigInt], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(x, y)| y * Rational::from_integer(x.clone()))
        .sum()
}

pub fn is_integral(q: &Rational) -> bool {
    q.is_integer()
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::{parse_rational, Rational};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = RationalRepr::deserialize(d)?;
        s.into_rational().map_err(D::Error::custom)
    }

    /// Accepts `"p/q"` strings and JSON integers, never floats.
    pub(crate) enum RationalRepr {
        Int(i64),
        Str(String),
    }

    impl<'de> Deserialize<'de> for RationalRepr {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            struct V;
            impl serde::de::Visitor<'_> for V {
                type Value = RationalRepr;
                fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                    f.write_str("an integer or a \"p/q\" string")
                }
                fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<RationalRepr, E> {
                    Ok(RationalRepr::Int(v))
                }
                fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<RationalRepr, E> {
                    i64::try_from(v)
                        .map(RationalRepr::Int)
                        .or_else(|_| Ok(RationalRepr::Str(v.to_string())))
                }
                fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<RationalRepr, E> {
                    Err(E::custom(format!(
                        "float {v} is not accepted; write rationals as \"p/q\" strings"
                    )))
                }
                fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<RationalRepr, E> {
                    Ok(RationalRepr::Str(v.to_owned()))
                }
            }
            d.deserialize_any(V)
        }
    }

    impl RationalRepr {
        pub(crate) fn into_rational(self) -> Result<Rational, String> {
            match self {
                RationalRepr::Int(i) => Ok(super::int(i)),
                RationalRepr::Str(s) => parse_rational(&s).map_err(|e| e.to_string()),
            }
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for q in v {
                seq.serialize_element(&q.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let raw = Vec::<RationalRepr>::deserialize(d)?;
            raw.into_iter()
                .map(|r| r.into_rational().map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match q {
                Some(q) => s.serialize_some(&q.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            let raw = Option::<RationalRepr>::deserialize(d)?;
            raw.map(|r| r.into_rational().map_err(D::Error::custom))
                .transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational(" 7 ").unwrap(), int(7));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn primitive_vectors() {
        let (v, s) = primitive_integer(&[rat(-3, 2), int(-1)]).unwrap();
        assert_eq!(v, vec![BigInt::from(-3), BigInt::from(-2)]);
        assert_eq!(s, int(2));
        assert!(primitive_integer(&[int(0), int(0)]).is_none());
    }
}
