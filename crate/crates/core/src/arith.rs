//! Exact scalars: arbitrary-precision rationals and residues modulo a prime.
//!
//! A [`Scalar`] always knows which [`Field`] it belongs to. Combining scalars
//! from different fields through the `checked_*` methods yields
//! [`Error::MixedFields`]; the operator impls treat it as a programming error
//! and panic.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest modulus accepted. Products of two residues must fit in a `u64`.
pub const MAX_MODULUS: u64 = u32::MAX as u64;

/// The scalar field: ℚ or F_p for an odd or even prime p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Rationals,
    Prime(u64),
}

impl Field {
    /// Builds F_p after checking primality by trial division.
    pub fn prime(p: u64) -> Result<Field> {
        if p > MAX_MODULUS || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Field::Prime(p))
    }

    /// 0 for ℚ, p for F_p.
    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Rationals => 0,
            Field::Prime(p) => *p,
        }
    }

    pub fn is_rationals(&self) -> bool {
        matches!(self, Field::Rationals)
    }

    pub fn modulus(&self) -> Option<u64> {
        match self {
            Field::Rationals => None,
            Field::Prime(p) => Some(*p),
        }
    }

    pub fn zero(&self) -> Scalar {
        Scalar::zero(*self)
    }

    pub fn one(&self) -> Scalar {
        Scalar::one(*self)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        Scalar::from_i64(*self, v)
    }

    /// Parses a scalar literal (`"a/b"` or `"a"`) into this field.
    pub fn parse(&self, text: &str) -> Result<Scalar> {
        Scalar::parse(*self, text)
    }

    /// Fails with [`Error::SmallCharacteristic`] unless `char_exceeds(self, n)`.
    pub fn require_large(&self, n: usize) -> Result<()> {
        if char_exceeds(*self, n) {
            Ok(())
        } else {
            Err(Error::SmallCharacteristic {
                characteristic: self.characteristic(),
                dimension: n,
            })
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rationals => write!(f, "Q"),
            Field::Prime(p) => write!(f, "F_{p}"),
        }
    }
}

/// `"Q"` or `{"Fp": p}`.
impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Field::Rationals => s.serialize_str("Q"),
            Field::Prime(p) => serde_json::json!({ "Fp": p }).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::String(s) if s == "Q" => Ok(Field::Rationals),
            serde_json::Value::Object(map) if map.len() == 1 => {
                let p = map.get("Fp").and_then(|p| p.as_u64()).ok_or_else(|| D::Error::custom("expected {\"Fp\": prime}"))?;
                Field::prime(p).map_err(D::Error::custom)
            }
            other => Err(D::Error::custom(format!("expected \"Q\" or {{\"Fp\": p}}, got {other}"))),
        }
    }
}

/// True iff the field is ℚ or its characteristic exceeds `n`.
pub fn char_exceeds(field: Field, n: usize) -> bool {
    match field {
        Field::Rationals => true,
        Field::Prime(p) => p > n as u64,
    }
}

/// Deterministic trial division.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Rational(BigRational),
    Residue { value: u64, modulus: u64 },
}

/// An exact field element.
///
/// Rationals are kept in lowest terms with a positive denominator, residues
/// in `[0, p)`, so structural equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar(Repr);

fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn bigint_mod(v: &BigInt, p: u64) -> u64 {
    let m = BigInt::from(p);
    v.mod_floor(&m).to_u64().expect("residue fits in u64")
}

impl Scalar {
    pub fn zero(field: Field) -> Scalar {
        Scalar::from_i64(field, 0)
    }

    pub fn one(field: Field) -> Scalar {
        Scalar::from_i64(field, 1)
    }

    pub fn from_i64(field: Field, v: i64) -> Scalar {
        match field {
            Field::Rationals => Scalar(Repr::Rational(BigRational::from_integer(v.into()))),
            Field::Prime(p) => Scalar(Repr::Residue {
                value: v.rem_euclid(p as i64) as u64,
                modulus: p,
            }),
        }
    }

    pub fn from_bigint(field: Field, v: BigInt) -> Scalar {
        match field {
            Field::Rationals => Scalar(Repr::Rational(BigRational::from_integer(v))),
            Field::Prime(p) => Scalar(Repr::Residue {
                value: bigint_mod(&v, p),
                modulus: p,
            }),
        }
    }

    /// Maps a rational into `field`. Over F_p the denominator must be a unit.
    pub fn from_rational(field: Field, q: BigRational) -> Result<Scalar> {
        match field {
            Field::Rationals => Ok(Scalar(Repr::Rational(q))),
            Field::Prime(p) => {
                let num = bigint_mod(q.numer(), p);
                let den = bigint_mod(q.denom(), p);
                if den == 0 {
                    return Err(Error::Parse(format!("denominator {} vanishes mod {p}", q.denom())));
                }
                let inv = mod_pow(den, p - 2, p);
                Ok(Scalar(Repr::Residue {
                    value: num * inv % p,
                    modulus: p,
                }))
            }
        }
    }

    /// Residue constructor; `value` is reduced mod `p`.
    pub fn residue(value: u64, p: u64) -> Scalar {
        Scalar(Repr::Residue {
            value: value % p,
            modulus: p,
        })
    }

    pub fn field(&self) -> Field {
        match &self.0 {
            Repr::Rational(_) => Field::Rationals,
            Repr::Residue { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Rational(q) => q.is_zero(),
            Repr::Residue { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.0 {
            Repr::Rational(q) => q.is_one(),
            Repr::Residue { value, .. } => *value == 1,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.0 {
            Repr::Rational(q) => Some(q),
            Repr::Residue { .. } => None,
        }
    }

    pub fn as_residue(&self) -> Option<u64> {
        match &self.0 {
            Repr::Rational(_) => None,
            Repr::Residue { value, .. } => Some(*value),
        }
    }

    fn same_field(&self, other: &Scalar) -> Result<()> {
        if self.field() == other.field() {
            Ok(())
        } else {
            Err(Error::MixedFields(format!("{} vs {}", self.field(), other.field())))
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar> {
        self.same_field(other)?;
        Ok(match (&self.0, &other.0) {
            (Repr::Rational(a), Repr::Rational(b)) => Scalar(Repr::Rational(a + b)),
            (Repr::Residue { value: a, modulus }, Repr::Residue { value: b, .. }) => Scalar(Repr::Residue {
                value: (a + b) % modulus,
                modulus: *modulus,
            }),
            _ => unreachable!(),
        })
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.same_field(other)?;
        Ok(match (&self.0, &other.0) {
            (Repr::Rational(a), Repr::Rational(b)) => Scalar(Repr::Rational(a - b)),
            (Repr::Residue { value: a, modulus }, Repr::Residue { value: b, .. }) => Scalar(Repr::Residue {
                value: (a + modulus - b) % modulus,
                modulus: *modulus,
            }),
            _ => unreachable!(),
        })
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.same_field(other)?;
        Ok(match (&self.0, &other.0) {
            (Repr::Rational(a), Repr::Rational(b)) => Scalar(Repr::Rational(a * b)),
            (Repr::Residue { value: a, modulus }, Repr::Residue { value: b, .. }) => Scalar(Repr::Residue {
                value: a * b % modulus,
                modulus: *modulus,
            }),
            _ => unreachable!(),
        })
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        self.same_field(other)?;
        self.checked_mul(&other.inv()?)
    }

    /// Multiplicative inverse; [`Error::ZeroInverse`] on zero.
    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(match &self.0 {
            Repr::Rational(q) => Scalar(Repr::Rational(q.recip())),
            Repr::Residue { value, modulus } => Scalar(Repr::Residue {
                value: mod_pow(*value, modulus - 2, *modulus),
                modulus: *modulus,
            }),
        })
    }

    pub fn pow(&self, exp: u64) -> Scalar {
        match &self.0 {
            Repr::Rational(q) => {
                let mut acc = BigRational::one();
                for _ in 0..exp {
                    acc *= q;
                }
                Scalar(Repr::Rational(acc))
            }
            Repr::Residue { value, modulus } => Scalar(Repr::Residue {
                value: mod_pow(*value, exp, *modulus),
                modulus: *modulus,
            }),
        }
    }

    /// Euler's criterion over F_p (odd p). `None` over ℚ.
    pub fn is_square(&self) -> Option<bool> {
        match &self.0 {
            Repr::Rational(_) => None,
            Repr::Residue { value, modulus } => {
                if *value == 0 || *modulus == 2 {
                    Some(true)
                } else {
                    Some(mod_pow(*value, (modulus - 1) / 2, *modulus) == 1)
                }
            }
        }
    }

    /// A square root over F_p (Tonelli–Shanks), if one exists.
    pub fn sqrt(&self) -> Option<Scalar> {
        let (a, p) = match &self.0 {
            Repr::Rational(_) => return None,
            Repr::Residue { value, modulus } => (*value, *modulus),
        };
        if a == 0 || p == 2 {
            return Some(self.clone());
        }
        if mod_pow(a, (p - 1) / 2, p) != 1 {
            return None;
        }
        let mut q = p - 1;
        let mut s = 0;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let mut z = 2;
        while mod_pow(z, (p - 1) / 2, p) != p - 1 {
            z += 1;
        }
        let mut m = s;
        let mut c = mod_pow(z, q, p);
        let mut t = mod_pow(a, q, p);
        let mut r = mod_pow(a, q.div_ceil(2), p);
        while t != 1 {
            let mut i = 0;
            let mut tt = t;
            while tt != 1 {
                tt = tt * tt % p;
                i += 1;
            }
            let b = mod_pow(c, 1u64 << (m - i - 1), p);
            m = i;
            c = b * b % p;
            t = t * c % p;
            r = r * b % p;
        }
        Some(Scalar::residue(r, p))
    }

    pub fn parse(field: Field, text: &str) -> Result<Scalar> {
        let q = parse_rational(text)?;
        Scalar::from_rational(field, q)
    }
}

/// Parses `"a/b"` or `"a"` into a reduced rational with positive denominator.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("invalid scalar literal {text:?}"));
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() || den.is_negative() {
        return Err(Error::Parse(format!("denominator must be positive in {text:?}")));
    }
    Ok(BigRational::new(num, den))
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order used for deterministic sorting: by field, then numerically
/// (rationals) or by canonical residue.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Rational(a), Repr::Rational(b)) => a.cmp(b),
            (Repr::Residue { value: a, modulus: p }, Repr::Residue { value: b, modulus: q }) => (p, a).cmp(&(q, b)),
            (Repr::Rational(_), Repr::Residue { .. }) => Ordering::Less,
            (Repr::Residue { .. }, Repr::Rational(_)) => Ordering::Greater,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Rational(q) => {
                if q.denom().is_one() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Repr::Residue { value, .. } => write!(f, "{value}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Raw scalar text, parsed into a field once the field is known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarText(pub String);

impl<'de> Deserialize<'de> for ScalarText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => Ok(ScalarText(s)),
            serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => Ok(ScalarText(n.to_string())),
            other => Err(serde::de::Error::custom(format!("expected scalar string or integer, got {other}"))),
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs).expect("scalar operands from different fields")
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match &self.0 {
            Repr::Rational(q) => Scalar(Repr::Rational(-q)),
            Repr::Residue { value, modulus } => Scalar(Repr::Residue {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            }),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// `field_inverse` as a free function.
pub fn field_inverse(a: &Scalar) -> Result<Scalar> {
    a.inv()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Scalar {
        Field::Rationals.parse(s).unwrap()
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(field_inverse(&q("2/3")).unwrap(), q("3/2"));
        let f5 = Field::prime(5).unwrap();
        assert_eq!(field_inverse(&f5.from_i64(2)).unwrap(), f5.from_i64(3));
        let f7 = Field::prime(7).unwrap();
        assert_eq!(field_inverse(&f7.zero()), Err(Error::ZeroInverse));
    }

    #[test]
    fn char_exceeds_examples() {
        assert!(char_exceeds(Field::Rationals, 100));
        assert!(char_exceeds(Field::Prime(5), 4));
        assert!(!char_exceeds(Field::Prime(5), 5));
    }

    #[test]
    fn primality() {
        assert!(Field::prime(101).is_ok());
        assert!(Field::prime(257).is_ok());
        assert_eq!(Field::prime(1), Err(Error::NotPrime(1)));
        assert_eq!(Field::prime(91), Err(Error::NotPrime(91)));
        let primes: Vec<u64> = (0..30).filter(|&p| is_prime(p)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn mixed_fields_rejected() {
        let a = q("1");
        let b = Field::Prime(7).one();
        assert!(matches!(a.checked_add(&b), Err(Error::MixedFields(_))));
        assert!(matches!(a.checked_mul(&b), Err(Error::MixedFields(_))));
    }

    #[test]
    fn parsing_normalizes() {
        assert_eq!(q("4/6").to_string(), "2/3");
        assert_eq!(q("-4/2").to_string(), "-2");
        assert!(Field::Rationals.parse("1/0").is_err());
        assert!(Field::Rationals.parse("1/-2").is_err());
        assert!(Field::Rationals.parse("abc").is_err());
        let f7 = Field::Prime(7);
        assert_eq!(f7.parse("-1").unwrap().to_string(), "6");
        assert_eq!(f7.parse("1/2").unwrap().to_string(), "4");
        assert!(f7.parse("1/7").is_err());
    }

    #[test]
    fn square_roots_mod_p() {
        for p in [3u64, 5, 7, 13, 17, 101, 257] {
            let f = Field::Prime(p);
            for v in 0..p {
                let a = f.from_i64(v as i64);
                let expected = (0..p).any(|t| t * t % p == v);
                assert_eq!(a.is_square(), Some(expected));
                match a.sqrt() {
                    Some(r) => assert_eq!(&r * &r, a),
                    None => assert!(!expected),
                }
            }
        }
    }

    #[test]
    fn field_json_round_trip() {
        for f in [Field::Rationals, Field::Prime(101)] {
            let text = serde_json::to_string(&f).unwrap();
            assert_eq!(serde_json::from_str::<Field>(&text).unwrap(), f);
        }
        assert_eq!(serde_json::to_string(&Field::Prime(7)).unwrap(), r#"{"Fp":7}"#);
        assert!(serde_json::from_str::<Field>(r#"{"Fp":8}"#).is_err());
    }
}
