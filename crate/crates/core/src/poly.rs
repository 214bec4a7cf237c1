//! Dense univariate polynomials over a [`Field`], plus the dual and additive
//! dual operators and the two variable substitutions used to build forms on
//! self-dual blocks.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};

use crate::arith::{Field, Scalar};
use crate::error::{Error, Result};

/// Coefficients lowest degree first, trailing zeros stripped.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    field: Field,
    coeffs: Vec<Scalar>,
}

impl Poly {
    pub fn new(field: Field, coeffs: Vec<Scalar>) -> Result<Poly> {
        if let Some(c) = coeffs.iter().find(|c| c.field() != field) {
            return Err(Error::MixedFields(format!("coefficient over {} in polynomial over {field}", c.field())));
        }
        Ok(Poly::from_vec(field, coeffs))
    }

    pub(crate) fn from_vec(field: Field, mut coeffs: Vec<Scalar>) -> Poly {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Poly { field, coeffs }
    }

    pub fn from_i64s(field: Field, coeffs: &[i64]) -> Poly {
        Poly::from_vec(field, coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn zero(field: Field) -> Poly {
        Poly { field, coeffs: Vec::new() }
    }

    pub fn one(field: Field) -> Poly {
        Poly::constant(field.one())
    }

    pub fn constant(c: Scalar) -> Poly {
        Poly::from_vec(c.field(), vec![c])
    }

    /// The polynomial `x`.
    pub fn x(field: Field) -> Poly {
        Poly::from_vec(field, vec![field.zero(), field.one()])
    }

    /// `x - root`.
    pub fn linear(root: &Scalar) -> Poly {
        Poly::from_vec(root.field(), vec![-root, root.field().one()])
    }

    /// `c * x^k`.
    pub fn monomial(c: Scalar, k: usize) -> Poly {
        let field = c.field();
        let mut coeffs = vec![field.zero(); k];
        coeffs.push(c);
        Poly::from_vec(field, coeffs)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn leading(&self) -> Scalar {
        self.coeffs.last().cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(Scalar::is_one)
    }

    /// Divides by the leading coefficient; the zero polynomial is returned as is.
    pub fn monic(&self) -> Poly {
        match self.coeffs.last() {
            None => self.clone(),
            Some(lc) => {
                let inv = lc.inv().expect("nonzero leading coefficient");
                self.scale(&inv)
            }
        }
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        Poly::from_vec(self.field, self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn eval(&self, at: &Scalar) -> Scalar {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * at) + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * &self.field.from_i64(i as i64))
            .collect();
        Poly::from_vec(self.field, coeffs)
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    fn check_field(&self, other: &Poly) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::MixedFields(format!("{} vs {}", self.field, other.field)))
        }
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        self.checked_div_rem(d).expect("division by the zero polynomial or across fields")
    }

    pub fn checked_div_rem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        self.check_field(d)?;
        let dd = d.degree().ok_or(Error::ZeroInverse)?;
        let inv_lc = d.leading().inv()?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(self.field), self.clone()));
        }
        let mut quot = vec![self.field.zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] * &inv_lc;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[i + j] = &rem[i + j] - &(&c * dc);
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Ok((Poly::from_vec(self.field, quot), Poly::from_vec(self.field, rem)))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.div_rem(d).1
    }

    /// Exact quotient; `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }

    pub fn divides(&self, other: &Poly) -> bool {
        other.rem(self).is_zero()
    }

    /// `self^e mod m` by square and multiply.
    pub fn pow_mod(&self, mut e: u128, m: &Poly) -> Poly {
        let mut base = self.rem(m);
        let mut acc = Poly::one(self.field).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = (&acc * &base).rem(m);
            }
            e >>= 1;
            if e > 0 {
                base = (&base * &base).rem(m);
            }
        }
        acc
    }

    /// Substitutes `x -> -x`.
    pub fn negate_variable(&self) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
            .collect();
        Poly::from_vec(self.field, coeffs)
    }

    /// Coefficients reversed: `x^deg * f(1/x)`.
    pub fn reversed(&self) -> Poly {
        let mut c = self.coeffs.clone();
        c.reverse();
        Poly::from_vec(self.field, c)
    }

    /// Ordering key: degree first, then coefficients from the constant term up.
    pub fn canonical_cmp(&self, other: &Poly) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }

    /// Parses text such as `"x^4 - 3*x + 1/2"`.
    pub fn parse(field: Field, text: &str) -> Result<Poly> {
        parse_poly(field, text)
    }
}

/// Monic gcd; `gcd(f, 0) = monic(f)`.
pub fn poly_gcd(f: &Poly, g: &Poly) -> Result<Poly> {
    f.check_field(g)?;
    let mut a = f.clone();
    let mut b = g.clone();
    while !b.is_zero() {
        let r = a.rem(&b);
        a = b;
        b = r;
    }
    Ok(a.monic())
}

/// Extended Euclid: returns `(g, s, t)` with `s f + t g' = g` and `g` monic.
pub fn poly_xgcd(f: &Poly, g: &Poly) -> (Poly, Poly, Poly) {
    let field = f.field();
    let (mut r0, mut r1) = (f.clone(), g.clone());
    let (mut s0, mut s1) = (Poly::one(field), Poly::zero(field));
    let (mut t0, mut t1) = (Poly::zero(field), Poly::one(field));
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        r0 = std::mem::replace(&mut r1, r);
        let s = &s0 - &(&q * &s1);
        s0 = std::mem::replace(&mut s1, s);
        let t = &t0 - &(&q * &t1);
        t0 = std::mem::replace(&mut t1, t);
    }
    if r0.is_zero() {
        return (r0, s0, t0);
    }
    let inv = r0.leading().inv().expect("nonzero");
    (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
}

/// The monic dual `f*(x) = f(0)^{-1} x^d f(1/x)`.
pub fn dual_poly(f: &Poly) -> Result<Poly> {
    if f.is_zero() || f.coeff(0).is_zero() {
        return Err(Error::ZeroConstantTerm);
    }
    let c0 = f.coeff(0).inv()?;
    Ok(f.reversed().scale(&c0))
}

/// The additive dual `f⁻(x) = (-1)^d f(-x)`.
pub fn additive_dual_poly(f: &Poly) -> Poly {
    let g = f.negate_variable();
    if f.deg() % 2 == 1 {
        -&g
    } else {
        g
    }
}

/// `f == f*`. Requires `f(0) != 0`.
pub fn is_self_dual(f: &Poly) -> Result<bool> {
    Ok(dual_poly(&f.monic())? == f.monic())
}

/// `f == f⁻`. For odd degree with `f(0) != 0` this is always false.
pub fn is_additively_self_dual(f: &Poly) -> bool {
    additive_dual_poly(&f.monic()) == f.monic()
}

/// For self-dual `p` of degree `2m` with `p(0) = 1`, returns `q` of degree `m`
/// with `x^{-m} p(x) = q(x + 1/x)`.
pub fn substitute_y_eq_x_plus_inv(p: &Poly) -> Result<Poly> {
    let field = p.field();
    let d = p.degree().ok_or(Error::ZeroConstantTerm)?;
    if d % 2 == 1 {
        return Err(Error::OddDegree);
    }
    if !p.is_monic() || !is_self_dual(p)? || !p.coeff(0).is_one() {
        return Err(Error::NotSelfDual(p.to_string()));
    }
    let m = d / 2;
    // power_sums[j] = x^j + x^{-j} as a polynomial in y, via
    // P_j = y P_{j-1} - P_{j-2}, P_0 = 2, P_1 = y.
    let y = Poly::x(field);
    let mut power_sums = vec![Poly::constant(field.from_i64(2)), y.clone()];
    for j in 2..=m {
        let next = &(&y * &power_sums[j - 1]) - &power_sums[j - 2];
        power_sums.push(next);
    }
    // x^{-m} p(x) = c_m + sum_{j>=1} c_{m+j} (x^j + x^{-j}) by palindromy.
    let mut q = Poly::constant(p.coeff(m));
    for (j, sum) in power_sums.iter().enumerate().take(m + 1).skip(1) {
        q = &q + &sum.scale(&p.coeff(m + j));
    }
    Ok(q)
}

/// For even `p` (only even powers), returns `q` with `p(x) = q(x^2)`.
pub fn substitute_y_eq_x_squared(p: &Poly) -> Result<Poly> {
    if p.coeffs.iter().enumerate().any(|(i, c)| i % 2 == 1 && !c.is_zero()) {
        return Err(Error::NotEvenPolynomial);
    }
    let coeffs = p.coeffs.iter().step_by(2).cloned().collect();
    Ok(Poly::from_vec(p.field(), coeffs))
}

/// Composition `f(g(x))`.
pub fn compose(f: &Poly, g: &Poly) -> Poly {
    let mut acc = Poly::zero(f.field());
    for c in f.coeffs.iter().rev() {
        acc = &(&acc * g) + &Poly::constant(c.clone());
    }
    acc
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.field, rhs.field, "polynomials over different fields");
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) + &rhs.coeff(i)).collect();
        Poly::from_vec(self.field, coeffs)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.field, rhs.field, "polynomials over different fields");
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) - &rhs.coeff(i)).collect();
        Poly::from_vec(self.field, coeffs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.field, rhs.field, "polynomials over different fields");
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(self.field);
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::from_vec(self.field, out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::from_vec(self.field, self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let text = c.to_string();
            let (negative, magnitude) = match (self.field, text.strip_prefix('-')) {
                (Field::Rationals, Some(rest)) => (true, rest.to_string()),
                _ => (false, text),
            };
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            first = false;
            let unit = magnitude == "1";
            match i {
                0 => write!(f, "{magnitude}")?,
                _ => {
                    if !unit {
                        write!(f, "{magnitude}*")?;
                    }
                    if i == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn parse_poly(field: Field, text: &str) -> Result<Poly> {
    let bad = |why: &str| Error::Parse(format!("{why} in polynomial {text:?}"));
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(bad("empty input"));
    }
    // Split into signed terms.
    let mut terms = Vec::new();
    let mut current = String::new();
    for (i, ch) in compact.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 && !current.ends_with('^') {
            terms.push(std::mem::take(&mut current));
        }
        current.push(ch);
    }
    terms.push(current);
    let mut acc = Poly::zero(field);
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, term.strip_prefix('+').unwrap_or(&term)),
        };
        if body.is_empty() {
            return Err(bad("dangling sign"));
        }
        let (coef_text, power) = match body.find('x') {
            None => (body, 0usize),
            Some(pos) => {
                let coef = body[..pos].strip_suffix('*').unwrap_or(&body[..pos]);
                let rest = &body[pos + 1..];
                let power = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^')
                        .and_then(|e| e.parse::<usize>().ok())
                        .ok_or_else(|| bad("bad exponent"))?
                };
                (if coef.is_empty() { "1" } else { coef }, power)
            }
        };
        let mut c = field.parse(coef_text)?;
        if sign < 0 {
            c = -c;
        }
        acc = &acc + &Poly::monomial(c, power);
    }
    Ok(acc)
}
