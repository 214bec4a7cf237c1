//! Factorization into monic irreducibles.
//!
//! Over F_p: squarefree decomposition, distinct-degree splitting, then
//! seeded equal-degree splitting (Cantor–Zassenhaus). Over ℚ: clear
//! denominators, factor modulo a prime that keeps the polynomial squarefree,
//! Hensel-lift, and recombine lifted factors by subset search.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{is_prime, Field, Scalar};
use crate::error::{Error, Result};
use crate::poly::{poly_gcd, poly_xgcd, Poly};

pub const DEFAULT_DEGREE_LIMIT: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorOptions {
    /// Largest degree accepted over ℚ.
    pub degree_limit: usize,
    /// Seed for the equal-degree splitter. The result does not depend on it.
    pub seed: u64,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions {
            degree_limit: DEFAULT_DEGREE_LIMIT,
            seed: 0x5eed,
        }
    }
}

/// `unit * prod factor_i^{e_i}`, factors monic irreducible, distinct and sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: Scalar,
    pub factors: Vec<(Poly, u32)>,
}

impl Factorization {
    pub fn reconstruct(&self) -> Poly {
        let mut acc = Poly::constant(self.unit.clone());
        for (p, e) in &self.factors {
            acc = &acc * &p.pow(*e);
        }
        acc
    }

    pub fn is_irreducible(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].1 == 1
    }
}

pub fn factor(f: &Poly) -> Result<Factorization> {
    factor_with(f, &FactorOptions::default())
}

pub fn factor_with(f: &Poly, opts: &FactorOptions) -> Result<Factorization> {
    let degree = f.degree().ok_or_else(|| Error::Parse("cannot factor the zero polynomial".into()))?;
    let unit = f.leading();
    let monic = f.monic();
    let mut factors: Vec<(Poly, u32)> = Vec::new();
    if degree > 0 {
        match f.field() {
            Field::Prime(p) => {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                for (part, mult) in squarefree_fp(&monic, p) {
                    for (group, d) in distinct_degree(&part, p) {
                        for irr in equal_degree(&group, d, p, &mut rng) {
                            factors.push((irr, mult));
                        }
                    }
                }
            }
            Field::Rationals => {
                if degree > opts.degree_limit {
                    return Err(Error::DegreeLimit {
                        degree,
                        limit: opts.degree_limit,
                    });
                }
                for (part, mult) in squarefree_char0(&monic) {
                    for irr in factor_squarefree_rational(&part, opts) {
                        factors.push((irr, mult));
                    }
                }
            }
        }
    }
    factors.sort_by(|a, b| a.0.canonical_cmp(&b.0).then(a.1.cmp(&b.1)));
    // Squarefree parts are pairwise coprime, so factors never repeat.
    Ok(Factorization { unit, factors })
}

/// Yun's algorithm. Input monic; output monic parts with multiplicities.
fn squarefree_char0(f: &Poly) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    let df = f.derivative();
    let mut a = poly_gcd(f, &df).expect("same field");
    let mut b = f.exact_div(&a).expect("gcd divides");
    let mut c = df.exact_div(&a).expect("gcd divides");
    let mut d = &c - &b.derivative();
    let mut i = 1;
    while b.deg() > 0 {
        a = poly_gcd(&b, &d).expect("same field");
        if a.deg() > 0 {
            out.push((a.clone(), i));
        }
        b = b.exact_div(&a).expect("gcd divides");
        c = d.exact_div(&a).expect("gcd divides");
        d = &c - &b.derivative();
        i += 1;
    }
    out
}

fn pth_root(f: &Poly, p: u64) -> Poly {
    let coeffs = f.coeffs().iter().step_by(p as usize).cloned().collect();
    Poly::new(f.field(), coeffs).expect("same field")
}

/// Squarefree decomposition over F_p, handling p-th powers.
fn squarefree_fp(f: &Poly, p: u64) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    if f.deg() == 0 {
        return out;
    }
    let df = f.derivative();
    if df.is_zero() {
        for (h, e) in squarefree_fp(&pth_root(f, p), p) {
            out.push((h, e * p as u32));
        }
        return out;
    }
    let mut c = poly_gcd(f, &df).expect("same field");
    let mut w = f.exact_div(&c).expect("gcd divides");
    let mut i = 1;
    while w.deg() > 0 {
        let y = poly_gcd(&w, &c).expect("same field");
        let z = w.exact_div(&y).expect("gcd divides");
        if z.deg() > 0 {
            out.push((z, i));
        }
        i += 1;
        c = c.exact_div(&y).expect("gcd divides");
        w = y;
    }
    if c.deg() > 0 {
        for (h, e) in squarefree_fp(&pth_root(&c, p), p) {
            out.push((h, e * p as u32));
        }
    }
    out
}

/// Splits a squarefree monic polynomial into products of equal-degree irreducibles.
fn distinct_degree(f: &Poly, p: u64) -> Vec<(Poly, usize)> {
    let field = f.field();
    let x = Poly::x(field);
    let mut out = Vec::new();
    let mut rest = f.clone();
    let mut h = x.rem(&rest);
    let mut i = 1;
    while rest.deg() >= 2 * i {
        h = h.pow_mod(p as u128, &rest);
        let g = poly_gcd(&(&h - &x), &rest).expect("same field");
        if g.deg() > 0 {
            rest = rest.exact_div(&g).expect("gcd divides");
            h = h.rem(&rest);
            out.push((g, i));
        }
        i += 1;
    }
    if rest.deg() > 0 {
        let d = rest.deg();
        out.push((rest, d));
    }
    out
}

fn pow_mod_big(a: &Poly, e: &BigUint, m: &Poly) -> Poly {
    let mut acc = Poly::one(a.field()).rem(m);
    for bit in (0..e.bits()).rev() {
        acc = (&acc * &acc).rem(m);
        if e.bit(bit) {
            acc = (&acc * a).rem(m);
        }
    }
    acc
}

fn random_poly(field: Field, p: u64, below: usize, rng: &mut ChaCha8Rng) -> Poly {
    let coeffs = (0..below).map(|_| Scalar::residue(rng.gen_range(0..p), p)).collect();
    Poly::new(field, coeffs).expect("same field")
}

/// Cantor–Zassenhaus splitting of a product of distinct degree-`d` irreducibles.
fn equal_degree(f: &Poly, d: usize, p: u64, rng: &mut ChaCha8Rng) -> Vec<Poly> {
    let n = f.deg();
    if n == d {
        return vec![f.clone()];
    }
    let field = f.field();
    let exponent = (BigUint::from(p).pow(d as u32) - 1u32) / 2u32;
    loop {
        let a = random_poly(field, p, n, rng);
        if a.deg() == 0 {
            continue;
        }
        let b = if p == 2 {
            // Trace map a + a^2 + ... + a^{2^{d-1}}.
            let mut acc = a.clone();
            let mut term = a.clone();
            for _ in 1..d {
                term = (&term * &term).rem(f);
                acc = &acc + &term;
            }
            acc
        } else {
            &pow_mod_big(&a, &exponent, f) - &Poly::one(field)
        };
        let g = poly_gcd(&b, f).expect("same field");
        if g.deg() > 0 && g.deg() < n {
            let h = f.exact_div(&g).expect("gcd divides");
            let mut out = equal_degree(&g, d, p, rng);
            out.extend(equal_degree(&h, d, p, rng));
            return out;
        }
    }
}

// ---------------------------------------------------------------------------
// Rational factorization (Zassenhaus)

type ZPoly = Vec<BigInt>;

fn z_trim(mut a: ZPoly) -> ZPoly {
    while a.last().is_some_and(Zero::is_zero) {
        a.pop();
    }
    a
}

fn z_mul(a: &ZPoly, b: &ZPoly) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    z_trim(out)
}

fn z_sub(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let n = a.len().max(b.len());
    let zero = BigInt::zero();
    z_trim((0..n).map(|i| a.get(i).unwrap_or(&zero) - b.get(i).unwrap_or(&zero)).collect())
}

fn z_mod(a: &ZPoly, m: &BigInt) -> ZPoly {
    z_trim(a.iter().map(|c| c.mod_floor(m)).collect())
}

fn z_symmetric(a: &ZPoly, m: &BigInt) -> ZPoly {
    let half = m / 2;
    z_trim(
        a.iter()
            .map(|c| {
                let r = c.mod_floor(m);
                if r > half {
                    r - m
                } else {
                    r
                }
            })
            .collect(),
    )
}

fn z_content(a: &ZPoly) -> BigInt {
    a.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn z_primitive(a: &ZPoly) -> ZPoly {
    let mut c = z_content(a);
    if a.last().is_some_and(Signed::is_negative) {
        c = -c;
    }
    a.iter().map(|x| x / &c).collect()
}

fn z_to_fp(a: &ZPoly, p: u64) -> Poly {
    let field = Field::Prime(p);
    Poly::new(field, a.iter().map(|c| Scalar::from_bigint(field, c.clone())).collect()).expect("same field")
}

fn fp_to_z(a: &Poly) -> ZPoly {
    a.coeffs()
        .iter()
        .map(|c| BigInt::from(c.as_residue().expect("residue")))
        .collect()
}

fn z_to_q(a: &ZPoly) -> Poly {
    let field = Field::Rationals;
    Poly::new(field, a.iter().map(|c| Scalar::from_bigint(field, c.clone())).collect()).expect("same field")
}

/// Integer primitive polynomial proportional to a monic rational one.
fn q_to_primitive_z(f: &Poly) -> ZPoly {
    let lcm = f
        .coeffs()
        .iter()
        .fold(BigInt::one(), |l, c| l.lcm(c.as_rational().expect("rational").denom()));
    let scaled: ZPoly = f
        .coeffs()
        .iter()
        .map(|c| {
            let q = c.as_rational().expect("rational") * BigRational::from_integer(lcm.clone());
            q.to_integer()
        })
        .collect();
    z_primitive(&scaled)
}

/// Exact division test over ℤ via ℚ; returns the integer quotient.
fn z_divide(a: &ZPoly, b: &ZPoly) -> Option<ZPoly> {
    let (q, r) = z_to_q(a).div_rem(&z_to_q(b));
    if !r.is_zero() {
        return None;
    }
    let mut out = Vec::new();
    for c in q.coeffs() {
        let c = c.as_rational().expect("rational");
        if !c.is_integer() {
            return None;
        }
        out.push(c.to_integer());
    }
    Some(out)
}

/// Monic irreducible factors of a squarefree monic rational polynomial.
fn factor_squarefree_rational(f: &Poly, opts: &FactorOptions) -> Vec<Poly> {
    if f.deg() <= 1 {
        return vec![f.clone()];
    }
    let g = q_to_primitive_z(f);
    zassenhaus(&g, opts)
        .into_iter()
        .map(|h| z_to_q(&h).monic())
        .collect()
}

fn good_primes(g: &ZPoly) -> impl Iterator<Item = u64> + '_ {
    let lc = g.last().expect("nonzero").clone();
    (3u64..)
        .filter(|&p| is_prime(p))
        .filter(move |&p| !(lc.clone() % BigInt::from(p)).is_zero())
        .filter(move |&p| {
            let fp = z_to_fp(g, p);
            poly_gcd(&fp, &fp.derivative()).expect("same field").deg() == 0
        })
}

fn zassenhaus(g: &ZPoly, opts: &FactorOptions) -> Vec<ZPoly> {
    let n = g.len() - 1;
    // Pick the prime (among a few) with the fewest modular factors.
    let mut best: Option<(u64, Vec<Poly>)> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for p in good_primes(g).take(6) {
        let fp = z_to_fp(g, p).monic();
        let mut facs = Vec::new();
        for (group, d) in distinct_degree(&fp, p) {
            facs.extend(equal_degree(&group, d, p, &mut rng));
        }
        if best.as_ref().is_none_or(|(_, b)| facs.len() < b.len()) {
            best = Some((p, facs));
        }
        if best.as_ref().is_some_and(|(_, b)| b.len() == 1) {
            break;
        }
    }
    let (p, modular) = best.expect("infinitely many good primes");
    if modular.len() == 1 {
        return vec![g.clone()];
    }
    // Coefficient bound for factors of lc * g.
    let lc = g.last().unwrap().abs();
    let norm2: BigInt = g.iter().map(|c| c * c).sum();
    let bound = &lc * (BigInt::one() << n) * (norm2.sqrt() + 1u32);
    let pb = BigInt::from(p);
    let mut modulus = pb.clone();
    let mut exponent = 1u32;
    while modulus <= &bound * 2u32 {
        modulus *= &pb;
        exponent += 1;
    }
    let lifted = hensel_lift(g, &modular, p, exponent);

    // Subset recombination.
    let mut remaining: Vec<ZPoly> = lifted;
    let mut current = g.clone();
    let mut found = Vec::new();
    let mut size = 1;
    while 2 * size <= remaining.len() {
        let mut progressed = false;
        for subset in subsets(remaining.len(), size) {
            let lc_cur = current.last().unwrap().clone();
            let mut cand: ZPoly = vec![lc_cur];
            for &i in &subset {
                cand = z_mod(&z_mul(&cand, &remaining[i]), &modulus);
            }
            let cand = z_primitive(&z_symmetric(&cand, &modulus));
            if let Some(q) = z_divide(&current, &cand) {
                found.push(cand);
                current = z_primitive(&q);
                remaining = remaining
                    .into_iter()
                    .enumerate()
                    .filter(|(i, _)| !subset.contains(i))
                    .map(|(_, f)| f)
                    .collect();
                progressed = true;
                break;
            }
        }
        if !progressed {
            size += 1;
        }
    }
    if current.len() > 1 {
        found.push(current);
    }
    found
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Lifts `g ≡ lc * prod(modular)` from mod p to mod p^exponent, one factor
/// at a time with linear Hensel steps. Returns monic lifts.
fn hensel_lift(g: &ZPoly, modular: &[Poly], p: u64, exponent: u32) -> Vec<ZPoly> {
    let pb = BigInt::from(p);
    let big_m = pb.pow(exponent);
    let mut out = Vec::new();
    let mut target = z_mod(g, &big_m);
    for (idx, factor) in modular.iter().enumerate() {
        if idx + 1 == modular.len() {
            // Remaining cofactor is lc * (last factor); normalize to monic.
            let lc = target.last().unwrap().clone();
            let inv = lc.modinv(&big_m).expect("lc is a unit");
            out.push(z_mod(&target.iter().map(|c| c * &inv).collect(), &big_m));
            break;
        }
        let rest_fp = z_to_fp(&target, p)
            .exact_div(factor)
            .expect("modular factor divides");
        let (one, s, t) = poly_xgcd(factor, &rest_fp);
        debug_assert!(one.is_one());
        let mut a = fp_to_z(factor);
        let mut b = fp_to_z(&rest_fp);
        let mut pj = pb.clone();
        for _ in 1..exponent {
            let err = z_mod(&z_sub(&target, &z_mul(&a, &b)), &big_m);
            let e: ZPoly = err.iter().map(|c| c / &pj).collect();
            let e_fp = z_to_fp(&e, p);
            let (quo, ra) = (&t * &e_fp).div_rem(factor);
            let rb = &(&s * &e_fp) + &(&quo * &rest_fp);
            let ra_z = fp_to_z(&ra);
            let rb_z = fp_to_z(&rb);
            a = z_mod(&z_sub(&a, &ra_z.iter().map(|c| -(c * &pj)).collect()), &big_m);
            b = z_mod(&z_sub(&b, &rb_z.iter().map(|c| -(c * &pj)).collect()), &big_m);
            pj *= &pb;
        }
        out.push(a);
        target = b;
    }
    out
}

/// Largest exponent `e` with `p^e | f`.
pub fn multiplicity(p: &Poly, f: &Poly) -> u32 {
    let mut e = 0;
    let mut cur = f.clone();
    while !cur.is_zero() {
        match cur.exact_div(p) {
            Some(q) => {
                cur = q;
                e += 1;
            }
            None => break,
        }
    }
    e
}
