//! Seeded random instances built from prescribed elementary-divisor data and
//! hidden by a random change of basis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{Field, Scalar};
use crate::factor::factor;
use crate::linalg::Matrix;
use crate::poly::{dual_poly, Poly};

pub const CORPUS_PRIMES: [u64; 2] = [101, 257];
pub const CORPUS_MAX_DIM: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Built around `(x∓1)^k`, self-dual and dual-pair divisors.
    Multiplicative,
    /// Built around `x^k`, additive pairs and even irreducibles.
    Additive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusInstance {
    pub id: usize,
    pub field: Field,
    pub flavor: Flavor,
    /// Cyclic blocks `q` with `companion(q)` summands, as text.
    pub blocks: Vec<String>,
    pub matrix: Matrix,
}

pub fn random_scalar(rng: &mut ChaCha8Rng, field: Field) -> Scalar {
    match field {
        Field::Rationals => field.from_i64(rng.gen_range(-5..=5)),
        Field::Prime(p) => Scalar::residue(rng.gen_range(0..p), p),
    }
}

pub fn random_invertible(rng: &mut ChaCha8Rng, field: Field, n: usize) -> Matrix {
    loop {
        let rows = (0..n)
            .map(|_| (0..n).map(|_| random_scalar(rng, field)).collect())
            .collect();
        let g = Matrix::from_rows(field, rows).expect("square rows");
        if !g.det().expect("square").is_zero() {
            return g;
        }
    }
}

/// `g M g⁻¹`.
pub fn conjugate(m: &Matrix, g: &Matrix) -> Matrix {
    &(g * m) * &g.inverse().expect("invertible conjugator")
}

fn nonzero(rng: &mut ChaCha8Rng, field: Field, avoid: &[i64]) -> Scalar {
    loop {
        let c = random_scalar(rng, field);
        if !c.is_zero() && !avoid.iter().any(|&a| c == field.from_i64(a)) {
            return c;
        }
    }
}

fn linear_power(root: &Scalar, k: u32) -> Poly {
    Poly::linear(root).pow(k)
}

fn irreducible(p: &Poly) -> bool {
    factor(p).is_ok_and(|f| f.is_irreducible())
}

/// `x² − ax + 1` irreducible, or a quartic palindrome when `quartic`.
fn self_dual_irreducible(rng: &mut ChaCha8Rng, field: Field, quartic: bool) -> Option<Poly> {
    for _ in 0..200 {
        let a = random_scalar(rng, field);
        let p = if quartic {
            let b = random_scalar(rng, field);
            Poly::new(field, vec![field.one(), a.clone(), b, a, field.one()]).ok()?
        } else {
            Poly::new(field, vec![field.one(), -&a, field.one()]).ok()?
        };
        if irreducible(&p) {
            return Some(p);
        }
    }
    None
}

/// Irreducible `x² + ax + b` that is not self-dual.
fn non_self_dual_quadratic(rng: &mut ChaCha8Rng, field: Field) -> Option<Poly> {
    for _ in 0..200 {
        let p = Poly::new(field, vec![random_scalar(rng, field), random_scalar(rng, field), field.one()]).ok()?;
        if irreducible(&p) && dual_poly(&p).is_ok_and(|d| d != p) {
            return Some(p);
        }
    }
    None
}

/// `x² − a` with `a` a non-square.
fn even_irreducible(rng: &mut ChaCha8Rng, field: Field) -> Option<Poly> {
    for _ in 0..200 {
        let a = nonzero(rng, field, &[]);
        if a.is_square() == Some(false) {
            return Poly::new(field, vec![-&a, field.zero(), field.one()]).ok();
        }
    }
    None
}

fn multiplicative_candidate(rng: &mut ChaCha8Rng, field: Field) -> Vec<Poly> {
    let one = field.one();
    match rng.gen_range(0..8) {
        0..=2 => {
            let root = if rng.gen_bool(0.5) { one } else { -&one };
            let k = rng.gen_range(1..=3);
            let mult = rng.gen_range(1..=3);
            vec![linear_power(&root, k); mult]
        }
        3 => {
            let d = rng.gen_range(1..=2);
            self_dual_irreducible(rng, field, false)
                .map(|p| vec![p.pow(d)])
                .unwrap_or_default()
        }
        4 => {
            let c = nonzero(rng, field, &[1, -1]);
            let k = rng.gen_range(1..=2);
            let mult = rng.gen_range(1..=2);
            let cinv = c.inv().expect("non-zero");
            let mut out = vec![linear_power(&c, k); mult];
            out.extend(vec![linear_power(&cinv, k); mult]);
            out
        }
        5 => {
            // Unpaired or unevenly paired.
            let c = nonzero(rng, field, &[1, -1]);
            let k = rng.gen_range(1..=2);
            let mut out = vec![linear_power(&c, k)];
            if rng.gen_bool(0.5) {
                out.extend(vec![linear_power(&c.inv().expect("non-zero"), k); 2]);
            }
            out
        }
        6 => self_dual_irreducible(rng, field, true).map(|p| vec![p]).unwrap_or_default(),
        _ => match non_self_dual_quadratic(rng, field) {
            Some(p) => {
                let mut out = vec![p.clone()];
                if rng.gen_bool(0.7) {
                    out.push(dual_poly(&p).expect("non-zero constant term"));
                }
                out
            }
            None => Vec::new(),
        },
    }
}

fn additive_candidate(rng: &mut ChaCha8Rng, field: Field) -> Vec<Poly> {
    let zero = field.zero();
    match rng.gen_range(0..6) {
        0..=1 => {
            let k = rng.gen_range(1..=3);
            let mult = rng.gen_range(1..=3);
            vec![linear_power(&zero, k); mult]
        }
        2 => {
            let c = nonzero(rng, field, &[]);
            let k = rng.gen_range(1..=2);
            let mult = rng.gen_range(1..=2);
            let mut out = vec![linear_power(&c, k); mult];
            out.extend(vec![linear_power(&-&c, k); mult]);
            out
        }
        3 => {
            let c = nonzero(rng, field, &[]);
            vec![linear_power(&c, rng.gen_range(1..=2))]
        }
        4 => {
            let d = rng.gen_range(1..=2);
            even_irreducible(rng, field).map(|p| vec![p.pow(d)]).unwrap_or_default()
        }
        _ => multiplicative_candidate(rng, field),
    }
}

fn block_label(blocks: &[Poly]) -> Vec<String> {
    blocks.iter().map(|b| b.to_string()).collect()
}

/// One instance with dimension between 1 and `max_dim`.
pub fn random_instance(rng: &mut ChaCha8Rng, id: usize, field: Field, flavor: Flavor, max_dim: usize) -> CorpusInstance {
    let target = rng.gen_range(1..=max_dim);
    let mut blocks: Vec<Poly> = Vec::new();
    let mut dim = 0;
    for _ in 0..24 {
        if dim >= target {
            break;
        }
        let candidate = match flavor {
            Flavor::Multiplicative => multiplicative_candidate(rng, field),
            Flavor::Additive => additive_candidate(rng, field),
        };
        let extra: usize = candidate.iter().map(Poly::deg).sum();
        if extra > 0 && dim + extra <= target {
            dim += extra;
            blocks.extend(candidate);
        }
    }
    if blocks.is_empty() {
        blocks.push(Poly::linear(&field.one()));
        dim = 1;
    }
    let companions: Vec<Matrix> = blocks.iter().map(Matrix::companion).collect();
    let m = Matrix::block_diag(field, &companions);
    let g = random_invertible(rng, field, dim);
    CorpusInstance {
        id,
        field,
        flavor,
        blocks: block_label(&blocks),
        matrix: conjugate(&m, &g),
    }
}

/// `count` instances alternating between the corpus primes; about two thirds
/// multiplicative.
pub fn generate_corpus(seed: u64, count: usize) -> Vec<CorpusInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|id| {
            let field = Field::Prime(CORPUS_PRIMES[id % CORPUS_PRIMES.len()]);
            let flavor = if rng.gen_bool(0.65) {
                Flavor::Multiplicative
            } else {
                Flavor::Additive
            };
            random_instance(&mut rng, id, field, flavor, CORPUS_MAX_DIM)
        })
        .collect()
}

/// Partitions of `n` in non-increasing order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=n.min(max)).rev() {
            prefix.push(part);
            go(n - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// `λ(I + L)` blocks for a Jordan type.
pub fn jordan_type_matrix(field: Field, parts: &[usize], lambda: i64) -> Matrix {
    let blocks: Vec<Matrix> = parts
        .iter()
        .map(|&k| {
            let mut b = Matrix::scalar(&field.from_i64(lambda), k);
            for i in 1..k {
                b.set(i, i - 1, field.from_i64(lambda));
            }
            b
        })
        .collect();
    Matrix::block_diag(field, &blocks)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnipotentInstance {
    pub field: Field,
    pub parts: Vec<usize>,
    pub eigenvalue: i64,
    pub matrix: Matrix,
}

/// Every Jordan type of dimension `1..=max_dim` with eigenvalue `1` and `−1`,
/// conjugated by a random matrix.
pub fn unipotent_corpus(field: Field, max_dim: usize, seed: u64) -> Vec<UnipotentInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n in 1..=max_dim {
        for parts in partitions(n) {
            for lambda in [1, -1] {
                let m = jordan_type_matrix(field, &parts, lambda);
                let g = random_invertible(&mut rng, field, n);
                out.push(UnipotentInstance {
                    field,
                    parts: parts.clone(),
                    eigenvalue: lambda,
                    matrix: conjugate(&m, &g),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::elementary_divisors;
    use crate::factor::FactorOptions;

    #[test]
    fn corpus_is_deterministic_and_bounded() {
        let a = generate_corpus(7, 30);
        let b = generate_corpus(7, 30);
        assert_eq!(a, b);
        for inst in &a {
            assert!(inst.matrix.rows() >= 1 && inst.matrix.rows() <= CORPUS_MAX_DIM);
            let chi = inst.matrix.char_poly().unwrap();
            let product = inst
                .blocks
                .iter()
                .map(|s| Poly::parse(inst.field, s).unwrap())
                .fold(Poly::one(inst.field), |acc, p| &acc * &p);
            assert_eq!(chi, product);
            assert!(elementary_divisors(&inst.matrix, &FactorOptions::default()).is_ok());
        }
    }

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 7, 11]);
    }
}
