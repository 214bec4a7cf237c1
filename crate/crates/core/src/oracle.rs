//! Brute-force ground truth: the invariance equations as a linear system, a
//! search for a non-degenerate solution, and exhaustive conjugator search.
//!
//! Nothing here looks at elementary divisors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{Field, Scalar};
use crate::certificate::{Setting, Symmetry};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const DEFAULT_TRIALS: usize = 64;
pub const DEFAULT_ORACLE_SEED: u64 = 0x0dd5eed;
/// Largest group enumerated by [`brute_force_reality`].
pub const MAX_GROUP_ORDER: u128 = 10_000;

/// All Gram matrices of the requested symmetry satisfying the invariance
/// equations, as a canonical echelon basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantFormSpace {
    pub basis: Vec<Matrix>,
    pub dimension: usize,
    pub symmetry: Symmetry,
    pub setting: Setting,
}

/// Coordinates `(i, j)`, `i ≤ j` (symmetric) or `i < j` (skew).
fn coordinates(n: usize, symmetry: Symmetry) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            if i == j && symmetry == Symmetry::Skew {
                continue;
            }
            out.push((i, j));
        }
    }
    out
}

fn unit_gram(field: Field, n: usize, (i, j): (usize, usize), symmetry: Symmetry) -> Matrix {
    let mut g = Matrix::zeros(field, n, n);
    g.set(i, j, field.one());
    if i != j {
        g.set(j, i, field.from_i64(symmetry.sign()));
    }
    g
}

fn residual(m: &Matrix, mt: &Matrix, g: &Matrix, setting: Setting) -> Matrix {
    match setting {
        Setting::Invariant => &(&(mt * g) * m) - g,
        Setting::Infinitesimal => &(mt * g) + &(g * m),
    }
}

pub fn solve_form_space(m: &Matrix, symmetry: Symmetry, setting: Setting) -> Result<InvariantFormSpace> {
    let n = m.require_square()?;
    let field = m.field();
    if setting == Setting::Invariant && m.det()?.is_zero() {
        return Err(Error::Singular);
    }
    let coords = coordinates(n, symmetry);
    let units: Vec<Matrix> = coords.iter().map(|&c| unit_gram(field, n, c, symmetry)).collect();
    let mt = m.transpose();
    // One column per coordinate: the flattened residual of its unit Gram.
    let columns: Vec<Vec<Scalar>> = units
        .iter()
        .map(|u| residual(m, &mt, u, setting).to_rows().concat())
        .collect();
    let system = Matrix::from_columns(field, n * n, &columns);
    let basis: Vec<Matrix> = system
        .kernel()
        .into_iter()
        .map(|c| combine(field, n, &units, &c))
        .collect();
    Ok(InvariantFormSpace {
        dimension: basis.len(),
        basis,
        symmetry,
        setting,
    })
}

fn combine(field: Field, n: usize, basis: &[Matrix], coeffs: &[Scalar]) -> Matrix {
    let mut acc = Matrix::zeros(field, n, n);
    for (b, c) in basis.iter().zip(coeffs) {
        if !c.is_zero() {
            acc = &acc + &b.scale(c);
        }
    }
    acc
}

fn nondegenerate(m: &Matrix) -> bool {
    m.det().is_ok_and(|d| !d.is_zero())
}

/// Searches `Σ cᵢBᵢ` with non-zero determinant: every tuple over
/// `{0, 1, −1, 2}` first when the dimension is at most 4, then `trials`
/// seeded random tuples.
pub fn find_nondegenerate(space: &InvariantFormSpace, seed: u64, trials: usize) -> Option<Matrix> {
    let first = space.basis.first()?;
    let field = first.field();
    let n = first.rows();
    let dim = space.dimension;
    if dim <= 4 {
        let palette = [0i64, 1, -1, 2].map(|v| field.from_i64(v));
        let total = 4usize.pow(dim as u32);
        for index in 1..total {
            let coeffs: Vec<Scalar> = (0..dim)
                .map(|i| palette[(index / 4usize.pow((dim - 1 - i) as u32)) % 4].clone())
                .collect();
            let g = combine(field, n, &space.basis, &coeffs);
            if nondegenerate(&g) {
                return Some(g);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let coeffs: Vec<Scalar> = (0..dim)
            .map(|_| match field {
                Field::Rationals => field.from_i64(rng.gen_range(-50..=50)),
                Field::Prime(p) => Scalar::residue(rng.gen_range(0..p), p),
            })
            .collect();
        let g = combine(field, n, &space.basis, &coeffs);
        if nondegenerate(&g) {
            return Some(g);
        }
    }
    None
}

/// Oracle verdict: does a non-degenerate form of this kind exist?
pub fn oracle_exists(m: &Matrix, symmetry: Symmetry, setting: Setting, seed: u64, trials: usize) -> Result<Option<Matrix>> {
    let space = solve_form_space(m, symmetry, setting)?;
    Ok(find_nondegenerate(&space, seed, trials))
}

/// `|GL(n, p)|`, saturating.
pub fn general_linear_order(n: usize, p: u64) -> u128 {
    let pn = (p as u128).saturating_pow(n as u32);
    (0..n as u32).fold(1u128, |acc, i| acc.saturating_mul(pn - (p as u128).pow(i)))
}

/// Exhaustive search for `g` with `gTg⁻¹ = T⁻¹`.
pub fn brute_force_reality(t: &Matrix) -> Result<bool> {
    let n = t.require_square()?;
    let field = t.field();
    let Field::Prime(p) = field else {
        return Err(Error::RationalsUnsupported);
    };
    let order = general_linear_order(n, p);
    if order > MAX_GROUP_ORDER {
        return Err(Error::GroupTooLarge(order));
    }
    let inv = t.inverse()?;
    let cells = n * n;
    let total = (p as u128).pow(cells as u32);
    for index in 0..total {
        let mut rest = index;
        let mut g = Matrix::zeros(field, n, n);
        for cell in 0..cells {
            g.set(cell / n, cell % n, Scalar::residue((rest % p as u128) as u64, p));
            rest /= p as u128;
        }
        // gT = T⁻¹g avoids inverting every candidate.
        if &g * t == &inv * &g && nondegenerate(&g) {
            return Ok(true);
        }
    }
    Ok(false)
}
