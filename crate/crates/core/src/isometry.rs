//! Unipotent (or negative-unipotent) isometries of a non-degenerate form:
//! orthogonal splitting into indecomposable pieces and standard pairs, Witt
//! index over F_p, and the level bounds.

use serde::Serialize;

use crate::arith::{Field, Scalar};
use crate::certificate::{verify_form, FormCertificate, Setting, Symmetry};
use crate::error::{Error, Result};
use crate::linalg::{column_space, Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SummandKind {
    OddIndecomposable,
    EvenIndecomposable,
    StandardPair,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrthogonalSummand {
    pub basis: Matrix,
    pub kind: SummandKind,
    pub block_size: usize,
    /// Two totally isotropic invariant halves, for standard pairs.
    pub halves: Option<(Matrix, Matrix)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrthogonalSummandReport {
    pub eigenvalue: i64,
    pub summands: Vec<OrthogonalSummand>,
}

/// Result of re-checking a report against `(T, B)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrthogonalChecks {
    pub spans: bool,
    pub orthogonal: bool,
    pub invariant: bool,
    pub nondegenerate: bool,
    pub kinds: bool,
    pub halves_isotropic: bool,
}

impl OrthogonalChecks {
    pub fn all(&self) -> bool {
        self.spans && self.orthogonal && self.invariant && self.nondegenerate && self.kinds && self.halves_isotropic
    }
}

fn gram_between(b: &Matrix, u: &Matrix, v: &Matrix) -> Matrix {
    &(&u.transpose() * b) * v
}

impl OrthogonalSummandReport {
    pub fn check(&self, t: &Matrix, b: &Matrix, symmetry: Symmetry) -> OrthogonalChecks {
        let n = t.rows();
        let field = t.field();
        let all = self
            .summands
            .iter()
            .fold(Matrix::zeros(field, n, 0), |acc, s| acc.hstack(&s.basis));
        let spans = all.cols() == n && all.rank() == n;
        let mut orthogonal = true;
        for (i, s) in self.summands.iter().enumerate() {
            for r in &self.summands[i + 1..] {
                orthogonal &= gram_between(b, &s.basis, &r.basis).is_zero();
            }
        }
        let invariant = self
            .summands
            .iter()
            .all(|s| column_space(&s.basis.hstack(&(t * &s.basis))).cols() == s.basis.cols());
        let nondegenerate = self
            .summands
            .iter()
            .all(|s| gram_between(b, &s.basis, &s.basis).det().is_ok_and(|d| !d.is_zero()));
        let kinds = self.summands.iter().all(|s| match (symmetry, s.kind) {
            (_, SummandKind::StandardPair) => s.halves.is_some() && s.basis.cols() == 2 * s.block_size,
            (Symmetry::Symmetric, SummandKind::OddIndecomposable) => s.block_size % 2 == 1,
            (Symmetry::Skew, SummandKind::EvenIndecomposable) => s.block_size % 2 == 0,
            _ => false,
        });
        let halves_isotropic = self.summands.iter().all(|s| match &s.halves {
            None => true,
            Some((h1, h2)) => {
                h1.cols() == h2.cols()
                    && gram_between(b, h1, h1).is_zero()
                    && gram_between(b, h2, h2).is_zero()
                    && column_space(&h1.hstack(&(t * h1))).cols() == h1.cols()
                    && column_space(&h2.hstack(&(t * h2))).cols() == h2.cols()
            }
        });
        OrthogonalChecks {
            spans,
            orthogonal,
            invariant,
            nondegenerate,
            kinds,
            halves_isotropic,
        }
    }
}

fn dot(u: &[Scalar], v: &[Scalar]) -> Scalar {
    let field = u.first().map(Scalar::field).unwrap_or(Field::Rationals);
    u.iter().zip(v).fold(field.zero(), |acc, (a, b)| &acc + &(a * b))
}

fn form(b: &Matrix, u: &[Scalar], v: &[Scalar]) -> Scalar {
    dot(u, &b.mul_vec(v))
}

fn add_scaled(u: &[Scalar], c: &Scalar, v: &[Scalar]) -> Vector {
    u.iter().zip(v).map(|(a, b)| a + &(c * b)).collect()
}

/// `±1` such that `T ∓ I` is nilpotent.
fn unipotent_sign(t: &Matrix) -> Result<i64> {
    let n = t.rows();
    let id = Matrix::identity(t.field(), n);
    if (t - &id).pow(n as u32).is_zero() {
        Ok(1)
    } else if t.field().characteristic() != 2 && (t + &id).pow(n as u32).is_zero() {
        Ok(-1)
    } else {
        Err(Error::NotUnipotentType("minimal polynomial is not a power of x - 1 or x + 1".into()))
    }
}

fn require_verified(t: &Matrix, cert: &FormCertificate) -> Result<()> {
    if cert.setting() != Setting::Invariant {
        return Err(Error::UnverifiedForm("certificate is for the infinitesimal setting".into()));
    }
    let checks = verify_form(t, cert.gram(), cert.symmetry(), Setting::Invariant)?;
    if !checks.all() {
        return Err(Error::UnverifiedForm(format!("{checks:?}")));
    }
    Ok(())
}

fn orbit(nil: &Matrix, v: &[Scalar], k: usize) -> Matrix {
    let mut cols = Vec::with_capacity(k);
    let mut cur = v.to_vec();
    for _ in 0..k {
        let next = nil.mul_vec(&cur);
        cols.push(cur);
        cur = next;
    }
    Matrix::from_columns(nil.field(), nil.rows(), &cols)
}

/// Repeatedly splits off a maximal-level piece. With `N = ±T − I`, level `k`
/// and `β(u, v) = B(N^{k−1}u, v)`: if `β` is symmetric a vector with
/// `β(u, u) ≠ 0` spans a non-degenerate cyclic piece; otherwise `β` is
/// alternating and a pair with `β(u, u') ≠ 0` spans a standard pair, whose
/// halves are made isotropic one degree at a time.
pub fn orthogonal_decomposition(t: &Matrix, cert: &FormCertificate) -> Result<OrthogonalSummandReport> {
    let n = t.require_square()?;
    require_verified(t, cert)?;
    let field = t.field();
    if field.characteristic() == 2 {
        return Err(Error::SmallCharacteristic {
            characteristic: 2,
            dimension: n,
        });
    }
    let lambda = unipotent_sign(t)?;
    let b = cert.gram();
    let nil = &t.scale(&field.from_i64(lambda)) - &Matrix::identity(field, n);
    let mut space = Matrix::identity(field, n);
    let mut summands = Vec::new();
    while space.cols() > 0 {
        let mut k = 1;
        while !(&nil.pow(k as u32) * &space).is_zero() {
            k += 1;
        }
        let top = nil.pow(k as u32 - 1);
        let beta = |u: &[Scalar], v: &[Scalar]| form(b, &top.mul_vec(u), v);
        let vectors = space.columns();
        let mut anisotropic = vectors.iter().find(|u| !beta(u, u).is_zero()).cloned();
        if anisotropic.is_none() {
            'pairs: for (i, u) in vectors.iter().enumerate() {
                for v in &vectors[i + 1..] {
                    let w = add_scaled(u, &field.one(), v);
                    if !beta(&w, &w).is_zero() {
                        anisotropic = Some(w);
                        break 'pairs;
                    }
                }
            }
        }
        let piece = if let Some(u) = anisotropic {
            let kind = if k % 2 == 1 {
                SummandKind::OddIndecomposable
            } else {
                SummandKind::EvenIndecomposable
            };
            OrthogonalSummand {
                basis: orbit(&nil, &u, k),
                kind,
                block_size: k,
                halves: None,
            }
        } else {
            let (u, v) = vectors
                .iter()
                .enumerate()
                .find_map(|(i, u)| vectors[i + 1..].iter().find(|v| !beta(u, v).is_zero()).map(|v| (u.clone(), v.clone())))
                .ok_or_else(|| Error::Internal("form vanishes on the top layer".into()))?;
            let w1 = isotropic_generator(b, &nil, k, &u, &v);
            let w2 = isotropic_generator(b, &nil, k, &v, &w1);
            let h1 = orbit(&nil, &w1, k);
            let h2 = orbit(&nil, &w2, k);
            OrthogonalSummand {
                basis: h1.hstack(&h2),
                kind: SummandKind::StandardPair,
                block_size: k,
                halves: Some((h1, h2)),
            }
        };
        // B-orthogonal complement of the piece inside the current space.
        let pairing = gram_between(b, &piece.basis, &space);
        let complement: Vec<Vector> = pairing.kernel();
        space = if complement.is_empty() {
            Matrix::zeros(field, n, 0)
        } else {
            &space * &Matrix::from_columns(field, space.cols(), &complement)
        };
        summands.push(piece);
    }
    Ok(OrthogonalSummandReport {
        eigenvalue: lambda,
        summands,
    })
}

/// Adjusts `w` by multiples of `N^{k−1−a} partner` so that
/// `B(N^a w, w) = 0` for every `a`; the cyclic span of the result is then
/// totally isotropic.
fn isotropic_generator(b: &Matrix, nil: &Matrix, k: usize, start: &[Scalar], partner: &[Scalar]) -> Vector {
    let mut w = start.to_vec();
    let top = nil.pow(k as u32 - 1);
    let pairing = form(b, &top.mul_vec(&w), partner);
    for a in (0..k.saturating_sub(1)).rev() {
        let phi = form(b, &nil.pow(a as u32).mul_vec(&w), &w);
        if phi.is_zero() {
            continue;
        }
        // For even k−1−a the parity of the form already forces phi = 0.
        if (k - 1 - a).is_multiple_of(2) {
            continue;
        }
        let slope = -&(&pairing + &pairing);
        let shift = nil.pow((k - 1 - a) as u32).mul_vec(partner);
        let c = -&(phi.checked_div(&slope).expect("pairing is non-zero"));
        w = add_scaled(&w, &c, &shift);
    }
    w
}

/// Diagonal entries of a congruent diagonal form (characteristic ≠ 2).
fn diagonalize(b: &Matrix) -> Vec<Scalar> {
    let n = b.rows();
    let mut m = b.clone();
    let mut out = Vec::with_capacity(n);
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        let pivot = active.iter().copied().find(|&i| !m.get(i, i).is_zero());
        let p = match pivot {
            Some(p) => p,
            None => {
                let pair = active
                    .iter()
                    .flat_map(|&i| active.iter().map(move |&j| (i, j)))
                    .find(|&(i, j)| i != j && !m.get(i, j).is_zero());
                match pair {
                    // e_i += e_j makes the (i, i) entry 2·B(e_i, e_j).
                    Some((i, j)) => {
                        add_congruence(&mut m, i, j, &b.field().one());
                        i
                    }
                    None => {
                        // Remaining block is zero.
                        out.extend(active.iter().map(|_| b.field().zero()));
                        break;
                    }
                }
            }
        };
        let d = m.get(p, p).clone();
        let dinv = d.inv().expect("pivot is non-zero");
        for &j in &active {
            if j != p && !m.get(p, j).is_zero() {
                let c = -&(m.get(p, j) * &dinv);
                add_congruence(&mut m, j, p, &c);
            }
        }
        out.push(d);
        active.retain(|&i| i != p);
    }
    out
}

/// Basis change `e_i ← e_i + c·e_j` applied on both sides.
fn add_congruence(m: &mut Matrix, i: usize, j: usize, c: &Scalar) {
    let n = m.rows();
    for r in 0..n {
        let v = m.get(r, i) + &(c * m.get(r, j));
        m.set(r, i, v);
    }
    for col in 0..n {
        let v = m.get(i, col) + &(c * m.get(j, col));
        m.set(i, col, v);
    }
}

fn is_square(x: &Scalar) -> bool {
    x.is_square().unwrap_or(false)
}

/// Scans `x` for `ax² + by² + c = 0`.
fn isotropic_in_three(a: &Scalar, b: &Scalar, c: &Scalar) -> bool {
    let Some(p) = a.field().modulus() else {
        return false;
    };
    let binv = b.inv().expect("diagonal entries are non-zero");
    (0..p).any(|x| {
        let x = a.field().from_i64(x as i64);
        let y2 = -&(&(&(a * &x) * &x + c.clone()) * &binv);
        is_square(&y2)
    })
}

/// Witt index of a diagonal form over F_p by peeling off hyperbolic planes.
fn witt_of_diagonal(mut d: Vec<Scalar>) -> usize {
    let mut l = 0;
    loop {
        match d.len() {
            0 | 1 => return l,
            2 => return l + usize::from(is_square(&-&(&d[0] * &d[1]))),
            _ => {}
        }
        // A coordinate plane with −d_i d_j square is hyperbolic.
        let plane = (0..d.len())
            .flat_map(|i| (i + 1..d.len()).map(move |j| (i, j)))
            .find(|&(i, j)| is_square(&-&(&d[i] * &d[j])));
        if let Some((i, j)) = plane {
            d.remove(j);
            d.remove(i);
            l += 1;
            continue;
        }
        // <a, b, c> has an isotropic v = (x, y, 1). H = span(v, e₂) is a
        // hyperbolic plane and its complement in the three coordinates is
        // spanned by (by, −ax, 0), of length ab(ax² + by²) = −abc.
        let (a, b, c) = (d[0].clone(), d[1].clone(), d[2].clone());
        debug_assert!(isotropic_in_three(&a, &b, &c));
        d.drain(0..3);
        d.insert(0, -&(&(&a * &b) * &c));
        l += 1;
    }
}

/// Largest totally isotropic subspace of a non-degenerate form over F_p.
pub fn witt_index(b: &Matrix) -> Result<usize> {
    let n = b.require_square()?;
    let field = b.field();
    if field.is_rationals() {
        return Err(Error::RationalsUnsupported);
    }
    if field.characteristic() == 2 {
        return Err(Error::SmallCharacteristic {
            characteristic: 2,
            dimension: n,
        });
    }
    if b.det()?.is_zero() {
        return Err(Error::Degenerate);
    }
    let bt = b.transpose();
    if bt == *b {
        Ok(witt_of_diagonal(diagonalize(b)))
    } else if (&bt + b).is_zero() {
        Ok(n / 2)
    } else {
        Err(Error::UnverifiedForm("form is neither symmetric nor skew".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BoundCase {
    WithinWitt,
    EvenDim2l,
    GeneralOdd,
    SymplecticEven,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub witt_index: usize,
    pub dim: usize,
    pub bound_case: BoundCase,
    pub bound_satisfied: bool,
}

/// Least `k` with `(T − I)^k = 0`.
pub fn level(t: &Matrix) -> Result<usize> {
    let n = t.require_square()?;
    let nil = t - &Matrix::identity(t.field(), n);
    let mut power = Matrix::identity(t.field(), n);
    for k in 0..=n {
        if power.is_zero() {
            return Ok(k);
        }
        power = &power * &nil;
    }
    Err(Error::NotUnipotent)
}

pub fn level_analysis(t: &Matrix, cert: &FormCertificate) -> Result<LevelReport> {
    let n = t.require_square()?;
    require_verified(t, cert)?;
    let k = level(t)?;
    let l = witt_index(cert.gram())?;
    let (bound_case, bound_satisfied) = if k <= l {
        (BoundCase::WithinWitt, true)
    } else {
        match cert.symmetry() {
            Symmetry::Symmetric if n == 2 * l => (BoundCase::EvenDim2l, k % 2 == 1 && k < 2 * l),
            Symmetry::Symmetric => (BoundCase::GeneralOdd, k % 2 == 1 && k <= 2 * l + 1),
            Symmetry::Skew => (BoundCase::SymplecticEven, k % 2 == 0 && k <= 2 * l),
        }
    };
    Ok(LevelReport {
        level: k,
        witt_index: l,
        dim: n,
        bound_case,
        bound_satisfied,
    })
}
