//! Invariant factors, elementary divisors, the `V₁ + V₋₁ + V_o` splitting,
//! cyclic (indecomposable) summands with explicit bases, and the
//! Jordan–Chevalley decomposition.

use std::cmp::Ordering;

use serde::Serialize;

use crate::arith::Scalar;
use crate::error::{Error, Result};
use crate::factor::{factor_with, multiplicity, FactorOptions};
use crate::linalg::{column_space, in_span, restrict, Matrix, Vector};
use crate::poly::{poly_gcd, Poly};

/// `p(x)^k` occurring `multiplicity` times among the cyclic summands.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ElementaryDivisor {
    pub p: Poly,
    pub k: u32,
    pub multiplicity: u32,
}

impl ElementaryDivisor {
    /// `p^k` as a polynomial.
    pub fn power(&self) -> Poly {
        self.p.pow(self.k)
    }

    /// Dimension of one summand.
    pub fn block_dim(&self) -> usize {
        self.p.deg() * self.k as usize
    }

    /// Same `(p, k)`, ignoring multiplicity.
    pub fn same_power(&self, other: &ElementaryDivisor) -> bool {
        self.k == other.k && self.p == other.p
    }

    pub fn canonical_cmp(&self, other: &ElementaryDivisor) -> Ordering {
        self.p
            .canonical_cmp(&other.p)
            .then(self.k.cmp(&other.k))
            .then(self.multiplicity.cmp(&other.multiplicity))
    }
}

impl std::fmt::Display for ElementaryDivisor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})^{} x{}", self.p, self.k, self.multiplicity)
    }
}

/// Monic invariant factors `d₁ | d₂ | … | d_n` of `xI − T`, via a Smith
/// normal form over `F[x]` pivoting on lowest-degree entries.
pub fn smith_normal_form_xi_minus_t(t: &Matrix) -> Result<Vec<Poly>> {
    let n = t.require_square()?;
    let field = t.field();
    let x = Poly::x(field);
    let mut a: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = Poly::constant(-t.get(i, j));
                    if i == j {
                        &x + &c
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect();
    for s in 0..n {
        loop {
            // Lowest-degree nonzero entry of the trailing block.
            let mut best: Option<(usize, usize, usize)> = None;
            for (i, row) in a.iter().enumerate().skip(s) {
                for (j, e) in row.iter().enumerate().skip(s) {
                    if let Some(d) = e.degree() {
                        if best.is_none_or(|(_, _, bd)| d < bd) {
                            best = Some((i, j, d));
                        }
                    }
                }
            }
            let Some((pi, pj, _)) = best else {
                return Err(Error::Internal("xI - T has deficient rank".into()));
            };
            a.swap(s, pi);
            for row in a.iter_mut() {
                row.swap(s, pj);
            }
            let pivot = a[s][s].clone();
            let mut clean = true;
            let top = a[s].clone();
            for row in a.iter_mut().skip(s + 1) {
                if row[s].is_zero() {
                    continue;
                }
                let (q, r) = row[s].div_rem(&pivot);
                for (entry, t) in row.iter_mut().zip(&top).skip(s) {
                    *entry = &*entry - &(&q * t);
                }
                clean &= r.is_zero();
            }
            for j in s + 1..n {
                if a[s][j].is_zero() {
                    continue;
                }
                let (q, r) = a[s][j].div_rem(&pivot);
                for row in a.iter_mut().skip(s) {
                    row[j] = &row[j] - &(&q * &row[s]);
                }
                clean &= r.is_zero();
            }
            if !clean {
                continue;
            }
            let bad_row = (s + 1..n).find(|&i| (s + 1..n).any(|j| !pivot.divides(&a[i][j])));
            match bad_row {
                Some(i) => {
                    let donor = a[i].clone();
                    for (entry, d) in a[s].iter_mut().zip(&donor).skip(s) {
                        *entry = &*entry + d;
                    }
                }
                None => break,
            }
        }
    }
    Ok((0..n).map(|i| a[i][i].monic()).collect())
}

/// Largest invariant factor of `xI − T`.
pub fn min_poly(t: &Matrix) -> Result<Poly> {
    let factors = smith_normal_form_xi_minus_t(t)?;
    Ok(factors.last().cloned().unwrap_or_else(|| Poly::one(t.field())))
}

pub fn char_poly(t: &Matrix) -> Result<Poly> {
    t.char_poly()
}

/// Complete multiset of elementary divisors in canonical order.
pub fn elementary_divisors(t: &Matrix, opts: &FactorOptions) -> Result<Vec<ElementaryDivisor>> {
    let invariant = smith_normal_form_xi_minus_t(t)?;
    let Some(top) = invariant.last() else {
        return Ok(Vec::new());
    };
    let primes = factor_with(top, opts)?;
    let mut out: Vec<ElementaryDivisor> = Vec::new();
    for (p, _) in &primes.factors {
        for d in &invariant {
            let k = multiplicity(p, d);
            if k == 0 {
                continue;
            }
            match out.iter_mut().find(|e| e.p == *p && e.k == k) {
                Some(e) => e.multiplicity += 1,
                None => out.push(ElementaryDivisor {
                    p: p.clone(),
                    k,
                    multiplicity: 1,
                }),
            }
        }
    }
    out.sort_by(ElementaryDivisor::canonical_cmp);
    Ok(out)
}

/// `V = V₁ + V₋₁ + V_o` for invertible `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimaryDecomposition {
    /// Exponent of `x − 1` in `χ_T`.
    pub e: usize,
    /// Exponent of `x + 1` in `χ_T`.
    pub f: usize,
    /// Reduced characteristic polynomial.
    pub chi_o: Poly,
    pub basis_plus: Matrix,
    pub basis_minus: Matrix,
    pub basis_o: Matrix,
    /// `T` restricted to `V_o`, in `basis_o` coordinates.
    pub t_o: Matrix,
}

pub fn primary_decomposition(t: &Matrix) -> Result<PrimaryDecomposition> {
    let n = t.require_square()?;
    let field = t.field();
    if t.det()?.is_zero() {
        return Err(Error::Singular);
    }
    let id = Matrix::identity(field, n);
    let plus_op = (t - &id).pow(n as u32);
    let kernel_matrix = |m: &Matrix| Matrix::from_columns(field, n, &m.kernel());
    let basis_plus = kernel_matrix(&plus_op);
    let (basis_minus, minus_op) = if field.characteristic() == 2 {
        (Matrix::zeros(field, n, 0), id.clone())
    } else {
        let op = (t + &id).pow(n as u32);
        (kernel_matrix(&op), op)
    };
    let basis_o = column_space(&(&plus_op * &minus_op));
    let e = basis_plus.cols();
    let f = basis_minus.cols();
    let chi = t.char_poly()?;
    let one = field.one();
    let removed = &Poly::linear(&one).pow(e as u32) * &Poly::linear(&-&one).pow(f as u32);
    let chi_o = chi
        .exact_div(&removed)
        .ok_or_else(|| Error::Internal("eigenvalue multiplicities disagree with the characteristic polynomial".into()))?;
    let t_o = if basis_o.cols() == 0 {
        Matrix::zeros(field, 0, 0)
    } else {
        restrict(t, &basis_o)?
    };
    Ok(PrimaryDecomposition {
        e,
        f,
        chi_o,
        basis_plus,
        basis_minus,
        basis_o,
        t_o,
    })
}

/// One cyclic summand `F[x]/(p^k)` with an explicit basis.
///
/// Basis convention: for linear `p = x − c` the chain `v, (T−c)v, …`; for
/// other `p` the power basis `v, Tv, T²v, …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndecomposableSummand {
    pub divisor: ElementaryDivisor,
    pub copy_index: usize,
    /// `n × dim` matrix whose columns span the summand.
    pub basis: Matrix,
    pub cyclic_vector: Vector,
    /// `T` restricted to the summand, in `basis` coordinates.
    pub restricted: Matrix,
}

impl IndecomposableSummand {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }
}

fn summand_basis(t: &Matrix, p: &Poly, k: u32, v: &[Scalar]) -> Matrix {
    let field = t.field();
    let n = t.rows();
    let dim = p.deg() * k as usize;
    let step = if p.deg() == 1 {
        // T − c where p = x − c.
        t + &Matrix::scalar(&p.coeff(0), n)
    } else {
        t.clone()
    };
    let mut cols = Vec::with_capacity(dim);
    let mut cur = v.to_vec();
    for _ in 0..dim {
        let next = step.mul_vec(&cur);
        cols.push(cur);
        cur = next;
    }
    Matrix::from_columns(field, n, &cols)
}

/// One summand per elementary-divisor copy; the bases together form an
/// invertible matrix (checked).
pub fn indecomposable_decomposition(t: &Matrix, opts: &FactorOptions) -> Result<Vec<IndecomposableSummand>> {
    let n = t.require_square()?;
    let field = t.field();
    let divisors = elementary_divisors(t, opts)?;
    let mut out: Vec<IndecomposableSummand> = Vec::new();
    let mut primes: Vec<&Poly> = Vec::new();
    for d in &divisors {
        if !primes.contains(&&d.p) {
            primes.push(&d.p);
        }
    }
    for p in primes {
        let kmax = divisors.iter().filter(|d| d.p == *p).map(|d| d.k).max().unwrap_or(0);
        let nop = t.eval_poly(p);
        let mut kernels: Vec<Matrix> = Vec::with_capacity(kmax as usize + 2);
        for j in 0..=kmax + 1 {
            kernels.push(Matrix::from_columns(field, n, &nop.pow(j).kernel()));
        }
        for k in (1..=kmax).rev() {
            let Some(div) = divisors.iter().find(|d| d.p == *p && d.k == k) else {
                continue;
            };
            let mut span = column_space(&kernels[k as usize - 1].hstack(&(&nop * &kernels[k as usize + 1])));
            let mut gens: Vec<Vector> = Vec::new();
            for w in kernels[k as usize].columns() {
                if gens.len() == div.multiplicity as usize {
                    break;
                }
                if in_span(&span, &w) {
                    continue;
                }
                let mut orbit = vec![w.clone()];
                for _ in 1..p.deg() {
                    let next = t.mul_vec(orbit.last().unwrap());
                    orbit.push(next);
                }
                span = column_space(&span.hstack(&Matrix::from_columns(field, n, &orbit)));
                gens.push(w);
            }
            if gens.len() != div.multiplicity as usize {
                return Err(Error::Internal(format!("found {} generators for {div}", gens.len())));
            }
            for (copy_index, g) in gens.into_iter().enumerate() {
                let basis = summand_basis(t, p, k, &g);
                let restricted = restrict(t, &basis)?;
                out.push(IndecomposableSummand {
                    divisor: div.clone(),
                    copy_index,
                    basis,
                    cyclic_vector: g,
                    restricted,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        a.divisor
            .canonical_cmp(&b.divisor)
            .then(a.copy_index.cmp(&b.copy_index))
    });
    let all = out
        .iter()
        .fold(Matrix::zeros(field, n, 0), |acc, s| acc.hstack(&s.basis));
    if all.cols() != n || all.rank() != n {
        return Err(Error::Internal("summands do not form a direct sum decomposition".into()));
    }
    Ok(out)
}

/// Change of basis whose columns are all summand bases in order.
pub fn assembled_basis(summands: &[IndecomposableSummand], n: usize) -> Option<Matrix> {
    let field = summands.first()?.basis.field();
    Some(
        summands
            .iter()
            .fold(Matrix::zeros(field, n, 0), |acc, s| acc.hstack(&s.basis)),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum JordanMode {
    /// `T = T_s T_u` with `T_u` unipotent.
    Multiplicative,
    /// `S = S_s + S_n` with `S_n` nilpotent.
    Additive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JordanChevalley {
    pub semisimple: Matrix,
    pub unipotent_or_nilpotent: Matrix,
    pub mode: JordanMode,
}

/// Semisimple part by Newton iteration on the squarefree part of the
/// minimal polynomial.
pub fn jordan_chevalley(t: &Matrix, mode: JordanMode) -> Result<JordanChevalley> {
    let n = t.require_square()?;
    let field = t.field();
    field.require_large(n)?;
    if mode == JordanMode::Multiplicative && t.det()?.is_zero() {
        return Err(Error::Singular);
    }
    let m = min_poly(t)?;
    let dm = m.derivative();
    let radical = m.exact_div(&poly_gcd(&m, &dm)?).expect("gcd divides");
    let dr = radical.derivative();
    let mut s = t.clone();
    for _ in 0..=n {
        let value = s.eval_poly(&radical);
        if value.is_zero() {
            break;
        }
        let slope = s.eval_poly(&dr).inverse()?;
        s = &s - &(&value * &slope);
    }
    if !s.eval_poly(&radical).is_zero() {
        return Err(Error::Internal("Newton iteration did not converge".into()));
    }
    let other = match mode {
        JordanMode::Multiplicative => &s.inverse()? * t,
        JordanMode::Additive => t - &s,
    };
    Ok(JordanChevalley {
        semisimple: s,
        unipotent_or_nilpotent: other,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Field;

    fn opts() -> FactorOptions {
        FactorOptions::default()
    }

    fn qpoly(s: &str) -> Poly {
        Poly::parse(Field::Rationals, s).unwrap()
    }

    #[test]
    fn smith_examples() {
        let q = Field::Rationals;
        let j = Matrix::from_i64(q, &[&[1, 1], &[0, 1]]);
        assert_eq!(smith_normal_form_xi_minus_t(&j).unwrap(), vec![qpoly("1"), qpoly("x^2 - 2*x + 1")]);
        let i2 = Matrix::identity(q, 2);
        assert_eq!(smith_normal_form_xi_minus_t(&i2).unwrap(), vec![qpoly("x - 1"), qpoly("x - 1")]);
        let f7 = Field::Prime(7);
        let d = Matrix::from_i64(f7, &[&[2, 0], &[0, 3]]);
        let expected = Poly::parse(f7, "x^2 - 5*x + 6").unwrap();
        assert_eq!(smith_normal_form_xi_minus_t(&d).unwrap(), vec![Poly::one(f7), expected]);
    }

    #[test]
    fn min_poly_examples() {
        let q = Field::Rationals;
        assert_eq!(min_poly(&Matrix::identity(q, 3)).unwrap(), qpoly("x - 1"));
        let c = Matrix::companion(&qpoly("x^2 - 3*x + 1"));
        assert_eq!(min_poly(&c).unwrap(), qpoly("x^2 - 3*x + 1"));
        let j = Matrix::from_i64(q, &[&[1, 1], &[0, 1]]);
        assert_eq!(min_poly(&j).unwrap(), qpoly("x^2 - 2*x + 1"));
    }

    #[test]
    fn elementary_divisor_examples() {
        let q = Field::Rationals;
        let e = elementary_divisors(&Matrix::identity(q, 3), &opts()).unwrap();
        assert_eq!(e, vec![ElementaryDivisor { p: qpoly("x - 1"), k: 1, multiplicity: 3 }]);
        let j = Matrix::from_i64(q, &[&[1, 1], &[0, 1]]);
        let e = elementary_divisors(&j, &opts()).unwrap();
        assert_eq!(e, vec![ElementaryDivisor { p: qpoly("x - 1"), k: 2, multiplicity: 1 }]);
        let c = Matrix::companion(&qpoly("x^2 - 3*x + 1"));
        let cc = Matrix::block_diag(q, &[c.clone(), c]);
        let e = elementary_divisors(&cc, &opts()).unwrap();
        assert_eq!(e, vec![ElementaryDivisor { p: qpoly("x^2 - 3*x + 1"), k: 1, multiplicity: 2 }]);
    }

    #[test]
    fn primary_decomposition_examples() {
        let q = Field::Rationals;
        let t = Matrix::diag(q, &[q.from_i64(1), q.from_i64(-1), q.from_i64(2), q.parse("1/2").unwrap()]);
        let pd = primary_decomposition(&t).unwrap();
        assert_eq!((pd.e, pd.f), (1, 1));
        assert_eq!(pd.chi_o, qpoly("x^2 - 5/2*x + 1"));
        assert_eq!(pd.basis_o.cols(), 2);

        let u = Matrix::from_i64(q, &[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        let pd = primary_decomposition(&u).unwrap();
        assert_eq!((pd.e, pd.f, pd.basis_o.cols()), (3, 0, 0));
        assert!(pd.chi_o.is_one());

        let c = Matrix::companion(&qpoly("x^2 - 3*x + 1"));
        let pd = primary_decomposition(&c).unwrap();
        assert_eq!((pd.e, pd.f, pd.basis_o.cols()), (0, 0, 2));

        let s = Matrix::from_i64(q, &[&[1, 0], &[0, 0]]);
        assert_eq!(primary_decomposition(&s), Err(Error::Singular));
    }

    #[test]
    fn indecomposable_examples() {
        let q = Field::Rationals;
        let j = Matrix::from_i64(q, &[&[1, 1], &[0, 1]]);
        let s = indecomposable_decomposition(&j, &opts()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].dim(), 2);

        let d = Matrix::diag(q, &[q.from_i64(2), q.from_i64(3)]);
        let s = indecomposable_decomposition(&d, &opts()).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|x| x.dim() == 1));

        let jj = Matrix::block_diag(q, &[j.clone(), j]);
        let s = indecomposable_decomposition(&jj, &opts()).unwrap();
        assert_eq!(s.len(), 2);
        for x in &s {
            assert_eq!(x.divisor.k, 2);
            assert_eq!(x.divisor.p, qpoly("x - 1"));
            // Chain basis: T acts as 1 + lower shift.
            assert_eq!(x.restricted, Matrix::from_i64(q, &[&[1, 0], &[1, 1]]));
        }
    }

    #[test]
    fn jordan_chevalley_examples() {
        let q = Field::Rationals;
        let t = Matrix::from_i64(q, &[&[2, 1], &[0, 2]]);
        let jc = jordan_chevalley(&t, JordanMode::Multiplicative).unwrap();
        assert_eq!(jc.semisimple, Matrix::scalar(&q.from_i64(2), 2));
        assert_eq!(jc.unipotent_or_nilpotent, Matrix::parse(q, &[&["1", "1/2"], &["0", "1"]]).unwrap());

        let d = Matrix::diag(q, &[q.from_i64(2), q.from_i64(3)]);
        let jc = jordan_chevalley(&d, JordanMode::Multiplicative).unwrap();
        assert!(jc.unipotent_or_nilpotent.is_identity());

        let u = Matrix::from_i64(q, &[&[1, 1], &[0, 1]]);
        let jc = jordan_chevalley(&u, JordanMode::Multiplicative).unwrap();
        assert!(jc.semisimple.is_identity());

        let f3 = Field::Prime(3);
        let big = Matrix::identity(f3, 3);
        assert!(matches!(
            jordan_chevalley(&big, JordanMode::Multiplicative),
            Err(Error::SmallCharacteristic { .. })
        ));
    }
}
