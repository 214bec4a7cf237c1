//! Dense exact matrices, elimination, and the characteristic polynomial.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::arith::{Field, Scalar};
use crate::error::{Error, Result};
use crate::poly::Poly;

pub type Vector = Vec<Scalar>;

/// Row-major dense matrix over one field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn scalar(c: &Scalar, n: usize) -> Matrix {
        Matrix::identity(c.field(), n).scale(c)
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data: Vec<Scalar> = rows.into_iter().flatten().collect();
        if let Some(bad) = data.iter().find(|s| s.field() != field) {
            return Err(Error::MixedFields(format!("entry over {} in matrix over {field}", bad.field())));
        }
        Ok(Matrix {
            field,
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_i64(field: Field, rows: &[&[i64]]) -> Matrix {
        let rows = rows
            .iter()
            .map(|row| row.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Matrix::from_rows(field, rows).expect("well-formed literal")
    }

    /// Parses rows of scalar literals.
    pub fn parse(field: Field, rows: &[&[&str]]) -> Result<Matrix> {
        let rows = rows
            .iter()
            .map(|row| row.iter().map(|s| field.parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(field, rows)
    }

    /// Matrix whose columns are the given vectors (each of length `rows`).
    pub fn from_columns(field: Field, rows: usize, cols: &[Vector]) -> Matrix {
        let mut m = Matrix::zeros(field, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, v) in c.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn diag(field: Field, entries: &[Scalar]) -> Matrix {
        let mut m = Matrix::zeros(field, entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        debug_assert_eq!(v.field(), self.field);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vector {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Matrix::identity(self.field, self.rows)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn checked_mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.field != rhs.field {
            return Err(Error::MixedFields(format!("{} vs {}", self.field, rhs.field)));
        }
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = &out.data[idx] + &(a * b);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vector {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| {
                let mut acc = self.field.zero();
                for (j, x) in v.iter().enumerate() {
                    acc = &acc + &(self.get(i, j) * x);
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, mut e: u32) -> Matrix {
        let n = self.rows;
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.field, n);
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

    pub fn trace(&self) -> Scalar {
        (0..self.rows.min(self.cols)).fold(self.field.zero(), |acc, i| &acc + self.get(i, i))
    }

    /// `f(self)` by Horner's rule.
    pub fn eval_poly(&self, f: &Poly) -> Matrix {
        let n = self.rows;
        let mut acc = Matrix::zeros(self.field, n, n);
        for c in f.coeffs().iter().rev() {
            acc = &(&acc * self) + &Matrix::scalar(c, n);
        }
        acc
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        let mut m = Matrix::zeros(self.field, r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                m.set(i - r0, j - c0, self.get(i, j).clone());
            }
        }
        m
    }

    /// Columns selected by index.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let cols: Vec<Vector> = idx.iter().map(|&j| self.column(j)).collect();
        Matrix::from_columns(self.field, self.rows, &cols)
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "row counts");
        let mut cols = self.columns();
        cols.extend(other.columns());
        Matrix::from_columns(self.field, self.rows, &cols)
    }

    pub fn block_diag(field: Field, blocks: &[Matrix]) -> Matrix {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zeros(field, r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m.set(r0 + i, c0 + j, b.get(i, j).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    /// Companion matrix of a monic polynomial: multiplication by `x` on the
    /// power basis `1, x, ..., x^{d-1}` of `F[x]/(f)`.
    pub fn companion(f: &Poly) -> Matrix {
        let field = f.field();
        let d = f.deg();
        let mut m = Matrix::zeros(field, d, d);
        for i in 1..d {
            m.set(i, i - 1, field.one());
        }
        let lc_inv = f.leading().inv().expect("nonzero polynomial");
        for i in 0..d {
            m.set(i, d - 1, -&(&f.coeff(i) * &lc_inv));
        }
        m
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, pr);
            let inv = m.get(r, c).inv().expect("nonzero pivot");
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let factor = m.get(i, c).clone();
                for j in c..m.cols {
                    let v = m.get(i, j) - &(&factor * m.get(r, j));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Canonical kernel basis: the reduced echelon basis of `{v : self v = 0}`,
    /// each vector with leading entry 1.
    pub fn kernel(&self) -> Vec<Vector> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &f in &free {
            let mut v = vec![self.field.zero(); self.cols];
            v[f] = self.field.one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(row, f);
            }
            basis.push(v);
        }
        echelon_basis(self.field, &basis)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.require_square()?;
        let aug = self.hstack(&Matrix::identity(self.field, n));
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        Ok(r.submatrix(0, n, n, 2 * n))
    }

    /// Exact determinant: fraction-free Bareiss over ℤ for rationals (rows
    /// are scaled to integers first), Gaussian elimination over F_p.
    pub fn det(&self) -> Result<Scalar> {
        let n = self.require_square()?;
        if n == 0 {
            return Ok(self.field.one());
        }
        match self.field {
            Field::Rationals => Ok(self.det_bareiss_rational()),
            Field::Prime(_) => Ok(self.det_gauss()),
        }
    }

    fn det_gauss(&self) -> Scalar {
        let n = self.rows;
        let mut m = self.clone();
        let mut det = self.field.one();
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return self.field.zero();
            };
            if pr != c {
                m.swap_rows(pr, c);
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det = &det * &piv;
            let inv = piv.inv().expect("nonzero");
            for i in c + 1..n {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c) * &inv;
                for j in c..n {
                    let v = m.get(i, j) - &(&f * m.get(c, j));
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    fn det_bareiss_rational(&self) -> Scalar {
        let n = self.rows;
        let mut scale = BigRational::one();
        let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
        for i in 0..n {
            let row = self.row(i);
            let lcm = row
                .iter()
                .fold(BigInt::one(), |l, s| l.lcm(s.as_rational().expect("rational").denom()));
            scale *= BigRational::from_integer(lcm.clone());
            a.push(
                row.iter()
                    .map(|s| (s.as_rational().unwrap() * BigRational::from_integer(lcm.clone())).to_integer())
                    .collect(),
            );
        }
        let int_det = bareiss_int(&mut a);
        Scalar::from_rational(Field::Rationals, BigRational::from_integer(int_det) / scale).expect("rational")
    }

    /// Solves `self x = b`: a particular solution (if consistent) and the kernel.
    pub fn solve(&self, b: &[Scalar]) -> Result<LinearSolveResult> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!("rhs length {} for {} rows", b.len(), self.rows)));
        }
        if let Some(bad) = b.iter().find(|s| s.field() != self.field) {
            return Err(Error::MixedFields(format!("rhs over {} for matrix over {}", bad.field(), self.field)));
        }
        let aug = self.hstack(&Matrix::from_columns(self.field, self.rows, &[b.to_vec()]));
        let (r, pivots) = aug.rref();
        let particular = if pivots.last() == Some(&self.cols) {
            None
        } else {
            let mut x = vec![self.field.zero(); self.cols];
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = r.get(row, self.cols).clone();
            }
            Some(x)
        };
        Ok(LinearSolveResult {
            particular,
            kernel_basis: self.kernel(),
        })
    }

    /// Characteristic polynomial `det(xI - self)` by fraction-free (Bareiss)
    /// elimination over `F[x]`.
    pub fn char_poly(&self) -> Result<Poly> {
        let n = self.require_square()?;
        let field = self.field;
        let x = Poly::x(field);
        let mut a: Vec<Vec<Poly>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let c = Poly::constant(-self.get(i, j));
                        if i == j {
                            &x + &c
                        } else {
                            c
                        }
                    })
                    .collect()
            })
            .collect();
        let mut sign = false;
        let mut prev = Poly::one(field);
        for k in 0..n {
            if a[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                    return Ok(Poly::zero(field));
                };
                a.swap(k, p);
                sign = !sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
                }
            }
            prev = a[k][k].clone();
        }
        let det = a[n - 1][n - 1].clone();
        Ok(if sign { -&det } else { det })
    }

    /// Characteristic polynomial by Faddeev–LeVerrier. Divides by `1..=n`,
    /// so it needs characteristic 0 or larger than `n`.
    pub fn char_poly_faddeev(&self) -> Result<Poly> {
        let n = self.require_square()?;
        self.field.require_large(n)?;
        let field = self.field;
        let mut coeffs = vec![field.zero(); n + 1];
        coeffs[n] = field.one();
        let mut m = Matrix::zeros(field, n, n);
        for k in 1..=n {
            m = &(self * &m) + &Matrix::scalar(&coeffs[n - k + 1], n);
            let tr = (self * &m).trace();
            let kinv = field.from_i64(k as i64).inv()?;
            coeffs[n - k] = -&(&tr * &kinv);
        }
        Ok(Poly::new(field, coeffs).expect("same field"))
    }
}

fn bareiss_int(a: &mut [Vec<BigInt>]) -> BigInt {
    let n = a.len();
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        -d
    } else {
        d
    }
}

/// Reduced echelon basis (pivot entries 1) of the span of `vectors`.
pub fn echelon_basis(field: Field, vectors: &[Vector]) -> Vec<Vector> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = Matrix::from_rows(field, vectors.to_vec()).expect("same field");
    let (r, pivots) = m.rref();
    (0..pivots.len()).map(|i| r.row(i)).collect()
}

/// Outcome of [`Matrix::solve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSolveResult {
    pub particular: Option<Vector>,
    pub kernel_basis: Vec<Vector>,
}

/// `solve_linear` as a free function.
pub fn solve_linear(a: &Matrix, b: &[Scalar]) -> Result<LinearSolveResult> {
    a.solve(b)
}

pub fn det(m: &Matrix) -> Result<Scalar> {
    m.det()
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.checked_mul(rhs).expect("matrix product")
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.field, self.rows, self.cols), (rhs.field, rhs.rows, rhs.cols));
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.field, self.rows, self.cols), (rhs.field, rhs.rows, rhs.cols));
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Serialized as an array of rows of scalar strings.
impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

// ---------------------------------------------------------------------------
// Subspaces as column sets

/// Column basis of the column span (pivot columns of the input).
pub fn column_space(m: &Matrix) -> Matrix {
    let (_, pivots) = m.rref();
    m.select_columns(&pivots)
}

/// Coordinates `X` with `basis * X = vectors`; `None` if some column of
/// `vectors` is outside the span. `basis` must have independent columns.
pub fn coordinates(basis: &Matrix, vectors: &Matrix) -> Option<Matrix> {
    let k = basis.cols();
    let aug = basis.hstack(vectors);
    let (r, pivots) = aug.rref();
    if pivots.iter().any(|&p| p >= k) || pivots.len() != k {
        return None;
    }
    Some(r.submatrix(0, k, k, aug.cols()))
}

/// Matrix of `op` restricted to the invariant span of `basis`.
pub fn restrict(op: &Matrix, basis: &Matrix) -> Result<Matrix> {
    coordinates(basis, &(op * basis)).ok_or_else(|| Error::Internal("subspace is not invariant".into()))
}

/// Whether the span of `basis` is mapped into itself by `op`.
pub fn is_invariant(op: &Matrix, basis: &Matrix) -> bool {
    basis.cols() == 0 || coordinates(basis, &(op * basis)).is_some()
}

/// Whether `v` lies in the column span of `basis`.
pub fn in_span(basis: &Matrix, v: &[Scalar]) -> bool {
    if basis.cols() == 0 {
        return v.iter().all(Scalar::is_zero);
    }
    let with = basis.hstack(&Matrix::from_columns(basis.field(), basis.rows(), &[v.to_vec()]));
    with.rank() == basis.rank()
}
