//! Explicit witnesses: block forms for `(x∓1)^k` and `x^k`, hyperbolic
//! pairings of dual summands, trace forms on self-dual blocks, the
//! symmetric/skew converter, and assembly along the cyclic decomposition.
//!
//! Every block is verified on its own; a block that fails is rebuilt from the
//! oracle and tagged accordingly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{Field, Scalar};
use crate::canonical::{indecomposable_decomposition, jordan_chevalley, min_poly, IndecomposableSummand, JordanMode};
use crate::certificate::{verify_form, FormCertificate, Provenance, Route, Setting, Symmetry};
use crate::decision::{
    block_parity_allows, decide_infinitesimal_form_with, decide_invariant_form_with, require_decidable, DecisionReport,
};
use crate::error::{Error, Result};
use crate::factor::FactorOptions;
use crate::linalg::{restrict, Matrix, Vector};
use crate::oracle::{find_nondegenerate, solve_form_space, DEFAULT_TRIALS};
use crate::poly::{
    additive_dual_poly, dual_poly, is_additively_self_dual, is_self_dual, poly_xgcd, substitute_y_eq_x_plus_inv,
    substitute_y_eq_x_squared, Poly,
};

fn parity_check(k: usize, symmetry: Symmetry) -> Result<()> {
    if block_parity_allows(k as u32, symmetry) {
        Ok(())
    } else {
        Err(Error::ParityViolation {
            size: k,
            symmetry: symmetry.name(),
        })
    }
}

/// Lower shift `L e_i = e_{i+1}`.
fn lower_shift(field: Field, k: usize) -> Matrix {
    let mut l = Matrix::zeros(field, k, k);
    for i in 1..k {
        l.set(i, i - 1, field.one());
    }
    l
}

fn sign_scalar(field: Field, sign: i64) -> Scalar {
    field.from_i64(sign)
}

/// Anti-triangular Gram invariant under `I + L`, filled level by level from
/// the anti-diagonal inward. Each level is affine in its first entry; the
/// `ε`-symmetry either pins that entry or leaves it free, in which case it is
/// 0 (or `corner` on the top-left entry).
fn unipotent_core(field: Field, k: usize, symmetry: Symmetry, corner: &Scalar) -> Result<Matrix> {
    let eps = sign_scalar(field, symmetry.sign());
    let mut b = Matrix::zeros(field, k, k);
    for l in 0..k {
        b.set(l, k - 1 - l, sign_scalar(field, if l % 2 == 0 { 1 } else { -1 }));
    }
    for s in (0..k.saturating_sub(1)).rev() {
        // a_i = B[i][s - i] = alpha_i + beta_i t.
        let mut alpha = vec![field.zero()];
        let mut beta = vec![field.one()];
        for i in 0..s {
            let known = b.get(i + 1, s - i).clone();
            alpha.push(-&(&alpha[i] + &known));
            beta.push(-&beta[i]);
        }
        let mut pinned: Option<Scalar> = None;
        let mut equations = Vec::new();
        for i in 0..=s {
            let coef = &beta[i] - &(&eps * &beta[s - i]);
            let rhs = &(&eps * &alpha[s - i]) - &alpha[i];
            if pinned.is_none() && !coef.is_zero() {
                pinned = Some(rhs.checked_div(&coef)?);
            }
            equations.push((coef, rhs));
        }
        let t = pinned.unwrap_or_else(|| if s == 0 { corner.clone() } else { field.zero() });
        if equations.iter().any(|(c, r)| &(c * &t) != r) {
            return Err(Error::Internal(format!("level {s} of the {k}-block is inconsistent")));
        }
        for i in 0..=s {
            b.set(i, s - i, &alpha[i] + &(&beta[i] * &t));
        }
    }
    let u = &Matrix::identity(field, k) + &lower_shift(field, k);
    if &(&u.transpose() * &b) * &u != b {
        return Err(Error::Internal(format!("unipotent {k}-block form is not invariant")));
    }
    Ok(b)
}

/// Non-degenerate form of the given symmetry invariant under `λ(I + L)`.
pub fn unipotent_block_form(field: Field, k: usize, symmetry: Symmetry, lambda: i64) -> Result<Matrix> {
    if lambda != 1 && lambda != -1 {
        return Err(Error::NotUnipotentType(format!("eigenvalue {lambda} is not 1 or -1")));
    }
    parity_check(k, symmetry)?;
    unipotent_core(field, k, symmetry, &field.zero())
}

/// Anti-diagonal `B[i][k−1−i] = (−1)^i` with `LᵗB + BL = 0`.
pub fn nilpotent_block_form(field: Field, k: usize, symmetry: Symmetry) -> Result<Matrix> {
    parity_check(k, symmetry)?;
    let mut b = Matrix::zeros(field, k, k);
    for i in 0..k {
        b.set(i, k - 1 - i, sign_scalar(field, if i % 2 == 0 { 1 } else { -1 }));
    }
    Ok(b)
}

fn krylov(op: &Matrix, v: &[Scalar]) -> Matrix {
    let n = op.rows();
    let mut cols: Vec<Vector> = Vec::with_capacity(n);
    let mut cur = v.to_vec();
    for _ in 0..n {
        let next = op.mul_vec(&cur);
        cols.push(cur);
        cur = next;
    }
    Matrix::from_columns(op.field(), n, &cols)
}

fn unit(field: Field, n: usize, i: usize) -> Vector {
    let mut v = vec![field.zero(); n];
    v[i] = field.one();
    v
}

/// A vector whose orbit spans the space: standard vectors, then pairwise
/// sums, then seeded random vectors.
fn cyclic_vector(op: &Matrix, seed: u64) -> Option<Vector> {
    let n = op.rows();
    let field = op.field();
    let works = |v: &Vector| krylov(op, v).rank() == n;
    for i in 0..n {
        let v = unit(field, n, i);
        if works(&v) {
            return Some(v);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut v = unit(field, n, i);
            v[j] = field.one();
            if works(&v) {
                return Some(v);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..DEFAULT_TRIALS {
        let v: Vector = (0..n)
            .map(|_| match field {
                Field::Rationals => field.from_i64(rng.gen_range(-9..=9)),
                Field::Prime(p) => Scalar::residue(rng.gen_range(0..p), p),
            })
            .collect();
        if works(&v) {
            return Some(v);
        }
    }
    None
}

/// `[[0, X], [εXᵗ, 0]]` where `X` intertwines `T_b` with `T_a^{−t}`
/// (or with `−T_aᵗ` in the infinitesimal setting).
pub fn pairing_gram(ta: &Matrix, tb: &Matrix, symmetry: Symmetry, setting: Setting) -> Result<Matrix> {
    let m = ta.require_square()?;
    if tb.require_square()? != m {
        return Err(Error::NotDualPair(format!("dimensions {m} and {}", tb.rows())));
    }
    let target = match setting {
        Setting::Invariant => ta.inverse()?.transpose(),
        Setting::Infinitesimal => -&ta.transpose(),
    };
    if min_poly(tb)? != min_poly(&target)? {
        return Err(Error::NotDualPair("minimal polynomials do not match".into()));
    }
    let field = ta.field();
    let vb = cyclic_vector(tb, 1).ok_or_else(|| Error::NotDualPair("summand is not cyclic".into()))?;
    let vt = cyclic_vector(&target, 2).ok_or_else(|| Error::NotDualPair("summand is not cyclic".into()))?;
    let x = &krylov(&target, &vt) * &krylov(tb, &vb).inverse()?;
    let eps = sign_scalar(field, symmetry.sign());
    let mut g = Matrix::zeros(field, 2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            g.set(i, m + j, x.get(i, j).clone());
            g.set(m + j, i, &eps * x.get(i, j));
        }
    }
    Ok(g)
}

/// Hyperbolic form on `a ⊕ b`, zero on each summand.
pub fn hyperbolic_pairing(
    a: &IndecomposableSummand,
    b: &IndecomposableSummand,
    symmetry: Symmetry,
    setting: Setting,
) -> Result<Matrix> {
    pairing_gram(&a.restricted, &b.restricted, symmetry, setting)
}

/// `E = F[x]/(p)` with its involution `σ` (`x ↦ x⁻¹`, or `x ↦ −x` in
/// additive mode) and fixed field `E₁ = F[y]/(q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientRingContext {
    pub p: Poly,
    pub d: u32,
    pub q: Poly,
    pub mode: JordanMode,
    /// `1, x, …, x^{2m−1}`.
    pub e_basis: Vec<Poly>,
    /// `1, y, …, y^{m−1}` as residues mod `p`.
    pub e1_basis: Vec<Poly>,
    /// `σ` on `E` in the power basis.
    pub sigma_matrix: Matrix,
}

impl QuotientRingContext {
    pub fn new(p: &Poly, d: u32, mode: JordanMode) -> Result<QuotientRingContext> {
        let field = p.field();
        let p = p.monic();
        let deg = p.deg();
        require_decidable(field, deg * d.max(1) as usize)?;
        let (q, sigma_x) = match mode {
            JordanMode::Multiplicative => {
                if !is_self_dual(&p)? {
                    return Err(Error::NotSelfDual(p.to_string()));
                }
                let q = substitute_y_eq_x_plus_inv(&p)?;
                let (g, s, _) = poly_xgcd(&Poly::x(field), &p);
                (q, s.scale(&g.coeff(0).inv()?).rem(&p))
            }
            JordanMode::Additive => {
                if !is_additively_self_dual(&p) {
                    return Err(Error::NotSelfDual(format!("{p} is not additively self-dual")));
                }
                let q = substitute_y_eq_x_squared(&p).map_err(|_| Error::NotSelfDual(p.to_string()))?;
                (q, -&Poly::x(field))
            }
        };
        let e_basis: Vec<Poly> = (0..deg).map(|j| Poly::monomial(field.one(), j)).collect();
        let columns: Vec<Vector> = (0..deg).map(|j| coords(&sigma_x.pow(j as u32).rem(&p), deg)).collect();
        let sigma_matrix = Matrix::from_columns(field, deg, &columns);
        let y = match mode {
            JordanMode::Multiplicative => (&Poly::x(field) + &sigma_x).rem(&p),
            JordanMode::Additive => Poly::monomial(field.one(), 2).rem(&p),
        };
        let e1_basis = (0..deg / 2).map(|i| y.pow(i as u32).rem(&p)).collect();
        Ok(QuotientRingContext {
            p,
            d,
            q,
            mode,
            e_basis,
            e1_basis,
            sigma_matrix,
        })
    }

    pub fn field(&self) -> Field {
        self.p.field()
    }

    fn setting(&self) -> Setting {
        match self.mode {
            JordanMode::Multiplicative => Setting::Invariant,
            JordanMode::Additive => Setting::Infinitesimal,
        }
    }
}

fn coords(f: &Poly, len: usize) -> Vector {
    (0..len).map(|i| f.coeff(i)).collect()
}

fn from_coords(field: Field, v: &[Scalar]) -> Poly {
    Poly::new(field, v.to_vec()).expect("coordinates share a field")
}

/// Outcome of [`trace_norm_form`]: the Gram on `E` and whether the direct
/// trace-of-norm formula verified without help from the oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceNormForm {
    pub gram: Matrix,
    pub route: Route,
}

/// Symmetric Gram on `F[x]/(p)` in the power basis, invariant under
/// multiplication by `x` (or infinitesimally invariant in additive mode).
///
/// The direct route is `B(α, β) = Tr_{E₁/F}(n(α)·n(β))` with
/// `n(α) = ½(α + σα)`. Its image lies in `E₁`, so the matrix has rank at most
/// `m` and cannot be non-degenerate; it is still computed and checked, and
/// the oracle supplies the witness whenever the check fails.
pub fn trace_norm_form(ctx: &QuotientRingContext) -> Result<TraceNormForm> {
    let field = ctx.field();
    let deg = ctx.p.deg();
    let m_op = Matrix::companion(&ctx.p);
    let half = field.from_i64(2).inv()?;
    let norms: Vec<Poly> = (0..deg)
        .map(|i| {
            let alpha = &ctx.e_basis[i];
            let sigma_alpha = from_coords(field, &ctx.sigma_matrix.column(i));
            (alpha + &sigma_alpha).scale(&half)
        })
        .collect();
    // For z in E₁, Tr_{E₁/F}(z) = ½ Tr_{E/F}(z), and Tr_{E/F}(z) = tr z(M).
    let mut b = Matrix::zeros(field, deg, deg);
    for i in 0..deg {
        for j in 0..deg {
            let z = (&norms[i] * &norms[j]).rem(&ctx.p);
            b.set(i, j, &m_op.eval_poly(&z).trace() * &half);
        }
    }
    let setting = ctx.setting();
    if verify_form(&m_op, &b, Symmetry::Symmetric, setting)?.all() {
        return Ok(TraceNormForm {
            gram: b,
            route: Route::TraceNorm,
        });
    }
    let space = solve_form_space(&m_op, Symmetry::Symmetric, setting)?;
    let gram = find_nondegenerate(&space, FactorOptions::default().seed, DEFAULT_TRIALS)
        .ok_or_else(|| Error::Internal(format!("no invariant symmetric form on F[x]/({})", ctx.p)))?;
    Ok(TraceNormForm {
        gram,
        route: Route::TraceNormFallback,
    })
}

/// Kronecker product; index `(i, j)` maps to `i * b.rows() + j`.
fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.rows(), b.rows());
    let mut out = Matrix::zeros(a.field(), ra * rb, ra * rb);
    for i in 0..ra {
        for k in 0..ra {
            if a.get(i, k).is_zero() {
                continue;
            }
            for j in 0..rb {
                for l in 0..rb {
                    out.set(i * rb + j, k * rb + l, a.get(i, k) * b.get(j, l));
                }
            }
        }
    }
    out
}

/// Gram plus the routes that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockForm {
    pub gram: Matrix,
    pub routes: Vec<Route>,
}

/// Form of the requested symmetry on `F[x]/(p^d)` in the power basis, i.e.
/// invariant under `companion(p^d)`.
///
/// For `d ≥ 2` the basis `N^i T_s^j v` turns the map into `J ⊗ M` (or
/// `I ⊗ M + L ⊗ I`), and `C ⊗ b` is invariant whenever `C` is invariant on
/// the unipotent (nilpotent) block and `b` under `M`. Only one symmetry is
/// reachable directly for each parity of `d`; the other comes from the
/// converter.
pub fn self_dual_block_form(ctx: &QuotientRingContext, symmetry: Symmetry) -> Result<BlockForm> {
    let field = ctx.field();
    let d = ctx.d.max(1) as usize;
    let deg = ctx.p.deg();
    let n = deg * d;
    let setting = ctx.setting();
    let op = Matrix::companion(&ctx.p.pow(d as u32));
    let base = trace_norm_form(ctx)?;
    let mut routes = vec![base.route];
    let (mut gram, built) = if d == 1 {
        (base.gram, Symmetry::Symmetric)
    } else {
        let jc = jordan_chevalley(&op, ctx.mode)?;
        let nil = match ctx.mode {
            JordanMode::Multiplicative => &jc.unipotent_or_nilpotent - &Matrix::identity(field, n),
            JordanMode::Additive => jc.unipotent_or_nilpotent.clone(),
        };
        let direct = if d % 2 == 1 { Symmetry::Symmetric } else { Symmetry::Skew };
        let core = match ctx.mode {
            JordanMode::Multiplicative => {
                let corner = if direct == Symmetry::Symmetric { field.one() } else { field.zero() };
                unipotent_core(field, d, direct, &corner)?
            }
            JordanMode::Additive => nilpotent_block_form(field, d, direct)?,
        };
        let mut cols: Vec<Vector> = Vec::with_capacity(n);
        let mut row_start = unit(field, n, 0);
        for _ in 0..d {
            let mut v = row_start.clone();
            for _ in 0..deg {
                let next = jc.semisimple.mul_vec(&v);
                cols.push(v);
                v = next;
            }
            row_start = nil.mul_vec(&row_start);
        }
        let basis = Matrix::from_columns(field, n, &cols);
        let inv = basis.inverse()?;
        routes.push(Route::SelfDualBlock);
        (&(&inv.transpose() * &kron(&core, &base.gram)) * &inv, direct)
    };
    if built != symmetry {
        gram = convert_gram(&op, &gram, setting)?;
        routes.push(Route::Converter);
    }
    if !verify_form(&op, &gram, symmetry, setting)?.all() {
        gram = oracle_block(&op, symmetry, setting)?;
        routes.push(Route::Oracle);
    }
    Ok(BlockForm { gram, routes })
}

fn oracle_block(op: &Matrix, symmetry: Symmetry, setting: Setting) -> Result<Matrix> {
    let space = solve_form_space(op, symmetry, setting)?;
    find_nondegenerate(&space, FactorOptions::default().seed, DEFAULT_TRIALS)
        .ok_or_else(|| Error::Internal(format!("oracle found no {} witness on a block", symmetry.name())))
}

/// `(T − T⁻¹)ᵗ B`, or `SᵗB` infinitesimally.
fn convert_gram(op: &Matrix, b: &Matrix, setting: Setting) -> Result<Matrix> {
    let factor = match setting {
        Setting::Invariant => {
            let f = op - &op.inverse()?;
            if f.det()?.is_zero() {
                return Err(Error::EigenvalueObstruction("1 or -1".into()));
            }
            f
        }
        Setting::Infinitesimal => {
            if op.det()?.is_zero() {
                return Err(Error::EigenvalueObstruction("0".into()));
            }
            op.clone()
        }
    };
    Ok(&factor.transpose() * b)
}

fn converted(op: &Matrix, cert: &FormCertificate, setting: Setting) -> Result<FormCertificate> {
    if cert.setting() != setting {
        return Err(Error::UnverifiedForm(format!("certificate is for the {} setting", cert.setting().name())));
    }
    if !cert.holds_for(op) {
        return Err(Error::UnverifiedForm("source certificate does not hold for this map".into()));
    }
    let gram = convert_gram(op, cert.gram(), setting)?;
    let mut provenance = cert.provenance().to_vec();
    provenance.push(Provenance {
        block: "whole space".into(),
        dim: op.rows(),
        routes: vec![Route::Converter],
    });
    FormCertificate::new(op, gram, cert.symmetry().opposite(), setting, provenance)
}

/// `B'(u, v) = B((T − T⁻¹)u, v)`: swaps symmetric and skew when `±1` is not
/// an eigenvalue.
pub fn skew_symmetric_converter(t: &Matrix, cert: &FormCertificate) -> Result<FormCertificate> {
    converted(t, cert, Setting::Invariant)
}

/// `B'(u, v) = B(Su, v)` for invertible `S`.
pub fn infinitesimal_converter(s: &Matrix, cert: &FormCertificate) -> Result<FormCertificate> {
    converted(s, cert, Setting::Infinitesimal)
}

/// `diag(1, −1, 1, …)`.
fn alternating_signs(field: Field, k: usize) -> Matrix {
    let entries: Vec<Scalar> = (0..k)
        .map(|i| sign_scalar(field, if i % 2 == 0 { 1 } else { -1 }))
        .collect();
    Matrix::diag(field, &entries)
}

/// Gram for one summand whose divisor is `(x − c)^k` with `c ∈ {1, −1}`
/// (invariant) or `c = 0` (infinitesimal), in its chain basis.
fn special_block(s: &IndecomposableSummand, symmetry: Symmetry, setting: Setting) -> Result<(Matrix, Route)> {
    let field = s.restricted.field();
    let k = s.dim();
    match setting {
        Setting::Invariant => {
            let gram = unipotent_block_form(field, k, symmetry, 1)?;
            if s.divisor.p.coeff(0).is_one() {
                // Chain basis for x + 1 gives −I + L; conjugating by the sign
                // diagonal turns −(I + L) into it.
                let d = alternating_signs(field, k);
                Ok((&(&d * &gram) * &d, Route::UnipotentBlock))
            } else {
                Ok((gram, Route::UnipotentBlock))
            }
        }
        Setting::Infinitesimal => Ok((nilpotent_block_form(field, k, symmetry)?, Route::NilpotentBlock)),
    }
}

fn is_special(p: &Poly, setting: Setting) -> bool {
    if p.deg() != 1 {
        return false;
    }
    let c = p.coeff(0);
    match setting {
        Setting::Invariant => c.is_one() || (-&c).is_one(),
        Setting::Infinitesimal => c.is_zero(),
    }
}

struct Unit {
    basis: Matrix,
    gram: Matrix,
    provenance: Provenance,
}

fn label(summands: &[&IndecomposableSummand]) -> String {
    summands
        .iter()
        .map(|s| format!("({})^{}#{}", s.divisor.p, s.divisor.k, s.divisor.multiplicity))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn assemble(op: &Matrix, symmetry: Symmetry, setting: Setting, opts: &FactorOptions) -> Result<FormCertificate> {
    let n = op.rows();
    let field = op.field();
    let summands = indecomposable_decomposition(op, opts)?;
    let mut used = vec![false; summands.len()];
    let mut units: Vec<Unit> = Vec::new();
    for idx in 0..summands.len() {
        if used[idx] {
            continue;
        }
        used[idx] = true;
        let s = &summands[idx];
        let p = &s.divisor.p;
        let k = s.divisor.k;
        let partner_of = |target: &Poly, used: &[bool]| {
            (0..summands.len()).find(|&j| !used[j] && summands[j].divisor.p == *target && summands[j].divisor.k == k)
        };
        let single = |gram: Matrix, routes: Vec<Route>| Unit {
            basis: s.basis.clone(),
            gram,
            provenance: Provenance {
                block: label(&[s]),
                dim: s.dim(),
                routes,
            },
        };
        let self_dual = match setting {
            Setting::Invariant => dual_poly(p)? == *p,
            Setting::Infinitesimal => additive_dual_poly(p) == *p,
        };
        let unit = if is_special(p, setting) && block_parity_allows(k, symmetry) {
            let (gram, route) = special_block(s, symmetry, setting)?;
            single(gram, vec![route])
        } else if self_dual && !is_special(p, setting) {
            let mode = match setting {
                Setting::Invariant => JordanMode::Multiplicative,
                Setting::Infinitesimal => JordanMode::Additive,
            };
            let ctx = QuotientRingContext::new(p, k, mode)?;
            let block = self_dual_block_form(&ctx, symmetry)?;
            single(block.gram, block.routes)
        } else {
            let target = match setting {
                Setting::Invariant => dual_poly(p)?,
                Setting::Infinitesimal => additive_dual_poly(p),
            };
            let j = partner_of(&target, &used)
                .ok_or_else(|| Error::Internal(format!("no partner for ({p})^{k}")))?;
            used[j] = true;
            let t = &summands[j];
            let gram = hyperbolic_pairing(s, t, symmetry, setting)?;
            Unit {
                basis: s.basis.hstack(&t.basis),
                gram,
                provenance: Provenance {
                    block: label(&[s, t]),
                    dim: s.dim() + t.dim(),
                    routes: vec![Route::Hyperbolic],
                },
            }
        };
        units.push(unit);
    }
    for u in &mut units {
        let local = restrict(op, &u.basis)?;
        if !verify_form(&local, &u.gram, symmetry, setting)?.all() {
            u.gram = oracle_block(&local, symmetry, setting)?;
            u.provenance.routes.push(Route::Oracle);
        }
    }
    let basis = units
        .iter()
        .fold(Matrix::zeros(field, n, 0), |acc, u| acc.hstack(&u.basis));
    let block = Matrix::block_diag(field, &units.iter().map(|u| u.gram.clone()).collect::<Vec<_>>());
    let inv = basis.inverse()?;
    let gram = &(&inv.transpose() * &block) * &inv;
    FormCertificate::new(op, gram, symmetry, setting, units.into_iter().map(|u| u.provenance).collect())
}

pub fn construct_invariant_form(t: &Matrix, symmetry: Symmetry) -> Result<FormCertificate> {
    construct_invariant_form_with(t, symmetry, &FactorOptions::default())
}

pub fn construct_invariant_form_with(t: &Matrix, symmetry: Symmetry, opts: &FactorOptions) -> Result<FormCertificate> {
    let report = decide_invariant_form_with(t, symmetry, opts)?;
    if !report.exists {
        return Err(Error::DecisionFalse(report.describe()));
    }
    assemble(t, symmetry, Setting::Invariant, opts)
}

pub fn construct_infinitesimal_form(s: &Matrix, symmetry: Symmetry) -> Result<FormCertificate> {
    construct_infinitesimal_form_with(s, symmetry, &FactorOptions::default())
}

pub fn construct_infinitesimal_form_with(s: &Matrix, symmetry: Symmetry, opts: &FactorOptions) -> Result<FormCertificate> {
    let report = decide_infinitesimal_form_with(s, symmetry, opts)?;
    if !report.exists {
        return Err(Error::DecisionFalse(report.describe()));
    }
    assemble(s, symmetry, Setting::Infinitesimal, opts)
}

/// Decision plus, when positive, the verified witness.
pub fn decide_and_construct(
    op: &Matrix,
    symmetry: Symmetry,
    setting: Setting,
    opts: &FactorOptions,
) -> Result<DecisionReport> {
    let mut report = match setting {
        Setting::Invariant => decide_invariant_form_with(op, symmetry, opts)?,
        Setting::Infinitesimal => decide_infinitesimal_form_with(op, symmetry, opts)?,
    };
    if report.exists {
        report.witness = Some(assemble(op, symmetry, setting, opts)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rationals
    }

    fn qm(rows: &[&[&str]]) -> Matrix {
        Matrix::parse(q(), rows).unwrap()
    }

    fn qpoly(s: &str) -> Poly {
        Poly::parse(q(), s).unwrap()
    }

    fn holds(op: &Matrix, b: &Matrix, sym: Symmetry, setting: Setting) -> bool {
        verify_form(op, b, sym, setting).unwrap().all()
    }

    #[test]
    fn unipotent_blocks() {
        let b = unipotent_block_form(q(), 3, Symmetry::Symmetric, 1).unwrap();
        assert_eq!(b, qm(&[&["0", "1/2", "1"], &["1/2", "-1", "0"], &["1", "0", "0"]]));
        assert_eq!(b.det().unwrap(), q().one());
        let b = unipotent_block_form(q(), 2, Symmetry::Skew, 1).unwrap();
        assert_eq!(b, Matrix::from_i64(q(), &[&[0, 1], &[-1, 0]]));
        assert!(matches!(
            unipotent_block_form(q(), 2, Symmetry::Symmetric, 1),
            Err(Error::ParityViolation { size: 2, .. })
        ));
        for k in 1..8 {
            let sym = if k % 2 == 1 { Symmetry::Symmetric } else { Symmetry::Skew };
            let b = unipotent_block_form(q(), k, sym, -1).unwrap();
            let t = -&(&Matrix::identity(q(), k) + &lower_shift(q(), k));
            assert!(holds(&t, &b, sym, Setting::Invariant), "k = {k}");
        }
    }

    #[test]
    fn nilpotent_blocks() {
        let b = nilpotent_block_form(q(), 2, Symmetry::Skew).unwrap();
        assert_eq!(b, Matrix::from_i64(q(), &[&[0, 1], &[-1, 0]]));
        let b = nilpotent_block_form(q(), 3, Symmetry::Symmetric).unwrap();
        assert_eq!(b, Matrix::from_i64(q(), &[&[0, 0, 1], &[0, -1, 0], &[1, 0, 0]]));
        assert!(holds(&lower_shift(q(), 3), &b, Symmetry::Symmetric, Setting::Infinitesimal));
        assert!(matches!(
            nilpotent_block_form(q(), 4, Symmetry::Symmetric),
            Err(Error::ParityViolation { size: 4, .. })
        ));
    }

    #[test]
    fn hyperbolic_examples() {
        let f = q();
        let ta = Matrix::diag(f, &[f.from_i64(2)]);
        let tb = Matrix::diag(f, &[f.parse("1/2").unwrap()]);
        let g = pairing_gram(&ta, &tb, Symmetry::Symmetric, Setting::Invariant).unwrap();
        assert_eq!(g, Matrix::from_i64(f, &[&[0, 1], &[1, 0]]));
        let g = pairing_gram(&ta, &tb, Symmetry::Skew, Setting::Invariant).unwrap();
        assert_eq!(g, Matrix::from_i64(f, &[&[0, 1], &[-1, 0]]));
        let j = Matrix::from_i64(f, &[&[1, 0], &[1, 1]]);
        let g = pairing_gram(&j, &j, Symmetry::Symmetric, Setting::Invariant).unwrap();
        let jj = Matrix::block_diag(f, &[j.clone(), j.clone()]);
        assert!(holds(&jj, &g, Symmetry::Symmetric, Setting::Invariant));
        assert!(g.submatrix(0, 2, 0, 2).is_zero() && g.submatrix(2, 4, 2, 4).is_zero());
        assert!(matches!(
            pairing_gram(&ta, &ta, Symmetry::Symmetric, Setting::Invariant),
            Err(Error::NotDualPair(_))
        ));
    }

    #[test]
    fn trace_norm_examples() {
        let ctx = QuotientRingContext::new(&qpoly("x^2 + 1"), 1, JordanMode::Multiplicative).unwrap();
        assert_eq!(ctx.q, qpoly("x"));
        assert!((&ctx.sigma_matrix * &ctx.sigma_matrix).is_identity());
        let tn = trace_norm_form(&ctx).unwrap();
        assert_eq!(tn.route, Route::TraceNormFallback);
        assert_eq!(tn.gram, Matrix::identity(q(), 2));
        for p in ["x^2 - 3*x + 1", "x^4 + x^3 + x^2 + x + 1"] {
            let ctx = QuotientRingContext::new(&qpoly(p), 1, JordanMode::Multiplicative).unwrap();
            let fixed = (&ctx.sigma_matrix - &Matrix::identity(q(), ctx.p.deg())).kernel().len();
            assert_eq!(fixed, ctx.p.deg() / 2);
            let tn = trace_norm_form(&ctx).unwrap();
            assert!(holds(&Matrix::companion(&ctx.p), &tn.gram, Symmetry::Symmetric, Setting::Invariant));
        }
        assert_eq!(
            QuotientRingContext::new(&qpoly("x^4 + x^3 + x^2 + x + 1"), 1, JordanMode::Multiplicative)
                .unwrap()
                .q,
            qpoly("x^2 + x - 1")
        );
        assert!(matches!(
            QuotientRingContext::new(&qpoly("x^2 - 3*x + 2"), 1, JordanMode::Multiplicative),
            Err(Error::NotSelfDual(_))
        ));
    }

    #[test]
    fn self_dual_blocks() {
        for (p, d) in [("x^2 + 1", 2), ("x^2 - 3*x + 1", 3), ("x^2 - 3*x + 1", 2), ("x^2 + 1", 1)] {
            let ctx = QuotientRingContext::new(&qpoly(p), d, JordanMode::Multiplicative).unwrap();
            let op = Matrix::companion(&ctx.p.pow(d));
            for sym in [Symmetry::Symmetric, Symmetry::Skew] {
                let block = self_dual_block_form(&ctx, sym).unwrap();
                assert!(holds(&op, &block.gram, sym, Setting::Invariant), "{p} {d} {sym:?}");
                assert!(!block.routes.contains(&Route::Oracle), "{p} {d} {sym:?}");
                let needs_converter = (d % 2 == 1) != (sym == Symmetry::Symmetric);
                assert_eq!(block.routes.contains(&Route::Converter), needs_converter);
            }
        }
        let ctx = QuotientRingContext::new(&qpoly("x^2 + 1"), 2, JordanMode::Additive).unwrap();
        let op = Matrix::companion(&ctx.p.pow(2));
        for sym in [Symmetry::Symmetric, Symmetry::Skew] {
            let block = self_dual_block_form(&ctx, sym).unwrap();
            assert!(holds(&op, &block.gram, sym, Setting::Infinitesimal));
        }
    }

    #[test]
    fn converter_examples() {
        let f = q();
        let t = Matrix::from_i64(f, &[&[0, -1], &[1, 0]]);
        let c = FormCertificate::new(&t, Matrix::identity(f, 2), Symmetry::Symmetric, Setting::Invariant, vec![]).unwrap();
        let skew = skew_symmetric_converter(&t, &c).unwrap();
        assert_eq!(skew.gram(), &Matrix::from_i64(f, &[&[0, 2], &[-2, 0]]));
        assert_eq!(skew.symmetry(), Symmetry::Skew);
        let back = skew_symmetric_converter(&t, &skew).unwrap();
        let d = &t - &t.inverse().unwrap();
        assert_eq!(back.gram(), &(&(&d.transpose() * &d.transpose()) * c.gram()));
        assert_eq!(back.symmetry(), Symmetry::Symmetric);
        let j = Matrix::from_i64(f, &[&[1, 1], &[0, 1]]);
        let c = FormCertificate::new(&j, Matrix::from_i64(f, &[&[0, 1], &[-1, 0]]), Symmetry::Skew, Setting::Invariant, vec![])
            .unwrap();
        assert!(matches!(skew_symmetric_converter(&j, &c), Err(Error::EigenvalueObstruction(_))));
    }

    #[test]
    fn construction_examples() {
        let f = q();
        let c = construct_invariant_form(&Matrix::identity(f, 3), Symmetry::Symmetric).unwrap();
        assert_eq!(c.gram(), &Matrix::identity(f, 3));
        let j3 = Matrix::from_i64(f, &[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        let c = construct_invariant_form(&j3, Symmetry::Symmetric).unwrap();
        assert!(c.holds_for(&j3));
        let j2 = Matrix::from_i64(f, &[&[1, 1], &[0, 1]]);
        let jj = Matrix::block_diag(f, &[j2.clone(), j2.clone()]);
        let c = construct_invariant_form(&jj, Symmetry::Symmetric).unwrap();
        assert_eq!(c.provenance()[0].routes, vec![Route::Hyperbolic]);
        assert!(matches!(
            construct_invariant_form(&j2, Symmetry::Symmetric),
            Err(Error::DecisionFalse(_))
        ));
        let m2 = Matrix::from_i64(f, &[&[-1, 1], &[0, -1]]);
        assert!(construct_invariant_form(&m2, Symmetry::Skew).unwrap().holds_for(&m2));
        let mixed = Matrix::block_diag(
            f,
            &[m2.clone(), Matrix::diag(f, &[f.from_i64(3), f.parse("1/3").unwrap()]), Matrix::companion(&qpoly("x^2 + 1"))],
        );
        assert!(construct_invariant_form(&mixed, Symmetry::Skew).unwrap().holds_for(&mixed));
        assert!(matches!(
            construct_invariant_form(&mixed, Symmetry::Symmetric),
            Err(Error::DecisionFalse(_))
        ));
    }

    #[test]
    fn infinitesimal_construction() {
        let f = q();
        let s = Matrix::diag(f, &[f.from_i64(1), f.from_i64(-1)]);
        let c = construct_infinitesimal_form(&s, Symmetry::Symmetric).unwrap();
        assert_eq!(c.gram(), &Matrix::from_i64(f, &[&[0, 1], &[1, 0]]));
        let shift = lower_shift(f, 3);
        let c = construct_infinitesimal_form(&shift, Symmetry::Symmetric).unwrap();
        assert_eq!(c.gram(), &Matrix::from_i64(f, &[&[0, 0, 1], &[0, -1, 0], &[1, 0, 0]]));
        let rot = Matrix::companion(&qpoly("x^2 + 1"));
        for sym in [Symmetry::Symmetric, Symmetry::Skew] {
            assert!(construct_infinitesimal_form(&rot, sym).unwrap().holds_for(&rot));
        }
        let r = decide_and_construct(&rot, Symmetry::Skew, Setting::Infinitesimal, &FactorOptions::default()).unwrap();
        assert!(r.witness.is_some());
    }
}
