//! Existence of invariant and infinitesimally invariant non-degenerate forms,
//! read off the elementary divisors, and reality (`T` similar to `T⁻¹`).

use serde::Serialize;

use crate::arith::Field;
use crate::canonical::{elementary_divisors, indecomposable_decomposition, ElementaryDivisor};
use crate::certificate::{FormCertificate, Setting, Symmetry};
use crate::error::{Error, Result};
use crate::factor::FactorOptions;
use crate::linalg::Matrix;
use crate::poly::{additive_dual_poly, dual_poly, Poly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ObstructionKind {
    UnpairedDual,
    BadUnipotentParity,
    OddDimensionSkew,
    UnpairedAdditiveDual,
    BadNilpotentParity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionRecord {
    pub kind: ObstructionKind,
    /// Absent only for [`ObstructionKind::OddDimensionSkew`], which concerns
    /// the whole space.
    pub divisor: Option<ElementaryDivisor>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecisionReport {
    pub symmetry: Symmetry,
    pub setting: Setting,
    pub exists: bool,
    pub obstructions: Vec<ObstructionRecord>,
    pub witness: Option<FormCertificate>,
}

impl DecisionReport {
    fn from_obstructions(symmetry: Symmetry, setting: Setting, obstructions: Vec<ObstructionRecord>) -> Self {
        DecisionReport {
            symmetry,
            setting,
            exists: obstructions.is_empty(),
            obstructions,
            witness: None,
        }
    }

    pub fn has(&self, kind: ObstructionKind) -> bool {
        self.obstructions.iter().any(|o| o.kind == kind)
    }

    /// One-line summary of the obstructions.
    pub fn describe(&self) -> String {
        if self.exists {
            return format!("a non-degenerate {} form exists", self.symmetry.name());
        }
        self.obstructions
            .iter()
            .map(|o| o.detail.clone())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealitySplitting {
    /// Carries a symmetric witness.
    pub symmetric_part: Matrix,
    /// Carries a skew witness.
    pub skew_part: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealityReport {
    pub is_real: bool,
    pub mismatches: Vec<(ElementaryDivisor, Option<ElementaryDivisor>)>,
    pub splitting: Option<RealitySplitting>,
}

/// The decisions need separable irreducibles and `1 ≠ −1`.
pub(crate) fn require_decidable(field: Field, n: usize) -> Result<()> {
    field.require_large(n)?;
    if field.characteristic() == 2 {
        return Err(Error::SmallCharacteristic {
            characteristic: 2,
            dimension: n,
        });
    }
    Ok(())
}

/// Root of a monic linear polynomial.
fn linear_root(p: &Poly) -> Option<crate::arith::Scalar> {
    (p.deg() == 1).then(|| -&p.coeff(0))
}

fn is_plus_minus_one(p: &Poly) -> bool {
    linear_root(p).is_some_and(|c| c.is_one() || (-&c).is_one())
}

fn is_x(p: &Poly) -> bool {
    linear_root(p).is_some_and(|c| c.is_zero())
}

/// Records every divisor whose partner `(partner(p), k)` is missing or has a
/// different multiplicity.
fn pairing_obstructions(
    divisors: &[ElementaryDivisor],
    skip: impl Fn(&Poly) -> bool,
    partner: impl Fn(&Poly) -> Result<Poly>,
    kind: ObstructionKind,
    label: &str,
) -> Result<Vec<ObstructionRecord>> {
    let mut out = Vec::new();
    for d in divisors {
        if skip(&d.p) {
            continue;
        }
        let dual = partner(&d.p)?;
        if dual == d.p {
            continue;
        }
        let found = divisors.iter().find(|e| e.p == dual && e.k == d.k);
        let detail = match found {
            Some(e) if e.multiplicity == d.multiplicity => continue,
            Some(e) => format!(
                "{d} has {label} ({dual})^{} with multiplicity {}, not {}",
                d.k, e.multiplicity, d.multiplicity
            ),
            None => format!("{d} is not {label}-self-dual and ({dual})^{} is absent", d.k),
        };
        out.push(ObstructionRecord {
            kind,
            divisor: Some(d.clone()),
            detail,
        });
    }
    Ok(out)
}

fn odd_dimension(n: usize, symmetry: Symmetry) -> Option<ObstructionRecord> {
    (symmetry == Symmetry::Skew && n % 2 == 1).then(|| ObstructionRecord {
        kind: ObstructionKind::OddDimensionSkew,
        divisor: None,
        detail: format!("skew forms need even dimension, got {n}"),
    })
}

/// Whether a `k`-block on its own supports a form of this symmetry: odd
/// blocks carry symmetric forms, even blocks skew ones.
pub fn block_parity_allows(k: u32, symmetry: Symmetry) -> bool {
    match symmetry {
        Symmetry::Symmetric => k % 2 == 1,
        Symmetry::Skew => k.is_multiple_of(2),
    }
}

pub fn decide_invariant_form(t: &Matrix, symmetry: Symmetry) -> Result<DecisionReport> {
    decide_invariant_form_with(t, symmetry, &FactorOptions::default())
}

pub fn decide_invariant_form_with(t: &Matrix, symmetry: Symmetry, opts: &FactorOptions) -> Result<DecisionReport> {
    let n = t.require_square()?;
    if t.det()?.is_zero() {
        return Err(Error::Singular);
    }
    require_decidable(t.field(), n)?;
    let divisors = elementary_divisors(t, opts)?;
    let mut obstructions = pairing_obstructions(
        &divisors,
        is_plus_minus_one,
        dual_poly,
        ObstructionKind::UnpairedDual,
        "dual",
    )?;
    for d in divisors.iter().filter(|d| is_plus_minus_one(&d.p)) {
        if !block_parity_allows(d.k, symmetry) && d.multiplicity % 2 == 1 {
            obstructions.push(ObstructionRecord {
                kind: ObstructionKind::BadUnipotentParity,
                divisor: Some(d.clone()),
                detail: format!("{d}: exponent {} needs even multiplicity for a {} form", d.k, symmetry.name()),
            });
        }
    }
    obstructions.extend(odd_dimension(n, symmetry));
    Ok(DecisionReport::from_obstructions(symmetry, Setting::Invariant, obstructions))
}

pub fn decide_infinitesimal_form(s: &Matrix, symmetry: Symmetry) -> Result<DecisionReport> {
    decide_infinitesimal_form_with(s, symmetry, &FactorOptions::default())
}

pub fn decide_infinitesimal_form_with(s: &Matrix, symmetry: Symmetry, opts: &FactorOptions) -> Result<DecisionReport> {
    let n = s.require_square()?;
    require_decidable(s.field(), n)?;
    let divisors = elementary_divisors(s, opts)?;
    let mut obstructions = pairing_obstructions(
        &divisors,
        is_x,
        |p| Ok(additive_dual_poly(p)),
        ObstructionKind::UnpairedAdditiveDual,
        "additive dual",
    )?;
    for d in divisors.iter().filter(|d| is_x(&d.p)) {
        if !block_parity_allows(d.k, symmetry) && d.multiplicity % 2 == 1 {
            obstructions.push(ObstructionRecord {
                kind: ObstructionKind::BadNilpotentParity,
                divisor: Some(d.clone()),
                detail: format!("{d}: exponent {} needs even multiplicity for a {} form", d.k, symmetry.name()),
            });
        }
    }
    obstructions.extend(odd_dimension(n, symmetry));
    Ok(DecisionReport::from_obstructions(symmetry, Setting::Infinitesimal, obstructions))
}

pub fn decide_real(t: &Matrix) -> Result<RealityReport> {
    decide_real_with(t, &FactorOptions::default())
}

/// Compares the divisor multisets of `T` and `T⁻¹`. When `T` is real and the
/// characteristic is large, also splits `V` into a part carrying a symmetric
/// form (everything except even `(x∓1)^k` blocks) and a part carrying a skew
/// form (those blocks).
pub fn decide_real_with(t: &Matrix, opts: &FactorOptions) -> Result<RealityReport> {
    let n = t.require_square()?;
    let inv = t.inverse()?;
    let ours = elementary_divisors(t, opts)?;
    let theirs = elementary_divisors(&inv, opts)?;
    let mut mismatches = Vec::new();
    for d in &ours {
        if theirs.contains(d) {
            continue;
        }
        mismatches.push((d.clone(), theirs.iter().find(|e| e.same_power(d)).cloned()));
    }
    for e in &theirs {
        if !ours.iter().any(|d| d.same_power(e)) {
            mismatches.push((e.clone(), None));
        }
    }
    let is_real = mismatches.is_empty();
    let splitting = if is_real && require_decidable(t.field(), n).is_ok() {
        let summands = indecomposable_decomposition(t, opts)?;
        let field = t.field();
        let mut symmetric_part = Matrix::zeros(field, n, 0);
        let mut skew_part = Matrix::zeros(field, n, 0);
        for s in &summands {
            if is_plus_minus_one(&s.divisor.p) && s.divisor.k % 2 == 0 {
                skew_part = skew_part.hstack(&s.basis);
            } else {
                symmetric_part = symmetric_part.hstack(&s.basis);
            }
        }
        Some(RealitySplitting {
            symmetric_part,
            skew_part,
        })
    } else {
        None
    };
    Ok(RealityReport {
        is_real,
        mismatches,
        splitting,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_invariant;

    fn q() -> Field {
        Field::Rationals
    }

    fn j2() -> Matrix {
        Matrix::from_i64(q(), &[&[1, 1], &[0, 1]])
    }

    #[test]
    fn unipotent_parity() {
        let sym = decide_invariant_form(&j2(), Symmetry::Symmetric).unwrap();
        assert!(!sym.exists);
        assert!(sym.has(ObstructionKind::BadUnipotentParity));
        assert!(decide_invariant_form(&j2(), Symmetry::Skew).unwrap().exists);
    }

    #[test]
    fn dual_pairs() {
        let f = q();
        let t = Matrix::diag(f, &[f.from_i64(2), f.parse("1/2").unwrap()]);
        assert!(decide_invariant_form(&t, Symmetry::Symmetric).unwrap().exists);
        assert!(decide_invariant_form(&t, Symmetry::Skew).unwrap().exists);
        let t = Matrix::diag(f, &[f.from_i64(2), f.from_i64(3)]);
        for sym in [Symmetry::Symmetric, Symmetry::Skew] {
            let r = decide_invariant_form(&t, sym).unwrap();
            assert!(!r.exists);
            let p2 = Poly::parse(f, "x - 2").unwrap();
            assert!(r
                .obstructions
                .iter()
                .any(|o| o.kind == ObstructionKind::UnpairedDual && o.divisor.as_ref().unwrap().p == p2));
        }
    }

    #[test]
    fn exhaustive_obstructions() {
        let f = q();
        let t = Matrix::block_diag(f, &[j2(), Matrix::diag(f, &[f.from_i64(5)])]);
        let r = decide_invariant_form(&t, Symmetry::Symmetric).unwrap();
        assert!(r.has(ObstructionKind::BadUnipotentParity));
        assert!(r.has(ObstructionKind::UnpairedDual));
        let r = decide_invariant_form(&t, Symmetry::Skew).unwrap();
        assert!(r.has(ObstructionKind::OddDimensionSkew));
        assert!(r.has(ObstructionKind::UnpairedDual));
    }

    #[test]
    fn singular_and_small_characteristic() {
        let f = q();
        let s = Matrix::from_i64(f, &[&[0, 1], &[0, 0]]);
        assert_eq!(decide_invariant_form(&s, Symmetry::Skew), Err(Error::Singular));
        let f3 = Field::Prime(3);
        assert!(matches!(
            decide_invariant_form(&Matrix::identity(f3, 3), Symmetry::Symmetric),
            Err(Error::SmallCharacteristic { .. })
        ));
        assert!(matches!(
            decide_invariant_form(&Matrix::identity(Field::Prime(2), 1), Symmetry::Symmetric),
            Err(Error::SmallCharacteristic { .. })
        ));
    }

    #[test]
    fn infinitesimal_examples() {
        let f = q();
        let s = Matrix::from_i64(f, &[&[0, 0], &[1, 0]]);
        let r = decide_infinitesimal_form(&s, Symmetry::Symmetric).unwrap();
        assert!(!r.exists && r.has(ObstructionKind::BadNilpotentParity));
        assert!(decide_infinitesimal_form(&s, Symmetry::Skew).unwrap().exists);
        let s = Matrix::diag(f, &[f.from_i64(1), f.from_i64(-1)]);
        assert!(decide_infinitesimal_form(&s, Symmetry::Symmetric).unwrap().exists);
        assert!(decide_infinitesimal_form(&s, Symmetry::Skew).unwrap().exists);
        let s = Matrix::diag(f, &[f.from_i64(1), f.from_i64(2)]);
        for sym in [Symmetry::Symmetric, Symmetry::Skew] {
            let r = decide_infinitesimal_form(&s, sym).unwrap();
            assert!(!r.exists && r.has(ObstructionKind::UnpairedAdditiveDual));
        }
    }

    #[test]
    fn reality_examples() {
        let f = q();
        let c = Matrix::companion(&Poly::parse(f, "x^2 - 3*x + 1").unwrap());
        assert!(decide_real(&c).unwrap().is_real);
        let r = decide_real(&Matrix::scalar(&f.from_i64(2), 2)).unwrap();
        assert!(!r.is_real);
        assert!(r.mismatches.iter().any(|(d, other)| d.p == Poly::parse(f, "x - 2").unwrap() && other.is_none()));
        let r = decide_real(&j2()).unwrap();
        assert!(r.is_real);
        let split = r.splitting.unwrap();
        assert_eq!(split.symmetric_part.cols(), 0);
        assert_eq!(split.skew_part.cols(), 2);
        assert!(is_invariant(&j2(), &split.skew_part));
    }
}
