//! Gram-matrix certificates and their verifier.
//!
//! The verifier uses nothing but matrix products, transposes and a
//! determinant, so it stays independent of every constructor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Symmetric,
    Skew,
}

impl Symmetry {
    /// `ε` in `B = ε Bᵗ`.
    pub fn sign(self) -> i64 {
        match self {
            Symmetry::Symmetric => 1,
            Symmetry::Skew => -1,
        }
    }

    pub fn opposite(self) -> Symmetry {
        match self {
            Symmetry::Symmetric => Symmetry::Skew,
            Symmetry::Skew => Symmetry::Symmetric,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Symmetry::Symmetric => "symmetric",
            Symmetry::Skew => "skew",
        }
    }

    pub fn from_sign(sign: i64) -> Symmetry {
        if sign >= 0 {
            Symmetry::Symmetric
        } else {
            Symmetry::Skew
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    /// `TᵗBT = B`.
    Invariant,
    /// `SᵗB + BS = 0`.
    Infinitesimal,
}

impl Setting {
    pub fn name(self) -> &'static str {
        match self {
            Setting::Invariant => "invariant",
            Setting::Infinitesimal => "infinitesimal",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    pub invariance: bool,
    pub symmetry_ok: bool,
    pub nondegenerate: bool,
}

impl Checks {
    pub fn all(&self) -> bool {
        self.invariance && self.symmetry_ok && self.nondegenerate
    }
}

/// How one block of a certificate was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Hyperbolic,
    UnipotentBlock,
    NilpotentBlock,
    TraceNorm,
    TraceNormFallback,
    SelfDualBlock,
    Converter,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    /// Human-readable label of the block, e.g. `"(x - 1)^2 x2"`.
    pub block: String,
    pub dim: usize,
    pub routes: Vec<Route>,
}

/// A Gram matrix whose checks all passed when it was created.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormCertificate {
    #[serde(rename = "gram")]
    b: Matrix,
    symmetry: Symmetry,
    setting: Setting,
    checks: Checks,
    provenance: Vec<Provenance>,
}

impl FormCertificate {
    /// Recomputes all checks and refuses to build a certificate unless they
    /// all hold.
    pub fn new(
        op: &Matrix,
        b: Matrix,
        symmetry: Symmetry,
        setting: Setting,
        provenance: Vec<Provenance>,
    ) -> Result<FormCertificate> {
        let checks = verify_form(op, &b, symmetry, setting)?;
        if !checks.all() {
            return Err(Error::UnverifiedForm(format!("{checks:?}")));
        }
        Ok(FormCertificate {
            b,
            symmetry,
            setting,
            checks,
            provenance,
        })
    }

    pub fn gram(&self) -> &Matrix {
        &self.b
    }

    pub fn into_gram(self) -> Matrix {
        self.b
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn checks(&self) -> Checks {
        self.checks
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    /// Re-runs the verifier against `op`, e.g. after deserialization.
    pub fn holds_for(&self, op: &Matrix) -> bool {
        verify_form(op, &self.b, self.symmetry, self.setting).is_ok_and(|c| c.all())
    }
}

/// Checks invariance, symmetry type and non-degeneracy of `b` for `op`.
pub fn verify_form(op: &Matrix, b: &Matrix, symmetry: Symmetry, setting: Setting) -> Result<Checks> {
    let n = op.require_square()?;
    if b.rows() != n || b.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} gram for a {n}x{n} map",
            b.rows(),
            b.cols()
        )));
    }
    if b.field() != op.field() {
        return Err(Error::MixedFields(format!("gram over {}, map over {}", b.field(), op.field())));
    }
    let opt = op.transpose();
    let invariance = match setting {
        Setting::Invariant => &(&opt * b) * op == *b,
        Setting::Infinitesimal => (&(&opt * b) + &(b * op)).is_zero(),
    };
    let bt = b.transpose();
    let symmetry_ok = match symmetry {
        Symmetry::Symmetric => bt == *b,
        Symmetry::Skew => (&bt + b).is_zero(),
    };
    let nondegenerate = !b.det()?.is_zero();
    Ok(Checks {
        invariance,
        symmetry_ok,
        nondegenerate,
    })
}
