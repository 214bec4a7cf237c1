//! Invariant bilinear forms of linear maps over ℚ and F_p: decisions from
//! elementary divisors, explicit verified witnesses, reality, and the
//! structure of unipotent isometries.

pub mod arith;
pub mod canonical;
pub mod certificate;
pub mod construction;
pub mod corpus;
pub mod decision;
pub mod error;
pub mod factor;
pub mod isometry;
pub mod linalg;
pub mod oracle;
pub mod poly;
pub mod selftest;
