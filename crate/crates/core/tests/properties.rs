use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use invform::arith::{Field, Scalar};
use invform::canonical::elementary_divisors;
use invform::certificate::Symmetry;
use invform::corpus::{conjugate, random_instance, random_invertible, Flavor};
use invform::decision::{decide_infinitesimal_form, decide_invariant_form};
use invform::factor::{factor, FactorOptions};
use invform::isometry::witt_index;
use invform::linalg::Matrix;
use invform::poly::{additive_dual_poly, dual_poly, Poly};

const P: u64 = 101;

fn field_strategy() -> impl Strategy<Value = Field> {
    prop_oneof![Just(Field::Rationals), Just(Field::Prime(P)), Just(Field::Prime(7))]
}

fn scalar(field: Field, v: i64, d: i64) -> Scalar {
    match field {
        Field::Rationals => field.parse(&format!("{v}/{d}")).unwrap(),
        Field::Prime(_) => field.from_i64(v),
    }
}

fn poly_from(field: Field, coeffs: &[i64]) -> Poly {
    Poly::new(field, coeffs.iter().map(|&c| field.from_i64(c)).collect()).unwrap()
}

fn matrix_from(field: Field, n: usize, entries: &[i64]) -> Matrix {
    let rows = (0..n).map(|i| (0..n).map(|j| field.from_i64(entries[i * n + j])).collect()).collect();
    Matrix::from_rows(field, rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(field in field_strategy(), a in -50i64..50, b in -50i64..50, c in -50i64..50, d in 1i64..9) {
        let (a, b, c) = (scalar(field, a, d), scalar(field, b, 1), scalar(field, c, d + 1));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn dual_involutions(field in field_strategy(), mut coeffs in prop::collection::vec(-20i64..20, 1..9)) {
        coeffs.push(1);
        let f = poly_from(field, &coeffs);
        prop_assert_eq!(additive_dual_poly(&additive_dual_poly(&f)), f.clone());
        if !f.coeff(0).is_zero() {
            prop_assert_eq!(dual_poly(&dual_poly(&f).unwrap()).unwrap(), f);
        }
    }

    #[test]
    fn factorization_reconstructs(field in field_strategy(), coeffs in prop::collection::vec(-9i64..9, 2..8)) {
        let f = poly_from(field, &coeffs);
        prop_assume!(!f.is_zero() && f.deg() >= 1);
        let fac = factor(&f).unwrap();
        prop_assert_eq!(fac.reconstruct(), f);
        for (p, _) in &fac.factors {
            prop_assert!(factor(p).unwrap().is_irreducible());
        }
    }

    #[test]
    fn determinant_is_multiplicative(field in field_strategy(), n in 1usize..5,
                                     a in prop::collection::vec(-6i64..6, 16), b in prop::collection::vec(-6i64..6, 16)) {
        let (a, b) = (matrix_from(field, n, &a), matrix_from(field, n, &b));
        prop_assert_eq!((&a * &b).det().unwrap(), &a.det().unwrap() * &b.det().unwrap());
    }

    #[test]
    fn cayley_hamilton(field in field_strategy(), n in 1usize..6, entries in prop::collection::vec(-6i64..6, 25)) {
        let m = matrix_from(field, n, &entries);
        let chi = m.char_poly().unwrap();
        prop_assert_eq!(chi.deg(), n);
        prop_assert!(m.eval_poly(&chi).is_zero());
    }

    #[test]
    fn divisors_and_decisions_survive_conjugation(seed in any::<u64>(), additive in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = Field::Prime(P);
        let flavor = if additive { Flavor::Additive } else { Flavor::Multiplicative };
        let inst = random_instance(&mut rng, 0, field, flavor, 5);
        let g = random_invertible(&mut rng, field, inst.matrix.rows());
        let other = conjugate(&inst.matrix, &g);
        let opts = FactorOptions::default();
        prop_assert_eq!(elementary_divisors(&inst.matrix, &opts).unwrap(), elementary_divisors(&other, &opts).unwrap());
        let invertible = !inst.matrix.det().unwrap().is_zero();
        for sym in [Symmetry::Symmetric, Symmetry::Skew] {
            if invertible {
                prop_assert_eq!(
                    decide_invariant_form(&inst.matrix, sym).unwrap().exists,
                    decide_invariant_form(&other, sym).unwrap().exists
                );
            }
            prop_assert_eq!(
                decide_infinitesimal_form(&inst.matrix, sym).unwrap().exists,
                decide_infinitesimal_form(&other, sym).unwrap().exists
            );
        }
    }

    #[test]
    fn witt_index_matches_closed_form(n in 1usize..6, diag in prop::collection::vec(1i64..(P as i64), 6), seed in any::<u64>()) {
        let field = Field::Prime(P);
        let entries: Vec<Scalar> = diag[..n].iter().map(|&d| field.from_i64(d)).collect();
        let b = Matrix::diag(field, &entries);
        let det = entries.iter().fold(field.one(), |acc, d| &acc * d);
        // Over F_p: l = ⌊n/2⌋, minus one when n is even and (−1)^{n/2}·det is a non-square.
        let expected = if n % 2 == 1 {
            n / 2
        } else {
            let sign = field.from_i64(if (n / 2) % 2 == 0 { 1 } else { -1 });
            if (&sign * &det).is_square() == Some(true) { n / 2 } else { n / 2 - 1 }
        };
        prop_assert_eq!(witt_index(&b).unwrap(), expected);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_invertible(&mut rng, field, n);
        let moved = &(&g.transpose() * &b) * &g;
        prop_assert_eq!(witt_index(&moved).unwrap(), expected);
    }
}

#[test]
fn skew_witt_index_is_half_the_dimension() {
    let field = Field::Prime(P);
    let b = Matrix::from_i64(field, &[&[0, 1, 0, 0], &[-1, 0, 0, 0], &[0, 0, 0, 3], &[0, 0, -3, 0]]);
    assert_eq!(witt_index(&b).unwrap(), 2);
}
