//! End-to-end acceptance run. Prints one `[N] name: PASS|FAIL` line per
//! criterion and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use invform::arith::{Field, Scalar};
use invform::certificate::{Setting, Symmetry};
use invform::construction::construct_invariant_form;
use invform::corpus::{conjugate, jordan_type_matrix, random_instance, random_invertible, random_scalar, Flavor};
use invform::decision::{decide_invariant_form, decide_real};
use invform::isometry::{level_analysis, orthogonal_decomposition, BoundCase, SummandKind};
use invform::linalg::Matrix;
use invform::oracle::brute_force_reality;
use invform::poly::{additive_dual_poly, dual_poly, substitute_y_eq_x_plus_inv, Poly};
use invform::selftest::{run_selftest, SelftestOptions, SelftestReport};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn oracle_agreement(report: &SelftestReport, seconds: f64) -> Outcome {
    let s = &report.summary;
    let covered = report.instances.iter().all(|i| {
        let settings = i.cases.iter().filter(|c| c.setting == Setting::Infinitesimal).count();
        settings == 2
    });
    outcome(
        s.instances == 500 && s.disagreements == 0 && s.errors == 0 && covered && seconds <= 120.0,
        format!("{} instances, {}/{} cases agree, {seconds:.1}s", s.instances, s.agreements, s.cases),
    )
}

fn witness_completeness(report: &SelftestReport) -> Outcome {
    let s = &report.summary;
    outcome(
        s.positive_cases > 0 && s.witnesses_verified == s.positive_cases,
        format!("{}/{} witnesses verified", s.witnesses_verified, s.positive_cases),
    )
}

fn parity_cases() -> Outcome {
    let mut failures = Vec::new();
    for field in [Field::Rationals, Field::Prime(101)] {
        let j2 = jordan_type_matrix(field, &[2], 1);
        let j3 = jordan_type_matrix(field, &[3], 1);
        let j22 = jordan_type_matrix(field, &[2, 2], 1);
        let m2 = jordan_type_matrix(field, &[2], -1);
        let exists = |m: &Matrix, s: Symmetry| decide_invariant_form(m, s).map(|r| r.exists).unwrap_or(false);
        let verified = |m: &Matrix, s: Symmetry| construct_invariant_form(m, s).is_ok_and(|c| c.holds_for(m));
        let checks = [
            ("J2(1) symmetric no", !exists(&j2, Symmetry::Symmetric)),
            ("J2(1) skew yes", exists(&j2, Symmetry::Skew) && verified(&j2, Symmetry::Skew)),
            ("J3(1) symmetric yes", exists(&j3, Symmetry::Symmetric) && verified(&j3, Symmetry::Symmetric)),
            ("J2(-1) symmetric no", !exists(&m2, Symmetry::Symmetric)),
            ("J2(-1) skew yes", exists(&m2, Symmetry::Skew) && verified(&m2, Symmetry::Skew)),
            (
                "J2(1)+J2(1) symmetric standard pair",
                exists(&j22, Symmetry::Symmetric)
                    && construct_invariant_form(&j22, Symmetry::Symmetric).is_ok_and(|c| {
                        c.holds_for(&j22)
                            && orthogonal_decomposition(&j22, &c).is_ok_and(|r| {
                                r.check(&j22, c.gram(), Symmetry::Symmetric).all()
                                    && r.summands.len() == 1
                                    && r.summands[0].kind == SummandKind::StandardPair
                            })
                    }),
            ),
        ];
        for (name, ok) in checks {
            if !ok {
                failures.push(format!("{name} over {field}"));
            }
        }
    }
    outcome(failures.is_empty(), if failures.is_empty() { "12/12 pinned".to_string() } else { failures.join("; ") })
}

fn random_monic(rng: &mut ChaCha8Rng, field: Field, deg: usize) -> Poly {
    let mut coeffs: Vec<Scalar> = (0..deg).map(|_| random_scalar(rng, field)).collect();
    coeffs.push(field.one());
    Poly::new(field, coeffs).expect("same field")
}

/// `x^m · q(x + 1/x)` as a polynomial.
fn expand(q: &Poly, m: usize) -> Poly {
    let field = q.field();
    let x = Poly::x(field);
    let x2_plus_1 = &(&x * &x) + &Poly::one(field);
    let mut acc = Poly::zero(field);
    for (i, c) in q.coeffs().iter().enumerate() {
        let term = &x.pow((m - i) as u32) * &x2_plus_1.pow(i as u32);
        acc = &acc + &term.scale(c);
    }
    acc
}

fn dual_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut involutions = 0;
    for i in 0..200 {
        let field = [Field::Rationals, Field::Prime(101), Field::Prime(257)][i % 3];
        let deg = rng.gen_range(1..=8);
        let mut f = random_monic(&mut rng, field, deg);
        while f.coeff(0).is_zero() {
            f = random_monic(&mut rng, field, deg);
        }
        let star = dual_poly(&dual_poly(&f).unwrap()).unwrap();
        let minus = additive_dual_poly(&additive_dual_poly(&f));
        involutions += usize::from(star == f && minus == f);
    }
    let mut round_trips = 0;
    let mut total = 0;
    for field in [Field::Rationals, Field::Prime(101)] {
        for deg in (2..=8).step_by(2) {
            for _ in 0..10 {
                let m = deg / 2;
                // Palindromic monic of degree 2m.
                let half: Vec<Scalar> = (0..m).map(|_| random_scalar(&mut rng, field)).collect();
                let mut coeffs = vec![field.one()];
                coeffs.extend(half[1..].iter().cloned());
                coeffs.push(random_scalar(&mut rng, field));
                coeffs.extend(half[1..].iter().rev().cloned());
                coeffs.push(field.one());
                let p = Poly::new(field, coeffs).unwrap();
                total += 1;
                if let Ok(q) = substitute_y_eq_x_plus_inv(&p) {
                    round_trips += usize::from(q.deg() == m && expand(&q, m) == p);
                }
            }
        }
    }
    outcome(
        involutions == 200 && round_trips == total,
        format!("{involutions}/200 involutions, {round_trips}/{total} round trips"),
    )
}

fn level_bounds(report: &SelftestReport) -> Outcome {
    let levels: Vec<_> = report.unipotent.iter().filter_map(|u| u.level.as_ref()).collect();
    let satisfied = levels.iter().filter(|l| l.bound_satisfied).count();
    let missing = report
        .unipotent
        .iter()
        .filter(|u| u.admits && u.eigenvalue == 1 && u.level.is_none())
        .count();
    let field = Field::Prime(101);
    let j3 = jordan_type_matrix(field, &[3], 1);
    let terminal = construct_invariant_form(&j3, Symmetry::Symmetric)
        .and_then(|c| level_analysis(&j3, &c))
        .is_ok_and(|l| l.level == 3 && l.witt_index == 1 && l.bound_case == BoundCase::GeneralOdd && l.bound_satisfied);
    outcome(
        !levels.is_empty() && satisfied == levels.len() && missing == 0 && terminal,
        format!("{satisfied}/{} bounds hold, terminal J3(1) k=3 l=1: {terminal}", levels.len()),
    )
}

fn orthogonal(report: &SelftestReport) -> Outcome {
    let admitting = report.unipotent.iter().filter(|u| u.admits).count();
    let ok = report.unipotent.iter().filter(|u| u.orthogonal_ok == Some(true)).count();
    let pairs = report
        .unipotent
        .iter()
        .flat_map(|u| &u.summand_kinds)
        .filter(|k| **k == SummandKind::StandardPair)
        .count();
    outcome(
        admitting > 0 && ok == admitting && pairs > 0,
        format!("{ok}/{admitting} decompositions verified, {pairs} standard pairs"),
    )
}

fn all_matrices(p: u64) -> Vec<Matrix> {
    let field = Field::Prime(p);
    let mut out = Vec::new();
    for index in 0..p.pow(4) {
        let e: Vec<i64> = (0..4).map(|i| ((index / p.pow(i)) % p) as i64).collect();
        let m = Matrix::from_i64(field, &[&[e[0], e[1]], &[e[2], e[3]]]);
        if !m.det().unwrap().is_zero() {
            out.push(m);
        }
    }
    out
}

fn reality() -> Outcome {
    let mut agree = 0;
    let mut total = 0;
    for p in [2, 3] {
        for m in all_matrices(p) {
            total += 1;
            let fast = decide_real(&m).map(|r| r.is_real);
            let slow = brute_force_reality(&m);
            agree += usize::from(matches!((fast, slow), (Ok(a), Ok(b)) if a == b));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut invariant = 0;
    for id in 0..100 {
        // Structured divisor data most of the time, a dense random matrix otherwise.
        let t = if id % 4 == 3 {
            {
            let n = rng.gen_range(1..=4);
            random_invertible(&mut rng, Field::Rationals, n)
        }
        } else {
            random_instance(&mut rng, id, Field::Rationals, Flavor::Multiplicative, 4).matrix
        };
        let t = &t;
        let g = random_invertible(&mut rng, Field::Rationals, t.rows());
        let a = decide_real(t).map(|r| r.is_real);
        let b = decide_real(&conjugate(t, &g)).map(|r| r.is_real);
        invariant += usize::from(matches!((a, b), (Ok(x), Ok(y)) if x == y));
    }
    outcome(
        agree == total && total == 54 && invariant == 100,
        format!("{agree}/{total} finite matrices agree, {invariant}/100 rational conjugations invariant"),
    )
}

fn converter(report: &SelftestReport) -> Outcome {
    let cases: Vec<_> = report.instances.iter().flat_map(|i| &i.cases).collect();
    let checked: Vec<_> = cases.iter().filter_map(|c| c.converter_verified.map(|ok| (c.symmetry, ok))).collect();
    let from_sym = checked.iter().filter(|(s, _)| *s == Symmetry::Symmetric).count();
    let from_skew = checked.iter().filter(|(s, _)| *s == Symmetry::Skew).count();
    let ok = checked.iter().filter(|(_, ok)| *ok).count();
    outcome(
        from_sym > 0 && from_skew > 0 && ok == checked.len(),
        format!("{ok}/{} conversions verified ({from_sym} from symmetric, {from_skew} from skew)", checked.len()),
    )
}

fn main() -> ExitCode {
    let opts = SelftestOptions {
        jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..SelftestOptions::default()
    };
    let start = Instant::now();
    let report = run_selftest(&opts);
    let seconds = start.elapsed().as_secs_f64();
    let first_json = report.to_json();

    let mut results: Vec<(&str, Outcome)> = vec![
        ("oracle agreement", oracle_agreement(&report, seconds)),
        ("witness completeness", witness_completeness(&report)),
        ("parity cases", parity_cases()),
        ("dual machinery", dual_algebra()),
        ("level bounds", level_bounds(&report)),
        ("orthogonal decomposition", orthogonal(&report)),
        ("reality", reality()),
        ("converter", converter(&report)),
    ];
    let second_json = run_selftest(&SelftestOptions { jobs: 1, ..opts }).to_json();
    results.push((
        "determinism",
        outcome(first_json == second_json, format!("{} bytes, parallel vs serial run", first_json.len())),
    ));

    let mut all = true;
    for (i, (name, o)) in results.iter().enumerate() {
        all &= o.pass;
        println!("[{}] {name}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
