use kdf_core::frobenius::solution_pair_f1211;
use kdf_core::pde::{
    conjugate_system, euler_system, expanded_system_f0211, expanded_system_f1211, monomial_action,
    operator_equivalence, residual, substituted_system_f1211, system_differences, Constant,
    SeriesFunction, SystemParams,
};
use kdf_core::poly::{rational, LaurentPoly};
use kdf_core::special::NAMED_POLICY;
use kdf_core::{EvalPoint, ParamsF0211, ParamsF1211};
use num_rational::BigRational;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    rational(n, d)
}

fn rat() -> impl Strategy<Value = BigRational> {
    (-40i64..40, 1i64..12).prop_map(|(n, d)| q(n, d))
}

fn f1211_rat() -> impl Strategy<Value = ParamsF1211<BigRational>> {
    (rat(), rat(), rat(), rat(), rat(), rat(), rat())
        .prop_map(|(a, b, c, d, e, f, g)| ParamsF1211 { a, b, c, d, e, f, g })
}

fn f0211_rat() -> impl Strategy<Value = ParamsF0211<BigRational>> {
    (rat(), rat(), rat(), rat(), rat()).prop_map(|(b, c, d, e, g)| ParamsF0211 { b, c, d, e, g })
}

fn monomials(n: i64) -> impl Iterator<Item = (i64, i64)> {
    (1..=n).flat_map(move |r| (1..=n).map(move |s| (r, s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn f0211_forms_agree(p in f0211_rat()) {
        let mism = operator_equivalence(&SystemParams::F0211(p), monomials(6)).unwrap();
        prop_assert!(mism.is_empty(), "{:?}", mism.first());
    }

    #[test]
    fn f1211_forms_agree(p in f1211_rat()) {
        let mism = operator_equivalence(&SystemParams::F1211(p), monomials(6)).unwrap();
        prop_assert!(mism.is_empty(), "{:?}", mism.first());
    }

    #[test]
    fn substitution_at_zero_is_identity(p in f1211_rat()) {
        let zero = q(0, 1);
        let sub = substituted_system_f1211(&p, &zero, &zero);
        prop_assert!(system_differences(&sub, &expanded_system_f1211(&p)).is_empty());
        let a = monomial_action(&sub, 3, 2).unwrap();
        let b = monomial_action(&expanded_system_f1211(&p), 3, 2).unwrap();
        prop_assert_eq!(a, b);
    }

    /// The first substituted equation agrees with conjugation everywhere. The
    /// second differs in exactly one place: the `y^{-1} ω` coefficient, by
    /// `−ντ(eg + fg + g − 1)`.
    #[test]
    fn substituted_system_against_conjugation(p in f1211_rat(), tau in rat(), nu in rat()) {
        let written = substituted_system_f1211(&p, &tau, &nu);
        let derived = conjugate_system(&expanded_system_f1211(&p), &tau, &nu);
        let diffs = system_differences(&written, &derived);
        let one = q(1, 1);
        let gap = -(nu.clone() * tau.clone()
            * (p.e.clone() * p.g.clone() + p.f.clone() * p.g.clone() + p.g.clone() - one));
        if gap == q(0, 1) {
            prop_assert!(diffs.is_empty());
        } else {
            prop_assert_eq!(diffs.len(), 1);
            let m = &diffs[0];
            prop_assert_eq!(m.equation, 1);
            prop_assert_eq!(m.order, Some((0, 0)));
            prop_assert_eq!(m.powers, (0, -1));
            prop_assert_eq!(m.left.clone() - m.right.clone(), gap);
        }
    }
}

#[test]
fn coefficient_gap_vanishes_at_indicial_roots() {
    let p = ParamsF1211 {
        a: q(1, 3),
        b: q(2, 5),
        c: q(-7, 4),
        d: q(5, 2),
        e: q(3, 7),
        f: q(11, 6),
        g: q(2, 9),
    };
    let zero = q(0, 1);
    let nu = q(1, 1) - p.g.clone();
    let written = substituted_system_f1211(&p, &zero, &nu);
    let derived = conjugate_system(&expanded_system_f1211(&p), &zero, &nu);
    assert!(system_differences(&written, &derived).is_empty());
}

#[test]
fn conjugation_at_second_root_gives_shifted_system() {
    let p = ParamsF1211 {
        a: q(1, 3),
        b: q(2, 5),
        c: q(-7, 4),
        d: q(5, 2),
        e: q(3, 7),
        f: q(11, 6),
        g: q(2, 9),
    };
    let one = q(1, 1);
    let s = one.clone() - p.g.clone();
    let shifted = ParamsF1211 {
        a: s.clone() + p.a.clone(),
        b: p.b.clone(),
        c: p.c.clone(),
        d: s.clone() + p.d.clone(),
        e: s.clone() + p.e.clone(),
        f: s.clone() + p.f.clone(),
        g: one.clone() + s.clone(),
    };
    let conj = conjugate_system(&expanded_system_f1211(&p), &q(0, 1), &s);
    assert!(!conj.has_negative_powers());
    let diffs = system_differences(&conj, &expanded_system_f1211(&shifted));
    assert!(diffs.is_empty(), "{}", diffs.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"));
}

#[test]
fn second_form_of_the_f1211_x_coefficient() {
    // (b+1)(a+c+1) + ac and a(b+c+1) + (b+1)(c+1) are the same polynomial.
    let (a, b, c) = (q(3, 11), q(-5, 7), q(13, 4));
    let one = q(1, 1);
    let left = (b.clone() + one.clone()) * (a.clone() + c.clone() + one.clone()) + a.clone() * c.clone();
    let right = a.clone() * (b.clone() + c.clone() + one.clone()) + (b + one.clone()) * (c + one);
    assert_eq!(left, right);
}

#[test]
fn euler_form_on_constants() {
    let p = ParamsF0211 {
        b: q(1, 2),
        c: q(3, 4),
        d: q(1, 3),
        e: q(5, 2),
        g: q(7, 5),
    };
    let act = monomial_action(&euler_system(&SystemParams::F0211(p.clone())), 0, 0).unwrap();
    // (1+θx) annihilates x^{-1}, so only −bc survives.
    assert_eq!(act[0], LaurentPoly::constant(-(p.b.clone() * p.c.clone())));
    assert_eq!(act[1], LaurentPoly::constant(-p.d.clone()));
}

#[test]
fn constant_function_with_vanishing_constants() {
    let p = ParamsF1211 {
        a: 0.3,
        b: 0.0,
        c: 0.6,
        d: 0.0,
        e: 1.2,
        f: 1.7,
        g: 0.4,
    };
    let r = residual(&expanded_system_f1211(&p), &Constant(1.0), EvalPoint { x: 0.2, y: 0.3 }).unwrap();
    assert_eq!(r.values, vec![0.0, 0.0]);
}

#[test]
fn series_residual_f0211() {
    let p = ParamsF0211 {
        b: 0.3,
        c: 0.7,
        d: 0.5,
        e: 1.2,
        g: 1.6,
    };
    let u = SeriesFunction {
        shape: p.shape().unwrap(),
        policy: NAMED_POLICY,
    };
    let r = residual(&expanded_system_f0211(&p), &u, EvalPoint { x: 0.2, y: 0.3 }).unwrap();
    assert!(r.max_relative() < 1e-9, "{r:?}");
}

#[test]
fn second_solution_residual_f1211() {
    let p = ParamsF1211 {
        a: 0.3,
        b: 0.7,
        c: 0.3,
        d: 0.7,
        e: 1.2,
        f: 1.7,
        g: 0.4,
    };
    let pair = solution_pair_f1211(&p).unwrap();
    let u2 = pair.second.unwrap();
    let r = residual(&expanded_system_f1211(&p), &u2.with_policy(NAMED_POLICY), EvalPoint { x: 0.15, y: 0.25 })
        .unwrap();
    assert!(r.max_relative() < 1e-8, "{r:?}");
    // the written-out substituted system, evaluated on the series factor alone
    let nu = u2.exponents.nu;
    let sub = substituted_system_f1211(&p, &0.0, &nu);
    let omega = SeriesFunction {
        shape: u2.shape.clone(),
        policy: NAMED_POLICY,
    };
    let r = residual(&sub, &omega, EvalPoint { x: 0.15, y: 0.25 }).unwrap();
    assert!(r.max_relative() < 1e-8, "{r:?}");
}

#[test]
fn negative_powers_need_nonzero_point() {
    let p = ParamsF1211 {
        a: 0.3,
        b: 0.7,
        c: 0.3,
        d: 0.7,
        e: 1.2,
        f: 1.7,
        g: 0.4,
    };
    let sub = substituted_system_f1211(&p, &0.5, &0.6);
    assert!(residual(&sub, &Constant(1.0), EvalPoint { x: 0.0, y: 0.3 }).is_err());
}
