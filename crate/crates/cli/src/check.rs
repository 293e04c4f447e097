//! Property suite behind `kdf check`.
//!
//! Every check draws from its own ChaCha stream seeded with `seed + index`, so
//! one check's draws never shift another's.

use kdf_core::cauchy::{jacobi_rule, solve_point, verify_trace, CauchyProblem, CharacteristicPoint, Polynomial};
use kdf_core::frobenius::{
    indicial_residual, indicial_roots, independence_check, solution_pair_f0211, solution_pair_f1211,
};
use kdf_core::gamma::ln_gamma;
use kdf_core::pde::{expanded_system_f0211, expanded_system_f1211, operator_equivalence, residual, SystemParams};
use kdf_core::poly::rational;
use kdf_core::series::{kdf_eval, kdf_eval_derivative};
use kdf_core::special::{f0211, f1211, xi2, NAMED_POLICY};
use kdf_core::{EvalPoint, KdFShape, ParamsF0211, ParamsF1211, ParamsXi2, TruncationPolicy};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::canonical::num;
use crate::job::Settings;

pub const NAMES: [&str; 10] = [
    "origin",
    "reductions",
    "derivatives",
    "equivalence",
    "residuals",
    "indicial",
    "independence",
    "cauchy_constant",
    "cauchy_trace",
    "quadrature",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "pass": self.pass,
            "worst": num(self.worst),
            "tolerance": num(self.tolerance),
            "detail": self.detail,
        })
    }
}

fn result(name: &'static str, worst: f64, tolerance: f64, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name,
        pass: worst <= tolerance,
        worst,
        tolerance,
        detail: detail.into(),
    }
}

fn failed(name: &'static str, tolerance: f64, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name,
        pass: false,
        worst: f64::INFINITY,
        tolerance,
        detail: detail.into(),
    }
}

pub fn run_checks(names: &[&str], settings: &Settings) -> Vec<CheckResult> {
    names
        .iter()
        .map(|&name| {
            let index = NAMES.iter().position(|n| *n == name).expect("known check");
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed.wrapping_add(index as u64));
            match name {
                "origin" => origin(&mut rng),
                "reductions" => reductions(&mut rng),
                "derivatives" => derivatives(&mut rng),
                "equivalence" => equivalence(&mut rng),
                "residuals" => residuals(&mut rng),
                "indicial" => indicial(&mut rng),
                "independence" => independence(&mut rng),
                "cauchy_constant" => cauchy_constant(settings.nodes),
                "cauchy_trace" => cauchy_trace(settings.nodes),
                _ => quadrature(),
            }
        })
        .collect()
}

fn pt(x: f64, y: f64) -> EvalPoint {
    EvalPoint { x, y }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// One-variable `pFq` by its term ratio; only used for `|x| ≤ 1/2`.
fn pfq(upper: &[f64], lower: &[f64], x: f64) -> f64 {
    let (mut sum, mut term) = (1.0, 1.0);
    for n in 0..2000 {
        let n = n as f64;
        let num: f64 = upper.iter().map(|a| a + n).product();
        let den: f64 = lower.iter().map(|b| b + n).product();
        term *= num / den * x / (n + 1.0);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn origin(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut list = |lo: f64, hi: f64| -> Vec<f64> {
        let n = rng.random_range(0..=3);
        (0..n).map(|_| rng.random_range(lo..hi)).collect()
    };
    let mut bad = 0;
    for _ in 0..50 {
        let shape = KdFShape::new(
            list(-3.0, 3.0),
            list(-3.0, 3.0),
            list(-3.0, 3.0),
            list(0.1, 4.0),
            list(0.1, 4.0),
            list(0.1, 4.0),
        )
        .expect("list lengths within bounds");
        if !matches!(kdf_eval(&shape, pt(0.0, 0.0), &TruncationPolicy::default()), Ok(r) if r.value == 1.0) {
            bad += 1;
        }
    }
    result("origin", bad as f64, 0.0, format!("{bad} of 50 random shapes differ from 1 at the origin"))
}

fn reductions(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let p0 = ParamsF0211 {
            b: rng.random_range(0.1..2.0),
            c: rng.random_range(0.1..2.0),
            d: rng.random_range(0.1..2.0),
            e: rng.random_range(0.5..3.0),
            g: rng.random_range(0.5..3.0),
        };
        let p1 = ParamsF1211 {
            a: rng.random_range(0.1..2.0),
            b: rng.random_range(0.1..2.0),
            c: rng.random_range(0.1..2.0),
            d: rng.random_range(0.1..2.0),
            e: rng.random_range(0.5..3.0),
            f: rng.random_range(0.5..3.0),
            g: rng.random_range(0.5..3.0),
        };
        for _ in 0..5 {
            let x = rng.random_range(-0.5..0.5);
            let y = rng.random_range(-2.0..2.0);
            let (Ok(a), Ok(b)) = (f0211(&p0, pt(x, 0.0)), f1211(&p1, pt(x, 0.0))) else {
                return failed("reductions", 1e-12, format!("evaluation failed at x = {x}"));
            };
            worst = worst
                .max(rel(a.value, pfq(&[p0.b, p0.c], &[p0.e], x)))
                .max(rel(b.value, pfq(&[p1.a, p1.b, p1.c], &[p1.e, p1.f], x)));
            let q = ParamsF0211 { d: p0.g, ..p0.clone() };
            let h = ParamsXi2 { b: q.b, c: q.c, e: q.e };
            let (Ok(u), Ok(v)) = (f0211(&q, pt(x, y)), xi2(&h, pt(x, y))) else {
                return failed("reductions", 1e-12, format!("evaluation failed at ({x}, {y})"));
            };
            worst = worst.max(rel(u.value, v.value));
        }
    }
    result("reductions", worst, 1e-12, format!("worst relative error {worst:.3e} over 45 comparisons"))
}

fn derivatives(rng: &mut ChaCha8Rng) -> CheckResult {
    let shapes = [
        ParamsF1211 {
            a: 0.3,
            b: 0.7,
            c: 0.45,
            d: 1.1,
            e: 1.2,
            f: 1.7,
            g: 0.4,
        }
        .shape(),
        ParamsF0211 {
            b: 0.5,
            c: 0.7,
            d: 0.3,
            e: 1.5,
            g: 1.2,
        }
        .shape(),
    ];
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for shape in shapes.iter().flatten() {
        for _ in 0..10 {
            let (x, y) = (rng.random_range(-0.6..0.6), rng.random_range(-1.5..1.5));
            let f = |x: f64, y: f64| kdf_eval(shape, pt(x, y), &NAMED_POLICY).map(|r| r.value);
            let d = |dx, dy| kdf_eval_derivative(shape, pt(x, y), dx, dy, &NAMED_POLICY).map(|r| r.value);
            let values = (|| {
                let fx = (f(x + h, y)? - f(x - h, y)?) / (2.0 * h);
                let fy = (f(x, y + h)? - f(x, y - h)?) / (2.0 * h);
                Ok::<_, kdf_core::KdfError>((fx, fy, d(1, 0)?, d(0, 1)?))
            })();
            match values {
                Ok((fx, fy, dx, dy)) => worst = worst.max(rel(fx, dx)).max(rel(fy, dy)),
                Err(e) => return failed("derivatives", 1e-6, format!("({x}, {y}): {e}")),
            }
        }
    }
    result(
        "derivatives",
        worst,
        1e-6,
        format!("worst relative gap to central differences {worst:.3e} at 20 random points"),
    )
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let mut n = 0;
    while n == 0 {
        n = rng.random_range(-12..=12);
    }
    rational(n, rng.random_range(1..=9))
}

fn equivalence(rng: &mut ChaCha8Rng) -> CheckResult {
    let monos: Vec<(i64, i64)> = (1..=6).flat_map(|r| (1..=6).map(move |s| (r, s))).collect();
    let mut mismatches = Vec::new();
    for _ in 0..3 {
        let mut q = || random_rational(rng);
        let f1 = SystemParams::F1211(ParamsF1211 {
            a: q(),
            b: q(),
            c: q(),
            d: q(),
            e: q(),
            f: q(),
            g: q(),
        });
        let f0 = SystemParams::F0211(ParamsF0211 {
            b: q(),
            c: q(),
            d: q(),
            e: q(),
            g: q(),
        });
        for params in [f1, f0] {
            match operator_equivalence(&params, monos.iter().copied()) {
                Ok(m) => mismatches.extend(m.iter().map(ToString::to_string)),
                Err(e) => return failed("equivalence", 0.0, e.to_string()),
            }
        }
    }
    let mut detail = format!(
        "{} mismatching coefficients over 6 random rational parameter sets and {} monomials",
        mismatches.len(),
        monos.len()
    );
    if let Some(first) = mismatches.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    result("equivalence", mismatches.len() as f64, 0.0, detail)
}

fn residuals(rng: &mut ChaCha8Rng) -> CheckResult {
    let ticks: Vec<f64> = (0..4).map(|k| 0.05 + 0.35 * k as f64 / 3.0).collect();
    let points: Vec<EvalPoint> = ticks.iter().flat_map(|&x| ticks.iter().map(move |&y| pt(x, y))).collect();
    let mut pick = |v: [f64; 2]| v[rng.random_range(0..2)];
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let (g, e, f) = (pick([0.4, 1.6]), pick([1.2, 1.7]), pick([1.2, 1.7]));
        let p1 = ParamsF1211 {
            a: pick([0.3, 0.7]),
            b: pick([0.3, 0.7]),
            c: pick([0.3, 0.7]),
            d: pick([0.3, 0.7]),
            e,
            f,
            g,
        };
        let p0 = ParamsF0211 {
            b: p1.b,
            c: p1.c,
            d: p1.d,
            e: f,
            g,
        };
        let cases = [
            (expanded_system_f1211(&p1), solution_pair_f1211(&p1)),
            (expanded_system_f0211(&p0), solution_pair_f0211(&p0)),
        ];
        for (system, pair) in cases {
            let pair = match pair {
                Ok(p) => p,
                Err(e) => return failed("residuals", 1e-8, e.to_string()),
            };
            let second = match pair.second {
                Ok(s) => s,
                Err(e) => return failed("residuals", 1e-8, e.to_string()),
            };
            for sol in [&pair.first, &second] {
                let f = sol.with_policy(NAMED_POLICY);
                for &p in &points {
                    match residual(&system, &f, p) {
                        Ok(r) => worst = worst.max(r.max_relative()),
                        Err(e) => return failed("residuals", 1e-8, e.to_string()),
                    }
                }
            }
        }
    }
    result(
        "residuals",
        worst,
        1e-8,
        format!("worst |residual|/scale {worst:.3e} for both solutions of 8 parameter sets on a 4x4 grid"),
    )
}

fn indicial(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let g: f64 = rng.random_range(-3.0..3.0);
        let [r1, r2] = indicial_roots(g);
        worst = worst.max(r1.tau.abs()).max(r1.nu.abs()).max(r2.tau.abs());
        worst = worst.max((r2.nu - (1.0 - g)).abs());
        for r in [r1, r2] {
            let (u, v) = indicial_residual(g, r);
            worst = worst.max(u.abs()).max(v.abs());
        }
    }
    result("indicial", worst, 1e-14, format!("worst deviation {worst:.3e} over 100 random g"))
}

fn independence(rng: &mut ChaCha8Rng) -> CheckResult {
    let g = loop {
        let g: f64 = rng.random_range(0.2..1.8);
        if (g - 1.0).abs() > 0.1 {
            break g;
        }
    };
    let base = ParamsF1211 {
        a: 0.3,
        b: 0.7,
        c: 0.3,
        d: 0.7,
        e: 1.2,
        f: 1.7,
        g,
    };
    let points = [pt(0.1, 0.1), pt(0.2, 0.3), pt(0.3, 0.15), pt(0.05, 0.4), pt(0.35, 0.35)];
    let outcome = (|| {
        let pair = solution_pair_f1211(&base)?;
        let second = pair.second?;
        let generic = independence_check(&pair.first, &second, &points, &NAMED_POLICY)?;
        let unit = solution_pair_f1211(&ParamsF1211 { g: 1.0, ..base.clone() })?;
        let collapsed = independence_check(&unit.first, &unit.second?, &points, &NAMED_POLICY)?;
        let copy = independence_check(&pair.first, &pair.first.scaled(3.0), &points, &NAMED_POLICY)?;
        Ok::<_, kdf_core::KdfError>((generic, collapsed, copy))
    })();
    match outcome {
        Ok((generic, collapsed, copy)) => {
            let wrong = [!generic, collapsed, copy].iter().filter(|b| **b).count();
            result(
                "independence",
                wrong as f64,
                0.0,
                format!("g = {g:.4}: {generic}, g = 1: {collapsed}, scaled copy: {copy}"),
            )
        }
        Err(e) => failed("independence", 0.0, e.to_string()),
    }
}

fn cauchy_constant(nodes: usize) -> CheckResult {
    let problem = CauchyProblem {
        alpha: -0.1,
        beta: -0.1,
        lambda: 0.0,
        tau_data: Polynomial::constant(1.0),
        nu_data: Polynomial::constant(0.0),
    };
    let point = CharacteristicPoint { xi: 0.3, eta: 0.6 };
    match (
        solve_point(&problem, point, nodes, &NAMED_POLICY),
        solve_point(&problem, point, 2 * nodes, &NAMED_POLICY),
    ) {
        (Ok(a), Ok(b)) => {
            let err = (a.value - 1.0).abs();
            let change = (b.value - a.value).abs();
            let mut r = result(
                "cauchy_constant",
                err,
                1e-6,
                format!(
                    "u(0.3, 0.6) = {:.15} for constant data 1 with {nodes} nodes; doubling the nodes changes it by {change:.3e}",
                    a.value
                ),
            );
            r.pass = r.pass && change <= 1e-8;
            r
        }
        (Err(e), _) | (_, Err(e)) => failed("cauchy_constant", 1e-6, e.to_string()),
    }
}

fn cauchy_trace(nodes: usize) -> CheckResult {
    let problem = CauchyProblem {
        alpha: -0.1,
        beta: -0.1,
        lambda: 0.0,
        tau_data: Polynomial::new(vec![0.0, 1.0]),
        nu_data: Polynomial::constant(0.0),
    };
    match verify_trace(&problem, 0.5, &[1e-1, 3e-2, 1e-2, 3e-3], nodes, &NAMED_POLICY) {
        Ok(dev) => {
            let monotone = dev.windows(2).all(|w| w[1].1 < w[0].1);
            let last = dev.last().map_or(f64::INFINITY, |d| d.1);
            let listing: Vec<String> = dev.iter().map(|(e, d)| format!("{e}: {d:.3e}")).collect();
            let mut r = result(
                "cauchy_trace",
                last,
                1e-2,
                format!("deviations {}, monotone: {monotone}", listing.join(", ")),
            );
            r.pass = r.pass && monotone;
            r
        }
        Err(e) => failed("cauchy_trace", 1e-2, e.to_string()),
    }
}

fn quadrature() -> CheckResult {
    let beta = -0.25;
    let mut worst: f64 = 0.0;
    for (p1, p2) in [(beta, beta), (-beta, -beta)] {
        let Ok((t, w)) = jacobi_rule(5, p1, p2, 0.0, 1.0) else {
            return failed("quadrature", 1e-12, "rule construction failed");
        };
        for j in 0..=9 {
            let q: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(j)).sum();
            let (a, b) = (p1 + 1.0, p2 + j as f64 + 1.0);
            let exact = (ln_gamma(a).0 + ln_gamma(b).0 - ln_gamma(a + b).0).exp();
            worst = worst.max(rel(q, exact));
        }
    }
    result(
        "quadrature",
        worst,
        1e-12,
        format!("worst relative moment error {worst:.3e}, degrees 0 to 9 with 5 nodes"),
    )
}
