//! Solutions of the form `u = x^τ y^ν ω` near the origin.
//!
//! Around `(0, 0)` the indicial equations are `τ = 0` and `ν(ν + g − 1) = 0`,
//! so each family has the regular solution and a second one carrying
//! `y^{1−g}` with shifted parameters.

use serde::{Deserialize, Serialize};

use crate::error::{KdfError, Result};
use crate::gamma::nonpositive_integer;
use crate::pde::Differentiable;
use crate::series::{kdf_eval, kdf_eval_derivative, EvalPoint, SeriesResult, TruncationPolicy};
use crate::shape::KdFShape;
use crate::special::{FunctionKind, ParamsF0211, ParamsF1211};

/// Relative spread of `u₂/u₁` above which two solutions count as independent.
pub const INDEPENDENCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub tau: f64,
    pub nu: f64,
}

/// Roots of `τ = 0`, `ν(ν + g − 1) = 0`, regular root first.
pub fn indicial_roots(g: f64) -> [Exponents; 2] {
    [
        Exponents { tau: 0.0, nu: 0.0 },
        Exponents {
            tau: 0.0,
            nu: 1.0 - g,
        },
    ]
}

/// Left-hand sides of the indicial system at `e`.
pub fn indicial_residual(g: f64, e: Exponents) -> (f64, f64) {
    (e.tau, e.nu * (e.nu + g - 1.0))
}

/// `scale · x^τ y^ν · F[shape](x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub exponents: Exponents,
    pub shape: KdFShape,
    pub kind: FunctionKind,
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl Solution {
    pub fn scaled(&self, factor: f64) -> Solution {
        Solution {
            scale: self.scale * factor,
            ..self.clone()
        }
    }

    pub fn with_policy(&self, policy: TruncationPolicy) -> SolutionFunction<'_> {
        SolutionFunction {
            solution: self,
            policy,
        }
    }
}

/// The regular solution and, unless degenerate, the second one.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    pub first: Solution,
    pub second: Result<Solution>,
}

/// Parameters of the second `F^{1:2:1}_{2:0:1}` solution's series factor.
pub fn second_params_f1211(p: &ParamsF1211) -> ParamsF1211 {
    let s = 1.0 - p.g;
    ParamsF1211 {
        a: s + p.a,
        b: p.b,
        c: p.c,
        d: s + p.d,
        e: s + p.e,
        f: s + p.f,
        g: 2.0 - p.g,
    }
}

pub fn second_params_f0211(p: &ParamsF0211) -> ParamsF0211 {
    let s = 1.0 - p.g;
    ParamsF0211 {
        b: p.b,
        c: p.c,
        d: s + p.d,
        e: s + p.e,
        g: 2.0 - p.g,
    }
}

fn degenerate(g: f64, err: KdfError) -> KdfError {
    let detail = match &err {
        KdfError::Shape { parameter, reason } => format!("shifted {parameter}: {reason}"),
        other => other.to_string(),
    };
    KdfError::Degenerate(format!(
        "second solution for g = {g} is not a plain series ({detail}); the logarithmic case is not constructed"
    ))
}

pub fn solution_pair_f1211(params: &ParamsF1211) -> Result<SolutionPair> {
    let [e1, e2] = indicial_roots(params.g);
    let first = Solution {
        exponents: e1,
        shape: params.shape()?,
        kind: FunctionKind::F1211,
        scale: 1.0,
    };
    let second = second_params_f1211(params)
        .shape()
        .map(|shape| Solution {
            exponents: e2,
            shape,
            kind: FunctionKind::F1211,
            scale: 1.0,
        })
        .map_err(|e| degenerate(params.g, e));
    Ok(SolutionPair { first, second })
}

pub fn solution_pair_f0211(params: &ParamsF0211) -> Result<SolutionPair> {
    let [e1, e2] = indicial_roots(params.g);
    let first = Solution {
        exponents: e1,
        shape: params.shape()?,
        kind: FunctionKind::F0211,
        scale: 1.0,
    };
    let second = second_params_f0211(params)
        .shape()
        .map(|shape| Solution {
            exponents: e2,
            shape,
            kind: FunctionKind::F0211,
            scale: 1.0,
        })
        .map_err(|e| degenerate(params.g, e));
    Ok(SolutionPair { first, second })
}

/// `base^exp` for real output; non-integer powers need a positive base.
fn real_power(base: f64, exp: f64, name: &str) -> Result<f64> {
    if exp == 0.0 {
        return Ok(1.0);
    }
    if nonpositive_integer(-exp).is_some() || nonpositive_integer(exp).is_some() {
        let k = exp.round() as i32;
        if base == 0.0 && k < 0 {
            return Err(KdfError::domain(name, "negative power of zero"));
        }
        return Ok(base.powi(k));
    }
    if base <= 0.0 {
        return Err(KdfError::domain(
            name,
            format!("{name} = {base} must be positive for the non-integer power {exp}"),
        ));
    }
    Ok(base.powf(exp))
}

pub fn eval_solution(sol: &Solution, point: EvalPoint, policy: &TruncationPolicy) -> Result<SeriesResult> {
    let px = real_power(point.x, sol.exponents.tau, "x")?;
    let py = real_power(point.y, sol.exponents.nu, "y")?;
    Ok(kdf_eval(&sol.shape, point, policy)?.scaled(sol.scale * px * py))
}

fn falling(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (x - j as f64))
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `∂x^dx ∂y^dy` of the solution by the Leibniz rule on the prefactor.
pub fn solution_partial(
    sol: &Solution,
    point: EvalPoint,
    dx: u32,
    dy: u32,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let Exponents { tau, nu } = sol.exponents;
    let mut total = 0.0;
    for i in 0..=dx {
        let cx = binomial(dx, i) * falling(tau, i);
        if cx == 0.0 {
            continue;
        }
        let px = real_power(point.x, tau - i as f64, "x")?;
        for j in 0..=dy {
            let cy = binomial(dy, j) * falling(nu, j);
            if cy == 0.0 {
                continue;
            }
            let py = real_power(point.y, nu - j as f64, "y")?;
            let w = kdf_eval_derivative(&sol.shape, point, dx - i, dy - j, policy)?.value;
            total += cx * cy * px * py * w;
        }
    }
    Ok(sol.scale * total)
}

/// A solution bound to a truncation policy, usable in residual checks.
#[derive(Debug, Clone, Copy)]
pub struct SolutionFunction<'a> {
    pub solution: &'a Solution,
    pub policy: TruncationPolicy,
}

impl Differentiable for SolutionFunction<'_> {
    fn partial(&self, point: EvalPoint, dx: u32, dy: u32) -> Result<f64> {
        solution_partial(self.solution, point, dx, dy, &self.policy)
    }
}

/// Ratio spread over the sample, for inspection alongside [`independence_check`].
pub fn ratio_spread(
    sol1: &Solution,
    sol2: &Solution,
    points: &[EvalPoint],
    policy: &TruncationPolicy,
) -> Result<f64> {
    if points.len() < 3 {
        return Err(KdfError::parameter(
            "points",
            format!("need at least 3 points, got {}", points.len()),
        ));
    }
    let mut ratios = Vec::with_capacity(points.len());
    for (k, &p) in points.iter().enumerate() {
        if p.y <= 0.0 {
            return Err(KdfError::domain(format!("points[{k}].y"), "must be positive"));
        }
        let u1 = eval_solution(sol1, p, policy)?.value;
        let u2 = eval_solution(sol2, p, policy)?.value;
        if u1 == 0.0 || !u1.is_finite() || !u2.is_finite() {
            return Err(KdfError::domain(
                format!("points[{k}]"),
                "first solution vanishes or a value is not finite",
            ));
        }
        ratios.push(u2 / u1);
    }
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let mag = ratios.iter().map(|r| r.abs()).fold(0.0, f64::max);
    Ok(if mag == 0.0 { 0.0 } else { (max - min) / mag })
}

/// True when `u₂/u₁` is not constant over the points.
pub fn independence_check(
    sol1: &Solution,
    sol2: &Solution,
    points: &[EvalPoint],
    policy: &TruncationPolicy,
) -> Result<bool> {
    Ok(ratio_spread(sol1, sol2, points, policy)? > INDEPENDENCE_TOLERANCE)
}
