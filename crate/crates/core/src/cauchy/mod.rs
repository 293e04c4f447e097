//! Integral representation of the Cauchy problem for the degenerate hyperbolic
//! equation with data `u(ξ, ξ) = τ(ξ)` and the weighted normal derivative `ν(ξ)`.
//!
//! In characteristic coordinates `0 < ξ < η ≤ 1` the solution is
//!
//! ```text
//! u = γ₁ (η+ξ)^{−α} / (η−ξ)^{1+2β} · (I₁ − I₂) − γ₂ (η+ξ)^{−α} · I₃
//! I₁ = ∫ (η−t)^β (t−ξ)^β t^α H τ(t) dt
//! I₂ = ∫ (η−t)^β (t−ξ)^β (η+ξ−2t) t^α F τ′(t) dt
//! I₃ = ∫ (η−t)^{−β} (t−ξ)^{−β} t^α Ξ₂(α, 1−α; 1−β; σ, ρ) ν(t) dt
//! ```
//!
//! with `F = F^{0:2:1}_{1:0:1}[α, 1−α; β; β; 1+β; σ, ρ]` and the kernel `H`
//! from [`h_kernel`]. Every integral is taken over `[ξ, η]` with Gauss–Jacobi
//! rules carrying the endpoint weights.

pub mod jacobi;

use serde::{Deserialize, Serialize};

use crate::error::{KdfError, Result};
use crate::gamma::gamma_ratio;
use crate::series::{kdf_eval, kdf_eval_derivative, EvalPoint, SeriesResult, TruncationPolicy};
use crate::shape::KdFShape;
use crate::special::{ParamsF0211, ParamsXi2};

pub use jacobi::{jacobi_mass, jacobi_rule, reference_rule, JacobiRule, ReferenceRule};

/// Polynomial in ascending coefficient order: `c₀ + c₁ t + …`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyProblem {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub tau_data: Polynomial,
    pub nu_data: Polynomial,
}

impl CauchyProblem {
    /// Checks `−1/2 < β ≤ α ≤ 0` and finiteness.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("lambda", self.lambda)] {
            if !v.is_finite() {
                return Err(KdfError::domain(name, "must be finite"));
            }
        }
        for (name, p) in [("tau_data", &self.tau_data), ("nu_data", &self.nu_data)] {
            if let Some(k) = p.coeffs.iter().position(|c| !c.is_finite()) {
                return Err(KdfError::domain(format!("{name}[{k}]"), "must be finite"));
            }
        }
        if !(self.beta > -0.5 && self.beta <= self.alpha && self.alpha <= 0.0) {
            return Err(KdfError::domain(
                "beta",
                format!(
                    "need -1/2 < beta <= alpha <= 0, got alpha = {}, beta = {}",
                    self.alpha, self.beta
                ),
            ));
        }
        Ok(())
    }

    fn require_nonzero_beta(&self) -> Result<()> {
        if self.beta == 0.0 {
            return Err(KdfError::Pole {
                parameter: "beta".into(),
                value: 0.0,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPoint {
    pub xi: f64,
    pub eta: f64,
}

impl CharacteristicPoint {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0 && self.xi < self.eta && self.eta <= 1.0) {
            return Err(KdfError::domain(
                "point",
                format!("need 0 < xi < eta <= 1, got ({}, {})", self.xi, self.eta),
            ));
        }
        Ok(())
    }
}

fn check_t(xi: f64, eta: f64, t: f64) -> Result<()> {
    if !(t > 0.0 && xi <= t && t <= eta && eta + xi > 0.0) {
        return Err(KdfError::domain(
            "t",
            format!("t = {t} must lie in [{xi}, {eta}] and be positive"),
        ));
    }
    Ok(())
}

pub fn sigma(xi: f64, eta: f64, t: f64) -> Result<f64> {
    check_t(xi, eta, t)?;
    Ok((eta - t) * (t - xi) / (2.0 * t * (eta + xi)))
}

pub fn rho(xi: f64, eta: f64, t: f64, lambda: f64) -> Result<f64> {
    check_t(xi, eta, t)?;
    Ok(lambda * (eta - t) * (t - xi))
}

pub fn dsigma_dt(xi: f64, eta: f64, t: f64) -> Result<f64> {
    check_t(xi, eta, t)?;
    Ok((eta * xi - t * t) / (2.0 * t * t * (eta + xi)))
}

/// `(γ₁, γ₂)`.
pub fn gamma_constants(alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if !(beta > -0.5 && beta <= 0.0) {
        return Err(KdfError::domain("beta", format!("beta = {beta} must lie in (-1/2, 0]")));
    }
    if alpha.is_nan() || alpha > 0.0 {
        return Err(KdfError::domain("alpha", format!("alpha = {alpha} must be <= 0")));
    }
    let scale = 2f64.powf(alpha - 1.0);
    let g1 = scale * gamma_ratio(1.0 + 2.0 * beta, 1.0 + beta)? / gamma_ratio(1.0 + beta, 1.0)?;
    let g2 = (2.0 * (1.0 - 2.0 * beta)).powf(2.0 * beta)
        * scale
        * gamma_ratio(1.0 - 2.0 * beta, 1.0 - beta)?
        / gamma_ratio(1.0 - beta, 1.0)?;
    Ok((g1, g2))
}

/// Parameters `(α, 1−α; β; β; 1+β)` of the kernel series `F`.
pub fn kernel_params(alpha: f64, beta: f64) -> ParamsF0211 {
    ParamsF0211 {
        b: alpha,
        c: 1.0 - alpha,
        d: beta,
        e: beta,
        g: 1.0 + beta,
    }
}

/// Shapes used by the representation, built once per problem.
#[derive(Debug, Clone)]
struct Kernels {
    f: KdFShape,
    xi2: KdFShape,
}

impl Kernels {
    fn new(problem: &CauchyProblem) -> Result<Self> {
        problem.require_nonzero_beta()?;
        let f = kernel_params(problem.alpha, problem.beta)
            .shape()
            .map_err(|e| e.with_path_prefix("kernel"))?;
        let xi2 = ParamsXi2 {
            b: problem.alpha,
            c: 1.0 - problem.alpha,
            e: 1.0 - problem.beta,
        }
        .shape()?;
        Ok(Kernels { f, xi2 })
    }
}

/// Kernel values at one `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub h: f64,
    pub f: f64,
    /// Series evaluations that did not report a clean status.
    pub unconverged: usize,
}

fn count(results: &[&SeriesResult]) -> usize {
    results.iter().filter(|r| !r.status.is_ok()).count()
}

fn kernel_at(
    problem: &CauchyProblem,
    kernels: &Kernels,
    xi: f64,
    eta: f64,
    t: f64,
    policy: &TruncationPolicy,
) -> Result<KernelValue> {
    let s = sigma(xi, eta, t)?;
    let r = rho(xi, eta, t, problem.lambda)?;
    let ds = dsigma_dt(xi, eta, t)?;
    let at = EvalPoint { x: s, y: r };
    let f = kdf_eval(&kernels.f, at, policy)?;
    let f_sigma = kdf_eval_derivative(&kernels.f, at, 1, 0, policy)?;
    let f_rho = if r == 0.0 {
        None
    } else {
        Some(kdf_eval_derivative(&kernels.f, at, 0, 1, policy)?)
    };
    let (alpha, beta) = (problem.alpha, problem.beta);
    let h = 2.0 * (1.0 + 2.0 * beta) * f.value - (alpha / t) * (eta + xi - 2.0 * t) * f.value
        - f_sigma.value * ds
        + 4.0 * r * f_rho.map_or(0.0, |d| d.value);
    let mut unconverged = count(&[&f, &f_sigma]);
    if let Some(d) = &f_rho {
        unconverged += count(&[d]);
    }
    Ok(KernelValue {
        h,
        f: f.value,
        unconverged,
    })
}

/// `H(ξ, η; t; λ) = 2(1+2β)F − (α/t)(η+ξ−2t)F − F_σ σ_t + 4ρ F_ρ`.
pub fn h_kernel(
    problem: &CauchyProblem,
    xi: f64,
    eta: f64,
    t: f64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    if !(xi < t && t < eta) {
        return Err(KdfError::domain("t", format!("t = {t} must lie in ({xi}, {eta})")));
    }
    let kernels = Kernels::new(problem)?;
    Ok(kernel_at(problem, &kernels, xi, eta, t, policy)?.h)
}

/// Value of `u` with its three integrals and a warning count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyValue {
    pub value: f64,
    pub integrals: [f64; 3],
    /// Number of interior series evaluations whose status was not clean.
    pub unconverged: usize,
}

/// Reusable quadrature for repeated [`solve_point`] calls.
#[derive(Debug, Clone)]
pub struct CauchySolver {
    problem: CauchyProblem,
    kernels: Kernels,
    gamma: (f64, f64),
    tau_prime: Polynomial,
    inner: ReferenceRule,
    outer: ReferenceRule,
    policy: TruncationPolicy,
}

impl CauchySolver {
    pub fn new(problem: &CauchyProblem, n_nodes: usize, policy: &TruncationPolicy) -> Result<Self> {
        problem.validate()?;
        policy.validate()?;
        let kernels = Kernels::new(problem)?;
        let b = problem.beta;
        Ok(CauchySolver {
            problem: problem.clone(),
            kernels,
            gamma: gamma_constants(problem.alpha, b)?,
            tau_prime: problem.tau_data.derivative(),
            inner: JacobiRule::new(n_nodes, b, b)?.reference()?,
            outer: JacobiRule::new(n_nodes, -b, -b)?.reference()?,
            policy: *policy,
        })
    }

    pub fn solve(&self, point: CharacteristicPoint) -> Result<CauchyValue> {
        point.validate()?;
        let CharacteristicPoint { xi, eta } = point;
        let p = &self.problem;
        let alpha = p.alpha;
        let mut unconverged = 0;

        let (mut i1, mut i2) = (0.0, 0.0);
        if !p.tau_data.is_zero() {
            let (nodes, weights) = self.inner.map_to(xi, eta)?;
            for (&t, &w) in nodes.iter().zip(&weights) {
                let k = kernel_at(p, &self.kernels, xi, eta, t, &self.policy)?;
                unconverged += k.unconverged;
                let ta = t.powf(alpha);
                i1 += w * ta * k.h * p.tau_data.eval(t);
                i2 += w * (eta + xi - 2.0 * t) * ta * k.f * self.tau_prime.eval(t);
            }
        }

        let mut i3 = 0.0;
        if !p.nu_data.is_zero() {
            let (nodes, weights) = self.outer.map_to(xi, eta)?;
            for (&t, &w) in nodes.iter().zip(&weights) {
                let at = EvalPoint {
                    x: sigma(xi, eta, t)?,
                    y: rho(xi, eta, t, p.lambda)?,
                };
                let x = kdf_eval(&self.kernels.xi2, at, &self.policy)?;
                unconverged += count(&[&x]);
                i3 += w * t.powf(alpha) * x.value * p.nu_data.eval(t);
            }
        }

        let (g1, g2) = self.gamma;
        let front = (eta + xi).powf(-alpha);
        let value = g1 * front / (eta - xi).powf(1.0 + 2.0 * p.beta) * (i1 - i2) - g2 * front * i3;
        Ok(CauchyValue {
            value,
            integrals: [i1, i2, i3],
            unconverged,
        })
    }
}

pub fn solve_point(
    problem: &CauchyProblem,
    point: CharacteristicPoint,
    n_nodes: usize,
    policy: &TruncationPolicy,
) -> Result<CauchyValue> {
    CauchySolver::new(problem, n_nodes, policy)?.solve(point)
}

/// `(ε, |u(ξ, ξ+ε) − τ(ξ)|)` for each `ε`.
pub fn verify_trace(
    problem: &CauchyProblem,
    xi: f64,
    eps_list: &[f64],
    n_nodes: usize,
    policy: &TruncationPolicy,
) -> Result<Vec<(f64, f64)>> {
    let solver = CauchySolver::new(problem, n_nodes, policy)?;
    let target = problem.tau_data.eval(xi);
    eps_list
        .iter()
        .map(|&eps| {
            let u = solver.solve(CharacteristicPoint { xi, eta: xi + eps })?;
            Ok((eps, (u.value - target).abs()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::NAMED_POLICY;

    fn problem(tau: Vec<f64>, nu: Vec<f64>) -> CauchyProblem {
        CauchyProblem {
            alpha: -0.1,
            beta: -0.1,
            lambda: 0.0,
            tau_data: Polynomial::new(tau),
            nu_data: Polynomial::new(nu),
        }
    }

    #[test]
    fn sigma_rho_examples() {
        assert!((sigma(0.2, 0.6, 0.4).unwrap() - 0.0625).abs() < 1e-16);
        assert_eq!(sigma(0.2, 0.6, 0.2).unwrap(), 0.0);
        assert_eq!(sigma(0.2, 0.6, 0.6).unwrap(), 0.0);
        assert!((rho(0.2, 0.6, 0.4, 2.0).unwrap() - 0.08).abs() < 1e-16);
        assert_eq!(rho(0.2, 0.6, 0.4, 0.0).unwrap(), 0.0);
        assert!((dsigma_dt(0.2, 0.6, 0.4).unwrap() + 0.15625).abs() < 1e-15);
        assert!(matches!(sigma(0.2, 0.6, 0.7), Err(KdfError::Domain { .. })));
    }

    #[test]
    fn gamma_constants_at_zero() {
        let (g1, g2) = gamma_constants(0.0, 0.0).unwrap();
        assert!((g1 - 0.5).abs() < 1e-15 && (g2 - 0.5).abs() < 1e-15);
        assert!(gamma_constants(0.1, -0.1).is_err());
        assert!(gamma_constants(-0.1, -0.6).is_err());
    }

    #[test]
    fn polynomial_derivative() {
        let p = Polynomial::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.derivative(), Polynomial::new(vec![2.0, 6.0]));
    }

    #[test]
    fn zero_data_gives_zero() {
        let u = solve_point(
            &problem(vec![0.0], vec![0.0]),
            CharacteristicPoint { xi: 0.3, eta: 0.6 },
            16,
            &NAMED_POLICY,
        )
        .unwrap();
        assert_eq!(u.value, 0.0);
    }

    #[test]
    fn beta_zero_is_a_pole() {
        let mut p = problem(vec![1.0], vec![0.0]);
        p.alpha = 0.0;
        p.beta = 0.0;
        assert!(matches!(
            h_kernel(&p, 0.3, 0.6, 0.45, &NAMED_POLICY),
            Err(KdfError::Pole { .. })
        ));
    }

    #[test]
    fn midpoint_kernel_drops_alpha_term() {
        let p = problem(vec![1.0], vec![0.0]);
        let (xi, eta) = (0.3, 0.6);
        let t = 0.45;
        let h = h_kernel(&p, xi, eta, t, &NAMED_POLICY).unwrap();
        let shape = kernel_params(p.alpha, p.beta).shape().unwrap();
        let at = EvalPoint {
            x: sigma(xi, eta, t).unwrap(),
            y: 0.0,
        };
        let f = kdf_eval(&shape, at, &NAMED_POLICY).unwrap().value;
        let fs = kdf_eval_derivative(&shape, at, 1, 0, &NAMED_POLICY).unwrap().value;
        let expect = 2.0 * (1.0 + 2.0 * p.beta) * f - fs * dsigma_dt(xi, eta, t).unwrap();
        assert!((h - expect).abs() < 1e-14);
    }
}
