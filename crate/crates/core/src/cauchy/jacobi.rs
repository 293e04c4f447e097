//! Gauss–Jacobi rules for `∫ (η−t)^{p1} (t−ξ)^{p2} f(t) dt`.
//!
//! Nodes come from the symmetric tridiagonal Jacobi matrix (Golub–Welsch),
//! then each node gets a few Newton steps on the three-term recurrence and the
//! weights are recomputed from the orthonormal polynomials.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{KdfError, Result};
use crate::gamma::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiRule {
    pub n_nodes: usize,
    /// Power of `(η − t)`.
    pub exp_eta_side: f64,
    /// Power of `(t − ξ)`.
    pub exp_xi_side: f64,
}

/// Nodes and weights on `[−1, 1]` for `(1−s)^a (1+s)^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRule {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl JacobiRule {
    pub fn new(n_nodes: usize, exp_eta_side: f64, exp_xi_side: f64) -> Result<Self> {
        let rule = JacobiRule {
            n_nodes,
            exp_eta_side,
            exp_xi_side,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 {
            return Err(KdfError::parameter("n_nodes", "need at least one node"));
        }
        for (name, v) in [("exp_eta_side", self.exp_eta_side), ("exp_xi_side", self.exp_xi_side)] {
            if !v.is_finite() || v <= -1.0 {
                return Err(KdfError::parameter(name, format!("exponent {v} must exceed -1")));
            }
        }
        Ok(())
    }

    pub fn reference(&self) -> Result<ReferenceRule> {
        self.validate()?;
        Ok(reference_rule(self.n_nodes, self.exp_eta_side, self.exp_xi_side))
    }

    /// Nodes and weights on `[ξ, η]`.
    pub fn nodes_weights(&self, xi: f64, eta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.reference()?.map_to(xi, eta)
    }
}

impl ReferenceRule {
    /// Affine map `t = ξ + (η−ξ)(s+1)/2`, absorbing the Jacobian into the weights.
    pub fn map_to(&self, xi: f64, eta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        if !(xi.is_finite() && eta.is_finite() && xi < eta) {
            return Err(KdfError::parameter(
                "interval",
                format!("need finite xi < eta, got [{xi}, {eta}]"),
            ));
        }
        let h = 0.5 * (eta - xi);
        let jac = h.powf(self.a + self.b + 1.0);
        let nodes = self.nodes.iter().map(|s| xi + h * (s + 1.0)).collect();
        let weights = self.weights.iter().map(|w| w * jac).collect();
        Ok((nodes, weights))
    }
}

/// `∫_{−1}^{1} (1−s)^a (1+s)^b ds`.
pub fn jacobi_mass(a: f64, b: f64) -> f64 {
    let ln = (a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0).0 + ln_gamma(b + 1.0).0
        - ln_gamma(a + b + 2.0).0;
    ln.exp()
}

/// Monic recurrence `P_{k+1} = (s − α_k) P_k − β_k P_{k−1}`.
fn recurrence(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        alpha[k] = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        beta[k] = match k {
            0 => jacobi_mass(a, b),
            1 => 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b)),
            _ => {
                4.0 * kf * (kf + a) * (kf + b) * (kf + a + b)
                    / (s * s * (s + 1.0) * (s - 1.0))
            }
        };
    }
    (alpha, beta)
}

/// Orthonormal values `p_0..p_{n-1}` at `s`, plus monic `P_n(s)` and `P_n'(s)`.
fn evaluate(s: f64, alpha: &[f64], beta: &[f64], n: usize) -> (Vec<f64>, f64, f64) {
    let mut ortho = Vec::with_capacity(n);
    let mut p_prev = 0.0;
    let mut p = 1.0 / beta[0].sqrt();
    for k in 0..n {
        ortho.push(p);
        let next_scale = if k + 1 < n { beta[k + 1].sqrt() } else { 1.0 };
        let prev_scale = if k == 0 { 0.0 } else { beta[k].sqrt() };
        let next = ((s - alpha[k]) * p - prev_scale * p_prev) / next_scale;
        p_prev = p;
        p = next;
    }

    let (mut m_prev, mut m) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    for k in 0..n {
        let bk = if k == 0 { 0.0 } else { beta[k] };
        let m_next = (s - alpha[k]) * m - bk * m_prev;
        let d_next = m + (s - alpha[k]) * d - bk * d_prev;
        m_prev = m;
        m = m_next;
        d_prev = d;
        d = d_next;
    }
    (ortho, m, d)
}

pub fn reference_rule(n: usize, a: f64, b: f64) -> ReferenceRule {
    let (alpha, beta) = recurrence(n, a, b);
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jm[(k, k)] = alpha[k];
        if k + 1 < n {
            let off = beta[k + 1].sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let mut nodes: Vec<f64> = jm.symmetric_eigen().eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.total_cmp(y));

    let weights = nodes
        .iter_mut()
        .map(|s| {
            for _ in 0..3 {
                let (_, m, d) = evaluate(*s, &alpha, &beta, n);
                if d == 0.0 {
                    break;
                }
                let step = m / d;
                if !step.is_finite() || step.abs() > 1e-6 {
                    break;
                }
                *s -= step;
            }
            let (ortho, _, _) = evaluate(*s, &alpha, &beta, n);
            1.0 / ortho.iter().map(|p| p * p).sum::<f64>()
        })
        .collect();
    ReferenceRule {
        a,
        b,
        nodes,
        weights,
    }
}

/// `(nodes, weights)` for `∫_ξ^η (η−t)^{p1} (t−ξ)^{p2} f(t) dt`.
pub fn jacobi_rule(
    n_nodes: usize,
    exp_eta_side: f64,
    exp_xi_side: f64,
    xi: f64,
    eta: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    JacobiRule::new(n_nodes, exp_eta_side, exp_xi_side)?.nodes_weights(xi, eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_midpoint() {
        let (t, w) = jacobi_rule(1, 0.0, 0.0, 0.2, 0.8).unwrap();
        assert!((t[0] - 0.5).abs() < 1e-15);
        assert!((w[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn legendre_quartic() {
        let (t, w) = jacobi_rule(3, 0.0, 0.0, 0.0, 1.0).unwrap();
        let q: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(4)).sum();
        assert!((q - 0.2).abs() < 1e-14);
    }

    #[test]
    fn legendre_nodes_known() {
        let r = reference_rule(2, 0.0, 0.0);
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-15 && (r.nodes[1] - x).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(matches!(
            jacobi_rule(4, -1.0, 0.0, 0.0, 1.0),
            Err(KdfError::Parameter { .. })
        ));
        assert!(jacobi_rule(0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(jacobi_rule(3, 0.0, 0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn asymmetric_weights_sum_to_mass() {
        let r = reference_rule(7, 0.4, -0.6);
        let total: f64 = r.weights.iter().sum();
        assert!((total / jacobi_mass(0.4, -0.6) - 1.0).abs() < 1e-13);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
    }
}
