//! Linear PDE systems for the two functions, in two independent forms.
//!
//! [`PdeSystem`] holds expanded systems term by term (polynomial coefficient
//! times a partial derivative). [`EulerSystem`] holds the compact annihilators
//! written with `θx = x∂x`, `θy = y∂y` and the factors `x^{-1}`, `y^{-1}`.
//! Both act on monomials exactly, which is how they are compared.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{KdfError, Result};
use crate::poly::{poly, Coeff, LaurentPoly, Powers};
use crate::series::{kdf_eval_derivative, EvalPoint, TruncationPolicy};
use crate::shape::KdFShape;
use crate::special::{FunctionKind, ParamsF0211, ParamsF1211};

/// Highest total derivative order allowed in a term.
pub const MAX_ORDER: u32 = 4;
/// Range of coefficient exponents allowed in a system.
pub const MIN_POWER: i64 = -1;
pub const MAX_POWER: i64 = 3;

/// `coeff(x, y) · ∂^{dx+dy} u / ∂x^dx ∂y^dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeTerm<T> {
    pub coeff: LaurentPoly<T>,
    pub dx: u32,
    pub dy: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeEquation<T> {
    pub terms: Vec<PdeTerm<T>>,
}

impl<T: Coeff> PdeEquation<T> {
    /// Total coefficient of `∂^{dx,dy}` (terms of equal order are summed).
    pub fn coefficient(&self, dx: u32, dy: u32) -> LaurentPoly<T> {
        self.terms
            .iter()
            .filter(|t| t.dx == dx && t.dy == dy)
            .fold(LaurentPoly::zero(), |acc, t| &acc + &t.coeff)
    }

    /// Coefficients keyed by derivative order, zero entries dropped.
    pub fn normalized(&self) -> BTreeMap<(u32, u32), LaurentPoly<T>> {
        let mut out: BTreeMap<(u32, u32), LaurentPoly<T>> = BTreeMap::new();
        for t in &self.terms {
            let slot = out.entry((t.dx, t.dy)).or_insert_with(LaurentPoly::zero);
            *slot = &*slot + &t.coeff;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Exact action on a generic monomial, divided by that monomial.
    ///
    /// With `u = x^ex y^ey`, the result is `L(u) / u` as a Laurent polynomial.
    pub fn relative_action(&self, ex: &T, ey: &T) -> LaurentPoly<T> {
        let mut out = LaurentPoly::zero();
        for t in &self.terms {
            let factor = falling(ex, t.dx) * falling(ey, t.dy);
            out = &out + &t.coeff.scale(&factor).shift(-(t.dx as i64), -(t.dy as i64));
        }
        out
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U + Copy) -> PdeEquation<U> {
        PdeEquation {
            terms: self
                .terms
                .iter()
                .map(|t| PdeTerm {
                    coeff: t.coeff.map(f),
                    dx: t.dx,
                    dy: t.dy,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeSystem<T> {
    pub equations: Vec<PdeEquation<T>>,
}

impl<T: Coeff> PdeSystem<T> {
    pub fn validate(&self) -> Result<()> {
        for (k, eq) in self.equations.iter().enumerate() {
            for (j, t) in eq.terms.iter().enumerate() {
                let path = format!("equations[{k}].terms[{j}]");
                if t.dx + t.dy > MAX_ORDER {
                    return Err(KdfError::parameter(
                        path,
                        format!("derivative order {} exceeds {MAX_ORDER}", t.dx + t.dy),
                    ));
                }
                for ((i, jj), _) in t.coeff.terms() {
                    if !(MIN_POWER..=MAX_POWER).contains(&i) || !(MIN_POWER..=MAX_POWER).contains(&jj) {
                        return Err(KdfError::parameter(
                            path,
                            format!("coefficient power x^{i} y^{jj} outside [{MIN_POWER}, {MAX_POWER}]"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// True when some coefficient carries `x^{-1}` or `y^{-1}`.
    pub fn has_negative_powers(&self) -> bool {
        self.equations.iter().flat_map(|e| &e.terms).any(|t| {
            t.coeff
                .min_powers()
                .is_some_and(|(i, j)| i < 0 || j < 0)
        })
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U + Copy) -> PdeSystem<U> {
        PdeSystem {
            equations: self.equations.iter().map(|e| e.map(f)).collect(),
        }
    }

    pub fn to_f64(&self) -> PdeSystem<f64> {
        self.map(|c| c.to_f64().unwrap_or(f64::NAN))
    }
}

/// `x(x-1)...(x-k+1)`.
fn falling<T: Coeff>(x: &T, k: u32) -> T {
    (0..k).fold(T::one(), |acc, j| acc * (x.clone() - T::from_int(j as i64)))
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, j| acc * (n - j) as i64 / (j + 1) as i64)
}

/// One factor of an Euler-operator product.
#[derive(Debug, Clone, PartialEq)]
pub enum EulerFactor<T> {
    /// `constant + x_weight·θx + y_weight·θy`.
    Shift { constant: T, x_weight: i64, y_weight: i64 },
    /// Multiplication by `x^x y^y`.
    Power { x: i64, y: i64 },
}

impl<T: Coeff> fmt::Display for EulerFactor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EulerFactor::Shift {
                constant,
                x_weight,
                y_weight,
            } => {
                write!(f, "({constant}")?;
                match x_weight {
                    0 => {}
                    1 => f.write_str(" + x∂x")?,
                    w => write!(f, " + {w}x∂x")?,
                }
                match y_weight {
                    0 => {}
                    1 => f.write_str(" + y∂y")?,
                    w => write!(f, " + {w}y∂y")?,
                }
                f.write_str(")")
            }
            EulerFactor::Power { x, y } => {
                if *x != 0 {
                    write!(f, "x^{x}")?;
                }
                if *y != 0 {
                    write!(f, "y^{y}")?;
                }
                Ok(())
            }
        }
    }
}

/// Product of factors, applied right to left.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerProduct<T> {
    pub factors: Vec<EulerFactor<T>>,
}

impl<T: Coeff> EulerProduct<T> {
    fn relative_action(&self, ex: &T, ey: &T) -> LaurentPoly<T> {
        let mut c = T::one();
        let (mut px, mut py) = (0i64, 0i64);
        for factor in self.factors.iter().rev() {
            match factor {
                EulerFactor::Shift {
                    constant,
                    x_weight,
                    y_weight,
                } => {
                    let eig = constant.clone()
                        + T::from_int(*x_weight) * (ex.clone() + T::from_int(px))
                        + T::from_int(*y_weight) * (ey.clone() + T::from_int(py));
                    c = c * eig;
                }
                EulerFactor::Power { x, y } => {
                    px += x;
                    py += y;
                }
            }
        }
        LaurentPoly::monomial(c, px, py)
    }
}

impl<T: Coeff> fmt::Display for EulerProduct<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for factor in &self.factors {
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

/// `lhs − rhs` annihilating the function.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerEquation<T> {
    pub lhs: EulerProduct<T>,
    pub rhs: EulerProduct<T>,
}

impl<T: Coeff> EulerEquation<T> {
    pub fn relative_action(&self, ex: &T, ey: &T) -> LaurentPoly<T> {
        &self.lhs.relative_action(ex, ey) - &self.rhs.relative_action(ex, ey)
    }
}

impl<T: Coeff> fmt::Display for EulerEquation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} − {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerSystem<T> {
    pub equations: Vec<EulerEquation<T>>,
}

/// Parameters of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemParams<T> {
    F1211(ParamsF1211<T>),
    F0211(ParamsF0211<T>),
}

impl<T> SystemParams<T> {
    pub fn kind(&self) -> FunctionKind {
        match self {
            SystemParams::F1211(_) => FunctionKind::F1211,
            SystemParams::F0211(_) => FunctionKind::F0211,
        }
    }
}

/// Something that can act on `x^ex y^ey` exactly.
pub trait MonomialAction<T> {
    /// One Laurent polynomial per equation, each equal to `L_k(u) / u`.
    fn relative_action(&self, ex: &T, ey: &T) -> Vec<LaurentPoly<T>>;
}

impl<T: Coeff> MonomialAction<T> for PdeSystem<T> {
    fn relative_action(&self, ex: &T, ey: &T) -> Vec<LaurentPoly<T>> {
        self.equations.iter().map(|e| e.relative_action(ex, ey)).collect()
    }
}

impl<T: Coeff> MonomialAction<T> for EulerSystem<T> {
    fn relative_action(&self, ex: &T, ey: &T) -> Vec<LaurentPoly<T>> {
        self.equations.iter().map(|e| e.relative_action(ex, ey)).collect()
    }
}

/// `L(x^r y^s)` for each equation, exactly.
pub fn monomial_action<T: Coeff, S: MonomialAction<T> + ?Sized>(
    system: &S,
    r: i64,
    s: i64,
) -> Result<Vec<LaurentPoly<T>>> {
    let out: Vec<_> = system
        .relative_action(&T::from_int(r), &T::from_int(s))
        .into_iter()
        .map(|p| p.shift(r, s))
        .collect();
    for p in &out {
        if let Some((i, j)) = p.min_powers() {
            if i < MIN_POWER || j < MIN_POWER {
                return Err(KdfError::NegativePower {
                    x_power: i,
                    y_power: j,
                });
            }
        }
    }
    Ok(out)
}

fn shift<T: Coeff>(constant: T, x_weight: i64, y_weight: i64) -> EulerFactor<T> {
    EulerFactor::Shift {
        constant,
        x_weight,
        y_weight,
    }
}

fn product<T>(factors: Vec<EulerFactor<T>>) -> EulerProduct<T> {
    EulerProduct { factors }
}

pub fn euler_system<T: Coeff>(params: &SystemParams<T>) -> EulerSystem<T> {
    let one = T::one;
    match params {
        SystemParams::F1211(p) => EulerSystem {
            equations: vec![
                EulerEquation {
                    lhs: product(vec![
                        shift(one(), 1, 0),
                        shift(p.e.clone(), 1, 1),
                        shift(p.f.clone(), 1, 1),
                        EulerFactor::Power { x: -1, y: 0 },
                    ]),
                    rhs: product(vec![
                        shift(p.a.clone(), 1, 1),
                        shift(p.b.clone(), 1, 0),
                        shift(p.c.clone(), 1, 0),
                    ]),
                },
                EulerEquation {
                    lhs: product(vec![
                        shift(one(), 0, 1),
                        shift(p.e.clone(), 1, 1),
                        shift(p.f.clone(), 1, 1),
                        shift(p.g.clone(), 0, 1),
                        EulerFactor::Power { x: 0, y: -1 },
                    ]),
                    rhs: product(vec![shift(p.a.clone(), 1, 1), shift(p.d.clone(), 0, 1)]),
                },
            ],
        },
        SystemParams::F0211(p) => EulerSystem {
            equations: vec![
                EulerEquation {
                    lhs: product(vec![
                        shift(one(), 1, 0),
                        shift(p.e.clone(), 1, 1),
                        EulerFactor::Power { x: -1, y: 0 },
                    ]),
                    rhs: product(vec![shift(p.b.clone(), 1, 0), shift(p.c.clone(), 1, 0)]),
                },
                EulerEquation {
                    lhs: product(vec![
                        shift(one(), 0, 1),
                        shift(p.e.clone(), 1, 1),
                        shift(p.g.clone(), 0, 1),
                        EulerFactor::Power { x: 0, y: -1 },
                    ]),
                    rhs: product(vec![shift(p.d.clone(), 0, 1)]),
                },
            ],
        },
    }
}

fn term<T>(coeff: LaurentPoly<T>, dx: u32, dy: u32) -> PdeTerm<T> {
    PdeTerm { coeff, dx, dy }
}

pub fn expanded_system_f1211<T: Coeff>(p: &ParamsF1211<T>) -> PdeSystem<T> {
    let n = |v: i64| T::from_int(v);
    let ParamsF1211 { a, b, c, d, e, f, g } = p.clone();
    let eq1 = vec![
        term(poly([(n(1), 2, 0), (n(-1), 3, 0)]), 3, 0),
        term(poly([(n(2), 1, 1), (n(-1), 2, 1)]), 2, 1),
        term(poly([(n(1), 0, 2)]), 1, 2),
        term(
            poly([
                (e.clone() + f.clone() + n(1), 1, 0),
                (-(a.clone() + b.clone() + c.clone() + n(3)), 2, 0),
            ]),
            2,
            0,
        ),
        term(
            poly([
                (e.clone() + f.clone() + n(1), 0, 1),
                (-(b.clone() + c.clone() + n(1)), 1, 1),
            ]),
            1,
            1,
        ),
        term(
            poly([
                (e.clone() * f.clone(), 0, 0),
                (
                    -(a.clone() * (b.clone() + c.clone() + n(1))
                        + (b.clone() + n(1)) * (c.clone() + n(1))),
                    1,
                    0,
                ),
            ]),
            1,
            0,
        ),
        term(poly([(-(b.clone() * c.clone()), 0, 1)]), 0, 1),
        term(poly([(-(a.clone() * b.clone() * c.clone()), 0, 0)]), 0, 0),
    ];
    let eq2 = vec![
        term(poly([(n(1), 0, 3)]), 0, 4),
        term(poly([(n(1), 2, 1)]), 2, 2),
        term(poly([(n(2), 1, 2)]), 1, 3),
        term(
            poly([(e.clone() + f.clone() + g.clone() + n(3), 0, 2)]),
            0,
            3,
        ),
        term(
            poly([(e.clone() + f.clone() + n(2) * g.clone() + n(3), 1, 1)]),
            1,
            2,
        ),
        term(poly([(g.clone(), 2, 0)]), 2, 1),
        term(
            poly([
                (
                    (e.clone() + n(1)) * (f.clone() + n(1))
                        + (e.clone() + f.clone() + n(1)) * g.clone(),
                    0,
                    1,
                ),
                (n(-1), 0, 2),
            ]),
            0,
            2,
        ),
        term(
            poly([
                ((e.clone() + f.clone() + n(1)) * g.clone(), 1, 0),
                (n(-1), 1, 1),
            ]),
            1,
            1,
        ),
        term(poly([(-d.clone(), 1, 0)]), 1, 0),
        term(
            poly([
                (e.clone() * f.clone() * g.clone(), 0, 0),
                (-(a.clone() + d.clone() + n(1)), 0, 1),
            ]),
            0,
            1,
        ),
        term(poly([(-(a * d), 0, 0)]), 0, 0),
    ];
    PdeSystem {
        equations: vec![PdeEquation { terms: eq1 }, PdeEquation { terms: eq2 }],
    }
}

pub fn expanded_system_f0211<T: Coeff>(p: &ParamsF0211<T>) -> PdeSystem<T> {
    let n = |v: i64| T::from_int(v);
    let ParamsF0211 { b, c, d, e, g } = p.clone();
    let eq1 = vec![
        term(poly([(n(1), 1, 0), (n(-1), 2, 0)]), 2, 0),
        term(poly([(n(1), 0, 1)]), 1, 1),
        term(
            poly([
                (e.clone(), 0, 0),
                (-(b.clone() + c.clone() + n(1)), 1, 0),
            ]),
            1,
            0,
        ),
        term(poly([(-(b * c), 0, 0)]), 0, 0),
    ];
    let eq2 = vec![
        term(poly([(n(1), 0, 2)]), 0, 3),
        term(poly([(n(1), 1, 1)]), 1, 2),
        term(poly([(g.clone(), 1, 0)]), 1, 1),
        term(poly([(e.clone() + g.clone() + n(1), 0, 1)]), 0, 2),
        term(poly([(e * g, 0, 0), (n(-1), 0, 1)]), 0, 1),
        term(poly([(-d, 0, 0)]), 0, 0),
    ];
    PdeSystem {
        equations: vec![PdeEquation { terms: eq1 }, PdeEquation { terms: eq2 }],
    }
}

pub fn expanded_system<T: Coeff>(params: &SystemParams<T>) -> PdeSystem<T> {
    match params {
        SystemParams::F1211(p) => expanded_system_f1211(p),
        SystemParams::F0211(p) => expanded_system_f0211(p),
    }
}

/// The system for `ω` after `u = x^τ y^ν ω`, with its coefficients written out.
///
/// [`conjugate_system`] derives the same system mechanically from
/// [`expanded_system_f1211`]. They differ only in the `y^{-1}` coefficient of
/// `ω` in the second equation, where this one minus the derived one is
/// `−ντ(eg + fg + g − 1)`. That vanishes at both indicial roots.
pub fn substituted_system_f1211<T: Coeff>(p: &ParamsF1211<T>, tau: &T, nu: &T) -> PdeSystem<T> {
    let n = |v: i64| T::from_int(v);
    let ParamsF1211 { a, b, c, d, e, f, g } = p.clone();
    let (t, v) = (tau.clone(), nu.clone());
    let ef = e.clone() + f.clone();

    let eq1 = vec![
        term(poly([(n(1), 2, 0), (n(-1), 3, 0)]), 3, 0),
        term(poly([(n(2), 1, 1), (n(-1), 2, 1)]), 2, 1),
        term(poly([(n(1), 0, 2)]), 1, 2),
        term(
            poly([
                (n(3) * t.clone() + n(2) * v.clone() + ef.clone() + n(1), 1, 0),
                (
                    -(n(3) * t.clone() + v.clone() + a.clone() + b.clone() + c.clone() + n(3)),
                    2,
                    0,
                ),
            ]),
            2,
            0,
        ),
        term(
            poly([
                (n(4) * t.clone() + n(2) * v.clone() + ef.clone() + n(1), 0, 1),
                (-(n(2) * t.clone() + b.clone() + c.clone() + n(1)), 1, 1),
            ]),
            1,
            1,
        ),
        term(poly([(t.clone(), -1, 2)]), 0, 2),
        term(
            poly([
                (
                    t.clone()
                        * (n(2) * e.clone() + n(2) * f.clone() + n(4) * v.clone() + n(3) * t.clone()
                            - n(1))
                        + v.clone() * (ef.clone() + v.clone())
                        + e.clone() * f.clone(),
                    0,
                    0,
                ),
                (
                    -(n(3) * t.clone() * (t.clone() - n(1))
                        + n(2) * t.clone() * (v.clone() + a.clone() + b.clone() + c.clone() + n(3))
                        + (b.clone() + c.clone() + n(1)) * v.clone()
                        + (b.clone() + n(1)) * (a.clone() + c.clone() + n(1))
                        + a.clone() * c.clone()),
                    1,
                    0,
                ),
            ]),
            1,
            0,
        ),
        term(
            poly([
                (
                    t.clone() * (n(2) * t.clone() + n(2) * v.clone() + ef.clone() - n(1)),
                    -1,
                    1,
                ),
                (
                    -(t.clone() * (t.clone() + b.clone() + c.clone()) + b.clone() * c.clone()),
                    0,
                    1,
                ),
            ]),
            0,
            1,
        ),
        term(
            poly([
                (
                    t.clone()
                        * ((v.clone() + e.clone() - n(1)) * (v.clone() + f.clone() - n(1))
                            + t.clone() * (t.clone() + n(2) * v.clone() + ef.clone() - n(2))),
                    -1,
                    0,
                ),
                (
                    -(t.clone() * (t.clone() - n(1)) * (t.clone() + a.clone() + b.clone() + c.clone() + n(1))
                        + t.clone() * v.clone() * (t.clone() + b.clone() + c.clone())
                        + t.clone() * (b.clone() + n(1)) * (c.clone() + n(1))
                        + a.clone() * (b.clone() + c.clone() + n(1)) * t.clone()
                        + b.clone() * c.clone() * (v.clone() + a.clone())),
                    0,
                    0,
                ),
            ]),
            0,
            0,
        ),
    ];

    let eq2 = vec![
        term(poly([(n(1), 0, 3)]), 0, 4),
        term(poly([(n(1), 2, 1)]), 2, 2),
        term(poly([(n(2), 1, 2)]), 1, 3),
        term(
            poly([(
                ef.clone() + g.clone() + n(2) * t.clone() + n(4) * v.clone() + n(3),
                0,
                2,
            )]),
            0,
            3,
        ),
        term(poly([(n(2) * v.clone() + g.clone(), 2, 0)]), 2, 1),
        term(
            poly([(
                ef.clone() + n(2) * g.clone() + n(2) * t.clone() + n(6) * v.clone() + n(3),
                1,
                1,
            )]),
            1,
            2,
        ),
        term(
            poly([(v.clone() * (g.clone() + v.clone() - n(1)), 2, -1)]),
            2,
            0,
        ),
        term(
            poly([
                (
                    n(2) * v.clone()
                        * (n(2) * t.clone() + n(3) * v.clone() + ef.clone() + n(2) * g.clone())
                        + (ef.clone() + n(2) * t.clone() + n(1)) * g.clone(),
                    1,
                    0,
                ),
                (n(-1), 1, 1),
            ]),
            1,
            1,
        ),
        term(
            poly([
                (
                    (e.clone() + n(1)) * (f.clone() + n(1))
                        + (ef.clone() + n(1)) * g.clone()
                        + t.clone() * (t.clone() + ef.clone() + n(2) * g.clone() + n(2))
                        + n(3)
                            * v.clone()
                            * (n(2) * t.clone() + n(2) * v.clone() + ef.clone() + g.clone() + n(1)),
                    0,
                    1,
                ),
                (n(-1), 0, 2),
            ]),
            0,
            2,
        ),
        term(
            poly([
                (
                    v.clone()
                        * (v.clone() + g.clone() - n(1))
                        * (n(2) * t.clone() + n(2) * v.clone() + ef.clone() - n(1)),
                    1,
                    -1,
                ),
                (-(v.clone() + d.clone()), 1, 0),
            ]),
            1,
            0,
        ),
        term(
            poly([
                (
                    v.clone()
                        * (v.clone() - n(1))
                        * (n(4) * v.clone() + n(6) * t.clone() + n(3) * ef.clone() + n(3) * g.clone()
                            + n(1))
                        + n(2) * t.clone() * v.clone() * (ef.clone() + n(2) * g.clone() + n(3))
                        + n(2) * v.clone() * (e.clone() + n(1)) * (f.clone() + n(1))
                        + g.clone() * (ef.clone() + n(1)) * (t.clone() + n(2) * v.clone())
                        + t.clone() * (t.clone() - n(1)) * (n(2) * v.clone() + g.clone())
                        + e.clone() * f.clone() * g.clone(),
                    0,
                    0,
                ),
                (
                    -(a.clone() + d.clone() + t.clone() + n(2) * v.clone() + n(1)),
                    0,
                    1,
                ),
            ]),
            0,
            1,
        ),
        term(
            poly([
                (
                    v.clone()
                        * ((v.clone() + e.clone() - n(1))
                            * (v.clone() + f.clone() - n(1))
                            * (v.clone() + g.clone() - n(1))
                            + t.clone()
                                * (v.clone() - n(1))
                                * (t.clone() + n(2) * v.clone() + ef.clone() + n(2) * g.clone()
                                    - n(2))
                            + t.clone() * (t.clone() - n(1)) * g.clone()
                            + t.clone()),
                    0,
                    -1,
                ),
                (
                    -(d.clone() * t.clone() + (t.clone() + v.clone() + a.clone() + d.clone()) * v.clone()
                        + a * d),
                    0,
                    0,
                ),
            ]),
            0,
            0,
        ),
    ];
    PdeSystem {
        equations: vec![PdeEquation { terms: eq1 }, PdeEquation { terms: eq2 }],
    }
}

/// The operator `ω ↦ x^{-τ} y^{-ν} L(x^τ y^ν ω)`, by the Leibniz rule, with
/// one merged term per derivative order.
pub fn conjugate_system<T: Coeff>(system: &PdeSystem<T>, tau: &T, nu: &T) -> PdeSystem<T> {
    let equations = system
        .equations
        .iter()
        .map(|eq| {
            let mut terms = Vec::new();
            for t in &eq.terms {
                for i in 0..=t.dx {
                    for j in 0..=t.dy {
                        let c = T::from_int(binomial(t.dx, i) * binomial(t.dy, j))
                            * falling(tau, i)
                            * falling(nu, j);
                        if c.is_zero() {
                            continue;
                        }
                        terms.push(PdeTerm {
                            coeff: t.coeff.scale(&c).shift(-(i as i64), -(j as i64)),
                            dx: t.dx - i,
                            dy: t.dy - j,
                        });
                    }
                }
            }
            let merged = PdeEquation { terms }.normalized();
            PdeEquation {
                terms: merged
                    .into_iter()
                    .rev()
                    .map(|((dx, dy), coeff)| PdeTerm { coeff, dx, dy })
                    .collect(),
            }
        })
        .collect();
    PdeSystem { equations }
}

/// A disagreement between two polynomials at one exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMismatch<T> {
    /// Zero-based equation index.
    pub equation: usize,
    /// Derivative order for term comparisons, `None` for monomial actions.
    pub order: Option<(u32, u32)>,
    /// Monomial the operators were applied to, for action comparisons.
    pub monomial: Option<(i64, i64)>,
    pub powers: Powers,
    pub left: T,
    pub right: T,
}

impl<T: Coeff> fmt::Display for CoefficientMismatch<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "equation {}", self.equation + 1)?;
        if let Some((dx, dy)) = self.order {
            write!(f, ", term ∂x^{dx}∂y^{dy}")?;
        }
        if let Some((r, s)) = self.monomial {
            write!(f, ", on x^{r} y^{s}")?;
        }
        let (i, j) = self.powers;
        write!(
            f,
            ": coefficient of x^{i} y^{j} is {} on the left, {} on the right",
            self.left, self.right
        )
    }
}

fn diff_polys<T: Coeff>(
    left: &LaurentPoly<T>,
    right: &LaurentPoly<T>,
    mut make: impl FnMut(Powers, T, T) -> CoefficientMismatch<T>,
    out: &mut Vec<CoefficientMismatch<T>>,
) {
    let diff = left - right;
    for (powers, _) in diff.terms() {
        out.push(make(powers, left.coeff(powers.0, powers.1), right.coeff(powers.0, powers.1)));
    }
}

/// Term-by-term differences between two systems.
pub fn system_differences<T: Coeff>(
    left: &PdeSystem<T>,
    right: &PdeSystem<T>,
) -> Vec<CoefficientMismatch<T>> {
    let mut out = Vec::new();
    let count = left.equations.len().max(right.equations.len());
    let empty = PdeEquation { terms: vec![] };
    for k in 0..count {
        let l = left.equations.get(k).unwrap_or(&empty).normalized();
        let r = right.equations.get(k).unwrap_or(&empty).normalized();
        let orders: std::collections::BTreeSet<_> = l.keys().chain(r.keys()).copied().collect();
        let zero = LaurentPoly::zero();
        for order in orders {
            let lp = l.get(&order).unwrap_or(&zero);
            let rp = r.get(&order).unwrap_or(&zero);
            diff_polys(
                lp,
                rp,
                |powers, left, right| CoefficientMismatch {
                    equation: k,
                    order: Some(order),
                    monomial: None,
                    powers,
                    left,
                    right,
                },
                &mut out,
            );
        }
    }
    out
}

/// Compares exact monomial actions of two operators on every `x^r y^s` given.
pub fn compare_actions<T, A, B>(
    left: &A,
    right: &B,
    monomials: impl IntoIterator<Item = (i64, i64)>,
) -> Result<Vec<CoefficientMismatch<T>>>
where
    T: Coeff,
    A: MonomialAction<T> + ?Sized,
    B: MonomialAction<T> + ?Sized,
{
    let mut out = Vec::new();
    for (r, s) in monomials {
        let la = monomial_action(left, r, s)?;
        let ra = monomial_action(right, r, s)?;
        for k in 0..la.len().max(ra.len()) {
            let zero = LaurentPoly::zero();
            diff_polys(
                la.get(k).unwrap_or(&zero),
                ra.get(k).unwrap_or(&zero),
                |powers, left, right| CoefficientMismatch {
                    equation: k,
                    order: None,
                    monomial: Some((r, s)),
                    powers,
                    left,
                    right,
                },
                &mut out,
            );
        }
    }
    Ok(out)
}

/// Euler form against expanded form for one parameter set.
pub fn operator_equivalence<T: Coeff>(
    params: &SystemParams<T>,
    monomials: impl IntoIterator<Item = (i64, i64)>,
) -> Result<Vec<CoefficientMismatch<T>>> {
    compare_actions(&euler_system(params), &expanded_system(params), monomials)
}

/// A function whose partial derivatives can be evaluated at a point.
pub trait Differentiable {
    fn partial(&self, point: EvalPoint, dx: u32, dy: u32) -> Result<f64>;
}

/// `u ≡ value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Differentiable for Constant {
    fn partial(&self, _point: EvalPoint, dx: u32, dy: u32) -> Result<f64> {
        Ok(if dx == 0 && dy == 0 { self.0 } else { 0.0 })
    }
}

/// A series evaluated with exact parameter-shift derivatives.
#[derive(Debug, Clone)]
pub struct SeriesFunction {
    pub shape: KdFShape,
    pub policy: TruncationPolicy,
}

impl Differentiable for SeriesFunction {
    fn partial(&self, point: EvalPoint, dx: u32, dy: u32) -> Result<f64> {
        Ok(kdf_eval_derivative(&self.shape, point, dx, dy, &self.policy)?.value)
    }
}

/// Per-equation residuals and the matching sums of absolute term sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub values: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Residual {
    /// `|value| / scale` per equation; zero when both vanish.
    pub fn relative(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.scales)
            .map(|(v, s)| if *s == 0.0 { v.abs() } else { v.abs() / s })
            .collect()
    }

    pub fn max_relative(&self) -> f64 {
        self.relative().into_iter().fold(0.0, f64::max)
    }
}

/// Applies the system to `u` at `point`.
pub fn residual(
    system: &PdeSystem<f64>,
    u: &(impl Differentiable + ?Sized),
    point: EvalPoint,
) -> Result<Residual> {
    if system.has_negative_powers() && (point.x == 0.0 || point.y == 0.0) {
        return Err(KdfError::domain(
            "point",
            "x and y must be nonzero where coefficients carry negative powers",
        ));
    }
    let mut cache: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let mut values = Vec::with_capacity(system.equations.len());
    let mut scales = Vec::with_capacity(system.equations.len());
    for eq in &system.equations {
        let (mut value, mut scale) = (0.0, 0.0);
        for t in &eq.terms {
            let deriv = match cache.get(&(t.dx, t.dy)) {
                Some(&d) => d,
                None => {
                    let d = u.partial(point, t.dx, t.dy)?;
                    cache.insert((t.dx, t.dy), d);
                    d
                }
            };
            let c = t.coeff.eval(point.x, point.y);
            value += c * deriv;
            scale += (c * deriv).abs();
        }
        values.push(value);
        scales.push(scale);
    }
    Ok(Residual { values, scales })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        rational(n, d)
    }

    fn exact_f1211() -> ParamsF1211<BigRational> {
        ParamsF1211 {
            a: q(1, 3),
            b: q(2, 5),
            c: q(-7, 4),
            d: q(5, 2),
            e: q(3, 7),
            f: q(11, 6),
            g: q(2, 9),
        }
    }

    fn exact_f0211() -> ParamsF0211<BigRational> {
        ParamsF0211 {
            b: q(1, 1),
            c: q(1, 1),
            d: q(3, 4),
            e: q(2, 1),
            g: q(5, 3),
        }
    }

    #[test]
    fn theta_shift_eigenvalue() {
        let sys = EulerSystem {
            equations: vec![EulerEquation {
                lhs: product(vec![shift(q(1, 1), 1, 0)]),
                rhs: product(vec![]),
            }],
        };
        let act = monomial_action(&sys, 4, 2).unwrap();
        // (1 + θx) x^4 y^2 − x^4 y^2 = 4 x^4 y^2
        assert_eq!(act[0], LaurentPoly::monomial(q(4, 1), 4, 2));
    }

    #[test]
    fn expanded_coefficients() {
        let sys = expanded_system_f1211(&exact_f1211());
        let one = q(1, 1);
        assert_eq!(
            sys.equations[0].coefficient(3, 0),
            poly([(one.clone(), 2, 0), (-one.clone(), 3, 0)])
        );
        let p = exact_f1211();
        assert_eq!(
            sys.equations[0].coefficient(0, 0),
            LaurentPoly::constant(-(p.a.clone() * p.b.clone() * p.c.clone()))
        );
        assert_eq!(
            sys.equations[1].coefficient(2, 1),
            LaurentPoly::monomial(p.g.clone(), 2, 0)
        );
        let f0 = expanded_system_f0211(&exact_f0211());
        assert_eq!(
            f0.equations[1].coefficient(0, 1),
            poly([(q(10, 3), 0, 0), (-one, 0, 1)])
        );
        assert_eq!(f0.equations[1].coefficient(0, 0), LaurentPoly::constant(q(-3, 4)));
    }

    #[test]
    fn euler_and_expanded_agree_f0211() {
        let params = SystemParams::F0211(exact_f0211());
        let monos = (1..=6).flat_map(|r| (1..=6).map(move |s| (r, s)));
        assert!(operator_equivalence(&params, monos).unwrap().is_empty());
    }

    #[test]
    fn euler_and_expanded_agree_f1211() {
        let params = SystemParams::F1211(exact_f1211());
        let monos = (1..=4).flat_map(|r| (1..=4).map(move |s| (r, s)));
        assert!(operator_equivalence(&params, monos).unwrap().is_empty());
    }

    #[test]
    fn substituted_reduces_at_zero_exponents() {
        let p = exact_f1211();
        let zero = q(0, 1);
        let sub = substituted_system_f1211(&p, &zero, &zero);
        assert!(system_differences(&sub, &expanded_system_f1211(&p)).is_empty());
    }

    #[test]
    fn conjugation_matches_first_written_equation() {
        let p = exact_f1211();
        let (tau, nu) = (q(2, 3), q(-5, 7));
        let derived = conjugate_system(&expanded_system_f1211(&p), &tau, &nu);
        let written = substituted_system_f1211(&p, &tau, &nu);
        let diffs = system_differences(&written, &derived);
        assert!(diffs.iter().all(|m| m.equation == 1), "{diffs:?}");
    }

    #[test]
    fn negative_power_is_reported() {
        let sys = EulerSystem {
            equations: vec![EulerEquation {
                lhs: product(vec![shift(q(3, 1), 1, 0), EulerFactor::Power { x: -2, y: 0 }]),
                rhs: product(vec![]),
            }],
        };
        assert!(matches!(
            monomial_action(&sys, 0, 1),
            Err(KdfError::NegativePower { x_power: -2, y_power: 1 })
        ));
        assert!(monomial_action(&sys, 1, 1).is_ok());
    }

    #[test]
    fn constant_is_annihilated_when_constant_terms_vanish() {
        let p = ParamsF0211 {
            b: 0.0,
            c: 0.7,
            d: 0.0,
            e: 1.5,
            g: 1.2,
        };
        let r = residual(&expanded_system_f0211(&p), &Constant(1.0), EvalPoint { x: 0.3, y: 0.2 })
            .unwrap();
        assert_eq!(r.values, vec![0.0, 0.0]);
    }

    #[test]
    fn validate_limits() {
        let sys = expanded_system_f1211(&exact_f1211());
        assert!(sys.validate().is_ok());
        let bad = PdeSystem {
            equations: vec![PdeEquation {
                terms: vec![term(LaurentPoly::monomial(q(1, 1), 0, 0), 3, 2)],
            }],
        };
        assert!(bad.validate().is_err());
    }
}
