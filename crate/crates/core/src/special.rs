//! The three concrete double series: `F^{1:2:1}_{2:0:1}`, `F^{0:2:1}_{1:0:1}`
//! and Humbert's `Ξ₂`.
//!
//! These are thin adapters onto [`crate::series`]; reductions between them are
//! exact structural facts about the shapes.

use serde::{Deserialize, Serialize};

use crate::error::{KdfError, Result};
use crate::gamma::nonpositive_integer;
use crate::series::{kdf_eval, EvalPoint, SeriesResult, TruncationPolicy};
use crate::shape::KdFShape;

/// Truncation used by the named functions.
pub const NAMED_POLICY: TruncationPolicy = TruncationPolicy {
    max_diagonal: 5000,
    rel_tol: 1e-14,
    consecutive_small: 3,
};

/// Which of the two families a system or solution belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionKind {
    F1211,
    F0211,
}

impl FunctionKind {
    pub fn name(self) -> &'static str {
        match self {
            FunctionKind::F1211 => "F1211",
            FunctionKind::F0211 => "F0211",
        }
    }
}

/// Parameters of `F^{1:2:1}_{2:0:1}[a : b, c; d; e, f : -; g; x, y]`.
///
/// Generic so that the PDE builders can use exact rationals; evaluation is
/// only available for `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsF1211<T = f64> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
    pub f: T,
    pub g: T,
}

/// Parameters of `F^{0:2:1}_{1:0:1}[- : b, c; d; e : -; g; x, y]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsF0211<T = f64> {
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
    pub g: T,
}

/// Parameters of `Ξ₂(b, c; e; x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsXi2<T = f64> {
    pub b: T,
    pub c: T,
    pub e: T,
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(KdfError::shape(name, "parameter is not finite"))
    }
}

fn check_lower(name: &str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if nonpositive_integer(v).is_some() {
        return Err(KdfError::shape(
            name,
            format!("lower parameter {v} is a nonpositive integer"),
        ));
    }
    Ok(())
}

impl ParamsF1211<f64> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            check_finite(name, v)?;
        }
        for (name, v) in [("e", self.e), ("f", self.f), ("g", self.g)] {
            check_lower(name, v)?;
        }
        Ok(())
    }

    pub fn shape(&self) -> Result<KdFShape> {
        shape_f1211(self)
    }
}

impl ParamsF0211<f64> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("b", self.b), ("c", self.c), ("d", self.d)] {
            check_finite(name, v)?;
        }
        for (name, v) in [("e", self.e), ("g", self.g)] {
            check_lower(name, v)?;
        }
        Ok(())
    }

    pub fn shape(&self) -> Result<KdFShape> {
        shape_f0211(self)
    }
}

impl ParamsXi2<f64> {
    pub fn validate(&self) -> Result<()> {
        check_finite("b", self.b)?;
        check_finite("c", self.c)?;
        check_lower("e", self.e)
    }

    pub fn shape(&self) -> Result<KdFShape> {
        shape_xi2(self)
    }
}

pub fn shape_f1211(params: &ParamsF1211) -> Result<KdFShape> {
    params.validate()?;
    let ParamsF1211 { a, b, c, d, e, f, g } = *params;
    KdFShape::new(vec![a], vec![b, c], vec![d], vec![e, f], vec![], vec![g])
}

pub fn shape_f0211(params: &ParamsF0211) -> Result<KdFShape> {
    params.validate()?;
    let ParamsF0211 { b, c, d, e, g } = *params;
    KdFShape::new(vec![], vec![b, c], vec![d], vec![e], vec![], vec![g])
}

pub fn shape_xi2(params: &ParamsXi2) -> Result<KdFShape> {
    params.validate()?;
    let ParamsXi2 { b, c, e } = *params;
    KdFShape::new(vec![], vec![b, c], vec![], vec![e], vec![], vec![])
}

pub fn f1211(params: &ParamsF1211, point: EvalPoint) -> Result<SeriesResult> {
    kdf_eval(&shape_f1211(params)?, point, &NAMED_POLICY)
}

pub fn f0211(params: &ParamsF0211, point: EvalPoint) -> Result<SeriesResult> {
    kdf_eval(&shape_f0211(params)?, point, &NAMED_POLICY)
}

pub fn xi2(params: &ParamsXi2, point: EvalPoint) -> Result<SeriesResult> {
    kdf_eval(&shape_xi2(params)?, point, &NAMED_POLICY)
}
