//! Kampé de Fériet double hypergeometric series and the machinery around them.
//!
//! The crate is organised bottom-up:
//!
//! - [`gamma`]: Pochhammer symbols, log-gamma ratios, integer-parameter detection.
//! - [`shape`]: the six parameter lists of a double series and their validation.
//! - [`series`]: diagonal summation, parameter-shift derivatives, convergence regions.
//! - [`special`]: the named functions `F^{1:2:1}_{2:0:1}`, `F^{0:2:1}_{1:0:1}` and Humbert `Ξ₂`.
//! - [`poly`]: exact Laurent polynomials in `x, y` used for operator comparisons.
//! - [`pde`]: the annihilating PDE systems in Euler-operator and expanded form, residuals.
//! - [`frobenius`]: indicial roots and the two solutions `x^τ y^ν ω` of each system.
//! - [`cauchy`]: the integral representation for a degenerate hyperbolic Cauchy problem.

pub mod cauchy;
pub mod error;
pub mod frobenius;
pub mod gamma;
pub mod pde;
pub mod poly;
pub mod series;
pub mod shape;
pub mod special;

pub use error::{KdfError, Result};
pub use frobenius::{Exponents, Solution, SolutionPair};
pub use series::{
    ConvergenceRegion, EvalPoint, Radius, SeriesResult, SeriesStatus, TruncationPolicy,
};
pub use shape::{KdFShape, ValidationReport};
pub use special::{FunctionKind, ParamsF0211, ParamsF1211, ParamsXi2};
