//! Bivariate Laurent polynomials `Σ c_{ij} x^i y^j` with generic coefficients.
//!
//! Used with [`BigRational`] coefficients for exact operator comparisons and
//! with `f64` for numerical residuals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

/// Coefficient field for polynomials and operators.
pub trait Coeff:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + FromPrimitive
    + ToPrimitive
{
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer is representable")
    }
}

impl<T> Coeff for T where
    T: Clone
        + fmt::Debug
        + fmt::Display
        + PartialEq
        + Zero
        + One
        + Add<Output = Self>
        + Sub<Output = Self>
        + Mul<Output = Self>
        + Neg<Output = Self>
        + FromPrimitive
        + ToPrimitive
{
}

/// `num / den` as an exact rational.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exponent pair `(i, j)` of `x^i y^j`.
pub type Powers = (i64, i64);

#[derive(Clone, PartialEq, Default)]
pub struct LaurentPoly<T> {
    terms: BTreeMap<Powers, T>,
}

impl<T: Coeff> LaurentPoly<T> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: T, i: i64, j: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(c, (i, j));
        p
    }

    pub fn x() -> Self {
        Self::monomial(T::one(), 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(T::one(), 0, 1)
    }

    pub fn add_term(&mut self, c: T, powers: Powers) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(powers).or_insert_with(T::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.remove(&powers);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: i64, j: i64) -> T {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Powers, &T)> {
        self.terms.iter().map(|(&k, v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest x and y exponents present, or `None` for the zero polynomial.
    pub fn min_powers(&self) -> Option<Powers> {
        let mut iter = self.terms.keys();
        let first = *iter.next()?;
        Some(iter.fold(first, |(a, b), &(i, j)| (a.min(i), b.min(j))))
    }

    pub fn max_powers(&self) -> Option<Powers> {
        let mut iter = self.terms.keys();
        let first = *iter.next()?;
        Some(iter.fold(first, |(a, b), &(i, j)| (a.max(i), b.max(j))))
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Self::zero();
        for (&k, v) in &self.terms {
            out.add_term(v.clone() * c.clone(), k);
        }
        out
    }

    /// Multiplies by `x^i y^j`.
    pub fn shift(&self, i: i64, j: i64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), v)| ((a + i, b + j), v.clone()))
                .collect(),
        }
    }

    /// Numerical value at `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| {
                c.to_f64().unwrap_or(f64::NAN) * x.powi(i as i32) * y.powi(j as i32)
            })
            .sum()
    }

    /// Coefficient-wise map into another field.
    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> LaurentPoly<U> {
        let mut out = LaurentPoly::zero();
        for (&k, v) in &self.terms {
            out.add_term(f(v), k);
        }
        out
    }
}

impl<T: Coeff> Add for &LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn add(self, rhs: Self) -> LaurentPoly<T> {
        let mut out = self.clone();
        for (&k, v) in &rhs.terms {
            out.add_term(v.clone(), k);
        }
        out
    }
}

impl<T: Coeff> Sub for &LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn sub(self, rhs: Self) -> LaurentPoly<T> {
        let mut out = self.clone();
        for (&k, v) in &rhs.terms {
            out.add_term(-v.clone(), k);
        }
        out
    }
}

impl<T: Coeff> Mul for &LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn mul(self, rhs: Self) -> LaurentPoly<T> {
        let mut out = LaurentPoly::zero();
        for (&(a, b), u) in &self.terms {
            for (&(c, d), v) in &rhs.terms {
                out.add_term(u.clone() * v.clone(), (a + c, b + d));
            }
        }
        out
    }
}

impl<T: Coeff> Neg for &LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn neg(self) -> LaurentPoly<T> {
        self.scale(&-T::one())
    }
}

impl<T: Coeff> Add for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn add(self, rhs: Self) -> LaurentPoly<T> {
        &self + &rhs
    }
}

impl<T: Coeff> Sub for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn sub(self, rhs: Self) -> LaurentPoly<T> {
        &self - &rhs
    }
}

impl<T: Coeff> Mul for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn mul(self, rhs: Self) -> LaurentPoly<T> {
        &self * &rhs
    }
}

/// Builds `Σ c x^i y^j` from `(c, i, j)` triples.
pub fn poly<T: Coeff>(terms: impl IntoIterator<Item = (T, i64, i64)>) -> LaurentPoly<T> {
    let mut p = LaurentPoly::zero();
    for (c, i, j) in terms {
        p.add_term(c, (i, j));
    }
    p
}

impl<T: Coeff> fmt::Display for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (&(i, j), c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            match i {
                0 => {}
                1 => f.write_str("·x")?,
                _ => write!(f, "·x^{i}")?,
            }
            match j {
                0 => {}
                1 => f.write_str("·y")?,
                _ => write!(f, "·y^{j}")?,
            }
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.terms.iter().map(|((i, j), c)| (format!("x^{i} y^{j}"), c)))
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_cancels_exactly() {
        let x = LaurentPoly::<BigRational>::x();
        let one = LaurentPoly::constant(rational(1, 1));
        let p = &(&one - &x) * &(&one + &x);
        let expect = &one - &(&x * &x);
        assert_eq!(p, expect);
        assert!((&p - &expect).is_zero());
        assert_eq!(p.coeff(2, 0), rational(-1, 1));
    }

    #[test]
    fn shift_and_powers() {
        let p = LaurentPoly::monomial(rational(3, 7), 2, -1).shift(-3, 1);
        assert_eq!(p.min_powers(), Some((-1, 0)));
        assert_eq!(p.coeff(-1, 0), rational(3, 7));
        assert_eq!(LaurentPoly::<f64>::zero().min_powers(), None);
    }

    #[test]
    fn eval_float() {
        let p = &LaurentPoly::monomial(2.0, 2, 0) + &LaurentPoly::monomial(-1.0, 0, -1);
        assert!((p.eval(3.0, 4.0) - (18.0 - 0.25)).abs() < 1e-15);
        let exact = LaurentPoly::monomial(rational(1, 3), 1, 1);
        assert!((exact.eval(3.0, 2.0) - 2.0).abs() < 1e-15);
    }
}
