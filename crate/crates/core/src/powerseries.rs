//! Truncated formal power series with exact rational coefficients.
//!
//! A [`Series`] of order `N` stores the coefficients of `z^0 ..= z^N`. Binary
//! operations require both operands to carry the same order; nothing is ever
//! re-truncated implicitly. The only operations that change the order are the
//! explicit ones ([`Series::truncate`], [`Series::div_z_pow`],
//! [`Series::exact_div`]), which lower it by exactly the number of
//! coefficients they consume.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact coefficient type.
pub type Coefficient = BigRational;

/// Truncation order used when the caller does not choose one.
pub const DEFAULT_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("truncation orders differ ({left} vs {right})")]
    OrderMismatch { left: usize, right: usize },
    #[error("series has zero constant term and cannot be inverted")]
    ZeroConstantTerm,
    #[error("inner series of a composition must have zero constant term")]
    NonzeroInnerConstant,
    #[error("fixed-point iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("constant term {0} has no rational square root")]
    NoSquareRoot(String),
    #[error("division is not exact: coefficient of z^{index} is nonzero")]
    InexactDivision { index: usize },
    #[error("cannot take {requested} coefficients from a series of order {order}")]
    OrderTooLow { requested: usize, order: usize },
    #[error("empty product")]
    EmptyProduct,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Series {
    coeffs: Vec<Coefficient>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Scale rationals to a common denominator: returns `(numerators, lcm)`.
fn integer_parts(coeffs: &[Coefficient]) -> (Vec<BigInt>, BigInt) {
    let mut den = BigInt::one();
    for c in coeffs {
        if !c.denom().is_one() {
            den = den.lcm(c.denom());
        }
    }
    let ints = coeffs
        .iter()
        .map(|c| {
            if den.is_one() {
                c.numer().clone()
            } else {
                c.numer() * (&den / c.denom())
            }
        })
        .collect();
    (ints, den)
}

/// Cauchy product of integer vectors, truncated to `len` terms.
fn convolve(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let nz_a: Vec<usize> = (0..a.len().min(len)).filter(|&i| !a[i].is_zero()).collect();
    let mut out = vec![BigInt::zero(); len];
    for (n, slot) in out.iter_mut().enumerate() {
        let mut acc = BigInt::zero();
        for &i in &nz_a {
            if i > n {
                break;
            }
            let bj = &b[n - i];
            if !bj.is_zero() {
                acc += &a[i] * bj;
            }
        }
        *slot = acc;
    }
    out
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

impl Series {
    /// Build from explicit coefficients; the order is `coeffs.len() - 1`.
    ///
    /// Panics on an empty vector: a series always has at least its constant term.
    pub fn new(coeffs: Vec<Coefficient>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        Series { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Series { coeffs: vec![BigRational::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(BigRational::one(), order)
    }

    pub fn constant(c: Coefficient, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// `c * z^k`, or zero if `k` exceeds the order.
    pub fn monomial(k: usize, c: Coefficient, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    /// Integer coefficients, zero-padded (or cut) to the given order.
    pub fn from_i64s(values: &[i64], order: usize) -> Self {
        let mut s = Self::zero(order);
        for (slot, &v) in s.coeffs.iter_mut().zip(values) {
            *slot = rat(v);
        }
        s
    }

    pub fn from_bigints(values: &[BigInt], order: usize) -> Self {
        let mut s = Self::zero(order);
        for (slot, v) in s.coeffs.iter_mut().zip(values) {
            *slot = BigRational::from_integer(v.clone());
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &Coefficient {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Coefficient] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Coefficient> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Coefficients as integers, if all of them are.
    pub fn to_integers(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| if c.is_integer() { Some(c.to_integer()) } else { None })
            .collect()
    }

    /// Keep coefficients `0..=order`.
    pub fn truncate(&self, order: usize) -> Result<Series, SeriesError> {
        if order > self.order() {
            return Err(SeriesError::OrderTooLow { requested: order + 1, order: self.order() });
        }
        Ok(Series { coeffs: self.coeffs[..=order].to_vec() })
    }

    fn check_order(&self, other: &Series) -> Result<(), SeriesError> {
        if self.order() != other.order() {
            return Err(SeriesError::OrderMismatch { left: self.order(), right: other.order() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Series { coeffs })
    }

    pub fn sub(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Series { coeffs })
    }

    pub fn neg(&self) -> Series {
        Series { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, factor: &Coefficient) -> Series {
        Series { coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    /// Add a constant to the `z^0` coefficient.
    pub fn add_constant(&self, c: &Coefficient) -> Series {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// Cauchy product truncated to the shared order.
    pub fn mul(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_order(other)?;
        let len = self.coeffs.len();
        let (a, da) = integer_parts(&self.coeffs);
        let (b, db) = integer_parts(&other.coeffs);
        let den = da * db;
        let coeffs = convolve(&a, &b, len)
            .into_iter()
            .map(|c| if den.is_one() { BigRational::from_integer(c) } else { BigRational::new(c, den.clone()) })
            .collect();
        Ok(Series { coeffs })
    }

    pub fn square(&self) -> Series {
        self.mul(self).expect("same order")
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self) -> Result<Series, SeriesError> {
        if self.coeffs[0].is_zero() {
            return Err(SeriesError::ZeroConstantTerm);
        }
        // self = A / D with integer A. Write (1/A)_n = beta_n / c^(n+1), c = A_0,
        // which keeps the recurrence in integers.
        let (a, d) = integer_parts(&self.coeffs);
        let c = a[0].clone();
        let len = a.len();
        let nz: Vec<usize> = (1..len).filter(|&k| !a[k].is_zero()).collect();
        let mut c_pows = Vec::with_capacity(len + 1);
        c_pows.push(BigInt::one());
        for k in 1..=len {
            let next = &c_pows[k - 1] * &c;
            c_pows.push(next);
        }
        let mut beta: Vec<BigInt> = Vec::with_capacity(len);
        beta.push(BigInt::one());
        for n in 1..len {
            let mut acc = BigInt::zero();
            for &k in &nz {
                if k > n {
                    break;
                }
                let term = &a[k] * &beta[n - k];
                if c_pows[k - 1].is_one() {
                    acc += term;
                } else {
                    acc += term * &c_pows[k - 1];
                }
            }
            beta.push(-acc);
        }
        let coeffs = beta
            .into_iter()
            .enumerate()
            .map(|(n, b)| BigRational::new(b * &d, c_pows[n + 1].clone()))
            .collect();
        Ok(Series { coeffs })
    }

    /// Square root with the positive rational root of the constant term.
    pub fn sqrt(&self) -> Result<Series, SeriesError> {
        let b0 = rational_sqrt(&self.coeffs[0])
            .filter(|r| !r.is_zero())
            .ok_or_else(|| SeriesError::NoSquareRoot(self.coeffs[0].to_string()))?;
        // Newton steps y <- (y + s/y) / 2, doubling the number of correct terms.
        let order = self.order();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut y = Series { coeffs: vec![b0] };
        let mut known = 0;
        while known < order {
            let next = (2 * known + 1).min(order);
            let mut wide = y.coeffs.clone();
            wide.resize(next + 1, BigRational::zero());
            let y_wide = Series { coeffs: wide };
            let s = self.truncate(next)?;
            y = y_wide.add(&s.mul(&y_wide.inverse()?)?)?.scale(&half);
            known = next;
        }
        Ok(y)
    }

    /// Multiply by `z^k`, dropping what falls beyond the order.
    pub fn mul_z_pow(&self, k: usize) -> Series {
        let mut s = Self::zero(self.order());
        for (i, c) in self.coeffs.iter().enumerate() {
            if i + k > self.order() {
                break;
            }
            s.coeffs[i + k] = c.clone();
        }
        s
    }

    /// Exact division by `z^k`; the order drops by `k`.
    pub fn div_z_pow(&self, k: usize) -> Result<Series, SeriesError> {
        if k > self.order() {
            return Err(SeriesError::OrderTooLow { requested: k + 1, order: self.order() });
        }
        if let Some(i) = (0..k).find(|&i| !self.coeffs[i].is_zero()) {
            return Err(SeriesError::InexactDivision { index: i });
        }
        Ok(Series { coeffs: self.coeffs[k..].to_vec() })
    }

    /// `self / divisor` where the divisor may have positive valuation `v`;
    /// the first `v` coefficients of `self` must vanish and the order drops by `v`.
    pub fn exact_div(&self, divisor: &Series) -> Result<Series, SeriesError> {
        self.check_order(divisor)?;
        let v = divisor.valuation().ok_or(SeriesError::ZeroConstantTerm)?;
        let num = self.div_z_pow(v)?;
        let den = divisor.div_z_pow(v)?;
        num.mul(&den.inverse()?)
    }

    /// `z * d/dz`, which keeps the order.
    pub fn theta(&self) -> Series {
        Series {
            coeffs: self.coeffs.iter().enumerate().map(|(n, c)| c * rat(n as i64)).collect(),
        }
    }

    /// Multiply by `1 / (1 - z^k)` with a linear-time recurrence.
    pub fn mul_geometric(&self, k: usize) -> Series {
        assert!(k >= 1);
        let mut c = self.coeffs.clone();
        for n in k..c.len() {
            let prev = c[n - k].clone();
            c[n] += prev;
        }
        Series { coeffs: c }
    }

    /// Multiply by `1 - z^k`.
    pub fn mul_one_minus_z_pow(&self, k: usize) -> Series {
        let mut c = self.coeffs.clone();
        for n in (k..c.len()).rev() {
            let prev = self.coeffs[n - k].clone();
            c[n] -= prev;
        }
        Series { coeffs: c }
    }

    /// Greatest common divisor of the exponents carrying nonzero
    /// coefficients, ignoring `z^0`. Zero when no such exponent exists.
    pub fn support_gcd(&self) -> usize {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, c)| !c.is_zero())
            .fold(0usize, |g, (n, _)| g.gcd(&n))
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "; O(z^{})]", self.order() + 1)
    }
}

/// `outer(inner(z))` by Horner's rule over powers of `inner`.
pub fn compose(outer: &Series, inner: &Series) -> Result<Series, SeriesError> {
    outer.check_order(inner)?;
    if !inner.coeffs[0].is_zero() {
        return Err(SeriesError::NonzeroInnerConstant);
    }
    let order = outer.order();
    let mut acc = Series::constant(outer.coeffs[order].clone(), order);
    for k in (0..order).rev() {
        acc = acc.mul(inner)?;
        acc.coeffs[0] += &outer.coeffs[k];
    }
    Ok(acc)
}

/// Iterate `x <- update(x)` from the zero series until two successive
/// iterates agree on every coefficient up to `order`.
///
/// The update must raise the z-adic valuation of the error by at least one
/// per step, so the iteration settles after at most `order + 2` rounds.
pub fn solve_fixed_point<F>(mut update: F, order: usize) -> Result<Series, SeriesError>
where
    F: FnMut(&Series) -> Result<Series, SeriesError>,
{
    let max_iterations = order + 2;
    let mut current = Series::zero(order);
    for _ in 0..max_iterations {
        let next = update(&current)?;
        if next.order() != order {
            return Err(SeriesError::OrderMismatch { left: next.order(), right: order });
        }
        if next == current {
            return Ok(current);
        }
        current = next;
    }
    Err(SeriesError::NoConvergence { iterations: max_iterations })
}

/// Left fold of [`Series::mul`].
pub fn finite_product(factors: &[Series]) -> Result<Series, SeriesError> {
    let (first, rest) = factors.split_first().ok_or(SeriesError::EmptyProduct)?;
    rest.iter().try_fold(first.clone(), |acc, f| acc.mul(f))
}

/// A series paired with its first-order jet in an auxiliary variable `u`
/// around `u = 1`: `value = f(z, 1)`, `derivative = d/du f(z, u) at u = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualSeries {
    pub value: Series,
    pub derivative: Series,
}

impl DualSeries {
    pub fn new(value: Series, derivative: Series) -> Result<Self, SeriesError> {
        value.check_order(&derivative)?;
        Ok(DualSeries { value, derivative })
    }

    /// A series that does not depend on `u`.
    pub fn lift(value: Series) -> Self {
        let derivative = Series::zero(value.order());
        DualSeries { value, derivative }
    }

    pub fn zero(order: usize) -> Self {
        Self::lift(Series::zero(order))
    }

    pub fn order(&self) -> usize {
        self.value.order()
    }

    pub fn add(&self, other: &DualSeries) -> Result<DualSeries, SeriesError> {
        Ok(DualSeries {
            value: self.value.add(&other.value)?,
            derivative: self.derivative.add(&other.derivative)?,
        })
    }

    pub fn sub(&self, other: &DualSeries) -> Result<DualSeries, SeriesError> {
        Ok(DualSeries {
            value: self.value.sub(&other.value)?,
            derivative: self.derivative.sub(&other.derivative)?,
        })
    }

    pub fn add_constant(&self, c: &Coefficient) -> DualSeries {
        DualSeries { value: self.value.add_constant(c), derivative: self.derivative.clone() }
    }

    /// Product rule: `(ab)' = a b' + a' b`.
    pub fn mul(&self, other: &DualSeries) -> Result<DualSeries, SeriesError> {
        let value = self.value.mul(&other.value)?;
        let derivative = self.value.mul(&other.derivative)?.add(&self.derivative.mul(&other.value)?)?;
        Ok(DualSeries { value, derivative })
    }

    /// Multiply by a `u`-free series.
    pub fn mul_series(&self, s: &Series) -> Result<DualSeries, SeriesError> {
        Ok(DualSeries { value: self.value.mul(s)?, derivative: self.derivative.mul(s)? })
    }

    pub fn mul_z_pow(&self, k: usize) -> DualSeries {
        DualSeries { value: self.value.mul_z_pow(k), derivative: self.derivative.mul_z_pow(k) }
    }

    /// `(1/a)' = -a' / a^2`.
    pub fn inverse(&self) -> Result<DualSeries, SeriesError> {
        let inv = self.value.inverse()?;
        let derivative = self.derivative.mul(&inv.square())?.neg();
        Ok(DualSeries { value: inv, derivative })
    }
}

/// Iterate a dual-number update from zero until it is stationary.
pub fn solve_dual_fixed_point<F>(mut update: F, order: usize) -> Result<DualSeries, SeriesError>
where
    F: FnMut(&DualSeries) -> Result<DualSeries, SeriesError>,
{
    let max_iterations = order + 2;
    let mut current = DualSeries::zero(order);
    for _ in 0..max_iterations {
        let next = update(&current)?;
        if next == current {
            return Ok(current);
        }
        current = next;
    }
    Err(SeriesError::NoConvergence { iterations: max_iterations })
}
