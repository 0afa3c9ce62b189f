//! Dense univariate polynomials over the integers and the rational functions
//! built from them, with real root isolation on exact rational arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::powerseries::{Series, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("rational function has a pole at z = 0 and no power series expansion")]
    PoleAtOrigin,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Integer polynomial, coefficients from the constant term up, with no
/// trailing zeros. The zero polynomial has no coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<BigInt>,
}

fn ratio_int(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_i64s(values: &[i64]) -> Self {
        Self::new(values.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64s(&[1])
    }

    /// `c * z^k`
    pub fn monomial(k: usize, c: BigInt) -> Self {
        let mut v = vec![BigInt::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: &BigInt) -> Poly {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::one(), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self) -> Poly {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        )
    }

    /// Horner evaluation at an exact rational point.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + ratio_int(c);
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| {
            acc * x + Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0)
        })
    }

    /// Gcd of the coefficients, nonnegative.
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divide out the content and make the leading coefficient positive.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = self.content();
        if self.leading().is_negative() {
            c = -c;
        }
        Poly { coeffs: self.coeffs.iter().map(|x| x / &c).collect() }
    }

    /// Long division over the rationals: `(quotient, remainder)`.
    pub fn div_rem_rational(&self, d: &Poly) -> (Vec<BigRational>, Vec<BigRational>) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.degree().unwrap();
        let lead = ratio_int(&d.leading());
        let mut rem: Vec<BigRational> = self.coeffs.iter().map(ratio_int).collect();
        if rem.len() <= dd {
            return (Vec::new(), rem);
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = &rem[k + dd] / &lead;
            if !q.is_zero() {
                for (i, c) in d.coeffs.iter().enumerate() {
                    rem[k + i] -= &q * ratio_int(c);
                }
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        while rem.last().is_some_and(Zero::is_zero) {
            rem.pop();
        }
        (quot, rem)
    }

    /// Exact quotient in `Z[z]`, if `d` divides `self` with integer quotient.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (q, r) = self.div_rem_rational(d);
        if !r.is_empty() || q.iter().any(|c| !c.is_integer()) {
            return None;
        }
        Some(Poly::new(q.into_iter().map(|c| c.to_integer()).collect()))
    }

    /// Remainder over the rationals, cleared of denominators by a positive factor
    /// and made primitive with positive scaling (signs are preserved).
    fn rem_scaled(&self, d: &Poly) -> Poly {
        let (_, r) = self.div_rem_rational(d);
        from_rationals_positive(&r)
    }

    /// Primitive greatest common divisor with positive leading coefficient.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.primitive();
        let mut b = other.primitive();
        while !b.is_zero() {
            let r = a.rem_scaled(&b);
            a = b;
            b = r.primitive();
        }
        a.primitive()
    }

    /// Yun's square-free decomposition of a primitive polynomial:
    /// `(factor, multiplicity)` with square-free, pairwise coprime factors of
    /// positive degree.
    pub fn square_free_decomposition(&self) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.primitive();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.div_exact_primitive(&a0);
        let mut c = fp.div_exact_primitive(&a0);
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        loop {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_exact_primitive(&a);
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.div_exact_primitive(&a);
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Quotient by a primitive divisor; integral by Gauss's lemma.
    fn div_exact_primitive(&self, d: &Poly) -> Poly {
        self.div_exact(d).expect("inexact division in square-free decomposition")
    }

    pub fn square_free_part(&self) -> Poly {
        self.square_free_decomposition()
            .into_iter()
            .fold(Poly::one(), |acc, (f, _)| acc.mul(&f))
    }

    /// Sturm chain of a square-free polynomial.
    pub fn sturm_sequence(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].rem_scaled(&seq[n - 1]).neg();
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        seq.retain(|p| !p.is_zero());
        seq
    }

    /// Complex roots by Durand-Kerner iteration, in double precision.
    pub fn complex_roots(&self) -> Vec<Complex64> {
        let deg = match self.degree() {
            Some(d) if d > 0 => d,
            _ => return Vec::new(),
        };
        let lead = self.leading().to_f64().unwrap_or(1.0);
        let monic: Vec<f64> = self
            .coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN) / lead)
            .collect();
        let eval = |x: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c);
        let radius = 1.0 + monic[..deg].iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let seed = Complex64::from_polar(1.0, 0.4);
        let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * radius * 0.5).collect();
        for _ in 0..2000 {
            let mut delta: f64 = 0.0;
            for i in 0..deg {
                let mut den = Complex64::new(1.0, 0.0);
                for j in 0..deg {
                    if i != j {
                        den *= roots[i] - roots[j];
                    }
                }
                let step = eval(roots[i]) / den;
                roots[i] -= step;
                delta = delta.max(step.norm());
            }
            if delta < 1e-15 {
                break;
            }
        }
        roots
    }
}

/// Clear denominators with a positive factor, then divide by the positive content.
fn from_rationals_positive(r: &[BigRational]) -> Poly {
    let den = r.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let p = Poly::new(r.iter().map(|c| c.numer() * (&den / c.denom())).collect());
    let g = p.content();
    if g.is_zero() {
        p
    } else {
        Poly { coeffs: p.coeffs.iter().map(|x| x / &g).collect() }
    }
}

fn sign_changes(values: &[BigRational]) -> usize {
    let signs: Vec<bool> = values.iter().filter(|v| !v.is_zero()).map(|v| v.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn sturm_count_at(seq: &[Poly], x: &BigRational) -> usize {
    let values: Vec<BigRational> = seq.iter().map(|p| p.eval(x)).collect();
    sign_changes(&values)
}

/// A real root known to lie in `[lo, hi]`, or known exactly when `lo == hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: BigRational,
    pub hi: BigRational,
    pub multiplicity: usize,
}

impl RootInterval {
    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }
}

/// Isolate the real roots of a square-free `p` in `(lo, hi]` and bisect each
/// until the bracket is narrower than `2^-bits`.
fn isolate_square_free(p: &Poly, lo: &BigRational, hi: &BigRational, bits: u32, multiplicity: usize) -> Vec<RootInterval> {
    let seq = p.sturm_sequence();
    let tol = BigRational::new(BigInt::one(), BigInt::one() << bits);
    let two = BigRational::from_integer(2.into());
    let mut found = Vec::new();
    let mut stack = vec![(lo.clone(), hi.clone(), sturm_count_at(&seq, lo), sturm_count_at(&seq, hi))];
    while let Some((a, b, va, vb)) = stack.pop() {
        let count = va.saturating_sub(vb);
        if count == 0 {
            continue;
        }
        if count == 1 {
            found.push(refine(p, a, b, &tol, multiplicity));
            continue;
        }
        let m = (&a + &b) / &two;
        let vm = sturm_count_at(&seq, &m);
        stack.push((m.clone(), b, vm, vb));
        stack.push((a, m, va, vm));
    }
    found.sort_by(|x, y| x.lo.cmp(&y.lo));
    found
}

/// Bisection on a bracket `(a, b]` holding exactly one root of square-free `p`.
fn refine(p: &Poly, mut a: BigRational, mut b: BigRational, tol: &BigRational, multiplicity: usize) -> RootInterval {
    let two = BigRational::from_integer(2.into());
    let fb = p.eval(&b);
    if fb.is_zero() {
        return RootInterval { lo: b.clone(), hi: b, multiplicity };
    }
    let sb = fb.is_positive();
    while &b - &a > *tol {
        let m = (&a + &b) / &two;
        let fm = p.eval(&m);
        if fm.is_zero() {
            return RootInterval { lo: m.clone(), hi: m, multiplicity };
        }
        if fm.is_positive() == sb {
            b = m;
        } else {
            a = m;
        }
    }
    RootInterval { lo: a, hi: b, multiplicity }
}

/// All real roots of `p` in `(lo, hi]` with multiplicities, sorted increasingly.
pub fn real_roots_in(p: &Poly, lo: &BigRational, hi: &BigRational, bits: u32) -> Vec<RootInterval> {
    let mut out = Vec::new();
    for (factor, mult) in p.square_free_decomposition() {
        out.extend(isolate_square_free(&factor, lo, hi, bits, mult));
    }
    out.sort_by(|x, y| x.lo.cmp(&y.lo));
    out
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if k == 1 {
                        write!(f, "z")?;
                    } else {
                        write!(f, "z^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Quotient of integer polynomials, kept in lowest terms with a denominator
/// whose leading coefficient is positive.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunc {
    num: Poly,
    den: Poly,
}

impl RationalFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self, PolyError> {
        if den.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(RationalFunc { num, den: Poly::one() });
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.degree() == Some(0) {
            (num, den)
        } else {
            let n = from_rationals_keep_scale(&num, &g);
            let d = from_rationals_keep_scale(&den, &g);
            (n, d)
        };
        let c = num.content().gcd(&den.content());
        if !c.is_one() {
            num = Poly { coeffs: num.coeffs.iter().map(|x| x / &c).collect() };
            den = Poly { coeffs: den.coeffs.iter().map(|x| x / &c).collect() };
        }
        if den.leading().is_negative() {
            num = num.neg();
            den = den.neg();
        }
        Ok(RationalFunc { num, den })
    }

    pub fn from_poly(p: Poly) -> Self {
        RationalFunc { num: p, den: Poly::one() }
    }

    pub fn from_i64s(num: &[i64], den: &[i64]) -> Result<Self, PolyError> {
        Self::new(Poly::from_i64s(num), Poly::from_i64s(den))
    }

    pub fn constant(c: i64) -> Self {
        Self::from_poly(Poly::from_i64s(&[c]))
    }

    /// The identity function `z`.
    pub fn z() -> Self {
        Self::from_poly(Poly::from_i64s(&[0, 1]))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &RationalFunc) -> RationalFunc {
        Self::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den)).expect("nonzero")
    }

    pub fn sub(&self, o: &RationalFunc) -> RationalFunc {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RationalFunc {
        RationalFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, o: &RationalFunc) -> RationalFunc {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero")
    }

    pub fn scale(&self, c: i64) -> RationalFunc {
        self.mul(&Self::constant(c))
    }

    pub fn div(&self, o: &RationalFunc) -> Result<RationalFunc, PolyError> {
        if o.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        Self::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn inverse(&self) -> Result<RationalFunc, PolyError> {
        Self::constant(1).div(self)
    }

    pub fn pow(&self, e: u32) -> RationalFunc {
        RationalFunc { num: self.num.pow(e), den: self.den.pow(e) }
    }

    pub fn derivative(&self) -> RationalFunc {
        let n = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        Self::new(n, self.den.mul(&self.den)).expect("nonzero")
    }

    /// Exact value; `None` at a pole.
    pub fn eval(&self, x: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.num.eval_f64(x) / self.den.eval_f64(x)
    }

    /// Power series expansion to the given order.
    pub fn to_series(&self, order: usize) -> Result<Series, PolyError> {
        if self.den.coeff(0).is_zero() {
            return Err(PolyError::PoleAtOrigin);
        }
        let n = Series::from_bigints(self.num.coeffs(), order);
        let d = Series::from_bigints(self.den.coeffs(), order);
        Ok(n.mul(&d.inverse()?)?)
    }

    /// Coefficients `[z^0 .. z^order]` by the linear recurrence of the
    /// denominator, for integer-valued expansions with `den(0) = ±1`.
    /// Falls back to [`RationalFunc::to_series`] otherwise.
    pub fn integer_coefficients(&self, order: usize) -> Result<Vec<BigInt>, PolyError> {
        let d0 = self.den.coeff(0);
        if d0.is_zero() {
            return Err(PolyError::PoleAtOrigin);
        }
        if !d0.abs().is_one() {
            let s = self.to_series(order)?;
            return s
                .coeffs()
                .iter()
                .map(|c| if c.is_integer() { Ok(c.to_integer()) } else { Err(PolyError::PoleAtOrigin) })
                .collect();
        }
        let dc = self.den.coeffs();
        let mut out: Vec<BigInt> = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut acc = self.num.coeff(n);
            for (k, c) in dc.iter().enumerate().skip(1) {
                if k > n {
                    break;
                }
                if !c.is_zero() {
                    acc -= c * &out[n - k];
                }
            }
            out.push(if d0.is_one() { acc } else { -acc });
        }
        Ok(out)
    }
}

/// Divide `p` by `g` over the rationals, keeping the integer scale of `p`
/// when the quotient is integral (it is when `g` is primitive).
fn from_rationals_keep_scale(p: &Poly, g: &Poly) -> Poly {
    match p.div_exact(g) {
        Some(q) => q,
        None => {
            let (q, _) = p.div_rem_rational(g);
            from_rationals_positive(&q)
        }
    }
}

impl fmt::Debug for RationalFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn gcd_and_normalization() {
        // (1-z)(1+z) / ((1-z)(1-2z))
        let r = RationalFunc::from_i64s(&[1, 0, -1], &[1, -3, 2]).unwrap();
        assert_eq!(r.num(), &Poly::from_i64s(&[-1, -1]));
        assert_eq!(r.den(), &Poly::from_i64s(&[-1, 2]));
        let s = RationalFunc::from_i64s(&[2, 4], &[-6]).unwrap();
        assert_eq!(s.num(), &Poly::from_i64s(&[-1, -2]));
        assert_eq!(s.den(), &Poly::from_i64s(&[3]));
    }

    #[test]
    fn series_expansion() {
        let f = RationalFunc::from_i64s(&[1, -1], &[1, -2]).unwrap();
        let s = f.to_series(5).unwrap();
        assert_eq!(s, Series::from_i64s(&[1, 1, 2, 4, 8, 16], 5));
        let ints = f.integer_coefficients(5).unwrap();
        assert_eq!(ints, [1, 1, 2, 4, 8, 16].map(BigInt::from).to_vec());
        let pole = RationalFunc::from_i64s(&[1], &[0, 1]).unwrap();
        assert_eq!(pole.to_series(3), Err(PolyError::PoleAtOrigin));
    }

    #[test]
    fn square_free_decomposition_of_powers() {
        // (z-1)^2 (z+2)^3 z
        let a = Poly::from_i64s(&[-1, 1]).pow(2);
        let b = Poly::from_i64s(&[2, 1]).pow(3);
        let c = Poly::from_i64s(&[0, 1]);
        let p = a.mul(&b).mul(&c);
        let mut dec = p.square_free_decomposition();
        dec.sort_by_key(|(_, m)| *m);
        assert_eq!(dec.len(), 3);
        assert_eq!(dec[0], (Poly::from_i64s(&[0, 1]), 1));
        assert_eq!(dec[1], (Poly::from_i64s(&[-1, 1]), 2));
        assert_eq!(dec[2], (Poly::from_i64s(&[2, 1]), 3));
    }

    #[test]
    fn roots_of_linear_and_cubic() {
        let p = Poly::from_i64s(&[1, -5]);
        let roots = real_roots_in(&p, &q(0, 1), &q(1, 1), 60);
        assert_eq!(roots.len(), 1);
        assert!(roots[0].lo <= q(1, 5) && q(1, 5) <= roots[0].hi);
        assert!(roots[0].width() < q(1, 1 << 40));
        assert_eq!(roots[0].multiplicity, 1);
        // (z-1)(z^3-11z^2+7z-1)
        let p = Poly::from_i64s(&[-1, 1]).mul(&Poly::from_i64s(&[-1, 7, -11, 1]));
        let roots = real_roots_in(&p, &q(0, 1), &q(2, 1), 80);
        assert_eq!(roots.len(), 3);
        assert!((roots[0].to_f64() - 0.212_346_894_9).abs() < 1e-9);
        assert_eq!(roots[2].lo, q(1, 1));
    }

    #[test]
    fn repeated_root_multiplicity() {
        let p = Poly::from_i64s(&[1, -3]).pow(2).mul(&Poly::from_i64s(&[1, 1]));
        let roots = real_roots_in(&p, &q(0, 1), &q(1, 1), 40);
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 2);
        assert!(roots[0].lo <= q(1, 3) && q(1, 3) <= roots[0].hi);
    }

    #[test]
    fn complex_roots_of_unity() {
        let p = Poly::from_i64s(&[-1, 0, 0, 1]);
        let roots = p.complex_roots();
        assert_eq!(roots.len(), 3);
        for r in roots {
            assert!((r.norm() - 1.0).abs() < 1e-10);
            assert!((r.powu(3) - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        }
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        proptest::collection::vec(-6i64..6, 1..5).prop_map(|v| Poly::from_i64s(&v))
    }

    proptest! {
        #[test]
        fn gcd_divides_both(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assume!(!c.is_zero());
            let x = a.mul(&c);
            let y = b.mul(&c);
            prop_assume!(!x.is_zero() && !y.is_zero());
            let g = x.gcd(&y);
            prop_assert!(x.div_rem_rational(&g).1.is_empty());
            prop_assert!(y.div_rem_rational(&g).1.is_empty());
            prop_assert!(g.degree() >= c.degree());
        }

        #[test]
        fn ratfunc_arithmetic_matches_series(a in arb_poly(), b in arb_poly(), c in arb_poly(), d in arb_poly()) {
            prop_assume!(!b.coeff(0).is_zero() && !d.coeff(0).is_zero());
            let f = RationalFunc::new(a, b).unwrap();
            let g = RationalFunc::new(c, d).unwrap();
            let order = 12;
            let fs = f.to_series(order).unwrap();
            let gs = g.to_series(order).unwrap();
            prop_assert_eq!(f.mul(&g).to_series(order).unwrap(), fs.mul(&gs).unwrap());
            prop_assert_eq!(f.add(&g).to_series(order).unwrap(), fs.add(&gs).unwrap());
            prop_assert_eq!(f.derivative().to_series(order).unwrap().truncate(order - 1).unwrap(),
                fs.theta().div_z_pow(1).unwrap());
        }
    }
}
