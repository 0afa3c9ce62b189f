//! Arbitrary-precision reals for the asymptotic constants.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;

const RM: RoundingMode = RoundingMode::ToEven;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: usize = 128;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

/// A binary floating-point number with a fixed working precision.
#[derive(Clone, Debug)]
pub struct Real {
    v: BigFloat,
    p: usize,
}

impl Real {
    pub fn precision(&self) -> usize {
        self.p
    }

    pub fn from_i64(i: i64, p: usize) -> Real {
        Real { v: BigFloat::from_i64(i, p), p }
    }

    pub fn from_f64(x: f64, p: usize) -> Real {
        Real { v: BigFloat::from_f64(x, p), p }
    }

    pub fn from_bigint(n: &BigInt, p: usize) -> Real {
        let s = n.to_string();
        let v = CONSTS.with(|c| BigFloat::parse(&s, Radix::Dec, p, RM, &mut c.borrow_mut()));
        Real { v, p }
    }

    pub fn from_rational(q: &BigRational, p: usize) -> Real {
        Real::from_bigint(q.numer(), p).div(&Real::from_bigint(q.denom(), p))
    }

    pub fn pi(p: usize) -> Real {
        let v = CONSTS.with(|c| c.borrow_mut().pi(p, RM));
        Real { v, p }
    }

    pub fn add(&self, o: &Real) -> Real {
        Real { v: self.v.add(&o.v, self.p, RM), p: self.p }
    }

    pub fn sub(&self, o: &Real) -> Real {
        Real { v: self.v.sub(&o.v, self.p, RM), p: self.p }
    }

    pub fn mul(&self, o: &Real) -> Real {
        Real { v: self.v.mul(&o.v, self.p, RM), p: self.p }
    }

    pub fn div(&self, o: &Real) -> Real {
        Real { v: self.v.div(&o.v, self.p, RM), p: self.p }
    }

    pub fn neg(&self) -> Real {
        Real { v: self.v.neg(), p: self.p }
    }

    pub fn abs(&self) -> Real {
        Real { v: self.v.abs(), p: self.p }
    }

    pub fn sqrt(&self) -> Real {
        Real { v: self.v.sqrt(self.p, RM), p: self.p }
    }

    pub fn powi(&self, n: usize) -> Real {
        Real { v: self.v.powi(n, self.p, RM), p: self.p }
    }

    pub fn recip(&self) -> Real {
        Real { v: self.v.reciprocal(self.p, RM), p: self.p }
    }

    pub fn is_positive(&self) -> bool {
        self.v.is_positive() && !self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    /// Nearest double; infinite or NaN values map to the IEEE equivalents.
    pub fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.v.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        self.to_string().parse().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with all digits the precision carries.
    pub fn to_decimal(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = CONSTS
            .with(|c| self.v.format(Radix::Dec, RM, &mut c.borrow_mut()))
            .unwrap_or_else(|_| "NaN".to_string());
        write!(f, "{s}")
    }
}

impl PartialEq for Real {
    fn eq(&self, o: &Real) -> bool {
        self.partial_cmp(o) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, o: &Real) -> Option<Ordering> {
        self.v.cmp(&o.v).map(|c| c.cmp(&0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_and_sqrt() {
        let pi = Real::pi(128);
        assert!((pi.to_f64() - std::f64::consts::PI).abs() < 1e-15);
        let two = Real::from_i64(2, 128);
        let r = two.sqrt();
        assert!((r.mul(&r).sub(&two)).abs().to_f64() < 1e-35);
    }

    #[test]
    fn rational_and_big_integers() {
        let q = BigRational::new(1.into(), 3.into());
        let x = Real::from_rational(&q, 128);
        assert!((x.to_f64() - 1.0 / 3.0).abs() < 1e-16);
        let big = BigInt::from(10).pow(300);
        let y = Real::from_bigint(&big, 128);
        assert!((y.to_f64() / 1e300 - 1.0).abs() < 1e-12);
        let tiny = y.recip().powi(3);
        assert!(tiny.is_positive());
        assert_eq!(tiny.to_f64(), 0.0);
    }
}
