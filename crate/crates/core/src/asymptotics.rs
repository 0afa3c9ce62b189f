//! Dominant singularities, coefficient estimates and expectation slopes.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::classes::{
    class_gf, class_ratfunc, cumulative_gf, cumulative_ratfunc, flower_param_ratfunc, flower_ratfunc, sqrt_shape_ratfunc,
    ClassError, ClassSpec, Family, FlowerKind, IndexSet, Parameter,
};
use crate::poly::{real_roots_in, Poly, PolyError, RationalFunc, RootInterval};
use crate::real::{Real, DEFAULT_PRECISION};

/// Order of the series used for period detection and for `n0`.
pub const PERIOD_ORDER: usize = 48;
/// Index at which empirical slopes are measured.
pub const EMPIRICAL_INDEX: usize = 400;

const ON_CIRCLE_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("out of scope for this analysis: {0}")]
    OutOfScopeAnalysis(String),
    #[error("dominant singularity not simple: {0}")]
    NonSimpleDominantRoot(String),
    #[error("no dominant singularity found: {0}")]
    NoSingularity(String),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularityKind {
    SqrtBranch,
    Pole(usize),
    PolynomialGrowth(usize),
}

#[derive(Clone, Debug)]
pub struct RealRoot {
    pub value: Real,
    pub multiplicity: usize,
    pub interval: RootInterval,
}

#[derive(Clone, Debug)]
pub struct SingularityReport {
    pub kind: SingularityKind,
    pub zeta_or_alpha: Real,
    pub interval: RootInterval,
    /// Support gcd; the dominant singularities sit at `zeta * w` with `w^period = 1`.
    pub period: usize,
    /// Exponents carrying nonzero coefficients are congruent to this modulo `period`.
    pub residue: usize,
    pub simple: bool,
}

/// `constant * n^(half_exponent / 2) * growth_base^n` on `n = residue (mod period)`, zero elsewhere.
#[derive(Clone, Debug)]
pub struct AsymptoticEstimate {
    pub constant: Real,
    pub growth_base: Real,
    pub half_exponent: i64,
    pub period: usize,
    pub residue: usize,
    /// First index from which the exact coefficients on the residue class stay positive.
    pub n0: usize,
}

impl AsymptoticEstimate {
    pub fn polynomial_exponent(&self) -> f64 {
        self.half_exponent as f64 / 2.0
    }

    pub fn supports(&self, n: usize) -> bool {
        n % self.period == self.residue
    }

    pub fn estimate(&self, n: usize) -> Real {
        let p = self.constant.precision();
        if !self.supports(n) {
            return Real::from_i64(0, p);
        }
        let nn = Real::from_i64(n as i64, p);
        let mut poly = nn.powi(self.half_exponent.unsigned_abs() as usize / 2);
        if self.half_exponent % 2 != 0 {
            poly = poly.mul(&nn.sqrt());
        }
        if self.half_exponent < 0 {
            poly = poly.recip();
        }
        self.constant.mul(&poly).mul(&self.growth_base.powi(n))
    }

    pub fn closure(&self) -> impl Fn(usize) -> Real + '_ {
        move |n| self.estimate(n)
    }
}

#[derive(Clone, Debug)]
pub struct ExpectationSlope {
    /// Limit of `[z^n]Omega / (n [z^n]f)` from the singular expansions of both.
    pub c: Real,
    /// The value of the closed expectation formula for this case, when one exists.
    pub display: Option<Real>,
    /// `[z^n]Omega / (n [z^n]f)` from exact coefficients.
    pub empirical: f64,
    pub empirical_index: usize,
}

/// Real zeros of the numerator of `p` in `(0, bound]`.
pub fn real_roots(p: &RationalFunc, bound: &BigRational, bits: usize) -> Vec<RealRoot> {
    let bits = bits.max(48);
    real_roots_in(p.num(), &BigRational::zero(), bound, bits as u32 + 8)
        .into_iter()
        .map(|interval| RealRoot {
            value: Real::from_rational(&interval.midpoint(), bits),
            multiplicity: interval.multiplicity,
            interval,
        })
        .collect()
}

fn poly_at(p: &Poly, x: &Real) -> Real {
    let prec = x.precision();
    let mut acc = Real::from_i64(0, prec);
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(x).add(&Real::from_bigint(c, prec));
    }
    acc
}

fn ratfunc_at(r: &RationalFunc, x: &Real) -> Real {
    poly_at(r.num(), x).div(&poly_at(r.den(), x))
}

fn real(i: i64, p: usize) -> Real {
    Real::from_i64(i, p)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Case {
    All,
    One,
    Two,
    OneTwo,
}

fn case_of(k: &IndexSet) -> Option<Case> {
    match k {
        IndexSet::AllPositive => Some(Case::All),
        IndexSet::Finite(v) => match v.as_slice() {
            [1] => Some(Case::One),
            [2] => Some(Case::Two),
            [1, 2] => Some(Case::OneTwo),
            _ => None,
        },
    }
}

enum Regime {
    Sqrt,
    Pole,
    Polynomial,
}

fn regime(spec: &ClassSpec) -> Result<Regime, AsymptoticsError> {
    let case = case_of(&spec.k_set)
        .ok_or_else(|| AsymptoticsError::OutOfScopeAnalysis(format!("K = {} has no closed form", spec.k_set)))?;
    if !spec.has_rational_flower() {
        let what = if case == Case::One {
            "K = {1} with non-plane flowers over an infinite petal set"
        } else {
            "non-plane flowers over an infinite petal set"
        };
        return Err(AsymptoticsError::OutOfScopeAnalysis(what.to_string()));
    }
    Ok(match case {
        Case::One if spec.family == Family::R && spec.flower == FlowerKind::NonPlane && spec.n_set.len().is_some_and(|l| l >= 2) => {
            Regime::Polynomial
        }
        Case::One => Regime::Pole,
        _ => Regime::Sqrt,
    })
}

/// Exact coefficients of `f` up to `order`.
pub fn exact_coefficients(spec: &ClassSpec, order: usize) -> Result<Vec<BigInt>, AsymptoticsError> {
    if case_of(&spec.k_set) == Some(Case::One) && spec.has_rational_flower() {
        return Ok(class_ratfunc(spec)?.integer_coefficients(order)?);
    }
    Ok(class_gf(spec, order)?.to_integers().expect("integer coefficients"))
}

/// Exact coefficients of the cumulative generating function up to `order`.
pub fn exact_cumulative(spec: &ClassSpec, param: Parameter, order: usize) -> Result<Vec<BigInt>, AsymptoticsError> {
    if case_of(&spec.k_set) == Some(Case::One) && spec.has_rational_flower() {
        return Ok(cumulative_ratfunc(spec, param)?.integer_coefficients(order)?);
    }
    Ok(cumulative_gf(spec, param, order)?.to_integers().expect("integer coefficients"))
}

/// `(period, residue)` of the support of a coefficient list.
pub fn support_period(coeffs: &[BigInt]) -> (usize, usize) {
    let support: Vec<usize> = (0..coeffs.len()).filter(|&i| !coeffs[i].is_zero()).collect();
    let Some(&first) = support.first() else {
        return (1, 0);
    };
    let d = support.iter().fold(0usize, |g, &e| g.gcd(&(e - first)));
    if d == 0 {
        (1, 0)
    } else {
        (d, first % d)
    }
}

/// Roots of `p` on the circle `|z| = r`, each with its multiplicity, plus
/// a flag telling whether any root lies strictly inside.
fn roots_near_circle(p: &Poly, r: f64) -> (Vec<(Complex64, usize)>, bool) {
    let mut on = Vec::new();
    let mut inside = false;
    for (factor, mult) in p.square_free_decomposition() {
        if factor.degree().unwrap_or(0) == 0 {
            continue;
        }
        for z in factor.complex_roots() {
            let rel = (z.norm() - r) / r;
            if rel.abs() < ON_CIRCLE_TOLERANCE {
                on.push((z, mult));
            } else if rel < 0.0 {
                inside = true;
            }
        }
    }
    (on, inside)
}

/// Check that the roots of top multiplicity on `|z| = r` are exactly `r w` with `w^d = 1`.
fn check_periodic(on_circle: &[(Complex64, usize)], r: f64, top: usize, d: usize) -> Result<(), String> {
    let dominant: Vec<Complex64> = on_circle.iter().filter(|(_, m)| *m >= top).map(|(z, _)| *z).collect();
    if on_circle.iter().any(|(_, m)| *m > top) {
        return Err("a root on the circle has larger multiplicity than the real one".into());
    }
    if dominant.len() != d {
        return Err(format!("{} dominant singularities found, period {d} predicts {d}", dominant.len()));
    }
    for z in &dominant {
        let w = z / r;
        let wd = w.powu(d as u32);
        if (wd - Complex64::new(1.0, 0.0)).norm() > 1e-5 {
            return Err(format!("dominant singularity {z} is not a rotation of the real one by a {d}-th root of unity"));
        }
    }
    Ok(())
}

fn first_positive_pole(den: &Poly, bits: usize) -> Option<RootInterval> {
    let two = BigRational::from_integer(2.into());
    real_roots_in(den, &BigRational::zero(), &two, bits as u32).into_iter().next()
}

/// Locate the dominant singularity of `f`.
pub fn analyze(spec: &ClassSpec) -> Result<SingularityReport, AsymptoticsError> {
    analyze_with_precision(spec, DEFAULT_PRECISION)
}

pub fn analyze_with_precision(spec: &ClassSpec, bits: usize) -> Result<SingularityReport, AsymptoticsError> {
    let bits = bits.max(64);
    let reg = regime(spec)?;
    let (period, residue) = support_period(&exact_coefficients(spec, PERIOD_ORDER)?);
    match reg {
        Regime::Sqrt => {
            let f = flower_ratfunc(spec.flower, &spec.n_set, spec.starred)?;
            let pole = first_positive_pole(f.den(), bits);
            let bound = pole.as_ref().map(|p| p.lo.clone()).unwrap_or_else(|| BigRational::from_integer(2.into()));
            let p = sqrt_shape_ratfunc(spec)?.p;
            let root = real_roots(&p, &bound, bits)
                .into_iter()
                .find(|r| pole.as_ref().is_none_or(|q| r.interval.hi < q.lo))
                .ok_or_else(|| AsymptoticsError::NoSingularity(format!("radicand {} has no root below the flower pole", p.num())))?;
            let simple = root.multiplicity == 1;
            if simple {
                let r = root.value.to_f64();
                let (on, inside) = roots_near_circle(p.num(), r);
                if inside {
                    return Err(AsymptoticsError::NonSimpleDominantRoot("radicand vanishes inside the disc of convergence".into()));
                }
                check_periodic(&on, r, 1, period).map_err(AsymptoticsError::NonSimpleDominantRoot)?;
            }
            Ok(SingularityReport {
                kind: SingularityKind::SqrtBranch,
                zeta_or_alpha: root.value,
                interval: root.interval,
                period,
                residue,
                simple,
            })
        }
        Regime::Pole | Regime::Polynomial => {
            let f = class_ratfunc(spec)?;
            let root = real_roots(&RationalFunc::from_poly(f.den().clone()), &BigRational::from_integer(2.into()), bits)
                .into_iter()
                .next()
                .ok_or_else(|| AsymptoticsError::NoSingularity(format!("denominator {} has no positive root", f.den())))?;
            let r = root.value.to_f64();
            let (on, inside) = roots_near_circle(f.den(), r);
            if inside {
                return Err(AsymptoticsError::NonSimpleDominantRoot("a pole lies closer to the origin than the real one".into()));
            }
            check_periodic(&on, r, root.multiplicity, period).map_err(AsymptoticsError::NonSimpleDominantRoot)?;
            let kind = match reg {
                Regime::Polynomial => SingularityKind::PolynomialGrowth(spec.n_set.len().unwrap_or(0)),
                _ => SingularityKind::Pole(root.multiplicity),
            };
            Ok(SingularityReport {
                kind,
                zeta_or_alpha: root.value,
                interval: root.interval,
                period,
                residue,
                simple: root.multiplicity == 1,
            })
        }
    }
}

/// Multiplicity of the root bracketed by `at` as a zero of `p`.
fn multiplicity_at(p: &Poly, at: &RootInterval) -> usize {
    let pad = BigRational::new(BigInt::one(), BigInt::one() << 200u32);
    let lo = &at.lo - &pad;
    let hi = &at.hi + &pad;
    real_roots_in(p, &lo, &hi, 0).into_iter().map(|r| r.multiplicity).max().unwrap_or(0)
}

fn factorial(k: usize, p: usize) -> Real {
    (1..=k as i64).fold(real(1, p), |acc, i| acc.mul(&real(i, p)))
}

/// Leading term `C n^(r-1) alpha^-n` of a rational function with a pole of
/// order `r` at `alpha`; returns `(C, r)`.
fn pole_constant(g: &RationalFunc, report: &SingularityReport) -> (Real, usize) {
    let alpha = &report.zeta_or_alpha;
    let prec = alpha.precision();
    let r = multiplicity_at(g.den(), &report.interval);
    if r == 0 {
        return (real(0, prec), 0);
    }
    let mut q = g.den().clone();
    for _ in 0..r {
        q = q.derivative();
    }
    let neg_alpha_r = alpha.neg().powi(r);
    let c0 = poly_at(g.num(), alpha)
        .mul(&factorial(r, prec))
        .div(&poly_at(&q, alpha).mul(&neg_alpha_r));
    (c0.div(&factorial(r - 1, prec)), r)
}

/// `-zeta p'(zeta)` for the radicand.
fn minus_zeta_dp(p: &RationalFunc, zeta: &Real) -> Real {
    ratfunc_at(&p.derivative(), zeta).mul(zeta).neg()
}

fn first_positive(coeffs: &[BigInt], period: usize, residue: usize) -> usize {
    let mut n0 = coeffs.len();
    for n in (residue..coeffs.len()).step_by(period).rev() {
        if coeffs[n].is_positive() {
            n0 = n;
        } else {
            break;
        }
    }
    n0
}

/// Asymptotic estimate of `[z^n] f`.
pub fn estimate_coefficients(spec: &ClassSpec) -> Result<AsymptoticEstimate, AsymptoticsError> {
    estimate_coefficients_with_precision(spec, DEFAULT_PRECISION)
}

pub fn estimate_coefficients_with_precision(spec: &ClassSpec, bits: usize) -> Result<AsymptoticEstimate, AsymptoticsError> {
    let report = analyze_with_precision(spec, bits)?;
    estimate_from_report(spec, &report)
}

pub fn estimate_from_report(spec: &ClassSpec, report: &SingularityReport) -> Result<AsymptoticEstimate, AsymptoticsError> {
    let zeta = &report.zeta_or_alpha;
    let prec = zeta.precision();
    let d = real(report.period as i64, prec);
    let (constant, half_exponent) = match report.kind {
        SingularityKind::SqrtBranch => {
            if !report.simple {
                return Err(AsymptoticsError::NonSimpleDominantRoot(format!("radicand root {zeta} is repeated")));
            }
            let shape = sqrt_shape_ratfunc(spec)?;
            let theta = minus_zeta_dp(&shape.p, zeta).sqrt().div(&real(2, prec).mul(&Real::pi(prec).sqrt()));
            (theta.div(&ratfunc_at(&shape.w, zeta)), -3)
        }
        SingularityKind::Pole(_) => {
            let (c, r) = pole_constant(&class_ratfunc(spec)?, report);
            (c, 2 * (r as i64 - 1))
        }
        SingularityKind::PolynomialGrowth(k) => {
            let members = spec.n_set.members_up_to(usize::MAX);
            let prod = members.iter().fold(real(1, prec), |acc, &m| acc.mul(&real(m as i64, prec)));
            (prod.mul(&factorial(k, prec)).recip(), 2 * k as i64)
        }
    };
    let coeffs = exact_coefficients(spec, PERIOD_ORDER)?;
    Ok(AsymptoticEstimate {
        constant: constant.mul(&d),
        growth_base: zeta.recip(),
        half_exponent,
        period: report.period,
        residue: report.residue,
        n0: first_positive(&coeffs, report.period, report.residue),
    })
}

/// Value of the closed expectation formula quoted for the case, if any.
fn display_slope(spec: &ClassSpec, param: Parameter, report: &SingularityReport) -> Result<Option<Real>, AsymptoticsError> {
    let x = &report.zeta_or_alpha;
    let prec = x.precision();
    let f = flower_ratfunc(spec.flower, &spec.n_set, spec.starred)?;
    let fu = ratfunc_at(&flower_param_ratfunc(spec.flower, &spec.n_set, param)?, x);
    let fx = ratfunc_at(&f, x);
    let one = real(1, prec);
    let k = |i: i64| real(i, prec);
    let value = match report.kind {
        SingularityKind::SqrtBranch => {
            let shape = sqrt_shape_ratfunc(spec)?;
            let mdp = ratfunc_at(&shape.p.derivative(), x).neg();
            let mzfdp = mdp.mul(x).mul(&fx);
            let xf = x.mul(&fx);
            let x2f2 = xf.mul(&xf);
            match (case_of(&spec.k_set), spec.family) {
                (Some(Case::All), Family::R) => k(2).mul(&one.add(x).sub(&xf)).mul(&fu).div(&mdp),
                (Some(Case::All | Case::Two), Family::S) => k(2).mul(&one.sub(&k(2).mul(&xf))).mul(&fu).div(&mzfdp),
                (Some(Case::All | Case::Two), Family::T) => k(4).mul(&fu).div(&mdp),
                (Some(Case::Two), Family::R) => k(4).mul(x).mul(&fu).div(&mdp),
                (Some(Case::OneTwo), Family::R) => k(4).mul(&x.mul(x)).mul(&fu).div(&mdp.mul(x)),
                (Some(Case::OneTwo), Family::S) => k(2)
                    .mul(&k(2).sub(&k(3).mul(&xf)).sub(&k(3).mul(&x2f2)))
                    .mul(&fu)
                    .div(&mzfdp),
                (Some(Case::OneTwo), Family::T) => k(2).mul(&one.sub(&xf)).mul(&fu).div(&mzfdp),
                _ => return Ok(None),
            }
        }
        SingularityKind::Pole(_) => {
            let fp = ratfunc_at(&f.derivative(), x);
            let f_plus = fx.add(&x.mul(&fp));
            match spec.family {
                Family::S => fu.div(&f_plus),
                Family::T => fu.div(&x.mul(&fx).mul(&f_plus)),
                Family::R if spec.starred => return Ok(None),
                Family::R => match spec.n_set.singleton() {
                    Some(m) => match param {
                        Parameter::Petals => one.div(&k(2 * m as i64)),
                        Parameter::PetalEdges => one.div(&k(2)),
                    },
                    None => {
                        let nz = spec.n_set.to_ratfunc();
                        let n_at = ratfunc_at(&nz, x);
                        let dn_at = ratfunc_at(&nz.derivative(), x);
                        match param {
                            Parameter::Petals => n_at.div(&x.mul(&dn_at)),
                            Parameter::PetalEdges => one.div(&dn_at),
                        }
                    }
                },
            }
        }
        SingularityKind::PolynomialGrowth(size) => {
            let members = spec.n_set.members_up_to(usize::MAX);
            let denom = k(size as i64 + 1);
            match param {
                Parameter::Petals => members
                    .iter()
                    .fold(real(0, prec), |acc, &m| acc.add(&one.div(&k(m as i64))))
                    .div(&denom),
                Parameter::PetalEdges => k(size as i64).div(&denom),
            }
        }
    };
    Ok(Some(value))
}

/// Linear slope `c` with `E(param) ~ c n` over objects of size `n`.
pub fn expectation_slope(spec: &ClassSpec, param: Parameter) -> Result<ExpectationSlope, AsymptoticsError> {
    expectation_slope_with_precision(spec, param, DEFAULT_PRECISION)
}

pub fn expectation_slope_with_precision(spec: &ClassSpec, param: Parameter, bits: usize) -> Result<ExpectationSlope, AsymptoticsError> {
    let report = analyze_with_precision(spec, bits)?;
    let zeta = &report.zeta_or_alpha;
    let prec = zeta.precision();
    let c = match report.kind {
        SingularityKind::SqrtBranch => {
            if !report.simple {
                return Err(AsymptoticsError::NonSimpleDominantRoot(format!("radicand root {zeta} is repeated")));
            }
            let shape = sqrt_shape_ratfunc(spec)?;
            let fu = flower_param_ratfunc(spec.flower, &spec.n_set, param)?;
            let lead = ratfunc_at(&shape.a.mul(&fu), zeta).div(&ratfunc_at(&shape.d, zeta));
            lead.mul(&ratfunc_at(&shape.w, zeta)).mul(&real(2, prec)).div(&minus_zeta_dp(&shape.p, zeta))
        }
        SingularityKind::Pole(_) | SingularityKind::PolynomialGrowth(_) => {
            let (cf, rf) = pole_constant(&class_ratfunc(spec)?, &report);
            let (co, ro) = pole_constant(&cumulative_ratfunc(spec, param)?, &report);
            if ro != rf + 1 {
                return Err(AsymptoticsError::NoSingularity(format!(
                    "cumulative pole order {ro} does not exceed the counting pole order {rf} by one"
                )));
            }
            co.div(&cf)
        }
    };
    let display = display_slope(spec, param, &report)?;
    let n = EMPIRICAL_INDEX - (EMPIRICAL_INDEX + report.period - report.residue) % report.period;
    let f = exact_coefficients(spec, n)?;
    let omega = exact_cumulative(spec, param, n)?;
    let ratio = BigRational::new(omega[n].clone(), &f[n] * BigInt::from(n));
    let empirical = Real::from_rational(&ratio, prec).to_f64();
    Ok(ExpectationSlope { c, display, empirical, empirical_index: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> ClassSpec {
        s.parse().unwrap()
    }

    #[test]
    fn trivial_root() {
        let p = RationalFunc::from_i64s(&[1, -5], &[1]).unwrap();
        let roots = real_roots(&p, &BigRational::one(), 64);
        assert_eq!(roots.len(), 1);
        assert!((roots[0].value.to_f64() - 0.2).abs() < 1e-15);
        assert_eq!(roots[0].multiplicity, 1);
    }

    #[test]
    fn period_and_residue() {
        let c: Vec<BigInt> = [0, 1, 0, 2, 0, 5].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(support_period(&c), (2, 1));
        let c: Vec<BigInt> = [1, 0, 0, 3, 0, 0, 9].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(support_period(&c), (3, 0));
    }

    #[test]
    fn plane_full_tree_root() {
        let r = analyze(&spec("R:K=all:N=all:flower=plane")).unwrap();
        assert_eq!(r.kind, SingularityKind::SqrtBranch);
        assert!((r.zeta_or_alpha.to_f64() - 0.2123).abs() < 5e-4);
        assert_eq!(r.period, 1);
        assert!(r.simple);
    }

    #[test]
    fn periodic_case() {
        let r = analyze(&spec("S*:K=2:N=2")).unwrap();
        assert_eq!(r.period, 2);
        assert!((r.zeta_or_alpha.to_f64() - 0.657298106).abs() < 1e-8);
    }

    #[test]
    fn mellin_regime_is_out_of_scope() {
        let e = analyze(&spec("R:K=1:N=all:flower=nonplane")).unwrap_err();
        assert!(matches!(e, AsymptoticsError::OutOfScopeAnalysis(_)));
    }

    #[test]
    fn single_petal_size_estimate() {
        let s = spec("R:K=1:N=3");
        let est = estimate_coefficients(&s).unwrap();
        let exact = exact_coefficients(&s, 3000).unwrap();
        let ratio = Real::from_bigint(&exact[3000], 128).div(&est.estimate(3000)).to_f64();
        assert!((ratio - 1.0).abs() < 2e-3, "{ratio}");
    }
}
