//! Class specifications for trees with flowers and their generating functions.
//!
//! Three families are supported: `R` (flowers on the leaves), `S` (flowers on
//! every node but the root) and `T` (flowers on every node), each optionally
//! starred (empty flowers forbidden). A tree has out-degrees drawn from `K`;
//! petal sizes come from `N`; flowers are multisets (non-plane) or sequences
//! (rooted-plane) of petals.
//!
//! Every generating function with a closed form is computed twice: once from
//! the closed form and once by solving the recursive specification. A
//! disagreement is reported as [`ClassError::Mismatch`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{Poly, PolyError, RationalFunc};
use crate::powerseries::{solve_dual_fixed_point, solve_fixed_point, DualSeries, Series, SeriesError};

/// Largest order at which closed forms are also checked against a full
/// iterative solve; above it the closed form is substituted back into the
/// specification, which is an equally strict test by uniqueness of the fixed
/// point but costs one update instead of `order` of them.
pub const ITERATIVE_CHECK_MAX_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("invalid specification: {0}")]
    Invalid(String),
    #[error("non-plane flowers with unbounded petal sizes have no rational generating function")]
    NonRational,
    #[error("no closed form for descendant set K={0}")]
    UnsupportedKSet(String),
    #[error("{what} disagree at z^{index}: closed form {closed}, specification {iterated}")]
    Mismatch { what: String, index: usize, closed: String, iterated: String },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A nonempty set of positive integers, or all of them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexSet {
    Finite(Vec<u32>),
    AllPositive,
}

impl IndexSet {
    /// Sorted, deduplicated finite set; rejects zero and the empty set.
    pub fn finite(values: &[u32]) -> Result<Self, ClassError> {
        let mut v = values.to_vec();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(ClassError::Invalid("index set must be nonempty".into()));
        }
        if v[0] == 0 {
            return Err(ClassError::Invalid("index set elements must be positive".into()));
        }
        Ok(IndexSet::Finite(v))
    }

    pub fn single(k: u32) -> Self {
        Self::finite(&[k]).expect("positive")
    }

    pub fn contains(&self, n: u32) -> bool {
        match self {
            IndexSet::Finite(v) => v.binary_search(&n).is_ok(),
            IndexSet::AllPositive => n >= 1,
        }
    }

    /// Members not exceeding `bound`, increasing.
    pub fn members_up_to(&self, bound: usize) -> Vec<u32> {
        match self {
            IndexSet::Finite(v) => v.iter().copied().filter(|&n| n as usize <= bound).collect(),
            IndexSet::AllPositive => (1..=bound as u32).collect(),
        }
    }

    pub fn singleton(&self) -> Option<u32> {
        match self {
            IndexSet::Finite(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            IndexSet::Finite(v) => Some(v.len()),
            IndexSet::AllPositive => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn smallest(&self) -> u32 {
        match self {
            IndexSet::Finite(v) => v[0],
            IndexSet::AllPositive => 1,
        }
    }

    /// `sum z^n` over members, truncated.
    pub fn to_series(&self, order: usize) -> Series {
        let mut coeffs = vec![BigRational::zero(); order + 1];
        for n in self.members_up_to(order) {
            coeffs[n as usize] = BigRational::one();
        }
        Series::new(coeffs)
    }

    pub fn to_ratfunc(&self) -> RationalFunc {
        match self {
            IndexSet::Finite(v) => {
                let mut c = vec![BigInt::zero(); *v.last().unwrap() as usize + 1];
                for &n in v {
                    c[n as usize] = BigInt::one();
                }
                RationalFunc::from_poly(Poly::new(c))
            }
            IndexSet::AllPositive => RationalFunc::from_i64s(&[0, 1], &[1, -1]).expect("nonzero"),
        }
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSet::AllPositive => write!(f, "all"),
            IndexSet::Finite(v) => {
                let parts: Vec<String> = v.iter().map(u32::to_string).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

impl FromStr for IndexSet {
    type Err = ClassError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_set(s, 0)
    }
}

fn parse_set(s: &str, base: usize) -> Result<IndexSet, ClassError> {
    if s == "all" {
        return Ok(IndexSet::AllPositive);
    }
    if s.is_empty() {
        return Err(ClassError::Parse { position: base, message: "empty set".into() });
    }
    let mut values = Vec::new();
    let mut offset = base;
    for part in s.split(',') {
        let n: u32 = part.trim().parse().map_err(|_| ClassError::Parse {
            position: offset,
            message: format!("expected a positive integer or 'all', found '{part}'"),
        })?;
        if n == 0 {
            return Err(ClassError::Parse { position: offset, message: "set elements must be positive".into() });
        }
        values.push(n);
        offset += part.len() + 1;
    }
    IndexSet::finite(&values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlowerKind {
    NonPlane,
    RootedPlane,
}

impl fmt::Display for FlowerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowerKind::NonPlane => write!(f, "nonplane"),
            FlowerKind::RootedPlane => write!(f, "plane"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    R,
    S,
    T,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Family::R => "R",
            Family::S => "S",
            Family::T => "T",
        };
        write!(f, "{c}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parameter {
    /// Number of petals.
    Petals,
    /// Number of edges in the petals.
    PetalEdges,
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parameter::Petals => write!(f, "petals"),
            Parameter::PetalEdges => write!(f, "edges"),
        }
    }
}

impl FromStr for Parameter {
    type Err = ClassError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "petals" | "chi" => Ok(Parameter::Petals),
            "edges" | "petal-edges" | "xi" => Ok(Parameter::PetalEdges),
            _ => Err(ClassError::Parse { position: 0, message: format!("unknown parameter '{s}'") }),
        }
    }
}

/// One combinatorial class of trees with flowers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassSpec {
    pub family: Family,
    pub starred: bool,
    pub k_set: IndexSet,
    pub n_set: IndexSet,
    pub flower: FlowerKind,
}

impl ClassSpec {
    /// Build a spec. With a single petal size, partitions and compositions
    /// coincide, so the flower kind is normalized to rooted-plane.
    pub fn new(family: Family, starred: bool, k_set: IndexSet, n_set: IndexSet, flower: FlowerKind) -> Self {
        let flower = if n_set.singleton().is_some() { FlowerKind::RootedPlane } else { flower };
        ClassSpec { family, starred, k_set, n_set, flower }
    }

    /// Whether `F(z)` is a rational function.
    pub fn has_rational_flower(&self) -> bool {
        !(self.flower == FlowerKind::NonPlane && self.n_set == IndexSet::AllPositive)
    }

    fn k_case(&self) -> Option<KCase> {
        match &self.k_set {
            IndexSet::AllPositive => Some(KCase::All),
            IndexSet::Finite(v) => match v.as_slice() {
                [1] => Some(KCase::One),
                [2] => Some(KCase::Two),
                [1, 2] => Some(KCase::OneTwo),
                _ => None,
            },
        }
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}:K={}:N={}:flower={}",
            self.family,
            if self.starred { "*" } else { "" },
            self.k_set,
            self.n_set,
            self.flower
        )
    }
}

impl FromStr for ClassSpec {
    type Err = ClassError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let perr = |position: usize, message: &str| ClassError::Parse { position, message: message.to_string() };
        let fields: Vec<&str> = s.split(':').collect();
        let mut offsets = Vec::with_capacity(fields.len());
        let mut pos = 0;
        for f in &fields {
            offsets.push(pos);
            pos += f.len() + 1;
        }
        let head = fields[0];
        let (fam, starred) = match head.strip_suffix('*') {
            Some(h) => (h, true),
            None => (head, false),
        };
        let family = match fam {
            "R" => Family::R,
            "S" => Family::S,
            "T" => Family::T,
            _ => return Err(perr(0, "family must be R, S or T (optionally followed by '*')")),
        };
        let mut k_set = None;
        let mut n_set = None;
        let mut flower = None;
        for (field, &off) in fields.iter().zip(&offsets).skip(1) {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| perr(off, "expected key=value"))?;
            let voff = off + key.len() + 1;
            match key {
                "K" if k_set.is_none() => k_set = Some(parse_set(value, voff)?),
                "N" if n_set.is_none() => n_set = Some(parse_set(value, voff)?),
                "flower" if flower.is_none() => {
                    flower = Some(match value {
                        "plane" => FlowerKind::RootedPlane,
                        "nonplane" => FlowerKind::NonPlane,
                        _ => return Err(perr(voff, "flower must be 'plane' or 'nonplane'")),
                    })
                }
                "K" | "N" | "flower" => return Err(perr(off, &format!("duplicate field '{key}'"))),
                _ => return Err(perr(off, &format!("unknown field '{key}'"))),
            }
        }
        let k_set = k_set.ok_or_else(|| perr(s.len(), "missing field K"))?;
        let n_set = n_set.ok_or_else(|| perr(s.len(), "missing field N"))?;
        let flower = match (flower, n_set.singleton()) {
            (Some(f), _) => f,
            (None, Some(_)) => FlowerKind::RootedPlane,
            (None, None) => return Err(perr(s.len(), "missing field flower")),
        };
        Ok(ClassSpec::new(family, starred, k_set, n_set, flower))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KCase {
    All,
    One,
    Two,
    OneTwo,
}

/// The descendant sets with closed forms, as they appear in the catalog.
pub fn closed_form_k_sets() -> Vec<IndexSet> {
    vec![IndexSet::AllPositive, IndexSet::single(1), IndexSet::single(2), IndexSet::finite(&[1, 2]).unwrap()]
}

/// The full test grid of specs: families, starred, four K sets, four N sets
/// and both flower kinds. Singleton N collapses the two kinds into one spec.
pub fn spec_grid() -> Vec<ClassSpec> {
    let mut out = Vec::new();
    for family in [Family::R, Family::S, Family::T] {
        for starred in [false, true] {
            for k in closed_form_k_sets() {
                for n in closed_form_k_sets() {
                    for flower in [FlowerKind::RootedPlane, FlowerKind::NonPlane] {
                        let spec = ClassSpec::new(family, starred, k.clone(), n.clone(), flower);
                        if !out.contains(&spec) {
                            out.push(spec);
                        }
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Flowers

/// `N(z)` truncated.
pub fn petal_gf(n_set: &IndexSet, order: usize) -> Series {
    n_set.to_series(order)
}

/// `F(z)`, or `F*(z) = F(z) - 1` when starred.
pub fn flower_gf(flower: FlowerKind, n_set: &IndexSet, starred: bool, order: usize) -> Series {
    let full = match flower {
        FlowerKind::NonPlane => n_set
            .members_up_to(order)
            .into_iter()
            .fold(Series::one(order), |acc, n| acc.mul_geometric(n as usize)),
        FlowerKind::RootedPlane => {
            let one_minus_n = Series::one(order).sub(&petal_gf(n_set, order)).expect("same order");
            one_minus_n.inverse().expect("unit constant term")
        }
    };
    if starred {
        full.add_constant(&-BigRational::one())
    } else {
        full
    }
}

/// `F_u(z)`, the derivative in `u` at `u = 1` of the flower generating
/// function marked by the parameter.
pub fn flower_param_gf(flower: FlowerKind, n_set: &IndexSet, param: Parameter, order: usize) -> Series {
    match flower {
        FlowerKind::RootedPlane => {
            let n = petal_gf(n_set, order);
            let marked = match param {
                Parameter::Petals => n.clone(),
                Parameter::PetalEdges => n.theta(),
            };
            let inv = Series::one(order).sub(&n).expect("same order").inverse().expect("unit");
            marked.mul(&inv.square()).expect("same order")
        }
        FlowerKind::NonPlane => {
            // sum over n in N of c_n z^n / (1 - z^n) has coefficient
            // sum_{n | m, n in N} c_n at z^m.
            let mut coeffs = vec![BigRational::zero(); order + 1];
            for n in n_set.members_up_to(order) {
                let weight = match param {
                    Parameter::Petals => 1,
                    Parameter::PetalEdges => n as i64,
                };
                let mut m = n as usize;
                while m <= order {
                    coeffs[m] += BigRational::from_integer(weight.into());
                    m += n as usize;
                }
            }
            let p = flower_gf(FlowerKind::NonPlane, n_set, false, order);
            p.mul(&Series::new(coeffs)).expect("same order")
        }
    }
}

/// `F(z, u)` as a first-order jet at `u = 1`, built from the bivariate
/// definitions rather than from the closed forms of `F_u`.
pub fn flower_dual(flower: FlowerKind, n_set: &IndexSet, starred: bool, param: Parameter, order: usize) -> DualSeries {
    let full = match flower {
        FlowerKind::RootedPlane => {
            // 1 / (1 - N(z, u)) with N(z, u) = u N(z) or N(uz).
            let n = petal_gf(n_set, order);
            let dn = match param {
                Parameter::Petals => n.clone(),
                Parameter::PetalEdges => n.theta(),
            };
            let marked = DualSeries::new(n, dn).expect("same order");
            let one = DualSeries::lift(Series::one(order));
            one.sub(&marked).expect("same order").inverse().expect("unit")
        }
        FlowerKind::NonPlane => {
            // Multiply in one factor 1 / (1 - u^c z^n) at a time:
            // (B, B') -> (B g, (B' + c z^n B g) g) with g = 1 / (1 - z^n).
            let mut acc = DualSeries::lift(Series::one(order));
            for n in n_set.members_up_to(order) {
                let n = n as usize;
                let c = match param {
                    Parameter::Petals => 1,
                    Parameter::PetalEdges => n as i64,
                };
                let value = acc.value.mul_geometric(n);
                let bump = value.mul_z_pow(n).scale(&BigRational::from_integer(c.into()));
                let derivative = acc.derivative.add(&bump).expect("same order").mul_geometric(n);
                acc = DualSeries { value, derivative };
            }
            acc
        }
    };
    if starred {
        full.add_constant(&-BigRational::one())
    } else {
        full
    }
}

pub fn flower_ratfunc(flower: FlowerKind, n_set: &IndexSet, starred: bool) -> Result<RationalFunc, ClassError> {
    let full = match (flower, n_set) {
        (FlowerKind::NonPlane, IndexSet::AllPositive) => return Err(ClassError::NonRational),
        (FlowerKind::NonPlane, IndexSet::Finite(v)) => {
            let den = v.iter().fold(Poly::one(), |acc, &n| {
                acc.mul(&Poly::one().sub(&Poly::monomial(n as usize, BigInt::one())))
            });
            RationalFunc::new(Poly::one(), den)?
        }
        (FlowerKind::RootedPlane, _) => RationalFunc::constant(1).sub(&n_set.to_ratfunc()).inverse()?,
    };
    Ok(if starred { full.sub(&RationalFunc::constant(1)) } else { full })
}

pub fn flower_param_ratfunc(flower: FlowerKind, n_set: &IndexSet, param: Parameter) -> Result<RationalFunc, ClassError> {
    match (flower, n_set) {
        (FlowerKind::NonPlane, IndexSet::AllPositive) => Err(ClassError::NonRational),
        (FlowerKind::NonPlane, IndexSet::Finite(v)) => {
            let p = flower_ratfunc(flower, n_set, false)?;
            let mut sum = RationalFunc::constant(0);
            for &n in v {
                let c = match param {
                    Parameter::Petals => 1,
                    Parameter::PetalEdges => n as i64,
                };
                let zn = Poly::monomial(n as usize, BigInt::from(c));
                let den = Poly::one().sub(&Poly::monomial(n as usize, BigInt::one()));
                sum = sum.add(&RationalFunc::new(zn, den)?);
            }
            Ok(p.mul(&sum))
        }
        (FlowerKind::RootedPlane, _) => {
            let n = n_set.to_ratfunc();
            let marked = match param {
                Parameter::Petals => n.clone(),
                Parameter::PetalEdges => RationalFunc::z().mul(&n.derivative()),
            };
            let one_minus = RationalFunc::constant(1).sub(&n);
            Ok(marked.div(&one_minus.pow(2))?)
        }
    }
}

// ---------------------------------------------------------------------------
// Closed forms, written once over a small algebra so that the same
// transcription yields truncated series and exact rational functions.

trait Algebra: Clone {
    fn int(&self, c: i64) -> Self;
    fn var(&self) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    /// Division where the divisor has nonzero constant term.
    fn over_unit(&self, o: &Self) -> Result<Self, ClassError>;
}

impl Algebra for Series {
    fn int(&self, c: i64) -> Self {
        Series::constant(BigRational::from_integer(c.into()), self.order())
    }
    fn var(&self) -> Self {
        Series::monomial(1, BigRational::one(), self.order())
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o).expect("same order")
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o).expect("same order")
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o).expect("same order")
    }
    fn over_unit(&self, o: &Self) -> Result<Self, ClassError> {
        Ok(self.mul(&o.inverse()?)?)
    }
}

impl Algebra for RationalFunc {
    fn int(&self, c: i64) -> Self {
        RationalFunc::constant(c)
    }
    fn var(&self) -> Self {
        RationalFunc::z()
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn over_unit(&self, o: &Self) -> Result<Self, ClassError> {
        Ok(self.div(o)?)
    }
}

/// `f = (u - sqrt(p)) / w` and `Omega = (a / sqrt(p) + b) F_u / d`.
#[derive(Debug, Clone)]
pub struct SqrtShape<T> {
    pub u: T,
    pub w: T,
    pub p: T,
    pub a: T,
    pub b: T,
    pub d: T,
}

fn sqrt_shape<T: Algebra>(family: Family, case: KCase, f: &T) -> Option<SqrtShape<T>> {
    let z = f.var();
    let c = |k: i64| f.int(k);
    let zf = z.times(f);
    let z2 = z.times(&z);
    let f2 = f.times(f);
    let z2f2 = z2.times(&f2);
    let shape = match (case, family) {
        (KCase::All, Family::R) => {
            let one_minus_z = c(1).minus(&z);
            let p = z2f2.minus(&c(2).times(&z.plus(&z2)).times(f)).plus(&one_minus_z.times(&one_minus_z));
            SqrtShape {
                u: one_minus_z.plus(&zf),
                w: c(2).times(&z),
                p,
                a: c(1).plus(&z).minus(&zf),
                b: c(1),
                d: c(2),
            }
        }
        (KCase::All, Family::S) => SqrtShape {
            u: c(1),
            w: c(2).times(&zf),
            p: c(1).minus(&c(4).times(&zf)),
            a: c(1).minus(&c(2).times(&zf)),
            b: c(-1),
            d: c(2).times(&z).times(&f2),
        },
        (KCase::All, Family::T) => SqrtShape {
            u: c(1),
            w: c(2).times(&z),
            p: c(1).minus(&c(4).times(&zf)),
            a: c(1),
            b: c(0),
            d: c(1),
        },
        (KCase::Two, Family::R) => SqrtShape {
            u: c(1),
            w: c(2).times(&z2),
            p: c(1).minus(&c(4).times(&z2).times(f)),
            a: c(1),
            b: c(0),
            d: c(1),
        },
        (KCase::Two, Family::S) => SqrtShape {
            u: c(1),
            w: c(2).times(&z2f2),
            p: c(1).minus(&c(4).times(&z2f2)),
            a: c(1).minus(&c(2).times(&z2f2)),
            b: c(-1),
            d: z2f2.times(f),
        },
        (KCase::Two, Family::T) => SqrtShape {
            u: c(1),
            w: c(2).times(&z2).times(f),
            p: c(1).minus(&c(4).times(&z2f2)),
            a: c(1),
            b: c(-1),
            d: c(2).times(&z2f2),
        },
        (KCase::OneTwo, Family::R) => {
            let one_minus_z = c(1).minus(&z);
            SqrtShape {
                u: one_minus_z.clone(),
                w: c(2).times(&z2),
                p: one_minus_z.times(&one_minus_z).minus(&c(4).times(&z2).times(f)),
                a: c(1),
                b: c(0),
                d: c(1),
            }
        }
        (KCase::OneTwo, fam) => {
            let p = c(1).minus(&c(2).times(&zf)).minus(&c(3).times(&z2f2));
            let u = c(1).minus(&zf);
            if fam == Family::S {
                SqrtShape {
                    u,
                    w: c(2).times(&z2f2),
                    p,
                    a: c(2).minus(&c(3).times(&zf)).minus(&c(3).times(&z2f2)),
                    b: zf.minus(&c(2)),
                    d: c(2).times(&z2f2).times(f),
                }
            } else {
                SqrtShape {
                    u: u.clone(),
                    w: c(2).times(&z2).times(f),
                    p,
                    a: u,
                    b: c(-1),
                    d: c(2).times(&z2f2),
                }
            }
        }
        (KCase::One, _) => return None,
    };
    Some(shape)
}

/// `(numerator, denominator)` of `f` and of `Omega / F_u` for `K = {1}`.
fn path_shape<T: Algebra>(family: Family, f: &T) -> ((T, T), (T, T)) {
    let z = f.var();
    let one = f.int(1);
    let one_minus_zf = one.minus(&z.times(f));
    match family {
        Family::R => ((f.clone(), one.minus(&z)), (one.clone(), one.minus(&z))),
        Family::S => ((one.clone(), one_minus_zf.clone()), (z, one_minus_zf.times(&one_minus_zf))),
        Family::T => ((f.clone(), one_minus_zf.clone()), (one, one_minus_zf.times(&one_minus_zf))),
    }
}

fn flower_for(spec: &ClassSpec, order: usize) -> Series {
    flower_gf(spec.flower, &spec.n_set, spec.starred, order)
}

/// Extra precision needed so that the divisions in the closed forms still
/// leave `order` valid coefficients.
fn working_order(spec: &ClassSpec, order: usize) -> usize {
    let v = if spec.starred { spec.n_set.smallest() as usize } else { 0 };
    order + 3 + 3 * v
}

/// `f(z)` from the closed form, when `K` is one of the four closed-form sets.
pub fn closed_form_gf(spec: &ClassSpec, order: usize) -> Result<Option<Series>, ClassError> {
    let case = match spec.k_case() {
        Some(c) => c,
        None => return Ok(None),
    };
    let work = working_order(spec, order);
    let f = flower_for(spec, work);
    let full = if case == KCase::One {
        let ((num, den), _) = path_shape(spec.family, &f);
        num.over_unit(&den)?
    } else {
        let shape = sqrt_shape(spec.family, case, &f).expect("square-root case");
        let root = shape.p.sqrt()?;
        shape.u.minus(&root).exact_div(&shape.w)?
    };
    Ok(Some(full.truncate(order)?))
}

/// `Omega(z)` from the closed form, when available.
pub fn closed_form_cumulative(spec: &ClassSpec, param: Parameter, order: usize) -> Result<Option<Series>, ClassError> {
    let case = match spec.k_case() {
        Some(c) => c,
        None => return Ok(None),
    };
    let work = working_order(spec, order);
    let f = flower_for(spec, work);
    let fu = flower_param_gf(spec.flower, &spec.n_set, param, work);
    let full = if case == KCase::One {
        let (_, (num, den)) = path_shape(spec.family, &f);
        num.times(&fu).over_unit(&den)?
    } else {
        let shape = sqrt_shape(spec.family, case, &f).expect("square-root case");
        let inv_root = shape.p.sqrt()?.inverse()?;
        shape.a.times(&inv_root).plus(&shape.b).times(&fu).exact_div(&shape.d)?
    };
    Ok(Some(full.truncate(order)?))
}

/// `K(w)` for a series with zero constant term.
pub fn apply_k(k_set: &IndexSet, w: &Series) -> Result<Series, SeriesError> {
    let order = w.order();
    match k_set {
        IndexSet::AllPositive => {
            let one = Series::one(order);
            w.mul(&one.sub(w)?.inverse()?)
        }
        IndexSet::Finite(ks) => {
            let mut acc = Series::zero(order);
            let mut power = Series::one(order);
            let mut current = 0;
            for &k in ks {
                if k as usize > order && w.coeff(0).is_zero() {
                    break;
                }
                while current < k {
                    power = power.mul(w)?;
                    current += 1;
                }
                acc = acc.add(&power)?;
            }
            Ok(acc)
        }
    }
}

pub fn apply_k_dual(k_set: &IndexSet, w: &DualSeries) -> Result<DualSeries, SeriesError> {
    let order = w.order();
    match k_set {
        IndexSet::AllPositive => {
            let one = DualSeries::lift(Series::one(order));
            w.mul(&one.sub(w)?.inverse()?)
        }
        IndexSet::Finite(ks) => {
            let mut acc = DualSeries::zero(order);
            let mut power = DualSeries::lift(Series::one(order));
            let mut current = 0;
            for &k in ks {
                if k as usize > order {
                    break;
                }
                while current < k {
                    power = power.mul(w)?;
                    current += 1;
                }
                acc = acc.add(&power)?;
            }
            Ok(acc)
        }
    }
}

/// One application of the recursive specification: `R = F + K(zR)` or
/// `S = 1 + K(zFS)`. `T` reuses the `S` update.
pub fn specification_update(spec: &ClassSpec, flower: &Series, current: &Series) -> Result<Series, SeriesError> {
    match spec.family {
        Family::R => flower.add(&apply_k(&spec.k_set, &current.mul_z_pow(1))?),
        Family::S | Family::T => {
            let w = flower.mul(current)?.mul_z_pow(1);
            Ok(apply_k(&spec.k_set, &w)?.add_constant(&BigRational::one()))
        }
    }
}

pub fn specification_update_dual(spec: &ClassSpec, flower: &DualSeries, current: &DualSeries) -> Result<DualSeries, SeriesError> {
    match spec.family {
        Family::R => flower.add(&apply_k_dual(&spec.k_set, &current.mul_z_pow(1))?),
        Family::S | Family::T => {
            let w = flower.mul(current)?.mul_z_pow(1);
            Ok(apply_k_dual(&spec.k_set, &w)?.add_constant(&BigRational::one()))
        }
    }
}

/// `f(z)` by iterating the recursive specification.
pub fn fixed_point_gf(spec: &ClassSpec, order: usize) -> Result<Series, ClassError> {
    let flower = flower_for(spec, order);
    let solved = solve_fixed_point(|x| specification_update(spec, &flower, x), order)?;
    Ok(match spec.family {
        Family::T => flower.mul(&solved)?,
        _ => solved,
    })
}

/// `(f, Omega)` by iterating the recursive class equation over dual numbers.
pub fn dual_fixed_point(spec: &ClassSpec, param: Parameter, order: usize) -> Result<DualSeries, ClassError> {
    let flower = flower_dual(spec.flower, &spec.n_set, spec.starred, param, order);
    let solved = solve_dual_fixed_point(|x| specification_update_dual(spec, &flower, x), order)?;
    Ok(match spec.family {
        Family::T => flower.mul(&solved)?,
        _ => solved,
    })
}

fn first_difference(what: &str, closed: &Series, other: &Series) -> ClassError {
    let index = (0..=closed.order())
        .find(|&i| closed.coeff(i) != other.coeff(i))
        .unwrap_or(0);
    ClassError::Mismatch {
        what: what.to_string(),
        index,
        closed: closed.coeff(index).to_string(),
        iterated: other.coeff(index).to_string(),
    }
}

/// Check that `candidate` is the fixed point of the recursive class equation. For `T`
/// the candidate `S` is recovered by exact division by `F`.
fn check_residual(spec: &ClassSpec, candidate: &Series) -> Result<(), ClassError> {
    let order = candidate.order();
    let flower = flower_for(spec, order);
    let s_like = match spec.family {
        Family::T => {
            // T = F S; verify via S = 1 + K(z T) since zFS = zT.
            let w = candidate.mul_z_pow(1);
            let s = apply_k(&spec.k_set, &w)?.add_constant(&BigRational::one());
            let t = flower.mul(&s)?;
            if &t != candidate {
                return Err(first_difference("closed form and specification for T", candidate, &t));
            }
            return Ok(());
        }
        _ => candidate.clone(),
    };
    let next = specification_update(spec, &flower, &s_like)?;
    if next != s_like {
        return Err(first_difference("closed form and specification", &s_like, &next));
    }
    Ok(())
}

fn check_dual_residual(spec: &ClassSpec, param: Parameter, value: &Series, cumulative: &Series) -> Result<(), ClassError> {
    let order = value.order();
    let flower = flower_dual(spec.flower, &spec.n_set, spec.starred, param, order);
    let candidate = DualSeries::new(value.clone(), cumulative.clone())?;
    match spec.family {
        Family::T => {
            let s = apply_k_dual(&spec.k_set, &candidate.mul_z_pow(1))?.add_constant(&BigRational::one());
            let t = flower.mul(&s)?;
            if t.derivative != candidate.derivative {
                return Err(first_difference("cumulative closed form and dual specification", cumulative, &t.derivative));
            }
        }
        _ => {
            let next = specification_update_dual(spec, &flower, &candidate)?;
            if next.derivative != candidate.derivative {
                return Err(first_difference("cumulative closed form and dual specification", cumulative, &next.derivative));
            }
        }
    }
    Ok(())
}

/// Truncated `f(z)`, cross-checked between closed form and specification.
pub fn class_gf(spec: &ClassSpec, order: usize) -> Result<Series, ClassError> {
    let closed = match closed_form_gf(spec, order)? {
        Some(c) => c,
        None => return fixed_point_gf(spec, order),
    };
    if order <= ITERATIVE_CHECK_MAX_ORDER {
        let iterated = fixed_point_gf(spec, order)?;
        if iterated != closed {
            return Err(first_difference("closed form and fixed point", &closed, &iterated));
        }
    } else {
        check_residual(spec, &closed)?;
    }
    Ok(closed)
}

/// Truncated `Omega(z)` for the parameter, cross-checked between the closed
/// form and the dual-number solution of the recursive class equation.
pub fn cumulative_gf(spec: &ClassSpec, param: Parameter, order: usize) -> Result<Series, ClassError> {
    let closed = match closed_form_cumulative(spec, param, order)? {
        Some(c) => c,
        None => return Ok(dual_fixed_point(spec, param, order)?.derivative),
    };
    if order <= ITERATIVE_CHECK_MAX_ORDER {
        let dual = dual_fixed_point(spec, param, order)?;
        if dual.derivative != closed {
            return Err(first_difference("cumulative closed form and dual numbers", &closed, &dual.derivative));
        }
    } else {
        let value = class_gf(spec, order)?;
        check_dual_residual(spec, param, &value, &closed)?;
    }
    Ok(closed)
}

fn rational_flower(spec: &ClassSpec) -> Result<RationalFunc, ClassError> {
    flower_ratfunc(spec.flower, &spec.n_set, spec.starred)
}

/// Exact `f(z)` for `K = {1}`.
pub fn class_ratfunc(spec: &ClassSpec) -> Result<RationalFunc, ClassError> {
    if spec.k_case() != Some(KCase::One) {
        return Err(ClassError::NonRational);
    }
    let f = rational_flower(spec)?;
    let ((num, den), _) = path_shape(spec.family, &f);
    num.over_unit(&den)
}

/// Exact `Omega(z)` for `K = {1}`.
pub fn cumulative_ratfunc(spec: &ClassSpec, param: Parameter) -> Result<RationalFunc, ClassError> {
    if spec.k_case() != Some(KCase::One) {
        return Err(ClassError::NonRational);
    }
    let f = rational_flower(spec)?;
    let fu = flower_param_ratfunc(spec.flower, &spec.n_set, param)?;
    let (_, (num, den)) = path_shape(spec.family, &f);
    num.times(&fu).over_unit(&den)
}

/// The closed-form pieces as exact rational functions of `z`.
pub fn sqrt_shape_ratfunc(spec: &ClassSpec) -> Result<SqrtShape<RationalFunc>, ClassError> {
    let case = spec.k_case().ok_or_else(|| ClassError::UnsupportedKSet(spec.k_set.to_string()))?;
    if case == KCase::One {
        return Err(ClassError::UnsupportedKSet(spec.k_set.to_string()));
    }
    let f = rational_flower(spec)?;
    Ok(sqrt_shape(spec.family, case, &f).expect("square-root case"))
}

/// The expression under the square root in the closed form of `f(z)`.
pub fn radicand(spec: &ClassSpec) -> Result<RationalFunc, ClassError> {
    Ok(sqrt_shape_ratfunc(spec)?.p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> ClassSpec {
        s.parse().unwrap()
    }

    fn ints(s: &Series) -> Vec<i64> {
        s.to_integers()
            .unwrap()
            .iter()
            .map(|b| i64::try_from(b).unwrap())
            .collect()
    }

    #[test]
    fn grammar_round_trip_and_errors() {
        let s = spec("S*:K=all:N=all:flower=plane");
        assert_eq!(s.to_string(), "S*:K=all:N=all:flower=plane");
        let s = spec("R:K=1,2:N=2,1:flower=nonplane");
        assert_eq!(s.to_string(), "R:K=1,2:N=1,2:flower=nonplane");
        assert_eq!(spec("T:K=1:N=3:flower=nonplane").flower, FlowerKind::RootedPlane);
        match "Q:K=1:N=1:flower=plane".parse::<ClassSpec>() {
            Err(ClassError::Parse { position, .. }) => assert_eq!(position, 0),
            other => panic!("{other:?}"),
        }
        match "R:K=1:N=x:flower=plane".parse::<ClassSpec>() {
            Err(ClassError::Parse { position, .. }) => assert_eq!(position, 8),
            other => panic!("{other:?}"),
        }
        assert!("R:K=1:N=0:flower=plane".parse::<ClassSpec>().is_err());
        assert!("R:K=1:N=1,2".parse::<ClassSpec>().is_err());
        assert!("R:K=1:N=1:flower=round".parse::<ClassSpec>().is_err());
    }

    #[test]
    fn flower_examples() {
        let plane = flower_gf(FlowerKind::RootedPlane, &IndexSet::AllPositive, false, 5);
        assert_eq!(ints(&plane), vec![1, 1, 2, 4, 8, 16]);
        let parts = flower_gf(FlowerKind::NonPlane, &IndexSet::AllPositive, false, 5);
        assert_eq!(ints(&parts), vec![1, 1, 2, 3, 5, 7]);
        for kind in [FlowerKind::NonPlane, FlowerKind::RootedPlane] {
            let loops = flower_gf(kind, &IndexSet::single(1), true, 4);
            assert_eq!(ints(&loops), vec![0, 1, 1, 1, 1]);
        }
    }

    #[test]
    fn flower_ratfunc_examples() {
        let f = flower_ratfunc(FlowerKind::RootedPlane, &IndexSet::AllPositive, false).unwrap();
        assert_eq!(f, RationalFunc::from_i64s(&[1, -1], &[1, -2]).unwrap());
        let g = flower_ratfunc(FlowerKind::NonPlane, &IndexSet::finite(&[1, 2]).unwrap(), false).unwrap();
        assert_eq!(g, RationalFunc::from_i64s(&[1], &[1, -1, -1, 1]).unwrap());
        assert_eq!(
            flower_ratfunc(FlowerKind::NonPlane, &IndexSet::AllPositive, false),
            Err(ClassError::NonRational)
        );
    }

    #[test]
    fn class_gf_examples() {
        assert_eq!(ints(&class_gf(&spec("T*:K=1:N=1:flower=plane"), 6).unwrap()), vec![0, 1, 1, 2, 3, 5, 8]);
        assert_eq!(ints(&class_gf(&spec("T:K=1:N=all:flower=plane"), 4).unwrap()), vec![1, 2, 5, 13, 34]);
        for kind in ["plane", "nonplane"] {
            let s = spec(&format!("R:K=1:N=2:flower={kind}"));
            assert_eq!(ints(&class_gf(&s, 5).unwrap()), vec![1, 1, 2, 2, 3, 3]);
        }
    }

    #[test]
    fn product_with_flower_matches_fixed_point() {
        let order = 20;
        let t = spec("T:K=all:N=all:flower=plane");
        let s = spec("S:K=all:N=all:flower=plane");
        let f = flower_gf(FlowerKind::RootedPlane, &IndexSet::AllPositive, false, order);
        let product = f.mul(&fixed_point_gf(&s, order).unwrap()).unwrap();
        assert_eq!(product, fixed_point_gf(&t, order).unwrap());
    }

    #[test]
    fn cumulative_examples() {
        let s = spec("R:K=1:N=1:flower=plane");
        let chi = cumulative_gf(&s, Parameter::Petals, 4).unwrap();
        assert_eq!(ints(&chi), vec![0, 1, 3, 6, 10]);
        assert_eq!(chi, cumulative_gf(&s, Parameter::PetalEdges, 4).unwrap());
    }

    #[test]
    fn ratfunc_examples() {
        let s = class_ratfunc(&spec("S*:K=1:N=2:flower=plane")).unwrap();
        assert_eq!(s.den().primitive(), Poly::from_i64s(&[-1, 0, 1, 1]));
        for k in 1..5u32 {
            let r = class_ratfunc(&spec(&format!("R:K=1:N={k}:flower=plane"))).unwrap();
            let expected = RationalFunc::new(
                Poly::one(),
                Poly::from_i64s(&[1, -1]).mul(&Poly::one().sub(&Poly::monomial(k as usize, BigInt::one()))),
            )
            .unwrap();
            assert_eq!(r, expected);
        }
        assert_eq!(class_ratfunc(&spec("S:K=2:N=1:flower=plane")), Err(ClassError::NonRational));
    }

    #[test]
    fn radicand_examples() {
        let p = radicand(&spec("R:K=all:N=all:flower=plane")).unwrap();
        let num = Poly::from_i64s(&[-1, 1]).mul(&Poly::from_i64s(&[-1, 7, -11, 1]));
        let expected = RationalFunc::new(num, Poly::from_i64s(&[-1, 2]).pow(2)).unwrap();
        assert_eq!(p, expected);
        let p = radicand(&spec("S*:K=all:N=all:flower=plane")).unwrap();
        assert_eq!(p, RationalFunc::from_i64s(&[-1, 2, 4], &[-1, 2]).unwrap());
        let p = radicand(&spec("S*:K=1,2:N=all:flower=plane")).unwrap();
        let num = Poly::from_i64s(&[1, -1]).pow(2).mul(&Poly::from_i64s(&[1, 1])).mul(&Poly::from_i64s(&[1, -3]));
        assert_eq!(p, RationalFunc::new(num, Poly::from_i64s(&[1, -2]).pow(2)).unwrap());
        assert!(matches!(radicand(&spec("R:K=1:N=1:flower=plane")), Err(ClassError::UnsupportedKSet(_))));
        assert_eq!(radicand(&spec("S:K=2:N=all:flower=nonplane")), Err(ClassError::NonRational));
    }

    #[test]
    fn radicand_reproduces_series() {
        for s in spec_grid() {
            let Ok(shape) = sqrt_shape_ratfunc(&s) else { continue };
            let order = 32;
            let work = working_order(&s, order);
            let root = shape.p.to_series(work).unwrap().sqrt().unwrap();
            let u = shape.u.to_series(work).unwrap();
            let w = shape.w.to_series(work).unwrap();
            let f = u.sub(&root).unwrap().exact_div(&w).unwrap().truncate(order).unwrap();
            assert_eq!(f, class_gf(&s, order).unwrap(), "{s}");
        }
    }
}
