//! Brute-force construction of trees with flowers.
//!
//! Objects are generated canonically from the recursive specifications, so
//! every object appears exactly once without any deduplication pass. Subtrees
//! smaller than the requested size are memoized and shared through `Arc`;
//! objects of the requested size are streamed to a visitor instead of being
//! stored.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::classes::{ClassSpec, Family, FlowerKind, IndexSet};

/// Default upper limit on the total size accepted by the enumerator.
pub const DEFAULT_SAFETY_BOUND: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("requested size {requested} exceeds the safety bound {bound}")]
    BoundExceeded { requested: usize, bound: usize },
    #[error("malformed tree encoding at byte {position}: {message}")]
    Decode { position: usize, message: String },
    #[error("invalid object: {0}")]
    Invalid(String),
}

/// A plane tree whose nodes carry flowers, given by their petal sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FloweredTree {
    pub flower: Vec<u32>,
    pub children: Vec<Arc<FloweredTree>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SizeProfile {
    pub size: usize,
    pub tree_weight: usize,
    pub flowers_weight: usize,
    pub petals_weight: usize,
}

impl FloweredTree {
    pub fn leaf(flower: Vec<u32>) -> Self {
        FloweredTree { flower, children: Vec::new() }
    }

    pub fn profile(&self) -> SizeProfile {
        let mut p = SizeProfile {
            size: 0,
            tree_weight: self.children.len(),
            flowers_weight: self.flower.iter().map(|&x| x as usize).sum(),
            petals_weight: self.flower.len(),
        };
        for c in &self.children {
            let q = c.profile();
            p.tree_weight += q.tree_weight;
            p.flowers_weight += q.flowers_weight;
            p.petals_weight += q.petals_weight;
        }
        p.size = p.tree_weight + p.flowers_weight;
        p
    }
}

impl fmt::Display for FloweredTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "([")?;
        for (i, p) in self.flower.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "] ")?;
        for (i, c) in self.children.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

struct Decoder<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Decoder<'_> {
    fn fail<T>(&self, message: &str) -> Result<T, OracleError> {
        Err(OracleError::Decode { position: self.pos, message: message.to_string() })
    }

    fn expect(&mut self, b: u8) -> Result<(), OracleError> {
        if self.bytes.get(self.pos) == Some(&b) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(&format!("expected '{}'", b as char))
        }
    }

    fn node(&mut self) -> Result<FloweredTree, OracleError> {
        self.expect(b'(')?;
        self.expect(b'[')?;
        let mut flower = Vec::new();
        while self.bytes.get(self.pos) != Some(&b']') {
            if !flower.is_empty() {
                self.expect(b',')?;
            }
            let start = self.pos;
            while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("");
            match text.parse::<u32>() {
                Ok(n) if n > 0 => flower.push(n),
                _ => return self.fail("expected a positive petal size"),
            }
        }
        self.expect(b']')?;
        self.expect(b' ')?;
        let mut children = Vec::new();
        while self.bytes.get(self.pos) == Some(&b'(') {
            children.push(Arc::new(self.node()?));
            if self.bytes.get(self.pos) == Some(&b' ') {
                self.pos += 1;
                if self.bytes.get(self.pos) != Some(&b'(') {
                    return self.fail("expected a child after the separator");
                }
            }
        }
        self.expect(b')')?;
        Ok(FloweredTree { flower, children })
    }
}

impl FromStr for FloweredTree {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut d = Decoder { bytes: s.as_bytes(), pos: 0 };
        let t = d.node()?;
        if d.pos != s.len() {
            return d.fail("trailing input");
        }
        Ok(t)
    }
}

/// Per-size totals over all objects of that size.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SizeTotals {
    pub count: BigInt,
    pub petals: BigInt,
    pub petal_edges: BigInt,
}

type Shared = Arc<FloweredTree>;

/// Memoized generator for one spec.
pub struct Enumerator {
    spec: ClassSpec,
    /// Flowers by petal-edge budget, including the empty flower at 0 unless starred.
    flowers: Vec<Vec<Vec<u32>>>,
    /// Subtree tables by size. For `R` these are `R` objects; for `S` and `T`
    /// they are flower-carrying nodes (`F x S`), i.e. `T` objects.
    subtrees: Vec<Vec<Shared>>,
    /// `S` objects by size (root without a flower); unused for `R`.
    s_table: Vec<Vec<Shared>>,
}

fn partitions(budget: u32, largest: u32, allowed: &IndexSet, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if budget == 0 {
        out.push(prefix.clone());
        return;
    }
    for part in (1..=largest.min(budget)).rev() {
        if allowed.contains(part) {
            prefix.push(part);
            partitions(budget - part, part, allowed, prefix, out);
            prefix.pop();
        }
    }
}

fn compositions(budget: u32, allowed: &IndexSet, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if budget == 0 {
        out.push(prefix.clone());
        return;
    }
    for part in 1..=budget {
        if allowed.contains(part) {
            prefix.push(part);
            compositions(budget - part, allowed, prefix, out);
            prefix.pop();
        }
    }
}

/// Every flower with exactly `budget` petal edges.
pub fn flowers_of_size(kind: FlowerKind, allowed: &IndexSet, budget: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    match kind {
        FlowerKind::NonPlane => partitions(budget, budget, allowed, &mut prefix, &mut out),
        FlowerKind::RootedPlane => compositions(budget, allowed, &mut prefix, &mut out),
    }
    out
}

/// Visit every sequence of `k` entries drawn from `table[s_i]` with
/// `sum s_i = budget`.
fn for_each_forest(table: &[Vec<Shared>], k: usize, budget: usize, current: &mut Vec<Shared>, visit: &mut dyn FnMut(&[Shared])) {
    if k == 0 {
        if budget == 0 {
            visit(current);
        }
        return;
    }
    let max_first = budget.min(table.len().saturating_sub(1));
    for s in 0..=max_first {
        if k == 1 && s != budget {
            continue;
        }
        for item in &table[s] {
            current.push(item.clone());
            for_each_forest(table, k - 1, budget - s, current, visit);
            current.pop();
        }
    }
}

impl Enumerator {
    pub fn new(spec: &ClassSpec, max_size: usize) -> Result<Self, OracleError> {
        Self::with_bound(spec, max_size, DEFAULT_SAFETY_BOUND)
    }

    pub fn with_bound(spec: &ClassSpec, max_size: usize, bound: usize) -> Result<Self, OracleError> {
        if max_size > bound {
            return Err(OracleError::BoundExceeded { requested: max_size, bound });
        }
        let flowers = (0..=max_size as u32)
            .map(|m| {
                if m == 0 && spec.starred {
                    Vec::new()
                } else {
                    flowers_of_size(spec.flower, &spec.n_set, m)
                }
            })
            .collect();
        let mut e = Enumerator { spec: spec.clone(), flowers, subtrees: Vec::new(), s_table: Vec::new() };
        // Children of an object of size n have size at most n - 1.
        for n in 0..max_size {
            e.extend_tables(n);
        }
        Ok(e)
    }

    fn descendant_counts(&self, budget: usize) -> Vec<usize> {
        self.spec.k_set.members_up_to(budget).into_iter().map(|k| k as usize).collect()
    }

    fn extend_tables(&mut self, n: usize) {
        match self.spec.family {
            Family::R => {
                let mut row = Vec::new();
                self.stream_r(n, &mut |t| row.push(Arc::new(t)));
                self.subtrees.push(row);
            }
            Family::S | Family::T => {
                let mut s_row = Vec::new();
                self.stream_s(n, &mut |t| s_row.push(Arc::new(t)));
                self.s_table.push(s_row);
                let mut t_row = Vec::new();
                self.stream_t(n, &mut |t| t_row.push(Arc::new(t)));
                self.subtrees.push(t_row);
            }
        }
    }

    /// Leaves with a flower, or flowerless internal nodes over `R` subtrees.
    fn stream_r(&self, n: usize, visit: &mut dyn FnMut(FloweredTree)) {
        for f in &self.flowers[n] {
            visit(FloweredTree::leaf(f.clone()));
        }
        for k in self.descendant_counts(n) {
            let mut cur = Vec::with_capacity(k);
            for_each_forest(&self.subtrees, k, n - k, &mut cur, &mut |kids| {
                visit(FloweredTree { flower: Vec::new(), children: kids.to_vec() })
            });
        }
    }

    /// Flowerless root over flower-carrying subtrees.
    fn stream_s(&self, n: usize, visit: &mut dyn FnMut(FloweredTree)) {
        if n == 0 {
            visit(FloweredTree::leaf(Vec::new()));
        }
        for k in self.descendant_counts(n) {
            let mut cur = Vec::with_capacity(k);
            for_each_forest(&self.subtrees, k, n - k, &mut cur, &mut |kids| {
                visit(FloweredTree { flower: Vec::new(), children: kids.to_vec() })
            });
        }
    }

    /// A flower at the root of an `S` object. Requires `S` objects of size
    /// `n - m` for each flower budget `m`; the one of size `n` is streamed.
    fn stream_t(&self, n: usize, visit: &mut dyn FnMut(FloweredTree)) {
        for m in 0..=n {
            if self.flowers[m].is_empty() {
                continue;
            }
            let rest = n - m;
            if rest < self.s_table.len() {
                for s in &self.s_table[rest] {
                    for f in &self.flowers[m] {
                        visit(FloweredTree { flower: f.clone(), children: s.children.clone() });
                    }
                }
            } else {
                let flowers = &self.flowers[m];
                self.stream_s(rest, &mut |s| {
                    for f in flowers {
                        visit(FloweredTree { flower: f.clone(), children: s.children.clone() });
                    }
                });
            }
        }
    }

    /// Visit every object of the class family with total size `n`.
    pub fn for_each(&self, n: usize, visit: &mut dyn FnMut(FloweredTree)) {
        assert!(n <= self.subtrees.len(), "size beyond the prepared tables");
        match self.spec.family {
            Family::R => self.stream_r(n, visit),
            Family::S => self.stream_s(n, visit),
            Family::T => self.stream_t(n, visit),
        }
    }

    pub fn max_size(&self) -> usize {
        self.subtrees.len()
    }
}

/// All objects of sizes `0..=max_size`, materialized.
pub fn enumerate(spec: &ClassSpec, max_size: usize) -> Result<Vec<Vec<FloweredTree>>, OracleError> {
    let e = Enumerator::new(spec, max_size)?;
    Ok((0..=max_size)
        .map(|n| {
            let mut row = Vec::new();
            e.for_each(n, &mut |t| row.push(t));
            row
        })
        .collect())
}

/// Object counts and parameter totals for sizes `0..=max_size`.
pub fn count_and_accumulate(spec: &ClassSpec, max_size: usize) -> Result<Vec<SizeTotals>, OracleError> {
    count_and_accumulate_with_bound(spec, max_size, DEFAULT_SAFETY_BOUND)
}

pub fn count_and_accumulate_with_bound(spec: &ClassSpec, max_size: usize, bound: usize) -> Result<Vec<SizeTotals>, OracleError> {
    let e = Enumerator::with_bound(spec, max_size, bound)?;
    Ok((0..=max_size)
        .into_par_iter()
        .map(|n| {
            let (mut count, mut petals, mut edges) = (0u64, 0u64, 0u64);
            e.for_each(n, &mut |t| {
                let p = t.profile();
                count += 1;
                petals += p.petals_weight as u64;
                edges += p.flowers_weight as u64;
            });
            SizeTotals { count: count.into(), petals: petals.into(), petal_edges: edges.into() }
        })
        .collect())
}

/// Check every structural constraint of the class on one object of the
/// expected size.
pub fn validate(spec: &ClassSpec, tree: &FloweredTree, size: usize) -> Result<(), OracleError> {
    let profile = tree.profile();
    if profile.size != size {
        return Err(OracleError::Invalid(format!("size {} instead of {size}", profile.size)));
    }
    validate_node(spec, tree, true)
}

fn validate_flower(spec: &ClassSpec, flower: &[u32]) -> Result<(), OracleError> {
    if spec.starred && flower.is_empty() {
        return Err(OracleError::Invalid("empty flower in a starred class".into()));
    }
    if let Some(p) = flower.iter().find(|&&p| !spec.n_set.contains(p)) {
        return Err(OracleError::Invalid(format!("petal size {p} not allowed")));
    }
    if spec.flower == FlowerKind::NonPlane && flower.windows(2).any(|w| w[0] < w[1]) {
        return Err(OracleError::Invalid("non-plane flower is not weakly decreasing".into()));
    }
    Ok(())
}

fn validate_node(spec: &ClassSpec, node: &FloweredTree, is_root: bool) -> Result<(), OracleError> {
    let k = node.children.len();
    if k > 0 && !spec.k_set.contains(k as u32) {
        return Err(OracleError::Invalid(format!("node with {k} children")));
    }
    let carries_flower = match spec.family {
        Family::R => k == 0,
        Family::S => !is_root,
        Family::T => true,
    };
    if carries_flower {
        validate_flower(spec, &node.flower)?;
    } else if !node.flower.is_empty() {
        return Err(OracleError::Invalid("flower at a position that carries none".into()));
    }
    for c in &node.children {
        validate_node(spec, c, false)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> ClassSpec {
        s.parse().unwrap()
    }

    #[test]
    fn encoding_round_trip() {
        let text = "([2,1] ([] ) ([1] ))";
        let t: FloweredTree = text.parse().unwrap();
        assert_eq!(t.to_string(), text);
        assert_eq!(t.flower, vec![2, 1]);
        assert_eq!(t.children.len(), 2);
        assert_eq!(t.profile(), SizeProfile { size: 6, tree_weight: 2, flowers_weight: 4, petals_weight: 3 });
        assert!("([0] )".parse::<FloweredTree>().is_err());
        assert!("([1] ) ".parse::<FloweredTree>().is_err());
        assert!("([1]".parse::<FloweredTree>().is_err());
    }

    #[test]
    fn paths_with_loops() {
        let s = spec("R:K=1:N=1:flower=plane");
        let all = enumerate(&s, 6).unwrap();
        for (n, row) in all.iter().enumerate() {
            assert_eq!(row.len(), n + 1);
            for t in row {
                validate(&s, t, n).unwrap();
            }
        }
        let totals = count_and_accumulate(&s, 3).unwrap();
        assert_eq!(totals[3].count, 4.into());
        assert_eq!(totals[3].petals, 6.into());
        assert_eq!(totals[3].petal_edges, 6.into());
    }

    #[test]
    fn size_zero_has_single_object() {
        for fam in ["R", "S", "T"] {
            let s = spec(&format!("{fam}:K=all:N=all:flower=plane"));
            let all = enumerate(&s, 0).unwrap();
            assert_eq!(all[0].len(), 1);
            assert_eq!(all[0][0].to_string(), "([] )");
            let totals = count_and_accumulate(&s, 0).unwrap();
            assert_eq!((&totals[0].petals, &totals[0].petal_edges), (&BigInt::from(0), &BigInt::from(0)));
        }
    }

    #[test]
    fn binomial_transform_of_catalan() {
        let s = spec("T:K=all:N=1:flower=plane");
        let counts: Vec<usize> = enumerate(&s, 6).unwrap().iter().map(Vec::len).collect();
        assert_eq!(counts, vec![1, 2, 5, 15, 51, 188, 731]);
    }

    #[test]
    fn bound_is_enforced() {
        let s = spec("R:K=1:N=1:flower=plane");
        assert_eq!(
            Enumerator::new(&s, 15).err(),
            Some(OracleError::BoundExceeded { requested: 15, bound: 14 })
        );
        assert!(Enumerator::with_bound(&s, 15, 20).is_ok());
    }

    #[test]
    fn partitions_and_compositions() {
        let all = IndexSet::AllPositive;
        assert_eq!(flowers_of_size(FlowerKind::NonPlane, &all, 4).len(), 5);
        assert_eq!(flowers_of_size(FlowerKind::RootedPlane, &all, 4).len(), 8);
        let odd = IndexSet::finite(&[1, 3]).unwrap();
        assert_eq!(flowers_of_size(FlowerKind::NonPlane, &odd, 4), vec![vec![3, 1], vec![1, 1, 1, 1]]);
        assert_eq!(flowers_of_size(FlowerKind::RootedPlane, &all, 0), vec![Vec::<u32>::new()]);
    }
}
