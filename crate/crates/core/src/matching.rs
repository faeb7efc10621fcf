//! Exact graph matching over atom permutations.
//!
//! A permutation `pi` pairs atom `i` of the first graph with atom `pi(i)` of
//! the second. Bond rows follow: the pair `{i, j}` is compared with the pair
//! `{pi(i), pi(j)}`. The matching cost is the squared Frobenius distance
//! between the first matrix and the second one gathered through `pi`.
//!
//! Search is depth-first branch-and-bound assigning first-graph atoms in
//! index order and candidate targets in ascending order, so complete
//! assignments are visited in lexicographic order. A bounded max-heap keeps
//! the k best; ties in cost go to the lexicographically smaller permutation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{node_count, pair_count, pair_index, pairs, FeatureMatrix};

/// Default cap on atoms per matching instance.
pub const DEFAULT_MAX_ATOMS: usize = 10;

/// A bijection on atom indices; entry `i` holds `pi(i)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AtomPermutation(Vec<usize>);

impl AtomPermutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &v in &mapping {
            if v >= n {
                return Err(Error::InvalidPermutation(format!("entry {v} out of range for {n} atoms")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPermutation(format!("entry {v} repeated")));
            }
        }
        Ok(Self(mapping))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Self(inv)
    }

    /// `self` after `first`: `i -> self(first(i))`.
    pub fn compose(&self, first: &AtomPermutation) -> Self {
        assert_eq!(self.len(), first.len(), "permutation sizes differ");
        Self(first.0.iter().map(|&v| self.0[v]).collect())
    }
}

impl fmt::Display for AtomPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// Node-level permutation induced by an atom permutation: atom row `i` maps
/// to atom row `pi(i)` and bond row `{i, j}` to bond row `{pi(i), pi(j)}`.
pub fn induced_node_permutation(pi: &AtomPermutation) -> Vec<usize> {
    let n = pi.len();
    let mut nodes = Vec::with_capacity(node_count(n));
    nodes.extend_from_slice(pi.as_slice());
    nodes.extend(pairs(n).map(|(i, j)| n + pair_index(n, pi.get(i), pi.get(j))));
    nodes
}

#[inline]
fn row_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

fn check_shapes(x1: &FeatureMatrix, x2: &FeatureMatrix) -> Result<()> {
    if x1.n_atoms() != x2.n_atoms() {
        return Err(Error::ShapeMismatch { left: x1.n_atoms(), right: x2.n_atoms() });
    }
    Ok(())
}

fn check_permutation(x: &FeatureMatrix, pi: &AtomPermutation) -> Result<()> {
    if pi.len() != x.n_atoms() {
        return Err(Error::InvalidPermutation(format!(
            "permutation over {} atoms used with a {}-atom graph",
            pi.len(),
            x.n_atoms()
        )));
    }
    Ok(())
}

/// `||x1 - x2^pi||^2`, accumulated row by row in row order.
pub fn matched_cost(x1: &FeatureMatrix, x2: &FeatureMatrix, pi: &AtomPermutation) -> Result<f64> {
    check_shapes(x1, x2)?;
    check_permutation(x1, pi)?;
    let nodes = induced_node_permutation(pi);
    Ok(nodes
        .iter()
        .enumerate()
        .fold(0.0, |acc, (r, &s)| acc + row_distance(x1.row(r), x2.row(s))))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub permutation: AtomPermutation,
    /// Squared Frobenius distance under `permutation`.
    pub cost: f64,
    /// Partial assignments examined by the search that produced this result.
    pub nodes_expanded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopKResult {
    /// Ascending by cost, then lexicographically by permutation.
    pub ranked: Vec<MatchResult>,
    pub k: usize,
}

impl TopKResult {
    pub fn best(&self) -> &MatchResult {
        &self.ranked[0]
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }
}

/// Exact matcher with a hard size limit.
#[derive(Debug, Clone, Copy)]
pub struct Matcher {
    pub max_atoms: usize,
}

impl Default for Matcher {
    fn default() -> Self {
        Self { max_atoms: DEFAULT_MAX_ATOMS }
    }
}

impl Matcher {
    pub fn new(max_atoms: usize) -> Self {
        Self { max_atoms }
    }

    fn check(&self, x1: &FeatureMatrix, x2: &FeatureMatrix) -> Result<()> {
        check_shapes(x1, x2)?;
        if x1.n_atoms() > self.max_atoms {
            return Err(Error::TooLarge { n_atoms: x1.n_atoms(), limit: self.max_atoms });
        }
        Ok(())
    }

    pub fn optimal_match(&self, x1: &FeatureMatrix, x2: &FeatureMatrix) -> Result<MatchResult> {
        let top = self.top_k(x1, x2, 1)?;
        Ok(top.ranked.into_iter().next().expect("at least one permutation exists"))
    }

    pub fn top_k(&self, x1: &FeatureMatrix, x2: &FeatureMatrix, k: usize) -> Result<TopKResult> {
        if k == 0 {
            return Err(Error::InvalidK);
        }
        self.check(x1, x2)?;
        let tables = CostTables::new(x1, x2);
        let mut search = Search::new(&tables, k);
        search.run();
        Ok(search.finish())
    }

    /// Uniform draw from the top-k set; the same seed always gives the same draw.
    pub fn sample_top_k(
        &self,
        x1: &FeatureMatrix,
        x2: &FeatureMatrix,
        k: usize,
        seed: u64,
    ) -> Result<MatchResult> {
        let mut top = self.top_k(x1, x2, k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = rng.random_range(0..top.ranked.len());
        Ok(top.ranked.swap_remove(idx))
    }
}

pub fn optimal_match(x1: &FeatureMatrix, x2: &FeatureMatrix) -> Result<MatchResult> {
    Matcher::default().optimal_match(x1, x2)
}

pub fn top_k(x1: &FeatureMatrix, x2: &FeatureMatrix, k: usize) -> Result<TopKResult> {
    Matcher::default().top_k(x1, x2, k)
}

pub fn sample_top_k(x1: &FeatureMatrix, x2: &FeatureMatrix, k: usize, seed: u64) -> Result<MatchResult> {
    Matcher::default().sample_top_k(x1, x2, k, seed)
}

/// Row-to-row distances between the two graphs, precomputed once per search.
struct CostTables {
    n: usize,
    n_pairs: usize,
    /// `atom[i * n + a]`: first-graph atom row `i` vs second-graph atom row `a`.
    atom: Vec<f64>,
    /// `bond[p * n_pairs + q]`: first-graph pair `p` vs second-graph pair `q`.
    bond: Vec<f64>,
    /// `pair[a * n + b]`: pair index of `{a, b}` (diagonal unused).
    pair: Vec<usize>,
    /// Integer-valued inputs make every partial sum exact.
    exact: bool,
}

impl CostTables {
    fn new(x1: &FeatureMatrix, x2: &FeatureMatrix) -> Self {
        let n = x1.n_atoms();
        let n_pairs = pair_count(n);
        let mut atom = vec![0.0; n * n];
        for i in 0..n {
            for a in 0..n {
                atom[i * n + a] = row_distance(x1.row(i), x2.row(a));
            }
        }
        let mut bond = vec![0.0; n_pairs * n_pairs];
        for p in 0..n_pairs {
            for q in 0..n_pairs {
                bond[p * n_pairs + q] = row_distance(x1.row(n + p), x2.row(n + q));
            }
        }
        let mut pair = vec![usize::MAX; n * n];
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    pair[a * n + b] = pair_index(n, a, b);
                }
            }
        }
        let integral = |x: &FeatureMatrix| x.as_slice().iter().all(|v| v.fract() == 0.0 && v.abs() < 1e6);
        let exact = integral(x1) && integral(x2);
        Self { n, n_pairs, atom, bond, pair, exact }
    }

    #[inline]
    fn atom_cost(&self, i: usize, a: usize) -> f64 {
        self.atom[i * self.n + a]
    }

    #[inline]
    fn bond_cost(&self, p: usize, q: usize) -> f64 {
        self.bond[p * self.n_pairs + q]
    }

    #[inline]
    fn pair(&self, a: usize, b: usize) -> usize {
        self.pair[a * self.n + b]
    }

    /// Full cost in canonical row order; bitwise equal to [`matched_cost`].
    fn canonical_cost(&self, assignment: &[usize]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for (i, &a) in assignment.iter().enumerate() {
            acc += self.atom_cost(i, a);
        }
        let mut p = 0;
        for i in 0..n {
            for j in i + 1..n {
                acc += self.bond_cost(p, self.pair(assignment[i], assignment[j]));
                p += 1;
            }
        }
        acc
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    cost: f64,
    assignment: Vec<usize>,
}

impl Candidate {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.assignment.cmp(&other.assignment))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

struct Search<'a> {
    t: &'a CostTables,
    k: usize,
    heap: BinaryHeap<Candidate>,
    assignment: Vec<usize>,
    used: Vec<bool>,
    nodes: u64,
}

impl<'a> Search<'a> {
    fn new(t: &'a CostTables, k: usize) -> Self {
        Self {
            t,
            k,
            heap: BinaryHeap::with_capacity(k.min(4096) + 1),
            assignment: Vec::with_capacity(t.n),
            used: vec![false; t.n],
            nodes: 0,
        }
    }

    fn run(&mut self) {
        self.descend(0.0);
    }

    /// Cost of the current k-th best, if the heap is full.
    fn threshold(&self) -> Option<f64> {
        (self.heap.len() == self.k).then(|| self.heap.peek().map(|c| c.cost)).flatten()
    }

    /// Whether a subtree with this lower bound cannot contain a strict improvement.
    fn prunable(&self, bound: f64) -> bool {
        match self.threshold() {
            None => false,
            Some(worst) if self.t.exact => bound >= worst,
            // Partial sums are reassociated relative to the canonical cost;
            // the slack keeps rounding from pruning a genuine improvement.
            Some(worst) => bound > worst + 1e-10 * (1.0 + worst.abs()),
        }
    }

    /// Sum over unassigned first-graph atoms of their cheapest free target.
    fn remaining_bound(&self, depth: usize) -> f64 {
        let n = self.t.n;
        let mut acc = 0.0;
        for i in depth..n {
            let mut best = f64::INFINITY;
            for a in 0..n {
                if !self.used[a] {
                    best = best.min(self.t.atom_cost(i, a));
                }
            }
            acc += best;
        }
        acc
    }

    fn descend(&mut self, partial: f64) {
        let n = self.t.n;
        let depth = self.assignment.len();
        if depth == n {
            self.offer();
            return;
        }
        for a in 0..n {
            if self.used[a] {
                continue;
            }
            self.nodes += 1;
            let mut inc = self.t.atom_cost(depth, a);
            for (i, &b) in self.assignment.iter().enumerate() {
                inc += self.t.bond_cost(self.t.pair(i, depth), self.t.pair(b, a));
            }
            let cost = partial + inc;
            self.used[a] = true;
            self.assignment.push(a);
            let bound = cost + self.remaining_bound(depth + 1);
            if !self.prunable(bound) {
                self.descend(cost);
            }
            self.assignment.pop();
            self.used[a] = false;
        }
    }

    fn offer(&mut self) {
        let cost = self.t.canonical_cost(&self.assignment);
        if self.heap.len() < self.k {
            self.heap.push(Candidate { cost, assignment: self.assignment.clone() });
            return;
        }
        let candidate = Candidate { cost, assignment: self.assignment.clone() };
        if let Some(worst) = self.heap.peek() {
            if candidate < *worst {
                self.heap.pop();
                self.heap.push(candidate);
            }
        }
    }

    fn finish(self) -> TopKResult {
        let nodes = self.nodes;
        let ranked = self
            .heap
            .into_sorted_vec()
            .into_iter()
            .map(|c| MatchResult {
                permutation: AtomPermutation(c.assignment),
                cost: c.cost,
                nodes_expanded: nodes,
            })
            .collect();
        TopKResult { ranked, k: self.k }
    }
}
