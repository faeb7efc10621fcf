//! Molecular graphs in the quasi-fully-connected encoding.
//!
//! Every atom is a node and every unordered atom pair is a node as well,
//! including pairs without a chemical bond (`BondType::NoBond`). The
//! [`FeatureMatrix`] lays these nodes out as rows: atoms first in index
//! order, then pairs `{i, j}` (i < j) in lexicographic order. Column 0
//! flags the node kind (atom 0, bond 1) and columns 1..=5 carry the type
//! one-hot. Atom types use columns 1..=4 and leave column 5 at zero.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::AtomPermutation;

/// Width of every feature row: one node-kind flag plus five type columns.
pub const FEATURE_COLS: usize = 6;

/// Column holding the node-kind flag.
pub const KIND_COL: usize = 0;

/// Heavy-atom vocabulary. Hydrogens are implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AtomType {
    C,
    N,
    O,
    F,
}

impl AtomType {
    pub const ALL: [AtomType; 4] = [AtomType::C, AtomType::N, AtomType::O, AtomType::F];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Feature column of this type's one-hot entry.
    pub fn column(self) -> usize {
        1 + self.index()
    }

    pub fn max_valence(self) -> f64 {
        match self {
            AtomType::C => 4.0,
            AtomType::N => 3.0,
            AtomType::O => 2.0,
            AtomType::F => 1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            AtomType::C => 'C',
            AtomType::N => 'N',
            AtomType::O => 'O',
            AtomType::F => 'F',
        }
    }
}

impl fmt::Display for AtomType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Pair types, with `NoBond` as an explicit category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BondType {
    NoBond,
    Single,
    Aromatic,
    Double,
    Triple,
}

impl BondType {
    pub const ALL: [BondType; 5] = [
        BondType::NoBond,
        BondType::Single,
        BondType::Aromatic,
        BondType::Double,
        BondType::Triple,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn column(self) -> usize {
        1 + self.index()
    }

    /// Bond order used by the valence model; aromatic counts 1.5.
    pub fn order(self) -> f64 {
        match self {
            BondType::NoBond => 0.0,
            BondType::Single => 1.0,
            BondType::Aromatic => 1.5,
            BondType::Double => 2.0,
            BondType::Triple => 3.0,
        }
    }

    pub fn is_bond(self) -> bool {
        self != BondType::NoBond
    }
}

/// Number of unordered atom pairs.
pub fn pair_count(n_atoms: usize) -> usize {
    n_atoms * n_atoms.saturating_sub(1) / 2
}

/// Total node (row) count `n + n(n-1)/2`.
pub fn node_count(n_atoms: usize) -> usize {
    n_atoms + pair_count(n_atoms)
}

/// Position of the unordered pair `{i, j}` in lexicographic pair order.
///
/// Panics if `i == j`.
pub fn pair_index(n_atoms: usize, i: usize, j: usize) -> usize {
    assert_ne!(i, j, "pair endpoints must differ");
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(b < n_atoms);
    a * n_atoms - a * (a + 1) / 2 + (b - a - 1)
}

/// All pairs `(i, j)`, i < j, in lexicographic order.
pub fn pairs(n_atoms: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n_atoms).flat_map(move |i| (i + 1..n_atoms).map(move |j| (i, j)))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MolecularGraph {
    atoms: Vec<AtomType>,
    /// One entry per unordered pair, lexicographic order.
    bonds: Vec<BondType>,
}

impl MolecularGraph {
    /// A graph over `atoms` with every pair set to `NoBond`.
    pub fn new(atoms: Vec<AtomType>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let bonds = vec![BondType::NoBond; pair_count(atoms.len())];
        Ok(Self { atoms, bonds })
    }

    /// Builds a graph from atoms and an explicit list of bonds; unlisted pairs are `NoBond`.
    pub fn from_bonds(atoms: Vec<AtomType>, bonds: &[(usize, usize, BondType)]) -> Result<Self> {
        let mut g = Self::new(atoms)?;
        for &(i, j, b) in bonds {
            if i == j || i >= g.n_atoms() || j >= g.n_atoms() {
                return Err(Error::InvalidMatrix(format!("bad bond endpoints ({i}, {j})")));
            }
            g.set_bond(i, j, b);
        }
        Ok(g)
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn node_count(&self) -> usize {
        node_count(self.n_atoms())
    }

    pub fn atoms(&self) -> &[AtomType] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> AtomType {
        self.atoms[i]
    }

    pub fn set_atom(&mut self, i: usize, atom: AtomType) {
        self.atoms[i] = atom;
    }

    /// Pair types in lexicographic pair order.
    pub fn bond_list(&self) -> &[BondType] {
        &self.bonds
    }

    pub fn bond(&self, i: usize, j: usize) -> BondType {
        self.bonds[pair_index(self.n_atoms(), i, j)]
    }

    pub fn set_bond(&mut self, i: usize, j: usize, bond: BondType) {
        let n = self.n_atoms();
        self.bonds[pair_index(n, i, j)] = bond;
    }

    /// Atoms joined to `i` by an actual bond, ascending.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, BondType)> + '_ {
        (0..self.n_atoms())
            .filter(move |&j| j != i)
            .map(move |j| (j, self.bond(i, j)))
            .filter(|(_, b)| b.is_bond())
    }

    /// Whether the atoms form a single component under non-`NoBond` pairs.
    pub fn is_connected(&self) -> bool {
        let n = self.n_atoms();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for (v, _) in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Relabels atoms so that atom `i` becomes atom `sigma(i)`.
    ///
    /// Matching `self` against the result with permutation `sigma` costs zero.
    pub fn permuted(&self, sigma: &AtomPermutation) -> Result<Self> {
        let n = self.n_atoms();
        if sigma.len() != n {
            return Err(Error::ShapeMismatch { left: n, right: sigma.len() });
        }
        let mut out = self.clone();
        for i in 0..n {
            out.atoms[sigma.get(i)] = self.atoms[i];
        }
        for (i, j) in pairs(n) {
            out.set_bond(sigma.get(i), sigma.get(j), self.bond(i, j));
        }
        Ok(out)
    }

    pub fn to_feature_matrix(&self) -> FeatureMatrix {
        to_feature_matrix(self)
    }
}

/// Labelled equality: same atom sequence and same pair types, no relabeling.
pub fn graph_equal(g1: &MolecularGraph, g2: &MolecularGraph) -> bool {
    g1 == g2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    Atom,
    Bond,
}

impl RowKind {
    /// Columns that carry a category for this kind of row.
    pub fn legal_columns(self) -> Range<usize> {
        match self {
            RowKind::Atom => 1..1 + AtomType::ALL.len(),
            RowKind::Bond => 1..1 + BondType::ALL.len(),
        }
    }

    pub fn flag(self) -> f64 {
        match self {
            RowKind::Atom => 0.0,
            RowKind::Bond => 1.0,
        }
    }
}

/// Dense `m x 6` matrix in the fixed row layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_atoms: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    /// All-zero type columns with the structural flag column filled in.
    pub fn structural(n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::EmptyGraph);
        }
        let m = node_count(n_atoms);
        let mut data = vec![0.0; m * FEATURE_COLS];
        for r in n_atoms..m {
            data[r * FEATURE_COLS + KIND_COL] = 1.0;
        }
        Ok(Self { n_atoms, data })
    }

    /// An all-zero matrix of the right shape (used for gradients).
    pub fn zeros(n_atoms: usize) -> Self {
        Self { n_atoms, data: vec![0.0; node_count(n_atoms) * FEATURE_COLS] }
    }

    /// Wraps row-major data; checks the shape and the node-kind column.
    pub fn from_rows(n_atoms: usize, data: Vec<f64>) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::EmptyGraph);
        }
        let m = node_count(n_atoms);
        if data.len() != m * FEATURE_COLS {
            return Err(Error::InvalidMatrix(format!(
                "expected {m} rows x {FEATURE_COLS} columns ({} values), got {} values",
                m * FEATURE_COLS,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!("non-finite entry at flat index {bad}")));
        }
        let out = Self { n_atoms, data };
        for r in 0..m {
            let want = out.row_kind(r).flag();
            if out.get(r, KIND_COL) != want {
                return Err(Error::InvalidMatrix(format!(
                    "row {r}: node-kind column is {}, expected {want}",
                    out.get(r, KIND_COL)
                )));
            }
        }
        Ok(out)
    }

    /// Infers `n_atoms` from a row count, for matrices read from files.
    pub fn from_row_vecs(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n_atoms = (1..=m).find(|&n| node_count(n) == m).ok_or_else(|| {
            Error::InvalidMatrix(format!("{m} rows is not n + n(n-1)/2 for any n"))
        })?;
        let mut data = Vec::with_capacity(m * FEATURE_COLS);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != FEATURE_COLS {
                return Err(Error::InvalidMatrix(format!(
                    "row {r} has {} columns, expected {FEATURE_COLS}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_rows(n_atoms, data)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_rows(&self) -> usize {
        node_count(self.n_atoms)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * FEATURE_COLS + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * FEATURE_COLS + col] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * FEATURE_COLS..(r + 1) * FEATURE_COLS]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * FEATURE_COLS..(r + 1) * FEATURE_COLS]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(FEATURE_COLS)
    }

    pub fn row_kind(&self, r: usize) -> RowKind {
        if r < self.n_atoms {
            RowKind::Atom
        } else {
            RowKind::Bond
        }
    }

    pub fn row_kinds(&self) -> Vec<RowKind> {
        (0..self.n_rows()).map(|r| self.row_kind(r)).collect()
    }

    /// Atom pair of a bond row, `None` for atom rows.
    pub fn bond_endpoints(&self, r: usize) -> Option<(usize, usize)> {
        if r < self.n_atoms {
            return None;
        }
        pairs(self.n_atoms).nth(r - self.n_atoms)
    }

    pub fn bond_row_endpoints(&self) -> Vec<(usize, usize)> {
        pairs(self.n_atoms).collect()
    }

    /// Row index of the bond node `{i, j}`.
    pub fn bond_row(&self, i: usize, j: usize) -> usize {
        self.n_atoms + pair_index(self.n_atoms, i, j)
    }

    /// Relabels atoms so that atom `i` becomes atom `sigma(i)`; bond rows follow.
    pub fn permuted(&self, sigma: &AtomPermutation) -> Result<Self> {
        if sigma.len() != self.n_atoms {
            return Err(Error::ShapeMismatch { left: self.n_atoms, right: sigma.len() });
        }
        let nodes = crate::matching::induced_node_permutation(sigma);
        let mut out = self.clone();
        for (r, &dst) in nodes.iter().enumerate() {
            out.row_mut(dst).copy_from_slice(self.row(r));
        }
        Ok(out)
    }

    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

pub fn to_feature_matrix(g: &MolecularGraph) -> FeatureMatrix {
    let n = g.n_atoms();
    let mut x = FeatureMatrix::structural(n).expect("graphs have at least one atom");
    for (i, atom) in g.atoms().iter().enumerate() {
        x.set(i, atom.column(), 1.0);
    }
    for (p, bond) in g.bond_list().iter().enumerate() {
        x.set(n + p, bond.column(), 1.0);
    }
    x
}

/// Tolerance on the per-row probability sum.
const ROW_SUM_TOL: f64 = 1e-9;

/// Decoder output: node structure is fixed, types are distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilisticGraph {
    matrix: FeatureMatrix,
}

impl ProbabilisticGraph {
    pub fn new(matrix: FeatureMatrix) -> Result<Self> {
        for r in 0..matrix.n_rows() {
            let kind = matrix.row_kind(r);
            if matrix.get(r, KIND_COL) != kind.flag() {
                return Err(Error::InvalidDistribution(format!("row {r}: node-kind flag altered")));
            }
            let legal = kind.legal_columns();
            let mut sum = 0.0;
            for c in 1..FEATURE_COLS {
                let v = matrix.get(r, c);
                if legal.contains(&c) {
                    if v.is_nan() || v < 0.0 {
                        return Err(Error::InvalidDistribution(format!(
                            "row {r}, column {c}: negative or NaN probability {v}"
                        )));
                    }
                    sum += v;
                } else if v != 0.0 {
                    return Err(Error::InvalidDistribution(format!(
                        "row {r}, column {c}: illegal category must be exactly 0, got {v}"
                    )));
                }
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidDistribution(format!("row {r}: probabilities sum to {sum}")));
            }
        }
        Ok(Self { matrix })
    }

    /// Keeps the structural checks but drops the simplex constraint on legal
    /// entries. The losses extend smoothly to such matrices, which is what
    /// entrywise finite-difference checks need.
    pub fn relaxed(matrix: FeatureMatrix) -> Result<Self> {
        for r in 0..matrix.n_rows() {
            let kind = matrix.row_kind(r);
            if matrix.get(r, KIND_COL) != kind.flag() {
                return Err(Error::InvalidDistribution(format!("row {r}: node-kind flag altered")));
            }
            let legal = kind.legal_columns();
            if let Some(c) = (1..FEATURE_COLS).find(|c| !legal.contains(c) && matrix.get(r, *c) != 0.0) {
                return Err(Error::InvalidDistribution(format!("row {r}, column {c}: illegal category must be exactly 0")));
            }
        }
        Ok(Self { matrix })
    }

    /// Reinterprets a discrete graph's one-hot rows as probabilities.
    pub fn from_graph(g: &MolecularGraph) -> Self {
        Self { matrix: to_feature_matrix(g) }
    }

    pub fn n_atoms(&self) -> usize {
        self.matrix.n_atoms()
    }

    pub fn matrix(&self) -> &FeatureMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> FeatureMatrix {
        self.matrix
    }

    pub fn permuted(&self, sigma: &AtomPermutation) -> Result<Self> {
        Ok(Self { matrix: self.matrix.permuted(sigma)? })
    }
}

/// Index of the largest entry; ties go to the lowest index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Most likely discrete graph: per-row argmax over legal categories.
pub fn discretize(p: &ProbabilisticGraph) -> MolecularGraph {
    let x = p.matrix();
    let n = x.n_atoms();
    let atoms = (0..n)
        .map(|r| {
            let row = &x.row(r)[RowKind::Atom.legal_columns()];
            AtomType::ALL[argmax(row)]
        })
        .collect();
    let mut g = MolecularGraph::new(atoms).expect("probabilistic graphs have at least one atom");
    for (p_idx, (i, j)) in pairs(n).enumerate() {
        let row = &x.row(n + p_idx)[RowKind::Bond.legal_columns()];
        g.set_bond(i, j, BondType::ALL[argmax(row)]);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn methyl_isocyanate() -> MolecularGraph {
        use AtomType::*;
        MolecularGraph::from_bonds(
            vec![C, N, C, O],
            &[(0, 1, BondType::Single), (1, 2, BondType::Double), (2, 3, BondType::Double)],
        )
        .unwrap()
    }

    #[test]
    fn methyl_isocyanate_matrix_is_10_by_6() {
        let x = to_feature_matrix(&methyl_isocyanate());
        assert_eq!(x.n_rows(), 10);
        assert_eq!(x.as_slice().len(), 60);
        assert_eq!(x.row(1), &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        // {1,2} is the 4th pair: (0,1),(0,2),(0,3),(1,2)
        assert_eq!(x.row(4 + 3), &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        for row in x.rows() {
            assert_eq!(row[1..].iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn single_atom_matrix() {
        let g = MolecularGraph::new(vec![AtomType::C]).unwrap();
        let x = to_feature_matrix(&g);
        assert_eq!(x.n_rows(), 1);
        assert_eq!(x.row(0), &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn three_atom_bond_rows_are_lexicographic() {
        let g = MolecularGraph::new(vec![AtomType::C; 3]).unwrap();
        let x = to_feature_matrix(&g);
        assert_eq!(x.n_rows(), 6);
        assert_eq!(x.bond_row_endpoints(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(x.row_kinds()[..3], [RowKind::Atom; 3]);
        assert_eq!(x.bond_endpoints(5), Some((1, 2)));
        assert_eq!(x.bond_row(2, 0), 4);
    }

    #[test]
    fn node_count_formula() {
        for n in 1..=9 {
            let g = MolecularGraph::new(vec![AtomType::N; n]).unwrap();
            assert_eq!(to_feature_matrix(&g).n_rows(), n + n * (n - 1) / 2);
        }
    }

    #[test]
    fn pair_index_matches_enumeration() {
        for n in 2..=9 {
            for (k, (i, j)) in pairs(n).enumerate() {
                assert_eq!(pair_index(n, i, j), k);
                assert_eq!(pair_index(n, j, i), k);
            }
        }
    }

    #[test]
    fn empty_graph_rejected() {
        assert!(matches!(MolecularGraph::new(vec![]), Err(Error::EmptyGraph)));
    }

    #[test]
    fn discretize_one_hot_is_identity() {
        let g = methyl_isocyanate();
        assert_eq!(discretize(&ProbabilisticGraph::from_graph(&g)), g);
    }

    #[test]
    fn discretize_breaks_ties_low() {
        let mut x = FeatureMatrix::structural(2).unwrap();
        x.row_mut(0)[1..5].copy_from_slice(&[0.25; 4]);
        x.row_mut(1)[1..5].copy_from_slice(&[0.25; 4]);
        x.row_mut(2)[1..6].copy_from_slice(&[0.4, 0.4, 0.1, 0.05, 0.05]);
        let g = discretize(&ProbabilisticGraph::new(x).unwrap());
        assert_eq!(g.atoms(), &[AtomType::C, AtomType::C]);
        assert_eq!(g.bond(0, 1), BondType::NoBond);
    }

    #[test]
    fn probabilistic_graph_validation() {
        let mut x = FeatureMatrix::structural(1).unwrap();
        assert!(ProbabilisticGraph::new(x.clone()).is_err());
        x.row_mut(0)[1..5].copy_from_slice(&[0.5, 0.5, 0.0, 0.0]);
        assert!(ProbabilisticGraph::new(x.clone()).is_ok());
        x.set(0, 5, 0.1);
        assert!(ProbabilisticGraph::new(x.clone()).is_err());
        x.set(0, 5, 0.0);
        x.set(0, KIND_COL, 1.0);
        assert!(ProbabilisticGraph::new(x).is_err());
    }

    #[test]
    fn labelled_equality() {
        let g = methyl_isocyanate();
        assert!(graph_equal(&g, &g));

        let mut swapped = g.clone();
        swapped.set_atom(0, AtomType::N);
        swapped.set_atom(1, AtomType::C);
        assert!(!graph_equal(&g, &swapped));

        let mut rebonded = g.clone();
        rebonded.set_bond(0, 1, BondType::Double);
        assert!(!graph_equal(&g, &rebonded));
    }

    #[test]
    fn permuted_matrix_matches_permuted_graph() {
        let g = methyl_isocyanate();
        let sigma = AtomPermutation::new(vec![2, 0, 3, 1]).unwrap();
        let lhs = to_feature_matrix(&g.permuted(&sigma).unwrap());
        let rhs = to_feature_matrix(&g).permuted(&sigma).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn connectivity() {
        assert!(methyl_isocyanate().is_connected());
        assert!(!MolecularGraph::new(vec![AtomType::C; 3]).unwrap().is_connected());
        assert!(MolecularGraph::new(vec![AtomType::C]).unwrap().is_connected());
    }

    #[test]
    fn from_row_vecs_infers_atom_count() {
        let x = to_feature_matrix(&methyl_isocyanate());
        let rows: Vec<Vec<f64>> = x.rows().map(|r| r.to_vec()).collect();
        assert_eq!(FeatureMatrix::from_row_vecs(&rows).unwrap(), x);
        assert!(FeatureMatrix::from_row_vecs(&rows[..9]).is_err());
    }
}
