//! Canonical labeling by color refinement and individualization.
//!
//! Colors start as atom types and are refined with the sorted multiset of
//! `(bond type, neighbor color)` until stable. If cells remain, every
//! vertex of the first non-singleton cell is individualized in turn and the
//! search recurses; each discrete partition yields an atom order, and the
//! order with the lexicographically smallest serialization wins. Twins
//! (atoms with equal type and identical bonds to every other atom) are
//! interchangeable, so only one per twin class is tried in a cell.

use std::fmt;

use serde::Serialize;

use crate::graph::MolecularGraph;

/// Relabeling-invariant key of a molecular graph's isomorphism class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CanonicalForm(String);

impl CanonicalForm {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn serialize(g: &MolecularGraph, order: &[usize]) -> String {
    let n = order.len();
    let mut s = String::with_capacity(n + 1 + n * (n - 1) / 2);
    s.extend(order.iter().map(|&a| g.atom(a).symbol()));
    s.push(':');
    for k in 0..n {
        for l in k + 1..n {
            let code = g.bond(order[k], order[l]).index() as u8;
            s.push(char::from(b'0' + code));
        }
    }
    s
}

/// Re-ranks vertices by `keys`, preserving the order of the keys.
fn rank<K: Ord + Clone>(keys: &[K]) -> (Vec<usize>, usize) {
    let mut distinct: Vec<K> = keys.to_vec();
    distinct.sort();
    distinct.dedup();
    let colors = keys
        .iter()
        .map(|k| distinct.binary_search(k).expect("key present"))
        .collect();
    (colors, distinct.len())
}

fn cell_count(colors: &[usize]) -> usize {
    colors.iter().max().map_or(0, |m| m + 1)
}

fn refine(g: &MolecularGraph, mut colors: Vec<usize>) -> Vec<usize> {
    let n = g.n_atoms();
    let mut cells = cell_count(&colors);
    loop {
        let keys: Vec<(usize, Vec<(usize, usize)>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<(usize, usize)> =
                    g.neighbors(v).map(|(w, b)| (b.index(), colors[w])).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let (next, count) = rank(&keys);
        colors = next;
        if count == cells {
            return colors;
        }
        cells = count;
    }
}

fn twin_classes(g: &MolecularGraph) -> Vec<usize> {
    let n = g.n_atoms();
    let mut class: Vec<usize> = (0..n).collect();
    #[allow(clippy::needless_range_loop)]
    for u in 0..n {
        if class[u] != u {
            continue;
        }
        for v in u + 1..n {
            if class[v] == v
                && g.atom(u) == g.atom(v)
                && (0..n).filter(|&w| w != u && w != v).all(|w| g.bond(u, w) == g.bond(v, w))
            {
                class[v] = u;
            }
        }
    }
    class
}

struct Canonizer<'a> {
    g: &'a MolecularGraph,
    twins: Vec<usize>,
    best: Option<(String, Vec<usize>)>,
}

impl Canonizer<'_> {
    fn search(&mut self, colors: Vec<usize>) {
        let n = self.g.n_atoms();
        if cell_count(&colors) == n {
            let mut order = vec![0; n];
            for (v, &c) in colors.iter().enumerate() {
                order[c] = v;
            }
            let s = serialize(self.g, &order);
            if self.best.as_ref().is_none_or(|(b, _)| s < *b) {
                self.best = Some((s, order));
            }
            return;
        }
        let mut sizes = vec![0usize; cell_count(&colors)];
        for &c in &colors {
            sizes[c] += 1;
        }
        let target = sizes.iter().position(|&s| s > 1).expect("non-discrete partition");
        let mut tried_classes = Vec::new();
        for v in 0..n {
            if colors[v] != target || tried_classes.contains(&self.twins[v]) {
                continue;
            }
            tried_classes.push(self.twins[v]);
            let keys: Vec<(usize, bool)> = (0..n).map(|x| (colors[x], x != v)).collect();
            let (split, _) = rank(&keys);
            self.search(refine(self.g, split));
        }
    }
}

/// Atom order of the canonical form: position `k` holds atom `order[k]`.
pub fn canonical_labeling(g: &MolecularGraph) -> Vec<usize> {
    canonize(g).1
}

pub fn canonical_form(g: &MolecularGraph) -> CanonicalForm {
    CanonicalForm(canonize(g).0)
}

fn canonize(g: &MolecularGraph) -> (String, Vec<usize>) {
    let initial: Vec<usize> = g.atoms().iter().map(|a| a.index()).collect();
    let (initial, _) = rank(&initial);
    let mut c = Canonizer { g, twins: twin_classes(g), best: None };
    c.search(refine(g, initial));
    c.best.expect("search reaches at least one leaf")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{AtomType, BondType};
    use crate::matching::AtomPermutation;
    use crate::smiles_io::parse_smiles;

    fn form(s: &str) -> CanonicalForm {
        canonical_form(&parse_smiles(s).unwrap())
    }

    #[test]
    fn spelling_independent() {
        assert_eq!(form("CCO"), form("OCC"));
        assert_eq!(form("CC(=O)N"), form("NC(C)=O"));
        assert_eq!(form("c1ccccc1"), form("c1ccccc1"));
        assert_eq!(form("C1CCCCC1O"), form("OC1CCCCC1"));
        assert_ne!(form("CCO"), form("COC"));
        assert_ne!(form("C=CC"), form("CC=C=C"));
    }

    #[test]
    fn relabeling_invariant() {
        let g = parse_smiles("CC1=CN(C)C(=O)N1").unwrap();
        let base = canonical_form(&g);
        let n = g.n_atoms();
        let mut perm: Vec<usize> = (0..n).collect();
        for step in 0..30 {
            perm.rotate_left(1 + step % 3);
            perm.swap(step % n, (step * 5 + 1) % n);
            let h = g.permuted(&AtomPermutation::new(perm.clone()).unwrap()).unwrap();
            assert_eq!(canonical_form(&h), base);
        }
    }

    #[test]
    fn symmetric_graphs_are_fast() {
        // Nine identical unbonded atoms: all twins, a single leaf.
        let g = MolecularGraph::new(vec![AtomType::C; 9]).unwrap();
        assert_eq!(canonical_form(&g).as_str().len(), 9 + 1 + 36);
        let mut k = g.clone();
        for i in 0..9 {
            for j in i + 1..9 {
                k.set_bond(i, j, BondType::Single);
            }
        }
        assert_ne!(canonical_form(&k), canonical_form(&g));
    }

    #[test]
    fn labeling_is_a_permutation() {
        let g = parse_smiles("OC(=O)C1CN1").unwrap();
        let mut order = canonical_labeling(&g);
        order.sort_unstable();
        assert_eq!(order, (0..g.n_atoms()).collect::<Vec<_>>());
    }
}
