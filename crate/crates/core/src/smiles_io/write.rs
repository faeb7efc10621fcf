//! SMILES writer over the canonical atom order.
//!
//! A depth-first traversal starts at the first canonical atom and visits
//! neighbors in canonical order. Non-tree edges become ring closures whose
//! bond symbol is written on the opening side. Atoms are always written in
//! upper case, so aromatic bonds are spelled out with ':'.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{BondType, MolecularGraph};
use crate::metrics::canonical_labeling;

fn bond_symbol(b: BondType) -> &'static str {
    match b {
        BondType::Single | BondType::NoBond => "",
        BondType::Aromatic => ":",
        BondType::Double => "=",
        BondType::Triple => "#",
    }
}

fn ring_label(d: usize) -> String {
    if d < 10 {
        d.to_string()
    } else {
        format!("%{d:02}")
    }
}

struct Layout {
    /// Preorder index of each atom.
    visit: Vec<usize>,
    children: Vec<Vec<usize>>,
    /// Ring-closure edges as (opener, closer), opener visited first.
    rings: Vec<(usize, usize)>,
}

struct LayoutBuilder<'a> {
    g: &'a MolecularGraph,
    rank: &'a [usize],
    seen: BTreeSet<(usize, usize)>,
    counter: usize,
    layout: Layout,
}

impl LayoutBuilder<'_> {
    fn dfs(&mut self, v: usize) {
        self.layout.visit[v] = self.counter;
        self.counter += 1;
        let mut nbrs: Vec<usize> = self.g.neighbors(v).map(|(w, _)| w).collect();
        nbrs.sort_by_key(|&w| self.rank[w]);
        for w in nbrs {
            if !self.seen.insert((v.min(w), v.max(w))) {
                continue;
            }
            if self.layout.visit[w] == usize::MAX {
                self.layout.children[v].push(w);
                self.dfs(w);
            } else {
                self.layout.rings.push((w, v));
            }
        }
    }
}

fn layout(g: &MolecularGraph, rank: &[usize], root: usize) -> Layout {
    let n = g.n_atoms();
    let mut b = LayoutBuilder {
        g,
        rank,
        seen: BTreeSet::new(),
        counter: 0,
        layout: Layout { visit: vec![usize::MAX; n], children: vec![Vec::new(); n], rings: Vec::new() },
    };
    b.dfs(root);
    b.layout
}

struct Emitter<'a> {
    g: &'a MolecularGraph,
    layout: Layout,
    digit_of: Vec<Option<usize>>,
    in_use: BTreeSet<usize>,
    out: String,
}

impl Emitter<'_> {
    fn emit(&mut self, v: usize) {
        self.out.push(self.g.atom(v).symbol());
        let mut closing: Vec<usize> = Vec::new();
        let mut opening: Vec<usize> = Vec::new();
        for (e, &(a, b)) in self.layout.rings.iter().enumerate() {
            if b == v {
                closing.push(e);
            } else if a == v {
                opening.push(e);
            }
        }
        // Closures in the order their partners were visited.
        closing.sort_by_key(|&e| self.layout.visit[self.layout.rings[e].0]);
        opening.sort_by_key(|&e| self.layout.visit[self.layout.rings[e].1]);
        // New digits are chosen before this atom's closures release theirs,
        // so a digit is never closed and reopened on the same atom.
        let mut opened = Vec::new();
        for &e in &opening {
            let d = (1..).find(|d| !self.in_use.contains(d)).expect("free digit");
            self.in_use.insert(d);
            self.digit_of[e] = Some(d);
            opened.push(e);
        }
        for e in closing {
            let d = self.digit_of[e].expect("ring opened before it closes");
            self.out.push_str(&ring_label(d));
            self.in_use.remove(&d);
        }
        for e in opened {
            let (a, b) = self.layout.rings[e];
            self.out.push_str(bond_symbol(self.g.bond(a, b)));
            self.out.push_str(&ring_label(self.digit_of[e].expect("just assigned")));
        }
        let children = self.layout.children[v].clone();
        let last = children.len().saturating_sub(1);
        for (k, w) in children.into_iter().enumerate() {
            let branch = k < last;
            if branch {
                self.out.push('(');
            }
            self.out.push_str(bond_symbol(self.g.bond(v, w)));
            self.emit(w);
            if branch {
                self.out.push(')');
            }
        }
    }
}

/// Writes a connected graph as SMILES; equal canonical forms give equal strings.
pub fn write_smiles(g: &MolecularGraph) -> Result<String> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let order = canonical_labeling(g);
    let mut rank = vec![0; order.len()];
    for (k, &v) in order.iter().enumerate() {
        rank[v] = k;
    }
    let layout = layout(g, &rank, order[0]);
    let n_rings = layout.rings.len();
    let mut emitter = Emitter {
        g,
        layout,
        digit_of: vec![None; n_rings],
        in_use: BTreeSet::new(),
        out: String::new(),
    };
    emitter.emit(order[0]);
    Ok(emitter.out)
}
