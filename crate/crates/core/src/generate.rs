//! Seeded random graphs, molecules and permutations for tests, benches and
//! the fitting harness.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{AtomType, BondType, MolecularGraph};
use crate::matching::AtomPermutation;

pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> AtomPermutation {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    AtomPermutation::new(v).expect("shuffle of 0..n")
}

pub fn random_atom<R: Rng + ?Sized>(rng: &mut R) -> AtomType {
    AtomType::ALL[rng.random_range(0..AtomType::ALL.len())]
}

/// Any labelled graph: uniform atom types, each pair bonded with
/// probability `bond_prob` by a uniformly chosen bond type. No chemistry.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, n: usize, bond_prob: f64) -> MolecularGraph {
    let atoms = (0..n).map(|_| random_atom(rng)).collect();
    let mut g = MolecularGraph::new(atoms).expect("n >= 1");
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(bond_prob) {
                g.set_bond(i, j, BondType::ALL[rng.random_range(1..BondType::ALL.len())]);
            }
        }
    }
    g
}

/// Connected graph with arbitrary atom and bond types: a random spanning
/// tree plus extra bonds with probability `extra_prob`.
pub fn random_connected_graph<R: Rng + ?Sized>(rng: &mut R, n: usize, extra_prob: f64) -> MolecularGraph {
    let atoms = (0..n).map(|_| random_atom(rng)).collect();
    let mut g = MolecularGraph::new(atoms).expect("n >= 1");
    let bond = |rng: &mut R| BondType::ALL[rng.random_range(1..BondType::ALL.len())];
    for v in 1..n {
        let u = rng.random_range(0..v);
        let b = bond(rng);
        g.set_bond(u, v, b);
    }
    for i in 0..n {
        for j in i + 1..n {
            if !g.bond(i, j).is_bond() && rng.random_bool(extra_prob) {
                let b = bond(rng);
                g.set_bond(i, j, b);
            }
        }
    }
    let sigma = random_permutation(rng, n);
    g.permuted(&sigma).expect("same size")
}

struct Builder {
    g: MolecularGraph,
    used: Vec<f64>,
}

impl Builder {
    fn free(&self, i: usize) -> f64 {
        self.g.atom(i).max_valence() - self.used[i]
    }

    fn bond(&mut self, i: usize, j: usize, b: BondType) {
        self.g.set_bond(i, j, b);
        self.used[i] += b.order();
        self.used[j] += b.order();
    }
}

fn try_molecule<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Option<MolecularGraph> {
    let atoms: Vec<AtomType> = (0..n)
        .map(|_| {
            // Roughly QM9-like element mix.
            match rng.random_range(0..10) {
                0..=5 => AtomType::C,
                6 | 7 => AtomType::N,
                8 => AtomType::O,
                _ => AtomType::F,
            }
        })
        .collect();
    let mut b = Builder { g: MolecularGraph::new(atoms).ok()?, used: vec![0.0; n] };
    let mut start = 1;

    // Occasionally open with an aromatic ring of C and N.
    if n >= 5 && rng.random_bool(0.25) {
        let size = if n >= 6 && rng.random_bool(0.6) { 6 } else { 5 };
        for i in 0..size {
            if !matches!(b.g.atom(i), AtomType::C | AtomType::N) {
                b.g.set_atom(i, AtomType::C);
            }
        }
        for i in 0..size {
            b.bond(i, (i + 1) % size, BondType::Aromatic);
        }
        start = size;
    }

    for v in start..n {
        let candidates: Vec<usize> = (0..v).filter(|&u| b.free(u) >= 1.0).collect();
        let u = *candidates.get(rng.random_range(0..candidates.len().max(1)))?;
        let cap = b.free(u).min(b.free(v)).floor() as usize;
        let order = match cap {
            0 => return None,
            1 => 1,
            2 => {
                if rng.random_bool(0.8) {
                    1
                } else {
                    2
                }
            }
            _ => [1, 1, 1, 1, 1, 1, 2, 2, 3][rng.random_range(0..9)],
        };
        let bt = [BondType::Single, BondType::Double, BondType::Triple][order - 1];
        b.bond(u, v, bt);
    }

    // Extra single bonds close aliphatic rings.
    for i in 0..n {
        for j in i + 1..n {
            let aromatic = |k: usize| b.g.neighbors(k).any(|(_, t)| t == BondType::Aromatic);
            if !b.g.bond(i, j).is_bond()
                && b.free(i) >= 1.0
                && b.free(j) >= 1.0
                && !aromatic(i)
                && !aromatic(j)
                && rng.random_bool(0.08)
            {
                b.bond(i, j, BondType::Single);
            }
        }
    }
    Some(b.g)
}

/// Connected molecule that passes the validity model, with atoms in random
/// order. Contains aromatic rings now and then.
pub fn random_molecule<R: Rng + ?Sized>(rng: &mut R, n: usize) -> MolecularGraph {
    assert!(n >= 1, "a molecule needs at least one atom");
    loop {
        if let Some(g) = try_molecule(rng, n) {
            let sigma = random_permutation(rng, n);
            return g.permuted(&sigma).expect("same size");
        }
    }
}
