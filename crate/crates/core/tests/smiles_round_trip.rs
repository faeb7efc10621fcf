mod common;

use common::*;
use molmatch::generate::{random_connected_graph, random_molecule, random_permutation};
use molmatch::graph::to_feature_matrix;
use molmatch::matching::optimal_match;
use molmatch::metrics::canonical_form;
use molmatch::smiles_io::{parse_smiles, tokenize, write_smiles};
use rand::Rng;

fn same_molecule(a: &str, b: &str) -> bool {
    let (ga, gb) = (parse_smiles(a).unwrap(), parse_smiles(b).unwrap());
    ga.n_atoms() == gb.n_atoms() && optimal_match(&to_feature_matrix(&ga), &to_feature_matrix(&gb)).unwrap().cost == 0.0
}

#[test]
fn branch_order_does_not_matter() {
    assert!(same_molecule("C(C)O", "C(O)C"));
    assert!(same_molecule("CC(=O)N", "NC(C)=O"));
    assert!(same_molecule("c1ccncc1", "n1ccccc1"));
    assert!(!same_molecule("CCO", "COC"));
}

#[test]
fn arbitrary_connected_graphs_round_trip() {
    // Includes chemically impossible graphs: the writer must not care.
    let mut rng = rng(31);
    for _ in 0..500 {
        let n = rng.random_range(1..=8);
        let g = random_connected_graph(&mut rng, n, 0.25);
        let s = write_smiles(&g).unwrap();
        let back = parse_smiles(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
        assert_eq!(back.n_atoms(), n);
        assert_eq!(optimal_match(&to_feature_matrix(&g), &to_feature_matrix(&back)).unwrap().cost, 0.0, "{s}");
    }
}

#[test]
fn relabelings_write_the_same_string() {
    let mut rng = rng(32);
    for _ in 0..200 {
        let g = { let n = rng.random_range(1..=9); random_molecule(&mut rng, n) };
        let h = g.permuted(&random_permutation(&mut rng, g.n_atoms())).unwrap();
        assert_eq!(canonical_form(&g), canonical_form(&h));
        assert_eq!(write_smiles(&g).unwrap(), write_smiles(&h).unwrap());
    }
}

#[test]
fn token_positions_increase() {
    let mut rng = rng(33);
    const ALPHABET: &[u8] = b"CNOFcno()=#:-12%3[]H";
    for _ in 0..5000 {
        let len = rng.random_range(0..20);
        let s: String = (0..len).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())] as char).collect();
        if let Ok(tokens) = tokenize(&s) {
            assert!(tokens.windows(2).all(|w| w[0].position < w[1].position), "{s}");
        }
    }
}

#[test]
fn errors_carry_positions_inside_the_input() {
    let mut rng = rng(34);
    const ALPHABET: &[u8] = b"CNOFcno()=#:-12%3[]H.xS";
    for _ in 0..20_000 {
        let len = rng.random_range(0..16);
        let s: String = (0..len).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())] as char).collect();
        if let Err(e) = parse_smiles(&s) {
            assert!(e.position <= s.trim().chars().count(), "{s:?}: {e}");
        }
    }
}
