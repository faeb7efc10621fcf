//! Validity, uniqueness and novelty of generated molecule sets.
//!
//! Validity is an internal valence model rather than a full chemistry
//! toolkit: the bond graph must be connected, each atom's summed bond
//! orders (aromatic = 1.5) must not exceed its maximum valence, and an atom
//! with aromatic bonds must have exactly two of them. This is stricter than
//! sanitization in a real toolkit (aromatic oxygen in furan fails, for
//! instance), so absolute validity numbers are not comparable to
//! toolkit-based ones.

mod canon;

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

pub use canon::{canonical_form, canonical_labeling, CanonicalForm};

use crate::error::{Error, Result};
use crate::graph::{BondType, MolecularGraph};
use crate::smiles_io::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InvalidReason {
    Disconnected,
    OverValence { atom: usize },
    BadAromatic { atom: usize },
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Disconnected => write!(f, "disconnected"),
            Self::OverValence { atom } => write!(f, "atom {atom} exceeds its valence"),
            Self::BadAromatic { atom } => write!(f, "atom {atom} does not have exactly two aromatic bonds"),
        }
    }
}

/// Checks connectivity, aromatic bond counts and valences, in that order.
pub fn check_validity(g: &MolecularGraph) -> Result<(), InvalidReason> {
    if !g.is_connected() {
        return Err(InvalidReason::Disconnected);
    }
    for atom in 0..g.n_atoms() {
        let aromatic = g.neighbors(atom).filter(|(_, b)| *b == BondType::Aromatic).count();
        if aromatic != 0 && aromatic != 2 {
            return Err(InvalidReason::BadAromatic { atom });
        }
    }
    for atom in 0..g.n_atoms() {
        let total: f64 = g.neighbors(atom).map(|(_, b)| b.order()).sum();
        if total > g.atom(atom).max_valence() {
            return Err(InvalidReason::OverValence { atom });
        }
    }
    Ok(())
}

pub fn is_valid(g: &MolecularGraph) -> bool {
    check_validity(g).is_ok()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationReport {
    pub n_samples: usize,
    pub n_valid: usize,
    pub n_unique: usize,
    pub n_novel: usize,
    pub validity: f64,
    pub uniqueness: f64,
    pub novelty: f64,
    pub overall: f64,
}

fn fraction(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl GenerationReport {
    /// Cascaded fractions: uniqueness over valid, novelty over unique.
    pub fn from_counts(n_samples: usize, n_valid: usize, n_unique: usize, n_novel: usize) -> Self {
        let validity = fraction(n_valid, n_samples);
        let uniqueness = fraction(n_unique, n_valid);
        let novelty = fraction(n_novel, n_unique);
        Self {
            n_samples,
            n_valid,
            n_unique,
            n_novel,
            validity,
            uniqueness,
            novelty,
            overall: overall_fraction(validity, uniqueness, novelty),
        }
    }
}

/// Fraction of samples that are valid, unique and novel at once.
pub fn overall_fraction(validity: f64, uniqueness: f64, novelty: f64) -> f64 {
    validity * uniqueness * novelty
}

/// Scores samples against the canonical forms of a reference set.
pub fn evaluate_against(samples: &[MolecularGraph], reference: &BTreeSet<CanonicalForm>) -> Result<GenerationReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let valid_forms: Vec<CanonicalForm> = samples
        .par_iter()
        .filter(|g| is_valid(g))
        .map(canonical_form)
        .collect();
    let unique: BTreeSet<&CanonicalForm> = valid_forms.iter().collect();
    let novel = unique.iter().filter(|f| !reference.contains(**f)).count();
    Ok(GenerationReport::from_counts(samples.len(), valid_forms.len(), unique.len(), novel))
}

pub fn evaluate(samples: &[MolecularGraph], reference: &Dataset) -> Result<GenerationReport> {
    evaluate_against(samples, &reference.canonical_set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AtomType;
    use crate::smiles_io::parse_smiles;

    fn mol(s: &str) -> MolecularGraph {
        parse_smiles(s).unwrap()
    }

    #[test]
    fn validity_examples() {
        assert_eq!(check_validity(&mol("CN=C=O")), Ok(()));
        assert!(is_valid(&mol("C")));
        assert_eq!(check_validity(&mol("F=F")), Err(InvalidReason::OverValence { atom: 0 }));
        let loose = MolecularGraph::new(vec![AtomType::C; 3]).unwrap();
        assert_eq!(check_validity(&loose), Err(InvalidReason::Disconnected));
        assert!(is_valid(&mol("c1ccccc1")));
        assert!(is_valid(&mol("Cc1ccccc1")));
        assert!(is_valid(&mol("c1cc[nH]c1")));
        // Exact 1.5 orders: aromatic oxygen carries 3 > 2.
        assert_eq!(check_validity(&mol("c1ccoc1")), Err(InvalidReason::OverValence { atom: 3 }));
        assert!(!is_valid(&mol("C#CC#N=C")));
    }

    #[test]
    fn aromatic_count_proxy() {
        let g = mol("CC:C");
        assert_eq!(check_validity(&g), Err(InvalidReason::BadAromatic { atom: 1 }));
    }

    #[test]
    fn report_counts() {
        let samples: Vec<_> = std::iter::repeat_n(mol("CCO"), 10).collect();
        let r = evaluate_against(&samples, &BTreeSet::new()).unwrap();
        assert_eq!((r.validity, r.uniqueness, r.novelty), (1.0, 0.1, 1.0));
        assert!((r.overall - 0.1).abs() < 1e-15);
    }

    #[test]
    fn degenerate_denominators_give_zero() {
        let r = GenerationReport::from_counts(5, 0, 0, 0);
        assert_eq!((r.validity, r.uniqueness, r.novelty, r.overall), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn known_molecules_are_not_novel() {
        let reference: BTreeSet<_> = [canonical_form(&mol("OCC"))].into();
        let samples = vec![mol("CCO"), mol("CCN"), mol("F=F")];
        let r = evaluate_against(&samples, &reference).unwrap();
        assert_eq!((r.n_valid, r.n_unique, r.n_novel), (2, 2, 1));
        assert_eq!(r.novelty, 0.5);
    }

    #[test]
    fn empty_samples_rejected() {
        assert!(matches!(evaluate_against(&[], &BTreeSet::new()), Err(Error::EmptySamples)));
    }
}
