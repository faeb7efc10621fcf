use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::MolecularGraph;
use crate::metrics::{canonical_form, CanonicalForm};

use super::{parse_smiles, write_smiles};

/// Heavy-atom bound of the QM9 set.
pub const DEFAULT_MAX_ATOMS: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineFailure {
    /// 1-based line number in the source file.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub molecules: Vec<MolecularGraph>,
    pub source_lines: Vec<String>,
    pub canonical_set: BTreeSet<CanonicalForm>,
    pub failures: Vec<LineFailure>,
    /// Line numbers of molecules rejected for exceeding the atom limit.
    pub oversize: Vec<usize>,
}

enum LineOutcome {
    Skip,
    Molecule(MolecularGraph, String),
    Failed(String),
    Oversize,
}

impl Dataset {
    /// Parses SMILES lines; blank lines and `#` comments are skipped.
    pub fn from_lines<S: AsRef<str> + Sync>(lines: &[S], max_atoms: usize) -> Self {
        let outcomes: Vec<LineOutcome> = lines
            .par_iter()
            .map(|raw| {
                let text = raw.as_ref().trim();
                if text.is_empty() || text.starts_with('#') {
                    return LineOutcome::Skip;
                }
                match parse_smiles(text) {
                    Ok(g) if g.n_atoms() > max_atoms => LineOutcome::Oversize,
                    Ok(g) => LineOutcome::Molecule(g, text.to_string()),
                    Err(e) => LineOutcome::Failed(e.to_string()),
                }
            })
            .collect();
        let mut ds = Dataset::default();
        for (idx, outcome) in outcomes.into_iter().enumerate() {
            let line = idx + 1;
            match outcome {
                LineOutcome::Skip => {}
                LineOutcome::Molecule(g, text) => {
                    ds.canonical_set.insert(canonical_form(&g));
                    ds.molecules.push(g);
                    ds.source_lines.push(text);
                }
                LineOutcome::Failed(message) => ds.failures.push(LineFailure { line, message }),
                LineOutcome::Oversize => ds.oversize.push(line),
            }
        }
        ds
    }

    /// Wraps in-memory graphs; source lines are their written SMILES.
    pub fn from_graphs(molecules: Vec<MolecularGraph>) -> Result<Self> {
        let source_lines = molecules.iter().map(write_smiles).collect::<Result<Vec<_>>>()?;
        let canonical_set = molecules.iter().map(canonical_form).collect();
        Ok(Self { molecules, source_lines, canonical_set, failures: Vec::new(), oversize: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.molecules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.molecules.is_empty()
    }
}

/// Loads one SMILES per line. Per-line failures are recorded, not fatal;
/// a file that yields no molecule at all is an error.
pub fn load_dataset(path: impl AsRef<Path>, max_atoms: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let lines: Vec<&str> = text.lines().collect();
    let ds = Dataset::from_lines(&lines, max_atoms);
    if ds.is_empty() {
        return Err(Error::NoMolecules(path.display().to_string()));
    }
    Ok(ds)
}
