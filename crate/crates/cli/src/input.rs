use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use molmatch::graph::{to_feature_matrix, FeatureMatrix, MolecularGraph, ProbabilisticGraph};
use molmatch::parse_smiles;

/// A molecule given on the command line: SMILES text, or a path to a JSON
/// file holding the feature matrix as an array of 6-element rows.
pub enum Molecule {
    Graph(MolecularGraph),
    Matrix(FeatureMatrix),
}

impl Molecule {
    pub fn resolve(arg: &str) -> Result<Self> {
        let path = Path::new(arg);
        if path.extension().is_some_and(|e| e == "json") {
            let text = fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
            let rows: Vec<Vec<f64>> =
                serde_json::from_str(&text).with_context(|| format!("{arg}: expected a JSON array of rows"))?;
            let m = FeatureMatrix::from_row_vecs(&rows).with_context(|| format!("{arg}: not a feature matrix"))?;
            return Ok(Self::Matrix(m));
        }
        let g = parse_smiles(arg).with_context(|| format!("parsing SMILES '{arg}'"))?;
        Ok(Self::Graph(g))
    }

    pub fn features(&self) -> FeatureMatrix {
        match self {
            Self::Graph(g) => to_feature_matrix(g),
            Self::Matrix(m) => m.clone(),
        }
    }

    /// The discrete graph, needed by losses defined on graphs.
    pub fn graph(&self) -> Result<&MolecularGraph> {
        match self {
            Self::Graph(g) => Ok(g),
            Self::Matrix(_) => bail!("this loss needs a discrete target; give it as SMILES"),
        }
    }

    pub fn probabilistic(&self) -> Result<ProbabilisticGraph> {
        match self {
            Self::Graph(g) => Ok(ProbabilisticGraph::from_graph(g)),
            Self::Matrix(m) => Ok(ProbabilisticGraph::new(m.clone())?),
        }
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
pub fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}
