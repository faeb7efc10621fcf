//! Permutation-invariant reconstruction losses for molecular graphs.
//!
//! Molecules are encoded quasi-fully-connected: one row per atom and one row
//! per unordered atom pair, with "no bond" as an explicit pair category.
//! Comparing a target with a probabilistic reconstruction needs an atom
//! correspondence; [`matching`] finds the optimal one (and the k best) by
//! branch and bound, [`losses`] builds the matched loss and matching-free
//! baselines on top of it, and [`experiment`] fits a toy decoder under each
//! strategy. [`smiles_io`] and [`metrics`] cover ingestion and the
//! validity, uniqueness and novelty scores for generated sets.

pub mod error;
pub mod experiment;
pub mod generate;
pub mod graph;
pub mod losses;
pub mod matching;
pub mod metrics;
pub mod smiles_io;

pub use error::{Error, Result, SmilesError, SmilesErrorKind};
pub use experiment::{fit, run_comparison, FitConfig, LossCurve, Strategy, ToyDecoder};
pub use graph::{
    discretize, graph_equal, to_feature_matrix, AtomType, BondType, FeatureMatrix, MolecularGraph,
    ProbabilisticGraph, RowKind,
};
pub use losses::{
    embedding_loss, kl_to_standard_normal, no_matching_loss, rec_loss, statistics_loss, LatentStats, LossValue,
};
pub use matching::{
    induced_node_permutation, matched_cost, optimal_match, sample_top_k, top_k, AtomPermutation, MatchResult,
    Matcher, TopKResult,
};
pub use metrics::{canonical_form, evaluate, is_valid, CanonicalForm, GenerationReport, InvalidReason};
pub use smiles_io::{load_dataset, parse_smiles, write_smiles, Dataset};
