//! SMILES subset reader and writer, and line-oriented dataset loading.
//!
//! Supported: organic atoms `C N O F`, aromatic `c n o`, bracket forms of
//! those with an optional hydrogen count (`[nH]`), bonds `- = # :`, branches
//! and ring closures `1`-`9` and `%nn`. Charges, isotopes, stereo and
//! disconnected components (`.`) are rejected.

mod dataset;
mod parse;
mod token;
mod write;

pub use dataset::{load_dataset, Dataset, LineFailure, DEFAULT_MAX_ATOMS};
pub use parse::parse_smiles;
pub use token::{tokenize, SmilesToken, TokenKind};
pub use write::write_smiles;
