//! Recursive-descent parser for the heavy-atom SMILES subset.
//!
//! ```text
//! smiles := atom tail*
//! tail   := bond? atom | bond? ring | '(' bond? atom tail* ')'
//! ```

use std::collections::{BTreeMap, HashMap};

use super::token::{tokenize, SmilesToken, TokenKind};
use crate::error::{SmilesError, SmilesErrorKind};
use crate::graph::{AtomType, BondType, MolecularGraph};

#[derive(Debug, Clone, Copy)]
struct ParsedAtom {
    atom: AtomType,
    aromatic: bool,
}

fn atom_from_symbol(sym: &str) -> Option<ParsedAtom> {
    let (atom, aromatic) = match sym {
        "C" => (AtomType::C, false),
        "N" => (AtomType::N, false),
        "O" => (AtomType::O, false),
        "F" => (AtomType::F, false),
        "c" => (AtomType::C, true),
        "n" => (AtomType::N, true),
        "o" => (AtomType::O, true),
        _ => return None,
    };
    Some(ParsedAtom { atom, aromatic })
}

/// Bracket atoms may carry an implicit-hydrogen count, which is dropped.
fn bracket_atom(inner: &str) -> Option<ParsedAtom> {
    let (sym, rest) = inner.split_at(inner.chars().next().map_or(0, char::len_utf8));
    let atom = atom_from_symbol(sym)?;
    let ok = match rest.strip_prefix('H') {
        None => rest.is_empty(),
        Some(count) => count.is_empty() || (count.len() == 1 && count.as_bytes()[0].is_ascii_digit()),
    };
    ok.then_some(atom)
}

fn bond_from_symbol(sym: &str) -> BondType {
    match sym {
        "-" => BondType::Single,
        "=" => BondType::Double,
        "#" => BondType::Triple,
        ":" => BondType::Aromatic,
        _ => unreachable!("tokenizer only emits known bond symbols"),
    }
}

struct OpenRing {
    atom: usize,
    bond: Option<BondType>,
    position: usize,
}

struct Parser {
    tokens: Vec<SmilesToken>,
    pos: usize,
    atoms: Vec<ParsedAtom>,
    bonds: HashMap<(usize, usize), BondType>,
    rings: BTreeMap<u32, OpenRing>,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&SmilesToken> {
        self.tokens.get(self.pos)
    }

    fn error(&self, kind: SmilesErrorKind, position: usize) -> SmilesError {
        SmilesError::new(kind, position)
    }

    fn unexpected(&self, tok: &SmilesToken) -> SmilesError {
        self.error(SmilesErrorKind::UnexpectedToken(tok.payload.clone()), tok.position)
    }

    fn implicit_bond(&self, a: usize, b: usize) -> BondType {
        if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondType::Aromatic
        } else {
            BondType::Single
        }
    }

    fn add_bond(&mut self, a: usize, b: usize, bond: Option<BondType>, position: usize) -> Result<(), SmilesError> {
        if a == b {
            return Err(self.error(SmilesErrorKind::SelfBond, position));
        }
        let bond = bond.unwrap_or_else(|| self.implicit_bond(a, b));
        let key = (a.min(b), a.max(b));
        if self.bonds.insert(key, bond).is_some() {
            return Err(self.error(SmilesErrorKind::DuplicateBond, position));
        }
        Ok(())
    }

    fn read_atom(&mut self, tok: &SmilesToken) -> Result<usize, SmilesError> {
        let parsed = match tok.kind {
            TokenKind::AtomOrganic => atom_from_symbol(&tok.payload)
                .ok_or_else(|| self.error(SmilesErrorKind::UnknownAtom(tok.payload.clone()), tok.position))?,
            TokenKind::AtomBracket => bracket_atom(&tok.payload).ok_or_else(|| {
                self.error(SmilesErrorKind::UnsupportedBracketAtom(tok.payload.clone()), tok.position)
            })?,
            _ => return Err(self.unexpected(tok)),
        };
        self.atoms.push(parsed);
        Ok(self.atoms.len() - 1)
    }

    fn ring(&mut self, tok: &SmilesToken, current: usize, bond: Option<BondType>) -> Result<(), SmilesError> {
        let digit: u32 = tok.payload.parse().expect("tokenizer emits digits");
        match self.rings.remove(&digit) {
            Some(open) => {
                let bond = match (open.bond, bond) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(self.error(SmilesErrorKind::ConflictingRingBond(digit), tok.position))
                    }
                    (a, b) => a.or(b),
                };
                self.add_bond(open.atom, current, bond, tok.position)
            }
            None => {
                self.rings.insert(digit, OpenRing { atom: current, bond, position: tok.position });
                Ok(())
            }
        }
    }

    /// Parses atoms, bonds, rings and branches following `prev`. In a branch,
    /// returns at the closing parenthesis without consuming it.
    fn chain(&mut self, mut prev: Option<usize>, in_branch: bool) -> Result<usize, SmilesError> {
        let mut pending: Option<(BondType, usize)> = None;
        let mut atoms_read = 0;
        while let Some(tok) = self.peek().cloned() {
            match tok.kind {
                TokenKind::BondSymbol => {
                    if pending.is_some() || prev.is_none() {
                        return Err(self.unexpected(&tok));
                    }
                    pending = Some((bond_from_symbol(&tok.payload), tok.position));
                    self.pos += 1;
                }
                TokenKind::AtomOrganic | TokenKind::AtomBracket => {
                    self.pos += 1;
                    let idx = self.read_atom(&tok)?;
                    if let Some(p) = prev {
                        self.add_bond(p, idx, pending.take().map(|b| b.0), tok.position)?;
                    }
                    prev = Some(idx);
                    atoms_read += 1;
                }
                TokenKind::RingDigit => {
                    let current = match prev {
                        Some(p) if !(in_branch && atoms_read == 0) => p,
                        _ => return Err(self.unexpected(&tok)),
                    };
                    self.pos += 1;
                    self.ring(&tok, current, pending.take().map(|b| b.0))?;
                }
                TokenKind::BranchOpen => {
                    let from = match prev {
                        Some(p) if pending.is_none() && !(in_branch && atoms_read == 0) => p,
                        _ => return Err(self.unexpected(&tok)),
                    };
                    self.pos += 1;
                    let read = self.chain(Some(from), true)?;
                    match self.peek() {
                        Some(close) if close.kind == TokenKind::BranchClose => {
                            if read == 0 {
                                return Err(self.unexpected(&close.clone()));
                            }
                            self.pos += 1;
                        }
                        _ => return Err(self.error(SmilesErrorKind::UnclosedBranch, tok.position)),
                    }
                }
                TokenKind::BranchClose => {
                    if !in_branch {
                        return Err(self.error(SmilesErrorKind::UnmatchedBranchClose, tok.position));
                    }
                    if let Some((_, at)) = pending {
                        return Err(self.error(SmilesErrorKind::UnexpectedToken(")".into()), at.max(tok.position)));
                    }
                    return Ok(atoms_read);
                }
            }
        }
        if let Some((_, at)) = pending {
            return Err(self.error(SmilesErrorKind::BondAtEnd, at));
        }
        if !in_branch && atoms_read == 0 {
            return Err(self.error(SmilesErrorKind::EmptyInput, self.end));
        }
        Ok(atoms_read)
    }
}

/// Parses a single connected molecule of the supported subset. Surrounding
/// whitespace is ignored; error positions index the original text.
pub fn parse_smiles(text: &str) -> Result<MolecularGraph, SmilesError> {
    let lead = text.chars().take_while(|c| c.is_whitespace()).count();
    parse_trimmed(text.trim()).map_err(|e| SmilesError::new(e.kind, e.position + lead))
}

fn parse_trimmed(text: &str) -> Result<MolecularGraph, SmilesError> {
    let tokens = tokenize(text)?;
    let Some(first) = tokens.first() else {
        return Err(SmilesError::new(SmilesErrorKind::EmptyInput, 0));
    };
    if !matches!(first.kind, TokenKind::AtomOrganic | TokenKind::AtomBracket) {
        return Err(SmilesError::new(SmilesErrorKind::UnexpectedToken(first.payload.clone()), first.position));
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        atoms: Vec::new(),
        bonds: HashMap::new(),
        rings: BTreeMap::new(),
        end: text.chars().count(),
    };
    parser.chain(None, false)?;
    if let Some(open) = parser.rings.iter().min_by_key(|(_, r)| r.position) {
        return Err(SmilesError::new(SmilesErrorKind::UnmatchedRingDigit(*open.0), open.1.position));
    }
    let atoms = parser.atoms.iter().map(|a| a.atom).collect();
    let mut g = MolecularGraph::new(atoms).expect("at least one atom was parsed");
    for (&(a, b), &bond) in &parser.bonds {
        g.set_bond(a, b, bond);
    }
    Ok(g)
}
