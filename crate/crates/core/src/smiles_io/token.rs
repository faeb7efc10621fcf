use crate::error::{SmilesError, SmilesErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    AtomOrganic,
    AtomBracket,
    BondSymbol,
    RingDigit,
    BranchOpen,
    BranchClose,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmilesToken {
    pub kind: TokenKind,
    /// Source text of the token; bracket atoms exclude the brackets.
    pub payload: String,
    /// 0-based character offset of the token's first character.
    pub position: usize,
}

fn err(kind: SmilesErrorKind, position: usize) -> SmilesError {
    SmilesError::new(kind, position)
}

/// Splits a SMILES string into tokens. Atom symbols outside the supported
/// subset are rejected here, with their position.
pub fn tokenize(text: &str) -> Result<Vec<SmilesToken>, SmilesError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let push = |tokens: &mut Vec<SmilesToken>, kind, payload: String, position| {
        tokens.push(SmilesToken { kind, payload, position })
    };
    while i < chars.len() {
        let c = chars[i];
        match c {
            'C' | 'N' | 'O' | 'F' => {
                // Two-letter organic symbols we do not support (Cl, Br, ...).
                if c == 'C' && chars.get(i + 1) == Some(&'l') {
                    return Err(err(SmilesErrorKind::UnknownAtom("Cl".into()), i));
                }
                push(&mut tokens, TokenKind::AtomOrganic, c.to_string(), i);
                i += 1;
            }
            'c' | 'n' | 'o' => {
                push(&mut tokens, TokenKind::AtomOrganic, c.to_string(), i);
                i += 1;
            }
            '[' => {
                let close = chars[i + 1..]
                    .iter()
                    .position(|&ch| ch == ']')
                    .ok_or_else(|| err(SmilesErrorKind::UnclosedBracket, i))?;
                let inner: String = chars[i + 1..i + 1 + close].iter().collect();
                push(&mut tokens, TokenKind::AtomBracket, inner, i);
                i += close + 2;
            }
            '-' | '=' | '#' | ':' => {
                push(&mut tokens, TokenKind::BondSymbol, c.to_string(), i);
                i += 1;
            }
            '0'..='9' => {
                push(&mut tokens, TokenKind::RingDigit, c.to_string(), i);
                i += 1;
            }
            '%' => {
                let d1 = chars.get(i + 1).filter(|ch| ch.is_ascii_digit());
                let d2 = chars.get(i + 2).filter(|ch| ch.is_ascii_digit());
                match (d1, d2) {
                    (Some(a), Some(b)) => {
                        push(&mut tokens, TokenKind::RingDigit, format!("{a}{b}"), i);
                        i += 3;
                    }
                    _ => return Err(err(SmilesErrorKind::UnexpectedToken("%".into()), i)),
                }
            }
            '(' => {
                push(&mut tokens, TokenKind::BranchOpen, "(".into(), i);
                i += 1;
            }
            ')' => {
                push(&mut tokens, TokenKind::BranchClose, ")".into(), i);
                i += 1;
            }
            '.' => return Err(err(SmilesErrorKind::DisconnectedComponent, i)),
            c if c.is_ascii_alphabetic() || c == '*' => {
                let mut sym = c.to_string();
                if let Some(&next) = chars.get(i + 1) {
                    if c.is_ascii_uppercase() && next.is_ascii_lowercase() && !matches!(next, 'c' | 'n' | 'o') {
                        sym.push(next);
                    }
                }
                return Err(err(SmilesErrorKind::UnknownAtom(sym), i));
            }
            other => return Err(err(SmilesErrorKind::UnexpectedToken(other.to_string()), i)),
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<TokenKind> {
        tokenize(s).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn basic_stream() {
        use TokenKind::*;
        assert_eq!(
            kinds("C1=CC(O)N1"),
            vec![AtomOrganic, RingDigit, BondSymbol, AtomOrganic, AtomOrganic, BranchOpen, AtomOrganic, BranchClose, AtomOrganic, RingDigit]
        );
        let toks = tokenize("c1cc[nH]c1%12").unwrap();
        assert_eq!(toks[4].payload, "nH");
        assert_eq!(toks.last().unwrap().payload, "12");
        assert!(toks.windows(2).all(|w| w[0].position < w[1].position));
    }

    #[test]
    fn rejects_unknown_symbols() {
        assert_eq!(tokenize("CCl").unwrap_err().kind, SmilesErrorKind::UnknownAtom("Cl".into()));
        assert_eq!(tokenize("CCS").unwrap_err().position, 2);
        assert_eq!(tokenize("Br").unwrap_err().kind, SmilesErrorKind::UnknownAtom("Br".into()));
        assert_eq!(tokenize("C.C").unwrap_err().kind, SmilesErrorKind::DisconnectedComponent);
        assert_eq!(tokenize("C[N").unwrap_err().kind, SmilesErrorKind::UnclosedBracket);
    }
}
