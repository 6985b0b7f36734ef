//! Line-oriented text DSL for reaction networks.
//!
//! ```text
//! # comment
//! X1 + 2 X2 <-> X3 ; kf = 1, kr = 1
//! X3 -> X4 ; k = 0.5
//! ```
//!
//! One statement per line: either a `#` comment or a reaction. Reversible
//! arrows expand to two reactions. Species are collected in order of first
//! appearance; complexes with identical integer coefficients are shared.
//! Parallel reactions (same substrate and product) are kept as written and
//! reported in a warning, since their rate constants add only at the
//! Laplacian level.

use std::collections::HashMap;

use thiserror::Error;

use crate::network::{NetworkError, ReactionNetwork};

/// Non-fatal findings emitted during parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

/// A parsed network plus any warnings.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub network: ReactionNetwork,
    pub warnings: Vec<ParseWarning>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: rate constant {value} is not positive")]
    NonpositiveRate { line: usize, value: f64 },
    #[error("line {line}: missing rate constant")]
    MissingRate { line: usize },
    #[error("line {line}: empty complex")]
    EmptyComplex { line: usize },
    #[error("invalid network: {0}")]
    Invalid(#[from] NetworkError),
}

/// Parse DSL source into a validated [`ReactionNetwork`].
pub fn parse_network(text: &str) -> Result<Parsed, ParseError> {
    let mut state = Builder::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        state.reaction_line(raw, line_no)?;
    }

    let m = state.species.len();
    let columns: Vec<Vec<i64>> = state
        .complexes
        .iter()
        .map(|coeffs| {
            let mut col = vec![0_i64; m];
            for (&s, &a) in coeffs {
                col[s] = a;
            }
            col
        })
        .collect();
    let network = ReactionNetwork::new(state.species, columns, state.reactions)?;
    Ok(Parsed {
        network,
        warnings: state.warnings,
    })
}

#[derive(Default)]
struct Builder {
    species: Vec<String>,
    species_index: HashMap<String, usize>,
    /// Sparse coefficient maps; padded to full columns at the end.
    complexes: Vec<HashMap<usize, i64>>,
    reactions: Vec<(usize, usize, f64)>,
    warnings: Vec<ParseWarning>,
}

impl Builder {
    fn reaction_line(&mut self, raw: &str, line: usize) -> Result<(), ParseError> {
        let semi = raw.find(';').ok_or_else(|| ParseError::Syntax {
            line,
            column: raw.len() + 1,
            message: "expected ';' before the rate constants".into(),
        })?;
        let (head, rates_raw) = (&raw[..semi], &raw[semi + 1..]);

        let (arrow_pos, arrow_len, reversible) = match head.find("<->") {
            Some(p) => (p, 3, true),
            None => match head.find("->") {
                Some(p) => (p, 2, false),
                None => {
                    return Err(ParseError::Syntax {
                        line,
                        column: 1,
                        message: "expected '->' or '<->'".into(),
                    })
                }
            },
        };

        let lhs = self.complex(&head[..arrow_pos], 0, line)?;
        let rhs = self.complex(&head[arrow_pos + arrow_len..], arrow_pos + arrow_len, line)?;
        if lhs == rhs {
            return Err(ParseError::Syntax {
                line,
                column: arrow_pos + 1,
                message: "substrate and product complexes coincide".into(),
            });
        }

        let rates_col = semi + 1;
        if reversible {
            let (kf, kr) = self.reversible_rates(rates_raw, rates_col, line)?;
            self.push_reaction(lhs, rhs, kf, line);
            self.push_reaction(rhs, lhs, kr, line);
        } else {
            let k = self.single_rate(rates_raw, rates_col, line)?;
            self.push_reaction(lhs, rhs, k, line);
        }
        Ok(())
    }

    fn push_reaction(&mut self, substrate: usize, product: usize, k: f64, line: usize) {
        if self
            .reactions
            .iter()
            .any(|&(s, p, _)| s == substrate && p == product)
        {
            self.warnings.push(ParseWarning {
                line,
                message: format!(
                    "duplicate reaction between complexes {substrate} and {product}: \
                     rate constants are summed in the Laplacian"
                ),
            });
        }
        self.reactions.push((substrate, product, k));
    }

    /// Parse `term (+ term)*` into a complex index, creating it if new.
    fn complex(&mut self, text: &str, offset: usize, line: usize) -> Result<usize, ParseError> {
        let mut coeffs: HashMap<usize, i64> = HashMap::new();
        let mut pos = 0;
        for piece in text.split('+') {
            let (species, count) = self.term(piece, offset + pos, line)?;
            *coeffs.entry(species).or_insert(0) += count;
            pos += piece.len() + 1;
        }
        coeffs.retain(|_, v| *v != 0);
        if coeffs.is_empty() {
            return Err(ParseError::EmptyComplex { line });
        }
        if let Some(found) = self.complexes.iter().position(|c| *c == coeffs) {
            return Ok(found);
        }
        self.complexes.push(coeffs);
        Ok(self.complexes.len() - 1)
    }

    /// Parse `[integer] name`, default coefficient 1.
    fn term(&mut self, piece: &str, offset: usize, line: usize) -> Result<(usize, i64), ParseError> {
        let lead_ws = piece.len() - piece.trim_start().len();
        let body = piece.trim();
        let column = offset + lead_ws + 1;
        if body.is_empty() {
            return Err(ParseError::Syntax {
                line,
                column,
                message: "empty term in complex".into(),
            });
        }
        let digits: String = body.chars().take_while(|ch| ch.is_ascii_digit()).collect();
        let rest = body[digits.len()..].trim_start();
        let count: i64 = if digits.is_empty() {
            1
        } else {
            digits.parse().map_err(|_| ParseError::Syntax {
                line,
                column,
                message: format!("invalid coefficient `{digits}`"),
            })?
        };
        let mut chars = rest.chars();
        let valid = match chars.next() {
            Some(ch) if ch.is_ascii_alphabetic() || ch == '_' => {
                chars.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
            }
            _ => false,
        };
        if !valid {
            return Err(ParseError::Syntax {
                line,
                column: column + digits.len(),
                message: format!("invalid species name `{rest}`"),
            });
        }
        let idx = match self.species_index.get(rest) {
            Some(&i) => i,
            None => {
                let i = self.species.len();
                self.species.push(rest.to_string());
                self.species_index.insert(rest.to_string(), i);
                i
            }
        };
        Ok((idx, count))
    }

    fn single_rate(&self, text: &str, offset: usize, line: usize) -> Result<f64, ParseError> {
        let mut it = assignments(text, offset);
        let (key, value, col) = it.next().ok_or(ParseError::MissingRate { line })?;
        if key != "k" {
            return Err(ParseError::Syntax {
                line,
                column: col,
                message: format!("expected `k = <float>`, found `{key}`"),
            });
        }
        if let Some((extra, _, col)) = it.next() {
            return Err(ParseError::Syntax {
                line,
                column: col,
                message: format!("unexpected extra rate `{extra}` after `k`"),
            });
        }
        self.rate_value(value, line, col)
    }

    fn reversible_rates(
        &self,
        text: &str,
        offset: usize,
        line: usize,
    ) -> Result<(f64, f64), ParseError> {
        let mut it = assignments(text, offset);
        let (k1, v1, c1) = it.next().ok_or(ParseError::MissingRate { line })?;
        let (k2, v2, c2) = it.next().ok_or(ParseError::MissingRate { line })?;
        if k1 != "kf" || k2 != "kr" {
            return Err(ParseError::Syntax {
                line,
                column: c1,
                message: "reversible reactions take `kf = <float>, kr = <float>`".into(),
            });
        }
        if let Some((extra, _, col)) = it.next() {
            return Err(ParseError::Syntax {
                line,
                column: col,
                message: format!("unexpected extra rate `{extra}` after `kr`"),
            });
        }
        Ok((self.rate_value(v1, line, c1)?, self.rate_value(v2, line, c2)?))
    }

    fn rate_value(&self, value: &str, line: usize, column: usize) -> Result<f64, ParseError> {
        if value.is_empty() {
            return Err(ParseError::MissingRate { line });
        }
        let v: f64 = value.parse().map_err(|_| ParseError::Syntax {
            line,
            column,
            message: format!("invalid rate constant `{value}`"),
        })?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(ParseError::NonpositiveRate { line, value: v });
        }
        Ok(v)
    }
}

/// Split `name = value , name = value ...` keeping 1-based source columns.
fn assignments<'a>(
    text: &'a str,
    offset: usize,
) -> impl Iterator<Item = (&'a str, &'a str, usize)> + 'a {
    let mut pos = 0;
    text.split(',').filter_map(move |piece| {
        let col = offset + pos + 1;
        pos += piece.len() + 1;
        let body = piece.trim();
        if body.is_empty() {
            return None;
        }
        match body.split_once('=') {
            Some((k, v)) => Some((k.trim(), v.trim(), col)),
            None => Some((body, "", col)),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_reversible_pair() {
        let parsed = parse_network("A -> B ; k = 1\nB -> A ; k = 1").unwrap();
        let net = parsed.network;
        assert_eq!(net.species_count(), 2);
        assert_eq!(net.complex_count(), 2);
        assert_eq!(net.reaction_count(), 2);
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn parses_branched_network_with_shared_complexes() {
        let text = "X1 + 2 X2 <-> X3 ; kf=1, kr=1\n\
                    X3 -> 2 X1 + X2 ; k=1\n\
                    2 X1 + X2 -> X4 ; k=1\n\
                    X3 -> X4 ; k=1";
        let net = parse_network(text).unwrap().network;
        assert_eq!(net.species_count(), 4);
        assert_eq!(net.complex_count(), 4);
        assert_eq!(net.reaction_count(), 5);
        assert_eq!(net.complex_name(0), "X1+2X2");
        assert_eq!(net.complex_name(2), "2X1+X2");
    }

    #[test]
    fn rejects_zero_rate() {
        let err = parse_network("A -> B ; k = 0").unwrap_err();
        assert!(matches!(
            err,
            ParseError::NonpositiveRate { line: 1, value } if value == 0.0
        ));
    }

    #[test]
    fn rejects_negative_rate_on_reversible() {
        let err = parse_network("A <-> B ; kf = 1, kr = -2").unwrap_err();
        assert!(matches!(err, ParseError::NonpositiveRate { line: 1, .. }));
    }

    #[test]
    fn reports_missing_rate() {
        assert!(matches!(
            parse_network("A -> B ;").unwrap_err(),
            ParseError::MissingRate { line: 1 }
        ));
        assert!(matches!(
            parse_network("A -> B ; k =").unwrap_err(),
            ParseError::MissingRate { line: 1 }
        ));
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = parse_network("A -> B ; k = 1\nA = B ; k = 1").unwrap_err();
        match err {
            ParseError::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 1);
            }
            other => panic!("unexpected error: {other:?}"),
        }
        let err = parse_network("A -> 3 ; k = 1").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 1, .. }));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# a two-state toggle\n\n  # indented comment\nA -> B ; k = 2\nB -> A ; k = 3\n";
        let net = parse_network(text).unwrap().network;
        assert_eq!(net.reaction_count(), 2);
    }

    #[test]
    fn duplicate_reactions_are_kept_and_flagged() {
        let parsed = parse_network("A -> B ; k = 1\nA -> B ; k = 2\nB -> A ; k = 1").unwrap();
        assert_eq!(parsed.network.reaction_count(), 3);
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].line, 2);
    }

    #[test]
    fn coefficient_variants_parse_identically() {
        let a = parse_network("2X1 + X2 -> X3 ; k = 1\nX3 -> 2X1 + X2 ; k = 1")
            .unwrap()
            .network;
        let b = parse_network("2 X1 + X2 -> X3 ; k = 1\nX3 -> 2 X1 + X2 ; k = 1")
            .unwrap()
            .network;
        assert_eq!(a, b);
    }

    #[test]
    fn repeated_species_in_a_complex_accumulate() {
        let net = parse_network("X + X -> Y ; k = 1\nY -> 2 X ; k = 1")
            .unwrap()
            .network;
        // X + X and 2X are the same complex
        assert_eq!(net.complex_count(), 2);
        assert_eq!(net.complex_name(0), "2X");
    }

    #[test]
    fn rejects_self_reaction() {
        let err = parse_network("A + B -> B + A ; k = 1").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 1, .. }));
    }

    #[test]
    fn scientific_notation_rates() {
        let net = parse_network("A -> B ; k = 2.5e-3\nB -> A ; k = 1e2")
            .unwrap()
            .network;
        assert_eq!(net.reactions()[0].rate_constant, 2.5e-3);
        assert_eq!(net.reactions()[1].rate_constant, 100.0);
    }
}
