//! Reaction-network data model: species, complexes, reactions.
//!
//! A network is a list of species, a list of distinct complexes (the
//! columns of the m×c matrix Z), and a list of directed reactions between
//! complexes with positive rate constants. Networks are closed: every
//! complex combines at least one species, and there is no inflow/outflow.
//! All types are immutable after construction.

use nalgebra::DMatrix;
use thiserror::Error;

/// A chemical species, identified by name and dense 0-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Species {
    pub index: usize,
    pub name: String,
}

/// A complex: a formal nonnegative-integer combination of species.
/// One column of the complex-composition matrix Z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Complex {
    coefficients: Vec<i64>,
}

impl Complex {
    /// Species coefficients in global species order.
    pub fn coefficients(&self) -> &[i64] {
        &self.coefficients
    }

    /// Total molecularity (sum of coefficients).
    pub fn order(&self) -> i64 {
        self.coefficients.iter().sum()
    }
}

/// A directed reaction between two complexes with mass-action rate constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    /// Substrate complex index.
    pub substrate: usize,
    /// Product complex index.
    pub product: usize,
    /// Positive rate constant (units 1/time · concentration^(1−order)).
    pub rate_constant: f64,
}

/// Validation failures when assembling a [`ReactionNetwork`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("species name may not be empty")]
    EmptySpeciesName,
    #[error("duplicate species name `{0}`")]
    DuplicateSpecies(String),
    #[error("complex {0} is empty (all coefficients zero)")]
    EmptyComplex(usize),
    #[error("complex {0} has a negative coefficient")]
    NegativeCoefficient(usize),
    #[error("complex {0} has wrong length {got}, expected {expected}", got = .1, expected = .2)]
    BadComplexLength(usize, usize, usize),
    #[error("complexes {0} and {1} are identical")]
    DuplicateComplex(usize, usize),
    #[error("reaction {0}: complex index out of range")]
    BadComplexIndex(usize),
    #[error("reaction {0}: substrate and product coincide")]
    SelfLoop(usize),
    #[error("reaction {0}: rate constant {1} is not positive")]
    NonpositiveRate(usize, f64),
    #[error("complex {0} does not appear in any reaction")]
    UnusedComplex(usize),
    #[error("network has no reactions")]
    NoReactions,
}

/// A closed mass-action reaction network.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<Species>,
    complexes: Vec<Complex>,
    reactions: Vec<Reaction>,
}

impl ReactionNetwork {
    /// Build and validate a network.
    ///
    /// `complexes` holds one coefficient column per complex, each of length
    /// `species_names.len()`; `reactions` are `(substrate, product, k)`
    /// triples over complex indices.
    pub fn new(
        species_names: Vec<String>,
        complexes: Vec<Vec<i64>>,
        reactions: Vec<(usize, usize, f64)>,
    ) -> Result<Self, NetworkError> {
        let m = species_names.len();
        let mut species = Vec::with_capacity(m);
        for (index, name) in species_names.into_iter().enumerate() {
            if name.is_empty() {
                return Err(NetworkError::EmptySpeciesName);
            }
            if species.iter().any(|s: &Species| s.name == name) {
                return Err(NetworkError::DuplicateSpecies(name));
            }
            species.push(Species { index, name });
        }

        let mut cols = Vec::with_capacity(complexes.len());
        for (i, coefficients) in complexes.into_iter().enumerate() {
            if coefficients.len() != m {
                return Err(NetworkError::BadComplexLength(i, coefficients.len(), m));
            }
            if coefficients.iter().any(|&a| a < 0) {
                return Err(NetworkError::NegativeCoefficient(i));
            }
            if coefficients.iter().all(|&a| a == 0) {
                return Err(NetworkError::EmptyComplex(i));
            }
            cols.push(Complex { coefficients });
        }
        for i in 0..cols.len() {
            for j in (i + 1)..cols.len() {
                if cols[i] == cols[j] {
                    return Err(NetworkError::DuplicateComplex(i, j));
                }
            }
        }

        if reactions.is_empty() {
            return Err(NetworkError::NoReactions);
        }
        let c = cols.len();
        let mut used = vec![false; c];
        let mut rxns = Vec::with_capacity(reactions.len());
        for (j, (substrate, product, rate_constant)) in reactions.into_iter().enumerate() {
            if substrate >= c || product >= c {
                return Err(NetworkError::BadComplexIndex(j));
            }
            if substrate == product {
                return Err(NetworkError::SelfLoop(j));
            }
            if !(rate_constant > 0.0) || !rate_constant.is_finite() {
                return Err(NetworkError::NonpositiveRate(j, rate_constant));
            }
            used[substrate] = true;
            used[product] = true;
            rxns.push(Reaction {
                substrate,
                product,
                rate_constant,
            });
        }
        if let Some(idx) = used.iter().position(|&u| !u) {
            return Err(NetworkError::UnusedComplex(idx));
        }

        Ok(Self {
            species,
            complexes: cols,
            reactions: rxns,
        })
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn complexes(&self) -> &[Complex] {
        &self.complexes
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    /// Number of species m.
    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    /// Number of complexes c.
    pub fn complex_count(&self) -> usize {
        self.complexes.len()
    }

    /// Number of reactions r.
    pub fn reaction_count(&self) -> usize {
        self.reactions.len()
    }

    /// The m×c complex-composition matrix Z as integers.
    pub fn complex_matrix(&self) -> DMatrix<i64> {
        let (m, c) = (self.species_count(), self.complex_count());
        DMatrix::from_fn(m, c, |i, j| self.complexes[j].coefficients[i])
    }

    /// Z cast to f64 for numerical work.
    pub fn complex_matrix_f64(&self) -> DMatrix<f64> {
        self.complex_matrix().map(|a| a as f64)
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    /// Canonical display name of a complex: species-order terms joined by
    /// '+', unit coefficients omitted, e.g. `T+M` or `2X1+X2`.
    pub fn complex_name(&self, index: usize) -> String {
        canonical_complex_name(self.complexes[index].coefficients(), &self.species)
    }

    /// Find a complex by canonical name (whitespace-insensitive).
    pub fn complex_index_by_name(&self, name: &str) -> Option<usize> {
        let target: String = name.chars().filter(|ch| !ch.is_whitespace()).collect();
        (0..self.complex_count()).position(|i| self.complex_name(i) == target)
    }

    /// Serialize back to the text DSL, one reaction per line.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for rxn in &self.reactions {
            out.push_str(&format!(
                "{} -> {} ; k = {:e}\n",
                self.complex_name(rxn.substrate),
                self.complex_name(rxn.product),
                rxn.rate_constant,
            ));
        }
        out
    }
}

/// Canonical complex name from raw coefficients and a species table.
pub fn canonical_complex_name(coefficients: &[i64], species: &[Species]) -> String {
    let mut parts = Vec::new();
    for (i, &a) in coefficients.iter().enumerate() {
        if a == 0 {
            continue;
        }
        if a == 1 {
            parts.push(species[i].name.clone());
        } else {
            parts.push(format!("{}{}", a, species[i].name));
        }
    }
    parts.join("+")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> ReactionNetwork {
        ReactionNetwork::new(
            vec!["A".into(), "B".into()],
            vec![vec![1, 0], vec![0, 1]],
            vec![(0, 1, 1.0), (1, 0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn counts_and_matrix() {
        let net = ab();
        assert_eq!(net.species_count(), 2);
        assert_eq!(net.complex_count(), 2);
        assert_eq!(net.reaction_count(), 2);
        assert_eq!(net.complex_matrix(), DMatrix::from_row_slice(2, 2, &[1, 0, 0, 1]));
    }

    #[test]
    fn canonical_names() {
        let net = ReactionNetwork::new(
            vec!["X1".into(), "X2".into(), "X3".into(), "X4".into()],
            vec![vec![1, 2, 0, 0], vec![0, 0, 1, 0], vec![2, 1, 0, 0], vec![0, 0, 0, 1]],
            vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)],
        )
        .unwrap();
        assert_eq!(net.complex_name(0), "X1+2X2");
        assert_eq!(net.complex_name(2), "2X1+X2");
        assert_eq!(net.complex_name(3), "X4");
        assert_eq!(net.complex_index_by_name("2X1+X2"), Some(2));
        assert_eq!(net.complex_index_by_name("2X1 + X2"), Some(2));
        assert_eq!(net.complex_index_by_name("X9"), None);
    }

    #[test]
    fn rejects_invalid_networks() {
        // empty complex
        let err = ReactionNetwork::new(
            vec!["A".into()],
            vec![vec![1], vec![0]],
            vec![(0, 1, 1.0)],
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::EmptyComplex(1)));

        // duplicate complexes
        let err = ReactionNetwork::new(
            vec!["A".into()],
            vec![vec![1], vec![1]],
            vec![(0, 1, 1.0)],
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::DuplicateComplex(0, 1)));

        // nonpositive rate
        let err = ReactionNetwork::new(
            vec!["A".into(), "B".into()],
            vec![vec![1, 0], vec![0, 1]],
            vec![(0, 1, 0.0)],
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::NonpositiveRate(0, _)));

        // self loop
        let err = ReactionNetwork::new(
            vec!["A".into(), "B".into()],
            vec![vec![1, 0], vec![0, 1]],
            vec![(0, 0, 1.0)],
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::SelfLoop(0)));

        // unused complex
        let err = ReactionNetwork::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            vec![(0, 1, 1.0)],
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::UnusedComplex(2)));
    }

    #[test]
    fn dsl_serialization_is_reparseable() {
        let net = ab();
        let text = net.to_dsl();
        let parsed = crate::parse::parse_network(&text).unwrap().network;
        assert_eq!(parsed, net);
    }
}
