//! Mass-action chemical reaction networks on the graph of complexes.
//!
//! The network is a directed graph whose vertices are the complexes
//! (integer combinations of species, the columns of Z) and whose edges are
//! the reactions. Factoring the stoichiometric matrix as S = Z·B through
//! the incidence matrix B turns mass-action dynamics into
//! `ẋ = −Z L Exp(Zᵀ Ln x)` for the rate Laplacian L, and anchoring at a
//! complex-equilibrium x* balances the Laplacian: 𝓛(x*) = L·K(x*) has zero
//! row and column sums. That one matrix carries the theory implemented
//! here: classification (deficiency, weak reversibility,
//! complex-balancedness), the equilibrium set and its per-class unique
//! point, Lyapunov descent, and Kron-style model reduction by Schur
//! complementation of 𝓛(x*).
//!
//! Modules follow the pipeline: [`parse`] and [`network`] define networks,
//! [`structure`] reads off the combinatorics, [`kinetics`] builds rates
//! and Laplacians, [`equilibria`] analyses steady states, [`reduction`]
//! removes complexes, and [`simulation`] integrates full or reduced
//! dynamics.

pub mod equilibria;
pub mod kinetics;
pub mod linalg;
pub mod network;
pub mod parse;
pub mod presets;
pub mod reduction;
pub mod simulation;
pub mod structure;
pub mod tol;

pub use equilibria::{
    equilibrium_membership, find_complex_equilibrium, lemma1_form, lyapunov_dissipation,
    lyapunov_value, positive_kernel_vector, unique_equilibrium_in_class, ClassificationVerdict,
    EquilibriaError, EquilibriumAnchor, KernelReport, NewtonOutcome,
};
pub use kinetics::{
    build_laplacian, gauge_laplacian, mass_action_rates, vector_field, Concentrations,
    GaugedLaplacian, KineticsError, MassActionField, WeightedLaplacian,
};
pub use network::{canonical_complex_name, NetworkError, ReactionNetwork, Species};
pub use parse::{parse_network, ParseError, ParseWarning, Parsed};
pub use reduction::{
    equilibria_inclusion_check, extract_rate_constants, reduce_network, schur_complement_matrix,
    ReducedMassActionField, ReducedNetwork, ReductionError,
};
pub use simulation::{
    compare, integrate, monitor, read_csv, write_csv, ComparisonReport, IntegrateOptions, Method,
    MonitorReport, Sampling, SimulationError, Trajectory,
};
pub use structure::{build_structure, StructureReport};
