//! Numerical thresholds used across the crate.
//!
//! Every cutoff that decides something (equilibrium acceptance, edge
//! existence, solver convergence) lives here so the choices are auditable
//! in one place rather than scattered as magic numbers.

/// Relative residual below which a state counts as a complex-equilibrium:
/// `‖L ψ(x*)‖∞ ≤ GAUGE_RESIDUAL_REL · ‖Δ ψ(x*)‖∞`.
pub const GAUGE_RESIDUAL_REL: f64 = 1e-9;

/// Row/column sums of a balanced Laplacian must vanish to this fraction
/// of the matrix norm.
pub const BALANCE_REL: f64 = 1e-10;

/// Relative tolerance for the equilibrium-set membership test
/// `‖Sᵀ Ln(x**/x*)‖∞ ≤ MEMBERSHIP_REL · (1 + ‖Sᵀ Ln x*‖∞)`.
pub const MEMBERSHIP_REL: f64 = 1e-9;

/// Residual tolerance for accepting the least-squares witness solve
/// as exactly consistent (complex-balanced verdict).
pub const WITNESS_RESIDUAL_REL: f64 = 1e-9;

/// Entries of a per-class kernel vector must exceed this after
/// max-normalization to count as strictly positive.
pub const KERNEL_POSITIVITY_MIN: f64 = 1e-12;

/// Newton convergence: `‖F(θ)‖∞ ≤ NEWTON_FTOL_REL · (1 + ‖x0‖∞)`.
pub const NEWTON_FTOL_REL: f64 = 1e-12;

/// Iteration cap for the in-class equilibrium Newton solve.
pub const NEWTON_MAX_ITERATIONS: usize = 200;

/// Post-solve check that `x1 - x0` lies in the stoichiometric subspace.
pub const CLASS_PROJECTION_TOL: f64 = 1e-8;

/// Off-diagonal entries of a reduced Laplacian smaller than this fraction
/// of `‖L̂‖∞` are treated as absent reactions.
pub const EDGE_DROP_REL: f64 = 1e-12;

/// Condition-number cap on the deleted block; beyond this the Schur
/// complement is rejected as singular.
pub const SCHUR_BLOCK_MAX_CONDITION: f64 = 1e12;

/// Default relative tolerance of the adaptive integrator.
pub const DEFAULT_RTOL: f64 = 1e-8;

/// Default absolute tolerance of the adaptive integrator.
pub const DEFAULT_ATOL: f64 = 1e-10;

/// Adaptive steps may not shrink below this fraction of the horizon.
pub const MIN_STEP_FRACTION: f64 = 1e-14;

/// A mass vector is accepted as strictly positive when its smallest entry
/// exceeds this fraction of its largest.
pub const MASS_VECTOR_POSITIVITY_REL: f64 = 1e-9;
