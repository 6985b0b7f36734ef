//! Model reduction by eliminating complexes from the graph of complexes.
//!
//! Deleting a vertex set from a balanced Laplacian via the Schur
//! complement yields a smaller balanced Laplacian, hence a smaller
//! mass-action network over the retained complexes that keeps the anchor
//! x* as a complex-equilibrium and whose equilibrium set contains that of
//! the full network. Reduced rate constants are recovered by undoing the
//! gauge on the retained columns.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::kinetics::{complex_monomials, gauge_laplacian, Concentrations, KineticsError};
use crate::linalg;
use crate::network::{NetworkError, ReactionNetwork};
use crate::equilibria::EquilibriumAnchor;
use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error("cannot delete all {0} complexes")]
    EmptyRetained(usize),
    #[error("deleted complex index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("complex index {0} deleted twice")]
    DuplicateIndex(usize),
    #[error(
        "deleted block is numerically singular (condition {condition:.3e}); \
         deleted complexes {deleted:?}"
    )]
    SingularBlock { condition: f64, deleted: Vec<usize> },
    #[error(
        "deleting {deleted:?} disconnects retained complex {complex} from the rest"
    )]
    DisconnectedComplex { complex: usize, deleted: Vec<usize> },
}

/// Schur complement of a balanced Laplacian plus solve diagnostics.
#[derive(Debug, Clone)]
pub struct SchurOutcome {
    /// Retained indices in ascending order; row/column order of `matrix`.
    pub retained: Vec<usize>,
    /// The reduced balanced Laplacian L̂.
    pub matrix: DMatrix<f64>,
    /// Condition number of the deleted block (1 when nothing is deleted).
    pub block_condition: f64,
}

/// Schur complement of an arbitrary balanced Laplacian matrix with respect
/// to a deleted index set: `L̂ = L₁₁ − L₁₂ L₂₂⁻¹ L₂₁` after the symmetric
/// permutation that puts deleted indices last.
pub fn schur_complement_matrix(
    laplacian: &DMatrix<f64>,
    deleted: &[usize],
) -> Result<SchurOutcome, ReductionError> {
    let c = laplacian.nrows();
    let mut is_deleted = vec![false; c];
    for &d in deleted {
        if d >= c {
            return Err(ReductionError::IndexOutOfRange(d));
        }
        if is_deleted[d] {
            return Err(ReductionError::DuplicateIndex(d));
        }
        is_deleted[d] = true;
    }
    let retained: Vec<usize> = (0..c).filter(|&i| !is_deleted[i]).collect();
    if retained.is_empty() {
        return Err(ReductionError::EmptyRetained(c));
    }
    if deleted.is_empty() {
        return Ok(SchurOutcome {
            retained,
            matrix: laplacian.clone(),
            block_condition: 1.0,
        });
    }

    let mut deleted_sorted = deleted.to_vec();
    deleted_sorted.sort_unstable();
    let l11 = linalg::submatrix(laplacian, &retained, &retained);
    let l12 = linalg::submatrix(laplacian, &retained, &deleted_sorted);
    let l21 = linalg::submatrix(laplacian, &deleted_sorted, &retained);
    let l22 = linalg::submatrix(laplacian, &deleted_sorted, &deleted_sorted);

    let block_condition = linalg::condition_number(&l22);
    if !block_condition.is_finite() || block_condition > tol::SCHUR_BLOCK_MAX_CONDITION {
        return Err(ReductionError::SingularBlock {
            condition: block_condition,
            deleted: deleted_sorted,
        });
    }
    let solved = l22
        .lu()
        .solve(&l21)
        .ok_or(ReductionError::SingularBlock {
            condition: block_condition,
            deleted: deleted_sorted.clone(),
        })?;
    let matrix = l11 - l12 * solved;

    // a retained complex whose whole row vanished lost every reaction
    let scale = linalg::max_abs(&matrix);
    for (local, &global) in retained.iter().enumerate() {
        let row_max = (0..retained.len())
            .map(|j| matrix[(local, j)].abs())
            .fold(0.0_f64, f64::max);
        if row_max <= tol::EDGE_DROP_REL * scale {
            return Err(ReductionError::DisconnectedComplex {
                complex: global,
                deleted: deleted_sorted,
            });
        }
    }

    Ok(SchurOutcome {
        retained,
        matrix,
        block_condition,
    })
}

/// A reduced reaction extracted from a reduced Laplacian; complex indices
/// are local to the retained list.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedReaction {
    pub substrate: usize,
    pub product: usize,
    pub rate_constant: f64,
}

/// A reduced network: retained complexes, their composition columns, the
/// reduced balanced Laplacian at the anchor, and the mass-action reactions
/// that reproduce it.
#[derive(Debug, Clone)]
pub struct ReducedNetwork {
    /// Original complex indices kept, ascending.
    pub retained: Vec<usize>,
    /// Original complex indices removed, ascending.
    pub deleted: Vec<usize>,
    /// Ẑ: composition of retained complexes over the FULL species list
    /// (species appearing only in deleted complexes keep a zero row).
    pub z_hat: DMatrix<i64>,
    /// The reduced balanced Laplacian L̂(x*).
    pub laplacian: DMatrix<f64>,
    /// Gauge entries of the retained complexes, K̂_σ = ψ_σ(x*).
    pub gauge: DVector<f64>,
    /// The anchor x* (a complex-equilibrium of full and reduced network).
    pub anchor: Concentrations,
    /// Mass-action reactions of the reduced network.
    pub extracted_reactions: Vec<ExtractedReaction>,
    /// Condition number of the eliminated block.
    pub block_condition: f64,
    /// Species names, for serialization.
    pub species_names: Vec<String>,
}

/// Reduce a network by deleting the given complexes at anchor x*.
pub fn reduce_network(
    net: &ReactionNetwork,
    anchor: &EquilibriumAnchor,
    deleted: &[usize],
) -> Result<ReducedNetwork, ReductionError> {
    let gauged = gauge_laplacian(net, anchor.x_star())?;
    let schur = schur_complement_matrix(&gauged.matrix, deleted)?;

    let z = net.complex_matrix();
    let m = net.species_count();
    let z_hat = DMatrix::from_fn(m, schur.retained.len(), |i, j| z[(i, schur.retained[j])]);
    let gauge = DVector::from_fn(schur.retained.len(), |j, _| gauged.gauge[schur.retained[j]]);

    let mut deleted_sorted = deleted.to_vec();
    deleted_sorted.sort_unstable();
    let extracted_reactions = extract_rate_constants_from(&schur.matrix, &gauge);
    Ok(ReducedNetwork {
        retained: schur.retained,
        deleted: deleted_sorted,
        z_hat,
        laplacian: schur.matrix,
        gauge,
        anchor: anchor.x_star().clone(),
        extracted_reactions,
        block_condition: schur.block_condition,
        species_names: net.species().iter().map(|s| s.name.clone()).collect(),
    })
}

/// Invert the gauge on a reduced Laplacian: every strictly negative
/// off-diagonal entry −L̂_{πσ} becomes a reaction σ→π with rate constant
/// `−L̂_{πσ} / K̂_σ`; entries below the drop threshold are treated as zero.
pub fn extract_rate_constants(reduced: &ReducedNetwork) -> Vec<ExtractedReaction> {
    extract_rate_constants_from(&reduced.laplacian, &reduced.gauge)
}

fn extract_rate_constants_from(
    laplacian: &DMatrix<f64>,
    gauge: &DVector<f64>,
) -> Vec<ExtractedReaction> {
    let c = laplacian.nrows();
    let cut = tol::EDGE_DROP_REL * linalg::max_abs(laplacian);
    let mut out = Vec::new();
    for sigma in 0..c {
        for pi in 0..c {
            if pi == sigma {
                continue;
            }
            let entry = laplacian[(pi, sigma)];
            if -entry > cut {
                out.push(ExtractedReaction {
                    substrate: sigma,
                    product: pi,
                    rate_constant: -entry / gauge[sigma],
                });
            }
        }
    }
    out
}

/// Rebuild the gauged Laplacian from extracted reactions; used to check
/// that extraction is lossless.
pub fn regauge(reactions: &[ExtractedReaction], gauge: &DVector<f64>) -> DMatrix<f64> {
    let c = gauge.len();
    let mut adjacency = DMatrix::<f64>::zeros(c, c);
    for rxn in reactions {
        adjacency[(rxn.product, rxn.substrate)] += rxn.rate_constant;
    }
    let mut lap = -adjacency;
    for sigma in 0..c {
        let out_degree = -lap.column(sigma).sum();
        lap[(sigma, sigma)] = out_degree;
    }
    for sigma in 0..c {
        for pi in 0..c {
            lap[(pi, sigma)] *= gauge[sigma];
        }
    }
    lap
}

/// Materialize the reduced system as a standalone [`ReactionNetwork`].
/// Species that appear in no retained complex are dropped.
pub fn to_network(reduced: &ReducedNetwork) -> Result<ReactionNetwork, NetworkError> {
    let m = reduced.z_hat.nrows();
    let kept_species: Vec<usize> = (0..m)
        .filter(|&i| (0..reduced.z_hat.ncols()).any(|j| reduced.z_hat[(i, j)] != 0))
        .collect();
    let names = kept_species
        .iter()
        .map(|&i| reduced.species_names[i].clone())
        .collect();
    let columns = (0..reduced.z_hat.ncols())
        .map(|j| kept_species.iter().map(|&i| reduced.z_hat[(i, j)]).collect())
        .collect();
    let reactions = reduced
        .extracted_reactions
        .iter()
        .map(|r| (r.substrate, r.product, r.rate_constant))
        .collect();
    ReactionNetwork::new(names, columns, reactions)
}

/// The reduced mass-action field `ẋ = −Ẑ L̂ ψ̂(x/x*)` over the full species
/// vector; species of deleted complexes have identically zero derivative.
#[derive(Debug, Clone)]
pub struct ReducedMassActionField {
    z_hat_int: DMatrix<i64>,
    minus_z_hat_l: DMatrix<f64>,
    anchor: DVector<f64>,
}

impl ReducedMassActionField {
    pub fn new(reduced: &ReducedNetwork) -> Self {
        let z_hat_f = reduced.z_hat.map(|a| a as f64);
        Self {
            z_hat_int: reduced.z_hat.clone(),
            minus_z_hat_l: -(z_hat_f * &reduced.laplacian),
            anchor: reduced.anchor.as_vector().clone(),
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let ratio = DVector::from_fn(x.len(), |i, _| x[i] / self.anchor[i]);
        &self.minus_z_hat_l * complex_monomials(&self.z_hat_int, &ratio)
    }
}

/// Check that sampled members of the full equilibrium set annihilate the
/// reduced vector field (equilibrium-set inclusion).
#[derive(Debug, Clone)]
pub struct InclusionReport {
    /// Relative residual of the reduced field per sample.
    pub residuals: Vec<f64>,
    pub worst: f64,
}

pub fn equilibria_inclusion_check(
    reduced: &ReducedNetwork,
    samples: &[Concentrations],
) -> InclusionReport {
    let field = ReducedMassActionField::new(reduced);
    let z_hat_f = reduced.z_hat.map(|a| a as f64);
    let scale_base = matrix_inf_norm(&z_hat_f) * matrix_inf_norm(&reduced.laplacian);
    let mut residuals = Vec::with_capacity(samples.len());
    let mut worst = 0.0_f64;
    for x in samples {
        let ratio = DVector::from_fn(x.len(), |i, _| {
            x.as_vector()[i] / reduced.anchor.as_vector()[i]
        });
        let psi = complex_monomials(&reduced.z_hat, &ratio);
        let scale = scale_base * linalg::vec_inf_norm(&psi);
        let resid = linalg::vec_inf_norm(&field.eval(x.as_vector())) / scale.max(f64::MIN_POSITIVE);
        residuals.push(resid);
        worst = worst.max(resid);
    }
    InclusionReport { residuals, worst }
}

/// Induced ∞-norm (max absolute row sum).
pub fn matrix_inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0_f64, f64::max)
}
