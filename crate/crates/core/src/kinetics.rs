//! Mass-action kinetics on the graph of complexes.
//!
//! The rate of reaction j from substrate complex σ is
//! `v_j(x) = k_j · Π_i x_i^{Z_iσ}`. Collecting rate constants into the
//! weighted adjacency matrix A and the out-degree diagonal Δ gives the
//! column-Laplacian `L = Δ − A` with zero column sums, and the species
//! dynamics `ẋ = S v(x) = −Z L ψ(x)` where `ψ(x) = Exp(Zᵀ Ln x)` is the
//! vector of complex monomials. Anchoring at a complex-equilibrium x*
//! rescales L into the balanced Laplacian `𝓛(x*) = L·K(x*)` with zero row
//! and column sums.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg;
use crate::network::ReactionNetwork;
use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticsError {
    #[error("concentration {index} is {value}, expected strictly positive and finite")]
    NonpositiveConcentration { index: usize, value: f64 },
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "anchor is not a complex-equilibrium: residual {residual:.3e} exceeds \
         {tolerance:.3e} (scale {scale:.3e})"
    )]
    NotComplexEquilibrium {
        residual: f64,
        scale: f64,
        tolerance: f64,
    },
}

/// A strictly positive species-concentration vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Concentrations(DVector<f64>);

impl Concentrations {
    pub fn new(values: DVector<f64>) -> Result<Self, KineticsError> {
        for (index, &value) in values.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(KineticsError::NonpositiveConcentration { index, value });
            }
        }
        Ok(Self(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self, KineticsError> {
        Self::new(DVector::from_row_slice(values))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Componentwise natural logarithm.
    pub fn ln(&self) -> DVector<f64> {
        self.0.map(f64::ln)
    }
}

/// The rate-constant Laplacian of the graph of complexes.
///
/// Invariants: `L = Δ − A`, zero column sums, nonnegative diagonal,
/// nonpositive off-diagonal, zero adjacency diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLaplacian {
    /// L = Δ − A, c×c.
    pub matrix: DMatrix<f64>,
    /// Weighted adjacency: A[(π,σ)] sums the rate constants of σ→π.
    pub adjacency: DMatrix<f64>,
    /// Diagonal of Δ (column sums of A).
    pub out_degree: DVector<f64>,
}

/// The balanced Laplacian `𝓛(x*) = L·K(x*)` anchored at a
/// complex-equilibrium; both row and column sums vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugedLaplacian {
    pub matrix: DMatrix<f64>,
    /// Diagonal of the gauge K(x*): K_σ = ψ_σ(x*).
    pub gauge: DVector<f64>,
    pub anchor: Concentrations,
}

impl GaugedLaplacian {
    /// Edge present from σ to π (strictly negative off-diagonal entry).
    pub fn has_edge(&self, sigma: usize, pi: usize) -> bool {
        sigma != pi && self.matrix[(pi, sigma)] < 0.0
    }
}

fn check_len(net: &ReactionNetwork, x: &Concentrations) -> Result<(), KineticsError> {
    if x.len() != net.species_count() {
        return Err(KineticsError::DimensionMismatch {
            expected: net.species_count(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Complex monomials ψ_σ(x) = Π_i x_i^{Z_iσ}, evaluated by repeated
/// multiplication rather than exp/log so integer stoichiometry stays exact.
/// Defined for any real x (integer powers), which the integrator relies on
/// when trial stages wander outside the positive orthant.
pub fn complex_monomials(z: &DMatrix<i64>, x: &DVector<f64>) -> DVector<f64> {
    let (m, c) = (z.nrows(), z.ncols());
    DVector::from_fn(c, |sigma, _| {
        let mut acc = 1.0;
        for i in 0..m {
            let e = z[(i, sigma)];
            if e != 0 {
                acc *= x[i].powi(e as i32);
            }
        }
        acc
    })
}

/// Mass-action rate vector: v_j = k_j · ψ_{σ_j}(x).
pub fn mass_action_rates(
    net: &ReactionNetwork,
    x: &Concentrations,
) -> Result<DVector<f64>, KineticsError> {
    check_len(net, x)?;
    let psi = complex_monomials(&net.complex_matrix(), x.as_vector());
    Ok(DVector::from_fn(net.reaction_count(), |j, _| {
        let rxn = &net.reactions()[j];
        rxn.rate_constant * psi[rxn.substrate]
    }))
}

/// Build the weighted adjacency, out-degree and Laplacian matrices.
pub fn build_laplacian(net: &ReactionNetwork) -> WeightedLaplacian {
    let c = net.complex_count();
    let mut adjacency = DMatrix::<f64>::zeros(c, c);
    for rxn in net.reactions() {
        adjacency[(rxn.product, rxn.substrate)] += rxn.rate_constant;
    }
    let out_degree = DVector::from_fn(c, |sigma, _| adjacency.column(sigma).sum());
    let mut matrix = -&adjacency;
    for sigma in 0..c {
        matrix[(sigma, sigma)] += out_degree[sigma];
    }
    WeightedLaplacian {
        matrix,
        adjacency,
        out_degree,
    }
}

/// Species derivative ẋ = −Z L ψ(x) at a positive state.
pub fn vector_field(
    net: &ReactionNetwork,
    x: &Concentrations,
) -> Result<DVector<f64>, KineticsError> {
    check_len(net, x)?;
    Ok(MassActionField::new(net).eval(x.as_vector()))
}

/// Precomputed evaluator of the mass-action field for repeated calls
/// (simulation); shares nothing mutable, safe to use concurrently.
#[derive(Debug, Clone)]
pub struct MassActionField {
    z_int: DMatrix<i64>,
    minus_zl: DMatrix<f64>,
}

impl MassActionField {
    pub fn new(net: &ReactionNetwork) -> Self {
        let lap = build_laplacian(net);
        let minus_zl = -(net.complex_matrix_f64() * &lap.matrix);
        Self {
            z_int: net.complex_matrix(),
            minus_zl,
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.minus_zl * complex_monomials(&self.z_int, x)
    }
}

/// Scale-aware complex-equilibrium residual of a candidate anchor:
/// `(‖L ψ(x)‖∞, ‖Δ ψ(x)‖∞)`.
pub fn equilibrium_residual(net: &ReactionNetwork, x: &Concentrations) -> (f64, f64) {
    let lap = build_laplacian(net);
    let psi = complex_monomials(&net.complex_matrix(), x.as_vector());
    let residual = linalg::vec_inf_norm(&(&lap.matrix * &psi));
    let scale = linalg::vec_inf_norm(&DVector::from_fn(psi.len(), |i, _| {
        lap.out_degree[i] * psi[i]
    }));
    (residual, scale)
}

/// Gauge the Laplacian at a complex-equilibrium x*.
///
/// Rejects anchors whose residual `‖L ψ(x*)‖∞` exceeds
/// [`tol::GAUGE_RESIDUAL_REL`] relative to `‖Δ ψ(x*)‖∞`.
pub fn gauge_laplacian(
    net: &ReactionNetwork,
    x_star: &Concentrations,
) -> Result<GaugedLaplacian, KineticsError> {
    check_len(net, x_star)?;
    let (residual, scale) = equilibrium_residual(net, x_star);
    let tolerance = tol::GAUGE_RESIDUAL_REL * scale;
    if residual > tolerance {
        return Err(KineticsError::NotComplexEquilibrium {
            residual,
            scale,
            tolerance,
        });
    }
    let lap = build_laplacian(net);
    let gauge = complex_monomials(&net.complex_matrix(), x_star.as_vector());
    let c = net.complex_count();
    let mut matrix = lap.matrix;
    for sigma in 0..c {
        for pi in 0..c {
            matrix[(pi, sigma)] *= gauge[sigma];
        }
    }
    Ok(GaugedLaplacian {
        matrix,
        gauge,
        anchor: x_star.clone(),
    })
}

/// The standard-form field `−Z 𝓛(x*) Exp(Zᵀ Ln(x/x*))`, which must agree
/// with [`vector_field`] for every positive x. Kept as an algebraic
/// cross-check of the gauged representation.
pub fn standard_form_field(
    net: &ReactionNetwork,
    gauged: &GaugedLaplacian,
    x: &Concentrations,
) -> Result<DVector<f64>, KineticsError> {
    check_len(net, x)?;
    let z = net.complex_matrix_f64();
    let gamma = z.transpose() * (x.ln() - gauged.anchor.ln());
    Ok(-(&z * (&gauged.matrix * gamma.map(f64::exp))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_network;
    use approx::assert_relative_eq;

    fn ab() -> ReactionNetwork {
        parse_network("A -> B ; k = 1\nB -> A ; k = 1").unwrap().network
    }

    fn chain3() -> ReactionNetwork {
        parse_network(
            "X1 <-> X2 ; kf = 2, kr = 3\n\
             X2 <-> X3 ; kf = 5, kr = 7",
        )
        .unwrap()
        .network
    }

    fn cycle3() -> ReactionNetwork {
        parse_network("X1 -> X2 ; k = 1\nX2 -> X3 ; k = 1\nX3 -> X1 ; k = 1")
            .unwrap()
            .network
    }

    #[test]
    fn first_order_rates() {
        let net = ab();
        let x = Concentrations::from_slice(&[2.0, 3.0]).unwrap();
        let v = mass_action_rates(&net, &x).unwrap();
        assert_eq!(v.as_slice(), &[2.0, 3.0]);
    }

    #[test]
    fn monomial_rate_with_second_order_substrate() {
        let net = parse_network(
            "X1 + 2 X2 <-> X3 ; kf=1, kr=1\n\
             X3 -> 2 X1 + X2 ; k=1\n\
             2 X1 + X2 -> X4 ; k=1\n\
             X3 -> X4 ; k=1",
        )
        .unwrap()
        .network;
        let x = Concentrations::from_slice(&[2.0, 3.0, 1.0, 1.0]).unwrap();
        let v = mass_action_rates(&net, &x).unwrap();
        assert_relative_eq!(v[0], 18.0, epsilon = 1e-14); // 2 · 3²
    }

    #[test]
    fn rates_reject_nonpositive_state() {
        let err = Concentrations::from_slice(&[1.0, 0.0]).unwrap_err();
        assert!(matches!(
            err,
            KineticsError::NonpositiveConcentration { index: 1, .. }
        ));
    }

    #[test]
    fn laplacian_fixtures() {
        let l_ab = build_laplacian(&ab()).matrix;
        assert_eq!(l_ab, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));

        let l_chain = build_laplacian(&chain3()).matrix;
        assert_eq!(
            l_chain,
            DMatrix::from_row_slice(3, 3, &[2.0, -3.0, 0.0, -2.0, 8.0, -7.0, 0.0, -5.0, 7.0])
        );

        let l_cycle = build_laplacian(&cycle3()).matrix;
        assert_eq!(
            l_cycle,
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, -1.0, -1.0, 1.0, 0.0, 0.0, -1.0, 1.0])
        );
    }

    #[test]
    fn laplacian_columns_sum_to_zero() {
        for net in [ab(), chain3(), cycle3()] {
            let lap = build_laplacian(&net);
            for j in 0..net.complex_count() {
                assert_relative_eq!(lap.matrix.column(j).sum(), 0.0, epsilon = 1e-15);
                assert!(lap.matrix[(j, j)] >= 0.0);
                assert_eq!(lap.adjacency[(j, j)], 0.0);
            }
        }
    }

    #[test]
    fn parallel_reactions_sum_in_adjacency() {
        let net = parse_network("A -> B ; k = 1\nA -> B ; k = 2\nB -> A ; k = 1")
            .unwrap()
            .network;
        let lap = build_laplacian(&net);
        assert_eq!(lap.adjacency[(1, 0)], 3.0);
        assert_eq!(lap.matrix[(0, 0)], 3.0);
    }

    #[test]
    fn vector_field_on_two_state_toggle() {
        let net = ab();
        let x = Concentrations::from_slice(&[2.0, 3.0]).unwrap();
        let xdot = vector_field(&net, &x).unwrap();
        assert_relative_eq!(xdot[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(xdot[1], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn field_matches_stoichiometric_route() {
        let net = chain3();
        let structure = crate::structure::build_structure(&net);
        let s = structure.stoichiometric_f64();
        let x = Concentrations::from_slice(&[0.3, 1.7, 2.2]).unwrap();
        let sv = &s * mass_action_rates(&net, &x).unwrap();
        let zl = vector_field(&net, &x).unwrap();
        for i in 0..3 {
            assert_relative_eq!(sv[i], zl[i], epsilon = 1e-13, max_relative = 1e-12);
        }
    }

    #[test]
    fn exp_log_form_matches_monomials() {
        let net = chain3();
        let z = net.complex_matrix();
        let x = DVector::from_vec(vec![0.25, 3.5, 1.25]);
        let psi = complex_monomials(&z, &x);
        let via_exp = (net.complex_matrix_f64().transpose() * x.map(f64::ln)).map(f64::exp);
        for i in 0..psi.len() {
            assert_relative_eq!(psi[i], via_exp[i], max_relative = 1e-13);
        }
    }

    #[test]
    fn gauge_identity_anchor() {
        let net = ab();
        let x_star = Concentrations::from_slice(&[1.0, 1.0]).unwrap();
        let g = gauge_laplacian(&net, &x_star).unwrap();
        assert_eq!(g.gauge.as_slice(), &[1.0, 1.0]);
        assert_eq!(g.matrix, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn gauged_chain_is_balanced() {
        let net = chain3();
        let x_star = Concentrations::from_slice(&[1.0, 2.0 / 3.0, 10.0 / 21.0]).unwrap();
        let g = gauge_laplacian(&net, &x_star).unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[
                2.0,
                -2.0,
                0.0,
                -2.0,
                16.0 / 3.0,
                -10.0 / 3.0,
                0.0,
                -10.0 / 3.0,
                10.0 / 3.0,
            ],
        );
        for (a, b) in g.matrix.iter().zip(expected.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        let scale = linalg::max_abs(&g.matrix);
        for i in 0..3 {
            assert!(g.matrix.row(i).sum().abs() <= tol::BALANCE_REL * scale);
            assert!(g.matrix.column(i).sum().abs() <= tol::BALANCE_REL * scale);
        }
    }

    #[test]
    fn gauge_rejects_non_equilibrium_anchor() {
        let net = chain3();
        let bad = Concentrations::from_slice(&[1.0, 1.0, 1.0]).unwrap();
        let err = gauge_laplacian(&net, &bad).unwrap_err();
        assert!(matches!(err, KineticsError::NotComplexEquilibrium { .. }));
    }

    #[test]
    fn standard_form_equals_direct_field() {
        let net = chain3();
        let x_star = Concentrations::from_slice(&[1.0, 2.0 / 3.0, 10.0 / 21.0]).unwrap();
        let g = gauge_laplacian(&net, &x_star).unwrap();
        let x = Concentrations::from_slice(&[0.9, 2.3, 0.4]).unwrap();
        let direct = vector_field(&net, &x).unwrap();
        let standard = standard_form_field(&net, &g, &x).unwrap();
        for i in 0..3 {
            assert_relative_eq!(direct[i], standard[i], max_relative = 1e-10, epsilon = 1e-12);
        }
    }
}
