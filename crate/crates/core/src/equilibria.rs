//! Equilibrium analysis of complex-balanced networks.
//!
//! The equilibrium set of a network anchored at a complex-equilibrium x*
//! is `𝓔 = { x > 0 : Sᵀ Ln(x/x*) = 0 }`, every equilibrium is a
//! complex-equilibrium, and each positive stoichiometric compatibility
//! class contains exactly one point of 𝓔. This module finds an anchor,
//! tests membership, solves for the in-class equilibrium by damped Newton,
//! and evaluates the entropy-like Lyapunov function and its dissipation.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use thiserror::Error;

use crate::kinetics::{
    build_laplacian, complex_monomials, equilibrium_residual, Concentrations, GaugedLaplacian,
    KineticsError, WeightedLaplacian,
};
use crate::linalg;
use crate::network::ReactionNetwork;
use crate::structure::{build_structure, StructureReport};
use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriaError {
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error(
        "Newton iteration did not reach tolerance in {iterations} iterations \
         (final residual {final_residual:.3e})"
    )]
    NewtonDidNotConverge {
        iterations: usize,
        final_residual: f64,
        residual_trace: Vec<f64>,
    },
    #[error("damped Newton step stalled at iteration {iteration}")]
    NewtonStalled {
        iteration: usize,
        residual_trace: Vec<f64>,
    },
    #[error("solution failed the post-solve check: {0}")]
    VerificationFailed(String),
}

/// Per-linkage-class kernel data of the rate Laplacian.
#[derive(Debug, Clone)]
pub struct ClassKernel {
    /// Complex indices of the class (sorted).
    pub complexes: Vec<usize>,
    /// Whether the class is strongly connected (graph traversal, exact).
    pub strongly_connected: bool,
    /// Kernel vector of the class block, normalized to max entry 1;
    /// present only when strictly positive.
    pub vector: Option<DVector<f64>>,
}

/// Kernel vectors of L per linkage class, plus the assembled global vector
/// when every class admits a strictly positive one.
#[derive(Debug, Clone)]
pub struct KernelReport {
    pub classes: Vec<ClassKernel>,
    /// ρ ∈ ℝ₊ᶜ with Lρ = 0, max entry 1 per class; `None` if any class
    /// lacks a positive kernel vector.
    pub assembled: Option<DVector<f64>>,
}

/// Classification of a network: weak reversibility, complex-balancedness,
/// plus a witness equilibrium when one exists.
#[derive(Debug, Clone)]
pub struct ClassificationVerdict {
    pub weakly_reversible: bool,
    pub complex_balanced: bool,
    pub deficiency: usize,
    /// A complex-equilibrium witness (any member of 𝓔).
    pub witness: Option<Concentrations>,
    /// The positive kernel vector ρ of L used to construct the witness.
    pub kernel_vector: Option<DVector<f64>>,
    /// ∞-norm residual of the witness linear solve.
    pub residual: f64,
}

/// Kernel vector of L restricted to each linkage class.
///
/// Strict positivity of the class kernel coincides with strong
/// connectivity of the class, which is decided by traversal; the vector
/// itself comes from the numerical null space of the class block.
pub fn positive_kernel_vector(
    lap: &WeightedLaplacian,
    classes: &[Vec<usize>],
) -> KernelReport {
    let c = lap.matrix.nrows();
    let mut out_classes = Vec::with_capacity(classes.len());
    let mut assembled = DVector::<f64>::zeros(c);
    let mut all_positive = true;

    for class in classes {
        let strongly_connected = class_strongly_connected(&lap.adjacency, class);
        let block = linalg::submatrix(&lap.matrix, class, class);
        let basis = linalg::nullspace(&block);
        let mut vector = None;
        if basis.len() == 1 {
            let mut v = basis[0].clone();
            let max = v.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()));
            if max > 0.0 {
                if v.iter().sum::<f64>() < 0.0 {
                    v = -v;
                }
                v /= v.iter().fold(0.0_f64, |acc, &x| acc.max(x));
                if v.iter().all(|&x| x > tol::KERNEL_POSITIVITY_MIN) {
                    vector = Some(v);
                }
            }
        }
        match &vector {
            Some(v) => {
                for (local, &global) in class.iter().enumerate() {
                    assembled[global] = v[local];
                }
            }
            None => all_positive = false,
        }
        out_classes.push(ClassKernel {
            complexes: class.clone(),
            strongly_connected,
            vector,
        });
    }

    KernelReport {
        classes: out_classes,
        assembled: all_positive.then_some(assembled),
    }
}

/// Two-sweep reachability: strongly connected iff every class vertex is
/// reachable from the first member along edges and along reversed edges.
fn class_strongly_connected(adjacency: &DMatrix<f64>, class: &[usize]) -> bool {
    if class.len() <= 1 {
        return true;
    }
    let reach = |reverse: bool| {
        let mut seen: Vec<bool> = vec![false; class.len()];
        let mut stack = vec![0_usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, seen_j) in seen.iter_mut().enumerate() {
                if *seen_j {
                    continue;
                }
                // edge class[i] -> class[j] is adjacency[(to, from)] > 0
                let present = if reverse {
                    adjacency[(class[i], class[j])] > 0.0
                } else {
                    adjacency[(class[j], class[i])] > 0.0
                };
                if present {
                    *seen_j = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(false) && reach(true)
}

/// Decide complex-balancedness and produce a witness equilibrium.
///
/// A positive ρ with Lρ = 0 exists per class iff the network is weakly
/// reversible; the witness then solves `Sᵀ w = Bᵀ Ln ρ` in least squares,
/// and the network is complex-balanced exactly when the system is
/// consistent, with witness `x* = Exp(w)`.
pub fn find_complex_equilibrium(net: &ReactionNetwork) -> ClassificationVerdict {
    let structure = build_structure(net);
    let lap = build_laplacian(net);
    let kernels = positive_kernel_vector(&lap, &structure.linkage_classes);
    let weakly_reversible = kernels.classes.iter().all(|cl| cl.strongly_connected);

    let Some(rho) = kernels.assembled else {
        return ClassificationVerdict {
            weakly_reversible,
            complex_balanced: false,
            deficiency: structure.deficiency,
            witness: None,
            kernel_vector: None,
            residual: f64::INFINITY,
        };
    };

    let s_t = structure.stoichiometric_f64().transpose();
    let rhs = structure.incidence_f64().transpose() * rho.map(f64::ln);
    let w = linalg::lstsq(&s_t, &rhs);
    let residual = linalg::vec_inf_norm(&(&s_t * &w - &rhs));
    let complex_balanced =
        residual <= tol::WITNESS_RESIDUAL_REL * (1.0 + linalg::vec_inf_norm(&rhs));
    let witness = complex_balanced.then(|| {
        Concentrations::new(w.map(f64::exp)).expect("Exp of finite vector is positive")
    });

    ClassificationVerdict {
        weakly_reversible,
        complex_balanced,
        deficiency: structure.deficiency,
        witness,
        kernel_vector: Some(rho),
        residual,
    }
}

/// Membership test for the equilibrium set 𝓔 anchored at x*:
/// true iff `‖Sᵀ Ln(x**/x*)‖∞ ≤ tol · (1 + ‖Sᵀ Ln x*‖∞)`.
pub fn equilibrium_membership(
    stoichiometric: &DMatrix<i64>,
    x_star: &Concentrations,
    x_other: &Concentrations,
) -> bool {
    let s_t = stoichiometric.map(|a| a as f64).transpose();
    let lhs = linalg::vec_inf_norm(&(&s_t * (x_other.ln() - x_star.ln())));
    let scale = linalg::vec_inf_norm(&(&s_t * x_star.ln()));
    lhs <= tol::MEMBERSHIP_REL * (1.0 + scale)
}

/// A concentration vector validated to be a complex-equilibrium, usable as
/// the anchor of the equilibrium set and of model reduction.
#[derive(Debug, Clone)]
pub struct EquilibriumAnchor {
    x_star: Concentrations,
    residual: f64,
}

impl EquilibriumAnchor {
    pub fn new(net: &ReactionNetwork, x_star: Concentrations) -> Result<Self, KineticsError> {
        let (residual, scale) = equilibrium_residual(net, &x_star);
        let tolerance = tol::GAUGE_RESIDUAL_REL * scale;
        if residual > tolerance {
            return Err(KineticsError::NotComplexEquilibrium {
                residual,
                scale,
                tolerance,
            });
        }
        Ok(Self { x_star, residual })
    }

    pub fn x_star(&self) -> &Concentrations {
        &self.x_star
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// Result of the in-class equilibrium Newton solve.
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x1: Concentrations,
    pub iterations: usize,
    pub residual_trace: Vec<f64>,
}

/// The unique equilibrium in the positive stoichiometric compatibility
/// class of x0.
///
/// Writes `x1 = x* · Exp(Nθ)` with N an orthonormal basis of ker Sᵀ and
/// solves `F(θ) = Nᵀ(x*·Exp(Nθ) − x0) = 0` by Newton with step halving;
/// the Jacobian `Nᵀ diag(x*·Exp(Nθ)) N` is symmetric positive definite.
pub fn unique_equilibrium_in_class(
    net: &ReactionNetwork,
    anchor: &EquilibriumAnchor,
    x0: &Concentrations,
) -> Result<NewtonOutcome, EquilibriaError> {
    let structure = build_structure(net);
    unique_equilibrium_with_structure(net, &structure, anchor, x0)
}

/// Same as [`unique_equilibrium_in_class`] but reusing a precomputed
/// structure report.
pub fn unique_equilibrium_with_structure(
    net: &ReactionNetwork,
    structure: &StructureReport,
    anchor: &EquilibriumAnchor,
    x0: &Concentrations,
) -> Result<NewtonOutcome, EquilibriaError> {
    let m = net.species_count();
    if x0.len() != m {
        return Err(KineticsError::DimensionMismatch {
            expected: m,
            got: x0.len(),
        }
        .into());
    }
    let x_star = anchor.x_star().as_vector();
    let basis: Vec<&DVector<f64>> = structure.moiety_basis.iter().collect();
    let q = basis.len();
    let n = DMatrix::from_fn(m, q, |i, j| basis[j][i]);

    let ftol = tol::NEWTON_FTOL_REL * (1.0 + linalg::vec_inf_norm(x0.as_vector()));
    let state = |theta: &DVector<f64>| -> DVector<f64> {
        let exponent = &n * theta;
        DVector::from_fn(m, |i, _| x_star[i] * exponent[i].exp())
    };
    let residual_of = |y: &DVector<f64>| n.transpose() * (y - x0.as_vector());

    let mut theta = DVector::<f64>::zeros(q);
    let mut y = state(&theta);
    let mut f = residual_of(&y);
    let mut res = linalg::vec_inf_norm(&f);
    let mut trace = vec![res];
    let mut iterations = 0;

    while res > ftol {
        if iterations >= tol::NEWTON_MAX_ITERATIONS {
            return Err(EquilibriaError::NewtonDidNotConverge {
                iterations,
                final_residual: res,
                residual_trace: trace,
            });
        }
        let jac = DMatrix::from_fn(q, q, |a, b| {
            (0..m).map(|i| n[(i, a)] * y[i] * n[(i, b)]).sum()
        });
        let chol = Cholesky::new(jac).ok_or_else(|| EquilibriaError::VerificationFailed(
            "Newton Jacobian lost positive definiteness".into(),
        ))?;
        let step = chol.solve(&(-&f));

        // halve until the residual decreases
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha >= 2.0_f64.powi(-30) {
            let candidate = &theta + &step * alpha;
            let y_c = state(&candidate);
            let f_c = residual_of(&y_c);
            let res_c = linalg::vec_inf_norm(&f_c);
            if res_c < res {
                theta = candidate;
                y = y_c;
                f = f_c;
                res = res_c;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(EquilibriaError::NewtonStalled {
                iteration: iterations,
                residual_trace: trace,
            });
        }
        iterations += 1;
        trace.push(res);
    }

    let x1 = Concentrations::new(y.clone()).map_err(EquilibriaError::Kinetics)?;
    if !equilibrium_membership(&structure.stoichiometric, anchor.x_star(), &x1) {
        return Err(EquilibriaError::VerificationFailed(
            "returned point is not in the equilibrium set".into(),
        ));
    }
    // x1 − x0 must lie in im S, i.e. have no ker Sᵀ component
    let diff = &y - x0.as_vector();
    let residual_off_class = linalg::vec_inf_norm(&(&n * (n.transpose() * &diff)));
    if residual_off_class > tol::CLASS_PROJECTION_TOL {
        return Err(EquilibriaError::VerificationFailed(format!(
            "x1 − x0 leaves the stoichiometric subspace by {residual_off_class:.3e}"
        )));
    }
    Ok(NewtonOutcome {
        x1,
        iterations,
        residual_trace: trace,
    })
}

/// The Lyapunov function `G(x) = xᵀ Ln(x/x*) + (x* − x)ᵀ 1`.
/// Zero at x*, strictly positive elsewhere.
pub fn lyapunov_value(x: &Concentrations, x_star: &Concentrations) -> f64 {
    assert_eq!(x.len(), x_star.len(), "dimension mismatch");
    let mut g = 0.0;
    for i in 0..x.len() {
        let (xi, si) = (x.as_vector()[i], x_star.as_vector()[i]);
        g += xi * (xi / si).ln() + si - xi;
    }
    g
}

/// The quadratic-like form `γᵀ 𝓛(x*) Exp(γ)`, nonnegative for balanced 𝓛
/// and zero exactly when γ is constant on every linkage class.
pub fn lemma1_form(gauged: &GaugedLaplacian, gamma: &DVector<f64>) -> f64 {
    gamma.dot(&(&gauged.matrix * gamma.map(f64::exp)))
}

/// Lyapunov dissipation `Ġ(x) = −γᵀ 𝓛(x*) Exp(γ)` with
/// `γ = Zᵀ Ln(x/x*)`; nonpositive along the flow, zero exactly on 𝓔.
pub fn lyapunov_dissipation(
    net: &ReactionNetwork,
    gauged: &GaugedLaplacian,
    x: &Concentrations,
) -> Result<f64, KineticsError> {
    if x.len() != net.species_count() {
        return Err(KineticsError::DimensionMismatch {
            expected: net.species_count(),
            got: x.len(),
        });
    }
    let z = net.complex_matrix_f64();
    let gamma = z.transpose() * (x.ln() - gauged.anchor.ln());
    Ok(-lemma1_form(gauged, &gamma))
}

/// Draw members of the equilibrium set 𝓔 as `x* · Exp(Nθ)` with θ uniform
/// in `[-spread, spread]^q` over the ker Sᵀ basis N.
pub fn sample_equilibrium_set<R: Rng>(
    structure: &StructureReport,
    anchor: &EquilibriumAnchor,
    count: usize,
    spread: f64,
    rng: &mut R,
) -> Vec<Concentrations> {
    let m = anchor.x_star().len();
    let basis = &structure.moiety_basis;
    (0..count)
        .map(|_| {
            let mut exponent = DVector::<f64>::zeros(m);
            for b in basis {
                let theta: f64 = rng.random_range(-spread..=spread);
                exponent += b * theta;
            }
            let v = DVector::from_fn(m, |i, _| {
                anchor.x_star().as_vector()[i] * exponent[i].exp()
            });
            Concentrations::new(v).expect("positive by construction")
        })
        .collect()
}

/// ψ(x) evaluated against the integer Z of a network; exposed for tests
/// cross-checking `Bv(x) = −L ψ(x)`.
pub fn complex_monomials_of(net: &ReactionNetwork, x: &Concentrations) -> DVector<f64> {
    complex_monomials(&net.complex_matrix(), x.as_vector())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::{gauge_laplacian, vector_field};
    use crate::parse::parse_network;
    use approx::assert_relative_eq;

    fn ab() -> ReactionNetwork {
        parse_network("A -> B ; k = 1\nB -> A ; k = 1").unwrap().network
    }

    fn chain3() -> ReactionNetwork {
        parse_network("X1 <-> X2 ; kf = 2, kr = 3\nX2 <-> X3 ; kf = 5, kr = 7")
            .unwrap()
            .network
    }

    fn cycle3() -> ReactionNetwork {
        parse_network("X1 -> X2 ; k = 1\nX2 -> X3 ; k = 1\nX3 -> X1 ; k = 1")
            .unwrap()
            .network
    }

    #[test]
    fn kernel_vectors_of_fixtures() {
        for (net, expected) in [
            (ab(), vec![1.0, 1.0]),
            (cycle3(), vec![1.0, 1.0, 1.0]),
            (chain3(), vec![1.0, 2.0 / 3.0, 10.0 / 21.0]),
        ] {
            let lap = build_laplacian(&net);
            let structure = build_structure(&net);
            let report = positive_kernel_vector(&lap, &structure.linkage_classes);
            let rho = report.assembled.expect("positive kernel");
            for (a, b) in rho.iter().zip(expected) {
                assert_relative_eq!(*a, b, epsilon = 1e-12);
            }
            assert!(report.classes.iter().all(|cl| cl.strongly_connected));
        }
    }

    #[test]
    fn irreversible_pair_has_no_positive_kernel() {
        let net = parse_network("A -> B ; k = 1").unwrap().network;
        let lap = build_laplacian(&net);
        let structure = build_structure(&net);
        let report = positive_kernel_vector(&lap, &structure.linkage_classes);
        assert!(report.assembled.is_none());
        assert!(!report.classes[0].strongly_connected);

        let verdict = find_complex_equilibrium(&net);
        assert!(!verdict.weakly_reversible);
        assert!(!verdict.complex_balanced);
        assert!(verdict.witness.is_none());
    }

    #[test]
    fn detailed_balanced_chain_witness() {
        let verdict = find_complex_equilibrium(&chain3());
        assert!(verdict.weakly_reversible);
        assert!(verdict.complex_balanced);
        let w = verdict.witness.unwrap();
        // witness is proportional to (1, 2/3, 10/21)
        let base = w.as_vector()[0];
        assert_relative_eq!(w.as_vector()[1] / base, 2.0 / 3.0, epsilon = 1e-10);
        assert_relative_eq!(w.as_vector()[2] / base, 10.0 / 21.0, epsilon = 1e-10);
    }

    #[test]
    fn membership_accepts_uniform_scaling_of_toggle() {
        let net = ab();
        let s = build_structure(&net).stoichiometric;
        let x_star = Concentrations::from_slice(&[1.0, 1.0]).unwrap();
        assert!(equilibrium_membership(&s, &x_star, &x_star));
        let x5 = Concentrations::from_slice(&[5.0, 5.0]).unwrap();
        assert!(equilibrium_membership(&s, &x_star, &x5));
        let off = Concentrations::from_slice(&[1.0, 2.0]).unwrap();
        assert!(!equilibrium_membership(&s, &x_star, &off));
        // and the non-member really is not an equilibrium
        let xdot = vector_field(&net, &off).unwrap();
        assert_relative_eq!(linalg::vec_inf_norm(&xdot), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn newton_splits_toggle_mass_equally() {
        let net = ab();
        let anchor =
            EquilibriumAnchor::new(&net, Concentrations::from_slice(&[1.0, 1.0]).unwrap())
                .unwrap();
        let x0 = Concentrations::from_slice(&[2.0, 0.01]).unwrap();
        let out = unique_equilibrium_in_class(&net, &anchor, &x0).unwrap();
        assert_relative_eq!(out.x1.as_vector()[0], 1.005, epsilon = 1e-10);
        assert_relative_eq!(out.x1.as_vector()[1], 1.005, epsilon = 1e-10);
    }

    #[test]
    fn newton_is_identity_at_anchor_class() {
        let net = chain3();
        let x_star = Concentrations::from_slice(&[1.0, 2.0 / 3.0, 10.0 / 21.0]).unwrap();
        let anchor = EquilibriumAnchor::new(&net, x_star.clone()).unwrap();
        let out = unique_equilibrium_in_class(&net, &anchor, &x_star).unwrap();
        for i in 0..3 {
            assert_relative_eq!(
                out.x1.as_vector()[i],
                x_star.as_vector()[i],
                epsilon = 1e-12
            );
        }
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn lyapunov_closed_forms() {
        let ones = Concentrations::from_slice(&[1.0, 1.0]).unwrap();
        assert_eq!(lyapunov_value(&ones, &ones), 0.0);

        let e = std::f64::consts::E;
        let x = Concentrations::from_slice(&[e, 1.0]).unwrap();
        assert_relative_eq!(lyapunov_value(&x, &ones), 1.0, epsilon = 1e-14);

        let half = Concentrations::from_slice(&[0.5, 1.0]).unwrap();
        assert_relative_eq!(
            lyapunov_value(&half, &ones),
            0.5 * 0.5_f64.ln() + 0.5,
            epsilon = 1e-14
        );
        assert_relative_eq!(lyapunov_value(&half, &ones), 0.153426, epsilon = 1e-6);
    }

    #[test]
    fn lemma1_form_closed_forms() {
        let net = ab();
        let anchor = Concentrations::from_slice(&[1.0, 1.0]).unwrap();
        let g = gauge_laplacian(&net, &anchor).unwrap();

        assert_eq!(lemma1_form(&g, &DVector::zeros(2)), 0.0);
        let shift = DVector::from_element(2, 3.7);
        assert_relative_eq!(lemma1_form(&g, &shift), 0.0, epsilon = 1e-12);

        let gamma = DVector::from_vec(vec![1.0, 0.0]);
        assert_relative_eq!(
            lemma1_form(&g, &gamma),
            std::f64::consts::E - 1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn dissipation_closed_forms() {
        let net = ab();
        let x_star = Concentrations::from_slice(&[1.0, 1.0]).unwrap();
        let g = gauge_laplacian(&net, &x_star).unwrap();

        assert_eq!(lyapunov_dissipation(&net, &g, &x_star).unwrap(), 0.0);

        let x = Concentrations::from_slice(&[2.0, 1.0]).unwrap();
        assert_relative_eq!(
            lyapunov_dissipation(&net, &g, &x).unwrap(),
            -(2.0_f64.ln()),
            epsilon = 1e-12
        );

        // members of the equilibrium set dissipate nothing
        let member = Concentrations::from_slice(&[4.0, 4.0]).unwrap();
        assert!(lyapunov_dissipation(&net, &g, &member).unwrap().abs() < 1e-10);
    }

    #[test]
    fn anchor_rejects_non_equilibrium() {
        let net = chain3();
        let bad = Concentrations::from_slice(&[1.0, 1.0, 1.0]).unwrap();
        assert!(EquilibriumAnchor::new(&net, bad).is_err());
    }
}
