//! Structural analysis of a network: incidence and stoichiometric matrices,
//! linkage classes, deficiency, conserved moieties, and the mass vector.

use nalgebra::{DMatrix, DVector};

use crate::linalg;
use crate::network::ReactionNetwork;
use crate::tol;

/// Everything that can be read off the network structure alone
/// (independent of rate constants and concentrations).
#[derive(Debug, Clone)]
pub struct StructureReport {
    /// Incidence matrix B (c×r): column j has −1 at the substrate and +1
    /// at the product of reaction j.
    pub incidence: DMatrix<i64>,
    /// Stoichiometric matrix S = Z·B (m×r), exact integer arithmetic.
    pub stoichiometric: DMatrix<i64>,
    /// Partition of complex indices into weakly-connected components,
    /// ordered by smallest member, members sorted.
    pub linkage_classes: Vec<Vec<usize>>,
    pub rank_incidence: usize,
    pub rank_stoichiometric: usize,
    /// Deficiency δ = rank(B) − rank(S) ≥ 0.
    pub deficiency: usize,
    /// Orthonormal basis of the left kernel of S: each k satisfies kᵀS = 0,
    /// so kᵀx is conserved along every trajectory.
    pub moiety_basis: Vec<DVector<f64>>,
    /// A strictly positive u with Zᵢᵀu constant on each linkage class,
    /// normalized so the smallest entry is 1; `None` when the search finds
    /// no strictly positive candidate.
    pub mass_vector: Option<DVector<f64>>,
}

impl StructureReport {
    /// Number of linkage classes ℓ.
    pub fn linkage_class_count(&self) -> usize {
        self.linkage_classes.len()
    }

    /// S as f64 for numerical work.
    pub fn stoichiometric_f64(&self) -> DMatrix<f64> {
        self.stoichiometric.map(|a| a as f64)
    }

    /// B as f64 for numerical work.
    pub fn incidence_f64(&self) -> DMatrix<f64> {
        self.incidence.map(|a| a as f64)
    }
}

/// Compute the full structural report. Always succeeds on a valid network.
pub fn build_structure(net: &ReactionNetwork) -> StructureReport {
    let (c, r) = (net.complex_count(), net.reaction_count());

    let mut incidence = DMatrix::<i64>::zeros(c, r);
    for (j, rxn) in net.reactions().iter().enumerate() {
        incidence[(rxn.substrate, j)] = -1;
        incidence[(rxn.product, j)] = 1;
    }
    let stoichiometric = net.complex_matrix() * &incidence;

    let linkage_classes = weakly_connected_components(net);

    let rank_incidence = linalg::rank(&incidence.map(|a| a as f64));
    let rank_stoichiometric = linalg::rank(&stoichiometric.map(|a| a as f64));
    debug_assert!(rank_stoichiometric <= rank_incidence);
    let deficiency = rank_incidence.saturating_sub(rank_stoichiometric);

    let moiety_basis = linalg::left_nullspace(&stoichiometric.map(|a| a as f64));
    let mass_vector = find_mass_vector(net, &linkage_classes);

    StructureReport {
        incidence,
        stoichiometric,
        linkage_classes,
        rank_incidence,
        rank_stoichiometric,
        deficiency,
        moiety_basis,
        mass_vector,
    }
}

/// Weakly-connected components of the complex digraph via traversal.
fn weakly_connected_components(net: &ReactionNetwork) -> Vec<Vec<usize>> {
    let c = net.complex_count();
    let mut neighbors = vec![Vec::new(); c];
    for rxn in net.reactions() {
        neighbors[rxn.substrate].push(rxn.product);
        neighbors[rxn.product].push(rxn.substrate);
    }
    let mut seen = vec![false; c];
    let mut classes = Vec::new();
    for start in 0..c {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut members = Vec::new();
        seen[start] = true;
        while let Some(v) = stack.pop() {
            members.push(v);
            for &w in &neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        classes.push(members);
    }
    classes
}

/// Search `{ u > 0 : Zᵢᵀu ∈ span(1) per linkage class }` for a strictly
/// positive element.
///
/// The constraint set is the null space of the matrix with one row
/// `(Z_α − Z_ref)ᵀ` per non-reference complex of each class. The search
/// scans candidate combinations of an orthonormal null-space basis,
/// starting from the projection of the all-ones vector (which lands on the
/// symmetric representative when one exists) and falling back to signed
/// basis sums.
fn find_mass_vector(net: &ReactionNetwork, classes: &[Vec<usize>]) -> Option<DVector<f64>> {
    let m = net.species_count();
    let z = net.complex_matrix_f64();
    let n_rows: usize = classes.iter().map(|cl| cl.len() - 1).sum();
    let basis = if n_rows == 0 {
        // no constraints: any positive vector works
        vec![]
    } else {
        let mut constraint = DMatrix::<f64>::zeros(n_rows, m);
        let mut row = 0;
        for class in classes {
            let reference = class[0];
            for &alpha in class.iter().skip(1) {
                for i in 0..m {
                    constraint[(row, i)] = z[(i, alpha)] - z[(i, reference)];
                }
                row += 1;
            }
        }
        linalg::nullspace(&constraint)
    };

    if n_rows == 0 {
        return Some(DVector::from_element(m, 1.0));
    }
    if basis.is_empty() {
        return None;
    }

    let ones = DVector::from_element(m, 1.0);
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    // projection of 1 onto the null space
    let mut proj = DVector::zeros(m);
    for b in &basis {
        proj += b * b.dot(&ones);
    }
    candidates.push(proj);
    for b in &basis {
        candidates.push(b.clone());
        candidates.push(-b);
    }
    // signed pair sums, then exhaustive {−1,0,1} scans for small bases
    for (i, a) in basis.iter().enumerate() {
        for b in basis.iter().skip(i + 1) {
            candidates.push(a + b);
            candidates.push(a - b);
            candidates.push(-a + b);
            candidates.push(-a - b);
        }
    }
    if basis.len() <= 8 {
        let p = basis.len();
        let mut signs = vec![-1_i32; p];
        loop {
            let mut v = DVector::zeros(m);
            for (s, b) in signs.iter().zip(&basis) {
                v += b * (*s as f64);
            }
            candidates.push(v);
            let mut k = 0;
            loop {
                if k == p {
                    break;
                }
                signs[k] += 1;
                if signs[k] <= 1 {
                    break;
                }
                signs[k] = -1;
                k += 1;
            }
            if k == p {
                break;
            }
        }
    }

    for v in candidates {
        let max = v.iter().fold(0.0_f64, |acc, &x| acc.max(x));
        if max <= 0.0 {
            continue;
        }
        let min = v.iter().fold(f64::INFINITY, |acc, &x| acc.min(x));
        if min > tol::MASS_VECTOR_POSITIVITY_REL * max {
            return Some(&v / min);
        }
    }
    None
}
