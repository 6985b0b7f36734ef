//! Small dense linear-algebra helpers shared by the analysis modules.
//!
//! Ranks follow a singular-value threshold: σ counts toward the rank when
//! σ ≥ max(nrows, ncols) · ε · σ_max. Null-space bases are extracted from
//! symmetric eigendecompositions of the Gram matrices, which keeps the
//! basis orthonormal and works for the wide/tall shapes nalgebra's thin
//! SVD cannot null out directly.

use nalgebra::{DMatrix, DVector};

/// Singular-value cutoff for rank decisions on an `nrows × ncols` matrix.
pub fn rank_threshold(nrows: usize, ncols: usize, sigma_max: f64) -> f64 {
    nrows.max(ncols) as f64 * f64::EPSILON * sigma_max
}

/// Numerical rank via SVD thresholding.
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let sigma_max = sv.max();
    if sigma_max == 0.0 {
        return 0;
    }
    let cut = rank_threshold(m.nrows(), m.ncols(), sigma_max);
    sv.iter().filter(|&&s| s >= cut).count()
}

/// Orthonormal basis of the (right) null space `{ v : Av = 0 }`.
///
/// The dimension comes from the SVD rank of A; the basis vectors are the
/// smallest-eigenvalue eigenvectors of the Gram matrix `AᵀA`. Returned in
/// deterministic order and sign.
pub fn nullspace(a: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let dim = a.ncols() - rank(a);
    let gram = a.transpose() * a;
    gram_null_basis(&gram, dim)
}

/// Orthonormal basis of the left null space `{ u : uᵀA = 0 }` (= ker Aᵀ).
pub fn left_nullspace(a: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let dim = a.nrows() - rank(a);
    let gram = a * a.transpose();
    gram_null_basis(&gram, dim)
}

fn gram_null_basis(gram: &DMatrix<f64>, dim: usize) -> Vec<DVector<f64>> {
    let n = gram.nrows();
    if n == 0 || dim == 0 {
        return Vec::new();
    }
    let eig = gram.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .abs()
            .partial_cmp(&eig.eigenvalues[j].abs())
            .expect("finite eigenvalues")
    });
    order
        .into_iter()
        .take(dim)
        .map(|i| {
            let mut v: DVector<f64> = eig.eigenvectors.column(i).into_owned();
            canonical_sign(&mut v);
            v
        })
        .collect()
}

/// Flip a vector so its largest-magnitude entry is positive.
fn canonical_sign(v: &mut DVector<f64>) {
    let mut lead = 0.0_f64;
    for &x in v.iter() {
        if x.abs() > lead.abs() {
            lead = x;
        }
    }
    if lead < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Minimum-norm least-squares solution of `A x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let eps = rank_threshold(a.nrows(), a.ncols(), sigma_max);
    svd.solve(b, eps).expect("SVD requested with u and v_t")
}

/// 2-norm condition number σ_max / σ_min of a square matrix.
/// Returns `f64::INFINITY` when the matrix is singular to working precision.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let (mut smax, mut smin) = (0.0_f64, f64::INFINITY);
    for &s in sv.iter() {
        smax = smax.max(s);
        smin = smin.min(s);
    }
    if smin <= 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Max-abs-entry of a matrix (used for scale-aware tolerances).
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

/// ∞-norm of a vector.
pub fn vec_inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

/// Submatrix with the given row and column index lists.
pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rank_of_known_matrices() {
        let id = DMatrix::<f64>::identity(4, 4);
        assert_eq!(rank(&id), 4);
        let z = DMatrix::<f64>::zeros(3, 5);
        assert_eq!(rank(&z), 0);
        // rank-1 outer product
        let u = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let outer = &u * u.transpose();
        assert_eq!(rank(&outer), 1);
    }

    #[test]
    fn nullspace_is_orthonormal_and_annihilates() {
        // 2x4 wide matrix: null space has dimension 2, beyond thin-SVD reach.
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let basis = nullspace(&a);
        assert_eq!(basis.len(), 2);
        for (i, v) in basis.iter().enumerate() {
            assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-12);
            assert!(vec_inf_norm(&(&a * v)) < 1e-12);
            for w in basis.iter().skip(i + 1) {
                assert!(v.dot(w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn left_nullspace_matches_transpose() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let left = left_nullspace(&a);
        assert_eq!(left.len(), 1);
        let v = &left[0];
        assert!(vec_inf_norm(&(a.transpose() * v)) < 1e-12);
    }

    #[test]
    fn lstsq_solves_consistent_system() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let x_true = DVector::from_vec(vec![2.0, -1.0]);
        let b = &a * &x_true;
        let x = lstsq(&a, &b);
        assert_relative_eq!(x[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn condition_number_detects_singularity() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_relative_eq!(condition_number(&id), 1.0, epsilon = 1e-12);
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(condition_number(&singular) > 1e14);
    }
}
