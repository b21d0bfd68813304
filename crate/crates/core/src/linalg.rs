//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Largest |a_ij - a_ji| over the matrix.
pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// (A + Aᵀ) / 2. Exactly symmetric, and a no-op on symmetric input.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) / 2.0)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

pub fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.max()
}

/// Reassembles U·diag(max(λ, 0))·Uᵀ and re-symmetrizes. This is the nearest
/// PSD matrix in Frobenius norm.
pub fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.iter().all(|&v| v >= 0.0) {
        return m.clone();
    }
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let u = &eig.eigenvectors;
    symmetrize(&(u * DMatrix::from_diagonal(&clipped) * u.transpose()))
}

pub fn quad_form(m: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
    w.dot(&(m * w))
}

pub fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Spectral norm of a symmetric matrix.
pub fn spectral_norm_sym(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Lowest index attaining the maximum.
pub fn argmax(v: &DVector<f64>) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

pub fn argmin(v: &DVector<f64>) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] < v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_of_indefinite_two_by_two() {
        // eigenpairs ±0.5 on (1, ±1)/√2; keeping the positive one gives 0.25·11ᵀ
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        let p = project_psd(&m);
        for v in p.iter() {
            assert!((v - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn projection_leaves_psd_untouched() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert_eq!(project_psd(&m), m);
    }

    #[test]
    fn argmax_ties_take_lowest_index() {
        let v = DVector::from_vec(vec![1.0, 3.0, 3.0, 2.0]);
        assert_eq!(argmax(&v), 1);
        assert_eq!(argmin(&DVector::from_vec(vec![2.0, 1.0, 1.0])), 1);
    }
}
