//! Small-dimension linear algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector};

/// Operator norm (largest singular value) by power iteration on A^T A,
/// tolerance 1e-12. Matrices here are at most d x d with small d, so a
/// handful of deterministic restarts is enough to avoid a start vector
/// orthogonal to the top singular direction.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let ata = a.transpose() * a;
    let mut best = 0.0f64;
    for start in 0..=n {
        let mut v = DVector::from_fn(n, |i, _| if start == n { 1.0 } else if i == start { 1.0 } else { 0.1 });
        let mut prev = 0.0f64;
        for _ in 0..500 {
            let w = &ata * &v;
            let norm = w.norm();
            if norm == 0.0 {
                break;
            }
            v = w / norm;
            let lambda = (v.transpose() * &ata * &v)[(0, 0)];
            if (lambda - prev).abs() <= 1e-12 * lambda.max(1.0) {
                prev = lambda;
                break;
            }
            prev = lambda;
        }
        if prev > best {
            best = prev;
        }
    }
    best.max(0.0).sqrt()
}

/// Orthonormalize the columns of `m` by modified Gram-Schmidt, dropping
/// columns whose residual is below `tol`. Column order is preserved, which
/// keeps downstream results deterministic.
pub fn orthonormalize(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let d = m.nrows();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        for u in &cols {
            let c = u.dot(&v);
            v -= u * c;
        }
        // second pass for numerical orthogonality
        for u in &cols {
            let c = u.dot(&v);
            v -= u * c;
        }
        let norm = v.norm();
        if norm > tol {
            cols.push(v / norm);
        }
    }
    let k = cols.len();
    DMatrix::from_fn(d, k, |i, j| cols[j][i])
}

/// Orthonormal frame of the orthogonal complement of the span of `frame`
/// (columns assumed orthonormal). Deterministic: completes with standard
/// basis vectors in index order.
pub fn complement_frame(d: usize, frame: &DMatrix<f64>) -> DMatrix<f64> {
    let k = frame.ncols();
    let mut cols: Vec<DVector<f64>> = (0..k).map(|j| frame.column(j).into_owned()).collect();
    let mut comp: Vec<DVector<f64>> = Vec::new();
    for i in 0..d {
        let mut v = DVector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 });
        for u in cols.iter().chain(comp.iter()) {
            let c = u.dot(&v);
            v -= u * c;
        }
        for u in cols.iter().chain(comp.iter()) {
            let c = u.dot(&v);
            v -= u * c;
        }
        let norm = v.norm();
        if norm > 1e-9 {
            comp.push(v / norm);
        }
        if cols.len() + comp.len() == d {
            break;
        }
    }
    let out = DMatrix::from_fn(d, comp.len(), |i, j| comp[j][i]);
    debug_assert_eq!(out.ncols(), d - k);
    let _ = &mut cols;
    out
}

/// Singular values of `a`, sorted descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let svd = a.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// 2D rotation matrix.
pub fn rotation2(theta: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}
