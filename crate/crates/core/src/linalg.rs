//! Small dense linear-algebra helpers shared by the geometric checks:
//! rank decisions, null spaces, orthonormal spans and principal-angle distances.

use nalgebra::{DMatrix, DVector};

fn relative_cutoff(singular: &DVector<f64>, tol: f64) -> f64 {
    let max = singular.iter().cloned().fold(0.0, f64::max);
    tol * max.max(1.0)
}

/// Numerical rank with a cutoff relative to `max(1, σ_max)`.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let cut = relative_cutoff(&sv, tol);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Orthonormal basis of `{x : m x = 0}`.
pub fn nullspace(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let cols = m.ncols();
    if cols == 0 {
        return Vec::new();
    }
    if m.nrows() == 0 {
        return (0..cols)
            .map(|i| DVector::from_fn(cols, |j, _| if i == j { 1.0 } else { 0.0 }))
            .collect();
    }
    let rows: Vec<DVector<f64>> = m.row_iter().map(|r| r.transpose()).collect();
    complement(cols, &orthonormal_span(cols, &rows, tol))
}

/// Extends an orthonormal family to a basis of `R^dim` and returns the added vectors.
pub fn complement(dim: usize, orthonormal: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = orthonormal.to_vec();
    let mut added = Vec::new();
    while basis.len() < dim {
        // Pick the unit vector farthest from the current span.
        let best = (0..dim)
            .map(|i| {
                let mut e = DVector::zeros(dim);
                e[i] = 1.0;
                for _ in 0..2 {
                    for q in &basis {
                        let c = q.dot(&e);
                        e -= q * c;
                    }
                }
                e
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("dim > 0");
        let v = best.normalize();
        basis.push(v.clone());
        added.push(v);
    }
    added
}

/// Columns of a matrix as vectors.
pub fn columns(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    m.column_iter().map(|c| c.into_owned()).collect()
}

pub fn stack_columns(dim: usize, vectors: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

pub fn stack_rows(dim: usize, vectors: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(vectors.len(), dim);
    for (i, v) in vectors.iter().enumerate() {
        m.set_row(i, &v.transpose());
    }
    m
}

/// Orthonormal basis for the span of `vectors` (all of length `dim`).
pub fn orthonormal_span(dim: usize, vectors: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = stack_columns(dim, vectors);
    let qr = m.col_piv_qr();
    let r = qr.r();
    let diag = DVector::from_fn(r.nrows().min(r.ncols()), |i, _| r[(i, i)].abs());
    let cut = relative_cutoff(&diag, tol);
    let rank = diag.iter().take_while(|&&d| d > cut).count();
    let q = qr.q();
    (0..rank).map(|i| q.column(i).into_owned()).collect()
}

/// Distance of `v` from the span of an orthonormal family.
pub fn distance_to_span(v: &DVector<f64>, orthonormal: &[DVector<f64>]) -> f64 {
    let mut r = v.clone();
    for q in orthonormal {
        r -= q * q.dot(v);
    }
    r.norm()
}

/// Largest sine of the principal angles between two subspaces given by
/// orthonormal bases. Returns infinity when the dimensions differ.
pub fn subspace_distance(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let one_way = |from: &[DVector<f64>], to: &[DVector<f64>]| {
        from.iter()
            .map(|v| distance_to_span(v, to))
            .fold(0.0, f64::max)
    };
    // ‖(I - P_a) Q_b‖ column-wise bounds the largest sine; take both directions.
    one_way(b, a).max(one_way(a, b))
}

pub fn determinant(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}
