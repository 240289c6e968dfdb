//! Small dense vector helpers shared across modules.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|v| v * s).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = 1.0;
    e
}

/// Gram-Schmidt; returns `None` if the vectors are linearly dependent.
pub fn orthonormalize(vs: &[Vec<f64>], tol: f64) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let scale_ref = norm2(v).max(1.0);
        let mut u = v.clone();
        for q in &out {
            let c = dot(&u, q);
            u = axpy(&u, -c, q);
        }
        let n = norm2(&u);
        if n <= tol * scale_ref {
            return None;
        }
        out.push(scale(&u, 1.0 / n));
    }
    Some(out)
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal set `q` in R^d, built from the standard basis in order.
pub fn complement_basis(q: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    let target = d - q.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(target);
    for i in 0..d {
        if out.len() == target {
            break;
        }
        let mut u = unit(d, i);
        for _ in 0..2 {
            for b in q.iter().chain(out.iter()) {
                let c = dot(&u, b);
                u = axpy(&u, -c, b);
            }
        }
        let n = norm2(&u);
        if n > 1e-8 {
            out.push(scale(&u, 1.0 / n));
        }
    }
    out
}

/// Numerical rank of a set of row vectors.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    if rows.is_empty() || rows[0].is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    m.rank(tol)
}

/// Solve the square system `a x = b`.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let rhs = DVector::from_column_slice(b);
    m.lu().solve(&rhs).map(|x| x.iter().copied().collect())
}

/// A unit vector spanning part of the null space of the row set, if any.
pub fn null_vector(rows: &[Vec<f64>], ncols: usize, tol: f64) -> Option<Vec<f64>> {
    // Pad to a square-or-tall matrix so the SVD exposes all right singular vectors.
    let nr = rows.len().max(ncols);
    let m = DMatrix::from_fn(nr, ncols, |i, j| if i < rows.len() { rows[i][j] } else { 0.0 });
    let svd = m.svd(false, true);
    let vt = svd.v_t?;
    let (idx, &smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
    if smin > tol {
        return None;
    }
    Some(vt.row(idx).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_of_second_axis_is_first_axis() {
        let q = vec![vec![0.0, 1.0]];
        let u = complement_basis(&q, 2);
        assert_eq!(u, vec![vec![1.0, 0.0]]);
    }

    #[test]
    fn dependent_vectors_rejected() {
        assert!(orthonormalize(&[vec![1.0, 1.0], vec![2.0, 2.0]], 1e-10).is_none());
    }

    #[test]
    fn null_vector_of_rank_deficient_rows() {
        let rows = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]];
        let v = null_vector(&rows, 3, 1e-9).unwrap();
        assert!(dot(&rows[0], &v).abs() < 1e-12 && dot(&rows[1], &v).abs() < 1e-12);
        assert!((norm2(&v) - 1.0).abs() < 1e-12);
    }
}
