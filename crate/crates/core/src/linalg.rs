//! Small dense linear-algebra helpers shared by the geometry and fitting
//! code: Gram-Schmidt orthonormalization, orthonormal complements, and a
//! cyclic Jacobi eigensolver for symmetric matrices. Everything is
//! deterministic; ties are broken by index and eigenvector signs are
//! normalized.

use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::scalar::Scalar;

/// Orthonormalize `vectors` with modified Gram-Schmidt plus one
/// re-orthogonalization pass. Returns `Err(RankDeficient)` if any input
/// vector's residual against the accepted prefix falls below
/// `RANK_TOL * max_input_norm`.
pub fn gram_schmidt<F: Scalar>(vectors: &[Vector<F>]) -> Result<Vec<Vector<F>>> {
    let max_norm = vectors
        .iter()
        .map(|v| v.norm())
        .fold(F::zero(), |a, b| a.max(b));
    if max_norm == F::zero() {
        return Err(Error::RankDeficient);
    }
    let mut basis: Vec<Vector<F>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = w.dot(b)?;
                w.axpy(-c, b);
            }
        }
        let norm = w.norm();
        if norm <= F::RANK_TOL * max_norm {
            return Err(Error::RankDeficient);
        }
        w.scale_in_place(F::one() / norm);
        basis.push(w);
    }
    Ok(basis)
}

/// Like [`gram_schmidt`], but skips dependent vectors instead of failing, so
/// the result is an orthonormal basis of the span of the inputs.
pub fn gram_schmidt_greedy<F: Scalar>(vectors: &[Vector<F>]) -> Vec<Vector<F>> {
    let max_norm = vectors
        .iter()
        .map(|v| v.norm())
        .fold(F::zero(), |a, b| a.max(b));
    let mut basis: Vec<Vector<F>> = Vec::new();
    if max_norm == F::zero() {
        return basis;
    }
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = w.dot(b).expect("dimensions agree");
                w.axpy(-c, b);
            }
        }
        let norm = w.norm();
        if norm > F::RANK_TOL * max_norm {
            w.scale_in_place(F::one() / norm);
            basis.push(w);
        }
    }
    basis
}

/// Orthonormal basis of the subspace of R^dim orthogonal to every vector in
/// `dirs` (which must themselves be orthonormal). Scans the standard basis in
/// index order, so the result is deterministic.
pub fn orthonormal_complement<F: Scalar>(dirs: &[Vector<F>], dim: usize) -> Vec<Vector<F>> {
    let want = dim - dirs.len();
    let mut basis: Vec<Vector<F>> = Vec::with_capacity(want);
    for axis in 0..dim {
        if basis.len() == want {
            break;
        }
        let mut w = Vector::unit(dim, axis);
        for _ in 0..2 {
            for b in dirs.iter().chain(basis.iter()) {
                let c = w.dot(b).expect("dimensions agree by construction");
                w.axpy(-c, b);
            }
        }
        let norm = w.norm();
        // a standard basis vector already spanned by the accepted set
        if norm <= F::of(1e-6) {
            continue;
        }
        w.scale_in_place(F::one() / norm);
        basis.push(w);
    }
    debug_assert_eq!(basis.len(), want);
    basis
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by descending eigenvalue
/// (ties by original index); `eigenvectors[i]` pairs with `eigenvalues[i]`
/// and each is sign-normalized so its largest-magnitude component is
/// positive.
pub fn jacobi_eigh<F: Scalar>(matrix: &[Vec<F>]) -> (Vec<F>, Vec<Vector<F>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<F>> = matrix.to_vec();
    let mut v: Vec<Vec<F>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { F::one() } else { F::zero() })
                .collect()
        })
        .collect();

    let frob = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(F::zero(), |acc, &x| acc + x * x)
        .sqrt();
    let stop = F::epsilon() * frob.max(F::one());

    for _sweep in 0..64 {
        let mut off = F::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= stop * F::of(1e-3) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (F::of(2.0) * a[p][q]);
                let t = {
                    let sign = if theta < F::zero() { -F::one() } else { F::one() };
                    sign / (theta.abs() + (theta * theta + F::one()).sqrt())
                };
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j][j]
            .partial_cmp(&a[i][i])
            .expect("eigenvalues are finite")
            .then(i.cmp(&j))
    });

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &idx in &order {
        values.push(a[idx][idx]);
        let mut col: Vec<F> = (0..n).map(|k| v[k][idx]).collect();
        let mut best = 0usize;
        for (k, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = k;
            }
        }
        if col[best] < F::zero() {
            for x in col.iter_mut() {
                *x = -*x;
            }
        }
        vectors.push(Vector::from_raw(col));
    }
    (values, vectors)
}

/// Scatter matrix sum of (p - anchor)(p - anchor)^T over the given points.
pub fn scatter_matrix<F: Scalar>(points: &[Vector<F>], anchor: &Vector<F>) -> Vec<Vec<F>> {
    let d = anchor.dim();
    let mut m = vec![vec![F::zero(); d]; d];
    for p in points {
        let diff = p - anchor;
        for i in 0..d {
            let di = diff.coord(i);
            for j in i..d {
                m[i][j] = m[i][j] + di * diff.coord(j);
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    m
}
