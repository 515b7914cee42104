//! Small dense linear algebra: symmetric eigensolver and LU solve.
//!
//! Everything here targets the desk scale of this crate (matrices up to a
//! few hundred rows), so the classic cyclic Jacobi iteration and partially
//! pivoted Gaussian elimination are entirely adequate and keep the crate
//! free of BLAS-style dependencies.

use alloc::vec;
use alloc::vec::Vec;
// Required for float math in pure no_std builds; test builds link std
// through dev-dependencies and shadow the trait, so the lint is silenced.
#[allow(unused_imports)]
use num_traits::Float;

/// Row-major dense symmetric matrix view helpers are written inline; a
/// matrix of dimension `n` is a `Vec<f64>` of length `n * n`.
#[inline]
fn at(a: &[f64], n: usize, i: usize, j: usize) -> f64 {
    a[i * n + j]
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns eigenvalues sorted ascending and the matching eigenvectors as
/// rows of the second result (`vectors[k]` is the eigenvector for
/// `values[k]`). The input is consumed as workspace.
pub fn symmetric_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(a.len(), n * n, "matrix buffer has wrong length");
    if n == 0 {
        return (Vec::new(), Vec::new());
    }

    // v accumulates the product of rotations, row-major.
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = f64::EPSILON * frob.max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += at(&a, n, i, j).powi(2);
            }
        }
        if off.sqrt() <= tol {
            break;
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = at(&a, n, p, q);
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = at(&a, n, p, p);
                let aqq = at(&a, n, q, q);
                // Rotation angle per Golub & Van Loan (8.4).
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = at(&a, n, k, p);
                    let akq = at(&a, n, k, q);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = at(&a, n, p, k);
                    let aqk = at(&a, n, q, k);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = at(&v, n, k, p);
                    let vkq = at(&v, n, k, q);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        at(&a, n, i, i)
            .partial_cmp(&at(&a, n, j, j))
            .expect("non-finite eigenvalue")
    });

    let values: Vec<f64> = order.iter().map(|&i| at(&a, n, i, i)).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..n).map(|row| at(&v, n, row, col)).collect())
        .collect();
    (values, vectors)
}

/// Solves `a x = b` by LU decomposition with partial pivoting.
///
/// Returns `None` when a pivot underflows, i.e. the matrix is numerically
/// singular. `a` and `b` are consumed as workspace.
pub fn solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    if n == 0 {
        return Some(b);
    }

    let scale: f64 = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE) * (n as f64);

    for col in 0..n {
        let mut pivot = col;
        let mut best = at(&a, n, col, col).abs();
        for row in (col + 1)..n {
            let cand = at(&a, n, row, col).abs();
            if cand > best {
                best = cand;
                pivot = row;
            }
        }
        if best <= tiny {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let d = at(&a, n, col, col);
        for row in (col + 1)..n {
            let f = at(&a, n, row, col) / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * at(&a, n, col, k);
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut x = b[col];
        for k in (col + 1)..n {
            x -= at(&a, n, col, k) * b[k];
        }
        b[col] = x / at(&a, n, col, col);
    }
    Some(b)
}

/// Orthonormal basis of the hyperplane orthogonal to the all-ones vector,
/// returned as `n - 1` rows of length `n` (the Helmert basis).
///
/// Restricting a Hessian to this subspace removes the rotation-gauge kernel
/// direction shared by every state of the model.
pub fn ones_complement_basis(n: usize) -> Vec<Vec<f64>> {
    assert!(n >= 1);
    let mut basis = Vec::with_capacity(n - 1);
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        let mut row = vec![0.0f64; n];
        for item in row.iter_mut().take(k) {
            *item = 1.0 / norm;
        }
        row[k] = -(k as f64) / norm;
        basis.push(row);
    }
    basis
}

/// Projects a symmetric `n × n` matrix onto the complement of the all-ones
/// direction: returns `Q H Qᵀ` with `Q` the [`ones_complement_basis`],
/// an `(n-1) × (n-1)` row-major buffer.
pub fn restrict_to_ones_complement(h: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(h.len(), n * n);
    if n <= 1 {
        return Vec::new();
    }
    let q = ones_complement_basis(n);
    let m = n - 1;
    // hq[j][b] = (H qᵇ)_j
    let mut hq = vec![0.0f64; n * m];
    for j in 0..n {
        for (b, qb) in q.iter().enumerate() {
            let mut acc = 0.0;
            for k in 0..n {
                acc += h[j * n + k] * qb[k];
            }
            hq[j * m + b] = acc;
        }
    }
    let mut out = vec![0.0f64; m * m];
    for (a_idx, qa) in q.iter().enumerate() {
        for b in 0..m {
            let mut acc = 0.0;
            for j in 0..n {
                acc += qa[j] * hq[j * m + b];
            }
            out[a_idx * m + b] = acc;
        }
    }
    // Symmetrize away rounding asymmetry.
    for i in 0..m {
        for j in (i + 1)..m {
            let s = 0.5 * (out[i * m + j] + out[j * m + i]);
            out[i * m + j] = s;
            out[j * m + i] = s;
        }
    }
    out
}

/// Lifts a vector expressed in the [`ones_complement_basis`] back to length
/// `n` coordinates.
pub fn lift_from_ones_complement(w: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(w.len(), n - 1);
    let q = ones_complement_basis(n);
    let mut out = vec![0.0f64; n];
    for (b, qb) in q.iter().enumerate() {
        for j in 0..n {
            out[j] += w[b] * qb[j];
        }
    }
    out
}
