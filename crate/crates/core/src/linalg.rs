//! Realification of C^N and small dense helpers.
//!
//! C^N is identified with R^{2N} by interleaving real and imaginary parts,
//! `(x_0, y_0, x_1, y_1, ...)`. Multiplication by i is the block matrix `J`
//! and the Euclidean inner product is `Re <a, b>`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::weights::Weights;

pub fn to_real(z: &[Complex64]) -> DVector<f64> {
    DVector::from_iterator(2 * z.len(), z.iter().flat_map(|c| [c.re, c.im]))
}

pub fn to_complex(x: &DVector<f64>) -> Vec<Complex64> {
    x.as_slice().chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// Realified complex matrix.
pub fn realify(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (r, c) = a.shape();
    let mut m = DMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = a[(i, j)];
            m[(2 * i, 2 * j)] = z.re;
            m[(2 * i, 2 * j + 1)] = -z.im;
            m[(2 * i + 1, 2 * j)] = z.im;
            m[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    m
}

/// Complex matrix of a real matrix commuting with J.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    let (r, c) = (m.nrows() / 2, m.ncols() / 2);
    DMatrix::from_fn(r, c, |i, j| Complex64::new(m[(2 * i, 2 * j)], m[(2 * i + 1, 2 * j)]))
}

/// Multiplication by i on C^n.
pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(2 * k, 2 * k + 1)] = -1.0;
        m[(2 * k + 1, 2 * k)] = 1.0;
    }
    m
}

/// Block-diagonal rotation by the given angles (radians) on each complex
/// coordinate.
pub fn diag_rotation(angles: &[f64]) -> DMatrix<f64> {
    let n = angles.len();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (k, &th) in angles.iter().enumerate() {
        let (s, c) = th.sin_cos();
        m[(2 * k, 2 * k)] = c;
        m[(2 * k, 2 * k + 1)] = -s;
        m[(2 * k + 1, 2 * k)] = s;
        m[(2 * k + 1, 2 * k + 1)] = c;
    }
    m
}

/// Realified rho_q(t), optionally repeated over n blocks (weights q^n).
pub fn rho(w: &Weights, t: f64) -> DMatrix<f64> {
    let angles: Vec<f64> = w.as_slice().iter().map(|&q| 2.0 * PI * q as f64 * t).collect();
    diag_rotation(&angles)
}

/// Infinitesimal generator of rho_q: d/dt rho(t) = 2 pi G rho(t).
pub fn rho_generator(w: &Weights) -> DMatrix<f64> {
    let n = w.len();
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    for (k, &q) in w.as_slice().iter().enumerate() {
        g[(2 * k, 2 * k + 1)] = -(q as f64);
        g[(2 * k + 1, 2 * k)] = q as f64;
    }
    g
}

/// `max |A G - G A|` for `G = rho_generator(w)`, using the 2x2 block
/// structure of G instead of dense products.
pub fn generator_commutator_residual(a: &DMatrix<f64>, w: &Weights) -> f64 {
    let q: Vec<f64> = w.as_slice().iter().map(|&x| x as f64).collect();
    let n = a.nrows();
    let m = a.as_slice();
    let at = |i: usize, j: usize| m[i + j * n];
    // (A G)[i, 2k] = q_k A[i, 2k+1], (A G)[i, 2k+1] = -q_k A[i, 2k];
    // (G A)[2k, j] = -q_k A[2k+1, j], (G A)[2k+1, j] = q_k A[2k, j].
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let (qc, jp, sc) = if j % 2 == 0 { (q[j / 2], j + 1, 1.0) } else { (q[j / 2], j - 1, -1.0) };
        for i in (0..n).step_by(2) {
            let qr = q[i / 2];
            let ag0 = sc * qc * at(i, jp);
            let ag1 = sc * qc * at(i + 1, jp);
            let ga0 = -qr * at(i + 1, j);
            let ga1 = qr * at(i, j);
            worst = worst.max((ag0 - ga0).abs()).max((ag1 - ga1).abs());
        }
    }
    worst
}

pub fn symplectic_residual(m: &DMatrix<f64>) -> f64 {
    let j = j_matrix(m.nrows() / 2);
    (m.transpose() * &j * m - j).amax()
}

pub fn commutator_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a * b - b * a).amax()
}

pub fn symmetry_residual(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for j in 0..m.ncols() {
        for i in 0..j {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

pub fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        m.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(b);
        off += b.nrows();
    }
    m
}

/// Connected components of the sparsity graph of a symmetric matrix.
/// Entries with magnitude at most `cut` are treated as zero.
pub fn components(m: &DMatrix<f64>, cut: f64) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if m[(i, j)].abs() > cut || m[(j, i)].abs() > cut {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

pub fn submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Eigenvalues of a symmetric matrix, computed block by block over the
/// connected components of its sparsity pattern.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let comps = components(m, 0.0);
    let mut out = Vec::with_capacity(m.nrows());
    for c in comps {
        if c.len() == 1 {
            out.push(m[(c[0], c[0])]);
        } else {
            let sub = submatrix(m, &c);
            out.extend(sub.symmetric_eigenvalues().iter().copied());
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Orthonormal basis (columns) of the orthogonal complement of the column
/// span of `a` in R^n.
pub fn orthogonal_complement(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let svd = a.clone().svd(true, false);
    let u = svd.u.unwrap();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-12).count();
    // Complete u's first `rank` columns to a basis with Gram-Schmidt over e_i.
    let mut basis: Vec<DVector<f64>> = (0..rank).map(|k| u.column(k).into_owned()).collect();
    let mut comp = Vec::new();
    for i in 0..n {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        for b in basis.iter() {
            let p = b.dot(&v);
            v -= b * p;
        }
        for b in basis.iter() {
            let p = b.dot(&v);
            v -= b * p;
        }
        let nv = v.norm();
        if nv > 1e-8 {
            v /= nv;
            basis.push(v.clone());
            comp.push(v);
        }
        if basis.len() == n {
            break;
        }
    }
    DMatrix::from_columns(&comp)
}
