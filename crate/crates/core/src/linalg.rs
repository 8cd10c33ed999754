//! Dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// max |U†U - 1| entrywise.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    let n = prod.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { c(1.0) } else { C64::new(0.0, 0.0) };
            dev = dev.max((prod[(i, j)] - target).norm());
        }
    }
    dev
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |a: f64, &s| a.max(s))
}

/// Rotate each column so its largest component is real and positive.
///
/// Makes eigenvector output reproducible regardless of solver phase choices.
pub fn fix_column_phases(v: &mut CMatrix) {
    for mut col in v.column_iter_mut() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (k, z) in col.iter().enumerate() {
            // first component within a hair of the maximum wins
            if z.norm() > best_abs + 1e-9 {
                best_abs = z.norm();
                best = k;
            }
        }
        if best_abs > 0.0 {
            let ph = col[best].conj() / best_abs;
            col.iter_mut().for_each(|z| *z *= ph);
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(sym);
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// exp(-i h t) for Hermitian h.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let n = h.nrows();
    let mut scaled = vecs.clone();
    for (j, &e) in vals.iter().enumerate() {
        let ph = C64::from_polar(1.0, -e * t);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= ph);
    }
    let out = scaled * vecs.adjoint();
    debug_assert_eq!(out.nrows(), n);
    out
}

/// Eigenvalues and orthonormal eigenvectors of a unitary (normal) matrix.
pub fn unitary_eigen(u: &CMatrix) -> Result<(Vec<C64>, CMatrix)> {
    let n = u.nrows();
    let schur = Schur::try_new(u.clone(), 1e-15, 10_000).ok_or(Error::NoConvergence)?;
    let (q, t) = schur.unpack();
    let mut off: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            off = off.max(t[(i, j)].norm());
        }
    }
    if off > 1e-8 {
        return Err(Error::NotUnitary { deviation: off });
    }
    let vals = (0..n).map(|i| t[(i, i)]).collect();
    Ok((vals, q))
}
