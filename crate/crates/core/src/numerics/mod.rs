//! Dense complex linear algebra kernels.
//!
//! SVD, LU and Hermitian eigendecompositions come from nalgebra. The Schur and
//! QZ iterations with eigenvalue reordering, and the Sylvester/Lyapunov
//! solvers built on them, live here because nalgebra does not expose ordered
//! complex Schur forms or generalized Schur forms.

mod eqn;
mod qz;
mod rot;
mod schur;

pub use eqn::{solve_lyapunov, solve_sylvester};
pub use qz::{hessenberg_triangular, qz_iterate, qz_ordered, reorder_pencil, GeneralizedSchur};
pub use rot::{householder_hessenberg, Rot};
pub use schur::{eigenvalues, schur, schur_ordered, Schur};

use crate::error::{Error, Result};
use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Tolerances shared by the staircase, factorization and reduction steps.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Relative rank tolerance for staircase compressions.
    pub rank: f64,
    /// Relative distance from the imaginary axis below which a zero is rejected.
    pub axis: f64,
    /// Relative threshold for dropping states in `minimal_reduce`.
    pub minimal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-10,
            axis: 1e-8,
            minimal: 1e-10,
        }
    }
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Builds a complex matrix from row-major entries, rejecting NaN and Inf.
pub fn cmatrix(rows: usize, cols: usize, entries: &[C64]) -> Result<CMatrix> {
    if entries.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "{} entries for a {}x{} matrix",
            entries.len(),
            rows,
            cols
        )));
    }
    let m = CMatrix::from_row_slice(rows, cols, entries);
    ensure_finite(&m, "matrix")?;
    Ok(m)
}

/// Real matrix from row-major entries.
pub fn rmatrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, &entries.iter().map(|&x| c(x)).collect::<Vec<_>>())
}

pub fn ensure_finite(m: &CMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn is_square(m: &CMatrix) -> bool {
    m.nrows() == m.ncols()
}

/// Frobenius norm.
pub fn fnorm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm (largest singular value).
pub fn norm2(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n1, m1) = a.shape();
    let (n2, m2) = b.shape();
    let mut out = CMatrix::zeros(n1 + n2, m1 + m2);
    out.view_mut((0, 0), (n1, m1)).copy_from(a);
    out.view_mut((n1, m1), (n2, m2)).copy_from(b);
    out
}

/// Singular value decomposition `m = U diag(S) V*`, S descending.
pub fn svd(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    ensure_finite(m, "svd input")?;
    let (r, cols) = m.shape();
    let k = r.min(cols);
    if k == 0 {
        return Ok((CMatrix::identity(r, r), vec![], CMatrix::identity(cols, cols)));
    }
    let dec = nalgebra::linalg::SVD::try_new(m.clone(), true, true, 1e-15, 10_000).ok_or(
        Error::KernelFailure {
            what: "svd",
            rows: r,
            cols,
        },
    )?;
    let u = dec.u.ok_or(Error::KernelFailure {
        what: "svd",
        rows: r,
        cols,
    })?;
    let vt = dec.v_t.ok_or(Error::KernelFailure {
        what: "svd",
        rows: r,
        cols,
    })?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| dec.singular_values[j].total_cmp(&dec.singular_values[i]));
    let s: Vec<f64> = order.iter().map(|&i| dec.singular_values[i]).collect();
    let u = CMatrix::from_fn(r, k, |i, j| u[(i, order[j])]);
    let v = CMatrix::from_fn(cols, k, |i, j| vt[(order[j], i)].conj());
    Ok((u, s, v))
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol` times the largest.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s = singular_values(m);
    let top = s[0];
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitian_part(m);
    let n = h.nrows();
    let dec = nalgebra::linalg::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| dec.eigenvalues[i].total_cmp(&dec.eigenvalues[j]));
    let vals = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |i, j| dec.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Square-root factor `L` with `L L* = m` for a Hermitian PSD matrix.
/// Eigenvalues below `clip` times the largest are set to zero.
pub fn psd_sqrt_factor(m: &CMatrix, clip: f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let top = vals.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let mut l = vecs;
    for (j, &v) in vals.iter().enumerate() {
        let s = if v > clip * top { v.sqrt() } else { 0.0 };
        l.column_mut(j).scale_mut(s);
    }
    l
}

/// Solves `m x = rhs` by LU, failing on numerically singular `m`.
pub fn solve(m: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    let n = m.nrows();
    if n == 0 {
        return Ok(rhs.clone());
    }
    let lu = m.clone().full_piv_lu();
    let u = lu.u();
    let mut dmax: f64 = 0.0;
    let mut dmin = f64::INFINITY;
    for i in 0..n {
        let d = u[(i, i)].norm();
        dmax = dmax.max(d);
        dmin = dmin.min(d);
    }
    if !(dmin > 1e-14 * dmax) {
        return Err(Error::SingularEquation(format!(
            "pivot ratio {:e} in {}x{} solve",
            dmin / dmax,
            n,
            n
        )));
    }
    let x = lu.solve(rhs).ok_or_else(|| Error::SingularEquation("lu solve".into()))?;
    ensure_finite(&x, "solve")?;
    Ok(x)
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    solve(m, &CMatrix::identity(m.nrows(), m.nrows()))
}

/// Orthonormal complement: columns completing `q` (orthonormal columns) to a unitary matrix.
pub fn unitary_completion(q: &CMatrix) -> CMatrix {
    let n = q.nrows();
    let k = q.ncols();
    let mut basis = q.clone();
    for e in 0..n {
        if basis.ncols() == n {
            break;
        }
        let mut v = CMatrix::zeros(n, 1);
        v[(e, 0)] = ONE;
        for _ in 0..2 {
            let proj = basis.adjoint() * &v;
            v -= &basis * proj;
        }
        let nv = fnorm(&v);
        if nv > 1e-8 {
            v.unscale_mut(nv);
            let k = basis.ncols();
            basis = basis.insert_column(k, ZERO);
            let last = basis.ncols() - 1;
            basis.set_column(last, &v.column(0));
        }
    }
    basis.columns(k, n - k).into_owned()
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        random_matrix(rng, n, n).qr().q()
    }
}
