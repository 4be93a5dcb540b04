use super::rot::{householder_hessenberg, Rot};
use super::{ensure_finite, fnorm, is_square, CMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Complex Schur form `A = V T V*`.
#[derive(Clone, Debug)]
pub struct Schur {
    pub v: CMatrix,
    pub t: CMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Eigenvalue of the 2x2 block `[[a, b], [c, d]]` closest to `d`.
pub(crate) fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let l1 = d + half + disc;
    let l2 = d + half - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

pub fn schur(a: &CMatrix) -> Result<Schur> {
    if !is_square(a) {
        return Err(Error::Dimension("schur of a non-square matrix".into()));
    }
    ensure_finite(a, "schur input")?;
    let n = a.nrows();
    let (mut v, mut t) = householder_hessenberg(a, None);
    if n <= 1 {
        return Ok(Schur { v, t });
    }
    let anorm = fnorm(&t).max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = t[(l, l - 1)].norm();
            let diag = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            if sub <= eps * diag || sub <= eps * 1e-3 * anorm {
                t[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n {
            return Err(Error::KernelFailure {
                what: "schur",
                rows: n,
                cols: n,
            });
        }
        let mu = if iter % 11 == 10 {
            t[(hi, hi)] + C64::new(t[(hi, hi - 1)].re.abs() * 0.75, t[(hi, hi - 1)].im.abs())
        } else {
            wilkinson(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
        };
        for k in l..hi {
            let (f, g) = if k == l {
                (t[(l, l)] - mu, t[(l + 1, l)])
            } else {
                (t[(k, k - 1)], t[(k + 1, k - 1)])
            };
            let (r, _) = Rot::zeroing(f, g);
            let c0 = if k == l { l } else { k - 1 };
            r.left(&mut t, k, k + 1, c0..n);
            if k > l {
                t[(k + 1, k - 1)] = ZERO;
            }
            let rmax = (k + 2).min(hi);
            r.right_adj(&mut t, k, k + 1, 0..rmax + 1);
            r.right_adj(&mut v, k, k + 1, 0..n);
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = ZERO;
        }
    }
    Ok(Schur { v, t })
}

pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    Ok(schur(a)?.eigenvalues())
}

/// Swaps the diagonal entries at `k`, `k+1` of an upper triangular `t`.
pub(crate) fn swap_schur(t: &mut CMatrix, v: &mut CMatrix, k: usize) {
    let n = t.nrows();
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    let (r, _) = Rot::zeroing(t[(k, k + 1)], t22 - t11);
    r.left(t, k, k + 1, k..n);
    r.right_adj(t, k, k + 1, 0..k + 2);
    r.right_adj(v, k, k + 1, 0..v.nrows());
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
    t[(k + 1, k)] = ZERO;
}

/// Reorders an existing Schur form so that selected eigenvalues lead.
/// Returns the number of selected eigenvalues.
pub(crate) fn reorder_schur(s: &mut Schur, select: impl Fn(C64) -> bool) -> usize {
    let n = s.t.nrows();
    let mut flags: Vec<bool> = (0..n).map(|i| select(s.t[(i, i)])).collect();
    let mut ks = 0;
    for k in 0..n {
        if flags[k] {
            for j in (ks..k).rev() {
                swap_schur(&mut s.t, &mut s.v, j);
                flags.swap(j, j + 1);
            }
            ks += 1;
        }
    }
    ks
}

/// Schur form with the eigenvalues satisfying `select` in the leading block.
/// Returns the form and the size of the leading block.
pub fn schur_ordered(a: &CMatrix, select: impl Fn(C64) -> bool) -> Result<(Schur, usize)> {
    let mut s = schur(a)?;
    let k = reorder_schur(&mut s, select);
    Ok((s, k))
}
