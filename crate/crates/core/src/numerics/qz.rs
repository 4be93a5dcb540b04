use super::rot::Rot;
use super::schur::wilkinson;
use super::{ensure_finite, fnorm, is_square, CMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Generalized Schur form of the pencil `λE − N`: `Q E Z = t`, `Q N Z = s`.
#[derive(Clone, Debug)]
pub struct GeneralizedSchur {
    pub q: CMatrix,
    pub z: CMatrix,
    /// Transformed `N`.
    pub s: CMatrix,
    /// Transformed `E`.
    pub t: CMatrix,
}

impl GeneralizedSchur {
    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    /// Threshold below which a diagonal entry of `t` counts as zero.
    pub fn infinite_tol(&self) -> f64 {
        let n = self.dim().max(1) as f64;
        n * f64::EPSILON * fnorm(&self.t).max(f64::MIN_POSITIVE)
    }

    /// Generalized eigenvalue at position `i`; `None` marks an infinite one.
    pub fn eigenvalue(&self, i: usize, inf_tol: f64) -> Option<C64> {
        let beta = self.t[(i, i)];
        if beta.norm() <= inf_tol {
            None
        } else {
            Some(self.s[(i, i)] / beta)
        }
    }

    pub fn eigenvalues(&self) -> Vec<Option<C64>> {
        let tol = self.infinite_tol();
        (0..self.dim()).map(|i| self.eigenvalue(i, tol)).collect()
    }
}

/// Reduces `(E, N)` so that `N` is upper Hessenberg and `E` upper triangular.
pub fn hessenberg_triangular(e: &CMatrix, n: &CMatrix) -> Result<GeneralizedSchur> {
    if !is_square(e) || !is_square(n) || e.nrows() != n.nrows() {
        return Err(Error::Dimension("pencil matrices must be square and equal".into()));
    }
    ensure_finite(e, "pencil E")?;
    ensure_finite(n, "pencil N")?;
    let dim = e.nrows();
    let qr = e.clone().qr();
    let q0 = qr.q();
    let mut t = qr.r();
    let mut s = q0.adjoint() * n;
    let mut q = q0.adjoint();
    let mut z = CMatrix::identity(dim, dim);
    for j in 0..dim.saturating_sub(2) {
        for i in (j + 2..dim).rev() {
            let (r, _) = Rot::zeroing(s[(i - 1, j)], s[(i, j)]);
            r.left(&mut s, i - 1, i, j..dim);
            r.left(&mut t, i - 1, i, i - 1..dim);
            r.left(&mut q, i - 1, i, 0..dim);
            s[(i, j)] = ZERO;
            let rc = Rot::zeroing_right(t[(i, i - 1)], t[(i, i)]);
            rc.right(&mut s, i - 1, i, 0..dim);
            rc.right(&mut t, i - 1, i, 0..i + 1);
            rc.right(&mut z, i - 1, i, 0..dim);
            t[(i, i - 1)] = ZERO;
        }
    }
    Ok(GeneralizedSchur { q, z, s, t })
}

/// Single-shift QZ iteration on the diagonal window `lo..=hi` of a
/// Hessenberg-triangular pencil. Entries outside the window are updated so the
/// whole pencil stays triangular.
pub fn qz_iterate(gs: &mut GeneralizedSchur, lo: usize, hi: usize) -> Result<()> {
    let dim = gs.dim();
    if dim == 0 || hi <= lo {
        return Ok(());
    }
    let window = |m: &CMatrix| -> f64 {
        let mut acc = 0.0;
        for i in lo..=hi {
            for j in lo.max(i.saturating_sub(1))..=hi {
                acc += m[(i, j)].norm_sqr();
            }
        }
        acc.sqrt()
    };
    let eps = f64::EPSILON;
    let atol = (eps * window(&gs.s)).max(f64::MIN_POSITIVE);
    let btol = (eps * window(&gs.t)).max(f64::MIN_POSITIVE);
    let mut ihi = hi;
    let mut iter = 0usize;
    let mut total = 0usize;
    while ihi > lo {
        let mut l = ihi;
        while l > lo {
            if gs.s[(l, l - 1)].norm() <= atol {
                gs.s[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == ihi {
            ihi -= 1;
            iter = 0;
            continue;
        }
        if let Some(j) = (l..=ihi).rev().find(|&j| gs.t[(j, j)].norm() <= btol) {
            gs.t[(j, j)] = ZERO;
            chase_infinite(gs, j, l, ihi);
            continue;
        }
        iter += 1;
        total += 1;
        if total > 60 * (hi - lo + 1) {
            return Err(Error::KernelFailure {
                what: "qz",
                rows: dim,
                cols: dim,
            });
        }
        let mu = shift(gs, ihi, iter);
        sweep(gs, l, ihi, mu);
    }
    for j in lo..=hi {
        for i in j + 1..dim {
            gs.s[(i, j)] = ZERO;
            gs.t[(i, j)] = ZERO;
        }
    }
    Ok(())
}

fn shift(gs: &GeneralizedSchur, ihi: usize, iter: usize) -> C64 {
    let h = |i: usize, j: usize| gs.s[(i, j)];
    let t = |i: usize, j: usize| gs.t[(i, j)];
    let k = ihi - 1;
    if iter % 10 == 0 {
        return h(ihi, ihi) / t(ihi, ihi) + C64::new((h(ihi, k) / t(k, k)).norm() * 0.75, 0.0);
    }
    let (t11, t12, t22) = (t(k, k), t(k, ihi), t(ihi, ihi));
    let m11 = h(k, k) / t11;
    let m12 = h(k, ihi) / t22 - h(k, k) * t12 / (t11 * t22);
    let m21 = h(ihi, k) / t11;
    let m22 = h(ihi, ihi) / t22 - h(ihi, k) * t12 / (t11 * t22);
    wilkinson(m11, m12, m21, m22)
}

fn sweep(gs: &mut GeneralizedSchur, l: usize, ihi: usize, mu: C64) {
    let dim = gs.dim();
    for k in l..ihi {
        let r = if k == l {
            let (r, _) = Rot::zeroing(gs.s[(l, l)] - mu * gs.t[(l, l)], gs.s[(l + 1, l)]);
            r.left(&mut gs.s, l, l + 1, l..dim);
            r
        } else {
            let (r, _) = Rot::zeroing(gs.s[(k, k - 1)], gs.s[(k + 1, k - 1)]);
            r.left(&mut gs.s, k, k + 1, k - 1..dim);
            gs.s[(k + 1, k - 1)] = ZERO;
            r
        };
        r.left(&mut gs.t, k, k + 1, k..dim);
        r.left(&mut gs.q, k, k + 1, 0..dim);
        let rc = Rot::zeroing_right(gs.t[(k + 1, k)], gs.t[(k + 1, k + 1)]);
        rc.right(&mut gs.s, k, k + 1, 0..(k + 3).min(ihi + 1));
        rc.right(&mut gs.t, k, k + 1, 0..k + 2);
        rc.right(&mut gs.z, k, k + 1, 0..dim);
        gs.t[(k + 1, k)] = ZERO;
    }
}

/// Moves a zero at `t[j,j]` down to `t[ihi,ihi]` and deflates it.
fn chase_infinite(gs: &mut GeneralizedSchur, j: usize, l: usize, ihi: usize) {
    let dim = gs.dim();
    for jj in j..ihi {
        let (r, _) = Rot::zeroing(gs.t[(jj, jj + 1)], gs.t[(jj + 1, jj + 1)]);
        r.left(&mut gs.t, jj, jj + 1, jj..dim);
        r.left(&mut gs.s, jj, jj + 1, jj.saturating_sub(1)..dim);
        r.left(&mut gs.q, jj, jj + 1, 0..dim);
        gs.t[(jj + 1, jj + 1)] = ZERO;
        gs.t[(jj + 1, jj)] = ZERO;
        if jj > l {
            let rc = Rot::zeroing_right(gs.s[(jj + 1, jj - 1)], gs.s[(jj + 1, jj)]);
            rc.right(&mut gs.s, jj - 1, jj, 0..jj + 2);
            rc.right(&mut gs.t, jj - 1, jj, 0..jj + 1);
            rc.right(&mut gs.z, jj - 1, jj, 0..dim);
            gs.s[(jj + 1, jj - 1)] = ZERO;
            gs.t[(jj, jj - 1)] = ZERO;
        }
    }
    let rc = Rot::zeroing_right(gs.s[(ihi, ihi - 1)], gs.s[(ihi, ihi)]);
    rc.right(&mut gs.s, ihi - 1, ihi, 0..ihi + 1);
    rc.right(&mut gs.t, ihi - 1, ihi, 0..ihi + 1);
    rc.right(&mut gs.z, ihi - 1, ihi, 0..dim);
    gs.s[(ihi, ihi - 1)] = ZERO;
    gs.t[(ihi, ihi - 1)] = ZERO;
}

/// Swaps the generalized eigenvalues at positions `k`, `k+1` of a triangular pencil.
pub(crate) fn swap_pencil(gs: &mut GeneralizedSchur, k: usize) {
    let dim = gs.dim();
    let (s11, s12, s22) = (gs.s[(k, k)], gs.s[(k, k + 1)], gs.s[(k + 1, k + 1)]);
    let (t11, t12, t22) = (gs.t[(k, k)], gs.t[(k, k + 1)], gs.t[(k + 1, k + 1)]);
    let x0 = t22 * s12 - s22 * t12;
    let x1 = -(t22 * s11 - s22 * t11);
    if x0 == ZERO && x1 == ZERO {
        return;
    }
    let (rz, _) = Rot::zeroing(x0, x1);
    rz.right_adj(&mut gs.s, k, k + 1, 0..k + 2);
    rz.right_adj(&mut gs.t, k, k + 1, 0..k + 2);
    rz.right_adj(&mut gs.z, k, k + 1, 0..dim);
    let sv = (gs.s[(k, k)], gs.s[(k + 1, k)]);
    let tv = (gs.t[(k, k)], gs.t[(k + 1, k)]);
    let use_s = sv.0.norm_sqr() + sv.1.norm_sqr() >= tv.0.norm_sqr() + tv.1.norm_sqr();
    let (f, g) = if use_s { sv } else { tv };
    let (rq, _) = Rot::zeroing(f, g);
    rq.left(&mut gs.s, k, k + 1, k..dim);
    rq.left(&mut gs.t, k, k + 1, k..dim);
    rq.left(&mut gs.q, k, k + 1, 0..dim);
    gs.s[(k + 1, k)] = ZERO;
    gs.t[(k + 1, k)] = ZERO;
}

/// Moves the eigenvalues at positions `start..` that satisfy `select` to
/// `start..start+count` by adjacent swaps; returns `count`. The predicate sees
/// `None` for infinite eigenvalues.
pub fn reorder_pencil(
    gs: &mut GeneralizedSchur,
    start: usize,
    select: impl Fn(Option<C64>) -> bool,
) -> usize {
    let dim = gs.dim();
    let tol = gs.infinite_tol();
    let mut flags: Vec<bool> = (0..dim).map(|i| select(gs.eigenvalue(i, tol))).collect();
    let mut ks = start;
    for k in start..dim {
        if flags[k] {
            for j in (ks..k).rev() {
                swap_pencil(gs, j);
                flags.swap(j, j + 1);
            }
            ks += 1;
        }
    }
    ks - start
}

/// Ordered generalized Schur decomposition of `λe − n`.
pub fn qz_ordered(
    e: &CMatrix,
    n: &CMatrix,
    select: impl Fn(Option<C64>) -> bool,
) -> Result<(GeneralizedSchur, usize)> {
    let mut gs = hessenberg_triangular(e, n)?;
    let dim = gs.dim();
    if dim > 0 {
        qz_iterate(&mut gs, 0, dim - 1)?;
    }
    let tol = gs.infinite_tol();
    let snorm = fnorm(&gs.s);
    for i in 0..dim {
        if gs.t[(i, i)].norm() <= tol && gs.s[(i, i)].norm() <= dim as f64 * f64::EPSILON * snorm {
            return Err(Error::DegeneratePencil(format!("zero pair at position {i}")));
        }
    }
    let k = reorder_pencil(&mut gs, 0, select);
    Ok((gs, k))
}

#[cfg(test)]
mod tests {
    use super::super::testing::*;
    use super::super::{c, rmatrix};
    use super::*;

    fn check(e: &CMatrix, n: &CMatrix, gs: &GeneralizedSchur) {
        let d = e.nrows();
        let id = CMatrix::identity(d, d);
        assert!(fnorm(&(gs.q.adjoint() * &gs.q - &id)) < 1e-12);
        assert!(fnorm(&(gs.z.adjoint() * &gs.z - &id)) < 1e-12);
        assert!(fnorm(&(&gs.q * e * &gs.z - &gs.t)) < 1e-12 * fnorm(e).max(1.0));
        assert!(fnorm(&(&gs.q * n * &gs.z - &gs.s)) < 1e-12 * fnorm(n).max(1.0));
        for j in 0..d {
            for i in j + 1..d {
                assert_eq!(gs.s[(i, j)], ZERO);
                assert_eq!(gs.t[(i, j)], ZERO);
            }
        }
    }

    #[test]
    fn diagonal_pencil_order() {
        let e = CMatrix::identity(2, 2);
        let n = rmatrix(2, 2, &[-2.0, 0.0, 0.0, 2.0]);
        let (gs, k) = qz_ordered(&e, &n, |z| z.is_some_and(|z| z.re > 0.0)).unwrap();
        assert_eq!(k, 1);
        let ev = gs.eigenvalues();
        assert!((ev[0].unwrap() - c(2.0)).norm() < 1e-14);
        assert!((ev[1].unwrap() - c(-2.0)).norm() < 1e-14);
        check(&e, &n, &gs);
    }

    #[test]
    fn infinite_eigenvalue_signaled() {
        let e = rmatrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let n = CMatrix::identity(2, 2);
        let (gs, _) = qz_ordered(&e, &n, |_| false).unwrap();
        let ev = gs.eigenvalues();
        assert_eq!(ev.iter().filter(|z| z.is_none()).count(), 1);
        let fin: Vec<C64> = ev.iter().flatten().copied().collect();
        assert!((fin[0] - c(1.0)).norm() < 1e-14);
        check(&e, &n, &gs);
    }

    #[test]
    fn random_pencils_with_infinite_part() {
        let mut r = rng(21);
        for dim in [3, 6, 12, 40] {
            let mut e = random_matrix(&mut r, dim, dim);
            // rank-deficient E: two infinite eigenvalues
            let u = random_unitary(&mut r, dim);
            e = &e * u.columns(0, dim - 2) * u.columns(0, dim - 2).adjoint();
            let n = random_matrix(&mut r, dim, dim);
            let (gs, k) = qz_ordered(&e, &n, |z| z.is_some_and(|z| z.re < 0.0)).unwrap();
            check(&e, &n, &gs);
            let ev = gs.eigenvalues();
            assert_eq!(ev.iter().filter(|z| z.is_none()).count(), 2);
            assert!(ev[..k].iter().all(|z| z.unwrap().re < 0.0));
            assert!(ev[k..].iter().all(|z| z.map_or(true, |z| z.re >= 0.0)));
            // eigenvalues agree with those of E^{-1}N restricted: check det(λE − N) ≈ 0
            for z in ev.iter().flatten() {
                let m = e.map(|x| x * z) - &n;
                let s = crate::numerics::singular_values(&m);
                assert!(s[s.len() - 1] < 1e-9 * s[0], "{s:?}");
            }
        }
    }

    #[test]
    fn reordering_moves_finite_past_infinite() {
        let mut r = rng(22);
        let dim = 8;
        let mut e = CMatrix::identity(dim, dim);
        e[(0, 0)] = ZERO;
        e[(1, 1)] = ZERO;
        let n = random_matrix(&mut r, dim, dim);
        let (mut gs, _) = qz_ordered(&e, &n, |z| z.is_none()).unwrap();
        let ev = gs.eigenvalues();
        assert!(ev[0].is_none() && ev[1].is_none());
        let moved = reorder_pencil(&mut gs, 0, |z| z.is_some());
        assert_eq!(moved, dim - 2);
        let ev2 = gs.eigenvalues();
        assert!(ev2[dim - 1].is_none() && ev2[dim - 2].is_none());
        check(&e, &n, &gs);
    }
}
