use super::{fnorm, CMatrix, C64, ONE, ZERO};
use std::ops::Range;

/// Plane rotation `G = [[c, s], [-conj(s), c]]` with real `c`.
#[derive(Clone, Copy, Debug)]
pub struct Rot {
    pub c: f64,
    pub s: C64,
}

impl Rot {
    pub const IDENTITY: Rot = Rot { c: 1.0, s: ZERO };

    /// Rotation with `G [f; g] = [r; 0]`.
    pub fn zeroing(f: C64, g: C64) -> (Rot, C64) {
        if g == ZERO {
            return (Rot::IDENTITY, f);
        }
        if f == ZERO {
            let ag = g.norm();
            return (
                Rot {
                    c: 0.0,
                    s: g.conj() / ag,
                },
                C64::new(ag, 0.0),
            );
        }
        let af = f.norm();
        let nrm = af.hypot(g.norm());
        let phase = f / af;
        (
            Rot {
                c: af / nrm,
                s: phase * g.conj() / nrm,
            },
            phase * nrm,
        )
    }

    /// Rotation for the right side: `[x_i, x_j] G` has a zero in slot `i`.
    pub fn zeroing_right(xi: C64, xj: C64) -> Rot {
        Rot::zeroing(xj, xi).0
    }

    /// Rows `i`, `j` of `m` (restricted to `cols`) become `G [row_i; row_j]`.
    pub fn left(&self, m: &mut CMatrix, i: usize, j: usize, cols: Range<usize>) {
        let (c, s) = (self.c, self.s);
        for k in cols {
            let a = m[(i, k)];
            let b = m[(j, k)];
            m[(i, k)] = a * c + s * b;
            m[(j, k)] = b * c - s.conj() * a;
        }
    }

    /// Columns `i`, `j` of `m` (restricted to `rows`) become `[col_i, col_j] G`.
    pub fn right(&self, m: &mut CMatrix, i: usize, j: usize, rows: Range<usize>) {
        let (c, s) = (self.c, self.s);
        for k in rows {
            let a = m[(k, i)];
            let b = m[(k, j)];
            m[(k, i)] = a * c - s.conj() * b;
            m[(k, j)] = s * a + b * c;
        }
    }

    /// Columns `i`, `j` of `m` become `[col_i, col_j] G*`.
    pub fn right_adj(&self, m: &mut CMatrix, i: usize, j: usize, rows: Range<usize>) {
        Rot {
            c: self.c,
            s: -self.s,
        }
        .right(m, i, j, rows)
    }
}

/// Reflector `I - 2 u u* / (u* u)` mapping `x` to a multiple of `e_1`.
fn reflector(x: &[C64]) -> Option<Vec<C64>> {
    let nrm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nrm == 0.0 {
        return None;
    }
    let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
    if tail == 0.0 {
        return None;
    }
    let phase = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
    let mut u = x.to_vec();
    u[0] += phase * nrm;
    Some(u)
}

fn apply_reflector_left(m: &mut CMatrix, u: &[C64], off: usize) {
    let uu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    for k in 0..m.ncols() {
        let mut dot = ZERO;
        for (i, ui) in u.iter().enumerate() {
            dot += ui.conj() * m[(off + i, k)];
        }
        let f = dot * (2.0 / uu);
        for (i, ui) in u.iter().enumerate() {
            m[(off + i, k)] -= ui * f;
        }
    }
}

fn apply_reflector_right(m: &mut CMatrix, u: &[C64], off: usize) {
    let uu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    for k in 0..m.nrows() {
        let mut dot = ZERO;
        for (i, ui) in u.iter().enumerate() {
            dot += m[(k, off + i)] * ui;
        }
        let f = dot * (2.0 / uu);
        for (i, ui) in u.iter().enumerate() {
            m[(k, off + i)] -= f * ui.conj();
        }
    }
}

/// Unitary `U` and upper Hessenberg `H = U* A U`. When `first` is given, the
/// first column of `U` is proportional to it (the Krylov/staircase start).
pub fn householder_hessenberg(a: &CMatrix, first: Option<&CMatrix>) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut u = CMatrix::identity(n, n);
    if n == 0 {
        return (u, h);
    }
    if let Some(b) = first {
        let x: Vec<C64> = b.column(0).iter().copied().collect();
        if fnorm(b) > 0.0 {
            if let Some(v) = reflector(&x) {
                apply_reflector_left(&mut h, &v, 0);
                apply_reflector_right(&mut h, &v, 0);
                apply_reflector_right(&mut u, &v, 0);
            }
        }
    }
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        if let Some(v) = reflector(&x) {
            apply_reflector_left(&mut h, &v, k + 1);
            apply_reflector_right(&mut h, &v, k + 1);
            apply_reflector_right(&mut u, &v, k + 1);
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (u, h)
}

#[cfg(test)]
mod tests {
    use super::super::testing::*;
    use super::*;

    #[test]
    fn zeroing_rotation() {
        let f = C64::new(1.0, 2.0);
        let g = C64::new(-0.5, 0.3);
        let (r, rr) = Rot::zeroing(f, g);
        let mut m = CMatrix::from_column_slice(2, 1, &[f, g]);
        r.left(&mut m, 0, 1, 0..1);
        assert!(m[(1, 0)].norm() < 1e-15);
        assert!((m[(0, 0)] - rr).norm() < 1e-15);

        let mut row = CMatrix::from_row_slice(1, 2, &[g, f]);
        Rot::zeroing_right(g, f).right(&mut row, 0, 1, 0..1);
        assert!(row[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn hessenberg_with_start_vector() {
        let mut r = rng(7);
        let a = random_matrix(&mut r, 6, 6);
        let b = random_matrix(&mut r, 6, 1);
        let (u, h) = householder_hessenberg(&a, Some(&b));
        assert!(fnorm(&(u.adjoint() * &u - CMatrix::identity(6, 6))) < 1e-13);
        assert!(fnorm(&(u.adjoint() * &a * &u - &h)) < 1e-13);
        for i in 0..6usize {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(h[(i, j)], ZERO);
            }
        }
        let ub = u.adjoint() * &b;
        assert!(ub.rows(1, 5).iter().all(|z| z.norm() < 1e-14));
    }
}
