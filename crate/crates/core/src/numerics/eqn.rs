use super::schur::schur;
use super::{ensure_finite, fnorm, hermitian_part, is_square, CMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Solves `a X + X b + c = 0` by Bartels–Stewart on complex Schur forms.
pub fn solve_sylvester(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> Result<CMatrix> {
    if !is_square(a) || !is_square(b) || c.nrows() != a.nrows() || c.ncols() != b.nrows() {
        return Err(Error::Dimension(format!(
            "sylvester: a {:?}, b {:?}, c {:?}",
            a.shape(),
            b.shape(),
            c.shape()
        )));
    }
    ensure_finite(c, "sylvester rhs")?;
    let (n, m) = c.shape();
    if n == 0 || m == 0 {
        return Ok(CMatrix::zeros(n, m));
    }
    let sa = schur(a)?;
    let sb = schur(b)?;
    let ta = &sa.t;
    let tb = &sb.t;
    let rhs = -(sa.v.adjoint() * c * &sb.v);
    let scale = (fnorm(a) + fnorm(b)).max(f64::MIN_POSITIVE);
    let mut y = CMatrix::zeros(n, m);
    for j in 0..m {
        let mut col: Vec<C64> = (0..n).map(|i| rhs[(i, j)]).collect();
        for k in 0..j {
            let f = tb[(k, j)];
            if f != ZERO {
                for i in 0..n {
                    col[i] -= y[(i, k)] * f;
                }
            }
        }
        let shift = tb[(j, j)];
        for i in (0..n).rev() {
            let mut acc = col[i];
            for k in i + 1..n {
                acc -= ta[(i, k)] * y[(k, j)];
            }
            let d = ta[(i, i)] + shift;
            if d.norm() <= 1e-14 * scale {
                return Err(Error::SingularEquation(format!(
                    "eigenvalues {} and {} of a and -b coincide",
                    ta[(i, i)],
                    -shift
                )));
            }
            y[(i, j)] = acc / d;
        }
    }
    let x = &sa.v * y * sb.v.adjoint();
    ensure_finite(&x, "sylvester solution")?;
    Ok(x)
}

/// Solves `a P + P a* + q = 0` for stable `a`.
pub fn solve_lyapunov(a: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    if !is_square(a) {
        return Err(Error::Dimension("lyapunov: a not square".into()));
    }
    let ev = schur(a)?.eigenvalues();
    if let Some(z) = ev.iter().find(|z| z.re >= 0.0) {
        return Err(Error::NotStable(format!("eigenvalue {z}")));
    }
    let p = solve_sylvester(a, &a.adjoint(), q)?;
    Ok(hermitian_part(&p))
}
