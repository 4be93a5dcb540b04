use super::{SpectralFactor, SpectralSummand};
use crate::error::{Error, Result};
use crate::numerics::{
    fnorm, hermitian_part, norm2, numerical_rank, qz_iterate, reorder_pencil, solve,
    CMatrix, GeneralizedSchur, Tolerances, C64,
};
use crate::realization::{Realization, Staircase};

/// Which spectral factor to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Zeros in the closed left half plane; yields the minimal LMI solution.
    MinPhase,
    /// Zeros in the closed right half plane; yields the maximal LMI solution.
    MaxPhase,
}

/// Staircase plus QZ on the trailing block: the pencil of a scalar
/// strictly proper realization in generalized Schur form.
pub(crate) fn pencil_schur(
    a: &CMatrix,
    b: &CMatrix,
    c: &CMatrix,
    rank_tol: f64,
) -> Result<(Staircase, GeneralizedSchur)> {
    let st = Staircase::new(a, b, c, rank_tol)?;
    let mut gs = GeneralizedSchur {
        q: st.q.clone(),
        z: st.z.clone(),
        s: st.n.clone(),
        t: st.e.clone(),
    };
    let dim = gs.dim();
    let lead = st.lead();
    if lead < dim {
        qz_iterate(&mut gs, lead, dim - 1)?;
    }
    Ok((st, gs))
}

/// Finite zeros of a scalar strictly proper realization.
pub fn transmission_zeros(r: &Realization, rank_tol: f64) -> Result<Vec<C64>> {
    let (st, gs) = pencil_schur(r.a(), r.b(), r.c(), rank_tol)?;
    let tol = gs.infinite_tol();
    Ok((st.lead()..gs.dim())
        .filter_map(|i| gs.eigenvalue(i, tol))
        .collect())
}

/// Basis `[Top; Mid]` of the deflating subspace selected by `side`, for the
/// input/output balanced summand with scaling `α`.
struct Deflating {
    z: SpectralSummand,
    alpha: f64,
    top: CMatrix,
    mid: CMatrix,
}

fn deflating_subspace(z: &SpectralSummand, side: Side, tol: &Tolerances) -> Result<Deflating> {
    let (zb, alpha) = z.io_balanced();
    let z = zb;
    let n = z.states();
    let a = z.a();
    let m = z.m();
    let c = z.c();
    let gnorm = (fnorm(m).powi(2) + fnorm(c).powi(2)).sqrt();
    if gnorm == 0.0 {
        return Err(Error::ZeroFunction);
    }
    // Φ realization with unit-norm input and output maps; scaling the last
    // row and column of the pencil leaves the deflating subspaces unchanged.
    let mut f = CMatrix::zeros(2 * n, 2 * n);
    f.view_mut((0, 0), (n, n)).copy_from(a);
    f.view_mut((n, n), (n, n)).copy_from(&(-a.adjoint()));
    let mut g = CMatrix::zeros(2 * n, 1);
    g.rows_mut(0, n).copy_from(m);
    g.rows_mut(n, n).copy_from(&c.adjoint());
    let mut h = CMatrix::zeros(1, 2 * n);
    h.columns_mut(0, n).copy_from(c);
    h.columns_mut(n, n).copy_from(&(-m.adjoint()));
    let g = g.unscale(gnorm);
    let h = h.unscale(gnorm);

    let (st, mut gs) = pencil_schur(&f, &g, &h, tol.rank)?;
    if st.codegree % 2 != 0 {
        return Err(Error::FactorizationFailure(format!(
            "odd co-degree {} of the spectral density",
            st.codegree
        )));
    }
    let half = st.codegree / 2;
    if half > n {
        return Err(Error::FactorizationFailure("co-degree exceeds state dimension".into()));
    }
    let dim = gs.dim();
    let inf_tol = gs.infinite_tol();
    let lead = st.lead();
    let zeros: Vec<Option<C64>> = (lead..dim).map(|i| gs.eigenvalue(i, inf_tol)).collect();
    if zeros.iter().any(|z| z.is_none()) {
        return Err(Error::FactorizationFailure(
            "infinite eigenvalue outside the staircase block".into(),
        ));
    }
    let scale = norm2(a).max(f64::MIN_POSITIVE);
    let closest = zeros
        .iter()
        .flatten()
        .map(|z| z.re.abs())
        .fold(f64::INFINITY, f64::min);
    if closest < tol.axis * scale {
        log::warn!("spectral density has a zero {closest:e} from the imaginary axis");
        return Err(Error::IllConditionedFactorization(closest));
    }
    let want_right = side == Side::MinPhase;
    let moved = reorder_pencil(&mut gs, half + 1, |z| {
        z.is_some_and(|z| if want_right { z.re > 0.0 } else { z.re < 0.0 })
    });
    if moved != n - half {
        return Err(Error::FactorizationFailure(format!(
            "{moved} zeros on the requested side, expected {}",
            n - half
        )));
    }
    let w = gs.z.columns(1, n);
    let top = w.rows(0, n).into_owned();
    let mid = w.rows(n, n).into_owned();
    Ok(Deflating { z, alpha, top, mid })
}

/// Inverse of the rank-one LMI solution selected by `side`, computed without
/// forming the solution itself. For `MaxPhase` this is `P̄⁻¹`, which stays
/// bounded when `P̄` is nearly singular in the inverse sense.
pub fn lmi_solution_inverse(z: &SpectralSummand, side: Side, tol: &Tolerances) -> Result<CMatrix> {
    let d = deflating_subspace(z, side, tol)?;
    let q = solve(&d.top.transpose(), &d.mid.transpose())?.transpose();
    Ok(hermitian_part(&q).unscale(d.alpha * d.alpha))
}

/// Spectral factor of `Z + Z*` and the corresponding rank-one LMI solution `P`.
pub fn factor_from_summand(
    z: &SpectralSummand,
    side: Side,
    tol: &Tolerances,
) -> Result<(SpectralFactor, CMatrix)> {
    let Deflating { z, alpha, top, mid } = deflating_subspace(z, side, tol)?;
    let n = z.states();
    let a = z.a();
    let m = z.m();
    let c = z.c();
    let p = hermitian_part(&solve(&mid.transpose(), &top.transpose())?.transpose());

    let r = -(a * &p + &p * a.adjoint());
    let rnorm = fnorm(&r);
    let resid = fnorm(&(m - &p * c.adjoint()));
    if !(rnorm > 0.0) || resid > 1e-6 * (fnorm(m) + fnorm(&p) * fnorm(c)) {
        return Err(Error::FactorizationFailure(format!(
            "LMI off-diagonal residual {resid:e}"
        )));
    }
    let j = (0..n)
        .max_by(|&i, &k| r[(i, i)].re.total_cmp(&r[(k, k)].re))
        .unwrap_or(0);
    let pivot = r[(j, j)].re;
    if !(pivot > 0.0) {
        return Err(Error::FactorizationFailure("L(P) has no positive diagonal".into()));
    }
    let mut b = CMatrix::from_fn(n, 1, |i, _| r[(i, j)] / pivot.sqrt());
    if fnorm(&(&r - &b * b.adjoint())) > 1e-6 * rnorm || numerical_rank(&r, 1e-6) != 1 {
        return Err(Error::FactorizationFailure("L(P) is not rank one".into()));
    }
    let bnorm = fnorm(&b);
    if let Some(first) = b.iter().copied().find(|x| x.norm() > 1e-12 * bnorm) {
        let phase = first.conj() / first.norm();
        b = b.map(|x| x * phase);
    }
    // undo the input/output balancing: C = C'/α, B = αB', P = α²P'
    let k = Realization::strictly_proper(a.clone(), b.scale(alpha), c.unscale(alpha))?;
    Ok((SpectralFactor::with_phase(k, side == Side::MinPhase), p.scale(alpha * alpha)))
}
