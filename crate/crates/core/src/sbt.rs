//! Positive-real balanced truncation of spectral summands.
//!
//! In balanced coordinates the minimal and maximal solutions of the
//! positive-real LMI are `Σ` and `Σ⁻¹`. The first `c` singular values equal
//! one, where `2c` is the co-degree of `Φ`, and truncating to `m ≥ c` states
//! keeps the co-degree and a relative error bound on `Φ`.

use crate::error::{Error, Result};
use crate::numerics::{psd_sqrt_factor, solve_lyapunov, svd, CMatrix, Tolerances};
use crate::ratpdf::{
    density_from_summand, factor_from_summand, lmi_solution_inverse, Side, SpectralFactor, SpectralSummand,
};
use crate::realization::Realization;
use serde::Serialize;

/// σ within this distance of one counts as one.
pub const UNIT_SIGMA_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct BalancedSummand {
    pub summand: SpectralSummand,
    pub sigma: Vec<f64>,
    pub codegree_half: usize,
    /// Balancing transformation and its inverse (`x̃ = T x`).
    pub t: CMatrix,
    pub t_inv: CMatrix,
    /// Min-phase factor of the input summand.
    pub min_factor: SpectralFactor,
    pub input: SpectralSummand,
}

/// Same summand in Lyapunov-balanced coordinates (equal, diagonal
/// controllability and observability Gramians). Jordan-form realizations
/// such as those of Student-t densities are badly scaled; products and
/// factorizations built from the balanced form lose far less accuracy.
/// Returns the input unchanged when it is too close to non-minimal.
pub fn lyapunov_balanced(z: &SpectralSummand) -> Result<SpectralSummand> {
    let p = solve_lyapunov(z.a(), &(z.m() * z.m().adjoint()))?;
    let q = solve_lyapunov(&z.a().adjoint(), &(z.c().adjoint() * z.c()))?;
    let lp = psd_sqrt_factor(&p, 0.0);
    let lq = psd_sqrt_factor(&q, 0.0);
    let (u, s, v) = svd(&(lq.adjoint() * &lp))?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 && lo > 1e-12 * hi => {}
        _ => return Ok(z.clone()),
    }
    let mut t = u.adjoint() * lq.adjoint();
    let mut t_inv = &lp * &v;
    for (j, &x) in s.iter().enumerate() {
        t.row_mut(j).unscale_mut(x.sqrt());
        t_inv.column_mut(j).unscale_mut(x.sqrt());
    }
    Ok(z.transform(&t, &t_inv))
}

/// Minimal and maximal rank-one LMI solutions `(P̲, P̄)`.
pub fn extremal_gramians(z: &SpectralSummand, tol: &Tolerances) -> Result<(CMatrix, CMatrix)> {
    let (_, pmin) = factor_from_summand(z, Side::MinPhase, tol)?;
    let (_, pmax) = factor_from_summand(z, Side::MaxPhase, tol)?;
    Ok((pmin, pmax))
}

/// Square-root balancing on `P̲` and `P̄⁻¹`: with `Lq* L = U Σ V*`,
/// `T = Σ^{-1/2} U* Lq*` and `T⁻¹ = L V Σ^{-1/2}`.
pub fn balance(z: &SpectralSummand, tol: &Tolerances) -> Result<BalancedSummand> {
    let (kmin, pmin) = factor_from_summand(z, Side::MinPhase, tol)?;
    let qmax = lmi_solution_inverse(z, Side::MaxPhase, tol)?;
    let codegree = density_from_summand(z).codegree(tol)?;
    let lmin = psd_sqrt_factor(&pmin, 1e-14);
    let lq = psd_sqrt_factor(&qmax, 1e-14);
    let (u, sigma, v) = svd(&(lq.adjoint() * &lmin))?;
    if sigma.first().is_none_or(|&s| !(s > 0.0)) {
        return Err(Error::FactorizationFailure("zero balancing singular values".into()));
    }
    // directions with σ below the floor are kept finite but are never
    // retained by a truncation with a finite bound
    let floor = f64::EPSILON * f64::EPSILON;
    let mut t = u.adjoint() * lq.adjoint();
    let mut t_inv = &lmin * &v;
    for (j, &s) in sigma.iter().enumerate() {
        let w = s.max(floor).sqrt();
        t.row_mut(j).unscale_mut(w);
        t_inv.column_mut(j).unscale_mut(w);
    }
    let summand = z.transform(&t, &t_inv);
    Ok(BalancedSummand {
        summand,
        sigma,
        codegree_half: codegree / 2,
        t,
        t_inv,
        min_factor: kmin,
        input: z.clone(),
    })
}

impl BalancedSummand {
    /// Number of σ equal to one within `UNIT_SIGMA_TOL`.
    pub fn unit_sigma_count(&self) -> usize {
        self.sigma.iter().filter(|&&s| s >= 1.0 - UNIT_SIGMA_TOL).count()
    }
}

/// Leading `m`-state subsystem of a balanced summand.
pub fn truncate(b: &BalancedSummand, m: usize) -> Result<SpectralSummand> {
    let n = b.summand.states();
    if m < b.codegree_half {
        return Err(Error::InfiniteBound {
            m,
            c: b.codegree_half,
        });
    }
    if m >= n {
        return Ok(b.input.clone());
    }
    let a = b.summand.a().view((0, 0), (m, m)).into_owned();
    let mm = b.summand.m().rows(0, m).into_owned();
    let cc = b.summand.c().columns(0, m).into_owned();
    SpectralSummand::from_realization(Realization::strictly_proper(a, mm, cc)?)
}

/// `∏_{k>m} (1+σ_k)²/(1−σ_k)² − 1`; infinite when a discarded σ equals one.
pub fn relative_error_bound(sigma: &[f64], m: usize) -> f64 {
    let mut prod = 1.0;
    for &s in sigma.iter().skip(m) {
        if s >= 1.0 - UNIT_SIGMA_TOL {
            return f64::INFINITY;
        }
        prod *= ((1.0 + s) / (1.0 - s)).powi(2);
    }
    prod - 1.0
}

/// Relative pdf error `2τ/(1−τ)` implied by a relative spectral error `τ`.
pub fn pdf_error_bound(tau: f64) -> f64 {
    if tau >= 1.0 {
        f64::INFINITY
    } else {
        2.0 * tau / (1.0 - tau)
    }
}

/// Result of a tolerance-driven truncation.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub summand: SpectralSummand,
    /// Pdf error bound of the chosen order.
    pub achieved_bound: f64,
    pub m: usize,
    pub n: usize,
    pub c: usize,
    pub sigma: Vec<f64>,
    pub min_factor: SpectralFactor,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationRecord {
    pub n: usize,
    pub m: usize,
    pub c: usize,
    pub sigma_tail: Vec<f64>,
    pub achieved_bound: f64,
}

impl Truncation {
    pub fn record(&self) -> TruncationRecord {
        TruncationRecord {
            n: self.n,
            m: self.m,
            c: self.c,
            sigma_tail: self.sigma.iter().skip(self.m).copied().collect(),
            achieved_bound: self.achieved_bound,
        }
    }
}

/// Smallest `m ≥ c` whose pdf error bound does not exceed `tau`.
pub fn choose_order(sigma: &[f64], c: usize, tau: f64) -> (usize, f64) {
    let n = sigma.len();
    for m in c..n {
        let bound = pdf_error_bound(relative_error_bound(sigma, m));
        if bound <= tau {
            return (m, bound);
        }
    }
    (n, 0.0)
}

pub fn truncate_to_tolerance(z: &SpectralSummand, tau: f64, tol: &Tolerances) -> Result<Truncation> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Config(format!("truncation tolerance {tau} outside (0, 1)")));
    }
    let b = balance(z, tol)?;
    let (m, bound) = choose_order(&b.sigma, b.codegree_half, tau);
    let summand = truncate(&b, m)?;
    Ok(Truncation {
        summand,
        achieved_bound: bound,
        m,
        n: z.states(),
        c: b.codegree_half,
        sigma: b.sigma,
        min_factor: b.min_factor,
    })
}
