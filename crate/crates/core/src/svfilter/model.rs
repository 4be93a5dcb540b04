use crate::error::{Error, Result};
use crate::moments::{scaled_t_abs_mean, MomentSpec};
use crate::numerics::{c, eigenvalues, CMatrix, C64, ONE, ZERO};
use crate::ratpdf::{density_from_summand, make_cauchy, make_scaled_t_odd, scale_rv, RationalPdf};
use crate::realization::Realization;
use crate::sbt::lyapunov_balanced;
use serde::Serialize;

/// Coefficients of `(1 + x/(2d))^d + 0.1` in ascending order.
pub fn default_v_coeffs(d: usize) -> Vec<f64> {
    // C(d, j) and (2d)^j are exact integers; one rounding per coefficient
    let mut out = Vec::with_capacity(d + 1);
    let mut binom: u128 = 1;
    let mut pow: u128 = 1;
    for j in 0..=d {
        out.push(binom as f64 / pow as f64);
        binom = binom * (d - j) as u128 / (j + 1) as u128;
        pow *= 2 * d as u128;
    }
    out[0] += 0.1;
    out
}

/// Evaluates a polynomial with ascending coefficients.
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Complex roots of a real polynomial (ascending coefficients, nonzero leading term).
pub fn poly_roots(coeffs: &[f64]) -> Result<Vec<C64>> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    if lead == 0.0 {
        return Err(Error::Config("leading polynomial coefficient is zero".into()));
    }
    let mut comp = CMatrix::zeros(d, d);
    for j in 0..d {
        comp[(0, j)] = c(-coeffs[d - 1 - j] / lead);
        if j + 1 < d {
            comp[(j + 1, j)] = ONE;
        }
    }
    let mut roots = eigenvalues(&comp)?;
    // one Newton step against the original coefficients
    for r in roots.iter_mut() {
        let (mut p, mut dp) = (ZERO, ZERO);
        for &a in coeffs.iter().rev() {
            dp = dp * *r + p;
            p = p * *r + a;
        }
        if dp.norm() > 0.0 {
            let step = p / dp;
            if step.norm() < 1e-6 * (1.0 + r.norm()) {
                *r -= step;
            }
        }
    }
    Ok(roots)
}

/// The discrete-time volatility model
/// `X_{t+1} = a X_t + W_t`, `Y_t = Ψ V(σ X_t) U_t`.
#[derive(Clone, Debug)]
pub struct SvModel {
    pub a: f64,
    pub psi: f64,
    pub sigma: f64,
    /// Coefficients of `V` in ascending order.
    pub v: Vec<f64>,
    pub pdf_w: RationalPdf,
    pub pdf_u: RationalPdf,
    pub pdf_x1: RationalPdf,
    /// `E|U|`, when known in closed form; needed for volatility forecasts.
    pub e_abs_u: Option<f64>,
    /// Realization of `Φ_U` for the unit-mass `pdf_u`.
    pub(crate) phi_u: Realization,
}

/// Parameters of the scaled-t configuration used throughout the examples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaledTConfig {
    pub a: f64,
    pub psi: f64,
    pub sigma: f64,
    pub d: usize,
    pub n_w: u32,
    pub n_u: u32,
    pub n_x: u32,
}

impl Default for ScaledTConfig {
    fn default() -> Self {
        ScaledTConfig {
            a: 0.9,
            psi: 2.0,
            sigma: 1.5,
            d: 4,
            n_w: 9,
            n_u: 3,
            n_x: 9,
        }
    }
}

impl ScaledTConfig {
    pub fn moment_spec(&self) -> Result<MomentSpec> {
        MomentSpec::scaled_t(self.a, self.psi, self.sigma, default_v_coeffs(self.d), self.n_w, self.n_u)
    }
}

impl SvModel {
    pub fn new(
        a: f64,
        psi: f64,
        sigma: f64,
        v: Vec<f64>,
        pdf_w: RationalPdf,
        pdf_u: RationalPdf,
        pdf_x1: RationalPdf,
    ) -> Result<SvModel> {
        if !(a.abs() < 1.0) || a == 0.0 {
            return Err(Error::Config(format!("a = {a} must satisfy 0 < |a| < 1")));
        }
        if !(psi > 0.0) || !psi.is_finite() {
            return Err(Error::Config(format!("psi = {psi} must be positive")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::Config(format!("sigma = {sigma} must be nonnegative")));
        }
        if v.len() < 2 || v.iter().any(|x| !x.is_finite()) || *v.last().unwrap() == 0.0 {
            return Err(Error::Config("V needs degree ≥ 1 and finite coefficients".into()));
        }
        if !(v[0] > 0.0) {
            return Err(Error::Config("V(0) must be positive".into()));
        }
        let roots = poly_roots(&v)?;
        if let Some(r) = roots.iter().find(|r| r.im.abs() <= 1e-9 * (1.0 + r.re.abs())) {
            return Err(Error::Config(format!("V has a real root near {}", r.re)));
        }
        for (name, p) in [("W", &pdf_w), ("U", &pdf_u), ("X1", &pdf_x1)] {
            crate::ratpdf::factor_from_summand(p.summand(), crate::ratpdf::Side::MinPhase, &Default::default())
                .map_err(|e| Error::UnsupportedDensity(format!("density of {name}: {e}")))?;
        }
        let rebase = |p: RationalPdf| -> Result<RationalPdf> {
            let p = p.normalized();
            RationalPdf::with_codegree(lyapunov_balanced(p.summand())?, p.codegree())
        };
        let pdf_w = rebase(pdf_w)?;
        let pdf_u = rebase(pdf_u)?;
        let pdf_x1 = rebase(pdf_x1)?;
        let phi_u = density_from_summand(pdf_u.summand()).realization().clone();
        Ok(SvModel {
            a,
            psi,
            sigma,
            v,
            pdf_w,
            pdf_u,
            pdf_x1,
            e_abs_u: None,
            phi_u,
        })
    }

    /// Unit-variance scaled t disturbances and `X₁` with variance `1/(1−a²)`.
    pub fn scaled_t(cfg: &ScaledTConfig) -> Result<SvModel> {
        if cfg.d == 0 {
            return Err(Error::Config("V must have degree d ≥ 1".into()));
        }
        let to_pdf = |df: u32| {
            make_scaled_t_odd(df).map_err(|e| Error::Config(format!("{e}")))
        };
        let pdf_w = to_pdf(cfg.n_w)?;
        let pdf_u = to_pdf(cfg.n_u)?;
        if !(cfg.a.abs() < 1.0) {
            return Err(Error::Config(format!("a = {} must satisfy |a| < 1", cfg.a)));
        }
        let x1 = to_pdf(cfg.n_x)?;
        let sx = scale_rv(x1.summand(), 1.0 / (1.0 - cfg.a * cfg.a).sqrt())?;
        let pdf_x1 = RationalPdf::with_codegree(sx, x1.codegree())?;
        let mut m = SvModel::new(cfg.a, cfg.psi, cfg.sigma, default_v_coeffs(cfg.d), pdf_w, pdf_u, pdf_x1)?;
        m.e_abs_u = Some(scaled_t_abs_mean(cfg.n_u)?);
        Ok(m)
    }

    /// Cauchy disturbances and initial state, for small test problems.
    pub fn cauchy(a: f64, psi: f64, sigma: f64, v: Vec<f64>, scale_w: f64, scale_u: f64, scale_x1: f64) -> Result<SvModel> {
        SvModel::new(
            a,
            psi,
            sigma,
            v,
            make_cauchy(scale_w, 0.0)?,
            make_cauchy(scale_u, 0.0)?,
            make_cauchy(scale_x1, 0.0)?,
        )
    }

    pub fn degree(&self) -> usize {
        self.v.len() - 1
    }

    /// Coefficients of `Ψ V(σx)` with trailing zeros removed.
    pub fn effective_v(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .v
            .iter()
            .enumerate()
            .map(|(j, c)| self.psi * c * self.sigma.powi(j as i32))
            .collect();
        while out.len() > 1 && *out.last().unwrap() == 0.0 {
            out.pop();
        }
        out
    }

    /// `V(σx)` (without `Ψ`).
    pub fn v_sigma(&self, x: f64) -> f64 {
        poly_eval(&self.v, self.sigma * x)
    }

    /// Conditional density of `Y_t` given `X_t = x`.
    pub fn likelihood(&self, y: f64, x: f64) -> Result<f64> {
        let scale = self.psi * self.v_sigma(x);
        Ok(self.pdf_u.pdf(y / scale)? / scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v_expansion() {
        let v = default_v_coeffs(4);
        assert_eq!(v.len(), 5);
        assert!((v[0] - 1.1).abs() < 1e-15);
        assert_eq!(v[1], 0.5);
        assert_eq!(v[2], 6.0 / 64.0);
        assert_eq!(v[4], 1.0 / 4096.0);
        for x in [-3.0, 0.5, 7.0] {
            assert!((poly_eval(&v, x) - ((1.0 + x / 8.0).powi(4) + 0.1)).abs() < 1e-13);
        }
    }

    #[test]
    fn roots_of_v() {
        let v = default_v_coeffs(4);
        for r in poly_roots(&v).unwrap() {
            let mut p = ZERO;
            for &a in v.iter().rev() {
                p = p * r + a;
            }
            assert!(p.norm() < 1e-12, "{p}");
            assert!(r.im.abs() > 0.1);
        }
    }

    #[test]
    fn rejects_bad_models() {
        let mut cfg = ScaledTConfig::default();
        cfg.d = 0;
        assert!(SvModel::scaled_t(&cfg).unwrap_err().is_config());
        let mut cfg = ScaledTConfig::default();
        cfg.a = 1.0;
        assert!(SvModel::scaled_t(&cfg).unwrap_err().is_config());
        let err = SvModel::cauchy(0.5, 1.0, 1.0, vec![-1.0, 0.0, 1.0], 1.0, 1.0, 1.0).unwrap_err();
        assert!(err.is_config());
        let err = SvModel::cauchy(0.5, 1.0, 1.0, vec![1.0, 0.0, -1.0], 1.0, 1.0, 1.0).unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn initial_variance() {
        let m = SvModel::scaled_t(&ScaledTConfig::default()).unwrap();
        let mom = m.pdf_x1.moments(2).unwrap();
        assert!((mom[2] - 1.0 / 0.19).abs() < 1e-9);
    }
}
