//! Rational probability densities as spectral densities `Φ`, summands `Z`
//! (with `Φ = Z + Z*`) and factors `K` (with `Φ = K K*`). A density on the
//! real line is read off the imaginary axis: `ρ(x) = Φ(ix)`.

mod factor;

pub use factor::{factor_from_summand, lmi_solution_inverse, transmission_zeros, Side};

use crate::error::{Error, Result};
use crate::numerics::{
    block_diag, eigenvalues, fnorm, kron, schur_ordered, solve, solve_lyapunov, solve_sylvester,
    CMatrix, Tolerances, C64, I, ONE, ZERO,
};
use crate::realization::{Realization, RealizationJson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Stable strictly proper `Z(s) = C (sI − A)⁻¹ M`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSummand {
    r: Realization,
}

/// Stable `K(s) = C (sI − A)⁻¹ B`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFactor {
    r: Realization,
    min_phase: bool,
}

/// `Φ(s) = H (sI − F)⁻¹ G`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDensity {
    r: Realization,
}

fn check_stable(a: &CMatrix) -> Result<()> {
    if let Some(z) = eigenvalues(a)?.into_iter().find(|z| z.re >= 0.0) {
        return Err(Error::NotStable(format!("eigenvalue {z}")));
    }
    Ok(())
}

impl SpectralSummand {
    pub fn new(a: CMatrix, m: CMatrix, c: CMatrix) -> Result<Self> {
        let r = Realization::strictly_proper(a, m, c)?;
        Self::from_realization(r)
    }

    pub fn from_realization(r: Realization) -> Result<Self> {
        if !r.is_scalar() || !r.is_strictly_proper() {
            return Err(Error::InvalidSummand("summand must be scalar and strictly proper".into()));
        }
        check_stable(r.a())?;
        Ok(SpectralSummand { r })
    }

    pub(crate) fn unchecked(r: Realization) -> Self {
        SpectralSummand { r }
    }

    pub fn a(&self) -> &CMatrix {
        self.r.a()
    }
    pub fn m(&self) -> &CMatrix {
        self.r.b()
    }
    pub fn c(&self) -> &CMatrix {
        self.r.c()
    }
    pub fn states(&self) -> usize {
        self.r.states()
    }
    pub fn realization(&self) -> &Realization {
        &self.r
    }

    pub fn eval(&self, s: C64) -> Result<C64> {
        self.r.eval(s)
    }

    /// `Z(ix) + Z*(ix) = 2 Re Z(ix)`.
    pub fn density_at(&self, x: f64) -> Result<f64> {
        Ok(2.0 * self.r.eval(C64::new(0.0, x))?.re)
    }

    /// `C M`, real and positive for a valid summand.
    pub fn cm(&self) -> C64 {
        (self.c() * self.m())[(0, 0)]
    }

    pub fn scale(&self, k: f64) -> SpectralSummand {
        SpectralSummand {
            r: Realization::strictly_proper(self.a().clone(), self.m().scale(k), self.c().clone())
                .expect("same shapes"),
        }
    }

    /// Same function with `‖M‖ = ‖C‖`; returns the summand and `α` with
    /// `M' = M/α`, `C' = αC`.
    pub fn io_balanced(&self) -> (SpectralSummand, f64) {
        let (mn, cn) = (crate::numerics::fnorm(self.m()), crate::numerics::fnorm(self.c()));
        if !(mn > 0.0 && cn > 0.0) {
            return (self.clone(), 1.0);
        }
        let alpha = (mn / cn).sqrt();
        let r = Realization::strictly_proper(
            self.a().clone(),
            self.m().unscale(alpha),
            self.c().scale(alpha),
        )
        .expect("same shapes");
        (SpectralSummand { r }, alpha)
    }

    pub fn transform(&self, t: &CMatrix, t_inv: &CMatrix) -> SpectralSummand {
        SpectralSummand {
            r: self.r.transform(t, t_inv),
        }
    }
}

impl SpectralFactor {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix) -> Result<Self> {
        let r = Realization::strictly_proper(a, b, c)?;
        if !r.is_scalar() {
            return Err(Error::Dimension("spectral factor must be scalar".into()));
        }
        check_stable(r.a())?;
        Ok(SpectralFactor {
            r,
            min_phase: false,
        })
    }

    pub(crate) fn with_phase(r: Realization, min_phase: bool) -> Self {
        SpectralFactor { r, min_phase }
    }

    pub fn a(&self) -> &CMatrix {
        self.r.a()
    }
    pub fn b(&self) -> &CMatrix {
        self.r.b()
    }
    pub fn c(&self) -> &CMatrix {
        self.r.c()
    }
    pub fn states(&self) -> usize {
        self.r.states()
    }
    pub fn is_min_phase(&self) -> bool {
        self.min_phase
    }
    pub fn realization(&self) -> &Realization {
        &self.r
    }
    pub fn eval(&self, s: C64) -> Result<C64> {
        self.r.eval(s)
    }

    /// `|K(ix)|²`, free of the cancellation that `2 Re Z(ix)` suffers in the tails.
    pub fn density_at(&self, x: f64) -> Result<f64> {
        Ok(self.r.eval(C64::new(0.0, x))?.norm_sqr())
    }

    pub fn multiply(&self, other: &SpectralFactor) -> Result<SpectralFactor> {
        Ok(SpectralFactor {
            r: self.r.multiply(&other.r)?,
            min_phase: self.min_phase && other.min_phase,
        })
    }
}

impl SpectralDensity {
    pub fn from_realization(r: Realization) -> Result<Self> {
        if !r.is_scalar() || !r.is_strictly_proper() {
            return Err(Error::InvalidSummand("density must be scalar and strictly proper".into()));
        }
        Ok(SpectralDensity { r })
    }
    pub fn realization(&self) -> &Realization {
        &self.r
    }
    pub fn states(&self) -> usize {
        self.r.states()
    }
    pub fn eval(&self, s: C64) -> Result<C64> {
        self.r.eval(s)
    }
    pub fn density_at(&self, x: f64) -> Result<f64> {
        Ok(self.r.eval(C64::new(0.0, x))?.re)
    }
    pub fn codegree(&self, tol: &Tolerances) -> Result<usize> {
        self.r.codegree(tol.rank)
    }
}

/// `F = blockdiag(A, −A*)`, `G = [M; C*]`, `H = [C, −M*]`, after scaling
/// `M` and `C` to equal norms.
pub fn density_from_summand(z: &SpectralSummand) -> SpectralDensity {
    let (z, _) = z.io_balanced();
    SpectralDensity {
        r: z.r.add(&z.r.adjoint()).expect("scalar channels"),
    }
}

/// `F = [[A, −B B*], [0, −A*]]`, `G = [0; C*]`, `H = [C, 0]`.
pub fn density_from_factor(k: &SpectralFactor) -> SpectralDensity {
    SpectralDensity {
        r: k.r.multiply(&k.r.adjoint()).expect("scalar channels"),
    }
}

/// `M = P C*` with `A P + P A* + B B* = 0`.
pub fn summand_from_factor(k: &SpectralFactor) -> Result<SpectralSummand> {
    let b = k.b();
    let p = solve_lyapunov(k.a(), &(b * b.adjoint()))?;
    let m = &p * k.c().adjoint();
    Ok(SpectralSummand {
        r: Realization::strictly_proper(k.a().clone(), m, k.c().clone())?,
    })
}

/// Splits `Φ` into its stable part via an ordered Schur form and a Sylvester solve.
pub fn summand_from_density(phi: &SpectralDensity) -> Result<SpectralSummand> {
    let f = phi.r.a();
    let g = phi.r.b();
    let h = phi.r.c();
    let n2 = f.nrows();
    let scale = crate::numerics::fnorm(f).max(f64::MIN_POSITIVE);
    let (s, k) = schur_ordered(f, |z| z.re < 0.0)?;
    if s
        .eigenvalues()
        .iter()
        .any(|z| z.re.abs() <= 1e-12 * scale)
    {
        return Err(Error::AxisPole);
    }
    let t = &s.t;
    let f11 = t.view((0, 0), (k, k)).into_owned();
    let f12 = t.view((0, k), (k, n2 - k)).into_owned();
    let f22 = t.view((k, k), (n2 - k, n2 - k)).into_owned();
    let p = solve_sylvester(&(-&f11), &f22, &f12)?;
    let vg = s.v.adjoint() * g;
    let m = vg.rows(0, k) + &p * vg.rows(k, n2 - k);
    let c = h * s.v.columns(0, k);
    Ok(SpectralSummand {
        r: Realization::strictly_proper(f11, m, c)?,
    })
}

/// Normalization constant `2π C M` and moments `E Xˡ = (−i)ˡ C Aˡ M / (C M)`.
pub fn normalize_and_moments(
    z: &SpectralSummand,
    codegree: usize,
    max_l: usize,
) -> Result<(f64, Vec<C64>)> {
    if max_l + 2 > codegree {
        return Err(Error::MomentExistence {
            order: max_l,
            codegree,
        });
    }
    let cm = z.cm();
    if !(cm.re > 0.0) || cm.im.abs() > 1e-8 * cm.re {
        return Err(Error::InvalidSummand(format!("C M = {cm} is not real positive")));
    }
    let mut moments = Vec::with_capacity(max_l + 1);
    let mut am = z.m().clone();
    let mut phase = ONE;
    for _ in 0..=max_l {
        let v = (z.c() * &am)[(0, 0)];
        moments.push(phase * v / cm);
        am = z.a() * am;
        phase *= -I;
    }
    Ok((2.0 * PI * cm.re, moments))
}

/// Summand of `aX` given the summand of `X`.
pub fn scale_rv(z: &SpectralSummand, a: f64) -> Result<SpectralSummand> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::DegenerateArgument("scaling factor must be nonzero".into()));
    }
    let r = if a > 0.0 {
        Realization::strictly_proper(z.a().scale(a), z.m().clone(), z.c().clone())?
    } else {
        Realization::strictly_proper(
            z.a().adjoint().scale(-a),
            z.c().adjoint(),
            z.m().adjoint(),
        )?
    };
    Ok(SpectralSummand { r })
}

/// Summand of the density of `X1 + X2` for independent `X1`, `X2`, up to the
/// factor `1/(2π)` (renormalize through `2π C M`).
pub fn convolve(z1: &SpectralSummand, z2: &SpectralSummand) -> Result<SpectralSummand> {
    let n1 = z1.states();
    let n2 = z2.states();
    let a = kron(z1.a(), &CMatrix::identity(n2, n2)) + kron(&CMatrix::identity(n1, n1), z2.a());
    let m = kron(z1.m(), z2.m());
    let c = kron(z1.c(), z2.c());
    Ok(SpectralSummand {
        r: Realization::strictly_proper(a, m, c)?,
    })
}

/// `G = g1 ∘ g2` for scalar `g2` with feedthrough not in the spectrum of `g1`.
pub fn compose(g1: &Realization, g2: &Realization) -> Result<Realization> {
    if !g2.is_scalar() {
        return Err(Error::Dimension("inner function must be scalar".into()));
    }
    let n1 = g1.states();
    let d2 = g2.feedthrough();
    let mut shifted = g1.a().clone();
    for i in 0..n1 {
        shifted[(i, i)] -= d2;
    }
    let inv = solve(&shifted, &CMatrix::identity(n1, n1))
        .map_err(|_| Error::ImproperComposition(format!("{d2}")))?;
    let b2c2 = g2.b() * g2.c();
    let a = kron(&CMatrix::identity(n1, n1), g2.a()) + kron(&inv, &b2c2);
    let b = -kron(&(&inv * g1.b()), g2.b());
    let c = kron(&(g1.c() * &inv), g2.c());
    let d = g1.d() - g1.c() * &inv * g1.b();
    Realization::new(a, b, c, d)
}

/// A summand together with its normalization constant and co-degree.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalPdf {
    summand: SpectralSummand,
    norm_const: f64,
    codegree: usize,
}

impl RationalPdf {
    /// Computes `2π C M` and the co-degree of `Z + Z*` (staircase).
    pub fn from_summand(summand: SpectralSummand, tol: &Tolerances) -> Result<RationalPdf> {
        let codegree = density_from_summand(&summand).codegree(tol)?;
        Self::with_codegree(summand, codegree)
    }

    /// Like `from_summand` with a known co-degree.
    pub fn with_codegree(summand: SpectralSummand, codegree: usize) -> Result<RationalPdf> {
        if codegree < 2 || codegree % 2 != 0 {
            return Err(Error::InvalidSummand(format!("co-degree {codegree} is not even and positive")));
        }
        let (norm_const, _) = normalize_and_moments(&summand, codegree, 0)?;
        Ok(RationalPdf {
            summand,
            norm_const,
            codegree,
        })
    }

    pub fn summand(&self) -> &SpectralSummand {
        &self.summand
    }
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }
    pub fn codegree(&self) -> usize {
        self.codegree
    }
    pub fn states(&self) -> usize {
        self.summand.states()
    }

    /// Rescales the summand so that `2π C M = 1`.
    pub fn normalized(&self) -> RationalPdf {
        RationalPdf {
            summand: self.summand.scale(1.0 / self.norm_const),
            norm_const: 1.0,
            codegree: self.codegree,
        }
    }

    /// Density value, with rounding negatives below 1e-12 clamped to zero.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let v = self.summand.density_at(x)? / self.norm_const;
        Ok(if v < 0.0 && v > -1e-12 { 0.0 } else { v })
    }

    /// Density values on `xs` as `|K(ix)|²` of the min-phase factor. Unlike
    /// [`pdf`](Self::pdf) this keeps full relative accuracy far in the tails.
    pub fn pdf_many(&self, xs: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
        let (k, _) = factor_from_summand(&self.summand, Side::MinPhase, tol)?;
        xs.iter().map(|&x| Ok(k.density_at(x)? / self.norm_const)).collect()
    }

    /// Raw moments `E Xˡ` for `l = 0..=max_l` (real parts).
    pub fn moments(&self, max_l: usize) -> Result<Vec<f64>> {
        let (_, m) = normalize_and_moments(&self.summand, self.codegree, max_l)?;
        Ok(m.into_iter().map(|z| z.re).collect())
    }

    /// `E p(X)` for a real polynomial with coefficients in ascending order.
    pub fn expect_poly(&self, coeffs: &[f64]) -> Result<f64> {
        if coeffs.is_empty() {
            return Ok(0.0);
        }
        let m = self.moments(coeffs.len() - 1)?;
        Ok(coeffs.iter().zip(&m).map(|(a, b)| a * b).sum())
    }

    pub fn to_json(&self) -> RationalPdfJson {
        RationalPdfJson {
            realization: self.summand.r.to_json(),
            norm_const: self.norm_const,
            codegree: self.codegree,
        }
    }

    pub fn from_json(j: &RationalPdfJson) -> Result<RationalPdf> {
        let s = SpectralSummand::from_realization(Realization::from_json(&j.realization)?)?;
        RationalPdf::with_codegree(s, j.codegree)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RationalPdfJson {
    #[serde(flatten)]
    pub realization: RealizationJson,
    pub norm_const: f64,
    pub codegree: usize,
}

/// Cauchy density `γ / (π ((x − μ)² + γ²))`.
pub fn make_cauchy(scale: f64, location: f64) -> Result<RationalPdf> {
    if !(scale > 0.0) || !location.is_finite() {
        return Err(Error::UnsupportedDensity(format!("cauchy scale {scale}")));
    }
    let z = SpectralSummand::unchecked(Realization::scalar(
        C64::new(-scale, location),
        C64::new(0.5 / PI, 0.0),
        ONE,
        ZERO,
    ));
    RationalPdf::with_codegree(z, 2)
}

/// Cauchy spectral factor `√(γ/π) / (s + γ − iμ)`.
pub fn cauchy_factor(scale: f64, location: f64) -> SpectralFactor {
    SpectralFactor::with_phase(
        Realization::scalar(C64::new(-scale, location), C64::new((scale / PI).sqrt(), 0.0), ONE, ZERO),
        true,
    )
}

/// Spectral factor `g / (s + r)ᵏ` of the unit-variance t density with odd `df`.
pub fn scaled_t_factor(df: u32) -> Result<SpectralFactor> {
    if df < 3 || df % 2 == 0 {
        return Err(Error::UnsupportedDensity(format!(
            "scaled t needs odd df ≥ 3, got {df}"
        )));
    }
    let k = ((df + 1) / 2) as usize;
    let r = ((df - 2) as f64).sqrt();
    // κ = ((k−1)!)² 4^{k−1} / (π (2k−2)! r)
    let mut kappa = 1.0 / (PI * r);
    for j in 1..k {
        kappa *= 2.0 * j as f64 / (2.0 * j as f64 - 1.0);
    }
    let g = (kappa * r.powi(2 * k as i32)).sqrt();
    let mut a = CMatrix::zeros(k, k);
    for i in 0..k {
        a[(i, i)] = C64::new(-r, 0.0);
        if i + 1 < k {
            a[(i, i + 1)] = ONE;
        }
    }
    let mut b = CMatrix::zeros(k, 1);
    b[(k - 1, 0)] = ONE;
    let mut c = CMatrix::zeros(1, k);
    c[(0, 0)] = C64::new(g, 0.0);
    Ok(SpectralFactor::with_phase(Realization::strictly_proper(a, b, c)?, true))
}

/// Unit-variance scaled t density with odd degrees of freedom.
pub fn make_scaled_t_odd(df: u32) -> Result<RationalPdf> {
    let k = scaled_t_factor(df)?;
    let z = summand_from_factor(&k)?;
    RationalPdf::with_codegree(z, (df + 1) as usize)
}

/// Summand of `Z1 + Z2`; for normalized inputs this is twice the equal-weight mixture.
pub fn add_summands(z1: &SpectralSummand, z2: &SpectralSummand) -> Result<SpectralSummand> {
    let a = block_diag(z1.a(), z2.a());
    let mut m = CMatrix::zeros(a.nrows(), 1);
    m.rows_mut(0, z1.states()).copy_from(z1.m());
    m.rows_mut(z1.states(), z2.states()).copy_from(z2.m());
    let mut c = CMatrix::zeros(1, a.nrows());
    c.columns_mut(0, z1.states()).copy_from(z1.c());
    c.columns_mut(z1.states(), z2.states()).copy_from(z2.c());
    SpectralSummand::new(a, m, c)
}

/// Largest relative change of `C` accepted by `impose_codegree`.
const CODEGREE_REPAIR_TOL: f64 = 1e-7;

/// Makes the Markov parameters of `Z + Z*` below order `k − 1` vanish exactly
/// by a minimum-norm change of `C`.
///
/// Chains of products, convolutions and truncations leave these parameters
/// at roundoff level instead of zero. Far out in the tails that residue
/// outweighs the true `x^{-k}` decay and can turn the density negative.
pub fn impose_codegree(z: &SpectralSummand, k: usize) -> Result<SpectralSummand> {
    let n = z.states();
    let rows = k.saturating_sub(1);
    if rows == 0 {
        return Ok(z.clone());
    }
    if 2 * n < rows {
        return Err(Error::InvalidSummand(format!("{n} states cannot carry co-degree {k}")));
    }
    // Φ_j = h_j − (−1)^j conj(h_j): Im h_j for even j, Re h_j for odd j
    let c = z.c();
    let mut lhs = nalgebra::DMatrix::<f64>::zeros(rows, 2 * n);
    let mut rhs = nalgebra::DVector::<f64>::zeros(rows);
    let mut g = z.m().clone();
    for j in 0..rows {
        let h = (c * &g)[(0, 0)];
        let scale = fnorm(&g).max(f64::MIN_POSITIVE);
        for i in 0..n {
            let (p, q) = (g[(i, 0)].re / scale, g[(i, 0)].im / scale);
            // δC = u + iv, δC·g = (u·p − v·q) + i(u·q + v·p)
            if j % 2 == 0 {
                lhs[(j, i)] = q;
                lhs[(j, n + i)] = p;
            } else {
                lhs[(j, i)] = p;
                lhs[(j, n + i)] = -q;
            }
        }
        rhs[j] = -(if j % 2 == 0 { h.im } else { h.re }) / scale;
        g = z.a() * g;
    }
    let svd = lhs.clone().svd(true, true);
    let top = svd.singular_values.max();
    let x = svd
        .solve(&rhs, 1e-13 * top)
        .map_err(|e| Error::InvalidSummand(format!("co-degree repair: {e}")))?;
    let resid = (&lhs * &x - &rhs).amax();
    let delta = CMatrix::from_fn(1, n, |_, i| C64::new(x[i], x[n + i]));
    let cnorm = fnorm(c);
    if fnorm(&delta) > CODEGREE_REPAIR_TOL * cnorm || resid > 1e-12 * cnorm {
        return Err(Error::InvalidSummand(format!(
            "co-degree {k} is inconsistent with the realization (relative change {:e})",
            fnorm(&delta) / cnorm
        )));
    }
    SpectralSummand::new(z.a().clone(), z.m().clone(), c + delta)
}
