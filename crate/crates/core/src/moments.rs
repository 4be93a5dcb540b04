//! Closed-form moments of the volatility model and a method-of-moments fit.
//!
//! With `X⃗ = (1, X, …, X^d)'` the state recursion `X_{t+1} = a X_t + W_t`
//! gives `E[X⃗_{t+1} | X_t] = F X⃗_t` for a lower triangular `F`, which turns
//! all moments and autocovariances of `V(σX_t)` into small matrix products.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::PI;

/// Inputs of the moment engine.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentSpec {
    /// Raw moments `E Wᵏ` for `k = 0..=m_W`.
    pub m_w: Vec<f64>,
    pub m_u2: f64,
    pub e_abs_u: f64,
    /// Coefficients of `V` in ascending order.
    pub v: Vec<f64>,
    pub a: f64,
    pub psi: f64,
    pub sigma: f64,
}

impl MomentSpec {
    /// Unit-variance scaled t disturbances with odd `n_w`, `n_u`.
    pub fn scaled_t(a: f64, psi: f64, sigma: f64, v: Vec<f64>, n_w: u32, n_u: u32) -> Result<Self> {
        let d = v.len().saturating_sub(1);
        let m_w = scaled_t_moments(n_w, (2 * d).min(n_w as usize - 1))?;
        let m_u = scaled_t_moments(n_u, 2)?;
        let spec = MomentSpec {
            m_w,
            m_u2: m_u[2],
            e_abs_u: scaled_t_abs_mean(n_u)?,
            v,
            a,
            psi,
            sigma,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn degree(&self) -> usize {
        self.v.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v.is_empty() {
            return Err(Error::Config("empty V polynomial".into()));
        }
        if !(self.a.abs() < 1.0) {
            return Err(Error::Config(format!("|a| = {} must be below 1", self.a.abs())));
        }
        if self.m_w.len() < 2 * self.degree() + 1 {
            return Err(Error::MomentExistence {
                order: 2 * self.degree(),
                codegree: self.m_w.len() + 1,
            });
        }
        Ok(())
    }

    /// Coefficients of `V(σx)`.
    pub fn scaled_v(&self) -> Vec<f64> {
        self.v
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.sigma.powi(j as i32))
            .collect()
    }

    pub fn with_params(&self, a: f64, psi: f64, sigma: f64) -> MomentSpec {
        MomentSpec {
            a,
            psi,
            sigma,
            ..self.clone()
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Raw moments of the unit-variance t distribution, `k = 0..=k_max`.
pub fn scaled_t_moments(df: u32, k_max: usize) -> Result<Vec<f64>> {
    if k_max >= df as usize {
        return Err(Error::MomentExistence {
            order: k_max,
            codegree: df as usize + 1,
        });
    }
    let nu = df as f64;
    let scale = (nu - 2.0) / nu;
    Ok((0..=k_max)
        .map(|k| {
            if k % 2 == 1 {
                return 0.0;
            }
            let mut m = 1.0;
            for j in 1..=k / 2 {
                let j = j as f64;
                m *= (2.0 * j - 1.0) * nu / (nu - 2.0 * j) * scale;
            }
            m
        })
        .collect())
}

/// `E|U|` for the unit-variance t distribution with odd `df ≥ 3`.
pub fn scaled_t_abs_mean(df: u32) -> Result<f64> {
    if df < 3 || df % 2 == 0 {
        return Err(Error::UnsupportedDensity(format!("scaled t needs odd df ≥ 3, got {df}")));
    }
    // Γ(k+1)/Γ(k+1/2) for ν = 2k+1, as a running product
    let k = (df - 1) / 2;
    let mut ratio = 1.0 / PI.sqrt();
    for j in 1..=k {
        ratio *= j as f64 / (j as f64 - 0.5);
    }
    let nu = df as f64;
    Ok(2.0 * nu.sqrt() * ratio / (PI.sqrt() * (nu - 1.0)) * ((nu - 2.0) / nu).sqrt())
}

/// `M_X(k)` for `k = 0..=k_max`.
pub fn mx_recursion(spec: &MomentSpec, k_max: usize) -> Result<Vec<f64>> {
    if k_max >= spec.m_w.len() {
        return Err(Error::MomentExistence {
            order: k_max,
            codegree: spec.m_w.len() + 1,
        });
    }
    let a = spec.a;
    let mut mx = vec![1.0];
    for k in 1..=k_max {
        let ak = a.powi(k as i32);
        if (1.0 - ak).abs() < f64::EPSILON {
            return Err(Error::Config("a^k = 1 in the moment recursion".into()));
        }
        let s: f64 = (0..k)
            .map(|l| binomial(k, l) * a.powi(l as i32) * spec.m_w[k - l] * mx[l])
            .sum();
        mx.push(s / (1.0 - ak));
    }
    Ok(mx)
}

/// Lower triangular `F_{il} = C(i,l) aˡ M_W(i−l)` of size `(d+1)×(d+1)`.
pub fn f_matrix(spec: &MomentSpec) -> DMatrix<f64> {
    let n = spec.degree() + 1;
    DMatrix::from_fn(n, n, |i, l| {
        if l <= i {
            binomial(i, l) * spec.a.powi(l as i32) * spec.m_w[i - l]
        } else {
            0.0
        }
    })
}

/// `E[X⃗ X⃗']` with entries `M_X(i+j)`.
pub fn second_moment_matrix(spec: &MomentSpec) -> Result<DMatrix<f64>> {
    let d = spec.degree();
    let mx = mx_recursion(spec, 2 * d)?;
    Ok(DMatrix::from_fn(d + 1, d + 1, |i, j| mx[i + j]))
}

/// `Cov(V(σX_{t+k}), V(σX_t))`.
pub fn acf_vx(spec: &MomentSpec, k: usize) -> Result<f64> {
    Ok(acf_vx_all(spec, k)?[k])
}

/// `Cov(V(σX_{t+j}), V(σX_t))` for `j = 0..=k`.
pub fn acf_vx_all(spec: &MomentSpec, k: usize) -> Result<Vec<f64>> {
    let d = spec.degree();
    let s = second_moment_matrix(spec)?;
    let mvec = DVector::from_fn(d + 1, |i, _| s[(i, 0)]);
    let v = DVector::from_vec(spec.scaled_v());
    let mut g = f_matrix(spec);
    // F − M⃗ e with e the first unit row
    for i in 0..=d {
        g[(i, 0)] -= mvec[i];
    }
    let mut out = Vec::with_capacity(k + 1);
    out.push(v.dot(&(&s * &v)) - v.dot(&mvec).powi(2));
    let mut w = &s * &v;
    for _ in 0..k {
        w = &g * w;
        out.push(v.dot(&w));
    }
    Ok(out)
}

/// Mean, variance and autocovariances of `|Y_t|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbsYMoments {
    pub mean: f64,
    pub var: f64,
    /// `Cov(|Y_{t+k}|, |Y_t|)` for `k = 1..=lags`.
    pub acov: Vec<f64>,
}

impl AbsYMoments {
    pub fn corr(&self, k: usize) -> f64 {
        if self.var == 0.0 {
            0.0
        } else {
            self.acov[k - 1] / self.var
        }
    }

    /// `(mean, var, acov…)` as one vector.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.mean, self.var];
        v.extend_from_slice(&self.acov);
        v
    }
}

pub fn abs_y_moments(spec: &MomentSpec, lags: usize) -> Result<AbsYMoments> {
    spec.validate()?;
    let d = spec.degree();
    let mx = mx_recursion(spec, d)?;
    let v = spec.scaled_v();
    let ev: f64 = v.iter().zip(&mx).map(|(a, b)| a * b).sum();
    let cov = acf_vx_all(spec, lags)?;
    let ev2 = cov[0] + ev * ev;
    let psi2 = spec.psi * spec.psi;
    let mean = spec.psi * ev * spec.e_abs_u;
    Ok(AbsYMoments {
        mean,
        var: psi2 * ev2 * spec.m_u2 - mean * mean,
        acov: cov[1..]
            .iter()
            .map(|c| psi2 * c * spec.e_abs_u * spec.e_abs_u)
            .collect(),
    })
}

/// Sample mean, variance and autocovariances of `|y|` with `1/T` normalization.
pub fn sample_abs_moments(ys: &[f64], lags: usize) -> AbsYMoments {
    let t = ys.len() as f64;
    let abs: Vec<f64> = ys.iter().map(|y| y.abs()).collect();
    let mean = abs.iter().sum::<f64>() / t;
    let dev: Vec<f64> = abs.iter().map(|x| x - mean).collect();
    let acov_at = |k: usize| dev.iter().zip(&dev[k..]).map(|(a, b)| a * b).sum::<f64>() / t;
    AbsYMoments {
        mean,
        var: acov_at(0),
        acov: (1..=lags).map(acov_at).collect(),
    }
}

/// Sample autocorrelations of `y` itself at lags `1..=lags`.
pub fn sample_acf(ys: &[f64], lags: usize) -> Vec<f64> {
    let t = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / t;
    let dev: Vec<f64> = ys.iter().map(|x| x - mean).collect();
    let c0 = dev.iter().map(|x| x * x).sum::<f64>() / t;
    (1..=lags)
        .map(|k| dev.iter().zip(&dev[k..]).map(|(a, b)| a * b).sum::<f64>() / t / c0)
        .collect()
}

/// Multi-start settings for `mm_estimate`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MmOptions {
    pub a_starts: Vec<f64>,
    pub sigma_starts: Vec<f64>,
    /// Ψ starts as multiples of the value matching the sample mean.
    pub psi_factors: Vec<f64>,
    pub max_evals: usize,
}

impl Default for MmOptions {
    fn default() -> Self {
        MmOptions {
            a_starts: vec![0.3, 0.85],
            sigma_starts: vec![0.4, 1.2],
            psi_factors: vec![0.8, 1.25],
            max_evals: 4000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MmEstimate {
    pub a_hat: f64,
    pub psi_hat: f64,
    pub sigma_hat: f64,
    pub objective: f64,
    pub lags: usize,
}

const A_BOUND: f64 = 0.999;

fn from_unconstrained(u: &[f64]) -> (f64, f64, f64) {
    (A_BOUND * u[0].tanh(), u[1].exp(), u[2].exp())
}

fn to_unconstrained(a: f64, psi: f64, sigma: f64) -> [f64; 3] {
    [(a / A_BOUND).clamp(-0.999_999, 0.999_999).atanh(), psi.ln(), sigma.ln()]
}

/// `‖m(a, Ψ, σ) − target‖²`.
pub fn mm_objective(spec: &MomentSpec, target: &AbsYMoments, a: f64, psi: f64, sigma: f64) -> f64 {
    let lags = target.acov.len();
    match abs_y_moments(&spec.with_params(a, psi, sigma), lags) {
        Ok(m) => m
            .to_vec()
            .iter()
            .zip(target.to_vec())
            .map(|(x, y)| (x - y).powi(2))
            .sum(),
        Err(_) => f64::INFINITY,
    }
}

/// Fits `(a, Ψ, σ)` to given `|Y|` moments; `base` supplies the disturbance
/// moments and `V`.
pub fn mm_fit(base: &MomentSpec, target: &AbsYMoments, opts: &MmOptions) -> Result<MmEstimate> {
    if !(target.var > 0.0) {
        return Err(Error::Estimation("series has zero variance".into()));
    }
    let f = |u: &[f64]| {
        let (a, psi, sigma) = from_unconstrained(u);
        mm_objective(base, target, a, psi, sigma)
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for &a0 in &opts.a_starts {
        for &s0 in &opts.sigma_starts {
            let unit = abs_y_moments(&base.with_params(a0, 1.0, s0), 0)?;
            let psi0 = target.mean / unit.mean;
            for &pf in &opts.psi_factors {
                let start = to_unconstrained(a0, psi0 * pf, s0);
                let (x, fx) = nelder_mead(&f, &start, 0.3, opts.max_evals);
                if best.as_ref().is_none_or(|(_, fb)| fx < *fb) {
                    best = Some((x, fx));
                }
            }
        }
    }
    let (x, fx) = best.ok_or_else(|| Error::Estimation("no starting points".into()))?;
    if !fx.is_finite() {
        return Err(Error::Estimation("objective is not finite at any start".into()));
    }
    let (a_hat, psi_hat, sigma_hat) = from_unconstrained(&x);
    Ok(MmEstimate {
        a_hat,
        psi_hat,
        sigma_hat,
        objective: fx,
        lags: target.acov.len(),
    })
}

/// Method-of-moments fit to an observed series.
pub fn mm_estimate(ys: &[f64], lags: usize, base: &MomentSpec, opts: &MmOptions) -> Result<MmEstimate> {
    if ys.len() <= lags + 10 {
        return Err(Error::Estimation(format!(
            "series of length {} too short for {lags} lags",
            ys.len()
        )));
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::Estimation("non-finite observation".into()));
    }
    mm_fit(base, &sample_abs_moments(ys, lags), opts)
}

/// Downhill simplex minimization; returns the best vertex and its value.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, max_evals: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let mut evals = n + 1;
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let spread = (vals[n] - vals[0]).abs();
        let size = simplex[1..]
            .iter()
            .map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= 1e-15 * vals[0].abs() + 1e-30 && size < 1e-10 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|x| x[k]).sum::<f64>() / n as f64)
            .collect();
        let xr = combine(&centroid, &simplex[n], -1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = combine(&centroid, &simplex[n], -2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let xc = combine(&centroid, &xr, 0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = combine(&centroid, &simplex[n], 0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = combine(&simplex[0], &simplex[i], 0.5);
                    vals[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
    (simplex[best].clone(), vals[best])
}
