//! Exact recursive filter for the rational stochastic volatility model.
//!
//! Every conditional density is carried as a spectral summand. The update
//! multiplies the min-phase factor of the predictive density with a factor of
//! the observation weight `x ↦ p_U(y/Ṽ(x))/Ṽ(x)`, `Ṽ(x) = Ψ V(σx)`, which is
//! realized by composing `−i s Φ_U(y s)` with `i/Ṽ(−is)`. The prediction is a
//! scaling and a convolution. Balanced truncation keeps the state dimension
//! bounded.

mod model;

pub use model::{default_v_coeffs, poly_eval, poly_roots, ScaledTConfig, SvModel};

use crate::error::{Error, Result};
use crate::numerics::{Tolerances, C64, I, ONE, ZERO};
use crate::ratpdf::{
    compose, convolve, density_from_summand, factor_from_summand, impose_codegree, scale_rv, summand_from_density,
    summand_from_factor, RationalPdf, Side, SpectralDensity, SpectralFactor, SpectralSummand,
};
use crate::realization::Realization;
use crate::sbt::truncate_to_tolerance;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq)]
pub struct FilterOptions {
    /// Truncation tolerance on the relative pdf error; `None` keeps full models.
    pub tau: Option<f64>,
    pub tol: Tolerances,
    /// Compute volatility forecasts from predictive moments.
    pub forecasts: bool,
    /// Record moments of the full and the truncated predictive density.
    pub compare_full: bool,
    /// Recompute co-degrees by the staircase algorithm at every step.
    pub verify_codegree: bool,
    /// Keep the full predictive summand and its min-phase factor per step.
    pub keep_snapshots: bool,
    /// Evaluate each predictive density on this grid.
    pub grid: Option<Vec<f64>>,
}

impl Default for FilterOptions {
    fn default() -> Self {
        FilterOptions {
            tau: Some(0.02),
            tol: Tolerances::default(),
            forecasts: true,
            compare_full: false,
            verify_codegree: false,
            keep_snapshots: false,
            grid: None,
        }
    }
}

/// Predictive density of `X_t` given `Y_1..Y_{t−1}`.
#[derive(Clone, Debug)]
pub struct FilterState {
    pub predictive: RationalPdf,
    /// Index of the next observation (1-based).
    pub t: usize,
    pub loglik: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FullComparison {
    pub mean_x_full: f64,
    pub mean_x_reduced: f64,
    pub mean_v_full: f64,
    pub mean_v_reduced: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasuredCodegrees {
    pub predictive: usize,
    pub posterior: usize,
    pub next_full: usize,
    pub next_reduced: usize,
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub full: SpectralSummand,
    pub full_factor: SpectralFactor,
    pub reduced: RationalPdf,
}

/// Diagnostics of one filter step.
#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub t: usize,
    pub y: f64,
    pub c_t: f64,
    pub loglik: f64,
    /// `E[X_t | Y_1..Y_{t−1}]`.
    pub mean_x: Option<f64>,
    /// `E[V(σX_t) | Y_1..Y_{t−1}]`.
    pub mean_v: Option<f64>,
    pub forecast_abs_y: Option<f64>,
    pub n_full: usize,
    pub m_reduced: usize,
    pub bound: f64,
    pub k_pred: usize,
    pub k_post: usize,
    pub k_next: usize,
    pub sigma: Vec<f64>,
    pub comparison: Option<FullComparison>,
    pub measured: Option<MeasuredCodegrees>,
    /// Predictive density of `X_t` on the configured grid.
    pub pdf_grid: Option<Vec<f64>>,
    #[serde(skip)]
    pub snapshot: Option<Snapshot>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<StepRecord>,
    pub loglik: f64,
    pub final_state: FilterState,
}

impl RunOutput {
    pub fn volatility_forecasts(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.forecast_abs_y).collect()
    }
}

/// `i / Ṽ(−is)` as a cascade of first-order sections.
fn inverse_poly_realization(v: &[f64]) -> Result<Realization> {
    let d = v.len() - 1;
    let roots = poly_roots(v)?;
    // Ṽ(−is) = v_d (−i)^d ∏ (s − i x_k)
    let gain = I / (C64::new(v[d], 0.0) * (-I).powi(d as i32));
    let mag = gain.norm().powf(1.0 / d as f64);
    let phase = gain / gain.norm();
    let mut r: Option<Realization> = None;
    for (k, x) in roots.iter().enumerate() {
        let b = if k + 1 == d { phase * mag } else { C64::new(mag, 0.0) };
        let sec = Realization::scalar(I * x, b, ONE, ZERO);
        r = Some(match r {
            None => sec,
            Some(prev) => prev.multiply(&sec)?,
        });
    }
    r.ok_or_else(|| Error::Config("V must have degree ≥ 1".into()))
}

/// Realization of the spectral density `Φ_w` with `Φ_w(ix) = p_U(y/Ṽ(x))/Ṽ(x)`.
/// `None` when `Ṽ` is constant.
pub fn weight_density(model: &SvModel, y: f64, tol: &Tolerances) -> Result<Option<SpectralDensity>> {
    let v = model.effective_v();
    if v.len() == 1 {
        return Ok(None);
    }
    let g2 = inverse_poly_realization(&v)?;
    let g = if y == 0.0 {
        let p0 = model.pdf_u.pdf(0.0)?;
        g2.scale_output(-I * p0)
    } else {
        let g1 = model
            .phi_u
            .arg_scale_times_s(C64::new(y, 0.0))?
            .scale_output(-I);
        let g = compose(&g1, &g2)?;
        // G(∞) = G1(0) = 0
        let d = g.feedthrough();
        let scale = g1.feedthrough().norm() + 1.0;
        if d.norm() > 1e-8 * scale {
            return Err(Error::ImproperComposition(format!("{d}")));
        }
        Realization::strictly_proper(g.a().clone(), g.b().clone(), g.c().clone())?
    };
    let g = g.minimal_reduce(tol.minimal)?;
    Ok(Some(SpectralDensity::from_realization(g)?))
}

/// Bayes update; returns the normalized posterior and `c_t = p(y_t | y_1..y_{t−1})`.
pub fn update(pred: &RationalPdf, y: f64, model: &SvModel, tol: &Tolerances) -> Result<(RationalPdf, f64)> {
    if !y.is_finite() {
        return Err(Error::Config(format!("observation {y} is not finite")));
    }
    let pred = pred.normalized();
    let Some(phi_w) = weight_density(model, y, tol)? else {
        let v0 = model.effective_v()[0];
        let w = model.pdf_u.pdf(y / v0)? / v0;
        return Ok((pred, w));
    };
    let d = model.effective_v().len() - 1;
    let zw = summand_from_density(&phi_w)?;
    let (k2, _) = factor_from_summand(&zw, Side::MinPhase, tol)?;
    let (k1, _) = factor_from_summand(pred.summand(), Side::MinPhase, tol)?;
    let z = summand_from_factor(&k1.multiply(&k2)?)?;
    let post = exact_pdf(z, pred.codegree() + d)?;
    let c_t = post.norm_const();
    Ok((post.normalized(), c_t))
}

/// Density of `a X_t + W_t` for `X_t` distributed by `post`.
pub fn predict(post: &RationalPdf, model: &SvModel, tol: &Tolerances) -> Result<RationalPdf> {
    let z = scale_rv(post.summand(), model.a)?;
    let conv = convolve(&z, model.pdf_w.summand())?;
    let r = conv.realization().minimal_reduce(tol.minimal)?;
    let z = SpectralSummand::from_realization(r)?;
    let k = post.codegree().min(model.pdf_w.codegree());
    Ok(exact_pdf(z, k)?.normalized())
}

/// Density with the co-degree known from bookkeeping imposed exactly.
fn exact_pdf(z: SpectralSummand, k: usize) -> Result<RationalPdf> {
    RationalPdf::with_codegree(impose_codegree(&z, k)?, k)
}

fn mean_x_v(pdf: &RationalPdf, model: &SvModel) -> Result<(f64, f64)> {
    let d = model.degree();
    let m = pdf.moments(d)?;
    let ev = model
        .v
        .iter()
        .enumerate()
        .map(|(j, c)| c * model.sigma.powi(j as i32) * m[j])
        .sum();
    Ok((m[1], ev))
}

fn measured_codegree(pdf: &RationalPdf, tol: &Tolerances) -> Result<usize> {
    density_from_summand(pdf.summand()).codegree(tol)
}

pub struct Filter {
    pub model: SvModel,
    pub opts: FilterOptions,
}

impl Filter {
    pub fn new(model: SvModel, opts: FilterOptions) -> Result<Filter> {
        if let Some(tau) = opts.tau {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(Error::Config(format!("tau = {tau} outside (0, 1)")));
            }
        }
        if opts.forecasts {
            let need = model.degree() + 2;
            let k = model.pdf_w.codegree().min(model.pdf_x1.codegree());
            if k < need {
                return Err(Error::MomentExistence {
                    order: model.degree(),
                    codegree: k,
                });
            }
            if model.e_abs_u.is_none() {
                return Err(Error::Config("forecasts need E|U| in closed form".into()));
            }
        }
        Ok(Filter { model, opts })
    }

    pub fn init(&self) -> FilterState {
        FilterState {
            predictive: self.model.pdf_x1.clone(),
            t: 1,
            loglik: 0.0,
        }
    }

    pub fn step(&self, state: &FilterState, y: f64) -> Result<(FilterState, StepRecord)> {
        let t = state.t;
        self.step_inner(state, y)
            .map_err(|e| Error::Step { t, source: Box::new(e) })
    }

    fn step_inner(&self, state: &FilterState, y: f64) -> Result<(FilterState, StepRecord)> {
        let model = &self.model;
        let tol = &self.opts.tol;
        let pred = &state.predictive;
        let (mean_x, mean_v, forecast) = if self.opts.forecasts {
            let (mx, mv) = mean_x_v(pred, model)?;
            let e_abs_u = model.e_abs_u.unwrap_or(f64::NAN);
            (Some(mx), Some(mv), Some(model.psi * e_abs_u * mv))
        } else if pred.codegree() >= 3 {
            (Some(pred.moments(1)?[1]), None, None)
        } else {
            (None, None, None)
        };
        let pdf_grid = match &self.opts.grid {
            Some(xs) => Some(xs.iter().map(|&x| pred.pdf(x)).collect::<Result<Vec<_>>>()?),
            None => None,
        };

        let (post, c_t) = update(pred, y, model, tol)?;
        if !(c_t > 0.0) || !c_t.is_finite() {
            return Err(Error::InvalidSummand(format!("normalization constant {c_t}")));
        }
        let full = predict(&post, model, tol)?;
        let n_full = full.states();
        let (next, m, bound, sigma, min_factor) = match self.opts.tau {
            Some(tau) => {
                let tr = truncate_to_tolerance(full.summand(), tau, tol)?;
                let reduced = exact_pdf(tr.summand.clone(), full.codegree())?.normalized();
                (reduced, tr.m, tr.achieved_bound, tr.sigma, Some(tr.min_factor))
            }
            None => (full.clone(), n_full, 0.0, Vec::new(), None),
        };

        let comparison = if self.opts.compare_full && next.codegree() >= model.degree() + 2 {
            let (fx, fv) = mean_x_v(&full, model)?;
            let (rx, rv) = mean_x_v(&next, model)?;
            Some(FullComparison {
                mean_x_full: fx,
                mean_x_reduced: rx,
                mean_v_full: fv,
                mean_v_reduced: rv,
            })
        } else {
            None
        };
        let measured = if self.opts.verify_codegree {
            Some(MeasuredCodegrees {
                predictive: measured_codegree(pred, tol)?,
                posterior: measured_codegree(&post, tol)?,
                next_full: measured_codegree(&full, tol)?,
                next_reduced: measured_codegree(&next, tol)?,
            })
        } else {
            None
        };
        let snapshot = if self.opts.keep_snapshots {
            let full_factor = match min_factor {
                Some(k) => k,
                None => factor_from_summand(full.summand(), Side::MinPhase, tol)?.0,
            };
            Some(Snapshot {
                full: full.summand().clone(),
                full_factor,
                reduced: next.clone(),
            })
        } else {
            None
        };

        let loglik = state.loglik + c_t.ln();
        let record = StepRecord {
            t: state.t,
            y,
            c_t,
            loglik,
            mean_x,
            mean_v,
            forecast_abs_y: forecast,
            n_full,
            m_reduced: m,
            bound,
            k_pred: pred.codegree(),
            k_post: post.codegree(),
            k_next: next.codegree(),
            sigma,
            comparison,
            measured,
            pdf_grid,
            snapshot,
        };
        let state = FilterState {
            predictive: next,
            t: state.t + 1,
            loglik,
        };
        Ok((state, record))
    }

    pub fn run(&self, ys: &[f64]) -> Result<RunOutput> {
        let mut state = self.init();
        let mut records = Vec::with_capacity(ys.len());
        for &y in ys {
            let (next, rec) = self.step(&state, y)?;
            log::debug!(
                "t={} n={} m={} bound={:.3e} c_t={:.6e}",
                rec.t,
                rec.n_full,
                rec.m_reduced,
                rec.bound,
                rec.c_t
            );
            records.push(rec);
            state = next;
        }
        Ok(RunOutput {
            loglik: state.loglik,
            records,
            final_state: state,
        })
    }
}

/// Evaluates `x ↦ p(x)` of a unit-mass density through a spectral factor,
/// which stays accurate in the tails.
pub fn factor_pdf(k: &SpectralFactor, norm_const: f64, x: f64) -> Result<f64> {
    Ok(k.density_at(x)? / norm_const)
}

#[cfg(test)]
mod tests;
