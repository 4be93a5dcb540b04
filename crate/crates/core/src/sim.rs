//! Simulation of `X_{t+1} = a X_t + W_t`, `Y_t = Ψ V(σ X_t) U_t` with scaled-t noise.

use crate::error::{Error, Result};
use crate::svfilter::{default_v_coeffs, poly_eval};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StudentT};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub a: f64,
    pub psi: f64,
    pub sigma: f64,
    /// Degree of `V(x) = (1 + x/(2d))^d + 0.1`.
    pub d: usize,
    pub n_w: u32,
    pub n_u: u32,
    /// Degrees of freedom of `X₁`.
    pub n_x: u32,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            a: 0.9,
            psi: 2.0,
            sigma: 1.5,
            d: 4,
            n_w: 9,
            n_u: 3,
            n_x: 9,
            t: 100,
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t == 0 {
            return Err(Error::Config("T must be at least 1".into()));
        }
        if !(self.a.abs() < 1.0) {
            return Err(Error::Config(format!("a = {} must satisfy |a| < 1", self.a)));
        }
        if !(self.psi >= 0.0 && self.psi.is_finite()) || !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config("psi and sigma must be finite and nonnegative".into()));
        }
        if self.d == 0 {
            return Err(Error::Config("d must be at least 1".into()));
        }
        for df in [self.n_w, self.n_u, self.n_x] {
            if df < 3 {
                return Err(Error::Config(format!("degrees of freedom {df} < 3 have no variance")));
            }
        }
        Ok(())
    }

    /// Generator for replication `rep`; replications share the seed and use separate streams.
    pub fn rng(&self, rep: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(rep);
        r
    }
}

/// Unit-variance Student-t draws.
pub struct ScaledT {
    dist: StudentT<f64>,
    scale: f64,
}

impl ScaledT {
    pub fn new(df: u32) -> Result<ScaledT> {
        if df < 3 {
            return Err(Error::Config(format!("scaled t needs df ≥ 3, got {df}")));
        }
        let nu = df as f64;
        let dist = StudentT::new(nu).map_err(|e| Error::Config(e.to_string()))?;
        Ok(ScaledT {
            dist,
            scale: ((nu - 2.0) / nu).sqrt(),
        })
    }
}

impl Distribution<f64> for ScaledT {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng) * self.scale
    }
}

pub fn sample_scaled_t<R: Rng + ?Sized>(df: u32, count: usize, rng: &mut R) -> Result<Vec<f64>> {
    let d = ScaledT::new(df)?;
    Ok((0..count).map(|_| d.sample(rng)).collect())
}

/// Latent states and observations of one path.
#[derive(Clone, Debug, Default)]
pub struct Path {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

pub fn simulate(cfg: &SimConfig) -> Result<Path> {
    simulate_with(cfg, &mut cfg.rng(0))
}

pub fn simulate_with<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Result<Path> {
    cfg.validate()?;
    let v = default_v_coeffs(cfg.d);
    let (w, u, x1) = (ScaledT::new(cfg.n_w)?, ScaledT::new(cfg.n_u)?, ScaledT::new(cfg.n_x)?);
    let mut xs = Vec::with_capacity(cfg.t);
    let mut ys = Vec::with_capacity(cfg.t);
    let mut x = x1.sample(rng) / (1.0 - cfg.a * cfg.a).sqrt();
    for _ in 0..cfg.t {
        xs.push(x);
        ys.push(cfg.psi * poly_eval(&v, cfg.sigma * x) * u.sample(rng));
        x = cfg.a * x + w.sample(rng);
    }
    Ok(Path { xs, ys })
}
