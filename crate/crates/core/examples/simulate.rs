//! Simulate the model and compare sample moments of |Y| with theory.
//!
//!     cargo run --release --example simulate

use ratvol::moments::{abs_y_moments, sample_abs_moments, sample_acf, MomentSpec};
use ratvol::sim::{simulate, SimConfig};
use ratvol::svfilter::default_v_coeffs;

fn main() -> ratvol::Result<()> {
    let cfg = SimConfig { a: 0.5, psi: 1.0, sigma: 0.5, t: 200_000, seed: 7, ..Default::default() };
    let path = simulate(&cfg)?;
    let sample = sample_abs_moments(&path.ys, 3);
    let spec = MomentSpec::scaled_t(cfg.a, cfg.psi, cfg.sigma, default_v_coeffs(cfg.d), cfg.n_w, cfg.n_u)?;
    let theory = abs_y_moments(&spec, 3)?;
    println!("E|Y|   sample {:.4}  theory {:.4}", sample.mean, theory.mean);
    println!("Var|Y| sample {:.4}  theory {:.4}", sample.var, theory.var);
    println!("Corr1  sample {:.4}  theory {:.4}", sample.corr(1), theory.corr(1));
    let acf = sample_acf(&path.ys, 5);
    println!("ACF of Y itself (white noise): {:?}", acf.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>());
    Ok(())
}
