//! Exact filtering with order reduction on a simulated path.
//!
//!     cargo run --release --example filter

use ratvol::sim::{simulate, SimConfig};
use ratvol::svfilter::{Filter, FilterOptions, ScaledTConfig, SvModel};

fn main() -> ratvol::Result<()> {
    let cfg = ScaledTConfig::default();
    let sim = SimConfig { t: 30, seed: 3, ..Default::default() };
    let path = simulate(&sim)?;
    let filter = Filter::new(SvModel::scaled_t(&cfg)?, FilterOptions { compare_full: true, ..Default::default() })?;
    let out = filter.run(&path.ys)?;
    println!("{:>3} {:>8} {:>8} {:>8} {:>9} {:>4} {:>3} {:>9} {:>9}", "t", "y", "x", "E[X]", "E|Y|", "n", "m", "bound", "ΔE[X]");
    for (r, x) in out.records.iter().zip(&path.xs) {
        let dx = r.comparison.as_ref().map(|c| (c.mean_x_full - c.mean_x_reduced).abs()).unwrap_or(0.0);
        println!(
            "{:>3} {:>8.3} {:>8.3} {:>8.3} {:>9.3} {:>4} {:>3} {:>9.2e} {:>9.1e}",
            r.t, r.y, x, r.mean_x.unwrap_or(f64::NAN), r.forecast_abs_y.unwrap_or(f64::NAN), r.n_full, r.m_reduced, r.bound, dx
        );
    }
    println!("log-likelihood {:.4}", out.loglik);
    Ok(())
}
