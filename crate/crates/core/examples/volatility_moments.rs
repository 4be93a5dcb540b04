//! Closed-form moments of |Y| for the scaled-t volatility model.
//!
//!     cargo run --example volatility_moments

use ratvol::moments::{abs_y_moments, MomentSpec};
use ratvol::svfilter::default_v_coeffs;

fn main() -> ratvol::Result<()> {
    println!("{:>5} {:>5} {:>9} {:>9} {:>9}", "a", "σ", "E|Y|", "Var|Y|", "Corr1");
    for (a, sigma) in [(0.5, 0.5), (0.5, 1.0), (0.9, 0.5), (0.9, 1.0)] {
        let spec = MomentSpec::scaled_t(a, 1.0, sigma, default_v_coeffs(4), 9, 3)?;
        let m = abs_y_moments(&spec, 10)?;
        println!("{a:>5} {sigma:>5} {:>9.4} {:>9.4} {:>9.4}", m.mean, m.var, m.corr(1));
    }
    Ok(())
}
