//! Minimum- and maximum-phase spectral factors of a rational density.
//!
//!     cargo run --example spectral_factor

use ratvol::numerics::Tolerances;
use ratvol::ratpdf::{add_summands, factor_from_summand, make_cauchy, make_scaled_t_odd, Side};

fn main() -> ratvol::Result<()> {
    let tol = Tolerances::default();
    let t5 = make_scaled_t_odd(5)?;
    let bump = make_cauchy(0.3, 2.0)?;
    let z = add_summands(t5.summand(), &bump.summand().scale(0.2))?;
    for side in [Side::MinPhase, Side::MaxPhase] {
        let (k, p) = factor_from_summand(&z, side, &tol)?;
        let mut worst: f64 = 0.0;
        for i in 0..=200 {
            let x = -20.0 + 0.2 * i as f64;
            let phi = z.density_at(x)?;
            worst = worst.max((k.density_at(x)? - phi).abs() / phi);
        }
        println!("{side:?}: {} states, trace(P) = {:.6}, max rel |K|² error {worst:.2e}", k.states(), p.trace().re);
    }
    Ok(())
}
