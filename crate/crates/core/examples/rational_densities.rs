//! Student-t and Cauchy densities as state-space objects: evaluation,
//! moments, scaling and convolution.
//!
//!     cargo run --example rational_densities

use ratvol::ratpdf::{convolve, make_cauchy, make_scaled_t_odd, scale_rv, RationalPdf, SpectralSummand};

fn main() -> ratvol::Result<()> {
    let t9 = make_scaled_t_odd(9)?;
    let t3 = make_scaled_t_odd(3)?;
    println!("t9: {} states, co-degree {}", t9.states(), t9.codegree());
    println!("t9 moments up to 8: {:?}", t9.moments(8)?);
    println!("t3 second moment: {:.12}", t3.moments(2)?[2]);

    // 0.9 X + W with X ~ t3, W ~ t9
    let z = convolve(&scale_rv(t3.summand(), 0.9)?, t9.summand())?;
    let z = SpectralSummand::from_realization(z.realization().minimal_reduce(1e-10)?)?;
    let sum = RationalPdf::with_codegree(z, t3.codegree().min(t9.codegree()))?;
    println!("0.9·t3 + t9: {} states, mass {:.12}", sum.states(), sum.norm_const());
    println!("variance {:.12} (expected {:.12})", sum.normalized().moments(2)?[2], 0.81 + 1.0);

    let c = make_cauchy(0.5, 1.0)?;
    for x in [-2.0, 0.0, 1.0, 3.0] {
        println!("cauchy(0.5, 1) at {x:>4}: {:.8}", c.pdf(x)?);
    }
    Ok(())
}
