//! Balanced truncation of a convolution with a guaranteed relative error bound.
//!
//!     cargo run --example balanced_truncation

use ratvol::numerics::Tolerances;
use ratvol::ratpdf::{convolve, make_scaled_t_odd, scale_rv, SpectralSummand};
use ratvol::sbt::{balance, pdf_error_bound, relative_error_bound, truncate_to_tolerance};

fn main() -> ratvol::Result<()> {
    let tol = Tolerances::default();
    let t3 = make_scaled_t_odd(3)?;
    let t9 = make_scaled_t_odd(9)?;
    let z = convolve(&scale_rv(t3.summand(), 0.9)?, t9.summand())?;
    let z = SpectralSummand::from_realization(z.realization().minimal_reduce(tol.minimal)?)?;

    let b = balance(&z, &tol)?;
    println!("n = {}, c = {}", z.states(), b.codegree_half);
    for (k, s) in b.sigma.iter().enumerate() {
        let bound = pdf_error_bound(relative_error_bound(&b.sigma, k + 1));
        println!("σ{:<2} = {s:.3e}   pdf bound keeping {} states: {bound:.2e}", k + 1, k + 1);
    }

    let tr = truncate_to_tolerance(&z, 0.02, &tol)?;
    println!("{}", serde_json::to_string(&tr.record()).unwrap());
    let (mut worst, full0) = (0.0_f64, z.density_at(0.0)?);
    let red0 = tr.summand.density_at(0.0)?;
    for i in 0..=400 {
        let x = -20.0 + 0.1 * i as f64;
        let p = z.density_at(x)? / full0;
        let q = tr.summand.density_at(x)? / red0;
        worst = worst.max((p - q).abs() / p);
    }
    println!("measured shape error {worst:.2e} (bound {:.2e})", tr.achieved_bound);
    Ok(())
}
