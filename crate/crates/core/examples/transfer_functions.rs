//! Build scalar realizations, compose them and check against direct evaluation.
//!
//!     cargo run --example transfer_functions

use ratvol::numerics::C64;
use ratvol::ratpdf::compose;
use ratvol::realization::Realization;

fn main() -> ratvol::Result<()> {
    // g1(s) = 2/(s+1) + 0.5, g2(s) = 1/(s+3) + 4
    let g1 = Realization::scalar(C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.5, 0.0));
    let g2 = Realization::scalar(C64::new(-3.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(4.0, 0.0));
    let g = compose(&g1, &g2)?;
    println!("g1∘g2 has {} states", g.states());
    for s in [C64::new(0.0, 1.0), C64::new(2.0, -0.5), C64::new(-0.3, 4.0)] {
        let direct = g1.eval(g2.eval(s)?)?;
        let via = g.eval(s)?;
        println!("s = {s:>12.3}  g1(g2(s)) = {direct:.6}  realization = {via:.6}");
    }
    let sum = g1.add(&g2)?;
    let prod = g1.multiply(&g2)?;
    let s = C64::new(0.0, 2.0);
    println!("sum at 2i: {:.6}, product at 2i: {:.6}", sum.eval(s)?, prod.eval(s)?);
    // 2/(s+1) · 1/(s+3) has a double zero at infinity
    let h1 = Realization::scalar(C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0));
    let h2 = Realization::scalar(C64::new(-3.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    println!("co-degree of h1·h2: {}", h1.multiply(&h2)?.codegree(1e-10)?);
    Ok(())
}
