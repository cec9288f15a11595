//! Davis diagonal spaces: ℓ_2-sums of gauges over a schedule of m_k, with a
//! certified bound on the truncated tail.

use banachkit::{DavisParams, DavisSpace, FVec, Lp, Norm, Schedule, Truncation};

pub fn run_example() -> banachkit::Result<()> {
    let space = DavisSpace::new(Lp::new(2.0)?, DavisParams::new(1.5, 2.5, Schedule::Pow2))?;
    let e1 = space.evaluate(&FVec::unit(1))?;
    println!("‖e_1‖ = {:.6} using K = {} components, tail ≤ {:e}", e1.value, e1.k_used, e1.tail_bound);

    let x = FVec::from_dense(&[0.5, 0.5, -0.5, 0.5])?;
    for k in [2, 4, 8] {
        let fixed = DavisSpace::new(
            Lp::new(2.0)?,
            DavisParams::new(1.5, 2.5, Schedule::Pow2).with_truncation(Truncation::Fixed(k)),
        )?;
        let r = fixed.evaluate(&x)?;
        println!("K = {k}: value {:.9}, omitted mass ≤ {:.3e}", r.value, r.tail_bound);
    }
    println!("as a Norm: {:.9}", space.norm(&x)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> banachkit::Result<()> {
    run_example()
}
