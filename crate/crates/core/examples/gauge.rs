//! Interpolation gauges of m·B_q + (1/m)·B_p, with the decomposition that
//! certifies each value.
//!
//! ```bash
//! cargo run --example gauge
//! ```

use banachkit::{flat_gauge, gauge2_qpm, gauge_qpm, FVec, Flat, GaugeParams, GaugeVariant};

pub fn run_example() -> banachkit::Result<()> {
    let params = GaugeParams::new(1.5, 2.5, 2.0)?;
    let x = FVec::from_dense(&[0.9, -0.4, 0.25, 0.1])?;

    let g = gauge_qpm(&x, params, 1e-10)?;
    let g2 = gauge2_qpm(&x, params, 1e-10)?;
    println!("x = {x:?}");
    println!("gauge  = {:.12} (certified lower bound {:.12})", g.value, g.lower_bound);
    println!("gauge2 = {:.12}", g2.value);
    println!("witness y = {:?}", g.y);
    println!("witness z = {:?}", g.z);
    println!("reconstruction residual {:e}", g.residual_certificate);

    // Flat vectors stay symbolic, so long supports cost nothing.
    for e in [1, 3, 6] {
        let n = 10usize.pow(e);
        let v = flat_gauge(&Flat::unit_lp(n, params.p), params, GaugeVariant::Gauge)?;
        println!("n = 10^{e}: gauge(n^(-1/p) 1_n) = {v:.9}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> banachkit::Result<()> {
    run_example()
}
