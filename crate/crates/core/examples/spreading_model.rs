//! Spreading-model estimates: far-out finite sections evaluated over a grid
//! of shifts.

use banachkit::spreading::geometric_grid;
use banachkit::{parse, singular_shift, sm_estimate, sm_exact_schreier, SequenceGenerator};

pub fn run_example() -> banachkit::Result<()> {
    let coeffs = [1.0, -0.5, 0.25];
    let space = "sb(lp(1), r=2)";
    let est = sm_estimate(&SequenceGenerator::basis(space), &coeffs, &geometric_grid(3, 3, 4, true), 1e-9)?;
    println!("{space} basis: estimates {:?}", est.values);
    println!("exact value {:.12}", sm_exact_schreier(&parse(space)?, &coeffs)?);

    let shifted = singular_shift(&SequenceGenerator::basis("lp(2)"));
    let est = sm_estimate(&shifted, &[1.0, 1.0], &geometric_grid(2, 2, 4, false), 1e-9)?;
    println!("x_n = e_1 + e_(n+1) in lp(2): {:.12} (stabilized: {})", est.value, est.stabilized);
    Ok(())
}

#[allow(dead_code)]
fn main() -> banachkit::Result<()> {
    run_example()
}
