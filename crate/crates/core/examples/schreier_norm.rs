//! Schreier–Baernstein norms: exact partition search, the brute-force
//! oracle, and the greedy heuristic for long supports.

use banachkit::{sb_norm, sb_norm_oracle, FVec, Lp, SbMode};

pub fn run_example() -> banachkit::Result<()> {
    let base = Lp::new(1.0)?;
    let x = FVec::from_dense(&[1.0, 1.0, 1.0])?;
    let exact = sb_norm(&x, &base, 2.0, SbMode::Exact)?;
    println!("‖(1,1,1)‖ in sb(lp(1), r=2) = {} (√5 = {})", exact.value, 5f64.sqrt());
    println!("optimal partition {:?}, block norms {:?}", exact.partition.sets, exact.block_norms);
    println!("oracle agrees: {}", sb_norm_oracle(&x, &base, 2.0)? == exact.value);

    let y = FVec::from_pairs((1..=20).map(|i| (i, 1.0 / i as f64)))?;
    let h = sb_norm(&y, &Lp::new(2.0)?, 3.0, SbMode::Heuristic)?;
    println!("heuristic lower bound on a 20-term vector: {:.6} (exact: {})", h.value, h.exact);
    Ok(())
}

#[allow(dead_code)]
fn main() -> banachkit::Result<()> {
    run_example()
}
