//! Splitting a block sequence into a stable profile and a vanishing part.

use banachkit::spreading::DEFAULT_CAUCHY_TOL;
use banachkit::{decompose, parse, profile_norm, SequenceGenerator};

pub fn run_example() -> banachkit::Result<()> {
    let gen = SequenceGenerator::Planted {
        profile: vec![0.8, 0.6],
        small: 0.3,
        decay: 0.5,
        block_len: 3,
        space: "sb(lp(2), r=2)".into(),
    };
    let d = decompose(&gen, &[0.5, 0.4], 24, DEFAULT_CAUCHY_TOL)?;
    println!("status {:?}, recovered profile {:?}", d.status, d.profile.lambda);
    for s in d.splits.iter().take(4) {
        println!("n = {}: y = {:?}, z = {:?}", s.n, s.y, s.z);
    }
    let pn = profile_norm(&d.profile, &[1.0, 1.0], &parse("lp(2)")?)?;
    println!("profile norm of (1, 1) in lp(2): {pn:.9}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> banachkit::Result<()> {
    run_example()
}
