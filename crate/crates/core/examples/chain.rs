//! The iterated chain X_k = davis(sb(X_{k−1}, r_k), s_k, t_k) over ℓ_2.

use banachkit::{build_chain, ChainBase, ChainPolicy, Evaluator, FVec};

pub fn run_example() -> banachkit::Result<()> {
    let chain = build_chain(&ChainBase::lp(2), 2, &ChainPolicy::default())?;
    chain.check_inequalities()?;
    for level in &chain.levels {
        println!("X_{}: r = {}, s = {}, t = {}", level.k, level.r.exact, level.s.exact, level.t.exact);
        println!("     {}", level.expr);
    }
    let ev = Evaluator::new(&chain.top()?)?;
    let x = FVec::from_dense(&[1.0, 0.5, -0.25, 0.125])?;
    println!("‖x‖ in X_2 = {:.9}", ev.norm(&x)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> banachkit::Result<()> {
    run_example()
}
