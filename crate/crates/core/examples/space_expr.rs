//! Parsing, printing and evaluating nested space expressions.

use banachkit::space::format;
use banachkit::{meta_of, parse, Evaluator, FVec};

pub fn run_example() -> banachkit::Result<()> {
    let expr = parse("sb( davis(lp(2), q=1.5, p=2.5, m=pow2, K=4), r=3 )")?;
    println!("canonical: {}", format(&expr));
    println!("metadata: {:?}", meta_of(&expr));

    let ev = Evaluator::new(&expr)?;
    let x = FVec::from_dense(&[1.0, -0.5, 0.25])?;
    let (value, cert) = ev.norm_of(&x)?;
    println!("‖x‖ = {value:.9}");
    println!("certificate: {}", serde_json::to_string(&cert)?);

    match parse("sb(lp(2), r=)") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> banachkit::Result<()> {
    run_example()
}
