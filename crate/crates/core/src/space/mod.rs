//! Space expressions: `lp(p)`, `sb(X, r=…)` and `davis(X, q=…, p=…, m=…)`.

pub mod chain;
pub mod eval;
pub mod expr;
pub mod meta;
pub mod parse;

pub use chain::{build_chain, ChainBase, ChainDescriptor, ChainLevel, ChainPolicy};
pub use eval::{norm_of, Certificate, EvalOptions, Evaluator, NormCache};
pub use expr::{format, SpaceExpr, SpaceNode};
pub use meta::{meta_of, SpaceMeta};
pub use parse::parse;
