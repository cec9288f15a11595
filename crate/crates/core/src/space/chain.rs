//! The iterated chain E ⊂ X_1, X_2, … of spaces
//! X_k = davis(sb(X_{k−1}, r=r_k), q=s_k, p=t_k, m=…).
//!
//! Parameter selection is done in exact rationals. The true convexity and
//! concavity exponents of X_k are not computable, so the recipe runs on
//! proxies, each labelled in the descriptor: the lower-estimate exponent r_k
//! stands in for q_k, and a configured value (by default s_k) for p_k.

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::davis::{Schedule, Truncation};
use crate::error::{Error, Result};
use crate::space::expr::SpaceExpr;

pub const CHAIN_VERSION: &str = "chain-v1";

/// Exponents of the base space E: p0-convex and q0-concave, 1 < p0 ≤ q0.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainBase {
    pub p0: BigRational,
    pub q0: BigRational,
    /// Defaults to lp(p0).
    pub expr: Option<SpaceExpr>,
}

impl ChainBase {
    pub fn new(p0: BigRational, q0: BigRational) -> Self {
        Self { p0, q0, expr: None }
    }

    pub fn lp(p: i64) -> Self {
        Self::new(rat(p, 1), rat(p, 1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainPolicy {
    /// r_{k+1} = max{r_k, q_k-proxy} + r_step; r_1 = q_0 + r_step.
    pub r_step: BigRational,
    /// s_{k+1} = 1 + s_frac·(p_k-proxy − 1).
    pub s_frac: BigRational,
    /// t_{k+1} = 1 + t_frac·(p_k-proxy − 1).
    pub t_frac: BigRational,
    /// Configured p-convexity proxy for each Davis level; `None` uses s_k.
    pub p_proxy: Option<BigRational>,
    pub schedule: Schedule,
    pub truncation: Truncation,
}

impl Default for ChainPolicy {
    fn default() -> Self {
        Self {
            r_step: BigRational::one(),
            s_frac: rat(1, 3),
            t_frac: rat(2, 3),
            p_proxy: None,
            schedule: Schedule::Pow2,
            truncation: Truncation::Fixed(6),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exact {
    /// Reduced fraction, e.g. "10/9".
    pub exact: String,
    pub value: f64,
}

impl Exact {
    fn of(x: &BigRational) -> Self {
        Self {
            exact: x.to_string(),
            value: to_f64(x),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainLevel {
    pub k: usize,
    pub r: Exact,
    pub s: Exact,
    pub t: Exact,
    /// Stand-in for q_k: the lower-estimate exponent r_k.
    pub q_proxy: Exact,
    /// Stand-in for p_k: the configured value, or s_k.
    pub p_proxy: Exact,
    pub proxy_sources: ProxySources,
    pub schedule: Schedule,
    pub truncation: Truncation,
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxySources {
    pub q_proxy: String,
    pub p_proxy: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyRecord {
    pub r_step: String,
    pub s_frac: String,
    pub t_frac: String,
    pub p_proxy: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainDescriptor {
    pub version: String,
    pub p0: Exact,
    pub q0: Exact,
    pub base_expr: String,
    pub policy: PolicyRecord,
    pub levels: Vec<ChainLevel>,
    #[serde(skip)]
    exact_levels: Vec<ExactLevel>,
    #[serde(skip)]
    exact_base: Option<(BigRational, BigRational)>,
}

#[derive(Clone, Debug, PartialEq)]
struct ExactLevel {
    r: BigRational,
    s: BigRational,
    t: BigRational,
    q_proxy: BigRational,
    p_proxy: BigRational,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("chain parameters are moderate rationals")
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::invalid(format!("{x} is not a finite number")))
}

pub fn build_chain(base: &ChainBase, k: usize, policy: &ChainPolicy) -> Result<ChainDescriptor> {
    if k == 0 {
        return Err(Error::invalid("chain length k must be at least 1"));
    }
    let one = BigRational::one();
    if base.p0 <= one {
        return Err(Error::invalid(format!("chain base needs p0 > 1, got {}", base.p0)));
    }
    if base.q0 < base.p0 {
        return Err(Error::invalid(format!(
            "chain base needs p0 ≤ q0, got p0={}, q0={}",
            base.p0, base.q0
        )));
    }
    if policy.r_step <= BigRational::zero() {
        return Err(Error::invalid("policy r_step must be positive"));
    }
    if !(BigRational::zero() < policy.s_frac && policy.s_frac < policy.t_frac && policy.t_frac < one) {
        return Err(Error::invalid("policy needs 0 < s_frac < t_frac < 1"));
    }
    let base_expr = base.expr.clone().unwrap_or_else(|| SpaceExpr::lp(to_f64(&base.p0)));

    let mut levels = Vec::with_capacity(k);
    let mut exact_levels: Vec<ExactLevel> = Vec::with_capacity(k);
    let mut expr = base_expr.clone();
    for level in 1..=k {
        let (r, p_prev) = match exact_levels.last() {
            None => (&base.q0 + &policy.r_step, base.p0.clone()),
            Some(prev) => {
                let m = if prev.r >= prev.q_proxy { &prev.r } else { &prev.q_proxy };
                (m + &policy.r_step, prev.p_proxy.clone())
            }
        };
        let s = &one + &policy.s_frac * (&p_prev - &one);
        let t = &one + &policy.t_frac * (&p_prev - &one);
        let q_proxy = r.clone();
        let (p_proxy, p_source) = match &policy.p_proxy {
            Some(v) => (v.clone(), "configured".to_string()),
            None => (s.clone(), format!("s_{level}")),
        };
        expr = SpaceExpr::davis(
            SpaceExpr::sb(expr, to_f64(&r)),
            to_f64(&s),
            to_f64(&t),
            policy.schedule.clone(),
            Some(policy.truncation),
        );
        levels.push(ChainLevel {
            k: level,
            r: Exact::of(&r),
            s: Exact::of(&s),
            t: Exact::of(&t),
            q_proxy: Exact::of(&q_proxy),
            p_proxy: Exact::of(&p_proxy),
            proxy_sources: ProxySources {
                q_proxy: format!("lower estimate r_{level}"),
                p_proxy: p_source,
            },
            schedule: policy.schedule.clone(),
            truncation: policy.truncation,
            expr: expr.to_string(),
        });
        exact_levels.push(ExactLevel {
            r,
            s,
            t,
            q_proxy,
            p_proxy,
        });
    }
    let descriptor = ChainDescriptor {
        version: CHAIN_VERSION.into(),
        p0: Exact::of(&base.p0),
        q0: Exact::of(&base.q0),
        base_expr: base_expr.to_string(),
        policy: PolicyRecord {
            r_step: policy.r_step.to_string(),
            s_frac: policy.s_frac.to_string(),
            t_frac: policy.t_frac.to_string(),
            p_proxy: policy.p_proxy.as_ref().map(|v| v.to_string()),
        },
        levels,
        exact_levels,
        exact_base: Some((base.p0.clone(), base.q0.clone())),
    };
    descriptor.check_inequalities()?;
    Ok(descriptor)
}

impl ChainDescriptor {
    /// Strict inequalities of the recipe, checked in rationals:
    /// r_1 > q_0, r_{k+1} > max{r_k, q_k-proxy}, 1 < s_{k+1} < t_{k+1} < p_k-proxy.
    pub fn check_inequalities(&self) -> Result<()> {
        let (p0, q0) = match &self.exact_base {
            Some(b) => b.clone(),
            None => (parse_rational(&self.p0.exact)?, parse_rational(&self.q0.exact)?),
        };
        let levels = if self.exact_levels.len() == self.levels.len() {
            self.exact_levels.clone()
        } else {
            self.levels
                .iter()
                .map(|l| {
                    Ok(ExactLevel {
                        r: parse_rational(&l.r.exact)?,
                        s: parse_rational(&l.s.exact)?,
                        t: parse_rational(&l.t.exact)?,
                        q_proxy: parse_rational(&l.q_proxy.exact)?,
                        p_proxy: parse_rational(&l.p_proxy.exact)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        };
        let one = BigRational::one();
        let fail = |msg: String| Err(Error::Precondition(msg));
        for (i, l) in levels.iter().enumerate() {
            let k = i + 1;
            let (prev_r, prev_q, prev_p) = match i {
                0 => (None, q0.clone(), p0.clone()),
                _ => {
                    let p = &levels[i - 1];
                    (Some(p.r.clone()), p.q_proxy.clone(), p.p_proxy.clone())
                }
            };
            if let Some(pr) = prev_r {
                if l.r <= pr {
                    return fail(format!("r_{k} = {} is not above r_{} = {pr}", l.r, k - 1));
                }
            }
            if l.r <= prev_q {
                return fail(format!("r_{k} = {} is not above the previous q-exponent {prev_q}", l.r));
            }
            if !(one < l.s && l.s < l.t && l.t < prev_p) {
                return fail(format!(
                    "need 1 < s_{k} < t_{k} < {prev_p}, got s={}, t={}",
                    l.s, l.t
                ));
            }
        }
        Ok(())
    }

    pub fn expr(&self, k: usize) -> Result<SpaceExpr> {
        let level = self
            .levels
            .get(k.wrapping_sub(1))
            .ok_or_else(|| Error::invalid(format!("chain has no level {k}")))?;
        crate::space::parse(&level.expr)
    }

    pub fn top(&self) -> Result<SpaceExpr> {
        self.expr(self.levels.len())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::invalid(format!("not an exact rational: {text:?}"));
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = text.parse::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    // decimals such as "2.5" are read exactly
    let (int, frac) = text.split_once('.').ok_or_else(bad)?;
    let neg = int.starts_with('-');
    let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let d = num::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(n, d);
    Ok(if neg { -v } else { v })
}
