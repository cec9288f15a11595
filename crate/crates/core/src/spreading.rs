//! Finite-scale spreading-model estimates.
//!
//! Spreading models are limits over far-out sections Σ a_i x_{k_i}; here they
//! are only ever estimated on finite shift grids, and every estimate carries
//! its stabilization verdict.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{meta_of, parse, EvalOptions, Evaluator, NormCache, SpaceExpr, SpaceNode};
use crate::vector::{lp_of, rearrange_dec, threshold_split, FVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum SupportRule {
    /// Segment n is [(n−1)·L + 1, n·L].
    Consecutive,
    /// Segments of length L separated by `gap` unused indices.
    Spaced { gap: usize },
}

/// A sequence x_1, x_2, … in a named space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SequenceGenerator {
    /// x_n = e_n
    Basis { space: String },
    /// x_n = Σ_i λ_i e_{s_n + i}, successive segments per the support rule.
    Block {
        profile: Vec<f64>,
        support: SupportRule,
        space: String,
    },
    /// x_n = x
    Constant { x: FVec, space: String },
    /// x_n = y_1 + y_{n+1} for the inner sequence y.
    Shifted { inner: Box<SequenceGenerator> },
    /// x_n = vectors[n−1]
    Custom { vectors: Vec<FVec>, space: String },
    /// Profile entries followed by `block_len` entries equal to
    /// small·n^{−decay}, on successive disjoint segments.
    Planted {
        profile: Vec<f64>,
        small: f64,
        decay: f64,
        block_len: usize,
        space: String,
    },
}

impl SequenceGenerator {
    pub fn basis(space: &str) -> Self {
        SequenceGenerator::Basis { space: space.into() }
    }

    pub fn space(&self) -> &str {
        match self {
            SequenceGenerator::Basis { space }
            | SequenceGenerator::Block { space, .. }
            | SequenceGenerator::Constant { space, .. }
            | SequenceGenerator::Custom { space, .. }
            | SequenceGenerator::Planted { space, .. } => space,
            SequenceGenerator::Shifted { inner } => inner.space(),
        }
    }

    pub fn space_expr(&self) -> Result<SpaceExpr> {
        parse(self.space())
    }

    /// Length of the sequence, if finite.
    pub fn len(&self) -> Option<usize> {
        match self {
            SequenceGenerator::Custom { vectors, .. } => Some(vectors.len()),
            SequenceGenerator::Shifted { inner } => inner.len().map(|l| l.saturating_sub(1)),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn vector(&self, n: usize) -> Result<FVec> {
        if n == 0 {
            return Err(Error::invalid("sequences are indexed from 1"));
        }
        match self {
            SequenceGenerator::Basis { .. } => Ok(FVec::unit(n)),
            SequenceGenerator::Block { profile, support, .. } => {
                let stride = profile.len()
                    + match support {
                        SupportRule::Consecutive => 0,
                        SupportRule::Spaced { gap } => *gap,
                    };
                let start = (n - 1) * stride;
                FVec::from_pairs(profile.iter().enumerate().map(|(i, &v)| (start + i + 1, v)))
            }
            SequenceGenerator::Constant { x, .. } => Ok(x.clone()),
            SequenceGenerator::Shifted { inner } => Ok(inner.vector(1)?.add(&inner.vector(n + 1)?)),
            SequenceGenerator::Custom { vectors, .. } => vectors
                .get(n - 1)
                .cloned()
                .ok_or_else(|| Error::invalid(format!("custom sequence has only {} vectors", vectors.len()))),
            SequenceGenerator::Planted {
                profile,
                small,
                decay,
                block_len,
                ..
            } => {
                let width = profile.len() + block_len;
                let start = (n - 1) * width;
                let tail = small * (n as f64).powf(-decay);
                let head = profile.iter().enumerate().map(|(i, &v)| (start + i + 1, v));
                let rest = (0..*block_len).map(|i| (start + profile.len() + i + 1, tail));
                FVec::from_pairs(head.chain(rest))
            }
        }
    }

    /// Σ a_i x_{k_i}
    pub fn section(&self, coeffs: &[f64], shifts: &[usize]) -> Result<FVec> {
        let mut acc = FVec::new();
        for (&a, &k) in coeffs.iter().zip(shifts) {
            acc = acc.add(&self.vector(k)?.scale(a));
        }
        Ok(acc)
    }
}

/// The shifted sequence x′_n = x_1 + x_{n+1}.
pub fn singular_shift(gen: &SequenceGenerator) -> SequenceGenerator {
    SequenceGenerator::Shifted {
        inner: Box::new(gen.clone()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmEstimate {
    pub coeffs: Vec<f64>,
    pub shifts: Vec<Vec<usize>>,
    pub values: Vec<f64>,
    pub stabilized: bool,
    /// The last grid value; meaningful as an estimate only when stabilized.
    pub value: f64,
    /// |values[t+1] − values[t]|
    pub delta_schedule: Vec<f64>,
    pub tol: f64,
}

/// Shift tuples starting at K, 2K, 4K, … with K = max(k0, n). Consecutive
/// tuples are (K, K+1, …, K+n−1); spread ones are (K, 2K, …, nK).
pub fn geometric_grid(n: usize, k0: usize, count: usize, spread: bool) -> Vec<Vec<usize>> {
    let base = k0.max(n).max(1);
    (0..count)
        .map(|t| {
            let k = base << t;
            (0..n).map(|i| if spread { k * (i + 1) } else { k + i }).collect()
        })
        .collect()
}

fn check_shifts(n: usize, shifts: &[Vec<usize>]) -> Result<()> {
    for tuple in shifts {
        if tuple.len() != n {
            return Err(Error::invalid(format!(
                "shift tuple {tuple:?} has length {}, expected {n}",
                tuple.len()
            )));
        }
        if tuple[0] < n {
            return Err(Error::Precondition(format!(
                "shift tuple {tuple:?} starts below n = {n}"
            )));
        }
        if tuple.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition(format!("shift tuple {tuple:?} is not strictly increasing")));
        }
    }
    Ok(())
}

pub fn sm_estimate(gen: &SequenceGenerator, coeffs: &[f64], shifts: &[Vec<usize>], tol: f64) -> Result<SmEstimate> {
    let ev = Evaluator::new(&gen.space_expr()?)?;
    sm_estimate_with(gen, &ev, coeffs, shifts, tol)
}

/// As [`sm_estimate`], measuring in a caller-supplied evaluator.
pub fn sm_estimate_with(
    gen: &SequenceGenerator,
    ev: &Evaluator,
    coeffs: &[f64],
    shifts: &[Vec<usize>],
    tol: f64,
) -> Result<SmEstimate> {
    if coeffs.is_empty() {
        return Err(Error::invalid("at least one coefficient is required"));
    }
    if shifts.is_empty() {
        return Err(Error::invalid("the shift grid is empty"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    check_shifts(coeffs.len(), shifts)?;
    let values: Vec<f64> = shifts
        .par_iter()
        .map(|tuple| ev.norm(&gen.section(coeffs, tuple)?))
        .collect::<Result<_>>()?;
    let delta_schedule: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let stabilized = values.len() >= 3 && {
        let last = &values[values.len() - 3..];
        (last[0] - last[1]).abs() < tol && (last[1] - last[2]).abs() < tol && (last[0] - last[2]).abs() < tol
    };
    Ok(SmEstimate {
        coeffs: coeffs.to_vec(),
        shifts: shifts.to_vec(),
        value: *values.last().unwrap(),
        values,
        stabilized,
        delta_schedule,
        tol,
    })
}

/// Exact spreading-model value of the unit basis of SB(X, r): the X-norm of
/// Σ a_i e_i, valid when X has a spreading basis and a lower estimate with
/// exponent at most r.
pub fn sm_exact_schreier(expr: &SpaceExpr, coeffs: &[f64]) -> Result<f64> {
    let (child, r) = match &expr.root {
        SpaceNode::Sb { child, r } => (child.as_ref().clone(), *r),
        _ => return Err(Error::Precondition(format!("{expr} is not an SB space"))),
    };
    let child = SpaceExpr::new(child);
    let meta = meta_of(&child);
    match meta.lower_estimate_r {
        Some(q) if q <= r => {}
        other => {
            return Err(Error::Precondition(format!(
                "base space needs a lower estimate exponent ≤ r = {r}, has {other:?}"
            )))
        }
    }
    if coeffs.len() > 1 && !meta.spreading_basis {
        return Err(Error::Precondition(format!("the basis of {child} is not spreading")));
    }
    let x = FVec::from_pairs(coeffs.iter().enumerate().map(|(i, &a)| (i + 1, a)))?;
    Evaluator::new(&child)?.norm(&x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MDeltaRow {
    pub delta: f64,
    /// #{i : x̃_N(i) ≥ δ}
    pub count: usize,
    pub counts_stable: bool,
    /// max over i ≤ count of the spread of x̃_n(i) over the second half.
    pub spread: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub lambda: Vec<f64>,
    /// ‖z_n‖_∞ for n = 1..N.
    pub residuals: Vec<f64>,
    pub m_delta_table: Vec<MDeltaRow>,
    /// Set when every δ was accepted and small entries remain, so the
    /// profile may continue below the smallest δ.
    pub truncated: bool,
    /// ‖z_N‖ in ℓ_s, s the lower-estimate exponent of the space (ℓ_∞ if none).
    pub tail_mass: f64,
}

impl Profile {
    /// A bare profile, validated to be non-increasing and non-negative.
    pub fn from_lambda(lambda: Vec<f64>) -> Result<Self> {
        if lambda.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return Err(Error::invalid("profile entries must be finite and non-negative"));
        }
        if lambda.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("profile must be non-increasing"));
        }
        Ok(Self {
            lambda,
            residuals: Vec::new(),
            m_delta_table: Vec::new(),
            truncated: false,
            tail_mass: 0.0,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecomposeStatus {
    Recovered,
    /// Counts never stabilized, even at the largest δ.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub n: usize,
    pub threshold: f64,
    pub y: FVec,
    pub z: FVec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub status: DecomposeStatus,
    pub profile: Profile,
    pub splits: Vec<Split>,
}

pub const MIN_HORIZON: usize = 10;
pub const DEFAULT_CAUCHY_TOL: f64 = 1e-9;

/// Splits x_n = y_n + z_n into a part converging to a profile and a small part.
///
/// The decreasing rearrangements x̃_n are computed up to the horizon N. A δ
/// level is accepted while #{i : x̃_n(i) ≥ δ} is constant over the second half
/// of the horizon and those leading entries vary by at most `cauchy_tol`
/// there; the first failure stops the scan. With L the count at the last
/// accepted level, λ = x̃_N(1..L) and each x_n is split at its L-th largest
/// magnitude.
pub fn decompose(gen: &SequenceGenerator, deltas: &[f64], horizon: usize, cauchy_tol: f64) -> Result<Decomposition> {
    if horizon < MIN_HORIZON {
        return Err(Error::Precondition(format!(
            "horizon {horizon} is below the minimum {MIN_HORIZON} needed for Cauchy detection"
        )));
    }
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("δ schedule must be positive and strictly decreasing"));
    }
    let xs: Vec<FVec> = (1..=horizon).map(|n| gen.vector(n)).collect::<Result<_>>()?;
    let tilde: Vec<Vec<f64>> = xs.iter().map(|x| rearrange_dec(x).values()).collect();
    let half = horizon / 2;
    let second = &tilde[half..];

    let mut table = Vec::with_capacity(deltas.len());
    let mut accepted_count: Option<usize> = None;
    let mut scanning = true;
    for &delta in deltas {
        let counts: Vec<usize> = tilde.iter().map(|t| t.iter().take_while(|&&v| v >= delta).count()).collect();
        let count = *counts.last().unwrap();
        let counts_stable = counts[half..].iter().all(|&c| c == count);
        let spread = (0..count)
            .map(|i| {
                let (lo, hi) = second
                    .iter()
                    .map(|t| t[i])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                hi - lo
            })
            .fold(0.0_f64, f64::max);
        let accepted = scanning && counts_stable && spread <= cauchy_tol;
        if accepted {
            accepted_count = Some(count);
        } else {
            scanning = false;
        }
        table.push(MDeltaRow {
            delta,
            count: if counts_stable { count } else { counts[half..].iter().copied().max().unwrap_or(0) },
            counts_stable,
            spread,
            accepted,
        });
    }

    let status = if accepted_count.is_some() {
        DecomposeStatus::Recovered
    } else {
        DecomposeStatus::Inconclusive
    };
    let l = accepted_count.unwrap_or(0);
    let lambda = tilde[horizon - 1][..l.min(tilde[horizon - 1].len())].to_vec();

    let mut splits = Vec::with_capacity(horizon);
    for (idx, (x, t)) in xs.iter().zip(&tilde).enumerate() {
        let (threshold, y, z) = if l == 0 || t.is_empty() {
            (f64::INFINITY, FVec::new(), x.clone())
        } else {
            let tau = t[(l - 1).min(t.len() - 1)];
            let (y, z) = threshold_split(x, tau)?;
            (tau, y, z)
        };
        splits.push(Split {
            n: idx + 1,
            threshold,
            y,
            z,
        });
    }
    let residuals: Vec<f64> = splits
        .iter()
        .map(|s| s.z.iter().fold(0.0_f64, |m, (_, v)| m.max(v.abs())))
        .collect();
    let last_z = &splits[horizon - 1].z;
    let s = gen.space_expr().ok().and_then(|e| meta_of(&e).lower_estimate_r);
    let tail_mass = lp_of(&last_z.values(), s.unwrap_or(f64::INFINITY));
    let truncated = table.iter().all(|r| r.accepted) && !last_z.is_zero();
    Ok(Decomposition {
        status,
        profile: Profile {
            lambda,
            residuals,
            m_delta_table: table,
            truncated,
            tail_mass,
        },
        splits,
    })
}

/// ‖Σ_k a_k u_k‖ where u_k are disjoint copies of λ; u_k occupies indices
/// (k−1)·L + 1 ..= k·L.
pub fn profile_norm(profile: &Profile, coeffs: &[f64], space: &SpaceExpr) -> Result<f64> {
    let l = profile.lambda.len();
    let placement: Vec<Vec<usize>> = (0..coeffs.len()).map(|k| (k * l + 1..=(k + 1) * l).collect()).collect();
    profile_norm_at(profile, coeffs, space, &placement)
}

/// As [`profile_norm`] with an explicit placement: u_k puts λ_i at
/// `placement[k][i]`. The sets must be pairwise disjoint.
pub fn profile_norm_at(profile: &Profile, coeffs: &[f64], space: &SpaceExpr, placement: &[Vec<usize>]) -> Result<f64> {
    if !meta_of(space).symmetric {
        return Err(Error::Precondition(format!(
            "{space} is not symmetric; the value would depend on the placement"
        )));
    }
    let x = materialize(profile, coeffs, placement)?;
    Evaluator::with_options(space, EvalOptions::default(), NormCache::new())?.norm(&x)
}

fn materialize(profile: &Profile, coeffs: &[f64], placement: &[Vec<usize>]) -> Result<FVec> {
    if placement.len() != coeffs.len() {
        return Err(Error::invalid("one placement per coefficient is required"));
    }
    let mut pairs = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (k, (&a, slots)) in coeffs.iter().zip(placement).enumerate() {
        if slots.len() < profile.lambda.len() {
            return Err(Error::invalid(format!("placement {k} has too few slots")));
        }
        for (&lam, &i) in profile.lambda.iter().zip(slots) {
            if !seen.insert(i) {
                return Err(Error::invalid(format!("placements overlap at index {i}")));
            }
            pairs.push((i, a * lam));
        }
    }
    FVec::from_pairs(pairs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CesaroReport {
    pub ns: Vec<usize>,
    /// ‖(1/n)·Σ_{i≤n} x_i‖
    pub values: Vec<f64>,
}

pub fn cesaro_diagnostic(gen: &SequenceGenerator, horizon: usize) -> Result<CesaroReport> {
    let ev = Evaluator::new(&gen.space_expr()?)?;
    let mut sum = FVec::new();
    let mut ns = Vec::with_capacity(horizon);
    let mut values = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        sum = sum.add(&gen.vector(n)?);
        ns.push(n);
        values.push(ev.norm(&sum.scale(1.0 / n as f64))?);
    }
    Ok(CesaroReport { ns, values })
}

/// min and max of ‖Σ a_k u_k^A‖_A / ‖Σ a_k u_k^B‖_B over the sample,
/// skipping coefficient vectors where either side vanishes.
pub fn equiv_constants(
    profile_a: &Profile,
    profile_b: &Profile,
    space_a: &SpaceExpr,
    space_b: &SpaceExpr,
    n: usize,
    sample: &[Vec<f64>],
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    for p in [profile_a, profile_b] {
        if p.lambda.iter().all(|&l| l == 0.0) {
            return Err(Error::Precondition("degenerate profile (all zeros)".into()));
        }
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for coeffs in sample {
        if coeffs.len() != n {
            return Err(Error::invalid(format!("sample vector has length {}, expected {n}", coeffs.len())));
        }
        let a = profile_norm(profile_a, coeffs, space_a)?;
        let b = profile_norm(profile_b, coeffs, space_b)?;
        if a == 0.0 || b == 0.0 {
            continue;
        }
        lo = lo.min(a / b);
        hi = hi.max(a / b);
    }
    if hi == 0.0 {
        return Err(Error::Precondition("no sample vector has non-zero norm on both sides".into()));
    }
    Ok((lo, hi))
}

/// All 2^n sign vectors in {−1, 1}^n.
pub fn corners(n: usize) -> Vec<Vec<f64>> {
    (0u64..1 << n)
        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
        .collect()
}
