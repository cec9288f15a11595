//! Interpolation gauges ‖x‖_{q,p}^m and |||x|||_{q,p}^m.
//!
//! Both gauges are infima over decompositions x = m·y + (1/m)·z of
//! max(‖y‖_q, ‖z‖_p) and (‖y‖_q² + ‖z‖_p²)^{1/2} respectively. With
//! w = m·y the problem is a trade-off between A = ‖w‖_q and B = ‖x − w‖_p,
//! and every optimal decomposition lies on the Pareto frontier of that
//! trade-off. The frontier is traced by one scalar parameter `s`: for each
//! coordinate magnitude a the kept part w ∈ [0, a] solves the stationarity
//! equation (a − w)^{p−1} = e^s·w^{q−1} (for q = 1 this degenerates to the
//! water-filling rule w = max(0, a − e^{s/(p−1)})). A decreases and B
//! increases in `s`, so both gauges reduce to a bisection on `s`:
//!
//! * ‖·‖: balance A/m = m·B;
//! * |||·|||: stationarity of A²/m² + m²B², convex along the frontier.
//!
//! Inputs are reduced to the multiset of magnitudes first (both balls are
//! symmetric), and witnesses are mapped back with the original signs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{lp_of, Flat, FVec};

const MAX_BISECTIONS: usize = 200;
const MAX_NEWTON: usize = 100;
const MAX_BRACKET_STEPS: usize = 80;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeParams {
    pub q: f64,
    pub p: f64,
    /// Scale of the two balls; any real m ≥ 1 is accepted.
    pub m: f64,
}

impl GaugeParams {
    pub fn new(q: f64, p: f64, m: f64) -> Result<Self> {
        let params = Self { q, p, m };
        params.validate()?;
        Ok(params)
    }

    /// 1 ≤ q < p < ∞ and m ≥ 1.
    pub fn validate(&self) -> Result<()> {
        let Self { q, p, m } = *self;
        if !(q.is_finite() && p.is_finite() && m.is_finite()) {
            return Err(Error::invalid(format!("gauge parameters must be finite (q={q}, p={p}, m={m})")));
        }
        if !(q >= 1.0 && q < p) {
            return Err(Error::invalid(format!("gauge requires 1 ≤ q < p, got q={q}, p={p}")));
        }
        if !(m >= 1.0) {
            return Err(Error::invalid(format!("gauge requires m ≥ 1, got {m}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GaugeVariant {
    /// max(‖y‖_q, ‖z‖_p)
    Gauge,
    /// (‖y‖_q² + ‖z‖_p²)^{1/2}
    #[default]
    Gauge2,
}

impl GaugeVariant {
    /// The objective of a decomposition with ‖y‖_q = ny and ‖z‖_p = nz.
    pub fn combine(self, ny: f64, nz: f64) -> f64 {
        match self {
            GaugeVariant::Gauge => ny.max(nz),
            GaugeVariant::Gauge2 => ny.hypot(nz),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeOptions {
    /// Relative accuracy of the certified bracket [lower_bound, value].
    pub tol: f64,
    /// Skip the closed form for flat inputs and always run the frontier solver.
    pub force_generic: bool,
}

impl Default for GaugeOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            force_generic: false,
        }
    }
}

impl GaugeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn generic(tol: f64) -> Self {
        Self {
            tol,
            force_generic: true,
        }
    }
}

/// A gauge value together with the decomposition x = m·y + (1/m)·z that
/// attains it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeResult {
    /// Objective of the returned witness, an upper bound on the infimum.
    pub value: f64,
    /// Certified lower bound on the infimum; `value - lower_bound ≤ tol·value`.
    pub lower_bound: f64,
    pub y: FVec,
    pub z: FVec,
    pub variant: GaugeVariant,
    /// max_i |m·y_i + z_i/m − x_i|.
    pub residual_certificate: f64,
}

pub fn gauge_qpm(x: &FVec, params: GaugeParams, tol: f64) -> Result<GaugeResult> {
    gauge(x, params, GaugeVariant::Gauge, &GaugeOptions::with_tol(tol))
}

pub fn gauge2_qpm(x: &FVec, params: GaugeParams, tol: f64) -> Result<GaugeResult> {
    gauge(x, params, GaugeVariant::Gauge2, &GaugeOptions::with_tol(tol))
}

pub fn gauge(x: &FVec, params: GaugeParams, variant: GaugeVariant, opts: &GaugeOptions) -> Result<GaugeResult> {
    params.validate()?;
    if !(opts.tol > 0.0 && opts.tol <= 1e-2) {
        return Err(Error::invalid(format!("gauge tolerance must lie in (0, 1e-2], got {}", opts.tol)));
    }
    if x.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite("gauge input".into()));
    }
    if x.is_zero() {
        return Ok(GaugeResult {
            value: 0.0,
            lower_bound: 0.0,
            y: FVec::new(),
            z: FVec::new(),
            variant,
            residual_certificate: 0.0,
        });
    }

    let mags = Magnitudes::of(x);
    let (kept, moved, lower) = if mags.values.len() == 1 && !opts.force_generic {
        flat_split(mags.values[0], mags.counts[0], params, variant)
    } else {
        let frontier = Frontier::new(&mags, params);
        let sol = match variant {
            GaugeVariant::Gauge => frontier.balance(opts.tol)?,
            GaugeVariant::Gauge2 => frontier.stationary(opts.tol)?,
        };
        (sol.point.kept, sol.point.moved, sol.lower)
    };

    Ok(assemble(x, &mags, &kept, &moved, lower, params, variant))
}

/// Convenience wrapper returning only the value.
pub fn gauge_value(x: &FVec, params: GaugeParams, variant: GaugeVariant, tol: f64) -> Result<f64> {
    gauge(x, params, variant, &GaugeOptions::with_tol(tol)).map(|r| r.value)
}

/// Closed form on the unit flat vector 1_N.
///
/// Both balls are permutation invariant and the objective is convex, so
/// averaging any decomposition over permutations of {1..N} yields a flat one
/// that is no worse. With y = α·1_N and z = β·1_N the constraint is
/// m·α + β/m = 1 and the norms are α·N^{1/q}, β·N^{1/p}, giving
/// (m·N^{−1/q} + m^{−1}·N^{−1/p})^{−1} for ‖·‖ and
/// ((m·N^{−1/q})² + (m^{−1}·N^{−1/p})²)^{−1/2} for |||·|||.
pub fn flat_gauge_oracle(n: usize, params: GaugeParams, variant: GaugeVariant) -> Result<f64> {
    params.validate()?;
    if n == 0 {
        return Err(Error::invalid("flat length must be positive"));
    }
    let (c1, c2) = flat_coefficients(n as f64, params);
    Ok(match variant {
        GaugeVariant::Gauge => 1.0 / (c1 + c2),
        GaugeVariant::Gauge2 => 1.0 / c1.hypot(c2),
    })
}

/// Gauge of a symbolic flat vector without materializing it.
pub fn flat_gauge(flat: &Flat, params: GaugeParams, variant: GaugeVariant) -> Result<f64> {
    Ok(flat.value.abs() * flat_gauge_oracle(flat.len(), params, variant)?)
}

/// argmin of ‖x − m·y‖_p subject to ‖y‖_q ≤ t. The minimizer is sign-aligned
/// with x and satisfies |m·y_i| ≤ |x_i|.
pub fn inner_projection(x: &FVec, t: f64, params: GaugeParams) -> Result<FVec> {
    params.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("projection radius must be finite and ≥ 0, got {t}")));
    }
    if t == 0.0 || x.is_zero() {
        return Ok(FVec::new());
    }
    let m = params.m;
    if lp_of(&x.values(), params.q) / m <= t {
        return Ok(x.scale(1.0 / m));
    }
    let mags = Magnitudes::of(x);
    let frontier = Frontier::new(&mags, params);
    let ln_target = (m * t).ln();
    // A(s) is decreasing; keep the feasible side (A ≤ m·t) as `hi`.
    let (_, hi) = frontier.bisect("inner projection", |pt| pt.ln_a - ln_target, |_, _| false)?;
    let mut y = Vec::with_capacity(x.nnz());
    for (i, v) in x.iter() {
        let w = hi.kept[mags.group_of(v.abs())];
        y.push((i, v.signum() * w / m));
    }
    Ok(FVec::from_finite_pairs(y))
}

fn flat_coefficients(n: f64, params: GaugeParams) -> (f64, f64) {
    let GaugeParams { q, p, m } = params;
    (m * n.powf(-1.0 / q), n.powf(-1.0 / p) / m)
}

/// Witness of the closed form for a flat vector with magnitude `a` on `n`
/// coordinates, expressed in kept/moved parts of one magnitude group.
fn flat_split(a: f64, n: f64, params: GaugeParams, variant: GaugeVariant) -> (Vec<f64>, Vec<f64>, f64) {
    let GaugeParams { q, p, m } = params;
    let (c1, c2) = flat_coefficients(n, params);
    let (ny, nz) = match variant {
        GaugeVariant::Gauge => {
            let lambda = a / (c1 + c2);
            (lambda, lambda)
        }
        GaugeVariant::Gauge2 => {
            let d = c1 * c1 + c2 * c2;
            (a * c1 / d, a * c2 / d)
        }
    };
    // y = ny·n^{-1/q} per coordinate, z = nz·n^{-1/p}; kept = m·y, moved = z/m.
    let kept = m * ny * n.powf(-1.0 / q);
    let moved = nz * n.powf(-1.0 / p) / m;
    let value = variant.combine(ny, nz);
    (vec![kept], vec![moved], value)
}

fn assemble(
    x: &FVec,
    mags: &Magnitudes,
    kept: &[f64],
    moved: &[f64],
    lower: f64,
    params: GaugeParams,
    variant: GaugeVariant,
) -> GaugeResult {
    let m = params.m;
    let mut y = Vec::with_capacity(x.nnz());
    let mut z = Vec::with_capacity(x.nnz());
    let mut residual = 0.0_f64;
    for (i, v) in x.iter() {
        let g = mags.group_of(v.abs());
        let sign = v.signum();
        let yi = sign * kept[g] / m;
        let zi = sign * moved[g] * m;
        residual = residual.max((m * yi + zi / m - v).abs());
        y.push((i, yi));
        z.push((i, zi));
    }
    let y = FVec::from_finite_pairs(y);
    let z = FVec::from_finite_pairs(z);
    let value = variant.combine(lp_of(&y.values(), params.q), lp_of(&z.values(), params.p));
    GaugeResult {
        value,
        lower_bound: lower.min(value),
        y,
        z,
        variant,
        residual_certificate: residual,
    }
}

/// Distinct magnitudes of a vector (descending) with multiplicities.
struct Magnitudes {
    values: Vec<f64>,
    counts: Vec<f64>,
}

impl Magnitudes {
    fn of(x: &FVec) -> Self {
        let mut abs: Vec<f64> = x.iter().map(|(_, v)| v.abs()).collect();
        abs.sort_by(|a, b| b.total_cmp(a));
        let mut values: Vec<f64> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for a in abs {
            match values.last() {
                Some(&last) if last == a => *counts.last_mut().unwrap() += 1.0,
                _ => {
                    values.push(a);
                    counts.push(1.0);
                }
            }
        }
        Self { values, counts }
    }

    fn group_of(&self, a: f64) -> usize {
        self.values
            .binary_search_by(|v| a.total_cmp(v))
            .expect("magnitude belongs to the vector")
    }

    fn max(&self) -> f64 {
        self.values[0]
    }
}

/// ln of (Σ counts·v^p)^{1/p}, −∞ for the zero vector.
fn ln_weighted_norm(values: &[f64], counts: &[f64], p: f64) -> f64 {
    let max = values.iter().fold(0.0_f64, |m, &v| m.max(v));
    if max == 0.0 {
        return f64::NEG_INFINITY;
    }
    let s: f64 = values
        .iter()
        .zip(counts)
        .map(|(&v, &c)| c * (v / max).powf(p))
        .sum();
    max.ln() + s.ln() / p
}

#[derive(Clone, Debug)]
struct FrontierPoint {
    s: f64,
    /// w_j = m·y per magnitude group.
    kept: Vec<f64>,
    /// a_j − w_j = z/m per magnitude group.
    moved: Vec<f64>,
    ln_a: f64,
    ln_b: f64,
}

struct Solution {
    point: FrontierPoint,
    lower: f64,
}

struct Frontier<'a> {
    mags: &'a Magnitudes,
    q: f64,
    p: f64,
    m: f64,
}

impl<'a> Frontier<'a> {
    fn new(mags: &'a Magnitudes, params: GaugeParams) -> Self {
        Self {
            mags,
            q: params.q,
            p: params.p,
            m: params.m,
        }
    }

    fn point(&self, s: f64) -> Result<FrontierPoint> {
        let n = self.mags.values.len();
        let mut kept = Vec::with_capacity(n);
        let mut moved = Vec::with_capacity(n);
        for &a in &self.mags.values {
            let (w, r) = split_coordinate(a, s, self.q, self.p)?;
            kept.push(w);
            moved.push(r);
        }
        let ln_a = ln_weighted_norm(&kept, &self.mags.counts, self.q);
        let ln_b = ln_weighted_norm(&moved, &self.mags.counts, self.p);
        Ok(FrontierPoint {
            s,
            kept,
            moved,
            ln_a,
            ln_b,
        })
    }

    fn initial_s(&self) -> f64 {
        let a = self.mags.max();
        if self.q == 1.0 {
            (self.p - 1.0) * (0.5 * a).ln()
        } else {
            (self.p - self.q) * a.ln()
        }
    }

    /// Bisection on `s` for a target whose sign is non-increasing in `s`.
    /// Returns `(lo, hi)` with target(lo) > 0 ≥ target(hi).
    fn bisect(
        &self,
        stage: &'static str,
        target: impl Fn(&FrontierPoint) -> f64,
        done: impl Fn(&FrontierPoint, &FrontierPoint) -> bool,
    ) -> Result<(FrontierPoint, FrontierPoint)> {
        let s0 = self.initial_s();
        let p0 = self.point(s0)?;
        let mut step = 1.0;
        let (mut lo, mut hi);
        if target(&p0) > 0.0 {
            lo = p0;
            loop {
                let cand = self.point(lo.s + step)?;
                if target(&cand) <= 0.0 {
                    hi = cand;
                    break;
                }
                lo = cand;
                step *= 2.0;
                if step > 2f64.powi(MAX_BRACKET_STEPS as i32) {
                    return Err(bracket_failure(stage, s0, lo.s));
                }
            }
        } else {
            hi = p0;
            loop {
                let cand = self.point(hi.s - step)?;
                if target(&cand) > 0.0 {
                    lo = cand;
                    break;
                }
                hi = cand;
                step *= 2.0;
                if step > 2f64.powi(MAX_BRACKET_STEPS as i32) {
                    return Err(bracket_failure(stage, s0, hi.s));
                }
            }
        }
        for _ in 0..MAX_BISECTIONS {
            if done(&lo, &hi) {
                break;
            }
            let mid = lo.s + 0.5 * (hi.s - lo.s);
            if mid <= lo.s || mid >= hi.s {
                break;
            }
            let pt = self.point(mid)?;
            if target(&pt) > 0.0 {
                lo = pt;
            } else {
                hi = pt;
            }
        }
        Ok((lo, hi))
    }

    fn value_gauge(&self, pt: &FrontierPoint) -> f64 {
        (pt.ln_a.exp() / self.m).max(self.m * pt.ln_b.exp())
    }

    /// ‖·‖: A/m = m·B.
    fn balance(&self, tol: f64) -> Result<Solution> {
        let ln_m2 = 2.0 * self.m.ln();
        let m = self.m;
        // Along the frontier mB(lo) ≤ v* and A(hi)/m ≤ v*.
        let lower = |lo: &FrontierPoint, hi: &FrontierPoint| (m * lo.ln_b.exp()).max(hi.ln_a.exp() / m);
        let upper = |lo: &FrontierPoint, hi: &FrontierPoint| self.value_gauge(lo).min(self.value_gauge(hi));
        let (lo, hi) = self.bisect(
            "gauge balance",
            |pt| pt.ln_a - pt.ln_b - ln_m2,
            |lo, hi| {
                let u = upper(lo, hi);
                u - lower(lo, hi) <= tol * u
            },
        )?;
        let lb = lower(&lo, &hi);
        let point = if self.value_gauge(&lo) <= self.value_gauge(&hi) { lo } else { hi };
        Ok(Solution { point, lower: lb })
    }

    fn objective2(&self, pt: &FrontierPoint) -> f64 {
        let a = pt.ln_a.exp() / self.m;
        let b = self.m * pt.ln_b.exp();
        a * a + b * b
    }

    /// dF/dA along the frontier for F = A²/m² + m²B².
    fn slope2(&self, pt: &FrontierPoint) -> f64 {
        let m = self.m;
        let a = pt.ln_a.exp();
        let coupling = ((2.0 * m * m).ln() + pt.s + (self.q - 1.0) * pt.ln_a + (2.0 - self.p) * pt.ln_b).exp();
        2.0 * a / (m * m) - coupling
    }

    /// |||·|||: minimize A²/m² + m²B² along the frontier. The objective is
    /// convex in A, so the sign of dF/dA is monotone in `s`.
    fn stationary(&self, tol: f64) -> Result<Solution> {
        let (q, p) = (self.q, self.p);
        let ln_m4 = 4.0 * self.m.ln();
        let target = |pt: &FrontierPoint| {
            if pt.ln_a == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else if pt.ln_b == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                (2.0 - q) * pt.ln_a - (2.0 - p) * pt.ln_b - ln_m4 - pt.s
            }
        };
        let lower = |lo: &FrontierPoint, hi: &FrontierPoint| {
            let (a_lo, a_hi) = (lo.ln_a.exp(), hi.ln_a.exp());
            let t1 = self.objective2(lo) + self.slope2(lo) * (a_hi - a_lo);
            let t2 = self.objective2(hi) + self.slope2(hi) * (a_lo - a_hi);
            let f = [t1, t2].into_iter().filter(|t| t.is_finite()).fold(0.0_f64, f64::max);
            f.sqrt()
        };
        let upper = |lo: &FrontierPoint, hi: &FrontierPoint| self.objective2(lo).min(self.objective2(hi)).sqrt();
        let (lo, hi) = self.bisect("gauge2 stationarity", target, |lo, hi| {
            let u = upper(lo, hi);
            u - lower(lo, hi) <= tol * u
        })?;
        let lb = lower(&lo, &hi);
        let point = if self.objective2(&lo) <= self.objective2(&hi) { lo } else { hi };
        Ok(Solution { point, lower: lb })
    }
}

fn bracket_failure(stage: &'static str, s0: f64, s: f64) -> Error {
    Error::Solver {
        stage,
        diagnostics: format!("no sign change while bracketing from s={s0} (last probe s={s})"),
    }
}

/// Kept/moved parts (w, a − w) of one magnitude at frontier parameter `s`.
///
/// For q > 1 the root of (p−1)·ln(a−w) − (q−1)·ln w = s is found in the
/// variable u = w/a. Below u = 1/2 Newton runs on η = ln u, where the
/// residual is concave and decreasing; above, on ζ = ln(1 − u), where it is
/// convex and increasing. Starting at u = 1/2, on the far side of the root,
/// the iterates approach it monotonically, and both parts are formed without
/// cancellation.
fn split_coordinate(a: f64, s: f64, q: f64, p: f64) -> Result<(f64, f64)> {
    if q == 1.0 {
        let theta = (s / (p - 1.0)).exp();
        return Ok(if theta >= a { (0.0, a) } else { (a - theta, theta) });
    }
    let sigma = s - (p - q) * a.ln();
    let g_half = -(p - q) * std::f64::consts::LN_2 - sigma;
    let (qm, pm) = (q - 1.0, p - 1.0);
    if g_half <= 0.0 {
        let eta = newton(-std::f64::consts::LN_2, |eta| {
            let e = eta.exp();
            let f = pm * (-e).ln_1p() - qm * eta - sigma;
            let df = -pm * e / (1.0 - e) - qm;
            (f, df)
        })?;
        Ok((a * eta.exp(), -a * eta.exp_m1()))
    } else {
        let zeta = newton(-std::f64::consts::LN_2, |zeta| {
            let e = zeta.exp();
            let f = pm * zeta - qm * (-e).ln_1p() - sigma;
            let df = pm + qm * e / (1.0 - e);
            (f, df)
        })?;
        Ok((-a * zeta.exp_m1(), a * zeta.exp()))
    }
}

fn newton(start: f64, f: impl Fn(f64) -> (f64, f64)) -> Result<f64> {
    let mut x = start;
    for _ in 0..MAX_NEWTON {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        let next = x - fx / dfx;
        if !next.is_finite() {
            return Err(Error::Solver {
                stage: "coordinate Newton",
                diagnostics: format!("non-finite iterate from x={x}, f={fx}, f'={dfx}"),
            });
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Solver {
        stage: "coordinate Newton",
        diagnostics: format!("no convergence after {MAX_NEWTON} iterations (last x={x})"),
    })
}
