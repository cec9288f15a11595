//! Diagonal symmetric spaces over a base space X.
//!
//! A vector x is normed by placing the component gauges
//! g_k = |||x|||_{q,p}^{m_k} at index k of X and taking the X-norm. Only
//! finitely many components are computed; the omitted ones are controlled by
//! g_k ≤ √2·‖x‖_q/(m_k + 1/m_k) together with the triangle inequality in X.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{gauge, GaugeOptions, GaugeParams, GaugeVariant};
use crate::norm::Norm;
use crate::vector::{lp_of, FVec};

pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_COMPONENT_TOL: f64 = 1e-10;
const MAX_COMPONENTS: usize = 1000;
/// Exact terms summed before the geometric remainder in the pow2 tail.
const POW2_TAIL_TERMS: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// m_k = 2^k
    Pow2,
    /// m_k = k
    Lin,
    Explicit(Vec<f64>),
}

impl Schedule {
    /// m_k for k ≥ 1, or `None` past the end of an explicit list.
    pub fn m(&self, k: usize) -> Option<f64> {
        assert!(k >= 1, "schedules are indexed from 1");
        match self {
            Schedule::Pow2 => Some(2f64.powi(k as i32)),
            Schedule::Lin => Some(k as f64),
            Schedule::Explicit(ms) => ms.get(k - 1).copied(),
        }
    }

    /// Number of terms, `None` for the infinite schedules.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match self {
            Schedule::Explicit(ms) => Some(ms.len()),
            _ => None,
        }
    }

    pub fn is_summable(&self) -> bool {
        !matches!(self, Schedule::Lin)
    }

    pub fn validate(&self) -> Result<()> {
        if let Schedule::Explicit(ms) = self {
            if ms.is_empty() {
                return Err(Error::Schedule("explicit schedule is empty".into()));
            }
            if ms.iter().any(|m| !m.is_finite()) {
                return Err(Error::Schedule("explicit schedule has non-finite entries".into()));
            }
            if ms[0] < 1.0 {
                return Err(Error::Schedule(format!("schedule must start at m_1 ≥ 1, got {}", ms[0])));
            }
            if ms.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Schedule("schedule must be strictly increasing".into()));
            }
        }
        Ok(())
    }

    /// Σ_{k>K} 1/(m_k + 1/m_k); infinite for non-summable rules.
    pub fn reciprocal_tail(&self, k_used: usize) -> f64 {
        let term = |m: f64| 1.0 / (m + 1.0 / m);
        match self {
            Schedule::Lin => f64::INFINITY,
            Schedule::Explicit(ms) => ms.iter().skip(k_used).map(|&m| term(m)).sum(),
            Schedule::Pow2 => {
                let first = k_used + 1;
                let exact: f64 = (first..first + POW2_TAIL_TERMS)
                    .map(|k| term(2f64.powi(k as i32)))
                    .sum();
                // Σ_{k>K+64} 2^{-k}
                exact + 2f64.powi(-((k_used + POW2_TAIL_TERMS) as i32))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truncation {
    Fixed(usize),
    Eps(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DavisParams {
    pub q: f64,
    pub p: f64,
    pub schedule: Schedule,
    /// Defaults: eps 1e-6 for pow2, the full list for explicit schedules;
    /// lin requires a fixed K.
    pub truncation: Option<Truncation>,
    /// A known bound on ‖j‖, recorded only.
    pub j_norm_bound: Option<f64>,
    /// Divide by ‖ẽ_1‖.
    pub normalize: bool,
    pub component: GaugeVariant,
    pub component_tol: f64,
}

impl DavisParams {
    pub fn new(q: f64, p: f64, schedule: Schedule) -> Self {
        Self {
            q,
            p,
            schedule,
            truncation: None,
            j_norm_bound: None,
            normalize: false,
            component: GaugeVariant::Gauge2,
            component_tol: DEFAULT_COMPONENT_TOL,
        }
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = Some(truncation);
        self
    }

    pub fn normalized(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn with_component(mut self, variant: GaugeVariant) -> Self {
        self.component = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 1.0 && self.q < self.p && self.p.is_finite()) {
            return Err(Error::invalid(format!(
                "Davis construction requires 1 < q < p < ∞, got q={}, p={}",
                self.q, self.p
            )));
        }
        self.schedule.validate()?;
        self.resolved_truncation()?;
        Ok(())
    }

    pub fn resolved_truncation(&self) -> Result<Truncation> {
        match (&self.schedule, self.truncation) {
            (Schedule::Lin, None) => Err(Error::Schedule("lin schedule needs an explicit K".into())),
            (Schedule::Lin, Some(Truncation::Eps(_))) => Err(Error::Schedule(
                "lin schedule has a divergent tail; eps truncation is impossible".into(),
            )),
            (Schedule::Pow2, None) => Ok(Truncation::Eps(DEFAULT_EPS)),
            (Schedule::Explicit(ms), None) => Ok(Truncation::Fixed(ms.len())),
            (Schedule::Explicit(ms), Some(Truncation::Fixed(k))) if k > ms.len() => Err(Error::Schedule(format!(
                "K={k} exceeds the explicit schedule length {}",
                ms.len()
            ))),
            (_, Some(Truncation::Eps(eps))) if !(eps > 0.0 && eps.is_finite()) => {
                Err(Error::Schedule(format!("eps must be positive, got {eps}")))
            }
            (_, Some(t)) => Ok(t),
        }
    }

    fn factor(&self) -> f64 {
        match self.component {
            GaugeVariant::Gauge => 1.0,
            GaugeVariant::Gauge2 => std::f64::consts::SQRT_2,
        }
    }

    fn gauge_params(&self, k: usize) -> Result<GaugeParams> {
        let m = self
            .schedule
            .m(k)
            .ok_or_else(|| Error::Schedule(format!("schedule has no component {k}")))?;
        GaugeParams::new(self.q, self.p, m)
    }
}

/// Certified bound on the X-norm contribution of the components k > K,
/// assuming X has a normalized basis.
pub fn tail_bound(x: &FVec, params: &DavisParams, k_used: usize) -> Result<f64> {
    params.validate()?;
    let nq = lp_of(&x.values(), params.q);
    if nq == 0.0 {
        return Ok(0.0);
    }
    Ok(params.factor() * nq * params.schedule.reciprocal_tail(k_used))
}

fn tail_from_norm(nq: f64, params: &DavisParams, k_used: usize) -> f64 {
    if nq == 0.0 {
        0.0
    } else {
        params.factor() * nq * params.schedule.reciprocal_tail(k_used)
    }
}

/// The coefficient map from the diagonal space to ℓ_p.
pub fn j_map(x: &FVec) -> FVec {
    x.clone()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DavisResult {
    /// Normalized when the space is, raw otherwise.
    pub value: f64,
    pub raw_value: f64,
    pub tail_bound: f64,
    pub k_used: usize,
    pub components: Vec<f64>,
    pub normalizer: Option<f64>,
}

pub struct DavisSpace<N> {
    outer: N,
    params: DavisParams,
    normalizer: OnceLock<f64>,
    unit_bound: OnceLock<f64>,
}

impl<N: Norm> DavisSpace<N> {
    pub fn new(outer: N, params: DavisParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            outer,
            params,
            normalizer: OnceLock::new(),
            unit_bound: OnceLock::new(),
        })
    }

    pub fn params(&self) -> &DavisParams {
        &self.params
    }

    pub fn outer(&self) -> &N {
        &self.outer
    }

    /// Components to use for x: fixed, or the least K meeting the tail target.
    pub fn k_for(&self, x: &FVec) -> Result<usize> {
        match self.params.resolved_truncation()? {
            Truncation::Fixed(k) => Ok(k),
            Truncation::Eps(eps) => {
                let nq = lp_of(&x.values(), self.params.q);
                let u = self.outer.unit_norm_bound();
                let cap = self.params.schedule.len().unwrap_or(MAX_COMPONENTS);
                (0..=cap)
                    .find(|&k| u * tail_from_norm(nq, &self.params, k) <= eps)
                    .ok_or_else(|| {
                        Error::Schedule(format!("no truncation within {cap} components reaches eps={eps}"))
                    })
            }
        }
    }

    /// g_1..g_K, computed concurrently.
    pub fn components(&self, x: &FVec, k_used: usize) -> Result<Vec<f64>> {
        let opts = GaugeOptions::with_tol(self.params.component_tol);
        (1..=k_used)
            .into_par_iter()
            .map(|k| {
                let gp = self.params.gauge_params(k)?;
                Ok(gauge(x, gp, self.params.component, &opts)?.value)
            })
            .collect()
    }

    pub fn outer_vector(components: &[f64]) -> FVec {
        FVec::from_finite_pairs(components.iter().enumerate().map(|(i, &g)| (i + 1, g)))
    }

    fn raw(&self, x: &FVec, k_used: usize) -> Result<(f64, Vec<f64>, f64)> {
        let components = self.components(x, k_used)?;
        let value = self.outer.norm(&Self::outer_vector(&components))?;
        let nq = lp_of(&x.values(), self.params.q);
        let tail = self.outer.unit_norm_bound() * tail_from_norm(nq, &self.params, k_used);
        Ok((value, components, tail))
    }

    /// ‖ẽ_1‖ at the truncation used for e_1 itself.
    pub fn basis_norm(&self) -> Result<f64> {
        if let Some(&v) = self.normalizer.get() {
            return Ok(v);
        }
        let e1 = FVec::unit(1);
        let (v, _, _) = self.raw(&e1, self.k_for(&e1)?)?;
        if !(v > 0.0) {
            return Err(Error::Solver {
                stage: "Davis normalization",
                diagnostics: format!("‖ẽ_1‖ = {v}"),
            });
        }
        Ok(*self.normalizer.get_or_init(|| v))
    }

    pub fn evaluate_with_k(&self, x: &FVec, k_used: usize) -> Result<DavisResult> {
        if let Some(len) = self.params.schedule.len() {
            if k_used > len {
                return Err(Error::Schedule(format!("K={k_used} exceeds the schedule length {len}")));
            }
        }
        let (raw_value, components, tail) = self.raw(x, k_used)?;
        let normalizer = if self.params.normalize {
            Some(self.basis_norm()?)
        } else {
            None
        };
        let scale = normalizer.unwrap_or(1.0);
        Ok(DavisResult {
            value: raw_value / scale,
            raw_value,
            tail_bound: tail / scale,
            k_used,
            components,
            normalizer,
        })
    }

    pub fn evaluate(&self, x: &FVec) -> Result<DavisResult> {
        if x.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite("Davis input".into()));
        }
        self.evaluate_with_k(x, self.k_for(x)?)
    }
}

impl<N: Norm> Norm for DavisSpace<N> {
    fn norm(&self, x: &FVec) -> Result<f64> {
        Ok(self.evaluate(x)?.value)
    }

    /// All ẽ_i share the norm of ẽ_1; the bound adds its truncation tail.
    fn unit_norm_bound(&self) -> f64 {
        *self.unit_bound.get_or_init(|| {
            self.evaluate(&FVec::unit(1))
                .map(|r| r.value + r.tail_bound)
                .unwrap_or(f64::INFINITY)
        })
    }
}

pub fn davis_norm<N: Norm>(x: &FVec, outer: N, params: &DavisParams) -> Result<DavisResult> {
    DavisSpace::new(outer, params.clone())?.evaluate(x)
}

/// Largest observed ‖j(x)‖_p / ‖x‖_D over the sample.
pub fn j_constant_estimate<N: Norm>(space: &DavisSpace<N>, sample: &[FVec]) -> Result<f64> {
    let mut c = 0.0_f64;
    for x in sample {
        if x.is_zero() {
            continue;
        }
        let d = space.norm(x)?;
        c = c.max(lp_of(&j_map(x).values(), space.params.p) / d);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{gauge2_qpm, gauge_qpm};
    use crate::norm::Lp;

    fn l2() -> Lp {
        Lp::new(2.0).unwrap()
    }

    fn e1_series() -> f64 {
        (1..200)
            .map(|k| 1.0 / (4f64.powi(k) + 4f64.powi(-k)))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn unit_vector_pow2() {
        let params = DavisParams::new(1.5, 2.5, Schedule::Pow2);
        let r = davis_norm(&FVec::unit(1), l2(), &params).unwrap();
        assert!((r.value - e1_series()).abs() < 1e-6);
        assert!((r.value - 0.5642).abs() < 1e-4);
        assert!(r.tail_bound <= DEFAULT_EPS);
        // the pow2 tail for ‖e_1‖_q = 1 first drops below 1e-6 at K = 21
        assert_eq!(r.k_used, 21);
    }

    #[test]
    fn zero_vector() {
        let params = DavisParams::new(1.5, 2.5, Schedule::Pow2);
        let r = davis_norm(&FVec::new(), l2(), &params).unwrap();
        assert_eq!((r.value, r.k_used, r.tail_bound), (0.0, 0, 0.0));
    }

    #[test]
    fn schedule_validation() {
        let lin = DavisParams::new(1.5, 2.5, Schedule::Lin);
        assert!(lin.validate().is_err());
        assert!(lin.clone().with_truncation(Truncation::Eps(1e-3)).validate().is_err());
        assert!(lin.with_truncation(Truncation::Fixed(4)).validate().is_ok());
        assert!(DavisParams::new(1.0, 2.5, Schedule::Pow2).validate().is_err());
        assert!(DavisParams::new(1.5, 1.5, Schedule::Pow2).validate().is_err());
        assert!(DavisParams::new(1.5, 2.5, Schedule::Explicit(vec![2.0, 2.0])).validate().is_err());
        assert!(DavisParams::new(1.5, 2.5, Schedule::Explicit(vec![0.5, 2.0])).validate().is_err());
        assert!(DavisParams::new(1.5, 2.5, Schedule::Explicit(vec![])).validate().is_err());
        let ex = DavisParams::new(1.5, 2.5, Schedule::Explicit(vec![1.0, 3.0]));
        assert_eq!(ex.resolved_truncation().unwrap(), Truncation::Fixed(2));
        assert!(ex.with_truncation(Truncation::Fixed(3)).validate().is_err());
    }

    #[test]
    fn tail_examples() {
        let x = FVec::unit(1);
        let ex = DavisParams::new(1.5, 2.5, Schedule::Explicit(vec![1.0, 2.0, 4.0]));
        assert_eq!(tail_bound(&x, &ex, 3).unwrap(), 0.0);
        let pow2 = DavisParams::new(1.5, 2.5, Schedule::Pow2);
        let mut prev = f64::INFINITY;
        for k in 0..30 {
            let t = tail_bound(&x, &pow2, k).unwrap();
            assert!(t <= std::f64::consts::SQRT_2 * 2f64.powi(-(k as i32)) * (1.0 + 1e-12));
            assert!(t < prev);
            prev = t;
        }
        let lin = DavisParams::new(1.5, 2.5, Schedule::Lin).with_truncation(Truncation::Fixed(3));
        assert!(tail_bound(&x, &lin, 3).unwrap().is_infinite());
    }

    #[test]
    fn truncation_is_sound_and_monotone() {
        let x = FVec::from_dense(&[0.4, -0.2, 0.9, 0.1]).unwrap();
        let params = DavisParams::new(1.3, 2.2, Schedule::Pow2).with_truncation(Truncation::Fixed(1));
        let space = DavisSpace::new(l2(), params.clone()).unwrap();
        let mut prev = 0.0;
        for k in 1..12 {
            let a = space.evaluate_with_k(&x, k).unwrap();
            let b = space.evaluate_with_k(&x, k + 3).unwrap();
            assert!(a.value >= prev);
            assert!((b.value - a.value).abs() <= a.tail_bound);
            prev = a.value;
        }
    }

    #[test]
    fn components_lie_between_variants() {
        let x = FVec::from_dense(&[0.4, -0.2, 0.9, 0.1]).unwrap();
        let params = DavisParams::new(1.3, 2.2, Schedule::Pow2).with_truncation(Truncation::Fixed(6));
        let r = davis_norm(&x, l2(), &params).unwrap();
        for (k, g) in r.components.iter().enumerate() {
            let gp = GaugeParams::new(1.3, 2.2, 2f64.powi(k as i32 + 1)).unwrap();
            let lo = gauge_qpm(&x, gp, 1e-10).unwrap().value;
            assert!(*g >= lo * (1.0 - 1e-9) && *g <= std::f64::consts::SQRT_2 * lo * (1.0 + 1e-9));
            assert!((gauge2_qpm(&x, gp, 1e-10).unwrap().value - g).abs() <= 1e-9 * g);
        }
    }

    #[test]
    fn normalization_divides_by_basis_norm() {
        let params = DavisParams::new(1.5, 2.5, Schedule::Pow2).normalized(true);
        let space = DavisSpace::new(l2(), params).unwrap();
        let e = space.evaluate(&FVec::unit(7)).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        assert!((e.normalizer.unwrap() - e1_series()).abs() < 1e-6);
    }

    #[test]
    fn symmetric_components() {
        let x = FVec::from_pairs([(1, 0.5), (2, -0.25), (5, 1.0)]).unwrap();
        let y = FVec::from_pairs([(9, -1.0), (3, 0.5), (4, 0.25)]).unwrap();
        let params = DavisParams::new(1.5, 3.0, Schedule::Pow2);
        let a = davis_norm(&x, l2(), &params).unwrap();
        let b = davis_norm(&y, l2(), &params).unwrap();
        assert_eq!(a.components, b.components);
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn j_constant_is_finite() {
        let params = DavisParams::new(1.5, 2.5, Schedule::Pow2);
        let space = DavisSpace::new(l2(), params).unwrap();
        let sample = vec![FVec::unit(1), FVec::from_dense(&[1.0, 1.0, 1.0]).unwrap(), FVec::new()];
        let c = j_constant_estimate(&space, &sample).unwrap();
        assert!(c.is_finite() && c > 0.0);
        assert_eq!(j_map(&sample[1]), sample[1]);
    }
}
