use crate::error::{Error, Result};
use crate::vector::{lp_of, FVec};

/// A norm on finitely supported sequences.
///
/// Implementations must be pure so that searches may evaluate them from
/// several threads.
pub trait Norm: Sync {
    fn norm(&self, x: &FVec) -> Result<f64>;

    /// An upper bound on ‖e_i‖ over all basis vectors.
    fn unit_norm_bound(&self) -> f64 {
        1.0
    }

    /// An upper bound on Σ_j ‖F_j x‖^r over disjoint families {F_j}, used to
    /// prune partition searches. The default follows from the triangle
    /// inequality and Σ a_j^r ≤ (Σ a_j)^r.
    fn partition_power_bound(&self, x: &FVec, r: f64) -> Option<f64> {
        let l1: f64 = x.iter().map(|(_, v)| v.abs()).sum();
        Some((self.unit_norm_bound() * l1).powf(r))
    }
}

impl<N: Norm + ?Sized> Norm for &N {
    fn norm(&self, x: &FVec) -> Result<f64> {
        (**self).norm(x)
    }

    fn unit_norm_bound(&self) -> f64 {
        (**self).unit_norm_bound()
    }

    fn partition_power_bound(&self, x: &FVec, r: f64) -> Option<f64> {
        (**self).partition_power_bound(x, r)
    }
}

/// The classical ℓ_p norm, 1 ≤ p ≤ ∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lp {
    p: f64,
}

impl Lp {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::invalid(format!("ℓ_p requires p ≥ 1, got {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl Norm for Lp {
    fn norm(&self, x: &FVec) -> Result<f64> {
        Ok(lp_of(&x.values(), self.p))
    }

    fn partition_power_bound(&self, x: &FVec, r: f64) -> Option<f64> {
        // r ≥ p: Σ‖F_j x‖_p^r ≤ (Σ‖F_j x‖_p^p)^{r/p}; r < p: ‖·‖_p ≤ ‖·‖_r.
        Some(lp_of(&x.values(), self.p.min(r)).powf(r))
    }
}

/// A norm given by a closure. Nothing is known about its basis, so searches
/// over it run without pruning.
pub struct FnNorm<F>(pub F);

impl<F> Norm for FnNorm<F>
where
    F: Fn(&FVec) -> Result<f64> + Sync,
{
    fn norm(&self, x: &FVec) -> Result<f64> {
        (self.0)(x)
    }

    fn partition_power_bound(&self, _x: &FVec, _r: f64) -> Option<f64> {
        None
    }
}
