//! Finite-support real vectors with 1-based indices, classical ℓ_p norms,
//! rearrangements, restrictions and threshold splitting.
//!
//! Every other module works on [`FVec`]. Coordinates are stored sparsely, so
//! absolute index values survive (Schreier admissibility depends on them),
//! and a dense view is produced only when a solver asks for one.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// A finitely supported vector. Stored coefficients are nonzero and finite,
/// indices start at 1; everything else is an implicit zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FVec {
    entries: BTreeMap<usize, f64>,
}

impl FVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from `(index, value)` pairs; zeros are dropped, repeated
    /// indices are summed.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut entries = BTreeMap::new();
        for (i, v) in pairs {
            if i == 0 {
                return Err(Error::invalid("vector indices start at 1"));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("coefficient {v} at index {i}")));
            }
            *entries.entry(i).or_insert(0.0) += v;
        }
        entries.retain(|_, v| *v != 0.0);
        Ok(Self { entries })
    }

    /// Position `k` of the slice becomes index `k + 1`.
    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Self::from_pairs(values.iter().enumerate().map(|(k, &v)| (k + 1, v)))
    }

    /// The unit vector e_i.
    pub fn unit(i: usize) -> Self {
        assert!(i >= 1, "vector indices start at 1");
        let mut entries = BTreeMap::new();
        entries.insert(i, 1.0);
        Self { entries }
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_finite_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let entries = pairs
            .into_iter()
            .filter(|&(_, v)| v != 0.0)
            .inspect(|&(i, v)| debug_assert!(i >= 1 && v.is_finite()))
            .collect();
        Self { entries }
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries.get(&i).copied().unwrap_or(0.0)
    }

    /// Sorted stored indices.
    pub fn support(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    /// Number of stored (nonzero) coefficients.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&i, &v)| (i, v))
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.values().copied().collect()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    /// Dense view of indices `1..=len`.
    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        (1..=len).map(|i| self.get(i)).collect()
    }

    pub fn scale(&self, c: f64) -> FVec {
        FVec::from_finite_pairs(self.iter().map(|(i, v)| (i, c * v)))
    }

    pub fn add(&self, other: &FVec) -> FVec {
        let mut entries = self.entries.clone();
        for (i, v) in other.iter() {
            *entries.entry(i).or_insert(0.0) += v;
        }
        entries.retain(|_, v| *v != 0.0);
        FVec { entries }
    }

    pub fn sub(&self, other: &FVec) -> FVec {
        self.add(&other.scale(-1.0))
    }

    pub fn abs(&self) -> FVec {
        FVec::from_finite_pairs(self.iter().map(|(i, v)| (i, v.abs())))
    }

    /// Coordinate restriction to `set`.
    pub fn restrict(&self, set: &[usize]) -> FVec {
        restrict(self, set)
    }

    /// Moves coordinate i to index `f(i)`; `f` must be injective on the support.
    pub fn relabel(&self, f: impl Fn(usize) -> usize) -> FVec {
        FVec::from_finite_pairs(self.iter().map(|(i, v)| (f(i), v)))
    }

    /// Stable key for hashing: indices and the exact bit patterns of values.
    pub(crate) fn key(&self) -> Vec<(usize, u64)> {
        self.iter().map(|(i, v)| (i, v.to_bits())).collect()
    }
}

impl fmt::Display for FVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (i, v)) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}: {v}")?;
        }
        write!(f, "}}")
    }
}

/// A constant value on the index interval `from..=to`, kept symbolic so the
/// closed-form gauge paths never materialize long vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flat {
    pub value: f64,
    pub from: usize,
    pub to: usize,
}

impl Flat {
    pub fn new(value: f64, from: usize, to: usize) -> Result<Self> {
        if from == 0 || to < from {
            return Err(Error::invalid(format!("flat interval {from}..={to} is empty or starts at 0")));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("flat value {value}")));
        }
        Ok(Self { value, from, to })
    }

    /// The normalized-in-ℓ_p flat vector n^{-1/p}·1_n on `1..=n`.
    pub fn unit_lp(n: usize, p: f64) -> Self {
        Self {
            value: (n as f64).powf(-1.0 / p),
            from: 1,
            to: n,
        }
    }

    pub fn len(&self) -> usize {
        self.to - self.from + 1
    }

    pub fn is_empty(&self) -> bool {
        self.value == 0.0
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        if p.is_infinite() {
            return Ok(self.value.abs());
        }
        Ok(self.value.abs() * (self.len() as f64).powf(1.0 / p))
    }

    pub fn to_fvec(&self) -> FVec {
        FVec::from_finite_pairs((self.from..=self.to).map(|i| (i, self.value)))
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("ℓ_p exponent must satisfy p ≥ 1, got {p}")));
    }
    Ok(())
}

/// (Σ|v|^p)^{1/p} over a slice, scaled by the largest entry so that tiny and
/// huge coefficients neither underflow nor overflow.
pub(crate) fn lp_of(values: &[f64], p: f64) -> f64 {
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return max;
    }
    if p == 1.0 {
        return values.iter().map(|v| v.abs()).sum();
    }
    let s: f64 = values.iter().map(|v| (v.abs() / max).powf(p)).sum();
    max * s.powf(1.0 / p)
}

/// The classical ℓ_p norm, `p ∈ [1, ∞]`.
pub fn lp_norm(x: &FVec, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_of(&x.values(), p))
}

/// Agrees with `x` on `set`, zero elsewhere.
pub fn restrict(x: &FVec, set: &[usize]) -> FVec {
    FVec::from_finite_pairs(set.iter().filter_map(|&i| x.entries.get(&i).map(|&v| (i, v))))
}

/// |x| sorted non-increasingly onto indices `1..=nnz`; ties keep the original
/// index order.
pub fn rearrange_dec(x: &FVec) -> FVec {
    let mut abs: Vec<f64> = x.iter().map(|(_, v)| v.abs()).collect();
    // stable: equal magnitudes stay in index order
    abs.sort_by(|a, b| b.total_cmp(a));
    FVec::from_finite_pairs(abs.into_iter().enumerate().map(|(k, v)| (k + 1, v)))
}

/// Splits `x` into `(big, small)` where `small` keeps the entries with
/// |x(i)| < δ and `big` the rest. A pure selection: `big + small == x` exactly.
pub fn threshold_split(x: &FVec, delta: f64) -> Result<(FVec, FVec)> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("threshold must be positive, got {delta}")));
    }
    let (small, big): (BTreeMap<_, _>, BTreeMap<_, _>) =
        x.entries.iter().map(|(&i, &v)| (i, v)).partition(|&(_, v)| v.abs() < delta);
    Ok((FVec { entries: big }, FVec { entries: small }))
}

/// A parsed vector literal: either an explicit vector or a symbolic flat one.
#[derive(Clone, Debug, PartialEq)]
pub enum VectorLiteral {
    Vector(FVec),
    Flat(Flat),
}

impl VectorLiteral {
    pub fn into_fvec(self) -> FVec {
        match self {
            VectorLiteral::Vector(v) => v,
            VectorLiteral::Flat(f) => f.to_fvec(),
        }
    }
}

/// Accepts a dense array `[1, 0, 2]`, a sparse object `{"2": 1.5}` or a flat
/// object `{"flat": {"value": v, "from": a, "to": b}}`.
pub fn parse_vector_literal(text: &str) -> Result<VectorLiteral> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::VectorLiteral(e.to_string()))?;
    vector_literal_from_json(&value)
}

pub fn parse_vector(text: &str) -> Result<FVec> {
    parse_vector_literal(text).map(VectorLiteral::into_fvec)
}

pub fn vector_literal_from_json(value: &Value) -> Result<VectorLiteral> {
    match value {
        Value::Array(items) => {
            let values = items
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| Error::VectorLiteral(format!("non-numeric entry {v}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(VectorLiteral::Vector(FVec::from_dense(&values)?))
        }
        Value::Object(map) if map.len() == 1 && map.contains_key("flat") => {
            let flat: Flat = serde_json::from_value(map["flat"].clone())
                .map_err(|e| Error::VectorLiteral(format!("flat literal: {e}")))?;
            Ok(VectorLiteral::Flat(Flat::new(flat.value, flat.from, flat.to)?))
        }
        Value::Object(map) => {
            let pairs = map
                .iter()
                .map(|(k, v)| {
                    let i: usize = k
                        .trim()
                        .parse()
                        .map_err(|_| Error::VectorLiteral(format!("index {k:?} is not a positive integer")))?;
                    let x = v
                        .as_f64()
                        .ok_or_else(|| Error::VectorLiteral(format!("non-numeric entry {v}")))?;
                    Ok((i, x))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(VectorLiteral::Vector(FVec::from_pairs(pairs)?))
        }
        other => Err(Error::VectorLiteral(format!("expected array or object, found {other}"))),
    }
}

impl Serialize for FVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.nnz()))?;
        for (i, v) in self.iter() {
            map.serialize_entry(&i.to_string(), &v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        vector_literal_from_json(&value)
            .map(VectorLiteral::into_fvec)
            .map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> FVec {
        FVec::from_dense(xs).unwrap()
    }

    #[test]
    fn lp_norm_examples() {
        assert_eq!(lp_norm(&v(&[3.0, 4.0]), 2.0).unwrap(), 5.0);
        assert_eq!(lp_norm(&v(&[1.0, -2.0, 2.0]), 1.0).unwrap(), 5.0);
        assert_eq!(lp_norm(&v(&[1.0, 1.0, 1.0]), f64::INFINITY).unwrap(), 1.0);
        assert_eq!(lp_norm(&FVec::new(), 3.0).unwrap(), 0.0);
        assert!(lp_norm(&v(&[1.0]), 0.5).is_err());
        assert!(lp_norm(&v(&[1.0]), f64::NAN).is_err());
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(FVec::from_pairs([(0, 1.0)]).is_err());
        assert!(FVec::from_pairs([(1, f64::NAN)]).is_err());
        assert!(FVec::from_pairs([(1, f64::INFINITY)]).is_err());
        let x = FVec::from_pairs([(3, 0.0), (2, 1.0)]).unwrap();
        assert_eq!(x.support(), vec![2]);
    }

    #[test]
    fn restrict_examples() {
        let x = v(&[1.0, 2.0, 3.0]);
        assert_eq!(restrict(&x, &[2]), FVec::from_pairs([(2, 2.0)]).unwrap());
        assert!(restrict(&x, &[]).is_zero());
        assert_eq!(restrict(&x, &[1, 2, 3, 9]), x);
    }

    #[test]
    fn rearrange_examples() {
        assert_eq!(rearrange_dec(&v(&[0.0, 3.0, 0.0, -1.0, 2.0])), v(&[3.0, 2.0, 1.0]));
        assert!(rearrange_dec(&FVec::new()).is_zero());
        let x = FVec::from_pairs([(7, 5.0)]).unwrap();
        assert_eq!(rearrange_dec(&x), v(&[5.0]));
    }

    #[test]
    fn threshold_split_examples() {
        let (big, small) = threshold_split(&v(&[0.5, 0.1]), 0.2).unwrap();
        assert_eq!(big, v(&[0.5]));
        assert_eq!(small, FVec::from_pairs([(2, 0.1)]).unwrap());

        let x = v(&[0.5, -0.1, 0.3]);
        let (big, small) = threshold_split(&x, 1.0).unwrap();
        assert!(big.is_zero());
        assert_eq!(small, x);

        let (big, small) = threshold_split(&x, 1e-300).unwrap();
        assert_eq!(big, x);
        assert!(small.is_zero());

        assert!(threshold_split(&x, 0.0).is_err());
    }

    #[test]
    fn literal_formats() {
        assert_eq!(parse_vector("[1, 0, 2]").unwrap(), v(&[1.0, 0.0, 2.0]));
        let sparse = parse_vector(r#"{"2": 1.5, "7": -0.25}"#).unwrap();
        assert_eq!(sparse, FVec::from_pairs([(2, 1.5), (7, -0.25)]).unwrap());
        let flat = parse_vector_literal(r#"{"flat": {"value": 0.5, "from": 3, "to": 5}}"#).unwrap();
        assert_eq!(flat, VectorLiteral::Flat(Flat::new(0.5, 3, 5).unwrap()));
        assert_eq!(flat.into_fvec(), FVec::from_pairs([(3, 0.5), (4, 0.5), (5, 0.5)]).unwrap());
        assert!(parse_vector(r#"{"0": 1}"#).is_err());
        assert!(parse_vector(r#"{"a": 1}"#).is_err());
        assert!(parse_vector("[1, \"x\"]").is_err());
        assert!(parse_vector("3").is_err());
    }

    #[test]
    fn flat_norms() {
        let f = Flat::unit_lp(1000, 2.5);
        assert!((f.lp_norm(2.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((f.lp_norm(2.5).unwrap() - lp_norm(&f.to_fvec(), 2.5).unwrap()).abs() < 1e-12);
    }

    fn arb_vec() -> impl Strategy<Value = FVec> {
        proptest::collection::vec((1usize..30, -1.0f64..1.0), 0..12)
            .prop_map(|pairs| FVec::from_pairs(pairs).unwrap())
    }

    fn arb_p() -> impl Strategy<Value = f64> {
        prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY), 1.0f64..8.0]
    }

    proptest! {
        #[test]
        fn lp_is_a_norm(x in arb_vec(), y in arb_vec(), c in -3.0f64..3.0, p in arb_p()) {
            let nx = lp_norm(&x, p).unwrap();
            let ny = lp_norm(&y, p).unwrap();
            let sum = lp_norm(&x.add(&y), p).unwrap();
            prop_assert!(sum <= nx + ny + 1e-12);
            let scaled = lp_norm(&x.scale(c), p).unwrap();
            prop_assert!((scaled - c.abs() * nx).abs() <= 1e-12 * (1.0 + nx));
        }

        #[test]
        fn lp_non_increasing_in_p(x in arb_vec(), p1 in 1.0f64..6.0, dp in 0.0f64..6.0) {
            let p2 = p1 + dp;
            prop_assert!(lp_norm(&x, p1).unwrap() >= lp_norm(&x, p2).unwrap() - 1e-12);
            prop_assert!(lp_norm(&x, p2).unwrap() >= lp_norm(&x, f64::INFINITY).unwrap() - 1e-12);
        }

        #[test]
        fn restriction_and_complement_reassemble(x in arb_vec(), mask in proptest::collection::vec(any::<bool>(), 30)) {
            let support = x.support();
            let (inside, outside): (Vec<usize>, Vec<usize>) =
                support.iter().partition(|&&i| mask[i - 1]);
            prop_assert_eq!(restrict(&x, &inside).add(&restrict(&x, &outside)), x);
        }

        #[test]
        fn rearrangement_preserves_norms(x in arb_vec(), p in arb_p()) {
            let r = rearrange_dec(&x);
            prop_assert_eq!(r.support(), (1..=x.nnz()).collect::<Vec<_>>());
            let (a, b) = (lp_norm(&r, p).unwrap(), lp_norm(&x, p).unwrap());
            prop_assert!((a - b).abs() <= 1e-14 * b.max(1.0));
            let mut sorted = x.values().iter().map(|v| v.abs()).collect::<Vec<_>>();
            sorted.sort_by(|a, b| b.total_cmp(a));
            prop_assert_eq!(r.values(), sorted);
        }

        #[test]
        fn split_is_exact(x in arb_vec(), delta in 1e-6f64..1.5) {
            let (big, small) = threshold_split(&x, delta).unwrap();
            prop_assert_eq!(big.add(&small), x);
            prop_assert!(big.iter().all(|(_, v)| v.abs() >= delta));
            prop_assert!(small.iter().all(|(_, v)| v.abs() < delta));
            prop_assert!(big.support().iter().all(|i| small.get(*i) == 0.0));
        }
    }
}
