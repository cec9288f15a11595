//! Evaluation of space expressions.
//!
//! An expression is compiled once into a tree of norm handles. Every non-ℓ_p
//! node consults a shared cache keyed by its canonical text and the exact bit
//! pattern of the vector, since SB searches over Davis nodes ask for the
//! same restricted vectors many times.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::davis::{DavisParams, DavisSpace};
use crate::error::{Error, Result};
use crate::norm::{Lp, Norm};
use crate::schreier::{sb_norm, SbMode, SchreierPartition};
use crate::space::expr::{SpaceExpr, SpaceNode};
use crate::space::meta::{meta_of, SpaceMeta};
use crate::vector::FVec;

pub const CACHE_FILE: &str = "eval-cache.json";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    pub sb_mode: SbMode,
    pub gauge_tol: f64,
    pub normalize_davis: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            sb_mode: SbMode::Exact,
            gauge_tol: crate::davis::DEFAULT_COMPONENT_TOL,
            normalize_davis: false,
        }
    }
}

type CacheKey = (String, Vec<(usize, u64)>);

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    space: String,
    vector: Vec<(usize, u64)>,
    value: f64,
}

/// Norm values shared across evaluators. Reads proceed concurrently; a miss
/// computes outside the lock and inserts afterwards, so racing threads may
/// compute the same entry twice but always store the same value.
#[derive(Default)]
pub struct NormCache {
    map: RwLock<HashMap<CacheKey, f64>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl NormCache {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    fn get(&self, key: &CacheKey) -> Option<f64> {
        let v = self.map.read().expect("cache lock").get(key).copied();
        let counter = if v.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        v
    }

    fn insert(&self, key: CacheKey, value: f64) {
        self.map.write().expect("cache lock").insert(key, value);
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    pub fn load(path: &Path) -> Result<Arc<Self>> {
        let cache = Self::new();
        if path.exists() {
            let entries: Vec<CacheEntry> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            let mut map = cache.map.write().expect("cache lock");
            for e in entries {
                map.insert((e.space, e.vector), e.value);
            }
        }
        Ok(cache)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut entries: Vec<CacheEntry> = self
            .map
            .read()
            .expect("cache lock")
            .iter()
            .map(|((space, vector), &value)| CacheEntry {
                space: space.clone(),
                vector: vector.clone(),
                value,
            })
            .collect();
        entries.sort_by(|a, b| (&a.space, &a.vector).cmp(&(&b.space, &b.vector)));
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string(&entries)?)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Certificate {
    Lp {
        p: f64,
        value: f64,
    },
    Sb {
        r: f64,
        value: f64,
        exact: bool,
        partition: SchreierPartition,
        blocks: Vec<BlockCertificate>,
    },
    Davis {
        value: f64,
        raw_value: f64,
        k_used: usize,
        tail_bound: f64,
        components: Vec<f64>,
        normalizer: Option<f64>,
        outer: Box<Certificate>,
    },
}

impl Certificate {
    pub fn value(&self) -> f64 {
        match self {
            Certificate::Lp { value, .. } | Certificate::Sb { value, .. } | Certificate::Davis { value, .. } => *value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCertificate {
    pub set: Vec<usize>,
    pub norm: f64,
    pub certificate: Certificate,
}

enum Kind {
    Lp(Lp),
    Sb { child: Arc<Compiled>, r: f64, mode: SbMode },
    Davis(DavisSpace<Arc<Compiled>>),
}

struct Compiled {
    text: String,
    label: String,
    kind: Kind,
    cache: Arc<NormCache>,
}

impl Compiled {
    fn build(node: &SpaceNode, opts: &EvalOptions, cache: &Arc<NormCache>) -> Result<Arc<Self>> {
        let kind = match node {
            SpaceNode::Lp { p } => Kind::Lp(Lp::new(*p)?),
            SpaceNode::Sb { child, r } => Kind::Sb {
                child: Self::build(child, opts, cache)?,
                r: *r,
                mode: opts.sb_mode,
            },
            SpaceNode::Davis {
                child,
                q,
                p,
                schedule,
                truncation,
            } => {
                let params = DavisParams {
                    truncation: *truncation,
                    normalize: opts.normalize_davis,
                    component_tol: opts.gauge_tol,
                    ..DavisParams::new(*q, *p, schedule.clone())
                };
                let outer = Self::build(child, opts, cache)?;
                Kind::Davis(DavisSpace::new(outer, params).map_err(|e| e.at(&node.label()))?)
            }
        };
        Ok(Arc::new(Self {
            text: node.to_string(),
            label: node.label(),
            kind,
            cache: Arc::clone(cache),
        }))
    }

    fn compute(&self, x: &FVec) -> Result<f64> {
        match &self.kind {
            Kind::Lp(lp) => lp.norm(x),
            Kind::Sb { child, r, mode } => Ok(sb_norm(x, child, *r, *mode)?.value),
            Kind::Davis(space) => space.norm(x),
        }
    }

    fn certify(&self, x: &FVec) -> Result<Certificate> {
        let cert = match &self.kind {
            Kind::Lp(lp) => Certificate::Lp {
                p: lp.p(),
                value: lp.norm(x)?,
            },
            Kind::Sb { child, r, mode } => {
                let res = sb_norm(x, child, *r, *mode).map_err(|e| e.at(&self.label))?;
                let mut blocks = Vec::with_capacity(res.partition.len());
                for (set, &norm) in res.partition.sets.iter().zip(&res.block_norms) {
                    blocks.push(BlockCertificate {
                        set: set.clone(),
                        norm,
                        certificate: child.certify(&x.restrict(set)).map_err(|e| e.at(&self.label))?,
                    });
                }
                Certificate::Sb {
                    r: *r,
                    value: res.value,
                    exact: res.exact,
                    partition: res.partition,
                    blocks,
                }
            }
            Kind::Davis(space) => {
                let res = space.evaluate(x).map_err(|e| e.at(&self.label))?;
                let outer_vec = DavisSpace::<Arc<Compiled>>::outer_vector(&res.components);
                let outer = space.outer().certify(&outer_vec).map_err(|e| e.at(&self.label))?;
                Certificate::Davis {
                    value: res.value,
                    raw_value: res.raw_value,
                    k_used: res.k_used,
                    tail_bound: res.tail_bound,
                    components: res.components,
                    normalizer: res.normalizer,
                    outer: Box::new(outer),
                }
            }
        };
        Ok(cert)
    }
}

impl Norm for Compiled {
    fn norm(&self, x: &FVec) -> Result<f64> {
        if let Kind::Lp(lp) = &self.kind {
            return lp.norm(x);
        }
        let key = (self.text.clone(), x.key());
        if let Some(v) = self.cache.get(&key) {
            return Ok(v);
        }
        let v = self.compute(x).map_err(|e| e.at(&self.label))?;
        self.cache.insert(key, v);
        Ok(v)
    }

    fn unit_norm_bound(&self) -> f64 {
        match &self.kind {
            Kind::Lp(_) => 1.0,
            // ‖e_i‖_SB = ‖e_i‖_X
            Kind::Sb { child, .. } => child.unit_norm_bound(),
            Kind::Davis(space) => space.unit_norm_bound(),
        }
    }

    fn partition_power_bound(&self, x: &FVec, r: f64) -> Option<f64> {
        match &self.kind {
            Kind::Lp(lp) => lp.partition_power_bound(x, r),
            _ => {
                let l1: f64 = x.iter().map(|(_, v)| v.abs()).sum();
                Some((self.unit_norm_bound() * l1).powf(r))
            }
        }
    }
}

impl<N: Norm + Send + ?Sized> Norm for Arc<N> {
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

/// A compiled space expression.
pub struct Evaluator {
    expr: SpaceExpr,
    root: Arc<Compiled>,
    cache: Arc<NormCache>,
}

impl Evaluator {
    pub fn new(expr: &SpaceExpr) -> Result<Self> {
        Self::with_options(expr, EvalOptions::default(), NormCache::new())
    }

    pub fn with_options(expr: &SpaceExpr, opts: EvalOptions, cache: Arc<NormCache>) -> Result<Self> {
        if !(opts.gauge_tol > 0.0 && opts.gauge_tol <= 1e-2) {
            return Err(Error::invalid(format!("gauge tolerance must lie in (0, 1e-2], got {}", opts.gauge_tol)));
        }
        let root = Compiled::build(&expr.root, &opts, &cache)?;
        Ok(Self {
            expr: expr.clone(),
            root,
            cache,
        })
    }

    pub fn expr(&self) -> &SpaceExpr {
        &self.expr
    }

    pub fn meta(&self) -> SpaceMeta {
        meta_of(&self.expr)
    }

    pub fn cache(&self) -> &Arc<NormCache> {
        &self.cache
    }

    pub fn norm(&self, x: &FVec) -> Result<f64> {
        if x.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite("space norm input".into()));
        }
        self.root.norm(x)
    }

    pub fn norm_of(&self, x: &FVec) -> Result<(f64, Certificate)> {
        if x.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite("space norm input".into()));
        }
        let cert = self.root.certify(x)?;
        Ok((cert.value(), cert))
    }
}

impl Norm for Evaluator {
    fn norm(&self, x: &FVec) -> Result<f64> {
        Evaluator::norm(self, x)
    }

    fn unit_norm_bound(&self) -> f64 {
        self.root.unit_norm_bound()
    }

    fn partition_power_bound(&self, x: &FVec, r: f64) -> Option<f64> {
        self.root.partition_power_bound(x, r)
    }
}

/// One-shot evaluation with a fresh cache.
pub fn norm_of(expr: &SpaceExpr, x: &FVec) -> Result<(f64, Certificate)> {
    Evaluator::new(expr)?.norm_of(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::parse;

    fn eval(text: &str, x: &FVec) -> (f64, Certificate) {
        norm_of(&parse(text).unwrap(), x).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(eval("lp(2)", &FVec::from_dense(&[3.0, 4.0]).unwrap()).0, 5.0);
        let (v, cert) = eval("sb(lp(1), r=2)", &FVec::from_dense(&[1.0, 1.0, 1.0]).unwrap());
        assert!((v - 5f64.sqrt()).abs() < 1e-15);
        match cert {
            Certificate::Sb { partition, blocks, .. } => {
                assert_eq!(partition.sets, vec![vec![1], vec![2, 3]]);
                assert_eq!(blocks[1].norm, 2.0);
            }
            other => panic!("unexpected certificate {other:?}"),
        }
        let x = FVec::from_pairs([(2, 0.6), (3, -0.8)]).unwrap();
        assert!((eval("sb(lp(2), r=2)", &x).0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cached_and_certified_values_agree() {
        let expr = parse("sb(davis(lp(2), q=1.5, p=2.5, m=pow2, K=8), r=3)").unwrap();
        let ev = Evaluator::new(&expr).unwrap();
        let x = FVec::from_dense(&[0.5, -0.25, 1.0, 0.125, 0.75]).unwrap();
        let a = ev.norm(&x).unwrap();
        let (b, cert) = ev.norm_of(&x).unwrap();
        assert_eq!(a, b);
        assert_eq!(ev.norm(&x).unwrap(), a);
        assert!(ev.cache().stats().0 > 0);
        assert!(matches!(cert, Certificate::Sb { .. }));
    }

    #[test]
    fn errors_carry_node_path() {
        let expr = parse("davis(sb(lp(2), r=2), q=1.5, p=2.5, m=pow2, K=3)").unwrap();
        let x = FVec::from_pairs((1..=20).map(|i| (i, 1.0))).unwrap();
        // the outer vector has 3 entries, so the SB search stays small
        assert!(norm_of(&expr, &x).is_ok());
        let expr = parse("sb(davis(lp(2), q=1.5, p=2.5, m=pow2, K=3), r=2)").unwrap();
        let err = norm_of(&expr, &x).unwrap_err();
        assert!(matches!(err.root(), Error::SizeLimit { size: 20, cap: 12 }));
        assert!(err.to_string().starts_with("at sb(_, r=2)"), "{err}");
    }

    #[test]
    fn cache_persists() {
        let dir = std::env::temp_dir().join(format!("banachkit-cache-{}", std::process::id()));
        let path = dir.join(CACHE_FILE);
        let expr = parse("sb(lp(1), r=2)").unwrap();
        let ev = Evaluator::new(&expr).unwrap();
        let x = FVec::from_dense(&[1.0, 1.0, 1.0]).unwrap();
        let v = ev.norm(&x).unwrap();
        ev.cache().save(&path).unwrap();
        let loaded = NormCache::load(&path).unwrap();
        assert_eq!(loaded.len(), ev.cache().len());
        let ev2 = Evaluator::with_options(&expr, EvalOptions::default(), loaded).unwrap();
        assert_eq!(ev2.norm(&x).unwrap(), v);
        assert_eq!(ev2.cache().stats(), (1, 0));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
