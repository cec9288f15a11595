//! Schreier families and the Schreier–Baernstein norm
//!
//! ‖x‖_{SB(X,r)} = sup (Σ_j ‖F_j x‖_X^r)^{1/r} over pairwise disjoint families
//! of sets with min F ≥ |F|.
//!
//! For a monotone 1-unconditional base norm the supremum is attained on
//! partitions of supp x: a coordinate left uncovered can be added as a
//! singleton ({i} is always admissible since i ≥ 1), and restricting a set to
//! supp x leaves ‖F x‖ unchanged while only increasing min F. The exact search
//! therefore runs over partitions of the support only.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::Norm;
use crate::vector::FVec;

pub const EXACT_CAP: usize = 12;
pub const ORACLE_CAP: usize = 8;
/// Below this support size the oracle also scans families that leave
/// coordinates uncovered.
pub const ORACLE_NONCOVERING_CAP: usize = 6;
const TIE_SCAN_LIMIT: usize = 20_000;

/// min F ≥ |F|; the empty set is admissible by convention.
pub fn is_schreier(set: &[usize]) -> bool {
    match set.iter().min() {
        None => true,
        Some(&min) => {
            let mut sorted = set.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            min >= sorted.len()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchreierPartition {
    /// Blocks sorted internally and ordered by their minima.
    pub sets: Vec<Vec<usize>>,
}

impl SchreierPartition {
    pub fn new(mut sets: Vec<Vec<usize>>) -> Result<Self> {
        for s in &mut sets {
            s.sort_unstable();
        }
        sets.retain(|s| !s.is_empty());
        sets.sort_by_key(|s| s[0]);
        let part = Self { sets };
        part.validate()?;
        Ok(part)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.sets {
            if s.is_empty() {
                return Err(Error::Precondition("empty block in Schreier family".into()));
            }
            if !is_schreier(s) {
                return Err(Error::Precondition(format!("block {s:?} is not Schreier admissible")));
            }
            for &i in s {
                if !seen.insert(i) {
                    return Err(Error::Precondition(format!("index {i} appears in two blocks")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// (Σ_j ‖F_j x‖^r)^{1/r}, summing the terms in ascending order.
    pub fn value<N: Norm + ?Sized>(&self, x: &FVec, base: &N, r: f64) -> Result<f64> {
        let norms = self.block_norms(x, base)?;
        Ok(canonical_value(&norms, r))
    }

    pub fn block_norms<N: Norm + ?Sized>(&self, x: &FVec, base: &N) -> Result<Vec<f64>> {
        self.sets.iter().map(|s| base.norm(&x.restrict(s))).collect()
    }
}

/// Sum of r-th powers in ascending order, then the r-th root. Every search in
/// this module reports values through this function so that equal partitions
/// give bit-identical values.
pub fn canonical_value(block_norms: &[f64], r: f64) -> f64 {
    canonical_terms(block_norms.iter().map(|n| n.powf(r)).collect(), r)
}

/// Partitions of a finite index set into Schreier-admissible blocks, each
/// produced once.
///
/// Elements are placed in increasing order (restricted growth strings), so a
/// block's minimum is its first element and joining it is allowed while its
/// size is below that minimum.
pub struct AdmissiblePartitions {
    support: Vec<usize>,
    /// (min, size) of the open blocks.
    blocks: Vec<(usize, usize)>,
    assign: Vec<usize>,
    started: bool,
    done: bool,
}

pub fn admissible_partitions(support: &[usize]) -> Result<AdmissiblePartitions> {
    admissible_partitions_capped(support, EXACT_CAP)
}

fn admissible_partitions_capped(support: &[usize], cap: usize) -> Result<AdmissiblePartitions> {
    let mut support = support.to_vec();
    support.sort_unstable();
    support.dedup();
    if support.len() > cap {
        return Err(Error::SizeLimit {
            size: support.len(),
            cap,
        });
    }
    if support.first() == Some(&0) {
        return Err(Error::invalid("indices are 1-based"));
    }
    Ok(AdmissiblePartitions {
        support,
        blocks: Vec::new(),
        assign: Vec::new(),
        started: false,
        done: false,
    })
}

impl AdmissiblePartitions {
    fn first_option(&self, from: usize) -> usize {
        (from..self.blocks.len())
            .find(|&b| self.blocks[b].1 < self.blocks[b].0)
            .unwrap_or(self.blocks.len())
    }

    fn place(&mut self, b: usize) {
        let k = self.assign.len();
        if b == self.blocks.len() {
            self.blocks.push((self.support[k], 1));
        } else {
            self.blocks[b].1 += 1;
        }
        self.assign.push(b);
    }

    fn unplace(&mut self) -> usize {
        let b = self.assign.pop().expect("non-empty assignment");
        if self.blocks[b].1 == 1 {
            debug_assert_eq!(b, self.blocks.len() - 1);
            self.blocks.pop();
        } else {
            self.blocks[b].1 -= 1;
        }
        b
    }

    fn fill(&mut self) {
        while self.assign.len() < self.support.len() {
            let b = self.first_option(0);
            self.place(b);
        }
    }

    fn emit(&self) -> SchreierPartition {
        let mut sets = vec![Vec::new(); self.blocks.len()];
        for (k, &b) in self.assign.iter().enumerate() {
            sets[b].push(self.support[k]);
        }
        SchreierPartition { sets }
    }
}

impl Iterator for AdmissiblePartitions {
    type Item = SchreierPartition;

    fn next(&mut self) -> Option<SchreierPartition> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.fill();
            return Some(self.emit());
        }
        while !self.assign.is_empty() {
            let b = self.unplace();
            if b < self.blocks.len() {
                let next = self.first_option(b + 1);
                self.place(next);
                self.fill();
                return Some(self.emit());
            }
        }
        self.done = true;
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SbMode {
    #[default]
    Exact,
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbResult {
    pub value: f64,
    pub partition: SchreierPartition,
    /// ‖F_j x‖_X for each block, in partition order.
    pub block_norms: Vec<f64>,
    pub exact: bool,
}

pub fn sb_norm<N: Norm + ?Sized>(x: &FVec, base: &N, r: f64, mode: SbMode) -> Result<SbResult> {
    check_r(r)?;
    if x.is_zero() {
        return Ok(SbResult {
            value: 0.0,
            partition: SchreierPartition::default(),
            block_norms: Vec::new(),
            exact: true,
        });
    }
    let partition = match mode {
        SbMode::Exact => {
            if x.nnz() > EXACT_CAP {
                return Err(Error::SizeLimit {
                    size: x.nnz(),
                    cap: EXACT_CAP,
                });
            }
            ExactSearch::new(x, base, r).run()?
        }
        SbMode::Heuristic => greedy(x, base, r)?,
    };
    let block_norms = partition.block_norms(x, base)?;
    Ok(SbResult {
        value: canonical_value(&block_norms, r),
        partition,
        block_norms,
        exact: mode == SbMode::Exact,
    })
}

/// Plain enumeration of every admissible partition of the support, and for
/// supports up to six coordinates of every admissible family that leaves
/// some coordinates out.
pub fn sb_norm_oracle<N: Norm + ?Sized>(x: &FVec, base: &N, r: f64) -> Result<f64> {
    check_r(r)?;
    let support = x.support();
    if support.len() > ORACLE_CAP {
        return Err(Error::SizeLimit {
            size: support.len(),
            cap: ORACLE_CAP,
        });
    }
    let subsets: Vec<Vec<usize>> = if support.len() <= ORACLE_NONCOVERING_CAP {
        (0u32..1 << support.len())
            .map(|mask| {
                support
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect()
            })
            .collect()
    } else {
        vec![support]
    };
    let mut best = 0.0_f64;
    for subset in subsets {
        for part in admissible_partitions_capped(&subset, ORACLE_CAP)? {
            best = best.max(part.value(x, base, r)?);
        }
    }
    Ok(best)
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::invalid(format!("SB exponent r must be finite and ≥ 1, got {r}")));
    }
    Ok(())
}

/// Memoized search over bitmasks of the support. The lowest remaining
/// coordinate must sit in some block; blocks containing it are enumerated
/// among the remaining coordinates subject to the size limit its index
/// imposes.
struct ExactSearch<'a, N: ?Sized> {
    x: &'a FVec,
    base: &'a N,
    r: f64,
    support: Vec<usize>,
    block_power: HashMap<u32, f64>,
    bound: HashMap<u32, f64>,
    best: HashMap<u32, f64>,
}

impl<'a, N: Norm + ?Sized> ExactSearch<'a, N> {
    fn new(x: &'a FVec, base: &'a N, r: f64) -> Self {
        Self {
            x,
            base,
            r,
            support: x.support(),
            block_power: HashMap::new(),
            bound: HashMap::new(),
            best: HashMap::new(),
        }
    }

    fn indices(&self, mask: u32) -> Vec<usize> {
        (0..self.support.len())
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| self.support[k])
            .collect()
    }

    fn power(&mut self, mask: u32) -> Result<f64> {
        if let Some(&v) = self.block_power.get(&mask) {
            return Ok(v);
        }
        let v = self.base.norm(&self.x.restrict(&self.indices(mask)))?.powf(self.r);
        self.block_power.insert(mask, v);
        Ok(v)
    }

    fn upper(&mut self, mask: u32) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        if let Some(&v) = self.bound.get(&mask) {
            return v;
        }
        let v = self
            .base
            .partition_power_bound(&self.x.restrict(&self.indices(mask)), self.r)
            .unwrap_or(f64::INFINITY);
        self.bound.insert(mask, v);
        v
    }

    /// Blocks containing the lowest element of `mask` that are admissible.
    fn candidate_blocks(&self, mask: u32) -> Vec<u32> {
        let low = mask.trailing_zeros();
        let lead = 1u32 << low;
        let rest = mask & !lead;
        let limit = self.support[low as usize] - 1;
        let mut out = Vec::new();
        // every submask of `rest`, including the empty one
        let mut sub = rest;
        loop {
            if sub.count_ones() as usize <= limit {
                out.push(lead | sub);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        out
    }

    fn best(&mut self, mask: u32) -> Result<f64> {
        if mask == 0 {
            return Ok(0.0);
        }
        if let Some(&v) = self.best.get(&mask) {
            return Ok(v);
        }
        let mut best = f64::NEG_INFINITY;
        for block in self.candidate_blocks(mask) {
            let rest = mask & !block;
            if best.is_finite() && self.upper(block) + self.upper(rest) < best * (1.0 - 1e-12) {
                continue;
            }
            let v = self.power(block)? + self.best(rest)?;
            best = best.max(v);
        }
        self.best.insert(mask, best);
        Ok(best)
    }

    /// Runs the search, then rescans the near-optimal partitions so the
    /// reported partition maximizes the canonical value even when float
    /// rounding makes several partitions tie.
    fn run(mut self) -> Result<SchreierPartition> {
        let full = (1u32 << self.support.len()) - 1;
        let best = self.best(full)?;
        let threshold = best * (1.0 - 1e-12);
        let mut chosen: Option<(f64, Vec<u32>)> = None;
        let mut stack: Vec<u32> = Vec::new();
        let mut scanned = 0usize;
        self.scan(full, 0.0, threshold, &mut stack, &mut chosen, &mut scanned)?;
        let (_, blocks) = chosen.expect("the optimum is always rescanned");
        SchreierPartition::new(blocks.into_iter().map(|b| self.indices(b)).collect())
    }

    fn scan(
        &mut self,
        mask: u32,
        acc: f64,
        threshold: f64,
        stack: &mut Vec<u32>,
        chosen: &mut Option<(f64, Vec<u32>)>,
        scanned: &mut usize,
    ) -> Result<()> {
        if mask == 0 {
            *scanned += 1;
            let value = canonical_terms(stack.iter().map(|b| self.block_power[b]).collect(), self.r);
            if chosen.as_ref().is_none_or(|(v, _)| value > *v) {
                *chosen = Some((value, stack.clone()));
            }
            return Ok(());
        }
        for block in self.candidate_blocks(mask) {
            if *scanned >= TIE_SCAN_LIMIT && chosen.is_some() {
                return Ok(());
            }
            let rest = mask & !block;
            if self.upper(block) + self.upper(rest) + acc < threshold {
                continue;
            }
            let p = self.power(block)?;
            if acc + p + self.best(rest)? < threshold {
                continue;
            }
            stack.push(block);
            self.scan(rest, acc + p, threshold, stack, chosen, scanned)?;
            stack.pop();
        }
        Ok(())
    }
}

fn canonical_terms(mut terms: Vec<f64>, r: f64) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>().powf(1.0 / r)
}

/// Coordinates in order of decreasing magnitude, each placed in whichever
/// admissible position (an existing block or a new singleton) maximizes the
/// running total.
fn greedy<N: Norm + ?Sized>(x: &FVec, base: &N, r: f64) -> Result<SchreierPartition> {
    let mut order: Vec<(usize, f64)> = x.iter().collect();
    order.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut powers: Vec<f64> = Vec::new();
    for (i, _) in order {
        let mut choice = None;
        let mut gain = base.norm(&x.restrict(&[i]))?.powf(r);
        for (b, block) in blocks.iter().enumerate() {
            let min = block[0].min(i);
            if block.len() + 1 > min {
                continue;
            }
            let mut grown = block.clone();
            grown.push(i);
            let p = base.norm(&x.restrict(&grown))?.powf(r);
            if p - powers[b] > gain {
                gain = p - powers[b];
                choice = Some((b, p));
            }
        }
        match choice {
            Some((b, p)) => {
                blocks[b].push(i);
                blocks[b].sort_unstable();
                powers[b] = p;
            }
            None => {
                blocks.push(vec![i]);
                powers.push(gain);
            }
        }
    }
    SchreierPartition::new(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::Lp;

    fn v(xs: &[f64]) -> FVec {
        FVec::from_dense(xs).unwrap()
    }

    #[test]
    fn schreier_predicate() {
        assert!(is_schreier(&[1]));
        assert!(!is_schreier(&[1, 2]));
        assert!(is_schreier(&[3, 5, 9]));
        assert!(is_schreier(&[]));
        assert!(!is_schreier(&[2, 3, 4]));
    }

    #[test]
    fn partition_enumeration() {
        let all: Vec<_> = admissible_partitions(&[1]).unwrap().collect();
        assert_eq!(all, vec![SchreierPartition { sets: vec![vec![1]] }]);

        let all: Vec<_> = admissible_partitions(&[1, 2, 3]).unwrap().map(|p| p.sets).collect();
        assert_eq!(all.len(), 2);
        assert!(all.contains(&vec![vec![1], vec![2], vec![3]]));
        assert!(all.contains(&vec![vec![1], vec![2, 3]]));

        let all: Vec<_> = admissible_partitions(&[]).unwrap().collect();
        assert_eq!(all, vec![SchreierPartition::default()]);

        let too_big: Vec<usize> = (1..=13).collect();
        assert!(matches!(admissible_partitions(&too_big), Err(Error::SizeLimit { size: 13, cap: 12 })));
    }

    /// Brute force over set partitions (Bell enumeration), filtered by
    /// admissibility.
    fn brute_count(support: &[usize]) -> usize {
        fn rec(rest: &[usize], blocks: &mut Vec<Vec<usize>>, count: &mut usize) {
            match rest.split_first() {
                None => {
                    if blocks.iter().all(|b| is_schreier(b)) {
                        *count += 1;
                    }
                }
                Some((&i, tail)) => {
                    for k in 0..blocks.len() {
                        blocks[k].push(i);
                        rec(tail, blocks, count);
                        blocks[k].pop();
                    }
                    blocks.push(vec![i]);
                    rec(tail, blocks, count);
                    blocks.pop();
                }
            }
        }
        let mut count = 0;
        rec(support, &mut Vec::new(), &mut count);
        count
    }

    #[test]
    fn enumeration_counts_match_brute_force() {
        for support in [vec![1, 2, 3, 4, 5], vec![2, 3, 4, 5, 6, 7], vec![1, 3, 4, 8, 9, 10, 11], vec![4, 5, 6, 7]] {
            let parts: Vec<_> = admissible_partitions(&support).unwrap().collect();
            assert_eq!(parts.len(), brute_count(&support), "{support:?}");
            for p in &parts {
                p.validate().unwrap();
                let mut covered: Vec<usize> = p.sets.concat();
                covered.sort_unstable();
                assert_eq!(covered, support);
            }
            let mut dedup = parts.clone();
            dedup.sort_by(|a, b| a.sets.cmp(&b.sets));
            dedup.dedup();
            assert_eq!(dedup.len(), parts.len());
        }
    }

    #[test]
    fn sb_examples() {
        let l1 = Lp::new(1.0).unwrap();
        let r = sb_norm(&v(&[1.0, 1.0, 1.0]), &l1, 2.0, SbMode::Exact).unwrap();
        assert!((r.value - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.partition.sets, vec![vec![1], vec![2, 3]]);
        assert!(r.exact);
        assert!((sb_norm_oracle(&v(&[1.0, 1.0, 1.0]), &l1, 2.0).unwrap() - 5f64.sqrt()).abs() < 1e-15);

        let l2 = Lp::new(2.0).unwrap();
        let x = FVec::from_pairs([(2, 1.0), (3, 1.0)]).unwrap();
        assert!((sb_norm(&x, &l2, 2.0, SbMode::Exact).unwrap().value - 2f64.sqrt()).abs() < 1e-15);

        let single = FVec::from_pairs([(5, -2.5)]).unwrap();
        assert_eq!(sb_norm(&single, &l2, 3.0, SbMode::Exact).unwrap().value, 2.5);
        assert_eq!(sb_norm(&FVec::new(), &l2, 3.0, SbMode::Exact).unwrap().value, 0.0);
        assert_eq!(sb_norm_oracle(&FVec::new(), &l2, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn exact_matches_oracle_on_fixed_cases() {
        let cases = [
            (vec![(1, 0.3), (2, -0.9), (3, 0.5), (5, 0.2), (6, 0.7), (8, -0.1)], 1.0, 2.0),
            (vec![(2, 1.0), (3, 1.0), (4, 1.0), (5, 1.0), (6, 1.0), (7, 1.0), (8, 1.0)], 1.5, 2.5),
            (vec![(1, 1.0), (2, 0.5), (3, 0.25), (4, 0.125), (10, 0.6), (11, 0.3), (12, 0.9), (9, 0.8)], 2.0, 2.0),
        ];
        for (pairs, p, r) in cases {
            let x = FVec::from_pairs(pairs).unwrap();
            let base = Lp::new(p).unwrap();
            let exact = sb_norm(&x, &base, r, SbMode::Exact).unwrap();
            assert_eq!(exact.value, sb_norm_oracle(&x, &base, r).unwrap());
            assert_eq!(exact.value, exact.partition.value(&x, &base, r).unwrap());
        }
    }

    #[test]
    fn heuristic_is_a_lower_bound() {
        let x = v(&[0.3, -0.9, 0.5, 0.2, 0.7, -0.1, 0.8, 0.4]);
        let base = Lp::new(1.0).unwrap();
        let h = sb_norm(&x, &base, 3.0, SbMode::Heuristic).unwrap();
        let e = sb_norm(&x, &base, 3.0, SbMode::Exact).unwrap();
        assert!(!h.exact);
        h.partition.validate().unwrap();
        assert!(h.value <= e.value);
        let wide: Vec<(usize, f64)> = (1..=30).map(|i| (i, 1.0 / i as f64)).collect();
        let wide = FVec::from_pairs(wide).unwrap();
        assert!(sb_norm(&wide, &base, 2.0, SbMode::Exact).is_err());
        assert!(sb_norm(&wide, &base, 2.0, SbMode::Heuristic).unwrap().value > 0.0);
    }

    #[test]
    fn unpruned_base_gives_same_answer() {
        let x = v(&[0.3, -0.9, 0.5, 0.2, 0.7, -0.1, 0.8, 0.4, 0.6]);
        let base = Lp::new(1.5).unwrap();
        let plain = crate::norm::FnNorm(|y: &FVec| base.norm(y));
        let a = sb_norm(&x, &base, 2.0, SbMode::Exact).unwrap();
        let b = sb_norm(&x, &plain, 2.0, SbMode::Exact).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn rejects_bad_exponent() {
        let base = Lp::new(2.0).unwrap();
        assert!(sb_norm(&FVec::unit(1), &base, 0.5, SbMode::Exact).is_err());
        assert!(sb_norm_oracle(&FVec::unit(1), &base, f64::NAN).is_err());
    }
}
