#![allow(dead_code)]

use banachkit::FVec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const Q_GRID: &[f64] = &[1.0, 1.25, 1.5, 2.0, 3.0];
pub const P_OFFSET: &[f64] = &[0.25, 1.0, 2.5];
pub const M_GRID: &[f64] = &[1.0, 1.5, 2.0, 4.0, 10.0];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs[rng.gen_range(0..xs.len())]
}

pub fn coeff(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.gen_range(-1.0..=1.0);
        if v != 0.0 {
            return v;
        }
    }
}

/// Support size uniform in [1, max_supp] inside [1, max_index].
pub fn vector(rng: &mut ChaCha8Rng, max_supp: usize, max_index: usize) -> FVec {
    let size = rng.gen_range(1..=max_supp);
    let mut idx: Vec<usize> = (1..=max_index).collect();
    idx.shuffle(rng);
    FVec::from_pairs(idx[..size].iter().map(|&i| (i, coeff(rng)))).unwrap()
}

/// A random injective relabelling of the support with random signs.
pub fn act(rng: &mut ChaCha8Rng, x: &FVec) -> FVec {
    let mut targets: Vec<usize> = (1..=40).collect();
    targets.shuffle(rng);
    let pairs: Vec<(usize, f64)> = x
        .iter()
        .zip(targets)
        .map(|((_, v), t)| (t, if rng.gen_bool(0.5) { -v } else { v }))
        .collect();
    FVec::from_pairs(pairs).unwrap()
}

/// (q, p, m) with 1 ≤ q < p.
pub fn gauge_params(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let q = pick(rng, Q_GRID);
    (q, q + pick(rng, P_OFFSET), pick(rng, M_GRID))
}

pub fn lp(values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |a, v| a.max(v.abs()));
    }
    values.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn lp_vec(x: &FVec, p: f64) -> f64 {
    lp(&x.values(), p)
}

/// Direct evaluation of the split objective at y = t∘x, z = (1−t)∘x:
/// max or euclidean combination of ‖y‖_q/m and m‖z‖_p.
fn split_objective(x: &[f64], t: &[f64], q: f64, p: f64, m: f64, euclid: bool) -> f64 {
    let y: Vec<f64> = x.iter().zip(t).map(|(a, s)| a * s).collect();
    let z: Vec<f64> = x.iter().zip(t).map(|(a, s)| a * (1.0 - s)).collect();
    let a = lp(&y, q) / m;
    let b = m * lp(&z, p);
    if euclid {
        a.hypot(b)
    } else {
        a.max(b)
    }
}

/// Grid scan followed by golden-section refinement, nested over the
/// coordinates of t ∈ [0,1]^d for splits y = t∘x, d ≤ 2. Clipping y
/// coordinatewise between 0 and x never increases either norm, so the box
/// holds an optimal split; the objective is convex in t, and so is its
/// partial minimum over the inner coordinate.
pub fn gauge_grid_oracle(x: &[f64], q: f64, p: f64, m: f64, euclid: bool) -> f64 {
    assert!(x.len() <= 2);
    match x.len() {
        0 => 0.0,
        1 => minimize_1d(|a| split_objective(x, &[a], q, p, m, euclid)),
        _ => minimize_1d(|a| minimize_1d(|b| split_objective(x, &[a, b], q, p, m, euclid))),
    }
}

fn minimize_1d(f: impl Fn(f64) -> f64) -> f64 {
    let steps = 32;
    let (mut best_i, mut best) = (0usize, f64::INFINITY);
    for i in 0..=steps {
        let v = f(i as f64 / steps as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = (best_i.saturating_sub(1)) as f64 / steps as f64;
    let mut hi = ((best_i + 1).min(steps)) as f64 / steps as f64;
    let g: f64 = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    best.min(fc).min(fd).min(f(lo)).min(f(hi))
}
