use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{case_rng, Check, Provenance};
use crate::davis::{DavisParams, DavisSpace, Schedule, Truncation};
use crate::gauge::{flat_gauge, gauge2_qpm, gauge_qpm, GaugeOptions, GaugeParams, GaugeVariant};
use crate::norm::{Lp, Norm};
use crate::schreier::{is_schreier, sb_norm, sb_norm_oracle, SbMode};
use crate::space::{build_chain, parse, ChainBase, ChainPolicy, Evaluator};
use crate::spreading::{
    decompose, geometric_grid, profile_norm, singular_shift, sm_estimate, sm_exact_schreier, SequenceGenerator,
    DEFAULT_CAUCHY_TOL,
};
use crate::vector::{lp_norm, Flat, FVec};

use Provenance::{Derived, Published, Trivial};

const AXIOM_TOL: f64 = 1e-7;
const GAUGE_TOL: f64 = 1e-9;

const GAUGE_Q: &[f64] = &[1.0, 1.25, 1.5, 2.0];
const GAUGE_P_OFFSET: &[f64] = &[0.5, 1.0, 2.5];
const GAUGE_M: &[f64] = &[1.0, 2.0, 3.0, 5.0, 8.0];
const SB_P: &[f64] = &[1.0, 1.5, 2.0, 3.0];
const SB_R_OFFSET: &[f64] = &[0.0, 0.5, 1.0, 2.0];

/// Support size uniform in [1, max_supp], indices uniform without
/// replacement in [1, max_index], coefficients uniform in [−1, 1].
pub(crate) fn random_vector(rng: &mut ChaCha8Rng, max_supp: usize, max_index: usize) -> FVec {
    let size = rng.gen_range(1..=max_supp.min(max_index));
    let mut idx: Vec<usize> = (1..=max_index).collect();
    idx.shuffle(rng);
    let pairs: Vec<(usize, f64)> = idx[..size].iter().map(|&i| (i, nonzero(rng))).collect();
    FVec::from_pairs(pairs).expect("random entries are finite")
}

fn nonzero(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.gen_range(-1.0..=1.0);
        if v != 0.0 {
            return v;
        }
    }
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs[rng.gen_range(0..xs.len())]
}

/// A random permutation of the support onto fresh indices, with random signs.
fn permute_signs(rng: &mut ChaCha8Rng, x: &FVec) -> FVec {
    let mut targets: Vec<usize> = (1..=x.max_index().unwrap_or(0) + 6).collect();
    targets.shuffle(rng);
    let pairs: Vec<(usize, f64)> = x
        .iter()
        .zip(targets)
        .map(|((_, v), t)| (t, if rng.gen_bool(0.5) { -v } else { v }))
        .collect();
    FVec::from_pairs(pairs).expect("finite")
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn run(check: Check, f: impl FnOnce(Check) -> crate::Result<Check>) -> Check {
    let fallback = Check {
        check: check.check.clone(),
        inputs: check.inputs.clone(),
        provenance: check.provenance,
        anchor: check.anchor,
        ..Check::new("", check.provenance, None)
    };
    match f(check) {
        Ok(c) => c,
        Err(e) => fallback.failed_with(&e),
    }
}

pub(super) fn fixed_cases(suite: &str) -> Vec<Check> {
    match suite {
        "gauges" => gauge_fixed(),
        "sb" => sb_fixed(),
        "sm" => sm_fixed(),
        "davis" => davis_fixed(),
        "chain" => chain_fixed(),
        _ => Vec::new(),
    }
}

fn gauge_fixed() -> Vec<Check> {
    let mut out = Vec::new();
    for &(q, p, m) in &[(1.0, 2.0, 2.0), (1.5, 2.5, 2.0), (1.2, 4.0, 3.0)] {
        let check = Check::new("unit vector value", Derived, Some("axis slice of m·B_q + B_p/m")).inputs(json!({"q": q, "p": p, "m": m}));
        out.push(run(check, |c| {
            let pr = GaugeParams::new(q, p, m)?;
            let g = gauge_qpm(&FVec::unit(1), pr, GAUGE_TOL)?.value;
            let want = 1.0 / (m + 1.0 / m);
            Ok(c.outcome(json!(want), json!(g), 1e-9, close(g, want, 1e-9)))
        }));
    }
    for &(q, p, m) in &[(1.0, 2.0, 1.0), (1.5, 2.5, 2.0), (1.25, 3.5, 5.0)] {
        for n in 1..=6 {
            let check = Check::new("flat closed form vs generic solver", Derived, Some("symmetry averaging on flat vectors"))
                .inputs(json!({"q": q, "p": p, "m": m, "n": n}));
            out.push(run(check, |c| {
                let pr = GaugeParams::new(q, p, m)?;
                let x = Flat::new(1.0, 1, n)?.to_fvec();
                let solved = crate::gauge::gauge(&x, pr, GaugeVariant::Gauge, &GaugeOptions::generic(GAUGE_TOL))?.value;
                let want = 1.0 / (m * (n as f64).powf(-1.0 / q) + (n as f64).powf(-1.0 / p) / m);
                Ok(c.outcome(json!(want), json!(solved), 1e-6, (solved - want).abs() <= 1e-6 * want))
            }));
        }
    }
    let ns: Vec<usize> = (1..=6).map(|e| 10usize.pow(e)).collect();
    for &(q, p, m) in &[(1.5, 2.5, 2.0), (1.0, 2.0, 4.0)] {
        let check = Check::new("normalized flat table increases toward m", Published, Some("ℓ_p-normalized flat vectors approach m from below"))
            .inputs(json!({"q": q, "p": p, "m": m, "n": ns}));
        out.push(run(check, |c| {
            let pr = GaugeParams::new(q, p, m)?;
            let mut table = Vec::new();
            let mut ok = true;
            for &n in &ns {
                let v = flat_gauge(&Flat::unit_lp(n, p), pr, GaugeVariant::Gauge)?;
                let want = 1.0 / (m * (n as f64).powf(1.0 / p - 1.0 / q) + 1.0 / m);
                ok &= close(v, want, 1e-6) && v < m;
                table.push(v);
            }
            ok &= table.windows(2).all(|w| w[1] > w[0]);
            Ok(c.outcome(json!("strictly increasing, below m"), json!(table), 1e-6, ok))
        }));
        let check = Check::new("ℓ_q-normalized flat table decreases toward 0", Published, Some("ℓ_q-normalized flat vectors tend to 0"))
            .inputs(json!({"q": q, "p": p, "m": m, "n": ns}));
        out.push(run(check, |c| {
            let pr = GaugeParams::new(q, p, m)?;
            let mut table = Vec::new();
            let mut ok = true;
            for &n in &ns {
                let v = flat_gauge(&Flat::unit_lp(n, q), pr, GaugeVariant::Gauge)?;
                let want = 1.0 / (m + (n as f64).powf(1.0 / q - 1.0 / p) / m);
                ok &= close(v, want, 1e-6);
                table.push(v);
            }
            ok &= table.windows(2).all(|w| w[1] < w[0]);
            Ok(c.outcome(json!("strictly decreasing"), json!(table), 1e-6, ok))
        }));
    }
    out
}

pub(super) fn gauges(seed: u64, case: usize) -> Vec<Check> {
    let mut rng = case_rng(seed, case);
    let x = random_vector(&mut rng, 12, 12);
    let q = pick(&mut rng, GAUGE_Q);
    let p = q + pick(&mut rng, GAUGE_P_OFFSET);
    let m = pick(&mut rng, GAUGE_M);
    let y = random_vector(&mut rng, 12, 12);
    let moved = permute_signs(&mut rng, &x);
    let c: f64 = rng.gen_range(-3.0..3.0);
    let inputs = json!({"x": x, "q": q, "p": p, "m": m});
    let pr = match GaugeParams::new(q, p, m) {
        Ok(pr) => pr,
        Err(e) => return vec![Check::new("parameters", Trivial, None).inputs(inputs).failed_with(&e)],
    };
    let g = match (gauge_qpm(&x, pr, GAUGE_TOL), gauge2_qpm(&x, pr, GAUGE_TOL)) {
        (Ok(g), Ok(g2)) => (g, g2),
        (Err(e), _) | (_, Err(e)) => return vec![Check::new("solver", Trivial, None).inputs(inputs).failed_with(&e)],
    };
    let (g, g2) = g;
    let np = lp_norm(&x, p).unwrap_or(f64::NAN);
    let nq = lp_norm(&x, q).unwrap_or(f64::NAN);
    let cert = || serde_json::to_value(&g).ok();
    let mut out = Vec::new();

    let lo = np / (m + 1.0 / m);
    let hi = (m + 1.0 / m) * np;
    out.push(
        Check::new("sandwich ‖x‖_p/(m+1/m) ≤ g ≤ (m+1/m)‖x‖_p", Derived, Some("equivalence of the gauge with ‖·‖_p"))
            .inputs(inputs.clone())
            .outcome(json!([lo, hi]), json!(g.value), AXIOM_TOL, lo - AXIOM_TOL <= g.value && g.value <= hi + AXIOM_TOL)
            .certificate(cert),
    );
    let bound = nq / (m + 1.0 / m);
    out.push(
        Check::new("ℓ_q bound", Published, Some("gauge bounded by ‖x‖_q/(m+1/m)"))
            .inputs(inputs.clone())
            .outcome(json!(bound), json!(g.value), AXIOM_TOL, g.value <= bound + AXIOM_TOL)
            .certificate(cert),
    );
    out.push(run(
        Check::new("permutation and sign invariance", Published, Some("the gauge is a symmetric norm")).inputs(json!({"x": x, "image": moved, "q": q, "p": p, "m": m})),
        |c| {
            let h = gauge_qpm(&moved, pr, GAUGE_TOL)?.value;
            Ok(c.outcome(json!(g.value), json!(h), AXIOM_TOL, (h - g.value).abs() <= AXIOM_TOL))
        },
    ));
    let sqrt2 = std::f64::consts::SQRT_2;
    out.push(
        Check::new("g ≤ g2 ≤ √2·g", Published, Some("comparison of the max and euclidean gauges"))
            .inputs(inputs.clone())
            .outcome(json!([g.value, sqrt2 * g.value]), json!(g2.value), AXIOM_TOL, g.value <= g2.value + AXIOM_TOL && g2.value <= sqrt2 * g.value + AXIOM_TOL)
            .certificate(cert),
    );
    let ny = lp_norm(&g.y, q).unwrap_or(f64::NAN);
    let nz = lp_norm(&g.z, p).unwrap_or(f64::NAN);
    let scale = x.iter().fold(0.0_f64, |acc, (_, v)| acc.max(v.abs()));
    out.push(
        Check::new("witness reconstructs x", Trivial, None)
            .inputs(inputs.clone())
            .outcome(
                json!({"residual": 0.0, "objective": g.value}),
                json!({"residual": g.residual_certificate, "objective": ny.max(nz)}),
                1e-9,
                g.residual_certificate <= 1e-9 * scale && ny.max(nz) <= g.value * (1.0 + 1e-7),
            )
            .certificate(cert),
    );
    out.push(run(Check::new("absolute homogeneity", Trivial, None).inputs(json!({"x": x, "c": c, "q": q, "p": p, "m": m})), |chk| {
        let h = gauge_qpm(&x.scale(c), pr, GAUGE_TOL)?.value;
        let want = c.abs() * g.value;
        Ok(chk.outcome(json!(want), json!(h), AXIOM_TOL, close(h, want, AXIOM_TOL)))
    }));
    out.push(run(Check::new("triangle inequality", Trivial, None).inputs(json!({"x": x, "y": y, "q": q, "p": p, "m": m})), |chk| {
        let gy = gauge_qpm(&y, pr, GAUGE_TOL)?.value;
        let gs = gauge_qpm(&x.add(&y), pr, GAUGE_TOL)?.value;
        Ok(chk.outcome(json!(g.value + gy), json!(gs), AXIOM_TOL, gs <= g.value + gy + AXIOM_TOL))
    }));
    out
}

fn sb_fixed() -> Vec<Check> {
    let x = FVec::from_dense(&[1.0, 1.0, 1.0]).expect("finite");
    let check = Check::new("sb(lp(1), r=2) at (1,1,1)", Derived, Some("enumeration of the two admissible partitions")).inputs(json!({"x": x}));
    vec![run(check, |c| {
        let r = sb_norm(&x, &Lp::new(1.0)?, 2.0, SbMode::Exact)?;
        Ok(c.outcome(json!(5f64.sqrt()), json!(r.value), 1e-12, close(r.value, 5f64.sqrt(), 1e-12)))
    })]
}

pub(super) fn sb(seed: u64, case: usize) -> Vec<Check> {
    let mut rng = case_rng(seed, case);
    let p = pick(&mut rng, SB_P);
    let r = p + pick(&mut rng, SB_R_OFFSET);
    let x = random_vector(&mut rng, 8, 12);
    let base = Lp::new(p).expect("grid exponents are ≥ 1");
    let inputs = json!({"x": x, "p": p, "r": r});
    let mut out = Vec::new();

    let exact = match sb_norm(&x, &base, r, SbMode::Exact) {
        Ok(e) => e,
        Err(e) => return vec![Check::new("exact search", Trivial, None).inputs(inputs).failed_with(&e)],
    };
    let cert = || serde_json::to_value(&exact).ok();
    out.push(run(Check::new("exact search equals plain enumeration", Derived, Some("supremum over admissible families")).inputs(inputs.clone()), |c| {
        let o = sb_norm_oracle(&x, &base, r)?;
        Ok(c.outcome(json!(o), json!(exact.value), 0.0, o == exact.value).certificate(cert))
    }));

    // one random admissible set inside the support
    let support = x.support();
    let lead = support[rng.gen_range(0..support.len())];
    let mut others: Vec<usize> = support.iter().copied().filter(|&i| i > lead).collect();
    others.shuffle(&mut rng);
    others.truncate(rng.gen_range(0..lead.min(others.len() + 1)));
    let mut set = vec![lead];
    set.extend(others);
    out.push(run(Check::new("dominates every admissible restriction", Trivial, None).inputs(json!({"x": x, "p": p, "r": r, "set": set})), |c| {
        debug_assert!(is_schreier(&set));
        let f = base.norm(&x.restrict(&set))?;
        Ok(c.outcome(json!(f), json!(exact.value), 1e-12, exact.value >= f * (1.0 - 1e-12)))
    }));

    let flipped = FVec::from_pairs(x.iter().map(|(i, v)| (i, if rng.gen_bool(0.5) { -v } else { v }))).expect("finite");
    out.push(run(Check::new("sign invariance", Trivial, None).inputs(json!({"x": x, "flipped": flipped, "p": p, "r": r})), |c| {
        let v = sb_norm(&flipped, &base, r, SbMode::Exact)?.value;
        Ok(c.outcome(json!(exact.value), json!(v), 0.0, v == exact.value))
    }));

    // support inside [k, ∞) with at most k elements
    let k = rng.gen_range(1..=8usize);
    let mut pool: Vec<usize> = (k..k + 8).collect();
    pool.shuffle(&mut rng);
    let sch = FVec::from_pairs(pool[..k].iter().map(|&i| (i, nonzero(&mut rng)))).expect("finite");
    out.push(run(Check::new("equality on Schreier-supported vectors", Published, Some("SB norm equals the base norm on admissible supports")).inputs(json!({"x": sch, "p": p, "r": r})), |c| {
        let v = sb_norm(&sch, &base, r, SbMode::Exact)?.value;
        let want = base.norm(&sch)?;
        Ok(c.outcome(json!(want), json!(v), 1e-9, (v - want).abs() <= 1e-9 * want))
    }));

    let a = random_vector(&mut rng, 6, 10);
    let b = FVec::from_pairs(a.iter().map(|(i, _)| (i, nonzero(&mut rng)))).expect("finite");
    let comb = FVec::from_pairs(a.iter().map(|(i, ai)| (i, (ai.abs().powf(p) + b.get(i).abs().powf(p)).powf(1.0 / p)))).expect("finite");
    out.push(run(Check::new("p-convexity", Published, Some("SB over ℓ_p is p-convex for r ≥ p")).inputs(json!({"a": a, "b": b, "p": p, "r": r})), |c| {
        let lhs = sb_norm(&comb, &base, r, SbMode::Exact)?.value;
        let na = sb_norm(&a, &base, r, SbMode::Exact)?.value;
        let nb = sb_norm(&b, &base, r, SbMode::Exact)?.value;
        let rhs = (na.powf(p) + nb.powf(p)).powf(1.0 / p);
        Ok(c.outcome(json!(rhs), json!(lhs), AXIOM_TOL, rhs - lhs >= -AXIOM_TOL))
    }));

    let w = random_vector(&mut rng, 8, 12);
    let (left, right): (Vec<_>, Vec<_>) = w.iter().partition(|_| rng.gen_bool(0.5));
    let u = FVec::from_pairs(left).expect("finite");
    let v = FVec::from_pairs(right).expect("finite");
    out.push(run(Check::new("lower ℓ_r estimate", Published, Some("SB satisfies a lower ℓ_r estimate")).inputs(json!({"x": u, "y": v, "p": p, "r": r})), |c| {
        let s = sb_norm(&u.add(&v), &base, r, SbMode::Exact)?.value.powf(r);
        let parts = sb_norm(&u, &base, r, SbMode::Exact)?.value.powf(r) + sb_norm(&v, &base, r, SbMode::Exact)?.value.powf(r);
        Ok(c.outcome(json!(parts), json!(s), AXIOM_TOL, s - parts >= -AXIOM_TOL))
    }));
    out
}

fn sm_fixed() -> Vec<Check> {
    let gen = singular_shift(&SequenceGenerator::basis("lp(2)"));
    let check = Check::new("singular shift of the ℓ_2 basis", Derived, Some("shifted sequence x_1 + x_{n+1}"));
    vec![run(check, |c| {
        let est = sm_estimate(&gen, &[1.0, 1.0], &geometric_grid(2, 2, 3, false), 1e-9)?;
        let ok = est.stabilized && est.values.iter().all(|&v| close(v, 6f64.sqrt(), 1e-12));
        Ok(c.outcome(json!(6f64.sqrt()), json!(est.values), 1e-12, ok))
    })]
}

pub(super) fn sm(seed: u64, case: usize) -> Vec<Check> {
    let mut rng = case_rng(seed, case);
    let n = rng.gen_range(1..=3usize);
    let coeffs: Vec<f64> = (0..n).map(|_| nonzero(&mut rng)).collect();
    let p = pick(&mut rng, &[1.0, 2.0]);
    let r = p + pick(&mut rng, &[0.0, 1.0]);
    let space = format!("sb(lp({p}), r={r})");
    let mut out = Vec::new();

    let mut grid = geometric_grid(n, n, 3, false);
    grid.extend(geometric_grid(n, n + 1, 3, true));
    out.push(run(Check::new("SB basis estimates equal the base norm", Published, Some("the SB basis generates the base basis as a spreading model")).inputs(json!({"space": space, "coeffs": coeffs, "shifts": grid})), |c| {
        let est = sm_estimate(&SequenceGenerator::basis(&space), &coeffs, &grid, 1e-9)?;
        let want = sm_exact_schreier(&parse(&space)?, &coeffs)?;
        let ok = est.values.iter().all(|&v| (v - want).abs() <= 1e-9 * want);
        Ok(c.outcome(json!(want), json!(est.values), 1e-9, ok))
    }));

    let sym = pick(&mut rng, &["lp(1.5)", "lp(3)", "davis(lp(2), q=1.5, p=2.5, m=pow2, K=6)"]);
    out.push(run(Check::new("symmetric basis is spreading", Trivial, None).inputs(json!({"space": sym, "coeffs": coeffs})), |c| {
        let est = sm_estimate(&SequenceGenerator::basis(sym), &coeffs, &geometric_grid(n, n, 3, true), 1e-9)?;
        let ok = est.values.iter().all(|&v| v == est.values[0]);
        Ok(c.outcome(json!(est.values[0]), json!(est.values), 0.0, ok))
    }));

    let hi: f64 = rng.gen_range(0.6..1.0);
    let profile = if rng.gen_bool(0.5) { vec![hi] } else { vec![hi, rng.gen_range(0.5..hi)] };
    let gen = SequenceGenerator::Planted {
        profile: profile.clone(),
        small: 0.3,
        decay: 0.5,
        block_len: 2,
        space: "sb(lp(2), r=2)".into(),
    };
    let a: Vec<f64> = (0..2).map(|_| nonzero(&mut rng)).collect();
    out.push(run(Check::new("absorption of the small part", Published, Some("the SB estimate is squeezed between profile norms")).inputs(json!({"generator": gen, "coeffs": a})), |c| {
        let d = decompose(&gen, &[0.45, 0.35], 16, DEFAULT_CAUCHY_TOL)?;
        let est = sm_estimate(&gen, &a, &geometric_grid(2, 4, 3, false), 1e-6)?;
        let pf = profile_norm(&d.profile, &a, &parse("lp(2)")?)?;
        let ratio = est.value / pf;
        let ok = est.value >= pf * (1.0 - 1e-9) && ratio.is_finite();
        Ok(c.outcome(json!({"lower": pf}), json!({"estimate": est.value, "observed_C": ratio}), 1e-9, ok))
    }));
    out
}

fn davis_fixed() -> Vec<Check> {
    let check = Check::new("unit vector with pow2 schedule over ℓ_2", Derived, Some("closed-form components summed with a geometric tail"));
    vec![run(check, |c| {
        let space = DavisSpace::new(Lp::new(2.0)?, DavisParams::new(1.5, 2.5, Schedule::Pow2))?;
        let v = space.evaluate(&FVec::unit(1))?.value;
        let want: f64 = (1..200).map(|k| 1.0 / (4f64.powi(k) + 4f64.powi(-k))).sum::<f64>().sqrt();
        Ok(c.outcome(json!(want), json!(v), 1e-6, (v - want).abs() <= 1e-6))
    })]
}

pub(super) fn davis(seed: u64, case: usize) -> Vec<Check> {
    let mut rng = case_rng(seed, case);
    let x = random_vector(&mut rng, 6, 8);
    let q = pick(&mut rng, &[1.25, 1.5, 2.0]);
    let p = q + pick(&mut rng, &[0.5, 1.0]);
    let outer_p = pick(&mut rng, &[1.0, 2.0, 3.0]);
    let k = rng.gen_range(2..=8usize);
    let moved = permute_signs(&mut rng, &x);
    let y = random_vector(&mut rng, 6, 8);
    let c: f64 = rng.gen_range(-3.0..3.0);
    let inputs = json!({"x": x, "q": q, "p": p, "outer": format!("lp({outer_p})"), "K": k});
    let space = match Lp::new(outer_p).and_then(|o| DavisSpace::new(o, DavisParams::new(q, p, Schedule::Pow2).with_truncation(Truncation::Fixed(k)))) {
        Ok(s) => s,
        Err(e) => return vec![Check::new("construction", Trivial, None).inputs(inputs).failed_with(&e)],
    };
    let mut out = Vec::new();
    out.push(run(Check::new("truncation soundness", Derived, Some("omitted components bounded through the ℓ_q bound")).inputs(inputs.clone()), |chk| {
        let a = space.evaluate_with_k(&x, k)?;
        let b = space.evaluate_with_k(&x, k + 3)?;
        let gap = (b.value - a.value).abs();
        Ok(chk.outcome(json!(a.tail_bound), json!(gap), 0.0, gap <= a.tail_bound && b.value >= a.value))
    }));
    out.push(run(Check::new("components between the two gauges", Trivial, None).inputs(inputs.clone()), |chk| {
        let r = space.evaluate(&x)?;
        let mut ok = true;
        for (i, g) in r.components.iter().enumerate() {
            let lo = gauge_qpm(&x, GaugeParams::new(q, p, 2f64.powi(i as i32 + 1))?, GAUGE_TOL)?.value;
            ok &= *g >= lo * (1.0 - 1e-8) && *g <= std::f64::consts::SQRT_2 * lo * (1.0 + 1e-8);
        }
        Ok(chk.outcome(json!("gauge ≤ g_k ≤ √2·gauge"), json!(r.components), 1e-8, ok))
    }));
    out.push(run(Check::new("permutation and sign invariance", Published, Some("the diagonal space has a 1-symmetric basis")).inputs(json!({"x": x, "image": moved})), |chk| {
        let a = space.evaluate(&x)?;
        let b = space.evaluate(&moved)?;
        let ok = a.components.iter().zip(&b.components).all(|(u, v)| close(*u, *v, 1e-12));
        Ok(chk.outcome(json!(a.components), json!(b.components), 1e-12, ok))
    }));
    out.push(run(Check::new("absolute homogeneity", Trivial, None).inputs(json!({"x": x, "c": c})), |chk| {
        let a = space.norm(&x)?;
        let b = space.norm(&x.scale(c))?;
        Ok(chk.outcome(json!(c.abs() * a), json!(b), AXIOM_TOL, close(b, c.abs() * a, AXIOM_TOL)))
    }));
    out.push(run(Check::new("triangle inequality", Trivial, None).inputs(json!({"x": x, "y": y})), |chk| {
        let s = space.norm(&x.add(&y))?;
        let t = space.norm(&x)? + space.norm(&y)?;
        Ok(chk.outcome(json!(t), json!(s), AXIOM_TOL, s <= t + AXIOM_TOL))
    }));
    out
}

fn chain_fixed() -> Vec<Check> {
    let check = Check::new("chain over ℓ_2 with k = 2", Derived, Some("chain exponents: r strictly increasing, 1 < s < t below the previous p"));
    vec![run(check, |c| {
        let d = build_chain(&ChainBase::lp(2), 2, &ChainPolicy::default())?;
        d.check_inequalities()?;
        let got: Vec<[&str; 3]> = d.levels.iter().map(|l| [l.r.exact.as_str(), l.s.exact.as_str(), l.t.exact.as_str()]).collect();
        let want = vec![["3", "4/3", "5/3"], ["4", "10/9", "11/9"]];
        Ok(c.outcome(json!(want), json!(got), 0.0, got == want))
    })]
}

pub(super) fn chain(seed: u64, case: usize) -> Vec<Check> {
    let mut rng = case_rng(seed, case);
    let x = random_vector(&mut rng, 6, 6);
    let y = random_vector(&mut rng, 6, 6);
    let c: f64 = rng.gen_range(-3.0..3.0);
    let inputs = json!({"x": x, "y": y, "c": c});
    let check = Check::new("norm axioms on X_2", Trivial, None).inputs(inputs);
    vec![run(check, |chk| {
        let d = build_chain(&ChainBase::lp(2), 2, &ChainPolicy::default())?;
        let ev = Evaluator::new(&d.top()?)?;
        let nx = ev.norm(&x)?;
        let ny = ev.norm(&y)?;
        let ncx = ev.norm(&x.scale(c))?;
        let nxy = ev.norm(&x.add(&y))?;
        let ok = nx > 0.0 && close(ncx, c.abs() * nx, AXIOM_TOL) && nxy <= nx + ny + AXIOM_TOL;
        let cert = || ev.norm_of(&x).ok().and_then(|(_, cert)| serde_json::to_value(cert).ok());
        Ok(chk
            .outcome(json!({"|c|·‖x‖": c.abs() * nx, "‖x‖+‖y‖": nx + ny}), json!({"‖cx‖": ncx, "‖x+y‖": nxy}), AXIOM_TOL, ok)
            .certificate(cert))
    })]
}

/// Normalized flat blocks in SB(ℓ_2, r) against the ℓ_r norm of the
/// coefficients. Report-only: the ratio is recorded, and the check passes
/// whenever it is finite and positive.
pub(super) fn sb_flat_blocks(seed: u64, case: usize) -> Vec<Check> {
    let mut rng = case_rng(seed, case);
    let len = rng.gen_range(2..=4usize);
    let start = rng.gen_range(2..=6usize);
    let r = pick(&mut rng, &[2.0, 3.0]);
    let a: Vec<f64> = (0..2).map(|_| nonzero(&mut rng)).collect();
    let space = format!("sb(lp(2), r={r})");
    let inputs = json!({"space": space, "block_len": len, "start": start, "coeffs": a});
    let check = Check::new("flat block ratio to ℓ_r", Derived, Some("ℓ_r behaviour of block sequences (experiment)")).inputs(inputs);
    vec![run(check, |c| {
        let ev = Evaluator::new(&parse(&space)?)?;
        let h = (len as f64).powf(-0.5);
        let mut pairs = Vec::new();
        for (j, &aj) in a.iter().enumerate() {
            for i in 0..len {
                pairs.push((start + j * len + i, aj * h));
            }
        }
        let v = ev.norm(&FVec::from_pairs(pairs)?)?;
        let lr = a.iter().map(|t| t.abs().powf(r)).sum::<f64>().powf(1.0 / r);
        let ratio = v / lr;
        Ok(c.outcome(Value::Null, json!({"ratio": ratio}), 0.0, ratio.is_finite() && ratio > 0.0))
    })]
}
