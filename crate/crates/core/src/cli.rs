//! The `banachkit` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::harness::{run_suite, SUITES};
use crate::space::chain::{parse_rational, ChainBase, ChainPolicy};
use crate::space::eval::CACHE_FILE;
use crate::space::{build_chain, parse, EvalOptions, Evaluator, NormCache};
use crate::spreading::{decompose, geometric_grid, sm_estimate_with, SequenceGenerator, DEFAULT_CAUCHY_TOL};
use crate::vector::{parse_vector, FVec};

pub const CACHE_ENV: &str = "BANACHKIT_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(name = "banachkit", version, about = "Norm evaluation and invariant checks for finitely supported sequences")]
pub struct Cli {
    /// Seed for randomized suites and smoke tests.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Solver tolerance (gauges and spreading-model stabilization).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Emit JSON where a command would otherwise print text or CSV.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the primary output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a norm and print its certificate.
    Norm {
        #[arg(long)]
        space: String,
        /// Dense `[a, b, …]`, sparse `{"i": v}` or a JSON object.
        #[arg(long)]
        vec: String,
    },
    /// Spreading-model estimates over a shift grid, as CSV.
    Sm {
        #[command(flatten)]
        source: GeneratorArgs,
        /// Comma-separated coefficients a_1,…,a_n.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        coeffs: Vec<f64>,
        /// Smallest starting shift (defaults to n).
        #[arg(long)]
        k0: Option<usize>,
        /// Number of grid points.
        #[arg(long, default_value_t = 4)]
        count: usize,
        /// Spread the shifts geometrically instead of keeping them consecutive.
        #[arg(long)]
        spread: bool,
    },
    /// Split a sequence into profile and small parts.
    Decompose {
        #[command(flatten)]
        source: GeneratorArgs,
        /// Decreasing thresholds δ_1 > δ_2 > ….
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.25,0.125")]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 32)]
        horizon: usize,
    },
    /// Build the iterated chain X_1, …, X_k.
    Chain {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=8))]
        k: u64,
        /// Base exponent p_0 as a rational, e.g. `2` or `5/2`.
        #[arg(long, default_value = "2")]
        p0: String,
        /// Base lower-estimate exponent q_0 (defaults to p_0).
        #[arg(long)]
        q0: Option<String>,
        #[arg(long, default_value = "1")]
        r_step: String,
        #[arg(long, default_value = "1/3")]
        s_frac: String,
        #[arg(long, default_value = "2/3")]
        t_frac: String,
        /// Number of random vectors for the X_k smoke test (0 skips it).
        #[arg(long, default_value_t = 5)]
        smoke: usize,
    },
    /// Run an invariant suite and emit its report.
    Check {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct GeneratorArgs {
    /// Generator as JSON, or `@path` to read it from a file.
    #[arg(long)]
    generator: Option<String>,
    /// Shorthand for the unit vector basis of a space.
    #[arg(long)]
    basis: Option<String>,
}

impl GeneratorArgs {
    fn load(&self) -> Result<SequenceGenerator> {
        if let Some(space) = &self.basis {
            return Ok(SequenceGenerator::basis(space));
        }
        let text = self.generator.as_deref().unwrap_or_default();
        let text = match text.strip_prefix('@') {
            Some(path) => std::fs::read_to_string(path)?,
            None => text.to_string(),
        };
        Ok(serde_json::from_str(&text)?)
    }
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::Parse(_) | Error::VectorLiteral(_) => 2,
        Error::SizeLimit { .. } | Error::Solver { .. } => 3,
        _ => 1,
    }
}

fn cache_path() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(|d| Path::new(&d).join(CACHE_FILE))
}

fn evaluator(space: &crate::space::SpaceExpr, tol: Option<f64>) -> Result<Evaluator> {
    let cache = match cache_path() {
        Some(p) => NormCache::load(&p)?,
        None => NormCache::new(),
    };
    let mut opts = EvalOptions::default();
    if let Some(t) = tol {
        opts.gauge_tol = t;
    }
    Evaluator::with_options(space, opts, cache)
}

fn persist(cache: &Arc<NormCache>) -> Result<()> {
    if let Some(p) = cache_path() {
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir)?;
        }
        cache.save(&p)?;
    }
    Ok(())
}

/// Runs a parsed command line, returning the text for the primary output and
/// whether the command succeeded.
pub fn execute(cli: &Cli) -> Result<(String, bool)> {
    match &cli.command {
        Command::Norm { space, vec } => {
            let expr = parse(space)?;
            let x: FVec = parse_vector(vec)?;
            let ev = evaluator(&expr, cli.tol)?;
            let (value, certificate) = ev.norm_of(&x)?;
            persist(ev.cache())?;
            let out = json!({"space": expr.to_string(), "value": value, "certificate": certificate});
            Ok((serde_json::to_string_pretty(&out)? + "\n", true))
        }
        Command::Sm { source, coeffs, k0, count, spread } => {
            let gen = source.load()?;
            let ev = evaluator(&gen.space_expr()?, cli.tol)?;
            let n = coeffs.len();
            let grid = geometric_grid(n, k0.unwrap_or(n.max(1)), *count, *spread);
            let est = sm_estimate_with(&gen, &ev, coeffs, &grid, cli.tol.unwrap_or(1e-9))?;
            persist(ev.cache())?;
            if cli.json {
                return Ok((serde_json::to_string_pretty(&est)? + "\n", true));
            }
            let mut csv = String::from("row,shifts,value\n");
            for (i, (s, v)) in est.shifts.iter().zip(&est.values).enumerate() {
                let s: Vec<String> = s.iter().map(usize::to_string).collect();
                csv.push_str(&format!("{i},{},{v}\n", s.join(";")));
            }
            if !est.stabilized {
                eprintln!("warning: estimates did not stabilize within tolerance {}", est.tol);
            }
            Ok((csv, true))
        }
        Command::Decompose { source, deltas, horizon } => {
            let gen = source.load()?;
            let d = decompose(&gen, deltas, *horizon, cli.tol.unwrap_or(DEFAULT_CAUCHY_TOL))?;
            if cli.json {
                return Ok((serde_json::to_string_pretty(&d)? + "\n", true));
            }
            let mut text = format!("status: {:?}\nlambda: {:?}\n", d.status, d.profile.lambda);
            if d.profile.truncated {
                text.push_str(&format!("truncated at horizon, tail mass {:e}\n", d.profile.tail_mass));
            }
            for row in &d.profile.m_delta_table {
                text.push_str(&format!(
                    "delta {:<8} count {:<3} stable {:<5} spread {:e} accepted {}\n",
                    row.delta, row.count, row.counts_stable, row.spread, row.accepted
                ));
            }
            Ok((text, true))
        }
        Command::Chain { k, p0, q0, r_step, s_frac, t_frac, smoke } => {
            let p0 = parse_rational(p0)?;
            let q0 = match q0 {
                Some(q) => parse_rational(q)?,
                None => p0.clone(),
            };
            let policy = ChainPolicy {
                r_step: parse_rational(r_step)?,
                s_frac: parse_rational(s_frac)?,
                t_frac: parse_rational(t_frac)?,
                ..ChainPolicy::default()
            };
            let d = build_chain(&ChainBase::new(p0, q0), *k as usize, &policy)?;
            d.check_inequalities()?;
            let mut descriptor = serde_json::to_value(&d)?;
            if *smoke > 0 {
                descriptor["smoke"] = chain_smoke(&d, cli.seed, *smoke, cli.tol)?;
            }
            Ok((serde_json::to_string_pretty(&descriptor)? + "\n", true))
        }
        Command::Check { suite, cases } => {
            let report = run_suite(suite, cli.seed, *cases)?;
            for c in report.cases.iter().filter(|c| !c.pass) {
                eprintln!("FAIL #{} {}: expected {} observed {}", c.index, c.check, c.expected, c.observed);
                eprintln!("  inputs: {}", c.inputs);
                if let Some(cert) = &c.certificate {
                    eprintln!("  certificate: {cert}");
                }
            }
            eprintln!(
                "{}: {} passed, {} failed, {} ms",
                report.suite, report.passed, report.failed, report.runtime_ms
            );
            let ok = report.all_passed();
            let text = if cli.json || cli.out.is_some() {
                serde_json::to_string_pretty(&report)? + "\n"
            } else {
                String::new()
            };
            Ok((text, ok))
        }
    }
}

fn chain_smoke(d: &crate::space::ChainDescriptor, seed: u64, n: usize, tol: Option<f64>) -> Result<serde_json::Value> {
    use rand::{Rng, SeedableRng};
    let ev = evaluator(&d.top()?, tol)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for _ in 0..n {
        let size = rng.gen_range(1..=6usize);
        let x = FVec::from_pairs((1..=size).map(|i| (i, rng.gen_range(-1.0..1.0))))?;
        let value = ev.norm(&x)?;
        rows.push(json!({"x": x, "value": value}));
    }
    persist(ev.cache())?;
    Ok(json!({"space": d.top()?.to_string(), "vectors": rows}))
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok((text, ok)) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &text),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return 1;
            }
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
