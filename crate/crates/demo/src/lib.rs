//! Browser demo: three small views onto the sieve, each returning JSON.
//! The plain functions are usable natively; the `js_*` wrappers are the
//! exported wasm entry points.

use num_rational::BigRational;
use psieve::cli::RunConfig;
use psieve::numerics::{parse_rational, Dyadic, Precision, RefinableReal, Round};
use psieve::oracle::{block_profile, Classifier};
use psieve::sieve::{construct, danger_cover, dyadic_decimal, level_of, RunHooks};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest `q_max` the preview accepts.
pub const PREVIEW_Q_MAX: u64 = 1 << 13;
/// Largest `x` the cover view accepts.
pub const COVER_X_MAX: u64 = 1 << 12;
pub const COUNT_NU_MAX: u32 = 16;

#[derive(Serialize)]
struct Run {
    lo: f64,
    hi: f64,
}

#[derive(Serialize)]
struct Cover {
    level: u32,
    cells: String,
    measure: f64,
    runs: Vec<Run>,
}

/// The cover `A(x)` of `{beta : ||x beta - eta|| < sigma}` by dyadic cells.
pub fn cover_json(x: u64, eta: &str, sigma: &str) -> Result<String, String> {
    if x == 0 || x > COVER_X_MAX {
        return Err(format!("x must be in [1, {COVER_X_MAX}]"));
    }
    let eta = parse_rational(eta).map_err(|e| e.to_string())?;
    let sigma = parse_rational(sigma).map_err(|e| e.to_string())?;
    if sigma <= BigRational::from_integer(0.into()) {
        return Err("sigma must be positive".into());
    }
    let s = Dyadic::from_rational(&sigma, 48, Round::Up);
    let level = level_of(x, &s).map_err(|e| e.to_string())?;
    let eta = eta.clone() - eta.floor();
    let set = danger_cover(x, &eta, &s, level);
    let w = (level as f64).exp2();
    let runs = set.runs().take(4096).map(|(a, b)| Run { lo: a as f64 / w, hi: b as f64 / w }).collect();
    let c = Cover { level, cells: set.count().to_string(), measure: set.count() as f64 / w, runs };
    Ok(serde_json::to_string(&c).expect("serializes"))
}

#[derive(Serialize)]
struct Block {
    q: u64,
    complete: bool,
    measure: f64,
}

#[derive(Serialize)]
struct Preview {
    q0: u64,
    level: u32,
    survivors: f64,
    halving_ok: bool,
    identity: bool,
    blocks: Vec<Block>,
    chain: Vec<[String; 2]>,
    beta_mid: Option<String>,
}

/// Run a small construction from a config document.
pub fn preview_json(config: &str) -> Result<String, String> {
    let mut cfg = RunConfig::parse(config).map_err(|e| e.to_string())?;
    if cfg.q_max > PREVIEW_Q_MAX {
        return Err(format!("q_max is limited to {PREVIEW_Q_MAX} here"));
    }
    if matches!(cfg.eta_x, psieve::sieve::EtaSpec::File { .. }) {
        return Err("file-backed eta_x is not available here".into());
    }
    cfg.threads = 1;
    let r = cfg.resolve().map_err(|e| e.to_string())?;
    let run = construct(&r.sieve_config(), RunHooks::default()).map_err(|e| e.to_string())?;
    let blocks = run
        .blocks
        .iter()
        .map(|b| Block { q: b.q, complete: b.complete, measure: b.measure_f64 })
        .collect();
    let chain = run
        .chain
        .iter()
        .map(|c| [dyadic_decimal(&c.lo()), dyadic_decimal(&c.hi())])
        .collect();
    let p = Preview {
        q0: run.q0,
        level: run.level,
        survivors: run.survivors_measure_f64,
        halving_ok: run.halving_ok,
        identity: run.measure_identity,
        blocks,
        chain,
        beta_mid: run.beta().map(|c| dyadic_decimal(&c.mid())),
    };
    Ok(serde_json::to_string(&p).expect("serializes"))
}

#[derive(Serialize)]
struct Counts {
    nu: u32,
    /// `(mu, count)`.
    cells: Vec<(i64, u64)>,
    zero: u64,
    undecided: u64,
}

/// Histogram of `mu = floor(log2(1/||x alpha - eta||))` over `[2^nu, 2^(nu+1))`.
pub fn counts_json(alpha: &str, eta: &str, nu: u32) -> Result<String, String> {
    if nu > COUNT_NU_MAX {
        return Err(format!("nu is limited to {COUNT_NU_MAX} here"));
    }
    let alpha = RefinableReal::parse(alpha).map_err(|e| e.to_string())?;
    let eta = RefinableReal::parse(eta).map_err(|e| e.to_string())?;
    let mut c = Classifier::new(&alpha, &eta, 1 << (nu + 1), Precision::with_cap(1024));
    let p = block_profile(&mut c, nu).map_err(|e| e.to_string())?;
    let out = Counts { nu, cells: p.exact, zero: p.zero, undecided: p.between.iter().map(|b| b.1).sum() };
    Ok(serde_json::to_string(&out).expect("serializes"))
}

#[wasm_bindgen]
pub fn js_cover(x: u32, eta: &str, sigma: &str) -> Result<String, JsValue> {
    cover_json(x as u64, eta, sigma).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn js_preview(config: &str) -> Result<String, JsValue> {
    preview_json(config).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn js_counts(alpha: &str, eta: &str, nu: u32) -> Result<String, JsValue> {
    counts_json(alpha, eta, nu).map_err(|e| JsValue::from_str(&e))
}
