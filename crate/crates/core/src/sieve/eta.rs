//! The shift sequence `eta_x` applied to `x beta`.
//!
//! Values are reduced modulo 1. The seeded kind draws `v = next_u64()` from
//! a ChaCha8 stream positioned at word `2(x - 1)` and returns `v / 2^64`,
//! so `eta_x` depends only on `(seed, x)` and never on the order of queries.

use crate::numerics::{parse_rational, render_rational, NumericsError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Configuration form of an `eta_x` provider.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EtaSpec {
    Zero,
    Constant { value: String },
    /// `eta_x = values[(x - 1) mod len]`.
    Periodic { values: Vec<String> },
    SeededPseudorandom { seed: u64 },
    /// One rational per line for `x = 1, 2, ...`; `#` starts a comment.
    File { path: String },
}

/// An `eta_x` value in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EtaValue {
    /// `n / 2^64`.
    Dyadic64(u64),
    Rational(BigRational),
}

impl EtaValue {
    pub fn to_rational(&self) -> BigRational {
        match self {
            EtaValue::Dyadic64(n) => BigRational::new(BigInt::from(*n), BigInt::one() << 64usize),
            EtaValue::Rational(q) => q.clone(),
        }
    }

    fn from_rational(q: &BigRational) -> EtaValue {
        let r = q - q.floor();
        let sh = BigInt::one() << 64usize;
        let scaled = &r * BigRational::from_integer(sh);
        if scaled.is_integer() {
            EtaValue::Dyadic64(scaled.to_integer().to_u64().expect("fraction below 1"))
        } else {
            EtaValue::Rational(r)
        }
    }
}

#[derive(Clone, Debug)]
enum Source {
    Table(Vec<EtaValue>),
    Seeded(u64),
}

#[derive(Clone, Debug)]
pub struct EtaProvider {
    spec: EtaSpec,
    src: Source,
}

impl EtaProvider {
    pub fn new(spec: &EtaSpec) -> Result<EtaProvider, NumericsError> {
        let table = |vals: &[String]| -> Result<Vec<EtaValue>, NumericsError> {
            vals.iter().map(|s| parse_rational(s).map(|q| EtaValue::from_rational(&q))).collect()
        };
        let src = match spec {
            EtaSpec::Zero => Source::Table(vec![EtaValue::Dyadic64(0)]),
            EtaSpec::Constant { value } => Source::Table(table(std::slice::from_ref(value))?),
            EtaSpec::Periodic { values } => {
                if values.is_empty() {
                    return Err(NumericsError::Parse("periodic eta needs at least one value".into()));
                }
                Source::Table(table(values)?)
            }
            EtaSpec::SeededPseudorandom { seed } => Source::Seeded(*seed),
            EtaSpec::File { path } => Source::Table(read_file(Path::new(path))?),
        };
        Ok(EtaProvider { spec: spec.clone(), src })
    }

    pub fn spec(&self) -> &EtaSpec {
        &self.spec
    }

    /// `eta_x` for `x >= 1`.
    pub fn get(&self, x: u64) -> EtaValue {
        assert!(x >= 1, "eta_x is indexed from 1");
        match &self.src {
            Source::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_word_pos(2 * (x as u128 - 1));
                EtaValue::Dyadic64(rng.next_u64())
            }
            Source::Table(t) if matches!(self.spec, EtaSpec::File { .. }) => match t.get(x as usize - 1) {
                Some(v) => v.clone(),
                None => panic!("eta file has {} values, x = {x} requested", t.len()),
            },
            Source::Table(t) => t[((x - 1) % t.len() as u64) as usize].clone(),
        }
    }

    /// Largest `x` this provider can answer for.
    pub fn limit(&self) -> u64 {
        match (&self.spec, &self.src) {
            (EtaSpec::File { .. }, Source::Table(t)) => t.len() as u64,
            _ => u64::MAX,
        }
    }
}

fn read_file(p: &Path) -> Result<Vec<EtaValue>, NumericsError> {
    let text = std::fs::read_to_string(p).map_err(|e| NumericsError::Parse(format!("{}: {e}", p.display())))?;
    let mut out = vec![];
    for line in text.lines() {
        let l = line.split('#').next().unwrap_or("").trim();
        if !l.is_empty() {
            out.push(EtaValue::from_rational(&parse_rational(l)?));
        }
    }
    Ok(out)
}

/// Exact `p/q` rendering.
pub fn render_eta(v: &EtaValue) -> String {
    render_rational(&v.to_rational())
}

impl Default for EtaSpec {
    fn default() -> Self {
        EtaSpec::Zero
    }
}

impl EtaValue {
    pub fn is_zero(&self) -> bool {
        match self {
            EtaValue::Dyadic64(n) => *n == 0,
            EtaValue::Rational(q) => q.is_zero(),
        }
    }
}
