//! Run configuration: a TOML document with exact rationals as `"p/q"`
//! strings, validated into the objects the library works with.

use crate::funcsys::{preset_from_name, FunctionSystem, Mode, SystemSpec};
use crate::numerics::{parse_rational, Precision, RefinableReal};
use crate::sieve::{Engine, EtaProvider, EtaSpec, SieveConfig};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(String, String),
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> ConfigError + '_ {
    move |e| ConfigError::Invalid(format!("{what}: {e}"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    /// Scan range of the sum condition.
    #[serde(default = "CheckSection::default_from")]
    pub scan_from: u64,
    #[serde(default = "CheckSection::default_to")]
    pub scan_to: u64,
    /// The growth condition is checked on `X0 2^k <= 2^growth_cap_log2`.
    #[serde(default = "CheckSection::default_cap")]
    pub growth_cap_log2: u64,
}

impl CheckSection {
    fn default_from() -> u64 {
        1 << 16
    }
    fn default_to() -> u64 {
        1 << 20
    }
    fn default_cap() -> u64 {
        64
    }
}

impl Default for CheckSection {
    fn default() -> Self {
        CheckSection { scan_from: Self::default_from(), scan_to: Self::default_to(), growth_cap_log2: Self::default_cap() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "OracleSection::default_nu")]
    pub nu_max: u32,
    /// Range of the finite badness scans.
    #[serde(default = "OracleSection::default_from")]
    pub badness_from: u64,
    #[serde(default = "OracleSection::default_to")]
    pub badness_to: u64,
}

impl OracleSection {
    fn default_nu() -> u32 {
        14
    }
    fn default_from() -> u64 {
        1
    }
    fn default_to() -> u64 {
        1 << 16
    }
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection { nu_max: Self::default_nu(), badness_from: Self::default_from(), badness_to: Self::default_to() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

fn default_eta() -> String {
    "0".into()
}
fn default_cap() -> u32 {
    4096
}
fn default_threads() -> usize {
    1
}

/// The configuration as written, with defaults filled in on load. Reports
/// embed this form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must agree with the system's mode when given.
    #[serde(default)]
    pub mode: Option<Mode>,
    /// A preset name; exclusive with `system`.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    /// A custom system.
    #[serde(default)]
    pub system: Option<SystemSpec>,
    pub alpha: String,
    #[serde(default = "default_eta")]
    pub eta: String,
    #[serde(default)]
    pub eta_x: EtaSpec,
    pub epsilon: String,
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "X0")]
    pub x0: String,
    /// Omitted: the smallest admissible power of two.
    #[serde(default)]
    pub q0: Option<u64>,
    pub q_max: u64,
    /// Omitted: `q_max`.
    #[serde(default)]
    pub x_max_verify: Option<u64>,
    #[serde(default = "default_cap")]
    pub precision_cap: u32,
    #[serde(default)]
    pub filter_homogeneous: bool,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub raw: RunConfig,
    pub sys: FunctionSystem,
    pub eps: BigRational,
    pub a: BigRational,
    pub x0: BigInt,
    pub alpha: RefinableReal,
    pub eta: RefinableReal,
    pub eta_x: EtaProvider,
    pub prec: Precision,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
    }

    /// Load a file; a relative `eta_x` file path is taken relative to it.
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.display().to_string(), e.to_string()))?;
        let mut cfg = RunConfig::parse(&text)?;
        if let EtaSpec::File { path: p } = &mut cfg.eta_x {
            let q = Path::new(p.as_str());
            if q.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(q).display().to_string();
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn x_max_verify(&self) -> u64 {
        self.x_max_verify.unwrap_or(self.q_max)
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let sys = match (&self.preset, &self.system) {
            (Some(name), None) => preset_from_name(name, &self.params).map_err(invalid("preset"))?,
            (None, Some(spec)) => {
                if !self.params.is_empty() {
                    return Err(ConfigError::Invalid("params belong inside [system] for a custom system".into()));
                }
                FunctionSystem::from_spec(spec).map_err(invalid("system"))?
            }
            _ => return Err(ConfigError::Invalid("give exactly one of preset and [system]".into())),
        };
        if let Some(m) = self.mode {
            if m != sys.mode {
                return Err(ConfigError::Invalid(format!("mode {m:?} does not match the system's mode {:?}", sys.mode)));
            }
        }
        let eps = parse_rational(&self.epsilon).map_err(invalid("epsilon"))?;
        if !eps.is_positive() {
            return Err(ConfigError::Invalid("epsilon must be positive".into()));
        }
        let a = parse_rational(&self.a).map_err(invalid("A"))?;
        if a <= BigRational::one() {
            return Err(ConfigError::Invalid("A must exceed 1".into()));
        }
        let x0: BigInt = self.x0.trim().parse().map_err(invalid("X0"))?;
        if x0 < BigInt::one() {
            return Err(ConfigError::Invalid("X0 must be at least 1".into()));
        }
        if let Some(q0) = self.q0 {
            if q0 < 4 {
                return Err(ConfigError::Invalid("q0 must be at least 4".into()));
            }
        }
        if self.q_max < 1 {
            return Err(ConfigError::Invalid("q_max must be at least 1".into()));
        }
        if self.precision_cap < 64 {
            return Err(ConfigError::Invalid("precision_cap must be at least 64 bits".into()));
        }
        if self.threads == 0 {
            return Err(ConfigError::Invalid("threads must be at least 1".into()));
        }
        if self.check.scan_from < 1 || self.check.scan_to < self.check.scan_from {
            return Err(ConfigError::Invalid("check.scan_from must be in [1, scan_to]".into()));
        }
        if self.oracle.nu_max < 1 || self.oracle.nu_max > 30 {
            return Err(ConfigError::Invalid("oracle.nu_max must be in [1, 30]".into()));
        }
        if self.oracle.badness_from < 1 || self.oracle.badness_to < self.oracle.badness_from {
            return Err(ConfigError::Invalid("oracle.badness_from must be in [1, badness_to]".into()));
        }
        let alpha = RefinableReal::parse(&self.alpha).map_err(invalid("alpha"))?;
        let eta = RefinableReal::parse(&self.eta).map_err(invalid("eta"))?;
        let eta_x = EtaProvider::new(&self.eta_x).map_err(invalid("eta_x"))?;
        if self.q_max.max(self.x_max_verify()) > eta_x.limit() {
            return Err(ConfigError::Invalid(format!("eta_x file has only {} values", eta_x.limit())));
        }
        Ok(Resolved {
            raw: self.clone(),
            sys,
            eps,
            a,
            x0,
            alpha,
            eta,
            eta_x,
            prec: Precision::with_cap(self.precision_cap),
        })
    }
}

impl Resolved {
    pub fn sieve_config(&self) -> SieveConfig {
        SieveConfig {
            sys: self.sys.clone(),
            eps: self.eps.clone(),
            a: self.a.clone(),
            alpha: self.alpha.clone(),
            eta: self.eta.clone(),
            eta_x: self.eta_x.clone(),
            q0: self.raw.q0,
            q_max: self.raw.q_max,
            filter_homogeneous: self.raw.filter_homogeneous,
            prec: self.prec,
            threads: self.raw.threads,
            engine: self.raw.engine,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
preset = "example1"
alpha = "golden"
epsilon = "1/16384"
A = "4"
X0 = "16777216"
q_max = 1024
"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.eta, "0");
        assert_eq!(c.eta_x, EtaSpec::Zero);
        assert_eq!(c.x_max_verify(), 1024);
        assert_eq!(c.check.scan_to, 1 << 20);
        let r = c.resolve().unwrap();
        assert_eq!(r.sys.mode, Mode::Product);
        // the written form round-trips
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn validation_rejects_bad_values() {
        for (from, to) in [("A = \"4\"", "A = \"1\""), ("epsilon = \"1/16384\"", "epsilon = \"0\""), ("q_max = 1024", "q_max = 1024\nq0 = 2")] {
            let c = RunConfig::parse(&BASE.replace(from, to)).unwrap();
            assert!(matches!(c.resolve(), Err(ConfigError::Invalid(_))), "{to}");
        }
        assert!(matches!(RunConfig::parse("alpha = 3"), Err(ConfigError::Syntax(_))));
        let c = RunConfig::parse(&format!("{BASE}\nmode = \"max\"")).unwrap();
        assert!(c.resolve().is_err());
    }

    #[test]
    fn eta_x_table() {
        let c = RunConfig::parse(&format!("{BASE}\n[eta_x]\nkind = \"seeded-pseudorandom\"\nseed = 7\n")).unwrap();
        assert_eq!(c.eta_x, EtaSpec::SeededPseudorandom { seed: 7 });
    }
}
