//! The six built-in systems.
//!
//! Logarithms are base 2. Log-based functions are replaced below `t = 4` by
//! the chord through the origin, so they stay increasing and vanish at 0.

use super::system::{FnSpec, FunctionSystem, Mode, SystemError, SystemSpec};
use super::validate::derive_c;
use crate::numerics::{parse_rational, render_rational, Precision};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

/// Grid size for the `Omega` implication and for deriving `c`.
pub const OMEGA_GRID: u64 = 1 << 10;

const T0: &str = "4";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetId {
    Example1,
    Example2,
    Example3,
    Example4,
    Example5,
    Example6,
}

impl PresetId {
    pub const ALL: [PresetId; 6] = [
        PresetId::Example1,
        PresetId::Example2,
        PresetId::Example3,
        PresetId::Example4,
        PresetId::Example5,
        PresetId::Example6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetId::Example1 => "example1",
            PresetId::Example2 => "example2",
            PresetId::Example3 => "example3",
            PresetId::Example4 => "example4",
            PresetId::Example5 => "example5",
            PresetId::Example6 => "example6",
        }
    }

    pub fn from_name(s: &str) -> Option<PresetId> {
        PresetId::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Default parameters as `p/q` strings (without `c`).
    pub fn defaults(self) -> Vec<(&'static str, &'static str)> {
        match self {
            PresetId::Example1 | PresetId::Example3 => vec![("gamma", "3")],
            PresetId::Example2 => vec![],
            PresetId::Example4 => vec![("gamma", "3"), ("a", "1/2")],
            PresetId::Example5 => vec![("u", "1/2"), ("v", "1/2"), ("gamma", "2")],
            PresetId::Example6 => vec![("gamma", "2"), ("Delta", "8")],
        }
    }

    fn has_c(self) -> bool {
        matches!(self, PresetId::Example2 | PresetId::Example3 | PresetId::Example5 | PresetId::Example6)
    }

    pub fn ranges(self) -> &'static str {
        match self {
            PresetId::Example1 | PresetId::Example3 => "gamma > 1",
            PresetId::Example2 => "c > 0 (derived if omitted)",
            PresetId::Example4 => "gamma > 1, 0 <= a < 1",
            PresetId::Example5 => "u, v > 0, u + v = 1, gamma > 1, c > 0 (derived if omitted)",
            PresetId::Example6 => "gamma > 1, Delta > 1, c > 0 (derived if omitted)",
        }
    }

    pub fn notes(self) -> &'static str {
        match self {
            PresetId::Example1 => "||x beta - eta_x|| >= eps / (x log^2 x) for x >= X0; needs eps <= 2^-14",
            PresetId::Example2 => "omega(t) = t log t; ||x beta - eta_x|| >= eps / (x log^2 x)",
            PresetId::Example3 => "omega1(t) = t log^2 t, omega2(t) = gamma t",
            PresetId::Example4 => "psi1(t) = t log(1/t)^a; needs eps <= 1/(2^20 (1-a))",
            PresetId::Example5 => "max mode; ||x beta - eta_x|| >= eps/(x log x)^u or ||x alpha - eta|| >= eps/(x log x)^v",
            PresetId::Example6 => "max mode; ||x alpha - eta|| >= eps/(Delta x) or ||x beta - eta_x|| >= eps/(log x)^(3/2)",
        }
    }
}

/// Frozen `c` exponents (`c = 2^k`) for the default parameters, produced by
/// [`derive_c`] on the `2^10` grid.
const FROZEN_C: [(PresetId, i64); 4] =
    [(PresetId::Example2, FROZEN_C2), (PresetId::Example3, FROZEN_C3), (PresetId::Example5, FROZEN_C5), (PresetId::Example6, FROZEN_C6)];
const FROZEN_C2: i64 = 2;
const FROZEN_C3: i64 = 2;
const FROZEN_C5: i64 = 2;
const FROZEN_C6: i64 = 2;

fn p(m: &BTreeMap<String, BigRational>, k: &str) -> BigRational {
    m[k].clone()
}

fn check(cond: bool, msg: &str) -> Result<(), SystemError> {
    if cond {
        Ok(())
    } else {
        Err(SystemError::ParamRange(msg.into()))
    }
}

fn spec_for(id: PresetId, params: &BTreeMap<String, String>) -> SystemSpec {
    let lin = |e: &str| FnSpec::new(e).linear_below(T0);
    let ident = || FnSpec::new("t").inv("t");
    let gamma_t = || FnSpec::new("gamma*t").inv("t/gamma");
    let (mode, omega1, omega2, big_omega, phi, phi1, phi2, psi1) = match id {
        PresetId::Example1 => (
            Mode::Product,
            gamma_t(),
            Some(gamma_t()),
            "sqrt(gamma*z/y)",
            Some(lin("t*log2(t)^2")),
            None,
            None,
            ident(),
        ),
        PresetId::Example2 => (
            Mode::Product,
            lin("t*log2(t)"),
            Some(lin("t*log2(t)")),
            "c*sqrt(z*log2(max(z,2))/y)",
            Some(lin("t*log2(t)^2")),
            None,
            None,
            ident(),
        ),
        PresetId::Example3 => (
            Mode::Product,
            lin("t*log2(t)^2"),
            Some(gamma_t()),
            "c*sqrt(z/y)*log2(max(z,2))",
            Some(lin("t*log2(t)^2")),
            None,
            None,
            ident(),
        ),
        PresetId::Example4 => (
            Mode::Product,
            gamma_t(),
            Some(gamma_t()),
            "sqrt(gamma*z/y)",
            Some(lin("t*log2(t)^(2-a)")),
            None,
            None,
            FnSpec::new("t*log2(1/t)^a").domain_max("1/2"),
        ),
        PresetId::Example5 => (
            Mode::Max,
            lin("gamma*t^(1/u)/log2(t)^u"),
            None,
            "c*(z/(y^u*log2(max(z,2))^(u^2)))^(1/(1+u))",
            None,
            Some(lin("(t*log2(t))^u")),
            Some(lin("(t*log2(t))^v")),
            ident(),
        ),
        PresetId::Example6 => (
            Mode::Max,
            lin("gamma*t*log2(t)"),
            None,
            "c*sqrt(z*log2(max(z,2))/y)",
            None,
            Some(FnSpec::new("Delta*t").inv("t/Delta")),
            Some(lin("log2(t)^(3/2)")),
            ident(),
        ),
    };
    SystemSpec {
        name: id.name().into(),
        mode,
        params: params.clone(),
        omega1,
        omega2,
        big_omega: big_omega.into(),
        phi,
        phi1,
        phi2,
        psi1,
        psi2: ident(),
    }
}

/// Build a preset from user parameters (missing ones take defaults). A
/// missing `c` is taken from the frozen table at default parameters and
/// derived on the grid otherwise.
pub fn preset_from_name(name: &str, user: &BTreeMap<String, String>) -> Result<FunctionSystem, SystemError> {
    let id = PresetId::from_name(name).ok_or_else(|| SystemError::Missing(format!("unknown preset {name:?}")))?;
    make_preset_with(id, user)
}

/// A preset at its default parameters.
pub fn make_preset(id: PresetId) -> FunctionSystem {
    make_preset_with(id, &BTreeMap::new()).expect("default presets are valid")
}

pub fn make_preset_with(id: PresetId, user: &BTreeMap<String, String>) -> Result<FunctionSystem, SystemError> {
    let mut params: BTreeMap<String, String> =
        id.defaults().into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    let mut at_defaults = true;
    for (k, v) in user {
        if k != "c" && !params.contains_key(k) {
            return Err(SystemError::ParamRange(format!("{name}: unknown parameter {k:?}", name = id.name())));
        }
        if k != "c" && parse_rational(&params[k])? != parse_rational(v)? {
            at_defaults = false;
        }
        params.insert(k.clone(), v.clone());
    }
    let mut exact = BTreeMap::new();
    for (k, v) in &params {
        exact.insert(k.clone(), parse_rational(v)?);
    }
    let one = BigRational::one();
    let zero = BigRational::zero();
    if exact.contains_key("gamma") {
        check(p(&exact, "gamma") > one, "gamma > 1")?;
    }
    if id == PresetId::Example4 {
        let a = p(&exact, "a");
        check(a >= zero && a < one, "0 <= a < 1")?;
    }
    if id == PresetId::Example5 {
        let (u, v) = (p(&exact, "u"), p(&exact, "v"));
        check(u > zero && v > zero, "u, v > 0")?;
        check(&u + &v == one, "u + v = 1")?;
    }
    if id == PresetId::Example6 {
        check(p(&exact, "Delta") > one, "Delta > 1")?;
    }
    if let Some(c) = exact.get("c") {
        check(c > &zero, "c > 0")?;
    }
    if id.has_c() && !params.contains_key("c") {
        let k = match FROZEN_C.iter().find(|(q, _)| *q == id) {
            Some((_, k)) if at_defaults => *k,
            _ => derive_c_exponent(id, &params)?,
        };
        params.insert("c".into(), render_rational(&pow2_rational(k)));
    }
    FunctionSystem::from_spec(&spec_for(id, &params))
}

fn pow2_rational(k: i64) -> BigRational {
    let two = BigRational::from_integer(2.into());
    if k >= 0 {
        num_traits::pow(two, k as usize)
    } else {
        num_traits::pow(two, (-k) as usize).recip()
    }
}

/// Exponent `k` of `c = 2^k` derived on the grid.
pub fn derive_c_exponent(id: PresetId, params: &BTreeMap<String, String>) -> Result<i64, SystemError> {
    let mut p1 = params.clone();
    p1.insert("c".into(), "1".into());
    let sys = FunctionSystem::from_spec(&spec_for(id, &p1))?;
    Ok(derive_c(&sys, OMEGA_GRID, Precision::default())?)
}

#[derive(Clone, Debug, Serialize)]
pub struct PresetInfo {
    pub name: &'static str,
    pub mode: Mode,
    pub ranges: &'static str,
    pub defaults: BTreeMap<String, String>,
    pub notes: &'static str,
}

pub fn list_presets() -> Vec<PresetInfo> {
    PresetId::ALL
        .into_iter()
        .map(|id| PresetInfo {
            name: id.name(),
            mode: if matches!(id, PresetId::Example5 | PresetId::Example6) { Mode::Max } else { Mode::Product },
            ranges: id.ranges(),
            defaults: id.defaults().into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
            notes: id.notes(),
        })
        .collect()
}
