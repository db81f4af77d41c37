//! The five subcommands as library calls. Each returns the exit status and
//! writes its documents into the output directory.

use super::config::{ConfigError, Resolved, RunConfig};
use super::report::*;
use super::ExitStatus;
use crate::admissibility::{check_admissibility, AdmissibilityReport};
use crate::funcsys::{list_presets, make_preset, PresetId, SystemError};
use crate::numerics::{render_rational, NumericsError, RefinableReal};
use crate::oracle::{check_badness, check_counting, verify_witness, BadnessReport, CountingReport, VerifyInput, VerifyReport};
use crate::sieve::{construct as run_sieve, dyadic_decimal, RunHooks, SieveError, SieveRun, SweepProgress};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub out_dir: Option<PathBuf>,
    pub force: bool,
    pub best_effort: bool,
    pub filter_homogeneous: bool,
    pub precision_cap: Option<u32>,
    pub threads: Option<usize>,
    /// Overrides `oracle.nu_max`.
    pub nu_max: Option<u32>,
}

#[derive(Debug)]
pub struct Outcome {
    pub status: ExitStatus,
    pub files: Vec<PathBuf>,
    /// Human-readable summary lines.
    pub lines: Vec<String>,
}

impl Outcome {
    fn new() -> Outcome {
        Outcome { status: ExitStatus::Success, files: vec![], lines: vec![] }
    }

    fn fail(status: ExitStatus, msg: String) -> Outcome {
        Outcome { status, files: vec![], lines: vec![msg] }
    }

    fn say(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }
}

fn apply(cfg: &RunConfig, opts: &Options) -> RunConfig {
    let mut c = cfg.clone();
    c.filter_homogeneous |= opts.filter_homogeneous;
    if let Some(p) = opts.precision_cap {
        c.precision_cap = p;
    }
    if let Some(t) = opts.threads {
        c.threads = t;
    }
    if let Some(n) = opts.nu_max {
        c.oracle.nu_max = n;
    }
    c
}

fn out_dir(cfg: &RunConfig, opts: &Options) -> PathBuf {
    opts.out_dir
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("psieve-out"))
}

fn resolve(cfg: &RunConfig, opts: &Options) -> Result<Resolved, Outcome> {
    apply(cfg, opts).resolve().map_err(|e: ConfigError| Outcome::fail(ExitStatus::InputError, e.to_string()))
}

fn status_of_system(e: &SystemError) -> ExitStatus {
    match e {
        SystemError::Numerics(NumericsError::PrecisionCap(_)) => ExitStatus::PrecisionCap,
        _ => ExitStatus::InputError,
    }
}

fn status_of_sieve(e: &SieveError) -> ExitStatus {
    match e {
        SieveError::System(s) => status_of_system(s),
        SieveError::Level(_) | SieveError::NoBase(_) => ExitStatus::ConstructionFailed,
        _ => ExitStatus::InputError,
    }
}

fn write<T: Serialize>(out: &mut Outcome, path: PathBuf, env: &Envelope<T>) -> Result<(), Outcome> {
    env.write(&path).map_err(|e| Outcome::fail(ExitStatus::InputError, e.to_string()))?;
    out.files.push(path);
    Ok(())
}

/// `presets`: the listing, or one preset's full system when `show` is set.
pub fn presets(show: Option<&str>) -> Outcome {
    let mut out = Outcome::new();
    match show {
        None => {
            for p in list_presets() {
                let defaults: Vec<String> = p.defaults.iter().map(|(k, v)| format!("{k}={v}")).collect();
                out.say(format!("{:<10} {:<8} {}  [{}]", p.name, format!("{:?}", p.mode).to_lowercase(), p.notes, defaults.join(", ")));
            }
        }
        Some(name) => {
            let Some(id) = PresetId::from_name(name) else {
                return Outcome::fail(ExitStatus::InputError, format!("unknown preset {name:?}"));
            };
            let sys = make_preset(id);
            out.say(toml::to_string(&sys.spec).expect("spec serializes"));
            out.say(format!("parameter ranges: {}", id.ranges()));
            out.say(format!("notes: {}", id.notes()));
        }
    }
    out
}

fn admissibility(r: &Resolved) -> Result<AdmissibilityReport, SystemError> {
    let c = &r.raw.check;
    check_admissibility(&r.sys, &r.eps, &r.a, &r.x0, c.growth_cap_log2, c.scan_from, c.scan_to, r.prec)
}

/// `check`: growth and sum conditions. Exit 0 iff both pass.
pub fn check(cfg: &RunConfig, opts: &Options) -> Outcome {
    let r = match resolve(cfg, opts) {
        Ok(r) => r,
        Err(o) => return o,
    };
    let mut out = Outcome::new();
    let rep = match admissibility(&r) {
        Ok(v) => v,
        Err(e) => return Outcome::fail(status_of_system(&e), e.to_string()),
    };
    out.say(format!("growth condition: {}", if rep.cond_growth_ok { "pass" } else { "FAIL" }));
    out.say(format!(
        "sum condition: {} (sup {:.6e} at X = {})",
        if rep.cond_sum_ok { "pass" } else { "FAIL" },
        rep.sum.sup.hi_f64,
        rep.sum.sup.x
    ));
    if !rep.ok() {
        out.status = ExitStatus::AdmissibilityFailed;
    }
    let dir = out_dir(&r.raw, opts);
    if let Err(o) = write(&mut out, dir.join("check-report.json"), &Envelope::new(KIND_CHECK, &r.raw, rep)) {
        return o;
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructBody {
    pub run: SieveRun,
    pub verification: Option<VerifyReport>,
}

/// Settings that do not change results are ignored when matching a
/// checkpoint to a run.
fn result_key(c: &RunConfig) -> RunConfig {
    let mut k = c.clone();
    k.threads = 1;
    k.output = Default::default();
    k
}

fn verify_range(r: &Resolved, q0: u64) -> (u64, u64) {
    let x0 = r.x0.to_u64().unwrap_or(u64::MAX);
    (x0.min(q0), r.raw.x_max_verify())
}

fn witness_of(run: &SieveRun) -> Option<Witness> {
    let cell = run.beta()?;
    Some(Witness {
        q0: run.q0,
        q_max: run.q_max,
        beta_interval: run.chain.clone(),
        beta_lo: render_rational(&cell.lo()),
        beta_hi: render_rational(&cell.hi()),
        beta_mid: dyadic_decimal(&cell.mid()),
        verified_range: None,
        inf_value: None,
        verified: None,
    })
}

fn verify_input<'a>(r: &'a Resolved, w: &Witness, from: u64, to: u64) -> VerifyInput<'a> {
    VerifyInput {
        sys: &r.sys,
        eps: r.eps.clone(),
        alpha: r.alpha.clone(),
        eta: r.eta.clone(),
        eta_x: &r.eta_x,
        cell: w.cell().expect("witness has a cell").clone(),
        from,
        to,
        prec: r.prec,
    }
}

/// `construct`: run the sieve to `q_max`, write the witness, the report and
/// (for the sweep engine) the checkpoint. A matching checkpoint in the
/// output directory is resumed.
pub fn construct(cfg: &RunConfig, opts: &Options) -> Outcome {
    let r = match resolve(cfg, opts) {
        Ok(r) => r,
        Err(o) => return o,
    };
    let mut out = Outcome::new();
    if !opts.force {
        match admissibility(&r) {
            Ok(rep) if rep.ok() => {}
            Ok(_) => {
                return Outcome::fail(ExitStatus::AdmissibilityFailed, "admissibility check failed; use --force to run anyway".into())
            }
            Err(e) => return Outcome::fail(status_of_system(&e), e.to_string()),
        }
    }
    let dir = out_dir(&r.raw, opts);
    let cp_path = dir.join("checkpoint.json");
    let key = result_key(&r.raw);
    let resume = match Envelope::<Checkpoint>::read(&cp_path, KIND_CHECKPOINT) {
        Ok(env) if result_key(&env.config) == key => Some(env.body.progress),
        _ => None,
    };
    if let Some(w) = resume.as_ref().map(|p| p.next_window) {
        out.say(format!("resuming from checkpoint at window {w}"));
    }
    let raw = r.raw.clone();
    let mut cp_err = None;
    let mut save = |p: &SweepProgress| -> Result<(), SieveError> {
        let env = Envelope::new(KIND_CHECKPOINT, &raw, Checkpoint { progress: p.clone() });
        env.write(&cp_path).map_err(|e| {
            cp_err = Some(e.to_string());
            SieveError::Checkpoint(e.to_string())
        })
    };
    let hooks = RunHooks { resume, checkpoint: Some(&mut save) };
    let run = match run_sieve(&r.sieve_config(), hooks) {
        Ok(v) => v,
        Err(e) => return Outcome::fail(status_of_sieve(&e), e.to_string()),
    };
    if cp_path.exists() {
        out.files.push(cp_path.clone());
    }
    out.say(format!(
        "sieve: q0 = {}, {} x processed, level {}, survivors {}",
        run.q0, run.processed, run.level, run.survivors_measure_f64
    ));
    out.say(format!("halving at block boundaries: {}", if run.halving_ok { "ok" } else { "VIOLATED" }));
    out.say(format!(
        "packing checks: {} x, {} violations",
        run.pp.checked,
        run.pp.violations16.len() + run.pp.violations32.len()
    ));

    let mut verification = None;
    match witness_of(&run) {
        None => {
            out.say("survivors are empty");
            out.status = ExitStatus::ConstructionFailed;
        }
        Some(mut w) => {
            let (from, to) = verify_range(&r, run.q0);
            let v = match verify_witness(&verify_input(&r, &w, from, to)) {
                Ok(v) => v,
                Err(e) => return Outcome::fail(status_of_system(&e), e.to_string()),
            };
            w.attach(&v);
            out.say(format!("beta in [{}, {}], midpoint {}", w.beta_lo, w.beta_hi, w.beta_mid));
            out.say(format!("self-verification on [{from}, {to}]: {}", if v.pass { "pass" } else { "FAIL" }));
            verification = Some(v);
            if let Err(o) = write(&mut out, dir.join("witness.json"), &Envelope::new(KIND_WITNESS, &r.raw, w)) {
                return o;
            }
            if !run.halving_ok && !opts.best_effort {
                out.status = ExitStatus::ConstructionFailed;
            }
        }
    }
    let body = ConstructBody { run, verification };
    if let Err(o) = write(&mut out, dir.join("construct-report.json"), &Envelope::new(KIND_CONSTRUCT, &r.raw, body)) {
        return o;
    }
    out
}

/// `verify`: check the witness at every `x` of the range by worst-point
/// evaluation. Exit 0 on pass, 3 on a failure, 5 if only undecided points
/// remain.
pub fn verify(cfg: &RunConfig, witness: &Path, opts: &Options) -> Outcome {
    let r = match resolve(cfg, opts) {
        Ok(r) => r,
        Err(o) => return o,
    };
    let env = match Envelope::<Witness>::read(witness, KIND_WITNESS) {
        Ok(e) => e,
        Err(e) => return Outcome::fail(ExitStatus::InputError, e.to_string()),
    };
    let w = env.body;
    if w.cell().is_none() {
        return Outcome::fail(ExitStatus::InputError, "witness has an empty chain".into());
    }
    let mut out = Outcome::new();
    let (from, to) = verify_range(&r, w.q0);
    let v = match verify_witness(&verify_input(&r, &w, from, to)) {
        Ok(v) => v,
        Err(e) => return Outcome::fail(status_of_system(&e), e.to_string()),
    };
    if v.vacuous {
        out.say(format!("warning: empty range [{from}, {to}], nothing to verify"));
    }
    out.say(format!(
        "verify on [{from}, {to}]: {} ({} checked, {} failures, {} undecided{})",
        if v.pass { "pass" } else { "FAIL" },
        v.checked,
        v.failure_count,
        v.undecided_count,
        v.margin.map_or(String::new(), |m| format!(", margin {m:.4}"))
    ));
    out.status = if v.failure_count > 0 {
        ExitStatus::VerificationFailed
    } else if v.undecided_count > 0 {
        ExitStatus::PrecisionCap
    } else {
        ExitStatus::Success
    };
    let dir = out_dir(&r.raw, opts);
    if let Err(o) = write(&mut out, dir.join("verify-report.json"), &Envelope::new(KIND_VERIFY, &r.raw, v)) {
        return o;
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OracleRange {
    pub nu_max: u32,
    pub badness: [u64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleBody {
    pub range: OracleRange,
    pub counting: CountingReport,
    /// `omega1(x) ||x alpha|| >= 1`.
    pub bad: BadnessReport,
    /// `omega2(x) ||x alpha - eta|| >= 1`, when the system has `omega2`.
    pub bad1: Option<BadnessReport>,
}

/// `oracle`: the counting bounds for `nu <= nu_max` plus finite badness
/// scans. Exit 0 iff every counting bound holds.
pub fn oracle(cfg: &RunConfig, opts: &Options) -> Outcome {
    let r = match resolve(cfg, opts) {
        Ok(r) => r,
        Err(o) => return o,
    };
    let o = &r.raw.oracle;
    let mut out = Outcome::new();
    let zero = RefinableReal::rational(BigRational::zero());
    let run = || -> Result<OracleBody, SystemError> {
        let counting = check_counting(&r.sys, &r.alpha, &r.eta, o.nu_max, r.prec)?;
        let bad = check_badness(&r.alpha, &zero, &r.sys.omega1, o.badness_from, o.badness_to, r.prec)?;
        let bad1 = match &r.sys.omega2 {
            Some(w) => Some(check_badness(&r.alpha, &r.eta, w, o.badness_from, o.badness_to, r.prec)?),
            None => None,
        };
        Ok(OracleBody { range: OracleRange { nu_max: o.nu_max, badness: [o.badness_from, o.badness_to] }, counting, bad, bad1 })
    };
    let body = match run() {
        Ok(b) => b,
        Err(e) => return Outcome::fail(status_of_system(&e), e.to_string()),
    };
    out.say(format!(
        "counting bounds: {} checked, {} violations, partition {}",
        body.counting.checked,
        body.counting.violations.len(),
        if body.counting.partition_ok { "ok" } else { "BROKEN" }
    ));
    out.say(format!("badness of alpha on [{}, {}]: {} (finite range)", o.badness_from, o.badness_to, if body.bad.pass { "holds" } else { "fails" }));
    if let Some(b) = &body.bad1 {
        out.say(format!("inhomogeneous badness on [{}, {}]: {} (finite range)", o.badness_from, o.badness_to, if b.pass { "holds" } else { "fails" }));
    }
    if !body.counting.ok() {
        out.status = ExitStatus::VerificationFailed;
    }
    let dir = out_dir(&r.raw, opts);
    if let Err(o) = write(&mut out, dir.join("oracle-report.json"), &Envelope::new(KIND_ORACLE, &r.raw, body)) {
        return o;
    }
    out
}
