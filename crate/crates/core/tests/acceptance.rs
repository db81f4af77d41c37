//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Runs the full-size configurations, so it takes several minutes.

use num_bigint::BigInt;
use num_rational::BigRational;
use psieve::admissibility::{check_admissibility, sum_t, TSumInput};
use psieve::cli::report::{Envelope, Witness, KIND_WITNESS};
use psieve::cli::{self, ExitStatus, Options, RunConfig};
use psieve::funcsys::{make_preset, PresetId};
use psieve::numerics::{Precision, RefinableReal};
use psieve::oracle::check_counting;
use psieve::sieve::SieveRun;
use serde_json::Value;
use std::path::Path;
use std::time::Instant;

const EXAMPLE1: &str = include_str!("../../../configs/example1.toml");
const EXAMPLE6: &str = include_str!("../../../configs/example6.toml");

struct Tally {
    failed: Vec<String>,
}

impl Tally {
    fn line(&mut self, id: &str, pass: bool, what: &str, t: Instant) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {id}: {what} ({:.1}s)", t.elapsed().as_secs_f64());
        if !pass {
            self.failed.push(id.into());
        }
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn edit(base: &str, from: &str, to: &str) -> RunConfig {
    assert!(base.contains(from), "{from}");
    RunConfig::parse(&base.replacen(from, to, 1)).unwrap()
}

fn opts(dir: &Path) -> Options {
    Options { out_dir: Some(dir.to_path_buf()), ..Default::default() }
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn sieve_run(dir: &Path) -> SieveRun {
    serde_json::from_value(read_json(&dir.join("construct-report.json"))["body"]["run"].clone()).unwrap()
}

fn same_files(a: &Path, b: &Path) -> bool {
    ["witness.json", "construct-report.json", "checkpoint.json"]
        .iter()
        .all(|f| std::fs::read(a.join(f)).ok() == std::fs::read(b.join(f)).ok())
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let mut tally = Tally { failed: vec![] };
    let prec = Precision::default();
    let ex1 = make_preset(PresetId::Example1);
    let eps = q(1, 16384);
    let a = q(4, 1);

    // 1
    let t = Instant::now();
    let rep = check_admissibility(&ex1, &eps, &a, &(BigInt::from(1) << 16), 64, 1 << 16, 1 << 20, prec).unwrap();
    let s = &rep.sum;
    tally.line(
        "1",
        s.ok && s.within_advisory == Some(true),
        &format!(
            "S(X) <= 2^-9 on X in [2^16, 2^20]: sup {:.4e} at X = {}, {} violations, under 16 eps ln(2A) = {:.4e}",
            s.sup.hi_f64,
            s.sup.x,
            s.violation_count,
            s.advisory_bound.unwrap_or(f64::NAN)
        ),
        t,
    );
    println!(
        "       info: growth condition at X0 = 2^16: {} (it holds from X0 = 2^24; the example config uses that)",
        if rep.cond_growth_ok { "pass" } else { "fails" }
    );

    // 2
    let t = Instant::now();
    let inp = TSumInput {
        sys: &ex1,
        eps: eps.clone(),
        a: a.clone(),
        alpha: RefinableReal::golden(),
        eta: RefinableReal::parse("0").unwrap(),
        direct: 1 << 16,
        filter_homogeneous: false,
    };
    let ts: Vec<_> = [16u32, 17].iter().map(|&k| sum_t(&inp, &(BigInt::from(1) << k)).unwrap()).collect();
    tally.line(
        "2",
        ts.iter().all(|r| r.ok),
        &format!("T(2^16) <= {:.4e}, T(2^17) <= {:.4e}, threshold 2^-6", ts[0].upper_f64, ts[1].upper_f64),
        t,
    );

    // 3
    let t = Instant::now();
    let mut checked = 0;
    let mut ok = true;
    for eta in ["0", "[0; (1)]"] {
        let r = check_counting(&ex1, &RefinableReal::golden(), &RefinableReal::parse(eta).unwrap(), 14, prec).unwrap();
        checked += r.checked;
        ok &= r.ok();
    }
    tally.line("3", ok, &format!("counting bounds for eta in {{0, 1/phi}}, nu <= 14: {checked} bounds checked"), t);

    // 4
    let t = Instant::now();
    let c4 = RunConfig::parse(EXAMPLE1).unwrap();
    let (d4, d4b) = (d.join("c4"), d.join("c4-again"));
    let o4 = cli::construct(&c4, &opts(&d4));
    let run4 = sieve_run(&d4);
    let v4 = read_json(&d4.join("construct-report.json"))["body"]["verification"].clone();
    let complete_ok = run4.blocks.iter().filter(|b| b.complete).all(|b| b.halving_ok != Some(false));
    let pp_ok = run4.pp.violations16.is_empty() && run4.pp.violations32.is_empty();
    tally.line(
        "4",
        o4.status == ExitStatus::Success && run4.survivors_nonempty() && run4.halving_ok && complete_ok && pp_ok && v4["pass"] == true,
        &format!(
            "example1 to 2^16: survivors {:.6}, halving ok {}, packing {} x / {} violations (worst ratios {:.3}, {:.3}), verify on [{}, {}] {} (min {:.4e}, margin {:.3})",
            run4.survivors_measure_f64,
            run4.halving_ok && complete_ok,
            run4.pp.checked,
            run4.pp.violations16.len() + run4.pp.violations32.len(),
            run4.pp.worst_ratio16,
            run4.pp.worst_ratio32,
            v4["from"],
            v4["to"],
            if v4["pass"] == true { "pass" } else { "FAIL" },
            v4["min_value"][0].as_f64().unwrap_or(f64::NAN),
            v4["margin"].as_f64().unwrap_or(f64::NAN),
        ),
        t,
    );

    // 5
    let t = Instant::now();
    let c5 = RunConfig::parse(EXAMPLE6).unwrap();
    let (d5, d5b) = (d.join("c5"), d.join("c5-again"));
    let chk = cli::check(&c5, &opts(&d5));
    let force = Options { force: true, ..opts(&d5) };
    let o5 = cli::construct(&c5, &force);
    let run5 = sieve_run(&d5);
    let w5 = Envelope::<Witness>::read(&d5.join("witness.json"), KIND_WITNESS).unwrap();
    let vo5 = cli::verify(&c5, &d5.join("witness.json"), &opts(&d5));
    let v5 = read_json(&d5.join("verify-report.json"));
    tally.line(
        "5",
        o5.status == ExitStatus::Success && vo5.status == ExitStatus::Success && run5.survivors_nonempty(),
        &format!(
            "example6 (Delta 2^10, eps 1/16, eta 1/3) to 2^16: construct exit {}, verify on [{}, {}] exit {}; the filter admitted {} x, so beta = [{}, {}]",
            o5.status.code(), v5["body"]["from"], v5["body"]["to"], vo5.status.code(), run5.processed, w5.body.beta_lo, w5.body.beta_hi
        ),
        t,
    );
    println!(
        "       info: admissibility check for this configuration: {} (run with --force)",
        if chk.status == ExitStatus::Success { "pass" } else { "fails on the sum condition" }
    );
    let t = Instant::now();
    let c5b = RunConfig::parse(&EXAMPLE6.replace("Delta = \"1024\"", "Delta = \"2\"").replace("epsilon = \"1/16\"", "epsilon = \"1/4\"")).unwrap();
    let d5c = d.join("c5-delta2");
    let o = cli::construct(&c5b, &Options { force: true, ..opts(&d5c) });
    let run5b = sieve_run(&d5c);
    println!(
        "       info: Delta = 2, eps = 1/4: {} x admitted, survivors {:.4}, self-verification {} ({:.1}s)",
        run5b.processed,
        run5b.survivors_measure_f64,
        if o.status == ExitStatus::Success { "pass" } else { "FAIL" },
        t.elapsed().as_secs_f64()
    );

    // 6
    let t = Instant::now();
    tally.line(
        "6",
        run4.measure_identity && run5.measure_identity && run5b.measure_identity,
        &format!(
            "exact mes B = 1 - removed: example1 {} = 1 - {}, example6 {}",
            short(&run4.survivors_measure),
            short(&run4.removed_total),
            run5.survivors_measure
        ),
        t,
    );

    // 7
    let t = Instant::now();
    let r4 = cli::construct(&c4, &opts(&d4b));
    let r5 = cli::construct(&c5, &Options { force: true, ..opts(&d5b) });
    tally.line(
        "7",
        r4.status == o4.status && r5.status == o5.status && same_files(&d4, &d4b) && same_files(&d5, &d5b),
        "fresh reruns of 4 and 5 give byte-identical witness, report and checkpoint files",
        t,
    );

    // 8
    let t = Instant::now();
    let loose = edit(EXAMPLE1, "epsilon = \"1/16384\"", "epsilon = \"1/4\"");
    let neg1 = cli::check(&loose, &opts(&d.join("c8")));
    let (neg2, at) = adversarial_shift(d);
    tally.line(
        "8",
        neg1.status == ExitStatus::AdmissibilityFailed && neg2 == ExitStatus::VerificationFailed,
        &format!("eps = 1/4 check exits {}; witness shifted one deepest cell exits {} (fails at x = {at})", neg1.status.code(), neg2.code()),
        t,
    );

    if tally.failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failed {}", tally.failed.join(", "));
        std::process::exit(1);
    }
}

fn short(s: &str) -> String {
    if s.len() > 40 {
        format!("{}...({} chars)", &s[..24], s.len())
    } else {
        s.into()
    }
}

/// Witness from the `eta_x = 0` fixture with `eta_x` at `x = 4096` moved
/// onto the midpoint of the cell left of the witness, then shifted into
/// that cell.
fn adversarial_shift(d: &Path) -> (ExitStatus, u64) {
    let base = EXAMPLE1
        .replace("q_max = 65536", "q_max = 4096")
        .replace("[eta_x]\nkind = \"seeded-pseudorandom\"\nseed = 1\n", "");
    let zero = RunConfig::parse(&base).unwrap();
    assert_eq!(zero.eta_x, psieve::sieve::EtaSpec::Zero);
    let d0 = d.join("c8-zero");
    cli::construct(&zero, &opts(&d0));
    let w = Envelope::<Witness>::read(&d0.join("witness.json"), KIND_WITNESS).unwrap();
    let cell = w.body.cell().unwrap().clone();
    let (a, level) = (cell.a, cell.level);

    let den_bits = level + 1 - 12;
    let p = (2 * a - 1) % (1u128 << den_bits);
    let lines: Vec<String> = (1..=4096u64).map(|x| if x == 4096 { format!("{p}/{}", 1u128 << den_bits) } else { "0".into() }).collect();
    let eta_file = d.join("adv-eta.txt");
    std::fs::write(&eta_file, lines.join("\n")).unwrap();
    let adv = RunConfig::parse(&format!("{base}\n[eta_x]\nkind = \"file\"\npath = {:?}\n", eta_file.display().to_string())).unwrap();
    let da = d.join("c8-adv");
    cli::construct(&adv, &opts(&da));
    let mut w = Envelope::<Witness>::read(&da.join("witness.json"), KIND_WITNESS).unwrap();
    assert_eq!(w.body.cell().unwrap().a, a, "adversarial eta moved the witness");
    let last = w.body.beta_interval.last_mut().unwrap();
    last.a -= 1;
    let shifted = d.join("shifted.json");
    w.write(&shifted).unwrap();
    let out = cli::verify(&adv, &shifted, &opts(&da));
    let rep = read_json(&da.join("verify-report.json"));
    (out.status, rep["body"]["failures"][0].as_u64().unwrap_or(0))
}
