use std::path::{Path, PathBuf};
use std::process::Command;

const SMALL: &str = r#"
preset = "example1"
alpha = "golden"
epsilon = "1/16384"
A = "4"
X0 = "16777216"
q_max = 4096

[check]
scan_from = 65536
scan_to = 131072

[oracle]
nu_max = 8
badness_to = 1024
"#;

fn psieve(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_psieve"))
        .args(args)
        .env("PSIEVE_OUT", out)
        .output()
        .expect("binary runs");
    let mut text = String::from_utf8_lossy(&o.stdout).into_owned();
    text.push_str(&String::from_utf8_lossy(&o.stderr));
    (o.status.code().unwrap_or(-1), text)
}

fn fixture(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn with(base: &str, from: &str, to: &str) -> String {
    assert!(base.contains(from));
    base.replacen(from, to, 1)
}

/// Shift the deepest cell of a witness file one cell to the left.
fn perturb(witness: &Path, to: &Path) -> (String, u32) {
    let mut w: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(witness).unwrap()).unwrap();
    let last = w["body"]["beta_interval"].as_array_mut().unwrap().last_mut().unwrap();
    let a: u128 = last["a"].as_str().unwrap().parse().unwrap();
    let level = last["level"].as_u64().unwrap() as u32;
    last["a"] = serde_json::Value::String((a - 1).to_string());
    std::fs::write(to, serde_json::to_string_pretty(&w).unwrap()).unwrap();
    (a.to_string(), level)
}

#[test]
fn presets_listing_and_show() {
    let t = tempfile::tempdir().unwrap();
    let (code, text) = psieve(&["presets"], t.path());
    assert_eq!(code, 0);
    assert_eq!(text.lines().filter(|l| l.starts_with("example")).count(), 6);
    let (code, text) = psieve(&["presets", "--show", "example1"], t.path());
    assert_eq!(code, 0);
    assert!(text.contains("Omega = \"sqrt(gamma*z/y)\""), "{text}");
    let (_, text) = psieve(&["presets", "--show", "example4"], t.path());
    assert!(text.contains("eps <= 1/(2^20 (1-a))"), "{text}");
    assert_eq!(psieve(&["presets", "--show", "example9"], t.path()).0, 4);
}

#[test]
fn check_codes() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    let ok = fixture(d, "ok.toml", SMALL);
    let (code, text) = psieve(&["check", "--config", ok.to_str().unwrap()], d);
    assert_eq!(code, 0, "{text}");
    assert!(d.join("check-report.json").exists());

    let loose = fixture(d, "loose.toml", &with(SMALL, "epsilon = \"1/16384\"", "epsilon = \"1/4\""));
    assert_eq!(psieve(&["check", "--config", loose.to_str().unwrap()], d).0, 1);

    let a1 = fixture(d, "a1.toml", &with(SMALL, "A = \"4\"", "A = \"1\""));
    assert_eq!(psieve(&["check", "--config", a1.to_str().unwrap()], d).0, 4);
    let junk = fixture(d, "junk.toml", "alpha = [");
    assert_eq!(psieve(&["check", "--config", junk.to_str().unwrap()], d).0, 4);
    let unknown = fixture(d, "unknown.toml", &format!("{SMALL}\nbogus = 1\n"));
    assert_eq!(psieve(&["check", "--config", unknown.to_str().unwrap()], d).0, 4);
    assert_eq!(psieve(&["check", "--config", d.join("missing.toml").to_str().unwrap()], d).0, 4);
}

#[test]
fn construct_codes() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    // The first block alone removes everything.
    let huge = fixture(d, "huge.toml", &with(SMALL, "epsilon = \"1/16384\"", "epsilon = \"1/2\"\nq0 = 4"));
    assert_eq!(psieve(&["construct", "--config", huge.to_str().unwrap()], d).0, 1);
    let (code, text) = psieve(&["construct", "--force", "--config", huge.to_str().unwrap()], d);
    assert_eq!(code, 2, "{text}");
    assert!(!d.join("witness.json").exists());

    let trivial = fixture(d, "trivial.toml", &with(SMALL, "q_max = 4096", "q_max = 8\nq0 = 16"));
    let (code, text) = psieve(&["construct", "--config", trivial.to_str().unwrap()], d);
    assert_eq!(code, 0, "{text}");
    let w: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("witness.json")).unwrap()).unwrap();
    assert_eq!(w["body"]["beta_lo"], "0");
    assert_eq!(w["body"]["beta_hi"], "1");
}

#[test]
fn verify_codes() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    let cfg = fixture(d, "small.toml", SMALL);
    let c = cfg.to_str().unwrap();
    let (code, text) = psieve(&["construct", "--config", c], d);
    assert_eq!(code, 0, "{text}");
    let w = d.join("witness.json");
    let ws = w.to_str().unwrap();
    assert_eq!(psieve(&["verify", "--config", c, "--witness", ws], d).0, 0);

    let vacuous = fixture(d, "vacuous.toml", &with(SMALL, "q_max = 4096", "q_max = 4096\nx_max_verify = 2"));
    let (code, text) = psieve(&["verify", "--config", vacuous.to_str().unwrap(), "--witness", ws], d);
    assert_eq!(code, 0);
    assert!(text.contains("warning"), "{text}");

    // alpha known only to a fixed width: the distance cannot be decided.
    let blurred = fixture(d, "blurred.toml", &with(SMALL, "alpha = \"golden\"", "alpha = \"0.61803~1/1000\""));
    let (code, _) = psieve(&["verify", "--precision-cap", "128", "--config", blurred.to_str().unwrap(), "--witness", ws], d);
    assert_eq!(code, 5);

    assert_eq!(psieve(&["verify", "--config", c, "--witness", d.join("nope.json").to_str().unwrap()], d).0, 4);
    assert_eq!(psieve(&["verify", "--config", c, "--witness", d.join("check-report.json").to_str().unwrap()], d).0, 4);
}

/// `eta_x` is zero except at `x = q_max`, where it sits on the midpoint of
/// the cell just left of the witness. The zone it opens is narrower than a
/// cell, so the witness itself is unaffected and the shifted one fails.
#[test]
fn perturbed_witness_fails_on_adversarial_fixture() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    let zero = fixture(d, "zero.toml", SMALL);
    let first = d.join("first");
    assert_eq!(psieve(&["construct", "--out", first.to_str().unwrap(), "--config", zero.to_str().unwrap()], d).0, 0);
    let (a, level) = perturb(&first.join("witness.json"), &d.join("unused.json"));
    let a: u128 = a.parse().unwrap();

    // eta = frac(4096 (2a - 1) / 2^(level + 1)), written as p/q
    let den_bits = level + 1 - 12;
    let p = (2 * a - 1) % (1u128 << den_bits);
    let lines: Vec<String> = (1..=4096).map(|x| if x == 4096 { format!("{p}/{}", 1u128 << den_bits) } else { "0".into() }).collect();
    std::fs::write(d.join("adv.txt"), lines.join("\n")).unwrap();
    let adv = fixture(d, "adv.toml", &format!("{SMALL}\n[eta_x]\nkind = \"file\"\npath = \"adv.txt\"\n"));
    let c = adv.to_str().unwrap();
    let out = d.join("adv");
    let (code, text) = psieve(&["construct", "--out", out.to_str().unwrap(), "--config", c], d);
    assert_eq!(code, 0, "{text}");
    let (a2, _) = perturb(&out.join("witness.json"), &d.join("shifted.json"));
    assert_eq!(a2, a.to_string());

    let o = out.to_str().unwrap();
    assert_eq!(psieve(&["verify", "--out", o, "--config", c, "--witness", out.join("witness.json").to_str().unwrap()], d).0, 0);
    let (code, text) = psieve(&["verify", "--out", o, "--config", c, "--witness", d.join("shifted.json").to_str().unwrap()], d);
    assert_eq!(code, 3, "{text}");
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify-report.json")).unwrap()).unwrap();
    assert_eq!(rep["body"]["failures"][0], 4096);
}

#[test]
fn oracle_and_rerun_determinism() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    let cfg = fixture(d, "small.toml", SMALL);
    let c = cfg.to_str().unwrap();
    let (code, text) = psieve(&["oracle", "--config", c, "--nu-max", "6"], d);
    assert_eq!(code, 0, "{text}");

    let (r1, r2) = (d.join("r1"), d.join("r2"));
    for r in [&r1, &r2] {
        assert_eq!(psieve(&["construct", "--out", r.to_str().unwrap(), "--config", c], d).0, 0);
    }
    // r1 again resumes from its finished checkpoint
    assert_eq!(psieve(&["construct", "--out", r1.to_str().unwrap(), "--config", c], d).0, 0);
    for f in ["witness.json", "construct-report.json", "checkpoint.json"] {
        assert_eq!(std::fs::read(r1.join(f)).unwrap(), std::fs::read(r2.join(f)).unwrap(), "{f}");
    }
}
