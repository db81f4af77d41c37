use psieve_demo::{counts_json, cover_json, preview_json};
use serde_json::Value;

#[test]
fn cover_matches_hand_count() {
    // x = 2, eta = 1/2, sigma = 1/8: level 3, cells 1, 2, 5, 6
    let v: Value = serde_json::from_str(&cover_json(2, "1/2", "1/8").unwrap()).unwrap();
    assert_eq!(v["level"], 3);
    assert_eq!(v["cells"], "4");
    assert_eq!(v["runs"].as_array().unwrap().len(), 2);
    assert_eq!(v["runs"][0]["lo"], 0.125);
    assert!(cover_json(0, "0", "1/8").is_err());
    assert!(cover_json(2, "0", "0").is_err());
}

#[test]
fn preview_runs_small_config() {
    let cfg = "preset = \"example1\"\nalpha = \"golden\"\nepsilon = \"1/16384\"\nA = \"4\"\nX0 = \"65536\"\nq_max = 512\n";
    let v: Value = serde_json::from_str(&preview_json(cfg).unwrap()).unwrap();
    assert_eq!(v["identity"], true);
    assert_eq!(v["halving_ok"], true);
    assert!(v["survivors"].as_f64().unwrap() > 0.9);
    assert!(!v["chain"].as_array().unwrap().is_empty());
    assert!(preview_json(&cfg.replace("q_max = 512", "q_max = 100000")).is_err());
}

#[test]
fn counts_cover_the_block() {
    let v: Value = serde_json::from_str(&counts_json("golden", "0", 8).unwrap()).unwrap();
    let total: u64 = v["cells"].as_array().unwrap().iter().map(|c| c[1].as_u64().unwrap()).sum();
    assert_eq!(total + v["zero"].as_u64().unwrap() + v["undecided"].as_u64().unwrap(), 256);
    // alpha = 1/3, nu = 2: x = 4..7 give distances 1/3, 1/3, 0, 1/3
    let v: Value = serde_json::from_str(&counts_json("1/3", "0", 2).unwrap()).unwrap();
    assert_eq!(v["zero"], 1);
    assert_eq!(v["cells"], serde_json::json!([[1, 3]]));
}
