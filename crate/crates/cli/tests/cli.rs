use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_eqlab");

fn b2b_config() -> Value {
    json!({
        "channel": { "mode": "b2b", "target_q_db": 6.9 },
        "source": { "kind": "mersenne_twister", "seed": 0 },
        "constellation": { "order": 16 },
        "n_symbols": 4096,
        "memory": 2,
        "model": { "kind": "mlp", "memory": 2, "hidden": [16, 8], "outputs": 2 },
        "train": {
            "loss": "mse",
            "batch_size": 64,
            "learning_rate": 0.002,
            "max_epochs": 6,
            "patience": 6,
            "seed": 0,
            "train_eval_records": 512
        },
        "seeds": { "data": 1, "noise": 2, "init": 3, "shuffle": 4 },
        "complexity": { "quant": [{ "b_w": 8, "b_i": 6 }] }
    })
}

fn loopback_config() -> Value {
    let mut c = b2b_config();
    c["channel"] = json!({
        "mode": "link",
        "fiber": {
            "attenuation_db_per_km": 0.21,
            "dispersion_ps_nm_km": 16.8,
            "gamma_per_w_km": 1.2,
            "center_wavelength_nm": 1550.0
        },
        "link": {
            "span_length_km": 50.0,
            "num_spans": 0,
            "step_km": 1.0,
            "edfa_noise_figure_db": 4.5,
            "launch_power_dbm": 0.0
        },
        "shaping": {
            "rolloff": 0.1,
            "samples_per_symbol": 4,
            "symbol_rate_gbd": 34.4,
            "filter_span_symbols": 32
        }
    });
    c
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new(config: &Value) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("config.in.json"), config.to_string()).unwrap();
        Self { dir }
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn run(&self, cmd: &str, extra: &[&str]) -> (i32, String) {
        let o = Command::new(BIN)
            .arg(cmd)
            .arg("--config")
            .arg(self.dir.path().join("config.in.json"))
            .arg("--out")
            .arg(self.out())
            .args(extra)
            .output()
            .unwrap();
        (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
    }

    fn ok(&self, cmd: &str) {
        let (code, err) = self.run(cmd, &[]);
        assert_eq!(code, 0, "{cmd} failed: {err}");
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.out().join(name)).unwrap()).unwrap()
    }
}

const STAGES: [&str; 6] = ["simulate", "train", "evaluate", "audit", "complexity", "report"];

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn pipeline_outputs_carry_config_hash() {
    let w = Workspace::new(&b2b_config());
    for s in STAGES {
        w.ok(s);
    }
    let hash = w.json("config.json")["config_hash"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 64);
    for f in files(&w.out()) {
        let name = f.file_name().unwrap().to_string_lossy().into_owned();
        if name.ends_with(".bin") {
            continue;
        }
        let text = fs::read_to_string(&f).unwrap();
        assert!(text.contains(&hash), "{name} lacks the config hash");
        if name.ends_with(".csv") {
            assert!(text.starts_with(&format!("# config_hash={hash}\n")), "{name}");
        }
    }
    for name in ["tx.bin.json", "rx.bin.json", "model_best.json", "model_last.json", "training.csv",
        "scatter.csv", "report.csv", "report.json"]
    {
        assert!(w.out().join(name).exists(), "{name} missing");
    }
    let report = w.json("report.json");
    for s in ["simulate", "train", "evaluate", "audit", "complexity"] {
        assert!(report["sections"].get(s).is_some(), "{s} missing from report");
    }
}

#[test]
fn b2b_calibrated_to_target() {
    let w = Workspace::new(&b2b_config());
    w.ok("simulate");
    let s = w.json("simulate.json");
    let q = s["channel"]["calibrated_q_db"].as_f64().unwrap();
    assert!((q - 6.9).abs() < 0.1, "calibrated Q {q}");
    assert_eq!(s["symbols"], 4096);
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let cfg = b2b_config();
    let a = Workspace::new(&cfg);
    let b = Workspace::new(&cfg);
    for s in STAGES {
        a.ok(s);
        b.ok(s);
    }
    let fa = files(&a.out());
    let fb = files(&b.out());
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert!(fs::read(x).unwrap() == fs::read(y).unwrap(), "{} differs", x.display());
    }
}

#[test]
fn seed_override_changes_outputs() {
    let w = Workspace::new(&b2b_config());
    w.ok("simulate");
    let base = fs::read(w.out().join("rx.bin")).unwrap();
    let hash = w.json("config.json")["config_hash"].clone();
    let (code, err) = w.run("simulate", &["--seed-override", "noise=99"]);
    assert_eq!(code, 0, "{err}");
    assert_ne!(fs::read(w.out().join("rx.bin")).unwrap(), base);
    let cfg = w.json("config.json");
    assert_ne!(cfg["config_hash"], hash);
    assert_eq!(cfg["config"]["seeds"]["noise"], 99);
    // the embedded source seed follows the data seed
    let (code, _) = w.run("simulate", &["--seed-override", "data=7"]);
    assert_eq!(code, 0);
    assert_eq!(w.json("config.json")["config"]["source"]["seed"], 7);
}

#[test]
fn non_deterministic_seeds_are_recorded() {
    let w = Workspace::new(&b2b_config());
    let (code, err) = w.run("simulate", &["--deterministic", "false", "--seed-override", "init=3"]);
    assert_eq!(code, 0, "{err}");
    let seeds = &w.json("config.json")["config"]["seeds"];
    assert_eq!(seeds["init"], 3);
    assert_ne!(seeds["noise"], 2);
}

#[test]
fn zero_spans_loop_back() {
    let w = Workspace::new(&loopback_config());
    w.ok("simulate");
    let raw = &w.json("simulate.json")["raw"];
    for pol in ["x", "y"] {
        assert_eq!(raw[pol]["ber"], 0.0, "{pol}");
        let evm = raw[pol]["evm_fraction"].as_f64().unwrap();
        assert!(evm < 0.02, "{pol} EVM {evm}");
    }
}

#[test]
fn evaluate_identity_trace() {
    let w = Workspace::new(&b2b_config());
    w.ok("simulate");
    fs::copy(w.out().join("tx.bin"), w.out().join("rx.bin")).unwrap();
    fs::copy(w.out().join("tx.bin.json"), w.out().join("rx.bin.json")).unwrap();
    w.ok("evaluate");
    let e = w.json("evaluate.json");
    assert_eq!(e["unequalized"]["ber"], 0.0);
    assert_eq!(e["unequalized"]["evm_fraction"], 0.0);
    assert_eq!(e["unequalized"]["q_db"], "inf");
    let scatter = fs::read_to_string(w.out().join("scatter.csv")).unwrap();
    let mut lines = scatter.lines().skip(1);
    assert_eq!(lines.next(), Some("re,im,tx_label"));
    assert_eq!(lines.count() as u64, e["test_symbols"].as_u64().unwrap());
}

#[test]
fn evaluate_reports_each_checkpoint() {
    let w = Workspace::new(&b2b_config());
    for s in ["simulate", "train", "evaluate"] {
        w.ok(s);
    }
    let e = w.json("evaluate.json");
    for k in ["best", "last"] {
        let q = e["checkpoints"][k]["q_db"].as_f64().unwrap();
        assert!(q.is_finite() && q > 3.0, "{k} Q {q}");
    }
    let t = w.json("train.json");
    assert_eq!(t["trace"]["records"].as_array().unwrap().len(), 6);
}

#[test]
fn audit_detects_dac_repetition() {
    let mut cfg = b2b_config();
    cfg["dac"] = json!({
        "memory_samples": 1536,
        "frames": 1,
        "dac_rate_hz": 34.4e9,
        "symbol_rate_hz": 34.4e9
    });
    let w = Workspace::new(&cfg);
    w.ok("simulate");
    w.ok("audit");
    let a = &w.json("audit.json")["audit"];
    assert_eq!(a["detected_period_symbols"], 1536);
    assert!(!a["notes"].as_array().unwrap().is_empty());

    let clean = Workspace::new(&b2b_config());
    clean.ok("simulate");
    clean.ok("audit");
    assert_eq!(clean.json("audit.json")["audit"]["detected_period_symbols"], Value::Null);
}

#[test]
fn complexity_topology_one() {
    let mut cfg = b2b_config();
    cfg["complexity"] = json!({
        "topology": { "kind": "mlp2", "n_s": 71, "hidden": [600, 518] },
        "quant": [{ "b_w": 8, "b_i": 3 }]
    });
    // 3 input bits cannot resolve the 8 levels per axis of 64-QAM
    cfg["constellation"]["order"] = json!(64);
    let w = Workspace::new(&cfg);
    w.ok("complexity");
    let c = &w.json("complexity.json")["complexity"];
    assert_eq!(c["rmps"], 482_236);
    assert_eq!(c["bops"].as_array().unwrap().len(), 3);
    assert_eq!(c["warnings"].as_array().unwrap().len(), 1);
    assert!(c.get("latency").map_or(true, Value::is_null));
}

#[test]
fn complexity_defaults_to_model_topology() {
    let w = Workspace::new(&b2b_config());
    w.ok("complexity");
    let c = &w.json("complexity.json")["complexity"];
    // 20*16 + 16*8 + 8*2 multiplications plus 16 + 8 + 2 biases
    assert_eq!(c["rmps"], 464);
    assert_eq!(c["params"], 490);
}

#[test]
fn exit_codes() {
    let w = Workspace::new(&b2b_config());
    // usage error
    let o = Command::new(BIN).arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    // missing config flag
    let o = Command::new(BIN).arg("simulate").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    // stage run before its inputs exist
    let (code, err) = w.run("train", &[]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("tx.bin"), "{err}");
    let (code, _) = w.run("report", &[]);
    assert_eq!(code, 2);
    // bad seed key and malformed value
    assert_eq!(w.run("simulate", &["--seed-override", "salt=1"]).0, 1);
    assert_eq!(w.run("simulate", &["--seed-override", "data"]).0, 1);
    assert_eq!(w.run("simulate", &["--seed-override", "data=-1"]).0, 1);
}

#[test]
fn schema_violations_are_config_errors() {
    let mut unknown = b2b_config();
    unknown["nonsense"] = json!(1);
    let mut mismatch = b2b_config();
    mismatch["memory"] = json!(3);
    let mut outputs = b2b_config();
    outputs["train"]["loss"] = json!("categorical_cel");
    let mut missing_seed = b2b_config();
    missing_seed["seeds"].as_object_mut().unwrap().remove("shuffle");
    let mut bad_order = b2b_config();
    bad_order["constellation"]["order"] = json!(12);
    for (name, cfg) in [
        ("unknown field", unknown),
        ("memory mismatch", mismatch),
        ("outputs vs loss", outputs),
        ("missing seed", missing_seed),
        ("bad order", bad_order),
    ] {
        let w = Workspace::new(&cfg);
        let (code, err) = w.run("simulate", &[]);
        assert_eq!(code, 1, "{name}: {err}");
        assert!(err.contains("configuration error"), "{name}: {err}");
    }
}
