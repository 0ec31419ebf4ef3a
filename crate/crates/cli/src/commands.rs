use std::fs;
use std::path::{Path, PathBuf};

use eqlab_core::channel::{awgn_b2b, read_trace, simulate_link, write_trace, TraceKind, TraceMeta};
use eqlab_core::complexity::{latency_bench, ComplexityReport, TopologySpec};
use eqlab_core::data::{
    dac_frame_repeat, generate_symbols, symbol_periodicity, BitSourceKind, Polarization, Records, Split, SplitView,
    WindowedDataset,
};
use eqlab_core::metrics::MetricsReport;
use eqlab_core::nn::model::target_symbols;
use eqlab_core::nn::{evaluate, load_checkpoint, save_checkpoint, train, Evaluation, Model, TrainTrace};
use eqlab_core::pitfalls::{
    autocorr_period_streams, jail_window_detect, overfit_gap, prbs_learnability_test, AuditReport, JailSummary,
};
use eqlab_core::DualPol;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Channel, ExperimentConfig};
use crate::error::CliError;

pub const TX_TRACE: &str = "tx.bin";
pub const RX_TRACE: &str = "rx.bin";
pub const BEST_CHECKPOINT: &str = "model_best.json";
pub const LAST_CHECKPOINT: &str = "model_last.json";

pub struct Run {
    pub cfg: ExperimentConfig,
    pub hash: String,
    pub out: PathBuf,
}

impl Run {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
        Ok(path)
    }

    /// CSV with the config hash on a leading comment line.
    fn write_csv(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, format!("# config_hash={}\n{body}", self.hash))?;
        Ok(path)
    }

    fn require(&self, name: &str) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        if p.exists() {
            Ok(p)
        } else {
            Err(CliError::MissingArtifact(p.display().to_string()))
        }
    }

    fn traces(&self) -> Result<(DualPol, DualPol), CliError> {
        let (tx, _) = read_trace(&self.require(TX_TRACE)?)?;
        let (rx, _) = read_trace(&self.require(RX_TRACE)?)?;
        if tx.len() != rx.len() {
            return Err(CliError::Runtime("tx and rx traces differ in length".into()));
        }
        Ok((tx, rx))
    }

    fn dataset(&self, tx: &DualPol, rx: &DualPol) -> Result<WindowedDataset, CliError> {
        Ok(WindowedDataset::new(
            tx,
            rx,
            self.cfg.memory,
            self.cfg.polarization,
            &self.cfg.constellation,
            self.cfg.splits,
            self.cfg.seeds.shuffle,
        )?)
    }

    /// Raw centre symbols of the given split with their references.
    fn unequalized(&self, ds: &WindowedDataset, rx: &DualPol, split: Split) -> (Vec<Complex64>, Vec<Complex64>) {
        let pol = match self.cfg.polarization {
            Polarization::X => &rx.x,
            Polarization::Y => &rx.y,
        };
        let view = SplitView::new(ds, split);
        let m = self.cfg.memory;
        let range = ds.splits().get(split);
        let raw = pol[range.start + m..range.end + m].to_vec();
        (raw, target_symbols(&view))
    }

    fn checkpoints(&self) -> Vec<(&'static str, PathBuf)> {
        [("best", BEST_CHECKPOINT), ("last", LAST_CHECKPOINT)]
            .into_iter()
            .map(|(k, f)| (k, self.path(f)))
            .filter(|(_, p)| p.exists())
            .collect()
    }
}

pub fn simulate(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = &run.cfg;
    let mut tx = generate_symbols(&cfg.source, &cfg.constellation, cfg.n_symbols)?;
    if let Some(dac) = &cfg.dac {
        tx = dac_frame_repeat(&tx, dac)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seeds.noise);
    let (rx, link, extra) = match &cfg.channel {
        Channel::Link(sim) => (simulate_link(&tx, sim, &mut rng)?, Some(*sim), Value::Null),
        Channel::B2b { target_q_db } => {
            let b2b = awgn_b2b(&tx, *target_q_db, &cfg.constellation, &mut rng)?;
            let extra = json!({
                "target_q_db": target_q_db,
                "calibrated_q_db": b2b.calibrated_q_db,
                "noise_variance": b2b.noise_variance,
            });
            (b2b.symbols, None, extra)
        }
    };
    let (symbol_rate, launch) = match &cfg.channel {
        Channel::Link(sim) => (sim.shaping.symbol_rate_hz(), Some(sim.link.launch_power_dbm)),
        Channel::B2b { .. } => (34.4e9, None),
    };
    let meta = |seed| TraceMeta {
        kind: TraceKind::Symbols,
        samples: tx.len(),
        sample_rate_hz: symbol_rate,
        symbol_rate_hz: symbol_rate,
        launch_power_dbm: launch,
        seed,
        link,
        generator: cfg.source.clone(),
        config_hash: Some(run.hash.clone()),
    };
    write_trace(&run.path(TX_TRACE), &tx, &meta(cfg.seeds.data))?;
    write_trace(&run.path(RX_TRACE), &rx, &meta(cfg.seeds.noise))?;
    let raw = [
        ("x", MetricsReport::compute(&rx.x, &tx.x, &cfg.constellation)?),
        ("y", MetricsReport::compute(&rx.y, &tx.y, &cfg.constellation)?),
    ];
    let summary = json!({
        "config_hash": run.hash,
        "symbols": tx.len(),
        "channel": extra,
        "raw": { "x": raw[0].1, "y": raw[1].1 },
    });
    let mut out = vec![run.path(TX_TRACE), run.path(RX_TRACE)];
    out.push(run.write_json("simulate.json", &summary)?);
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSummary {
    pub config_hash: String,
    pub parameters: usize,
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub test_best: Evaluation,
    pub test_last: Evaluation,
    pub test_unequalized_q_db: f64,
    pub trace: TrainTrace,
}

pub fn train_cmd(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = &run.cfg;
    let (tx, rx) = run.traces()?;
    let ds = run.dataset(&tx, &rx)?;
    let train_set = SplitView::new(&ds, Split::Train);
    let val_set = SplitView::new(&ds, Split::Val);
    let test_set = SplitView::new(&ds, Split::Test);
    if train_set.is_empty() || val_set.is_empty() || test_set.is_empty() {
        return Err(CliError::Config("train, val and test splits must all be non-empty".into()));
    }
    let model = Model::new(cfg.model.clone(), cfg.seeds.init)?;
    let out = train(&model, &train_set, &val_set, &cfg.constellation, &cfg.train)?;
    save_checkpoint(&out.best, &run.path(BEST_CHECKPOINT), Some(&run.hash))?;
    save_checkpoint(&out.last, &run.path(LAST_CHECKPOINT), Some(&run.hash))?;
    let (raw, refs) = run.unequalized(&ds, &rx, Split::Test);
    let summary = TrainSummary {
        config_hash: run.hash.clone(),
        parameters: model.parameter_count(),
        best_epoch: out.trace.best_epoch,
        stopped_early: out.trace.stopped_early,
        test_best: evaluate(&out.best, &test_set, &cfg.constellation, cfg.train.loss)?,
        test_last: evaluate(&out.last, &test_set, &cfg.constellation, cfg.train.loss)?,
        test_unequalized_q_db: MetricsReport::compute(&raw, &refs, &cfg.constellation)?.q_db,
        trace: out.trace,
    };
    Ok(vec![
        run.path(BEST_CHECKPOINT),
        run.path(LAST_CHECKPOINT),
        run.write_csv("training.csv", &summary.trace.to_csv())?,
        run.write_json("train.json", &summary)?,
    ])
}

fn scatter_csv(rx: &[Complex64], tx: &[Complex64], run: &Run) -> String {
    let labels = run.cfg.constellation.indices_of(tx);
    let mut s = String::from("re,im,tx_label\n");
    for (y, l) in rx.iter().zip(labels) {
        s.push_str(&format!("{},{},{l}\n", y.re, y.im));
    }
    s
}

pub fn evaluate_cmd(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let c = &run.cfg.constellation;
    let (tx, rx) = run.traces()?;
    let ds = run.dataset(&tx, &rx)?;
    let test_set = SplitView::new(&ds, Split::Test);
    if test_set.is_empty() {
        return Err(CliError::Config("test split is empty".into()));
    }
    let (raw, refs) = run.unequalized(&ds, &rx, Split::Test);
    let mut reports = serde_json::Map::new();
    let mut scatter = (raw.clone(), "unequalized");
    for (name, path) in run.checkpoints() {
        let (model, _) = load_checkpoint(&path)?;
        let eq = model.equalize(&test_set, c)?;
        reports.insert(name.to_string(), serde_json::to_value(MetricsReport::compute(&eq, &refs, c)?)?);
        if name == "best" {
            scatter = (eq, "best");
        }
    }
    let summary = json!({
        "config_hash": run.hash,
        "test_symbols": refs.len(),
        "unequalized": MetricsReport::compute(&raw, &refs, c)?,
        "checkpoints": reports,
        "scatter_source": scatter.1,
    });
    Ok(vec![
        run.write_json("evaluate.json", &summary)?,
        run.write_csv("scatter.csv", &scatter_csv(&scatter.0, &refs, run))?,
    ])
}

pub fn audit_cmd(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = &run.cfg;
    let (tx, rx) = run.traces()?;
    let mut report = AuditReport::default();

    // repetition in the received symbols
    let max_lag = cfg.audit.max_lag.unwrap_or(rx.len() / 2).min(rx.len() / 2);
    if max_lag >= 1 {
        let det = autocorr_period_streams(&[&rx.x, &rx.y], max_lag)?;
        report.detected_period_symbols = det.period;
        if let Some(p) = det.period {
            report
                .notes
                .push(format!("received symbols repeat every {p} symbols (correlation {:.3})", det.peak));
        }
    }

    let ds = run.dataset(&tx, &rx)?;
    if cfg.source.kind == BitSourceKind::PrbsLfsr {
        if let Some(order) = cfg.source.prbs_order {
            let bps = cfg.constellation.bits_per_symbol() as u32 * 2;
            let period = symbol_periodicity(order, bps);
            let train_len = ds.splits().train.len() as u64;
            if train_len >= period {
                report.notes.push(format!(
                    "PRBS order {order} repeats every {period} dual-pol symbols, training uses {train_len}"
                ));
            }
        }
    }

    let test_set = SplitView::new(&ds, Split::Test);
    if !test_set.is_empty() {
        let (raw, refs) = run.unequalized(&ds, &rx, Split::Test);
        let symbols = match run.checkpoints().first() {
            Some((_, path)) => load_checkpoint(path)?.0.equalize(&test_set, &cfg.constellation)?,
            None => raw,
        };
        let j = jail_window_detect(&symbols, &refs, &cfg.constellation, cfg.audit.kappa, cfg.audit.gap_threshold_db)?;
        if j.flagged {
            report.notes.push(format!(
                "EVM-derived Q exceeds counted Q by {:.2} dB; error clusters are not Gaussian",
                j.q_gap_db
            ));
        }
        report.jail_window = Some(JailSummary::from(&j));
    }

    let train_json = run.path("train.json");
    if train_json.exists() {
        let summary: TrainSummary = serde_json::from_str(&fs::read_to_string(&train_json)?)?;
        let records = &summary.trace.records;
        let train_q: Option<Vec<f64>> = records.iter().map(|r| r.train_q_db).collect();
        match train_q {
            Some(train_q) if !records.is_empty() => {
                let val_q: Vec<f64> = records.iter().map(|r| r.val_q_db).collect();
                let v = overfit_gap(&train_q, &val_q, &cfg.audit.overfit)?;
                report.overfit_gap_db = v.gap_db.last().copied();
                report.overfit = Some(v.overfit);
            }
            _ => report
                .notes
                .push("training did not record train Q (set train.train_eval_records); overfit check skipped".into()),
        }
    }

    if let Some(l) = &cfg.audit.learnability {
        report.prbs_gain_db = Some(prbs_learnability_test(l)?.gain_db);
    }

    let value = json!({ "config_hash": run.hash, "audit": report });
    Ok(vec![run.write_json("audit.json", &value)?])
}

pub fn complexity_cmd(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = &run.cfg;
    let topology = match &cfg.complexity.topology {
        Some(t) => t.clone(),
        None => TopologySpec::from_arch(&cfg.model)?,
    };
    let mut report = ComplexityReport::new(&topology, &cfg.complexity.quant, Some(cfg.constellation.order()))?;
    if let Some(n) = cfg.complexity.latency_symbols {
        let model = match (&cfg.complexity.topology, run.path(BEST_CHECKPOINT)) {
            (None, p) if p.exists() => load_checkpoint(&p)?.0,
            _ => Model::new(topology.to_arch()?, cfg.seeds.init)?,
        };
        report.latency = Some(latency_bench(&model, n)?);
    }
    let value = json!({ "config_hash": run.hash, "complexity": report });
    Ok(vec![run.write_json("complexity.json", &value)?])
}

fn read_section(dir: &Path, name: &str) -> Result<Option<Value>, CliError> {
    let p = dir.join(name);
    if !p.exists() {
        return Ok(None);
    }
    Ok(Some(serde_json::from_str(&fs::read_to_string(p)?)?))
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, rows);
            }
        }
        Value::Array(_) => {}
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

/// Collects the stage outputs in the directory into one JSON document and
/// a flat section,metric,value CSV. Training curves are left out of the CSV;
/// they are in training.csv.
pub fn report_cmd(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let mut sections = serde_json::Map::new();
    let mut rows = Vec::new();
    for (section, file) in [
        ("simulate", "simulate.json"),
        ("train", "train.json"),
        ("evaluate", "evaluate.json"),
        ("audit", "audit.json"),
        ("complexity", "complexity.json"),
    ] {
        if let Some(mut v) = read_section(&run.out, file)? {
            if let Some(m) = v.as_object_mut() {
                m.remove("trace");
                if let Some(h) = m.get("config_hash").and_then(Value::as_str) {
                    if h != run.hash {
                        rows.push((format!("{section}.stale"), "config hash differs".to_string()));
                    }
                }
            }
            let mut r = Vec::new();
            flatten("", &v, &mut r);
            rows.extend(r.into_iter().map(|(k, val)| (format!("{section}.{k}"), val)));
            sections.insert(section.to_string(), v);
        }
    }
    if sections.is_empty() {
        return Err(CliError::MissingArtifact(format!("stage outputs in {}", run.out.display())));
    }
    let mut csv = String::from("metric,value\n");
    for (k, v) in &rows {
        let v = if v.contains(',') { format!("\"{v}\"") } else { v.clone() };
        csv.push_str(&format!("{k},{v}\n"));
    }
    Ok(vec![
        run.write_json("report.json", &json!({ "config_hash": run.hash, "sections": sections }))?,
        run.write_csv("report.csv", &csv)?,
    ])
}
