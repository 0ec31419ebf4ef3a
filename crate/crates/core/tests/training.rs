use eqlab_core::data::{
    generate_symbols, BitSource, Polarization, QamConstellation, Records, SplitFractions, SplitView,
    WindowedDataset,
};
use eqlab_core::metrics::{ber_count, q_from_ber_saturating};
use eqlab_core::nn::{
    load_checkpoint, save_checkpoint, softmax, train, LossKind, MlpArch, Model, ModelArch, TrainConfig,
    BiLstmArch,
};
use eqlab_core::data::Split;
use eqlab_core::DualPol;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// y = h * x + n on each polarization, with a 3-tap ISI filter.
fn isi_channel(tx: &DualPol, sigma: f64, seed: u64) -> DualPol {
    let h = [Complex64::new(0.25, 0.1), Complex64::new(1.0, 0.0), Complex64::new(0.3, -0.15)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut filt = |s: &[Complex64]| -> Vec<Complex64> {
        let n = s.len();
        (0..n)
            .map(|i| {
                let mut acc = Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng));
                for (k, hk) in h.iter().enumerate() {
                    let j = (i + n + 1 - k) % n;
                    acc += hk * s[j];
                }
                acc
            })
            .collect()
    };
    let x = filt(&tx.x);
    let y = filt(&tx.y);
    DualPol::new(x, y).unwrap()
}

fn toy_dataset(n: usize) -> (WindowedDataset, QamConstellation) {
    let c = QamConstellation::new(16).unwrap();
    let tx = generate_symbols(&BitSource::mersenne(21), &c, n).unwrap();
    let rx = isi_channel(&tx, 0.04, 22);
    let splits = SplitFractions { train: 0.7, val: 0.0, test: 0.3 };
    let ds = WindowedDataset::new(&tx, &rx, 2, Polarization::X, &c, splits, 5).unwrap();
    (ds, c)
}

fn unequalized_q<R: Records>(r: &R, c: &QamConstellation) -> f64 {
    let centre = r.input_width() / 8;
    let rx: Vec<_> = (0..r.len())
        .map(|i| {
            let w = r.window(i);
            Complex64::new(w[4 * centre], w[4 * centre + 1])
        })
        .collect();
    let tx: Vec<_> = (0..r.len()).map(|i| {
        let t = r.target(i);
        Complex64::new(t[0], t[1])
    }).collect();
    q_from_ber_saturating(ber_count(&rx, &tx, c).unwrap().ber)
}

fn small_cfg() -> TrainConfig {
    TrainConfig {
        batch_size: 64,
        learning_rate: 3e-3,
        max_epochs: 50,
        patience: 50,
        seed: 1,
        ..TrainConfig::default()
    }
}

#[test]
fn mlp_learns_linear_isi() {
    let (ds, c) = toy_dataset(6000);
    let train_set = SplitView::new(&ds, Split::Train);
    let test_set = SplitView::new(&ds, Split::Test);
    let pre = unequalized_q(&test_set, &c);
    let arch = ModelArch::Mlp(MlpArch { memory: 2, hidden: vec![16, 8], outputs: 2 });
    let out = train(&Model::new(arch, 3).unwrap(), &train_set, &test_set, &c, &small_cfg()).unwrap();
    let post = out.trace.best().unwrap().val_q_db;
    assert!(post > pre + 2.0, "pre {pre:.2} dB, post {post:.2} dB");
}

#[test]
fn zero_learning_rate_freezes_everything() {
    let (ds, c) = toy_dataset(1500);
    let train_set = SplitView::new(&ds, Split::Train);
    let test_set = SplitView::new(&ds, Split::Test);
    let model = Model::new(ModelArch::Mlp(MlpArch { memory: 2, hidden: vec![6], outputs: 2 }), 4).unwrap();
    let cfg = TrainConfig { learning_rate: 0.0, max_epochs: 4, ..small_cfg() };
    let out = train(&model, &train_set, &test_set, &c, &cfg).unwrap();
    assert_eq!(out.last.params, model.params);
    let r = &out.trace.records;
    assert_eq!(r.len(), 4);
    assert!(r.iter().all(|e| e.val_q_db == r[0].val_q_db && e.val_evm == r[0].val_evm));
}

#[test]
fn same_seed_same_trace() {
    let (ds, c) = toy_dataset(1500);
    let train_set = SplitView::new(&ds, Split::Train);
    let test_set = SplitView::new(&ds, Split::Test);
    let arch = ModelArch::Bilstm(BiLstmArch { memory: 2, hidden_units: 4, outputs: 2 });
    let cfg = TrainConfig { max_epochs: 3, train_eval_records: Some(200), ..small_cfg() };
    let a = train(&Model::new(arch.clone(), 9).unwrap(), &train_set, &test_set, &c, &cfg).unwrap();
    let b = train(&Model::new(arch, 9).unwrap(), &train_set, &test_set, &c, &cfg).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.best.params, b.best.params);
    assert!(a.trace.to_csv().lines().count() == 4);
}

#[test]
fn classifier_outputs_match_order_and_normalise() {
    let (ds, c) = toy_dataset(1500);
    let train_set = SplitView::new(&ds, Split::Train);
    let test_set = SplitView::new(&ds, Split::Test);
    let arch = ModelArch::Mlp(MlpArch { memory: 2, hidden: vec![12], outputs: 16 });
    let cfg = TrainConfig { loss: LossKind::CategoricalCel, max_epochs: 2, ..small_cfg() };
    let out = train(&Model::new(arch, 2).unwrap(), &train_set, &test_set, &c, &cfg).unwrap();
    let y = out.best.predict_records(&test_set).unwrap();
    assert_eq!(y.ncols(), 16);
    for row in softmax(y.view()).rows() {
        assert!((row.sum() - 1.0).abs() < 1e-12);
    }
    // regression loss on a classifier is a configuration error
    let bad = TrainConfig { loss: LossKind::Mse, ..cfg };
    assert!(train(&out.best, &train_set, &test_set, &c, &bad).is_err());
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let (ds, _) = toy_dataset(500);
    let test_set = SplitView::new(&ds, Split::Test);
    for arch in [
        ModelArch::Mlp(MlpArch { memory: 2, hidden: vec![5, 4, 3], outputs: 2 }),
        ModelArch::Bilstm(BiLstmArch { memory: 2, hidden_units: 3, outputs: 16 }),
    ] {
        let model = Model::new(arch, 8).unwrap();
        let path = dir.path().join("model.json");
        save_checkpoint(&model, &path, Some("abc")).unwrap();
        let (back, desc) = load_checkpoint(&path).unwrap();
        assert_eq!(desc.config_hash.as_deref(), Some("abc"));
        let a = model.predict_records(&test_set).unwrap();
        let b = back.predict_records(&test_set).unwrap();
        assert!(a.iter().zip(b.iter()).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

#[test]
fn shape_mismatch_is_reported() {
    let model = Model::new(ModelArch::Mlp(MlpArch { memory: 1, hidden: vec![3], outputs: 2 }), 0).unwrap();
    let x = ndarray::Array2::<f64>::zeros((2, 8));
    assert!(model.predict(x.view()).is_err());
}
