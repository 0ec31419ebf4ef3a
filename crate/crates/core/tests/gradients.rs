use eqlab_core::nn::{BiLstmArch, LossKind, MlpArch, Model, ModelArch, Targets};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-4;
const TOL: f64 = 1e-5;

struct Batch {
    x: Array2<f64>,
    points: Array2<f64>,
    classes: Vec<usize>,
}

fn batch(width: usize, classes: usize, seed: u64) -> Batch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = 6;
    Batch {
        x: Array2::from_shape_fn((b, width), |_| rng.random_range(-1.5..1.5)),
        points: Array2::from_shape_fn((b, 2), |_| rng.random_range(-1.0..1.0)),
        classes: (0..b).map(|_| rng.random_range(0..classes)).collect(),
    }
}

fn targets<'a>(b: &'a Batch, loss: LossKind) -> Targets<'a> {
    match loss {
        LossKind::Mse => Targets::Points(b.points.view()),
        LossKind::CategoricalCel => Targets::Classes(&b.classes),
    }
}

/// Worst relative disagreement between analytic gradients and a
/// five-point central difference (truncation error O(H^4)).
fn worst_error(model: &Model, b: &Batch, loss: LossKind, lambda: f64) -> f64 {
    let analytic = model.loss_and_grad(b.x.view(), targets(b, loss), loss, lambda).unwrap().grads;
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for k in 0..model.params.len() {
        let orig = probe.params.data[k];
        let mut at = |d: f64| {
            probe.params.data[k] = orig + d;
            probe.loss_and_grad(b.x.view(), targets(b, loss), loss, lambda).unwrap().loss
        };
        let fd = (-at(2.0 * H) + 8.0 * at(H) - 8.0 * at(-H) + at(-2.0 * H)) / (12.0 * H);
        probe.params.data[k] = orig;
        let a = analytic.data[k];
        worst = worst.max((a - fd).abs() / (a.abs() + 1e-8));
    }
    worst
}

fn check(arch: ModelArch, loss: LossKind) {
    let outputs = arch.outputs();
    let model = Model::new(arch, 11).unwrap();
    assert!(model.parameter_count() <= 500, "{} params", model.parameter_count());
    let b = batch(model.arch.input_width(), outputs, 12);
    for lambda in [0.0, 0.01] {
        let e = worst_error(&model, &b, loss, lambda);
        assert!(e < TOL, "{loss:?} lambda={lambda}: worst relative error {e:e}");
    }
}

fn mlp3(outputs: usize) -> ModelArch {
    ModelArch::Mlp(MlpArch { memory: 1, hidden: vec![8, 6, 5], outputs })
}

fn bilstm(outputs: usize) -> ModelArch {
    ModelArch::Bilstm(BiLstmArch { memory: 1, hidden_units: 3, outputs })
}

#[test]
fn mlp3_mse_gradients() {
    check(mlp3(2), LossKind::Mse);
}

#[test]
fn mlp3_cel_gradients() {
    check(mlp3(4), LossKind::CategoricalCel);
}

#[test]
fn bilstm_mse_gradients() {
    check(bilstm(2), LossKind::Mse);
}

#[test]
fn bilstm_cel_gradients() {
    check(bilstm(4), LossKind::CategoricalCel);
}

#[test]
fn mlp2_and_mlp4_gradients() {
    for hidden in [vec![7, 5], vec![6, 5, 4, 3]] {
        check(ModelArch::Mlp(MlpArch { memory: 1, hidden, outputs: 2 }), LossKind::Mse);
    }
}

#[test]
fn zero_loss_gives_zero_gradient() {
    let model = Model::new(mlp3(2), 3).unwrap();
    let b = batch(12, 2, 4);
    let y = model.predict(b.x.view()).unwrap();
    let g = model.loss_and_grad(b.x.view(), Targets::Points(y.view()), LossKind::Mse, 0.0).unwrap();
    assert_eq!(g.loss, 0.0);
    assert!(g.grads.data.iter().all(|v| *v == 0.0));
}

#[test]
fn l2_gradient_is_two_lambda_w() {
    let model = Model::new(bilstm(2), 5).unwrap();
    let b = batch(12, 2, 6);
    let plain = model.loss_and_grad(b.x.view(), targets(&b, LossKind::Mse), LossKind::Mse, 0.0).unwrap();
    let reg = model.loss_and_grad(b.x.view(), targets(&b, LossKind::Mse), LossKind::Mse, 0.3).unwrap();
    for e in &model.params.entries {
        for k in e.range() {
            let expected = match e.kind {
                eqlab_core::nn::ParamKind::Weight => 2.0 * 0.3 * model.params.data[k],
                eqlab_core::nn::ParamKind::Bias => 0.0,
            };
            let diff = reg.grads.data[k] - plain.grads.data[k];
            assert!((diff - expected).abs() < 1e-12, "{}", e.name);
        }
    }
}

#[test]
fn full_batch_update_ignores_record_order() {
    let model = Model::new(mlp3(2), 7).unwrap();
    let b = batch(12, 2, 8);
    let g1 = model.loss_and_grad(b.x.view(), targets(&b, LossKind::Mse), LossKind::Mse, 0.0).unwrap();
    let perm = [3, 0, 5, 1, 4, 2];
    let xp = Array2::from_shape_fn(b.x.dim(), |(i, j)| b.x[[perm[i], j]]);
    let tp = Array2::from_shape_fn(b.points.dim(), |(i, j)| b.points[[perm[i], j]]);
    let g2 = model.loss_and_grad(xp.view(), Targets::Points(tp.view()), LossKind::Mse, 0.0).unwrap();
    for (a, c) in g1.grads.data.iter().zip(&g2.grads.data) {
        assert!((a - c).abs() < 1e-10);
    }
}
