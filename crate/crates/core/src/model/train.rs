use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::bce_with_logit;
use super::{Example, ModelError, TwoTowerModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 3, learning_rate: 0.0007, batch_size: 64, seed: 0, optimizer: Optimizer::adam() }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidTrainConfig(m.into()));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and >= 0");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean over training rows of the class-summed cross-entropy, measured
    /// after the epoch's updates.
    pub train_loss: f64,
    pub validation_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub initial_train_loss: f64,
    pub epochs: Vec<EpochMetrics>,
}

/// Mean over examples of the class-summed binary cross-entropy.
pub fn mean_loss(model: &TwoTowerModel, examples: &[Example]) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let total: f64 = examples
        .iter()
        .map(|e| {
            let z = model.logits(&e.content, &e.user);
            z.iter().zip(&e.labels).map(|(&z, &y)| bce_with_logit(z, y)).sum::<f64>()
        })
        .sum();
    total / examples.len() as f64
}

/// Batch-mean loss and its gradient.
pub fn loss_and_grad(model: &TwoTowerModel, batch: &[Example]) -> (f64, Vec<f64>) {
    let mut g = vec![0.0; model.n_params()];
    let w = 1.0 / batch.len().max(1) as f64;
    let loss: f64 = batch.iter().map(|e| model.accumulate(&e.content, &e.user, &e.labels, w, &mut g)).sum();
    (loss * w, g)
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

/// Minibatch training. Rows are reshuffled every epoch from a generator
/// seeded by `config.seed`, so the result is a pure function of the inputs.
pub fn train(
    model: &mut TwoTowerModel,
    train: &[Example],
    validation: &[Example],
    config: &TrainConfig,
) -> Result<TrainReport, ModelError> {
    config.validate()?;
    if train.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let n_classes = model.config().n_classes;
    if let Some(e) = train.iter().chain(validation).find(|e| e.labels.len() != n_classes) {
        return Err(ModelError::LabelWidth { got: e.labels.len(), expected: n_classes });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial_train_loss = mean_loss(model, train);
    let mut adam = AdamState { m: vec![0.0; model.n_params()], v: vec![0.0; model.n_params()], t: 0 };
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut batch = Vec::with_capacity(config.batch_size);
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train[i].clone()));
            let (loss, g) = loss_and_grad(model, &batch);
            if !loss.is_finite() {
                return Err(ModelError::NonFiniteLoss { epoch, batch: b });
            }
            step(model, &g, config, &mut adam);
        }
        let train_loss = mean_loss(model, train);
        if !train_loss.is_finite() {
            return Err(ModelError::NonFiniteLoss { epoch, batch: usize::MAX });
        }
        let validation_loss = (!validation.is_empty()).then(|| mean_loss(model, validation));
        epochs.push(EpochMetrics { epoch, train_loss, validation_loss });
    }
    Ok(TrainReport { initial_train_loss, epochs })
}

fn step(model: &mut TwoTowerModel, g: &[f64], config: &TrainConfig, adam: &mut AdamState) {
    let lr = config.learning_rate;
    if lr == 0.0 {
        return;
    }
    let p = model.params_mut();
    match config.optimizer {
        Optimizer::Sgd => {
            for (w, d) in p.iter_mut().zip(g) {
                *w -= lr * d;
            }
        }
        Optimizer::Adam { beta1, beta2, epsilon } => {
            adam.t += 1;
            let c1 = 1.0 - beta1.powi(adam.t);
            let c2 = 1.0 - beta2.powi(adam.t);
            for i in 0..p.len() {
                adam.m[i] = beta1 * adam.m[i] + (1.0 - beta1) * g[i];
                adam.v[i] = beta2 * adam.v[i] + (1.0 - beta2) * g[i] * g[i];
                p[i] -= lr * (adam.m[i] / c1) / ((adam.v[i] / c2).sqrt() + epsilon);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Parameter index where the maximum occurred.
    pub worst_param: usize,
    pub checked: usize,
}

/// Parameters compared per check; all of them when the model is smaller.
const MAX_CHECKED: usize = 3000;
/// Denominator floor so that parameters with vanishing gradient do not
/// produce huge ratios from rounding noise alone.
const REL_FLOOR: f64 = 1e-7;
/// The floor is also kept this many times above the rounding noise of a
/// central difference, `|L| * machine epsilon / e`, so that gradients
/// smaller than the noise are compared on an absolute scale.
const NOISE_MARGIN: f64 = 1e5;

/// Compares the analytic gradient of the batch-mean loss with central
/// differences `(L(w+e) - L(w-e)) / 2e`.
pub fn grad_check(model: &TwoTowerModel, batch: &[Example], epsilon: f64) -> GradCheckReport {
    let (_, g) = loss_and_grad(model, batch);
    grad_check_against(model, batch, epsilon, &g)
}

/// [`grad_check`] with a caller-supplied analytic gradient.
///
/// Checked parameters are those with a non-zero analytic gradient (up to a
/// cap, sampled with a fixed seed) plus a sample of the rest.
pub fn grad_check_against(model: &TwoTowerModel, batch: &[Example], epsilon: f64, analytic: &[f64]) -> GradCheckReport {
    assert_eq!(analytic.len(), model.n_params());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (active, idle): (Vec<usize>, Vec<usize>) = (0..model.n_params()).partition(|&i| analytic[i] != 0.0);
    let mut picked: Vec<usize> = if active.len() > MAX_CHECKED {
        index::sample(&mut rng, active.len(), MAX_CHECKED).into_iter().map(|j| active[j]).collect()
    } else {
        active
    };
    let extra = idle.len().min(200);
    picked.extend(index::sample(&mut rng, idle.len(), extra).into_iter().map(|j| idle[j]));
    picked.sort_unstable();

    let noise = mean_loss(model, batch).abs() * f64::EPSILON / epsilon;
    let floor = REL_FLOOR.max(NOISE_MARGIN * noise);
    let mut probe = model.clone();
    let mut worst = (0.0, 0);
    for &i in &picked {
        let w = probe.params[i];
        probe.params[i] = w + epsilon;
        let plus = mean_loss(&probe, batch);
        probe.params[i] = w - epsilon;
        let minus = mean_loss(&probe, batch);
        probe.params[i] = w;
        let numeric = (plus - minus) / (2.0 * epsilon);
        let a = analytic[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
        if rel > worst.0 {
            worst = (rel, i);
        }
    }
    GradCheckReport { max_relative_error: worst.0, worst_param: worst.1, checked: picked.len() }
}
