//! Mini-batch SGD with classical momentum, per-epoch learning-rate decay,
//! global gradient clipping and best-on-dev snapshotting.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{EncodedSentence, LabeledCorpus};
use crate::embeddings::SparseRows;
use crate::error::{Error, Result};
use crate::eval::{corpus_metric, Metric};
use crate::model::{Dropout, Gradients, Model, ModelParams, ModelVariant};
use crate::tensor::{global_norm_clip, Tensor};

/// RNG stream used for the per-epoch shuffle. Stream 0 is left to the caller
/// for parameter initialisation.
pub const SHUFFLE_STREAM: u64 = 1;
/// RNG stream used for dropout masks.
pub const DROPOUT_STREAM: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub eta0: f64,
    /// Learning-rate decay per completed epoch.
    pub rho: f64,
    pub momentum: f64,
    pub batch_size: usize,
    /// Global L2 norm threshold; `f64::INFINITY` disables clipping.
    pub clip: f64,
    pub dropout: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub variant: ModelVariant,
    pub metric: Metric,
}

impl TrainConfig {
    /// POS tagging recipe: η₀ = 0.01, scored by accuracy.
    pub fn pos() -> Self {
        TrainConfig {
            eta0: 0.01,
            rho: 0.05,
            momentum: 0.9,
            batch_size: 10,
            clip: 5.0,
            dropout: 0.5,
            max_epochs: 50,
            seed: 1,
            variant: ModelVariant::BlstmCnnCrf,
            metric: Metric::Accuracy,
        }
    }

    /// NER recipe: η₀ = 0.015, scored by entity F1.
    pub fn ner() -> Self {
        TrainConfig {
            eta0: 0.015,
            metric: Metric::EntityF1,
            ..Self::pos()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Config(format!("{what} is out of range: {v}")));
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return bad("eta0", self.eta0);
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return bad("rho", self.rho);
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum", self.momentum);
        }
        // Written negated so that NaN is rejected.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.clip > 0.0) {
            return bad("clip", self.clip);
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout", self.dropout);
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// `η_t = η₀ / (1 + ρ t)` after `t` completed epochs.
pub fn lr_at_epoch(eta0: f64, rho: f64, t: usize) -> f64 {
    eta0 / (1.0 + rho * t as f64)
}

/// Momentum state. Dense entries mirror [`ModelParams::dense_tensors`];
/// embedding rows get a velocity the first time they receive gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Velocity {
    pub dense: Vec<Tensor>,
    pub word_rows: SparseRows,
    pub char_rows: SparseRows,
}

impl Velocity {
    pub fn zeros_for(params: &ModelParams) -> Self {
        Velocity {
            dense: params.dense_tensors().into_iter().map(Tensor::zeros_like).collect(),
            word_rows: SparseRows::new(),
            char_rows: SparseRows::new(),
        }
    }
}

/// `v ← momentum·v − lr·g; θ ← θ + v` for every dense entry and for every
/// embedding row present in `grads`. Rows absent from `grads` keep both
/// their values and their velocity.
pub fn sgd_momentum_step(
    params: &mut ModelParams,
    grads: &Gradients,
    velocity: &mut Velocity,
    lr: f64,
    momentum: f64,
) -> Result<()> {
    let mut dense = params.dense_tensors_mut();
    if dense.len() != grads.dense.len() || dense.len() != velocity.dense.len() {
        return Err(Error::Dimension("gradient and parameter sets differ".into()));
    }
    for ((p, g), v) in dense.iter_mut().zip(&grads.dense).zip(&mut velocity.dense) {
        if p.shape() != g.shape() || p.shape() != v.shape() {
            return Err(Error::Dimension(format!(
                "gradient shape {:?} for parameter shape {:?}",
                g.shape(),
                p.shape()
            )));
        }
        step(p.data_mut(), g.data(), v.data_mut(), lr, momentum);
    }
    drop(dense);
    step_rows(params.word.matrix_mut(), &grads.word_rows, &mut velocity.word_rows, lr, momentum)?;
    if let Some(cnn) = &mut params.char_cnn {
        step_rows(cnn.table.matrix_mut(), &grads.char_rows, &mut velocity.char_rows, lr, momentum)?;
    } else if !grads.char_rows.is_empty() {
        return Err(Error::Dimension("character gradients for a model without a CNN".into()));
    }
    Ok(())
}

fn step(theta: &mut [f64], g: &[f64], v: &mut [f64], lr: f64, momentum: f64) {
    for ((t, g), v) in theta.iter_mut().zip(g).zip(v) {
        *v = momentum * *v - lr * g;
        *t += *v;
    }
}

fn step_rows(table: &mut Tensor, grads: &SparseRows, velocity: &mut SparseRows, lr: f64, momentum: f64) -> Result<()> {
    for (&r, g) in grads {
        if r >= table.rows() || g.len() != table.row_len() {
            return Err(Error::Bounds {
                index: r,
                size: table.rows(),
                what: "embedding gradient rows",
            });
        }
        let v = velocity.entry(r).or_insert_with(|| vec![0.0; g.len()]);
        step(table.row_mut(r), g, v, lr, momentum);
    }
    Ok(())
}

/// One line of the training log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub lr: f64,
    /// Sum of the sentence losses seen during the epoch (train mode).
    pub train_loss: f64,
    pub dev_metric: f64,
    pub best_so_far: f64,
}

impl fmt::Display for EpochRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}, {}, {}, {}, {}",
            self.epoch, self.lr, self.train_loss, self.dev_metric, self.best_so_far
        )
    }
}

pub struct TrainOutcome {
    /// Parameters of the best dev epoch (the initial model if no epoch ran).
    pub model: Model,
    pub log: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
}

impl TrainOutcome {
    pub fn best_metric(&self) -> Option<f64> {
        self.log.last().map(|r| r.best_so_far)
    }
}

/// Predicted label strings for every sentence of `corpus`.
pub fn predict_corpus(model: &Model, corpus: &LabeledCorpus) -> Result<Vec<Vec<String>>> {
    corpus
        .sentences
        .iter()
        .map(|s| {
            let words: Vec<&str> = s.surfaces().collect();
            model.predict(&words)
        })
        .collect()
}

/// Corpus-level `metric` of `model` against the gold labels of `corpus`.
pub fn evaluate(model: &Model, corpus: &LabeledCorpus, metric: Metric) -> Result<f64> {
    let pred = predict_corpus(model, corpus)?;
    let gold: Vec<Vec<&str>> = corpus.sentences.iter().map(|s| s.labels()).collect();
    corpus_metric(metric, &gold, &pred)
}

pub fn train(model: Model, train: &LabeledCorpus, dev: &LabeledCorpus, config: &TrainConfig) -> Result<TrainOutcome> {
    train_with(model, train, dev, config, |_| {})
}

/// Like [`train`], calling `on_epoch` after each epoch's record is final.
pub fn train_with<F: FnMut(&EpochRecord)>(
    mut model: Model,
    train: &LabeledCorpus,
    dev: &LabeledCorpus,
    config: &TrainConfig,
    mut on_epoch: F,
) -> Result<TrainOutcome> {
    config.validate()?;
    if model.variant() != config.variant {
        return Err(Error::Contract(format!(
            "model is {} but the config asks for {}",
            model.variant(),
            config.variant
        )));
    }
    if train.sentences.is_empty() {
        return Err(Error::EmptyCorpus("<train>".into()));
    }
    if dev.sentences.is_empty() {
        return Err(Error::EmptyCorpus("<dev>".into()));
    }
    let encoded: Vec<EncodedSentence> = train
        .sentences
        .iter()
        .map(|s| model.vocab.encode(s))
        .collect();
    if encoded.iter().any(|e| e.labels.is_none()) {
        return Err(Error::Contract("training labels missing from the model's label inventory".into()));
    }

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(SHUFFLE_STREAM);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(config.seed);
    dropout_rng.set_stream(DROPOUT_STREAM);

    let mut velocity = Velocity::zeros_for(&model.params);
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut log = Vec::with_capacity(config.max_epochs);
    let mut best: Option<(usize, f64, ModelParams)> = None;

    for t in 0..config.max_epochs {
        let lr = lr_at_epoch(config.eta0, config.rho, t);
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grads = Gradients::zeros_for(&model.params);
            for &i in batch {
                let dropout = (config.dropout > 0.0).then_some(Dropout {
                    rate: config.dropout,
                    rng: &mut dropout_rng,
                });
                let (loss, g) = model.loss_and_gradients(&encoded[i], dropout)?;
                epoch_loss += loss;
                grads.accumulate(&g);
            }
            global_norm_clip(&mut grads.slices_mut(), config.clip);
            sgd_momentum_step(&mut model.params, &grads, &mut velocity, lr, config.momentum)?;
        }
        let dev_metric = evaluate(&model, dev, config.metric)?;
        if best.as_ref().is_none_or(|(_, m, _)| dev_metric > *m) {
            best = Some((t + 1, dev_metric, model.params.clone()));
        }
        let record = EpochRecord {
            epoch: t + 1,
            lr,
            train_loss: epoch_loss,
            dev_metric,
            best_so_far: best.as_ref().map_or(dev_metric, |(_, m, _)| *m),
        };
        log::info!("{record}");
        on_epoch(&record);
        log.push(record);
    }

    let best_epoch = best.as_ref().map(|(e, _, _)| *e);
    if let Some((_, _, params)) = best {
        model.params = params;
    }
    Ok(TrainOutcome {
        model,
        log,
        best_epoch,
    })
}
