//! The full tagger: word embeddings, optional character CNN, bidirectional
//! recurrent layer and a CRF or per-position softmax output.

mod codec;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::blstm::{bidirectional_backward, bidirectional_forward, BiCache, LstmParams, Recurrent, RnnParams};
use crate::char_cnn::{CharCnnCache, CharCnnParams};
use crate::crf::{CrfGradient, CrfParams};
use crate::data::{EncodedSentence, Vocabulary};
use crate::embeddings::{init_uniform_table, EmbeddingTable, SparseRows};
use crate::error::{Error, Result};
use crate::tensor::{logsumexp_nonempty, matvec_acc, matvec_t_acc, outer_acc, Tensor, TensorSet};

pub use codec::MAGIC;

/// The four architectures compared in the ablation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelVariant {
    /// Elman RNN in both directions, word embeddings only, softmax output.
    Brnn,
    /// LSTM in both directions, word embeddings only, softmax output.
    Blstm,
    /// BLSTM over word embeddings plus character CNN, softmax output.
    BlstmCnn,
    /// BLSTM-CNN with a CRF output layer.
    BlstmCnnCrf,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [
        ModelVariant::Brnn,
        ModelVariant::Blstm,
        ModelVariant::BlstmCnn,
        ModelVariant::BlstmCnnCrf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::Brnn => "BRNN",
            ModelVariant::Blstm => "BLSTM",
            ModelVariant::BlstmCnn => "BLSTM_CNN",
            ModelVariant::BlstmCnnCrf => "BLSTM_CNN_CRF",
        }
    }

    pub fn uses_char_cnn(self) -> bool {
        matches!(self, ModelVariant::BlstmCnn | ModelVariant::BlstmCnnCrf)
    }

    pub fn uses_crf(self) -> bool {
        self == ModelVariant::BlstmCnnCrf
    }

    pub fn uses_lstm(self) -> bool {
        self != ModelVariant::Brnn
    }

    fn code(self) -> u8 {
        match self {
            ModelVariant::Brnn => 0,
            ModelVariant::Blstm => 1,
            ModelVariant::BlstmCnn => 2,
            ModelVariant::BlstmCnnCrf => 3,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        ModelVariant::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    /// Accepts the canonical names case-insensitively, with `-` or `_`.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        ModelVariant::ALL
            .into_iter()
            .find(|v| v.name() == norm)
            .ok_or_else(|| Error::Config(format!("unknown model variant {s:?}")))
    }
}

/// Layer sizes. Character sizes are ignored by variants without the CNN.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    pub variant: ModelVariant,
    pub word_dim: usize,
    pub char_dim: usize,
    pub num_filters: usize,
    pub window: usize,
    pub hidden: usize,
}

impl ModelConfig {
    /// Published sizes: 100-d words, 30-d characters, 30 filters of width 3,
    /// 200 hidden units per direction.
    pub fn standard(variant: ModelVariant) -> Self {
        ModelConfig {
            variant,
            word_dim: 100,
            char_dim: 30,
            num_filters: 30,
            window: 3,
            hidden: 200,
        }
    }

    /// Width of the recurrent input at each position.
    pub fn input_dim(&self) -> usize {
        self.word_dim + if self.variant.uses_char_cnn() { self.num_filters } else { 0 }
    }

    fn validate(&self) -> Result<()> {
        let mut sizes = vec![("word_dim", self.word_dim), ("hidden_size", self.hidden)];
        if self.variant.uses_char_cnn() {
            sizes.extend([
                ("char_dim", self.char_dim),
                ("char_filters", self.num_filters),
                ("char_window", self.window),
            ]);
        }
        match sizes.into_iter().find(|&(_, v)| v == 0) {
            Some((name, _)) => Err(Error::Config(format!("{name} must be positive"))),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OutputLayer {
    Crf(CrfParams),
    /// `weight` is `K × 2H`, `bias` is `K`.
    Softmax { weight: Tensor, bias: Tensor },
}

impl OutputLayer {
    fn tensors(&self) -> Vec<&Tensor> {
        match self {
            OutputLayer::Crf(p) => p.tensors(),
            OutputLayer::Softmax { weight, bias } => vec![weight, bias],
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            OutputLayer::Crf(p) => p.tensors_mut(),
            OutputLayer::Softmax { weight, bias } => vec![weight, bias],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub word: EmbeddingTable,
    pub char_cnn: Option<CharCnnParams>,
    pub fwd: Recurrent,
    pub bwd: Recurrent,
    pub output: OutputLayer,
}

impl ModelParams {
    /// Every parameter tensor except the two embedding tables, in a fixed order:
    /// CNN filters and bias, forward cell, backward cell, output layer.
    pub fn dense_tensors(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        if let Some(c) = &self.char_cnn {
            out.push(&c.filters);
            out.push(&c.bias);
        }
        out.extend(self.fwd.tensors());
        out.extend(self.bwd.tensors());
        out.extend(self.output.tensors());
        out
    }

    pub fn dense_tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        if let Some(c) = &mut self.char_cnn {
            out.push(&mut c.filters);
            out.push(&mut c.bias);
        }
        out.extend(self.fwd.tensors_mut());
        out.extend(self.bwd.tensors_mut());
        out.extend(self.output.tensors_mut());
        out
    }

    /// All tensors in serialization order: word table, character table, dense.
    pub(crate) fn all_tensors(&self) -> Vec<&Tensor> {
        let mut out = vec![self.word.matrix()];
        if let Some(c) = &self.char_cnn {
            out.push(c.table.matrix());
        }
        out.extend(self.dense_tensors());
        out
    }

    pub(crate) fn all_tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![self.word.matrix_mut()];
        if let Some(CharCnnParams { table, filters, bias, .. }) = &mut self.char_cnn {
            out.push(table.matrix_mut());
            out.push(filters);
            out.push(bias);
        }
        out.extend(self.fwd.tensors_mut());
        out.extend(self.bwd.tensors_mut());
        out.extend(self.output.tensors_mut());
        out
    }
}

/// Gradient of the summed loss. `dense` lines up with
/// [`ModelParams::dense_tensors`]; embedding gradients are kept per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub dense: Vec<Tensor>,
    pub word_rows: SparseRows,
    pub char_rows: SparseRows,
}

impl Gradients {
    pub fn zeros_for(params: &ModelParams) -> Self {
        Gradients {
            dense: params.dense_tensors().into_iter().map(Tensor::zeros_like).collect(),
            word_rows: SparseRows::new(),
            char_rows: SparseRows::new(),
        }
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.dense.iter_mut().zip(&other.dense) {
            a.add_assign(b);
        }
        for (rows, more) in [(&mut self.word_rows, &other.word_rows), (&mut self.char_rows, &other.char_rows)] {
            add_rows(rows, more);
        }
    }

    pub fn norm(&self) -> f64 {
        let dense: f64 = self.dense.iter().map(Tensor::norm_sq).sum();
        let sparse: f64 = self
            .word_rows
            .values()
            .chain(self.char_rows.values())
            .flatten()
            .map(|v| v * v)
            .sum();
        (dense + sparse).sqrt()
    }

    /// Mutable views of every gradient entry, for joint clipping.
    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = self.dense.iter_mut().map(Tensor::data_mut).collect();
        out.extend(self.word_rows.values_mut().map(Vec::as_mut_slice));
        out.extend(self.char_rows.values_mut().map(Vec::as_mut_slice));
        out
    }
}

fn add_rows(rows: &mut SparseRows, more: &SparseRows) {
    for (&r, g) in more {
        let row = rows.entry(r).or_insert_with(|| vec![0.0; g.len()]);
        for (a, b) in row.iter_mut().zip(g) {
            *a += b;
        }
    }
}

fn add_row(rows: &mut SparseRows, r: usize, g: &[f64]) {
    let row = rows.entry(r).or_insert_with(|| vec![0.0; g.len()]);
    for (a, b) in row.iter_mut().zip(g) {
        *a += b;
    }
}

/// Dropout probability plus the generator for its masks. Masks are drawn
/// independently per position and per layer.
pub struct Dropout<'a, R: Rng + ?Sized> {
    pub rate: f64,
    pub rng: &'a mut R,
}

impl<R: Rng + ?Sized> Dropout<'_, R> {
    /// Inverted mask: each entry is 0 with probability `rate`, else `1/(1-rate)`.
    fn mask(&mut self, len: usize) -> Vec<f64> {
        let keep = 1.0 - self.rate;
        (0..len)
            .map(|_| if self.rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
            .collect()
    }
}

enum OutputCache {
    Crf(CrfGradient),
    /// Per-position softmax probabilities.
    Softmax(Vec<Vec<f64>>),
}

/// Everything [`Model::backward`] needs from one forward pass.
pub struct ForwardCache {
    words: Vec<usize>,
    labels: Vec<usize>,
    char_caches: Vec<CharCnnCache>,
    input_masks: Option<Vec<Vec<f64>>>,
    bi: BiCache,
    hidden: Vec<Vec<f64>>,
    output_masks: Option<Vec<Vec<f64>>>,
    output: OutputCache,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub vocab: Vocabulary,
    pub config: ModelConfig,
    pub params: ModelParams,
}

impl Model {
    /// Fresh parameters. Word rows whose word (exactly or lowercased) is in
    /// `pretrained` copy that vector; all others are uniform in `±sqrt(3/dim)`.
    /// The generator is consumed in a fixed order: word table, CNN, forward
    /// cell, backward cell, output layer.
    pub fn new<R: Rng + ?Sized>(
        vocab: Vocabulary,
        config: ModelConfig,
        pretrained: Option<&EmbeddingTable>,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let k = vocab.num_labels();
        if k == 0 {
            return Err(Error::Config("label inventory is empty".into()));
        }
        let mut word = init_uniform_table(vocab.num_words(), config.word_dim, rng);
        if let Some(table) = pretrained {
            if table.dim() != config.word_dim {
                return Err(Error::Config(format!(
                    "pretrained embeddings are {}-d but word_dim is {}",
                    table.dim(),
                    config.word_dim
                )));
            }
            for (i, w) in vocab.words().enumerate() {
                let (row, v) = table.lookup(w);
                if row != EmbeddingTable::UNK {
                    word.row_mut(i + 1).copy_from_slice(v);
                }
            }
        }
        let char_cnn = config.variant.uses_char_cnn().then(|| {
            CharCnnParams::new(vocab.num_chars(), config.char_dim, config.num_filters, config.window, rng)
        });
        let (h, d) = (config.hidden, config.input_dim());
        let cell = |rng: &mut R| {
            if config.variant.uses_lstm() {
                Recurrent::Lstm(LstmParams::new(h, d, rng))
            } else {
                Recurrent::Rnn(RnnParams::new(h, d, rng))
            }
        };
        let fwd = cell(rng);
        let bwd = cell(rng);
        let output = if config.variant.uses_crf() {
            OutputLayer::Crf(CrfParams::new(k, 2 * h, rng))
        } else {
            OutputLayer::Softmax {
                weight: Tensor::glorot(k, 2 * h, rng),
                bias: Tensor::zeros(&[k]),
            }
        };
        Ok(Model {
            vocab,
            config,
            params: ModelParams {
                word,
                char_cnn,
                fwd,
                bwd,
                output,
            },
        })
    }

    /// Same shapes as [`Model::new`], all zeros.
    pub(crate) fn zeros(vocab: Vocabulary, config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let k = vocab.num_labels();
        if k == 0 {
            return Err(Error::ModelFile("label inventory is empty".into()));
        }
        let word = EmbeddingTable::from_matrix(Tensor::zeros(&[vocab.num_words(), config.word_dim]));
        let char_cnn = config.variant.uses_char_cnn().then(|| CharCnnParams {
            table: EmbeddingTable::from_matrix(Tensor::zeros(&[vocab.num_chars(), config.char_dim])),
            filters: Tensor::zeros(&[config.num_filters, config.window * config.char_dim]),
            bias: Tensor::zeros(&[config.num_filters]),
            window: config.window,
        });
        let (h, d) = (config.hidden, config.input_dim());
        let cell = || {
            if config.variant.uses_lstm() {
                Recurrent::Lstm(LstmParams::zeros(h, d))
            } else {
                Recurrent::Rnn(RnnParams::zeros(h, d))
            }
        };
        let output = if config.variant.uses_crf() {
            OutputLayer::Crf(CrfParams::zeros(k, 2 * h))
        } else {
            OutputLayer::Softmax {
                weight: Tensor::zeros(&[k, 2 * h]),
                bias: Tensor::zeros(&[k]),
            }
        };
        Ok(Model {
            vocab,
            config,
            params: ModelParams {
                word,
                char_cnn,
                fwd: cell(),
                bwd: cell(),
                output,
            },
        })
    }

    pub fn variant(&self) -> ModelVariant {
        self.config.variant
    }

    /// Scalar parameter count, both embedding tables included.
    pub fn param_count(&self) -> usize {
        self.params.all_tensors().iter().map(|t| t.len()).sum()
    }

    /// Recurrent inputs `[word; char-rep]` per position, with CNN caches.
    fn embed<R: Rng + ?Sized>(
        &self,
        enc: &EncodedSentence,
        dropout: &mut Option<Dropout<'_, R>>,
    ) -> Result<(Vec<Vec<f64>>, Vec<CharCnnCache>)> {
        let mut xs = Vec::with_capacity(enc.len());
        let mut caches = Vec::new();
        for (t, &w) in enc.words.iter().enumerate() {
            if w >= self.params.word.vocab_size() {
                return Err(Error::Bounds {
                    index: w,
                    size: self.params.word.vocab_size(),
                    what: "word table",
                });
            }
            let mut x = self.params.word.row(w).to_vec();
            if let Some(cnn) = &self.params.char_cnn {
                let chars = &enc.chars[t];
                let mask = dropout
                    .as_mut()
                    .map(|d| d.mask(cnn.padded_len(chars.len()) * cnn.char_dim()));
                let (rep, cache) = cnn.forward(chars, mask.as_deref())?;
                x.extend(rep);
                caches.push(cache);
            }
            xs.push(x);
        }
        Ok((xs, caches))
    }

    /// Per-position features fed to the output layer.
    fn features<R: Rng + ?Sized>(
        &self,
        enc: &EncodedSentence,
        mut dropout: Option<Dropout<'_, R>>,
    ) -> Result<(Vec<Vec<f64>>, FeatureCache)> {
        if enc.is_empty() {
            return Err(Error::Domain("empty sentence".into()));
        }
        if enc.chars.len() != enc.len() {
            return Err(Error::Dimension("character lists do not match the words".into()));
        }
        let (mut xs, char_caches) = self.embed(enc, &mut dropout)?;
        let input_masks = dropout.as_mut().map(|d| apply_masks(d, &mut xs));
        let (mut hs, bi) = bidirectional_forward(&self.params.fwd, &self.params.bwd, &xs)?;
        let hidden = hs.clone();
        let output_masks = dropout.as_mut().map(|d| apply_masks(d, &mut hs));
        Ok((
            hs,
            FeatureCache {
                char_caches,
                input_masks,
                bi,
                hidden,
                output_masks,
            },
        ))
    }

    /// Negative log-likelihood of the gold labels (summed over positions for
    /// the softmax output). Pass `dropout` only in training mode.
    pub fn forward_loss<R: Rng + ?Sized>(
        &self,
        enc: &EncodedSentence,
        dropout: Option<Dropout<'_, R>>,
    ) -> Result<(f64, ForwardCache)> {
        let labels = enc
            .labels
            .clone()
            .ok_or_else(|| Error::Contract("sentence has no gold label indices".into()))?;
        if labels.len() != enc.len() {
            return Err(Error::Dimension("label count does not match the words".into()));
        }
        let (zs, fc) = self.features(enc, dropout)?;
        let (loss, output) = match &self.params.output {
            OutputLayer::Crf(crf) => {
                let g = crf.loglik_gradient(&zs, &labels)?;
                (-g.log_likelihood, OutputCache::Crf(g))
            }
            OutputLayer::Softmax { weight, bias } => {
                let k = bias.len();
                let mut loss = 0.0;
                let mut probs = Vec::with_capacity(zs.len());
                for (z, &y) in zs.iter().zip(&labels) {
                    if y >= k {
                        return Err(Error::Bounds {
                            index: y,
                            size: k,
                            what: "labels",
                        });
                    }
                    let logits = softmax_logits(weight, bias, z);
                    let lse = logsumexp_nonempty(&logits);
                    loss += lse - logits[y];
                    probs.push(logits.iter().map(|l| (l - lse).exp()).collect());
                }
                (loss, OutputCache::Softmax(probs))
            }
        };
        if !loss.is_finite() {
            return Err(Error::NonFinite("sentence loss".into()));
        }
        Ok((
            loss,
            ForwardCache {
                words: enc.words.clone(),
                labels,
                char_caches: fc.char_caches,
                input_masks: fc.input_masks,
                bi: fc.bi,
                hidden: fc.hidden,
                output_masks: fc.output_masks,
                output,
            },
        ))
    }

    /// Gradient of the loss returned by the matching [`forward_loss`](Self::forward_loss).
    pub fn backward(&self, cache: ForwardCache) -> Result<Gradients> {
        let mut grads = Gradients::zeros_for(&self.params);
        let n = cache.labels.len();
        let two_h = 2 * self.config.hidden;
        let offset = usize::from(self.params.char_cnn.is_some()) * 2;
        let fwd_len = self.params.fwd.tensors().len();
        let bwd_len = self.params.bwd.tensors().len();
        let out_start = offset + fwd_len + bwd_len;

        // ∂loss/∂z at the output of the recurrent layer (after dropout).
        let mut dz: Vec<Vec<f64>> = match cache.output {
            OutputCache::Crf(g) => {
                let mut params = g.params;
                for (dst, src) in grads.dense[out_start..].iter_mut().zip(params.tensors_mut()) {
                    src.scale(-1.0);
                    dst.add_assign(src);
                }
                g.dz.into_iter()
                    .map(|d| d.into_iter().map(|v| -v).collect())
                    .collect()
            }
            OutputCache::Softmax(probs) => {
                let OutputLayer::Softmax { weight, .. } = &self.params.output else {
                    return Err(Error::Contract("softmax cache for a CRF model".into()));
                };
                let mut dzs = Vec::with_capacity(n);
                let (gw, gb) = grads.dense[out_start..].split_at_mut(1);
                for t in 0..n {
                    let mut dlogits = probs[t].clone();
                    dlogits[cache.labels[t]] -= 1.0;
                    let z = masked(&cache.hidden[t], cache.output_masks.as_ref().map(|m| &m[t]));
                    outer_acc(gw[0].data_mut(), &dlogits, &z);
                    for (b, d) in gb[0].data_mut().iter_mut().zip(&dlogits) {
                        *b += d;
                    }
                    let mut d = vec![0.0; two_h];
                    matvec_t_acc(weight.data(), &dlogits, &mut d);
                    dzs.push(d);
                }
                dzs
            }
        };
        if let Some(masks) = &cache.output_masks {
            for (d, m) in dz.iter_mut().zip(masks) {
                mul_assign(d, m);
            }
        }

        let (gf, gb, mut dx) = bidirectional_backward(&self.params.fwd, &self.params.bwd, cache.bi, &dz)?;
        for (dst, src) in grads.dense[offset..offset + fwd_len].iter_mut().zip(gf.tensors()) {
            dst.add_assign(src);
        }
        for (dst, src) in grads.dense[offset + fwd_len..out_start].iter_mut().zip(gb.tensors()) {
            dst.add_assign(src);
        }
        if let Some(masks) = &cache.input_masks {
            for (d, m) in dx.iter_mut().zip(masks) {
                mul_assign(d, m);
            }
        }

        let wd = self.config.word_dim;
        if self.params.word.trainable {
            for (&w, d) in cache.words.iter().zip(&dx) {
                add_row(&mut grads.word_rows, w, &d[..wd]);
            }
        }
        if let Some(cnn) = &self.params.char_cnn {
            for (cc, d) in cache.char_caches.into_iter().zip(&dx) {
                let g = cnn.backward(cc, &d[wd..])?;
                grads.dense[0].add_assign(&g.filters);
                grads.dense[1].add_assign(&g.bias);
                if cnn.table.trainable {
                    add_rows(&mut grads.char_rows, &g.rows);
                }
            }
        }
        Ok(grads)
    }

    /// Loss and gradient of one sentence.
    pub fn loss_and_gradients<R: Rng + ?Sized>(
        &self,
        enc: &EncodedSentence,
        dropout: Option<Dropout<'_, R>>,
    ) -> Result<(f64, Gradients)> {
        let (loss, cache) = self.forward_loss(enc, dropout)?;
        Ok((loss, self.backward(cache)?))
    }

    /// Evaluation-mode loss (no dropout).
    pub fn loss(&self, enc: &EncodedSentence) -> Result<f64> {
        self.forward_loss::<rand::rngs::mock::StepRng>(enc, None).map(|(l, _)| l)
    }

    /// Label indices: Viterbi for the CRF, per-position argmax (ties to the
    /// lowest index) for the softmax.
    pub fn predict_indices(&self, enc: &EncodedSentence) -> Result<Vec<usize>> {
        let (zs, _) = self.features::<rand::rngs::mock::StepRng>(enc, None)?;
        match &self.params.output {
            OutputLayer::Crf(crf) => crf.viterbi_decode(&zs).map(|(path, _)| path),
            OutputLayer::Softmax { weight, bias } => Ok(zs
                .iter()
                .map(|z| {
                    let logits = softmax_logits(weight, bias, z);
                    let mut best = 0;
                    for (i, &l) in logits.iter().enumerate() {
                        if l > logits[best] {
                            best = i;
                        }
                    }
                    best
                })
                .collect()),
        }
    }

    /// Label strings for raw words.
    pub fn predict<S: AsRef<str>>(&self, words: &[S]) -> Result<Vec<String>> {
        let enc = self.vocab.encode_words(words);
        Ok(self
            .predict_indices(&enc)?
            .into_iter()
            .map(|i| self.vocab.label(i).to_string())
            .collect())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        codec::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        codec::decode(bytes)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct FeatureCache {
    char_caches: Vec<CharCnnCache>,
    input_masks: Option<Vec<Vec<f64>>>,
    bi: BiCache,
    hidden: Vec<Vec<f64>>,
    output_masks: Option<Vec<Vec<f64>>>,
}

fn apply_masks<R: Rng + ?Sized>(d: &mut Dropout<'_, R>, xs: &mut [Vec<f64>]) -> Vec<Vec<f64>> {
    xs.iter_mut()
        .map(|x| {
            let m = d.mask(x.len());
            mul_assign(x, &m);
            m
        })
        .collect()
}

fn mul_assign(x: &mut [f64], m: &[f64]) {
    for (a, b) in x.iter_mut().zip(m) {
        *a *= b;
    }
}

fn masked(x: &[f64], m: Option<&Vec<f64>>) -> Vec<f64> {
    let mut x = x.to_vec();
    if let Some(m) = m {
        mul_assign(&mut x, m);
    }
    x
}

fn softmax_logits(weight: &Tensor, bias: &Tensor, z: &[f64]) -> Vec<f64> {
    let mut logits = bias.data().to_vec();
    matvec_acc(weight.data(), z, &mut logits);
    logits
}
