//! Neural sequence labeling with bidirectional LSTMs, character-level CNN
//! word features and a linear-chain CRF output layer, plus the BRNN, BLSTM
//! and BLSTM-CNN baselines, in plain deterministic f64 code.
//!
//! The pieces, bottom up:
//!
//! * [`tensor`]: dense row-major tensors, Glorot and embedding initialisers,
//!   global-norm clipping.
//! * [`data`]: CoNLL-style column files, BIO2 to BIOES, vocabularies, OOV
//!   categories.
//! * [`embeddings`]: lookup tables and pretrained vector files.
//! * [`char_cnn`], [`blstm`], [`crf`]: the layers, each with a hand-written
//!   backward pass.
//! * [`model`]: the four architectures, losses, decoding and the binary
//!   model format.
//! * [`trainer`]: minibatch SGD with momentum, decayed learning rate,
//!   clipping, dropout and best-on-dev snapshots.
//! * [`eval`]: token accuracy, entity precision/recall/F1, OOV breakdowns.
//! * [`synthetic`]: generated corpora with a learnable labelling rule.
//! * [`cli`]: the `seqtag` command line.
//!
//! Runnable examples live in `examples/`: `crf_inference`, `char_cnn`,
//! `lstm_gradient_check`, `bioes_scoring`, `embeddings`, `train_synthetic`,
//! `ablation`, `dropout`, `oov_analysis` and `save_load`.
//!
//! ```
//! use rand::SeedableRng;
//! use seqtag::data::build_vocabulary;
//! use seqtag::model::{Model, ModelConfig, ModelVariant};
//! use seqtag::synthetic::{generate, SyntheticSpec};
//!
//! let corpus = generate(&SyntheticSpec { train_sentences: 20, ..SyntheticSpec::default() });
//! let vocab = build_vocabulary(&corpus.train, std::iter::empty());
//! let config = ModelConfig { hidden: 8, word_dim: 10, ..ModelConfig::standard(ModelVariant::BlstmCnnCrf) };
//! let model = Model::new(vocab, config, None, &mut rand_chacha::ChaCha8Rng::seed_from_u64(0)).unwrap();
//! let tags = model.predict(&["pivuful", "dakment"]).unwrap();
//! assert_eq!(tags.len(), 2);
//! ```

// Index loops mirror the math in the numeric kernels.
#![allow(clippy::needless_range_loop)]

pub mod blstm;
pub mod cli;
pub mod char_cnn;
pub mod crf;
pub mod data;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod model;
pub mod synthetic;
pub mod tensor;
pub mod trainer;

pub use error::{Error, Result};
