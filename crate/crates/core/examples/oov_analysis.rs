//! Accuracy split by whether each dev word was seen in training and/or has
//! a pretrained vector. Here the "embedding vocabulary" is every other word
//! of the generated vocabulary.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqtag::data::build_vocabulary;
use seqtag::eval::{oov_breakdown, Metric};
use seqtag::model::{Model, ModelConfig, ModelVariant};
use seqtag::synthetic::{generate, SyntheticSpec};
use seqtag::trainer::{predict_corpus, train, TrainConfig};

fn main() -> seqtag::Result<()> {
    let corpus = generate(&SyntheticSpec::default());
    let train_vocab = corpus.train.word_set();
    let emb_vocab: HashSet<String> = corpus.vocabulary.iter().step_by(2).cloned().collect();
    for variant in [ModelVariant::Blstm, ModelVariant::BlstmCnnCrf] {
        let vocab = build_vocabulary(&corpus.train, std::iter::empty());
        let config = ModelConfig { variant, word_dim: 20, char_dim: 15, num_filters: 20, window: 3, hidden: 32 };
        let model = Model::new(vocab, config, None, &mut ChaCha8Rng::seed_from_u64(0))?;
        let cfg = TrainConfig { variant, max_epochs: 10, ..TrainConfig::pos() };
        let out = train(model, &corpus.train, &corpus.dev, &cfg)?;
        let preds = predict_corpus(&out.model, &corpus.dev)?;
        let b = oov_breakdown(&corpus.dev, &preds, &train_vocab, &emb_vocab, Metric::Accuracy)?;
        println!("{variant}\n{}", b.to_table());
    }
    Ok(())
}
