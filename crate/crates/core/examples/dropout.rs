//! Dropout on versus off on a noisy version of the generated corpus:
//! 2000 training sentences with 20% of their labels replaced.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqtag::data::build_vocabulary;
use seqtag::model::{Model, ModelConfig, ModelVariant};
use seqtag::synthetic::{generate, SyntheticSpec};
use seqtag::trainer::{train, TrainConfig};

fn run(seed: u64, dropout: f64) -> seqtag::Result<f64> {
    let spec = SyntheticSpec {
        train_sentences: 2000,
        label_noise: 0.2,
        seed,
        ..SyntheticSpec::default()
    };
    let corpus = generate(&spec);
    let vocab = build_vocabulary(&corpus.train, std::iter::empty());
    let config = ModelConfig {
        variant: ModelVariant::BlstmCnnCrf,
        word_dim: 20,
        char_dim: 15,
        num_filters: 20,
        window: 3,
        hidden: 32,
    };
    let model = Model::new(vocab, config, None, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let train_config = TrainConfig {
        dropout,
        seed,
        max_epochs: 10,
        ..TrainConfig::pos()
    };
    let out = train(model, &corpus.train, &corpus.dev, &train_config)?;
    Ok(out.best_metric().unwrap_or(0.0))
}

fn main() -> seqtag::Result<()> {
    let seeds: Vec<u64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let seeds = if seeds.is_empty() { vec![0, 1, 2] } else { seeds };
    for seed in seeds {
        let on = run(seed, 0.5)?;
        let off = run(seed, 0.0)?;
        println!("seed {seed}: dropout on {on:.4}  off {off:.4}");
    }
    Ok(())
}
