//! Trains the full model on the generated suffix corpus and prints the
//! epoch log.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqtag::data::build_vocabulary;
use seqtag::model::{Model, ModelConfig, ModelVariant};
use seqtag::synthetic::{generate, SyntheticSpec};
use seqtag::trainer::{train_with, TrainConfig};

fn main() -> seqtag::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let variant: ModelVariant = args.get(1).map_or(Ok(ModelVariant::BlstmCnnCrf), |s| s.parse())?;
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let corpus = generate(&SyntheticSpec { seed, ..SyntheticSpec::default() });
    let vocab = build_vocabulary(&corpus.train, std::iter::empty());
    let config = ModelConfig {
        variant,
        word_dim: 20,
        char_dim: 15,
        num_filters: 20,
        window: 3,
        hidden: 32,
    };
    let model = Model::new(vocab, config, None, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let train_config = TrainConfig {
        variant,
        seed,
        max_epochs: 30,
        ..TrainConfig::pos()
    };
    let start = Instant::now();
    let out = train_with(model, &corpus.train, &corpus.dev, &train_config, |r| {
        println!("{r}  ({:.1}s)", start.elapsed().as_secs_f64());
    })?;
    println!("best dev accuracy {:?} at epoch {:?}", out.best_metric(), out.best_epoch);
    Ok(())
}
