//! All four architectures trained on the generated corpus with the same
//! recipe; prints the best dev accuracy of each.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqtag::data::build_vocabulary;
use seqtag::model::{Model, ModelConfig, ModelVariant};
use seqtag::synthetic::{generate, SyntheticSpec};
use seqtag::trainer::{train, TrainConfig};

fn main() -> seqtag::Result<()> {
    let seeds: Vec<u64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let seeds = if seeds.is_empty() { vec![0] } else { seeds };
    for seed in seeds {
        let corpus = generate(&SyntheticSpec { seed, ..SyntheticSpec::default() });
        let mut row = format!("seed {seed}:");
        for variant in ModelVariant::ALL {
            let vocab = build_vocabulary(&corpus.train, std::iter::empty());
            let config = ModelConfig { variant, word_dim: 20, char_dim: 15, num_filters: 20, window: 3, hidden: 32 };
            let model = Model::new(vocab, config, None, &mut ChaCha8Rng::seed_from_u64(seed))?;
            let cfg = TrainConfig { variant, seed, max_epochs: 20, ..TrainConfig::pos() };
            let out = train(model, &corpus.train, &corpus.dev, &cfg)?;
            row.push_str(&format!("  {variant} {:.4}", out.best_metric().unwrap_or(0.0)));
        }
        println!("{row}");
    }
    Ok(())
}
