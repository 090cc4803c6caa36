//! Saving a trained model, reloading it, and detecting a corrupted file.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqtag::data::build_vocabulary;
use seqtag::model::{Model, ModelConfig, ModelVariant};
use seqtag::synthetic::{generate, SyntheticSpec};
use seqtag::trainer::{train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate(&SyntheticSpec { train_sentences: 100, ..SyntheticSpec::default() });
    let vocab = build_vocabulary(&corpus.train, std::iter::empty());
    let config = ModelConfig { word_dim: 20, char_dim: 15, num_filters: 20, hidden: 32, ..ModelConfig::standard(ModelVariant::BlstmCnnCrf) };
    let model = Model::new(vocab, config, None, &mut ChaCha8Rng::seed_from_u64(0))?;
    let out = train(model, &corpus.train, &corpus.dev, &TrainConfig { max_epochs: 3, ..TrainConfig::pos() })?;

    let path = std::env::temp_dir().join("seqtag-save-load-example.nnsl");
    out.model.save(&path)?;
    let loaded = Model::load(&path)?;
    let sentence = ["pivuful", "dakment", "gabize", "wily"];
    println!("original {:?}", out.model.predict(&sentence)?);
    println!("reloaded {:?}", loaded.predict(&sentence)?);
    assert!(loaded == out.model);

    let mut bytes = std::fs::read(&path)?;
    let mid = bytes.len() / 2;
    bytes[mid] ^= 1;
    match Model::from_bytes(&bytes) {
        Ok(_) => println!("corruption went unnoticed"),
        Err(e) => println!("flipped byte rejected: {e}"),
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
