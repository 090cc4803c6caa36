//! Loading pretrained vectors and seeding a model's word table with them.

use std::io::Cursor;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqtag::data::{build_vocabulary, LabeledCorpus, Sentence, Split};
use seqtag::embeddings::parse_pretrained_text;
use seqtag::model::{Model, ModelConfig, ModelVariant};

const VECTORS: &str = "the 0.1 0.2 0.3\nparis 0.5 -0.5 0.0\nrain 0.9 0.8 0.7\nthe 9 9 9\n";

fn main() -> seqtag::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (table, stats) = parse_pretrained_text(Cursor::new(VECTORS), Path::new("<inline>"), 3, &mut rng)?;
    println!("{} rows (UNK included), dim {}, {} duplicate lines skipped", table.vocab_size(), table.dim(), stats.duplicates);
    for token in ["the", "Paris", "snow"] {
        let (row, v) = table.lookup(token);
        println!("lookup {token:<6} -> row {row} {v:?}");
    }

    let train = LabeledCorpus::new(
        Split::Train,
        vec![Sentence::from_pairs(&["The", "rain", "in", "Paris"], &["DET", "NOUN", "ADP", "PROPN"])],
    );
    let vocab = build_vocabulary(&train, table.tokens_in_row_order());
    let config = ModelConfig { word_dim: 3, hidden: 8, ..ModelConfig::standard(ModelVariant::BlstmCnnCrf) };
    let model = Model::new(vocab, config, Some(&table), &mut rng)?;
    for word in ["Paris", "rain", "in"] {
        let row = model.vocab.word_index(word);
        println!("model row for {word:<5} = {:?}", model.params.word.row(row));
    }
    println!("{} parameters", model.param_count());
    Ok(())
}
