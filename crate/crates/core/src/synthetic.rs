//! Generated POS-like corpora whose labels follow from each word's suffix
//! plus one transition rule, for convergence and ablation runs.
//!
//! Suffix classes: `-ion`/`-ment` NOUN, `-ize`/`-ate` VERB, `-ous`/`-ful`
//! ADJ, `-ly` ADV. The suffix `-er` is ADJ, except directly after an ADJ
//! where it is NOUN. ADJ never follows ADJ: unconditional ADJ words are
//! redrawn in that position. Dev sentences draw from the full vocabulary,
//! training sentences from a subset, so dev contains unseen words whose
//! label is recoverable only from their characters.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{LabeledCorpus, Sentence, Split};

pub const LABELS: [&str; 4] = ["NOUN", "VERB", "ADJ", "ADV"];

const STEM_LETTERS: &[u8] = b"bdgkpvwaiu";
const SUFFIXES: [&str; 8] = ["ion", "ment", "ize", "ate", "ous", "ful", "ly", "er"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub num_words: usize,
    /// Words available to training sentences (a prefix of the shuffled vocabulary).
    pub train_words: usize,
    pub train_sentences: usize,
    pub dev_sentences: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Fraction of training tokens whose label is replaced by a different one.
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_words: 200,
            train_words: 150,
            train_sentences: 500,
            dev_sentences: 100,
            min_len: 5,
            max_len: 12,
            label_noise: 0.0,
            seed: 0,
        }
    }
}

pub struct SyntheticCorpus {
    pub train: LabeledCorpus,
    pub dev: LabeledCorpus,
    pub vocabulary: Vec<String>,
}

/// Label of `word` given the label of the preceding token.
pub fn label_of(word: &str, prev: Option<&str>) -> &'static str {
    let suffix = SUFFIXES
        .iter()
        .find(|s| word.ends_with(*s))
        .expect("synthetic word without a known suffix");
    match *suffix {
        "ion" | "ment" => "NOUN",
        "ize" | "ate" => "VERB",
        "ous" | "ful" => "ADJ",
        "ly" => "ADV",
        _ if prev == Some("ADJ") => "NOUN",
        _ => "ADJ",
    }
}

fn make_vocabulary<R: Rng>(n: usize, rng: &mut R) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut words = Vec::with_capacity(n);
    while words.len() < n {
        let suffix = SUFFIXES[words.len() % SUFFIXES.len()];
        let len = rng.gen_range(2..=5);
        let stem: String = (0..len)
            .map(|_| *STEM_LETTERS.choose(rng).expect("letters") as char)
            .collect();
        let word = stem + suffix;
        if seen.insert(word.clone()) {
            words.push(word);
        }
    }
    words.shuffle(rng);
    words
}

fn make_sentence<R: Rng>(pool: &[String], spec: &SyntheticSpec, rng: &mut R) -> (Vec<String>, Vec<String>) {
    let len = rng.gen_range(spec.min_len..=spec.max_len);
    let mut words: Vec<String> = Vec::with_capacity(len);
    let mut labels: Vec<String> = Vec::with_capacity(len);
    while words.len() < len {
        let w = pool.choose(rng).expect("non-empty pool");
        let prev = labels.last().map(String::as_str);
        let label = label_of(w, prev);
        if prev == Some("ADJ") && label == "ADJ" {
            continue;
        }
        words.push(w.clone());
        labels.push(label.to_string());
    }
    (words, labels)
}

pub fn generate(spec: &SyntheticSpec) -> SyntheticCorpus {
    assert!(spec.train_words >= 1 && spec.train_words <= spec.num_words);
    assert!(spec.min_len >= 1 && spec.min_len <= spec.max_len);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vocabulary = make_vocabulary(spec.num_words, &mut rng);
    let train_pool = &vocabulary[..spec.train_words];

    let mut train = Vec::with_capacity(spec.train_sentences);
    for _ in 0..spec.train_sentences {
        let (words, mut labels) = make_sentence(train_pool, spec, &mut rng);
        for l in &mut labels {
            if rng.gen::<f64>() < spec.label_noise {
                let others: Vec<&str> = LABELS.iter().copied().filter(|x| x != l).collect();
                *l = others.choose(&mut rng).expect("other labels").to_string();
            }
        }
        train.push(Sentence::from_pairs(&words, &labels));
    }
    let dev = (0..spec.dev_sentences)
        .map(|_| {
            let (w, l) = make_sentence(&vocabulary, spec, &mut rng);
            Sentence::from_pairs(&w, &l)
        })
        .collect();
    SyntheticCorpus {
        train: LabeledCorpus::new(Split::Train, train),
        dev: LabeledCorpus::new(Split::Dev, dev),
        vocabulary,
    }
}
