//! Column-formatted corpora, vocabularies, the BIO2 → BIOES conversion and
//! the IV/OOTV/OOEV/OOBV word partition.
//!
//! Token surfaces are stored exactly as they appear in the input file: no
//! lowercasing, digit folding or any other normalisation happens here.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use indexmap::IndexSet;

use crate::error::{Error, Result};

/// Which part of a data set a corpus was read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Split {
    #[default]
    Train,
    Dev,
    Test,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub label: String,
}

impl Token {
    pub fn new(surface: impl Into<String>, label: impl Into<String>) -> Self {
        Token {
            surface: surface.into(),
            label: label.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    /// Builds a sentence from parallel word and label slices.
    pub fn from_pairs<S: AsRef<str>, L: AsRef<str>>(words: &[S], labels: &[L]) -> Self {
        assert_eq!(words.len(), labels.len());
        Sentence {
            tokens: words
                .iter()
                .zip(labels)
                .map(|(w, l)| Token::new(w.as_ref(), l.as_ref()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    pub fn labels(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.label.as_str()).collect()
    }
}

/// Sentences of one split together with the label inventory in
/// first-appearance order.
#[derive(Clone, Debug, Default)]
pub struct LabeledCorpus {
    pub split: Split,
    pub sentences: Vec<Sentence>,
    label_inventory: IndexSet<String>,
}

impl LabeledCorpus {
    pub fn new(split: Split, sentences: Vec<Sentence>) -> Self {
        let mut label_inventory = IndexSet::new();
        for s in &sentences {
            for t in &s.tokens {
                if !label_inventory.contains(&t.label) {
                    label_inventory.insert(t.label.clone());
                }
            }
        }
        LabeledCorpus {
            split,
            sentences,
            label_inventory,
        }
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = split;
        self
    }

    pub fn label_inventory(&self) -> &IndexSet<String> {
        &self.label_inventory
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Set of every token surface in the corpus.
    pub fn word_set(&self) -> HashSet<String> {
        self.sentences
            .iter()
            .flat_map(|s| s.tokens.iter().map(|t| t.surface.clone()))
            .collect()
    }

    /// Applies `f` to every sentence's label sequence and rebuilds the inventory.
    pub fn map_labels<F>(self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[&str]) -> Result<Vec<String>>,
    {
        let split = self.split;
        let mut out = Vec::with_capacity(self.sentences.len());
        for s in self.sentences {
            let labels = f(&s.labels())?;
            let tokens = s
                .tokens
                .into_iter()
                .zip(labels)
                .map(|(t, label)| Token { label, ..t })
                .collect();
            out.push(Sentence { tokens });
        }
        Ok(LabeledCorpus::new(split, out))
    }
}

/// Column selection for the column reader. `label: None` means "last column".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[derive(Default)]
pub struct Columns {
    pub word: usize,
    pub label: Option<usize>,
}


pub(crate) const DOCSTART: &str = "-DOCSTART-";

/// Reads a CoNLL-style column file: whitespace-separated columns, one token
/// per line, blank lines between sentences, `-DOCSTART-` lines skipped.
pub fn read_column_corpus(path: &Path, word_col: usize, label_col: usize) -> Result<LabeledCorpus> {
    read_column_corpus_with(
        path,
        Columns {
            word: word_col,
            label: Some(label_col),
        },
    )
}

/// [`read_column_corpus`] with a [`Columns`] selection.
pub fn read_column_corpus_with(path: &Path, columns: Columns) -> Result<LabeledCorpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_column_corpus(BufReader::new(file), path, columns)
}

/// Parses column-formatted text from any reader; `source` is used in error messages.
pub fn parse_column_corpus<R: BufRead>(
    reader: R,
    source: &Path,
    columns: Columns,
) -> Result<LabeledCorpus> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            if !current.is_empty() {
                sentences.push(Sentence::new(std::mem::take(&mut current)));
            }
            continue;
        }
        if fields[0].starts_with(DOCSTART) {
            if !current.is_empty() {
                sentences.push(Sentence::new(std::mem::take(&mut current)));
            }
            continue;
        }
        let label_col = columns.label.unwrap_or(fields.len() - 1);
        let needed = columns.word.max(label_col) + 1;
        if fields.len() < needed {
            return Err(Error::Parse {
                path: source.to_path_buf(),
                line: i + 1,
                message: format!("expected at least {needed} columns, found {}", fields.len()),
            });
        }
        current.push(Token::new(fields[columns.word], fields[label_col]));
    }
    if !current.is_empty() {
        sentences.push(Sentence::new(current));
    }
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus(source.to_path_buf()));
    }
    Ok(LabeledCorpus::new(Split::Train, sentences))
}

/// Writes `surface label` lines with a blank line after each sentence.
pub fn write_column_corpus<W: Write>(corpus: &LabeledCorpus, mut out: W) -> std::io::Result<()> {
    for s in &corpus.sentences {
        for t in &s.tokens {
            writeln!(out, "{} {}", t.surface, t.label)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn split_tag(label: &str) -> Option<(&str, &str)> {
    label.split_once('-')
}

/// Converts a valid BIO2 label sequence to BIOES.
///
/// `B-X` followed by anything other than `I-X` becomes `S-X`; an `I-X` that
/// ends its entity becomes `E-X`.
pub fn bio2_to_bioes<S: AsRef<str>>(labels: &[S]) -> Result<Vec<String>> {
    let mut open: Option<&str> = None;
    for (position, label) in labels.iter().enumerate() {
        let label = label.as_ref();
        let err = |message: &str| Error::Scheme {
            position,
            label: label.to_string(),
            message: message.to_string(),
        };
        if label == "O" {
            open = None;
            continue;
        }
        match split_tag(label) {
            Some(("B", ty)) if !ty.is_empty() => open = Some(ty),
            Some(("I", ty)) if !ty.is_empty() => {
                if open != Some(ty) {
                    return Err(err("I- tag does not continue an entity of the same type"));
                }
            }
            _ => return Err(err("expected O, B-<type> or I-<type>")),
        }
    }

    let mut out = Vec::with_capacity(labels.len());
    for (i, label) in labels.iter().enumerate() {
        let label = label.as_ref();
        if label == "O" {
            out.push(label.to_string());
            continue;
        }
        let (prefix, ty) = split_tag(label).expect("validated above");
        let continues = labels
            .get(i + 1)
            .and_then(|next| split_tag(next.as_ref()))
            .is_some_and(|(p, t)| p == "I" && t == ty);
        let new_prefix = match (prefix, continues) {
            ("B", true) => "B",
            ("B", false) => "S",
            ("I", true) => "I",
            _ => "E",
        };
        out.push(format!("{new_prefix}-{ty}"));
    }
    Ok(out)
}

/// Word-level membership category with respect to a training vocabulary and
/// a pretrained-embedding vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OovCategory {
    /// In both vocabularies.
    Iv,
    /// Out of the training vocabulary only.
    Ootv,
    /// Out of the embedding vocabulary only.
    Ooev,
    /// Out of both.
    Oobv,
}

impl OovCategory {
    pub const ALL: [OovCategory; 4] = [
        OovCategory::Iv,
        OovCategory::Ootv,
        OovCategory::Ooev,
        OovCategory::Oobv,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            OovCategory::Iv => "IV",
            OovCategory::Ootv => "OOTV",
            OovCategory::Ooev => "OOEV",
            OovCategory::Oobv => "OOBV",
        }
    }

    fn from_misses(not_in_train: bool, not_in_emb: bool) -> Self {
        match (not_in_train, not_in_emb) {
            (false, false) => OovCategory::Iv,
            (true, false) => OovCategory::Ootv,
            (false, true) => OovCategory::Ooev,
            (true, true) => OovCategory::Oobv,
        }
    }
}

impl fmt::Display for OovCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn classify_word_oov(
    word: &str,
    train_vocab: &HashSet<String>,
    emb_vocab: &HashSet<String>,
) -> OovCategory {
    OovCategory::from_misses(!train_vocab.contains(word), !emb_vocab.contains(word))
}

/// Entity-level category: OOBV when at least one word is missing from the
/// training vocabulary and at least one (possibly different) word is
/// missing from the embedding vocabulary; the other categories follow the
/// same pattern.
pub fn classify_entity_oov<S: AsRef<str>>(
    words: &[S],
    train_vocab: &HashSet<String>,
    emb_vocab: &HashSet<String>,
) -> OovCategory {
    debug_assert!(!words.is_empty());
    let not_in_train = words.iter().any(|w| !train_vocab.contains(w.as_ref()));
    let not_in_emb = words.iter().any(|w| !emb_vocab.contains(w.as_ref()));
    OovCategory::from_misses(not_in_train, not_in_emb)
}

/// Index maps for words, characters and labels.
///
/// Reserved entries: word 0 is UNK; char 0 is PAD and char 1 is UNK; the
/// START label has index `num_labels()` and is never produced as output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: IndexSet<String>,
    chars: IndexSet<char>,
    labels: IndexSet<String>,
}

/// A sentence mapped to vocabulary indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedSentence {
    pub words: Vec<usize>,
    pub chars: Vec<Vec<usize>>,
    /// `None` when any gold label is missing from the label inventory.
    pub labels: Option<Vec<usize>>,
}

impl EncodedSentence {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Vocabulary {
    pub const UNK_WORD: usize = 0;
    pub const PAD_CHAR: usize = 0;
    pub const UNK_CHAR: usize = 1;
    const WORD_OFFSET: usize = 1;
    const CHAR_OFFSET: usize = 2;

    /// Rebuilds a vocabulary from its listings (reserved entries excluded).
    pub fn from_parts(
        words: impl IntoIterator<Item = String>,
        chars: impl IntoIterator<Item = char>,
        labels: impl IntoIterator<Item = String>,
    ) -> Self {
        Vocabulary {
            words: words.into_iter().collect(),
            chars: chars.into_iter().collect(),
            labels: labels.into_iter().collect(),
        }
    }

    /// Number of word rows, UNK included.
    pub fn num_words(&self) -> usize {
        self.words.len() + Self::WORD_OFFSET
    }

    /// Number of character rows, PAD and UNK included.
    pub fn num_chars(&self) -> usize {
        self.chars.len() + Self::CHAR_OFFSET
    }

    /// Number of output labels (START excluded).
    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn start_label(&self) -> usize {
        self.labels.len()
    }

    /// Non-reserved words in index order (index = position + 1).
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.chars.iter().copied()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    /// Exact index of `word`, if it has its own row.
    pub fn word_index_exact(&self, word: &str) -> Option<usize> {
        self.words.get_index_of(word).map(|i| i + Self::WORD_OFFSET)
    }

    /// Exact match, then lowercase match, then UNK.
    pub fn word_index(&self, word: &str) -> usize {
        self.word_index_exact(word)
            .or_else(|| self.word_index_exact(&word.to_lowercase()))
            .unwrap_or(Self::UNK_WORD)
    }

    /// Word string of a row (`None` for UNK).
    pub fn word(&self, index: usize) -> Option<&str> {
        index
            .checked_sub(Self::WORD_OFFSET)
            .and_then(|i| self.words.get_index(i))
            .map(String::as_str)
    }

    pub fn char_index(&self, c: char) -> usize {
        self.chars
            .get_index_of(&c)
            .map_or(Self::UNK_CHAR, |i| i + Self::CHAR_OFFSET)
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.get_index_of(label)
    }

    /// Label string of an output index.
    ///
    /// # Panics
    ///
    /// Panics if `index >= num_labels()`.
    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn encode_words<S: AsRef<str>>(&self, words: &[S]) -> EncodedSentence {
        EncodedSentence {
            words: words.iter().map(|w| self.word_index(w.as_ref())).collect(),
            chars: words
                .iter()
                .map(|w| w.as_ref().chars().map(|c| self.char_index(c)).collect())
                .collect(),
            labels: None,
        }
    }

    pub fn encode(&self, sentence: &Sentence) -> EncodedSentence {
        let surfaces: Vec<&str> = sentence.surfaces().collect();
        let mut enc = self.encode_words(&surfaces);
        enc.labels = sentence
            .tokens
            .iter()
            .map(|t| self.label_index(&t.label))
            .collect();
        enc
    }
}

/// Builds the vocabulary from the training corpus plus the pretrained
/// embedding vocabulary, so that words seen only in the embeddings still get
/// their pretrained rows. Characters and labels come from training data only.
pub fn build_vocabulary<'a, I>(train: &LabeledCorpus, embedding_words: I) -> Vocabulary
where
    I: IntoIterator<Item = &'a str>,
{
    let mut words = IndexSet::new();
    let mut chars = IndexSet::new();
    for s in &train.sentences {
        for t in &s.tokens {
            if !words.contains(&t.surface) {
                words.insert(t.surface.clone());
            }
            chars.extend(t.surface.chars());
        }
    }
    for w in embedding_words {
        if !words.contains(w) {
            words.insert(w.to_string());
        }
    }
    Vocabulary {
        words,
        chars,
        labels: train.label_inventory().clone(),
    }
}

/// Path placeholder used in errors for in-memory input.
#[cfg(test)]
pub(crate) fn memory_source() -> std::path::PathBuf {
    std::path::PathBuf::from("<input>")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<LabeledCorpus> {
        parse_column_corpus(Cursor::new(text), &memory_source(), Columns::default())
    }

    fn set(words: &[&str]) -> HashSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    const FIXTURE: &str = "-DOCSTART- O\n\nEU B-ORG\nrejects O\nGerman B-MISC\ncall O\n\n\
Peter B-PER\nBlackburn I-PER\n\nBRUSSELS B-LOC\n1996-08-22 O\n";

    #[test]
    fn reads_one_sentence() {
        let c = parse("EU B-ORG\nrejects O\n\n").unwrap();
        assert_eq!(c.sentences.len(), 1);
        assert_eq!(c.sentences[0].tokens[1], Token::new("rejects", "O"));
    }

    #[test]
    fn docstart_only_is_empty() {
        assert!(matches!(
            parse("-DOCSTART- O\n\n-DOCSTART- O\n"),
            Err(Error::EmptyCorpus(_))
        ));
    }

    #[test]
    fn fixture_counts() {
        let c = parse(FIXTURE).unwrap();
        // Hand count: 4 + 2 + 2 tokens.
        assert_eq!(c.sentences.len(), 3);
        assert_eq!(c.num_tokens(), 8);
        let inv: Vec<&str> = c.label_inventory().iter().map(String::as_str).collect();
        assert_eq!(inv, ["B-ORG", "O", "B-MISC", "B-PER", "I-PER", "B-LOC"]);
    }

    #[test]
    fn ragged_line_reports_line_number() {
        let text = "a b c\nx y z\nshort\n";
        let err = parse_column_corpus(
            Cursor::new(text),
            &memory_source(),
            Columns {
                word: 0,
                label: Some(2),
            },
        )
        .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn explicit_columns() {
        let c = parse_column_corpus(
            Cursor::new("The DT B-NP O\n"),
            &memory_source(),
            Columns {
                word: 0,
                label: Some(1),
            },
        )
        .unwrap();
        assert_eq!(c.sentences[0].tokens[0].label, "DT");
    }

    #[test]
    fn surfaces_are_verbatim_through_write() {
        let c = parse(FIXTURE).unwrap();
        let mut buf = Vec::new();
        write_column_corpus(&c, &mut buf).unwrap();
        let again = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(c.sentences, again.sentences);
    }

    #[test]
    fn bioes_conversion_golden() {
        assert_eq!(
            bio2_to_bioes(&["B-PER", "I-PER", "O"]).unwrap(),
            ["B-PER", "E-PER", "O"]
        );
        assert_eq!(bio2_to_bioes(&["B-ORG"]).unwrap(), ["S-ORG"]);
        assert_eq!(
            bio2_to_bioes(&["O", "B-LOC", "I-LOC", "I-LOC", "B-PER"]).unwrap(),
            ["O", "B-LOC", "I-LOC", "E-LOC", "S-PER"]
        );
    }

    #[test]
    fn bioes_conversion_rejects_invalid() {
        let err = bio2_to_bioes(&["B-PER", "I-ORG"]).unwrap_err();
        assert!(matches!(err, Error::Scheme { position: 1, .. }));
        assert!(matches!(
            bio2_to_bioes(&["O", "I-PER"]).unwrap_err(),
            Error::Scheme { position: 1, .. }
        ));
        assert!(bio2_to_bioes(&["NN"]).is_err());
    }

    #[test]
    fn vocabulary_union() {
        let train = LabeledCorpus::new(Split::Train, vec![Sentence::from_pairs(&["a", "b"], &["X", "Y"])]);
        let v = build_vocabulary(&train, ["b", "c"]);
        assert_eq!(v.words().collect::<Vec<_>>(), ["a", "b", "c"]);
        assert_eq!(v.num_words(), 4);
        let v = build_vocabulary(&train, std::iter::empty());
        assert_eq!(v.num_words(), 3);
        assert_eq!(v.word_index("zzz"), Vocabulary::UNK_WORD);
        assert_eq!(v.start_label(), 2);
    }

    #[test]
    fn vocabulary_chars_from_fixture() {
        let c = parse("Ab B\nba O\n\nc! O\n").unwrap();
        let v = build_vocabulary(&c, ["xyz"]);
        // Hand enumeration in first-appearance order.
        assert_eq!(v.chars().collect::<String>(), "Abac!");
        assert_eq!(v.char_index('z'), Vocabulary::UNK_CHAR);
        assert_eq!(v.num_chars(), 7);
    }

    #[test]
    fn lowercase_fallback_in_word_index() {
        let train = LabeledCorpus::new(Split::Train, vec![Sentence::from_pairs(&["x"], &["O"])]);
        let v = build_vocabulary(&train, ["the"]);
        assert_eq!(v.word_index("The"), v.word_index_exact("the").unwrap());
    }

    #[test]
    fn word_categories() {
        let train = set(&["a", "b"]);
        let emb = set(&["b", "c"]);
        assert_eq!(classify_word_oov("b", &train, &emb), OovCategory::Iv);
        assert_eq!(classify_word_oov("c", &train, &emb), OovCategory::Ootv);
        assert_eq!(classify_word_oov("a", &train, &emb), OovCategory::Ooev);
        assert_eq!(classify_word_oov("d", &train, &emb), OovCategory::Oobv);
    }

    #[test]
    fn entity_categories() {
        let train = set(&["a", "b"]);
        let emb = set(&["b", "c"]);
        assert_eq!(classify_entity_oov(&["b", "b"], &train, &emb), OovCategory::Iv);
        assert_eq!(classify_entity_oov(&["d", "b"], &train, &emb), OovCategory::Oobv);
        assert_eq!(classify_entity_oov(&["c", "b"], &train, &emb), OovCategory::Ootv);
        assert_eq!(classify_entity_oov(&["a", "b"], &train, &emb), OovCategory::Ooev);
        // Different words missing from each vocabulary still make OOBV.
        assert_eq!(classify_entity_oov(&["a", "c"], &train, &emb), OovCategory::Oobv);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn bio2_strategy() -> impl Strategy<Value = Vec<String>> {
            proptest::collection::vec((0u8..3, 0u8..2), 1..20).prop_map(|raw| {
                let types = ["PER", "LOC"];
                let mut out: Vec<String> = Vec::new();
                let mut open: Option<&str> = None;
                for (kind, ty) in raw {
                    let ty = types[ty as usize];
                    let label = match (kind, open) {
                        (0, _) => {
                            open = None;
                            "O".to_string()
                        }
                        (2, Some(t)) => format!("I-{t}"),
                        _ => {
                            open = Some(ty);
                            format!("B-{ty}")
                        }
                    };
                    out.push(label);
                }
                out
            })
        }

        fn bio2_spans(labels: &[String]) -> Vec<(String, usize, usize)> {
            let mut spans = Vec::new();
            for (i, l) in labels.iter().enumerate() {
                if let Some(ty) = l.strip_prefix("B-") {
                    let mut end = i;
                    while labels.get(end + 1).is_some_and(|n| n == &format!("I-{ty}")) {
                        end += 1;
                    }
                    spans.push((ty.to_string(), i, end));
                }
            }
            spans
        }

        proptest! {
            #[test]
            fn bioes_preserves_spans(labels in bio2_strategy()) {
                let bioes = bio2_to_bioes(&labels).unwrap();
                prop_assert_eq!(bioes.len(), labels.len());
                let decoded: Vec<_> = crate::eval::extract_spans(&bioes)
                    .into_iter()
                    .map(|s| (s.kind, s.start, s.end))
                    .collect();
                prop_assert_eq!(decoded, bio2_spans(&labels));
            }

            #[test]
            fn categories_partition(
                train in proptest::collection::hash_set("[a-e]", 0..5),
                emb in proptest::collection::hash_set("[a-e]", 0..5),
                word in "[a-e]",
            ) {
                let cat = classify_word_oov(&word, &train, &emb);
                let hits = [
                    train.contains(&word) && emb.contains(&word),
                    !train.contains(&word) && emb.contains(&word),
                    train.contains(&word) && !emb.contains(&word),
                    !train.contains(&word) && !emb.contains(&word),
                ];
                prop_assert_eq!(hits.iter().filter(|h| **h).count(), 1);
                prop_assert!(hits[cat.index()]);
            }
        }
    }
}
