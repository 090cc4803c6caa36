//! Token accuracy, BIOES span extraction, micro-averaged entity P/R/F1 and
//! the per-category OOV breakdown.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::data::{classify_entity_oov, classify_word_oov, LabeledCorpus, OovCategory};
use crate::error::{Error, Result};

/// Which score a task is judged by.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Token accuracy (POS tagging).
    Accuracy,
    /// Micro-averaged entity F1 over BIOES spans (NER).
    EntityF1,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::EntityF1 => "entity_f1",
        }
    }
}

/// A typed entity covering tokens `start..=end` of one sentence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntitySpan {
    pub kind: String,
    pub start: usize,
    pub end: usize,
}

impl EntitySpan {
    pub fn new(kind: impl Into<String>, start: usize, end: usize) -> Self {
        EntitySpan {
            kind: kind.into(),
            start,
            end,
        }
    }
}

/// Fraction of positions where `pred` equals `gold`. Empty input scores 1.0.
pub fn token_accuracy<G: AsRef<str>, P: AsRef<str>>(gold: &[G], pred: &[P]) -> Result<f64> {
    if gold.len() != pred.len() {
        return Err(Error::Dimension(format!(
            "{} gold labels but {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Ok(1.0);
    }
    let hits = gold.iter().zip(pred).filter(|(g, p)| g.as_ref() == p.as_ref()).count();
    Ok(hits as f64 / gold.len() as f64)
}

/// Decodes BIOES labels into spans, left to right. `B-X` opens, `I-X`
/// continues an open `X`, `E-X` closes an open `X`, `S-X` is a singleton.
/// Anything else discards the open fragment, so an unterminated `B…I` run
/// yields no span.
pub fn extract_spans<S: AsRef<str>>(labels: &[S]) -> Vec<EntitySpan> {
    let mut spans = Vec::new();
    let mut open: Option<(&str, usize)> = None;
    for (i, label) in labels.iter().enumerate() {
        let label = label.as_ref();
        let Some((prefix, kind)) = label.split_once('-') else {
            open = None;
            continue;
        };
        match prefix {
            "B" => open = Some((kind, i)),
            "I" => {
                if !matches!(open, Some((k, _)) if k == kind) {
                    open = None;
                }
            }
            "E" => {
                if let Some((k, start)) = open {
                    if k == kind {
                        spans.push(EntitySpan::new(kind, start, i));
                    }
                }
                open = None;
            }
            "S" => {
                open = None;
                spans.push(EntitySpan::new(kind, i, i));
            }
            _ => open = None,
        }
    }
    spans
}

/// Encodes non-overlapping spans of a sentence of length `n` as BIOES labels.
pub fn spans_to_bioes(spans: &[EntitySpan], n: usize) -> Vec<String> {
    let mut out = vec!["O".to_string(); n];
    for s in spans {
        if s.start == s.end {
            out[s.start] = format!("S-{}", s.kind);
        } else {
            out[s.start] = format!("B-{}", s.kind);
            for l in &mut out[s.start + 1..s.end] {
                *l = format!("I-{}", s.kind);
            }
            out[s.end] = format!("E-{}", s.kind);
        }
    }
    out
}

/// Span counts and the scores derived from them.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Prf1 {
    pub correct: usize,
    pub predicted: usize,
    pub gold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf1 {
    /// Scores from counts. With no gold and no predicted spans everything is 1.
    pub fn from_counts(correct: usize, predicted: usize, gold: usize) -> Self {
        let (precision, recall) = if predicted == 0 && gold == 0 {
            (1.0, 1.0)
        } else {
            let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
            (ratio(correct, predicted), ratio(correct, gold))
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf1 {
            correct,
            predicted,
            gold,
            precision,
            recall,
            f1,
        }
    }
}

/// Micro-averaged P/R/F1: a predicted span is correct when its type and both
/// boundaries match a gold span of the same sentence.
pub fn entity_prf1(gold: &[Vec<EntitySpan>], pred: &[Vec<EntitySpan>]) -> Result<Prf1> {
    if gold.len() != pred.len() {
        return Err(Error::Dimension(format!(
            "{} gold sentences but {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    let (mut correct, mut n_pred, mut n_gold) = (0, 0, 0);
    for (g, p) in gold.iter().zip(pred) {
        let gs: HashSet<&EntitySpan> = g.iter().collect();
        correct += p.iter().filter(|s| gs.contains(s)).count();
        n_pred += p.len();
        n_gold += g.len();
    }
    Ok(Prf1::from_counts(correct, n_pred, n_gold))
}

/// Corpus-level score of `pred` against `gold` (one label list per sentence).
pub fn corpus_metric<G: AsRef<str>, P: AsRef<str>>(metric: Metric, gold: &[Vec<G>], pred: &[Vec<P>]) -> Result<f64> {
    if gold.len() != pred.len() {
        return Err(Error::Dimension(format!(
            "{} gold sentences but {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    match metric {
        Metric::Accuracy => {
            let (mut hits, mut total) = (0usize, 0usize);
            for (g, p) in gold.iter().zip(pred) {
                if g.len() != p.len() {
                    return Err(Error::Dimension("sentence length mismatch".into()));
                }
                hits += g.iter().zip(p).filter(|(a, b)| a.as_ref() == b.as_ref()).count();
                total += g.len();
            }
            Ok(if total == 0 { 1.0 } else { hits as f64 / total as f64 })
        }
        Metric::EntityF1 => {
            if let Some((g, p)) = gold.iter().zip(pred).find(|(g, p)| g.len() != p.len()) {
                return Err(Error::Dimension(format!(
                    "sentence of {} gold labels has {} predictions",
                    g.len(),
                    p.len()
                )));
            }
            let gs: Vec<_> = gold.iter().map(|l| extract_spans(l)).collect();
            let ps: Vec<_> = pred.iter().map(|l| extract_spans(l)).collect();
            Ok(entity_prf1(&gs, &ps)?.f1)
        }
    }
}

/// Full score report for one gold/predicted pair of label sets.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreReport {
    pub sentences: usize,
    pub tokens: usize,
    pub accuracy: f64,
    pub entities: Option<Prf1>,
}

impl ScoreReport {
    pub fn compute<G: AsRef<str>, P: AsRef<str>>(gold: &[Vec<G>], pred: &[Vec<P>], metric: Metric) -> Result<Self> {
        let accuracy = corpus_metric(Metric::Accuracy, gold, pred)?;
        let entities = match metric {
            Metric::Accuracy => None,
            Metric::EntityF1 => {
                let gs: Vec<_> = gold.iter().map(|l| extract_spans(l)).collect();
                let ps: Vec<_> = pred.iter().map(|l| extract_spans(l)).collect();
                Some(entity_prf1(&gs, &ps)?)
            }
        };
        Ok(ScoreReport {
            sentences: gold.len(),
            tokens: gold.iter().map(Vec::len).sum(),
            accuracy,
            entities,
        })
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<12}{:>10}", "sentences", self.sentences);
        let _ = writeln!(s, "{:<12}{:>10}", "tokens", self.tokens);
        let _ = writeln!(s, "{:<12}{:>10.2}", "accuracy", 100.0 * self.accuracy);
        if let Some(e) = &self.entities {
            let _ = writeln!(s, "{:<12}{:>10}", "gold", e.gold);
            let _ = writeln!(s, "{:<12}{:>10}", "predicted", e.predicted);
            let _ = writeln!(s, "{:<12}{:>10}", "correct", e.correct);
            let _ = writeln!(s, "{:<12}{:>10.2}", "precision", 100.0 * e.precision);
            let _ = writeln!(s, "{:<12}{:>10.2}", "recall", 100.0 * e.recall);
            let _ = writeln!(s, "{:<12}{:>10.2}", "f1", 100.0 * e.f1);
        }
        s
    }

    pub fn to_key_values(&self) -> String {
        let mut s = format!(
            "sentences={}\ntokens={}\naccuracy={}\n",
            self.sentences, self.tokens, self.accuracy
        );
        if let Some(e) = &self.entities {
            let _ = write!(
                s,
                "gold={}\npredicted={}\ncorrect={}\nprecision={}\nrecall={}\nf1={}\n",
                e.gold, e.predicted, e.correct, e.precision, e.recall, e.f1
            );
        }
        s
    }
}

/// Counts and score for one OOV category.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OovCell {
    pub category: OovCategory,
    /// Tokens (accuracy) or gold entities (entity F1) in the category.
    pub count: usize,
    /// Correct tokens or correct predicted entities.
    pub correct: usize,
    /// Predicted entities assigned to the category (0 for accuracy).
    pub predicted: usize,
    /// `None` when the category is empty.
    pub score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OovBreakdown {
    pub metric: Metric,
    pub cells: [OovCell; 4],
}

impl OovBreakdown {
    pub fn cell(&self, category: OovCategory) -> &OovCell {
        &self.cells[category.index()]
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:<8}", "");
        for c in &self.cells {
            let _ = write!(s, "{:>10}", c.category.name());
        }
        s.push('\n');
        let _ = write!(s, "{:<8}", "count");
        for c in &self.cells {
            let _ = write!(s, "{:>10}", c.count);
        }
        s.push('\n');
        let _ = write!(s, "{:<8}", self.metric.name().split('_').next_back().unwrap_or("score"));
        for c in &self.cells {
            match c.score {
                Some(v) => {
                    let _ = write!(s, "{:>10.2}", 100.0 * v);
                }
                None => {
                    let _ = write!(s, "{:>10}", "-");
                }
            }
        }
        s.push('\n');
        s
    }

    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        for c in &self.cells {
            let name = c.category.name();
            let _ = writeln!(s, "{name}.count={}", c.count);
            let _ = writeln!(s, "{name}.correct={}", c.correct);
            if self.metric == Metric::EntityF1 {
                let _ = writeln!(s, "{name}.predicted={}", c.predicted);
            }
            match c.score {
                Some(v) => {
                    let _ = writeln!(s, "{name}.{}={v}", self.metric.name());
                }
                None => {
                    let _ = writeln!(s, "{name}.{}=none", self.metric.name());
                }
            }
        }
        s
    }
}

/// Scores predictions separately on IV, OOTV, OOEV and OOBV words (accuracy)
/// or entities (entity F1). Gold entities are binned by their own words; a
/// predicted entity goes to the bin of the gold entity it matches, or else
/// to the bin of its own words.
pub fn oov_breakdown<S: AsRef<str>>(
    gold: &LabeledCorpus,
    predictions: &[Vec<S>],
    train_vocab: &HashSet<String>,
    emb_vocab: &HashSet<String>,
    metric: Metric,
) -> Result<OovBreakdown> {
    if gold.sentences.len() != predictions.len() {
        return Err(Error::Dimension(format!(
            "{} gold sentences but {} predicted",
            gold.sentences.len(),
            predictions.len()
        )));
    }
    let mut count = [0usize; 4];
    let mut correct = [0usize; 4];
    let mut predicted = [0usize; 4];
    for (sentence, pred) in gold.sentences.iter().zip(predictions) {
        if sentence.len() != pred.len() {
            return Err(Error::Dimension("sentence length mismatch".into()));
        }
        let words: Vec<&str> = sentence.surfaces().collect();
        match metric {
            Metric::Accuracy => {
                for ((w, t), p) in words.iter().zip(&sentence.tokens).zip(pred) {
                    let c = classify_word_oov(w, train_vocab, emb_vocab).index();
                    count[c] += 1;
                    if t.label == p.as_ref() {
                        correct[c] += 1;
                    }
                }
            }
            Metric::EntityF1 => {
                let category = |s: &EntitySpan| classify_entity_oov(&words[s.start..=s.end], train_vocab, emb_vocab);
                let gold_spans = extract_spans(&sentence.labels());
                let pred_spans = extract_spans(pred);
                for g in &gold_spans {
                    count[category(g).index()] += 1;
                }
                for p in &pred_spans {
                    let matched = gold_spans.iter().find(|g| *g == p);
                    let c = category(matched.unwrap_or(p)).index();
                    predicted[c] += 1;
                    if matched.is_some() {
                        correct[c] += 1;
                    }
                }
            }
        }
    }
    let cells = OovCategory::ALL.map(|category| {
        let i = category.index();
        let score = match metric {
            Metric::Accuracy => (count[i] > 0).then(|| correct[i] as f64 / count[i] as f64),
            Metric::EntityF1 => {
                (count[i] + predicted[i] > 0).then(|| Prf1::from_counts(correct[i], predicted[i], count[i]).f1)
            }
        };
        OovCell {
            category,
            count: count[i],
            correct: correct[i],
            predicted: predicted[i],
            score,
        }
    });
    Ok(OovBreakdown { metric, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Sentence, Split};

    fn set(words: &[&str]) -> HashSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(token_accuracy(&["a", "b"], &["a", "b"]).unwrap(), 1.0);
        assert_eq!(token_accuracy(&["a", "b"], &["c", "d"]).unwrap(), 0.0);
        assert_eq!(token_accuracy(&["a", "b", "c", "d"], &["a", "b", "c", "x"]).unwrap(), 0.75);
        assert!(token_accuracy(&["a"], &["a", "b"]).is_err());
    }

    #[test]
    fn span_extraction() {
        assert_eq!(
            extract_spans(&["B-PER", "E-PER", "O", "S-LOC"]),
            vec![EntitySpan::new("PER", 0, 1), EntitySpan::new("LOC", 3, 3)]
        );
        assert!(extract_spans(&["B-PER", "O"]).is_empty());
        assert!(extract_spans(&["B-ORG", "I-PER", "E-PER"]).is_empty());
        assert!(extract_spans(&["B-PER", "I-PER"]).is_empty());
        assert!(extract_spans(&["E-PER", "garbage", "I-X"]).is_empty());
        assert_eq!(
            extract_spans(&["B-PER", "B-LOC", "E-LOC"]),
            vec![EntitySpan::new("LOC", 1, 2)]
        );
    }

    #[test]
    fn prf1_hand_fixtures() {
        let g = vec![vec![
            EntitySpan::new("PER", 0, 1),
            EntitySpan::new("LOC", 3, 3),
            EntitySpan::new("ORG", 5, 6),
            EntitySpan::new("MISC", 8, 8),
        ]];
        let p = vec![vec![EntitySpan::new("PER", 0, 1), EntitySpan::new("LOC", 3, 4)]];
        let s = entity_prf1(&g, &p).unwrap();
        assert_eq!((s.precision, s.recall), (0.5, 0.25));
        assert!((s.f1 - 1.0 / 3.0).abs() < 1e-15);

        let same = entity_prf1(&g, &g).unwrap();
        assert_eq!((same.precision, same.recall, same.f1), (1.0, 1.0, 1.0));

        let empty = entity_prf1(&[vec![]], &[vec![]]).unwrap();
        assert_eq!((empty.precision, empty.recall, empty.f1), (1.0, 1.0, 1.0));

        let none_predicted = entity_prf1(&g, &[vec![]]).unwrap();
        assert_eq!((none_predicted.precision, none_predicted.f1), (0.0, 0.0));
    }

    #[test]
    fn wrong_type_is_not_correct() {
        let g = vec![vec![EntitySpan::new("PER", 0, 1)]];
        let p = vec![vec![EntitySpan::new("ORG", 0, 1)]];
        assert_eq!(entity_prf1(&g, &p).unwrap().correct, 0);
    }

    fn corpus(rows: &[(&[&str], &[&str])]) -> LabeledCorpus {
        LabeledCorpus::new(
            Split::Dev,
            rows.iter().map(|(w, l)| Sentence::from_pairs(w, l)).collect(),
        )
    }

    #[test]
    fn oov_one_word_per_category() {
        // w_iv in both, w_ootv embedding only, w_ooev training only, w_oobv neither.
        let gold = corpus(&[(&["w_iv", "w_ootv", "w_ooev", "w_oobv"], &["A", "B", "A", "B"])]);
        let train = set(&["w_iv", "w_ooev"]);
        let emb = set(&["w_iv", "w_ootv"]);
        let pred = vec![vec!["A", "B", "B", "B"]];
        let b = oov_breakdown(&gold, &pred, &train, &emb, Metric::Accuracy).unwrap();
        assert_eq!(b.cells.map(|c| c.count), [1, 1, 1, 1]);
        assert_eq!(b.cell(OovCategory::Ooev).score, Some(0.0));
        assert_eq!(b.cell(OovCategory::Iv).score, Some(1.0));
        assert_eq!(b.cells.iter().map(|c| c.count).sum::<usize>(), gold.num_tokens());
    }

    #[test]
    fn oov_all_iv_equals_global() {
        let gold = corpus(&[(&["a", "b", "a"], &["X", "Y", "X"]), (&["b"], &["Y"])]);
        let vocab = set(&["a", "b"]);
        let pred = vec![vec!["X", "X", "X"], vec!["Y"]];
        let b = oov_breakdown(&gold, &pred, &vocab, &vocab, Metric::Accuracy).unwrap();
        assert_eq!(b.cell(OovCategory::Iv).score, Some(0.75));
        for c in [OovCategory::Ootv, OovCategory::Ooev, OovCategory::Oobv] {
            assert_eq!(b.cell(c).score, None);
        }
        assert!(b.to_table().contains('-'));
    }

    #[test]
    fn oov_entities() {
        let gold = corpus(&[(
            &["John", "Smith", "visited", "Zork", "City"],
            &["B-PER", "E-PER", "O", "B-LOC", "E-LOC"],
        )]);
        let train = set(&["John", "Smith", "visited", "City"]);
        let emb = set(&["John", "Smith", "visited", "Zork"]);
        // LOC entity: Zork ∉ train, City ∉ emb → OOBV.
        let pred = vec![vec!["B-PER", "E-PER", "S-MISC", "B-LOC", "E-LOC"]];
        let b = oov_breakdown(&gold, &pred, &train, &emb, Metric::EntityF1).unwrap();
        assert_eq!(b.cell(OovCategory::Iv).count, 1);
        assert_eq!(b.cell(OovCategory::Oobv).count, 1);
        assert_eq!(b.cell(OovCategory::Oobv).score, Some(1.0));
        // The unmatched S-MISC on "visited" lands in IV: P = 1/2, R = 1.
        let iv = b.cell(OovCategory::Iv);
        assert_eq!((iv.predicted, iv.correct), (2, 1));
        assert!((iv.score.unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn spans_strategy() -> impl Strategy<Value = (Vec<EntitySpan>, usize)> {
            proptest::collection::vec((0usize..3, 1usize..4, 0usize..3), 0..6).prop_map(|raw| {
                let kinds = ["PER", "LOC", "ORG"];
                let mut spans = Vec::new();
                let mut pos = 0;
                for (gap, len, kind) in raw {
                    let start = pos + gap;
                    spans.push(EntitySpan::new(kinds[kind], start, start + len - 1));
                    pos = start + len;
                }
                (spans, pos + 1)
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn bioes_round_trip((spans, n) in spans_strategy()) {
                prop_assert_eq!(extract_spans(&spans_to_bioes(&spans, n)), spans);
            }
        }

        proptest! {
            #[test]
            fn micro_f1_ignores_sentence_order(
                data in proptest::collection::vec((spans_strategy(), spans_strategy()), 1..6),
                rot in 0usize..6,
            ) {
                let gold: Vec<_> = data.iter().map(|((g, _), _)| g.clone()).collect();
                let pred: Vec<_> = data.iter().map(|(_, (p, _))| p.clone()).collect();
                let a = entity_prf1(&gold, &pred).unwrap();
                let r = rot % gold.len();
                let mut g2 = gold.clone();
                g2.rotate_left(r);
                let mut p2 = pred.clone();
                p2.rotate_left(r);
                prop_assert_eq!(a, entity_prf1(&g2, &p2).unwrap());
            }
        }
    }
}
