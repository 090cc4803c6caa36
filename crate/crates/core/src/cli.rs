//! Command-line front end: `train`, `tag`, `eval`, `analyze-oov`, `convert`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 model-file
//! error.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{bio2_to_bioes, build_vocabulary, read_column_corpus_with, Columns, LabeledCorpus, DOCSTART};
use crate::embeddings::{embedding_file_dim, load_pretrained_text, read_embedding_vocab};
use crate::error::{Error, Result};
use crate::eval::{oov_breakdown, Metric, ScoreReport};
use crate::model::{Model, ModelConfig, ModelVariant};
use crate::trainer::{evaluate, train_with, TrainConfig};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_MODEL: i32 = 4;

/// Word vector width used when no embedding file is given.
pub const DEFAULT_WORD_DIM: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Pos,
    Ner,
}

impl Task {
    pub fn metric(self) -> Metric {
        match self {
            Task::Pos => Metric::Accuracy,
            Task::Ner => Metric::EntityF1,
        }
    }
}

/// Label scheme of the input files. `Bio2` labels are converted to BIOES on
/// reading; `Bioes` labels (and non-entity tags such as POS) are used as is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Bio2,
    Bioes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned text table.
    Table,
    /// `key=value` lines.
    Kv,
}

/// Settings of a `train` run, read from `key=value` lines.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub variant: ModelVariant,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub word_col: usize,
    /// `None` selects the last column.
    pub label_col: Option<usize>,
    pub scheme: Scheme,
    /// `None` means the task default.
    pub eta0: Option<f64>,
    pub rho: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub clip: f64,
    pub dropout: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub model_out: Option<PathBuf>,
    pub hidden_size: usize,
    pub char_dim: usize,
    pub char_filters: usize,
    pub char_window: usize,
}

pub const CONFIG_KEYS: [&str; 22] = [
    "task",
    "variant",
    "train",
    "dev",
    "test",
    "embeddings",
    "word_col",
    "label_col",
    "scheme",
    "eta0",
    "rho",
    "momentum",
    "batch_size",
    "clip",
    "dropout",
    "max_epochs",
    "seed",
    "model_out",
    "hidden_size",
    "char_dim",
    "char_filters",
    "char_window",
];

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::pos();
        let m = ModelConfig::standard(ModelVariant::BlstmCnnCrf);
        RunConfig {
            task: Task::Pos,
            variant: ModelVariant::BlstmCnnCrf,
            train: None,
            dev: None,
            test: None,
            embeddings: None,
            word_col: 0,
            label_col: None,
            scheme: Scheme::Bioes,
            eta0: None,
            rho: t.rho,
            momentum: t.momentum,
            batch_size: t.batch_size,
            clip: t.clip,
            dropout: t.dropout,
            max_epochs: t.max_epochs,
            seed: t.seed,
            model_out: None,
            hidden_size: m.hidden,
            char_dim: m.char_dim,
            char_filters: m.num_filters,
            char_window: m.window,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("bad value {value:?} for `{key}`: {e}")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T> {
    T::from_str(value, true).map_err(|_| Error::Config(format!("bad value {value:?} for `{key}`")))
}

impl RunConfig {
    /// Sets one key. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let path = || Some(PathBuf::from(value));
        match key {
            "task" => self.task = parse_enum(key, value)?,
            "variant" => self.variant = value.parse()?,
            "train" => self.train = path(),
            "dev" => self.dev = path(),
            "test" => self.test = path(),
            "embeddings" => self.embeddings = path(),
            "word_col" => self.word_col = parse_value(key, value)?,
            "label_col" => {
                self.label_col = match value {
                    "last" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "scheme" => self.scheme = parse_enum(key, value)?,
            "eta0" => self.eta0 = Some(parse_value(key, value)?),
            "rho" => self.rho = parse_value(key, value)?,
            "momentum" => self.momentum = parse_value(key, value)?,
            "batch_size" => self.batch_size = parse_value(key, value)?,
            "clip" => self.clip = parse_value(key, value)?,
            "dropout" => self.dropout = parse_value(key, value)?,
            "max_epochs" => self.max_epochs = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "model_out" => self.model_out = path(),
            "hidden_size" => self.hidden_size = parse_value(key, value)?,
            "char_dim" => self.char_dim = parse_value(key, value)?,
            "char_filters" => self.char_filters = parse_value(key, value)?,
            "char_window" => self.char_window = parse_value(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines. Blank lines and `#` comments are ignored;
    /// a key may appear only once per text.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", i + 1)));
            }
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {}", i + 1, strip_prefix(e))))?;
        }
        Ok(())
    }

    /// Defaults, then the file (if any), then `overrides` (later wins).
    pub fn from_sources(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn train_config(&self) -> TrainConfig {
        let base = match self.task {
            Task::Pos => TrainConfig::pos(),
            Task::Ner => TrainConfig::ner(),
        };
        TrainConfig {
            eta0: self.eta0.unwrap_or(base.eta0),
            rho: self.rho,
            momentum: self.momentum,
            batch_size: self.batch_size,
            clip: self.clip,
            dropout: self.dropout,
            max_epochs: self.max_epochs,
            seed: self.seed,
            variant: self.variant,
            metric: self.task.metric(),
        }
    }

    pub fn model_config(&self, word_dim: usize) -> ModelConfig {
        ModelConfig {
            variant: self.variant,
            word_dim,
            char_dim: self.char_dim,
            num_filters: self.char_filters,
            window: self.char_window,
            hidden: self.hidden_size,
        }
    }

    fn columns(&self) -> Columns {
        Columns {
            word: self.word_col,
            label: self.label_col,
        }
    }

}

fn required(key: &str, value: &Option<PathBuf>) -> Result<PathBuf> {
    value
        .clone()
        .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

/// Path of the epoch log written next to a model file.
pub fn epoch_log_path(model_out: &Path) -> PathBuf {
    let mut name = model_out.as_os_str().to_owned();
    name.push(".log");
    PathBuf::from(name)
}

/// Reads a corpus and converts BIO2 labels when asked to.
pub fn read_corpus(path: &Path, columns: Columns, scheme: Scheme) -> Result<LabeledCorpus> {
    let corpus = read_column_corpus_with(path, columns)?;
    match scheme {
        Scheme::Bioes => Ok(corpus),
        Scheme::Bio2 => convert_corpus_labels(corpus, path),
    }
}

/// Converts every sentence from BIO2 to BIOES, reporting scheme errors with
/// the line number of the offending token.
fn convert_corpus_labels(corpus: LabeledCorpus, path: &Path) -> Result<LabeledCorpus> {
    let lines = sentence_start_lines(path)?;
    let mut index = 0;
    corpus.map_labels(|labels| {
        let start = lines.get(index).copied().unwrap_or(0);
        index += 1;
        bio2_to_bioes(labels).map_err(|e| scheme_to_parse(e, path, |p| start + p))
    })
}

/// Turns a scheme error into a parse error at the line of the offending token.
fn scheme_to_parse(e: Error, path: &Path, line_of: impl Fn(usize) -> usize) -> Error {
    match e {
        Error::Scheme {
            position,
            label,
            message,
        } => Error::Parse {
            path: path.to_path_buf(),
            line: line_of(position),
            message: format!("tag {label:?}: {message}"),
        },
        other => other,
    }
}

/// First line (1-based) of every sentence, in the order the reader yields them.
fn sentence_start_lines(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(blocks(&text)
        .into_iter()
        .filter_map(|b| match b {
            Block::Sentence(lines) => Some(lines[0].0),
            Block::Other(_) => None,
        })
        .collect())
}

/// A line-level view of a column file that keeps non-token lines.
enum Block<'a> {
    /// `(1-based line number, line)` for each token.
    Sentence(Vec<(usize, &'a str)>),
    /// Blank or `-DOCSTART-` line, copied through verbatim.
    Other(&'a str),
}

fn blocks(text: &str) -> Vec<Block<'_>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let first = line.split_whitespace().next();
        match first {
            Some(f) if !f.starts_with(DOCSTART) => current.push((i + 1, line)),
            _ => {
                if !current.is_empty() {
                    out.push(Block::Sentence(std::mem::take(&mut current)));
                }
                out.push(Block::Other(line));
            }
        }
    }
    if !current.is_empty() {
        out.push(Block::Sentence(current));
    }
    out
}

/// Result of a `train` run.
pub struct TrainReport {
    pub dev_metric: Option<f64>,
    pub test_metric: Option<f64>,
    pub best_epoch: Option<usize>,
    pub model_path: PathBuf,
    pub log_path: PathBuf,
}

pub fn cmd_train(cfg: &RunConfig) -> Result<TrainReport> {
    let train_path = required("train", &cfg.train)?;
    let dev_path = required("dev", &cfg.dev)?;
    let model_out = required("model_out", &cfg.model_out)?;
    let train_config = cfg.train_config();
    train_config.validate()?;

    let columns = cfg.columns();
    let train = read_corpus(&train_path, columns, cfg.scheme)?;
    let dev = read_corpus(&dev_path, columns, cfg.scheme)?;
    let test = cfg
        .test
        .as_deref()
        .map(|p| read_corpus(p, columns, cfg.scheme))
        .transpose()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (vocab, pretrained, word_dim) = match &cfg.embeddings {
        Some(path) => {
            let dim = embedding_file_dim(path)?;
            let (table, _) = load_pretrained_text(path, dim, &mut rng)?;
            let vocab = build_vocabulary(&train, table.tokens_in_row_order());
            (vocab, Some(table), dim)
        }
        None => (build_vocabulary(&train, std::iter::empty()), None, DEFAULT_WORD_DIM),
    };
    let model = Model::new(vocab, cfg.model_config(word_dim), pretrained.as_ref(), &mut rng)?;
    log::info!("{} with {} parameters", model.variant(), model.param_count());

    let log_path = epoch_log_path(&model_out);
    let log_file = File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    let mut log_writer = BufWriter::new(log_file);
    let mut write_err = None;
    let outcome = train_with(model, &train, &dev, &train_config, |record| {
        if write_err.is_none() {
            if let Err(e) = writeln!(log_writer, "{record}").and_then(|_| log_writer.flush()) {
                write_err = Some(e);
            }
        }
    })?;
    if let Some(e) = write_err {
        return Err(Error::io(&log_path, e));
    }
    outcome.model.save(&model_out)?;
    let test_metric = test
        .as_ref()
        .map(|t| evaluate(&outcome.model, t, train_config.metric))
        .transpose()?;
    Ok(TrainReport {
        dev_metric: outcome.best_metric(),
        test_metric,
        best_epoch: outcome.best_epoch,
        model_path: model_out,
        log_path,
    })
}

/// Appends the predicted label to every token line of `input`; other lines
/// are copied unchanged.
pub fn tag_text(model: &Model, input: &str, word_col: usize, source: &Path) -> Result<String> {
    let mut out = String::with_capacity(input.len() * 2);
    for block in blocks(input) {
        match block {
            Block::Other(line) => {
                out.push_str(line);
                out.push('\n');
            }
            Block::Sentence(lines) => {
                let mut words = Vec::with_capacity(lines.len());
                for &(n, line) in &lines {
                    let w = line.split_whitespace().nth(word_col).ok_or_else(|| Error::Parse {
                        path: source.to_path_buf(),
                        line: n,
                        message: format!("no column {word_col}"),
                    })?;
                    words.push(w);
                }
                let labels = model.predict(&words)?;
                for ((_, line), label) in lines.iter().zip(labels) {
                    let _ = writeln!(out, "{} {label}", line.trim_end());
                }
            }
        }
    }
    Ok(out)
}

pub fn cmd_tag(model_path: &Path, input: &Path, output: Option<&Path>, word_col: usize) -> Result<String> {
    let model = Model::load(model_path).map_err(|e| match e {
        Error::Io { path, source } => Error::ModelFile(format!("{}: {source}", path.display())),
        other => other,
    })?;
    let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let tagged = tag_text(&model, &text, word_col, input)?;
    match output {
        Some(path) => {
            fs::write(path, &tagged).map_err(|e| Error::io(path, e))?;
            Ok(String::new())
        }
        None => Ok(tagged),
    }
}

fn read_labels(path: &Path, label_col: Option<usize>) -> Result<LabeledCorpus> {
    read_column_corpus_with(
        path,
        Columns {
            word: 0,
            label: label_col,
        },
    )
}

fn check_aligned(gold: &LabeledCorpus, pred: &LabeledCorpus) -> Result<()> {
    if gold.sentences.len() != pred.sentences.len() {
        return Err(Error::Dimension(format!(
            "{} gold sentences but {} predicted",
            gold.sentences.len(),
            pred.sentences.len()
        )));
    }
    for (i, (g, p)) in gold.sentences.iter().zip(&pred.sentences).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Dimension(format!(
                "sentence {} has {} gold tokens but {} predicted",
                i + 1,
                g.len(),
                p.len()
            )));
        }
    }
    Ok(())
}

pub fn cmd_eval(
    gold: &Path,
    pred: &Path,
    task: Task,
    gold_col: Option<usize>,
    pred_col: Option<usize>,
    format: Format,
) -> Result<String> {
    let g = read_labels(gold, gold_col)?;
    let p = read_labels(pred, pred_col)?;
    check_aligned(&g, &p)?;
    let gl: Vec<Vec<&str>> = g.sentences.iter().map(|s| s.labels()).collect();
    let pl: Vec<Vec<&str>> = p.sentences.iter().map(|s| s.labels()).collect();
    let report = ScoreReport::compute(&gl, &pl, task.metric())?;
    Ok(match format {
        Format::Table => report.to_table(),
        Format::Kv => report.to_key_values(),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_analyze_oov(
    gold: &Path,
    pred: &Path,
    train: &Path,
    embeddings: &Path,
    task: Task,
    gold_col: Option<usize>,
    pred_col: Option<usize>,
    format: Format,
) -> Result<String> {
    let g = read_labels(gold, gold_col)?;
    let p = read_labels(pred, pred_col)?;
    check_aligned(&g, &p)?;
    let train_vocab = read_column_corpus_with(train, Columns::default())?.word_set();
    let emb_vocab = match read_embedding_vocab(embeddings) {
        Ok(v) => v,
        Err(Error::Io { path, source }) => {
            log::warn!(
                "{}: {source}; treating the embedding vocabulary as empty",
                path.display()
            );
            HashSet::new()
        }
        Err(e) => return Err(e),
    };
    let predictions: Vec<Vec<&str>> = p.sentences.iter().map(|s| s.labels()).collect();
    let breakdown = oov_breakdown(&g, &predictions, &train_vocab, &emb_vocab, task.metric())?;
    Ok(match format {
        Format::Table => breakdown.to_table(),
        Format::Kv => breakdown.to_key_values(),
    })
}

/// Rewrites the label column of every token line from BIO2 to BIOES.
pub fn convert_text(input: &str, label_col: Option<usize>, source: &Path) -> Result<String> {
    let mut out = String::with_capacity(input.len());
    for block in blocks(input) {
        match block {
            Block::Other(line) => {
                out.push_str(line);
                out.push('\n');
            }
            Block::Sentence(lines) => {
                let rows: Vec<(usize, Vec<&str>)> = lines
                    .iter()
                    .map(|&(n, l)| (n, l.split_whitespace().collect()))
                    .collect();
                let mut labels = Vec::with_capacity(rows.len());
                for (n, fields) in &rows {
                    let col = label_col.unwrap_or(fields.len() - 1);
                    let label = fields.get(col).ok_or_else(|| Error::Parse {
                        path: source.to_path_buf(),
                        line: *n,
                        message: format!("no column {col}"),
                    })?;
                    labels.push(*label);
                }
                let converted =
                    bio2_to_bioes(&labels).map_err(|e| scheme_to_parse(e, source, |p| rows[p].0))?;
                for ((_, mut fields), new) in rows.into_iter().zip(&converted) {
                    let col = label_col.unwrap_or(fields.len() - 1);
                    fields[col] = new;
                    out.push_str(&fields.join(" "));
                    out.push('\n');
                }
            }
        }
    }
    Ok(out)
}

pub fn cmd_convert(input: &Path, output: Option<&Path>, from: Scheme, to: Scheme, label_col: Option<usize>) -> Result<String> {
    if (from, to) != (Scheme::Bio2, Scheme::Bioes) {
        return Err(Error::Config("only --from bio2 --to bioes is supported".into()));
    }
    let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let converted = convert_text(&text, label_col, input)?;
    match output {
        Some(path) => {
            fs::write(path, &converted).map_err(|e| Error::io(path, e))?;
            Ok(String::new())
        }
        None => Ok(converted),
    }
}

#[derive(Parser, Debug)]
#[command(name = "seqtag", version, about = "Neural sequence labeling: BLSTM-CNN-CRF and baselines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a model from a key=value config file.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a config key; may be repeated. Wins over the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Append predicted labels to a column file.
    Tag {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        word_col: usize,
    },
    /// Score predicted labels against gold labels.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, value_enum)]
        task: Task,
        /// Label column of the gold file (default: last).
        #[arg(long)]
        gold_col: Option<usize>,
        /// Label column of the prediction file (default: last).
        #[arg(long)]
        pred_col: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Break scores down by IV / OOTV / OOEV / OOBV.
    AnalyzeOov {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        gold_col: Option<usize>,
        #[arg(long)]
        pred_col: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Convert the label column between tagging schemes.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Scheme::Bio2)]
        from: Scheme,
        #[arg(long, value_enum, default_value_t = Scheme::Bioes)]
        to: Scheme,
        /// Label column (default: last).
        #[arg(long)]
        label_col: Option<usize>,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        Error::ModelFile(_) | Error::Checksum { .. } => EXIT_MODEL,
        _ => EXIT_DATA,
    }
}

/// Runs one command, writing its report to `out`; returns the exit code.
pub fn execute<W: Write, E: Write>(cli: Cli, out: &mut W, err: &mut E) -> i32 {
    let result = match cli.command {
        Command::Train { config, overrides } => {
            RunConfig::from_sources(config.as_deref(), &overrides).and_then(|cfg| {
                let metric = cfg.task.metric().name();
                cmd_train(&cfg).map(|r| {
                    let mut s = String::new();
                    if let Some(m) = r.dev_metric {
                        let _ = writeln!(s, "dev_{metric}={m}");
                    }
                    if let Some(m) = r.test_metric {
                        let _ = writeln!(s, "test_{metric}={m}");
                    }
                    if let Some(e) = r.best_epoch {
                        let _ = writeln!(s, "best_epoch={e}");
                    }
                    let _ = writeln!(s, "model={}", r.model_path.display());
                    let _ = writeln!(s, "log={}", r.log_path.display());
                    s
                })
            })
        }
        Command::Tag {
            model,
            input,
            output,
            word_col,
        } => cmd_tag(&model, &input, output.as_deref(), word_col),
        Command::Eval {
            gold,
            pred,
            task,
            gold_col,
            pred_col,
            format,
        } => cmd_eval(&gold, &pred, task, gold_col, pred_col, format),
        Command::AnalyzeOov {
            gold,
            pred,
            train,
            embeddings,
            task,
            gold_col,
            pred_col,
            format,
        } => cmd_analyze_oov(&gold, &pred, &train, &embeddings, task, gold_col, pred_col, format),
        Command::Convert {
            input,
            output,
            from,
            to,
            label_col,
        } => cmd_convert(&input, output.as_deref(), from, to, label_col),
    };
    match result {
        Ok(text) => {
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return EXIT_DATA;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock()),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_and_overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# comment\ntask = ner\n\nvariant=BLSTM\nclip=inf\nlabel_col=3\n").unwrap();
        assert_eq!(cfg.task, Task::Ner);
        assert_eq!(cfg.variant, ModelVariant::Blstm);
        assert_eq!(cfg.clip, f64::INFINITY);
        assert_eq!(cfg.label_col, Some(3));
        assert_eq!(cfg.train_config().eta0, 0.015);
        cfg.set("eta0", "0.1").unwrap();
        assert_eq!(cfg.train_config().eta0, 0.1);
    }

    #[test]
    fn defaults_follow_the_recipe() {
        let cfg = RunConfig::default();
        let t = cfg.train_config();
        assert_eq!((t.eta0, t.rho, t.momentum, t.batch_size, t.clip, t.dropout), (0.01, 0.05, 0.9, 10, 5.0, 0.5));
        let m = cfg.model_config(DEFAULT_WORD_DIM);
        assert_eq!((m.word_dim, m.char_dim, m.num_filters, m.window, m.hidden), (100, 30, 30, 3, 200));
    }

    #[test]
    fn every_documented_key_is_accepted() {
        let values = [
            ("task", "pos"),
            ("variant", "BRNN"),
            ("train", "a"),
            ("dev", "b"),
            ("test", "c"),
            ("embeddings", "d"),
            ("word_col", "0"),
            ("label_col", "last"),
            ("scheme", "bio2"),
            ("eta0", "0.01"),
            ("rho", "0.05"),
            ("momentum", "0.9"),
            ("batch_size", "10"),
            ("clip", "5"),
            ("dropout", "0.5"),
            ("max_epochs", "50"),
            ("seed", "1"),
            ("model_out", "m"),
            ("hidden_size", "200"),
            ("char_dim", "30"),
            ("char_filters", "30"),
            ("char_window", "3"),
        ];
        assert_eq!(values.len(), CONFIG_KEYS.len());
        let mut cfg = RunConfig::default();
        for ((k, v), key) in values.iter().zip(CONFIG_KEYS) {
            assert_eq!(*k, key);
            cfg.set(k, v).unwrap();
        }
    }

    #[test]
    fn bad_config_is_rejected() {
        let mut cfg = RunConfig::default();
        assert!(matches!(cfg.apply_text("learning_rate=0.1"), Err(Error::Config(m)) if m.contains("learning_rate")));
        assert!(cfg.apply_text("seed=1\nseed=2").is_err());
        assert!(cfg.apply_text("just words").is_err());
        assert!(cfg.set("batch_size", "ten").is_err());
        assert!(cfg.set("task", "chunking").is_err());
    }

    #[test]
    fn missing_train_names_the_key() {
        let err = cmd_train(&RunConfig::default()).err().unwrap();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
        assert!(err.to_string().contains("`train`"));
    }

    #[test]
    fn convert_keeps_other_columns_and_reports_lines() {
        let src = Path::new("<input>");
        let text = "-DOCSTART- O\n\nEU NNP B-ORG\nrejects VBZ O\nGerman JJ B-MISC\n\nPeter NNP B-PER\nBlackburn NNP I-PER\n";
        let out = convert_text(text, None, src).unwrap();
        assert_eq!(
            out,
            "-DOCSTART- O\n\nEU NNP S-ORG\nrejects VBZ O\nGerman JJ S-MISC\n\nPeter NNP B-PER\nBlackburn NNP E-PER\n"
        );
        let bad = "a B-PER\nb O\n\nc O\nd I-LOC\n";
        match convert_text(bad, None, src) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn log_path_appends_suffix() {
        assert_eq!(epoch_log_path(Path::new("out/model.nnsl")), PathBuf::from("out/model.nnsl.log"));
    }
}
