//! Embedding tables: pretrained text loading, uniform initialisation and
//! lookup with a lowercase fallback.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{embedding_bound, Tensor};

/// Gradient (or velocity) rows of an embedding table, keyed by row index.
/// Ordered so that every traversal is deterministic.
pub type SparseRows = BTreeMap<usize, Vec<f64>>;

/// Row 0 is always the UNK row.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    matrix: Tensor,
    index: HashMap<String, usize>,
    pub trainable: bool,
}

/// Side information from [`load_pretrained_text`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    /// Lines whose token had already been seen; the first vector was kept.
    pub duplicates: usize,
}

impl EmbeddingTable {
    pub const UNK: usize = 0;

    /// Wraps a matrix whose rows need no string index (e.g. character tables).
    pub fn from_matrix(matrix: Tensor) -> Self {
        assert_eq!(matrix.shape().len(), 2, "embedding matrix must be 2-d");
        EmbeddingTable {
            matrix,
            index: HashMap::new(),
            trainable: true,
        }
    }

    /// Wraps a matrix with a token → row index; every row must be in range.
    pub fn with_index(matrix: Tensor, index: HashMap<String, usize>) -> Result<Self> {
        let rows = matrix.rows();
        if let Some(&bad) = index.values().find(|&&r| r >= rows) {
            return Err(Error::Bounds {
                index: bad,
                size: rows,
                what: "embedding rows",
            });
        }
        Ok(EmbeddingTable {
            index,
            ..EmbeddingTable::from_matrix(matrix)
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.shape()[1]
    }

    pub fn matrix(&self) -> &Tensor {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut Tensor {
        &mut self.matrix
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.matrix.row(i)
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        self.matrix.row_mut(i)
    }

    /// Tokens that have their own row.
    pub fn tokens(&self) -> HashSet<String> {
        self.index.keys().cloned().collect()
    }

    /// Token rows in row order (UNK excluded).
    pub fn tokens_in_row_order(&self) -> Vec<&str> {
        let mut pairs: Vec<(&str, usize)> =
            self.index.iter().map(|(k, &v)| (k.as_str(), v)).collect();
        pairs.sort_by_key(|&(_, r)| r);
        pairs.into_iter().map(|(k, _)| k).collect()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Exact row, then the row of the lowercased token, then UNK.
    pub fn lookup(&self, token: &str) -> (usize, &[f64]) {
        let row = self
            .index
            .get(token)
            .or_else(|| self.index.get(&token.to_lowercase()))
            .copied()
            .unwrap_or(Self::UNK);
        (row, self.matrix.row(row))
    }

    /// Adds `lr`-scaled rows to the table, e.g. for a plain SGD update.
    pub fn apply_rows(&mut self, rows: &SparseRows, scale: f64) {
        for (&r, g) in rows {
            for (w, d) in self.matrix.row_mut(r).iter_mut().zip(g) {
                *w += scale * d;
            }
        }
    }
}

/// Uniform table with entries in `[-sqrt(3/dim), +sqrt(3/dim)]`.
pub fn init_uniform_table<R: Rng + ?Sized>(vocab_size: usize, dim: usize, rng: &mut R) -> EmbeddingTable {
    assert!(vocab_size >= 1 && dim >= 1);
    EmbeddingTable::from_matrix(Tensor::uniform(&[vocab_size, dim], embedding_bound(dim), rng))
}

/// Loads `token v1 … vdim` lines. Row 0 is a fresh UNK vector drawn from
/// `rng`; file rows follow in file order.
pub fn load_pretrained_text<R: Rng + ?Sized>(
    path: &Path,
    expected_dim: usize,
    rng: &mut R,
) -> Result<(EmbeddingTable, LoadStats)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_pretrained_text(BufReader::new(file), path, expected_dim, rng)
}

pub fn parse_pretrained_text<B: BufRead, R: Rng + ?Sized>(
    reader: B,
    source: &Path,
    expected_dim: usize,
    rng: &mut R,
) -> Result<(EmbeddingTable, LoadStats)> {
    let bound = embedding_bound(expected_dim);
    let mut data: Vec<f64> = (0..expected_dim).map(|_| rng.gen_range(-bound..=bound)).collect();
    let mut index = HashMap::new();
    let mut stats = LoadStats::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let Some(token) = fields.next() else {
            continue;
        };
        let err = |message: String| Error::EmbeddingLoad {
            path: source.to_path_buf(),
            line: i + 1,
            message,
        };
        let values = fields
            .map(|f| f.parse::<f64>().map_err(|e| err(format!("bad value {f:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != expected_dim {
            return Err(err(format!(
                "expected {expected_dim} values, found {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(err("non-finite value".into()));
        }
        if index.contains_key(token) {
            stats.duplicates += 1;
            continue;
        }
        index.insert(token.to_string(), data.len() / expected_dim);
        data.extend(values);
    }
    if stats.duplicates > 0 {
        log::warn!(
            "{}: {} duplicate tokens ignored",
            source.display(),
            stats.duplicates
        );
    }
    let rows = data.len() / expected_dim;
    let table = EmbeddingTable::with_index(Tensor::from_vec(&[rows, expected_dim], data)?, index)?;
    Ok((table, stats))
}

/// Reads only the token column of an embedding file.
pub fn read_embedding_vocab(path: &Path) -> Result<HashSet<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(tok) = line.split(' ').find(|f| !f.is_empty()) {
            out.insert(tok.to_string());
        }
    }
    Ok(out)
}

/// Vector width of an embedding file, taken from its first non-blank line.
pub fn embedding_file_dim(path: &Path) -> Result<usize> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let fields = line.split(' ').filter(|f| !f.is_empty()).count();
        match fields {
            0 => continue,
            1 => {
                return Err(Error::EmbeddingLoad {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "token without a vector".into(),
                })
            }
            n => return Ok(n - 1),
        }
    }
    Err(Error::EmbeddingLoad {
        path: path.to_path_buf(),
        line: 0,
        message: "no embedding lines".into(),
    })
}
