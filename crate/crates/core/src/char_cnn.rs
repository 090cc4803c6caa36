//! Character-level word representation: character embeddings, one
//! convolution of width `window`, tanh, then max over positions.

use rand::Rng;

use crate::data::Vocabulary;
use crate::embeddings::{init_uniform_table, EmbeddingTable, SparseRows};
use crate::error::{Error, Result};
use crate::tensor::{dot, tanh, tanh_grad_from_output, Tensor};

#[derive(Clone, Debug, PartialEq)]
pub struct CharCnnParams {
    pub table: EmbeddingTable,
    /// `F × (window · char_dim)`; row `f` is filter `f` over a flattened window.
    pub filters: Tensor,
    pub bias: Tensor,
    pub window: usize,
}

/// Dense gradients of the filters plus the touched character rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CharCnnGrads {
    pub filters: Tensor,
    pub bias: Tensor,
    pub rows: SparseRows,
}

/// State saved by [`CharCnnParams::forward`] for one backward call.
#[derive(Debug)]
pub struct CharCnnCache {
    padded: Vec<usize>,
    embedded: Vec<f64>,
    mask: Option<Vec<f64>>,
    argmax: Vec<usize>,
    rep: Vec<f64>,
}

impl CharCnnCache {
    /// Window start (in padded coordinates) that won the max for each filter.
    pub fn argmax(&self) -> &[usize] {
        &self.argmax
    }

    pub fn padded_len(&self) -> usize {
        self.padded.len()
    }
}

impl CharCnnParams {
    /// Character table uniform in `±sqrt(3/dim)`, Glorot filters, zero bias.
    pub fn new<R: Rng + ?Sized>(
        num_chars: usize,
        char_dim: usize,
        num_filters: usize,
        window: usize,
        rng: &mut R,
    ) -> Self {
        assert!(window >= 1 && num_filters >= 1);
        let table = init_uniform_table(num_chars, char_dim, rng);
        let filters = Tensor::glorot(num_filters, window * char_dim, rng);
        CharCnnParams {
            table,
            filters,
            bias: Tensor::zeros(&[num_filters]),
            window,
        }
    }

    pub fn num_filters(&self) -> usize {
        self.filters.rows()
    }

    pub fn char_dim(&self) -> usize {
        self.table.dim()
    }

    /// PAD characters added before and after a word.
    pub fn padding(&self) -> (usize, usize) {
        let left = (self.window - 1) / 2;
        (left, self.window - 1 - left)
    }

    /// Length of the padded character sequence for a word of `len` characters.
    pub fn padded_len(&self, len: usize) -> usize {
        len + self.window - 1
    }

    pub fn pad(&self, word_chars: &[usize]) -> Vec<usize> {
        let (l, r) = self.padding();
        let mut out = Vec::with_capacity(word_chars.len() + l + r);
        out.extend(std::iter::repeat_n(Vocabulary::PAD_CHAR, l));
        out.extend_from_slice(word_chars);
        out.extend(std::iter::repeat_n(Vocabulary::PAD_CHAR, r));
        out
    }

    /// Representation of a word given its character indices. `mask`, when
    /// present, multiplies the padded embedding matrix element-wise and must
    /// have `padded_len(len) · char_dim` entries.
    pub fn forward(&self, word_chars: &[usize], mask: Option<&[f64]>) -> Result<(Vec<f64>, CharCnnCache)> {
        if word_chars.is_empty() {
            return Err(Error::Domain("character CNN needs a non-empty word".into()));
        }
        self.forward_padded(&self.pad(word_chars), mask)
    }

    /// Like [`forward`](Self::forward) but on an already padded sequence.
    pub fn forward_padded(&self, padded: &[usize], mask: Option<&[f64]>) -> Result<(Vec<f64>, CharCnnCache)> {
        let dim = self.char_dim();
        let w = self.window;
        if padded.len() < w {
            return Err(Error::Domain(format!(
                "padded length {} shorter than window {w}",
                padded.len()
            )));
        }
        let mut embedded = Vec::with_capacity(padded.len() * dim);
        for &c in padded {
            if c >= self.table.vocab_size() {
                return Err(Error::Bounds {
                    index: c,
                    size: self.table.vocab_size(),
                    what: "character table",
                });
            }
            embedded.extend_from_slice(self.table.row(c));
        }
        if let Some(m) = mask {
            if m.len() != embedded.len() {
                return Err(Error::Dimension(format!(
                    "char dropout mask has {} entries, expected {}",
                    m.len(),
                    embedded.len()
                )));
            }
            for (e, k) in embedded.iter_mut().zip(m) {
                *e *= k;
            }
        }

        let positions = padded.len() - w + 1;
        let nf = self.num_filters();
        let mut rep = vec![f64::NEG_INFINITY; nf];
        let mut argmax = vec![0; nf];
        for p in 0..positions {
            let window = &embedded[p * dim..(p + w) * dim];
            for f in 0..nf {
                let act = tanh(dot(self.filters.row(f), window) + self.bias.data()[f]);
                if act > rep[f] {
                    rep[f] = act;
                    argmax[f] = p;
                }
            }
        }
        let cache = CharCnnCache {
            padded: padded.to_vec(),
            embedded,
            mask: mask.map(<[f64]>::to_vec),
            argmax,
            rep: rep.clone(),
        };
        Ok((rep, cache))
    }

    /// Gradients of a scalar loss given `grad_rep = ∂loss/∂rep`. Only the
    /// winning window of each filter receives gradient.
    pub fn backward(&self, cache: CharCnnCache, grad_rep: &[f64]) -> Result<CharCnnGrads> {
        let dim = self.char_dim();
        let w = self.window;
        let nf = self.num_filters();
        if grad_rep.len() != nf || cache.argmax.len() != nf || cache.embedded.len() != cache.padded.len() * dim {
            return Err(Error::Contract(
                "character CNN cache does not match these parameters".into(),
            ));
        }
        let mut filters = self.filters.zeros_like();
        let mut bias = self.bias.zeros_like();
        let mut d_emb = vec![0.0; cache.embedded.len()];
        for f in 0..nf {
            let g = grad_rep[f] * tanh_grad_from_output(cache.rep[f]);
            let p = cache.argmax[f];
            let window = &cache.embedded[p * dim..(p + w) * dim];
            for (df, x) in filters.row_mut(f).iter_mut().zip(window) {
                *df += g * x;
            }
            bias.data_mut()[f] += g;
            for (de, wf) in d_emb[p * dim..(p + w) * dim].iter_mut().zip(self.filters.row(f)) {
                *de += g * wf;
            }
        }
        if let Some(m) = &cache.mask {
            for (d, k) in d_emb.iter_mut().zip(m) {
                *d *= k;
            }
        }
        let mut rows = SparseRows::new();
        for (i, &c) in cache.padded.iter().enumerate() {
            let row = rows.entry(c).or_insert_with(|| vec![0.0; dim]);
            for (r, d) in row.iter_mut().zip(&d_emb[i * dim..(i + 1) * dim]) {
                *r += d;
            }
        }
        Ok(CharCnnGrads { filters, bias, rows })
    }

    pub fn zero_grads(&self) -> CharCnnGrads {
        CharCnnGrads {
            filters: self.filters.zeros_like(),
            bias: self.bias.zeros_like(),
            rows: SparseRows::new(),
        }
    }
}
