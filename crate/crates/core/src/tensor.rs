//! Dense row-major `f64` tensors and the numeric primitives the layers are
//! built from.
//!
//! All reductions sum left to right in index order so that results are
//! bit-reproducible from run to run.

use rand::Rng;

use crate::error::{Error, Result};

/// Dense row-major array of `f64` with an explicit shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// All-zero tensor of the given shape.
    ///
    /// # Panics
    ///
    /// Panics if any extent is zero or the shape is empty.
    pub fn zeros(shape: &[usize]) -> Self {
        assert!(
            !shape.is_empty() && shape.iter().all(|&d| d > 0),
            "tensor extents must be positive, got {shape:?}"
        );
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    /// Wraps `data` with `shape`, checking that the sizes agree and every entry is finite.
    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::Dimension(format!(
                "tensor extents must be positive, got {shape:?}"
            )));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Dimension(format!(
                "shape {shape:?} needs {expected} entries, got {}",
                data.len()
            )));
        }
        let t = Tensor {
            shape: shape.to_vec(),
            data,
        };
        t.check_finite("from_vec")?;
        Ok(t)
    }

    /// Builds a 2-d tensor from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Tensor::from_vec(&[r, c], rows.concat())
    }

    /// Tensor with entries drawn uniformly from `[-bound, bound]`.
    pub fn uniform<R: Rng + ?Sized>(shape: &[usize], bound: f64, rng: &mut R) -> Self {
        let mut t = Tensor::zeros(shape);
        for v in &mut t.data {
            *v = rng.gen_range(-bound..=bound);
        }
        t
    }

    /// Glorot-uniform matrix: bound `sqrt(6 / (rows + cols))`.
    pub fn glorot<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Tensor::uniform(&[rows, cols], glorot_bound(rows, cols), rng)
    }

    /// Identity matrix of size `n`.
    pub fn eye(n: usize) -> Self {
        let mut t = Tensor::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    /// Zero tensor with the same shape as `self`.
    pub fn zeros_like(&self) -> Self {
        Tensor::zeros(&self.shape)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Size of the leading axis.
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    /// Number of entries per leading-axis slice.
    pub fn row_len(&self) -> usize {
        self.data.len() / self.shape[0]
    }

    /// Slice of the `i`-th leading-axis row.
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.row_len();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let w = self.row_len();
        &mut self.data[i * w..(i + 1) * w]
    }

    /// Errors with [`Error::NonFinite`] if any entry is NaN or infinite.
    pub fn check_finite(&self, what: &str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(what.to_string()))
        }
    }

    /// Matrix product `self · other` of a `m×k` and a `k×n` tensor.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.shape.len() != 2 || other.shape.len() != 2 {
            return Err(Error::Dimension(format!(
                "matmul needs 2-d operands, got {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        let (m, k) = (self.shape[0], self.shape[1]);
        let (k2, n) = (other.shape[0], other.shape[1]);
        if k != k2 {
            return Err(Error::Dimension(format!(
                "matmul inner dimensions differ: {:?} x {:?}",
                self.shape, other.shape
            )));
        }
        let mut out = Tensor::zeros(&[m, n]);
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for p in 0..k {
                    acc += self.data[i * k + p] * other.data[p * n + j];
                }
                out.data[i * n + j] = acc;
            }
        }
        out.check_finite("matmul")?;
        Ok(out)
    }

    /// Adds `other` element-wise into `self`.
    pub fn add_assign(&mut self, other: &Tensor) {
        assert_eq!(self.shape, other.shape, "add_assign shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
    }

    /// Multiplies every entry by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.data {
            *v *= factor;
        }
    }

    pub fn fill(&mut self, value: f64) {
        self.data.fill(value);
    }

    /// Sum of squared entries.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// A fixed, ordered collection of parameter tensors. Gradient structs share
/// the parameter struct's type, so the same order lines them up.
pub trait TensorSet {
    fn tensors(&self) -> Vec<&Tensor>;
    fn tensors_mut(&mut self) -> Vec<&mut Tensor>;

    /// Total number of scalar entries.
    fn num_entries(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Adds `other` tensor-by-tensor into `self`.
    fn accumulate(&mut self, other: &Self) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.add_assign(b);
        }
    }
}

/// Glorot-uniform bound `sqrt(6 / (r + c))`.
pub fn glorot_bound(rows: usize, cols: usize) -> f64 {
    (6.0 / (rows + cols) as f64).sqrt()
}

/// Embedding initialisation bound `sqrt(3 / dim)`.
pub fn embedding_bound(dim: usize) -> f64 {
    (3.0 / dim as f64).sqrt()
}

/// Dot product, summed left to right.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// `out += M · x` for a row-major `M` of shape `out.len() × x.len()`.
#[inline]
pub fn matvec_acc(m: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    debug_assert_eq!(m.len(), out.len() * cols);
    for (o, row) in out.iter_mut().zip(m.chunks_exact(cols)) {
        *o += dot(row, x);
    }
}

/// `out += Mᵀ · g` for a row-major `M` of shape `g.len() × out.len()`.
#[inline]
pub fn matvec_t_acc(m: &[f64], g: &[f64], out: &mut [f64]) {
    let cols = out.len();
    debug_assert_eq!(m.len(), g.len() * cols);
    for (gi, row) in g.iter().zip(m.chunks_exact(cols)) {
        if *gi == 0.0 {
            continue;
        }
        for (o, w) in out.iter_mut().zip(row) {
            *o += gi * w;
        }
    }
}

/// `M += g · xᵀ` for a row-major `M` of shape `g.len() × x.len()`.
#[inline]
pub fn outer_acc(m: &mut [f64], g: &[f64], x: &[f64]) {
    let cols = x.len();
    debug_assert_eq!(m.len(), g.len() * cols);
    for (gi, row) in g.iter().zip(m.chunks_exact_mut(cols)) {
        if *gi == 0.0 {
            continue;
        }
        for (w, xj) in row.iter_mut().zip(x) {
            *w += gi * xj;
        }
    }
}

/// `a += b` element-wise.
#[inline]
pub fn axpy(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += *y;
    }
}

/// Numerically stable `ln Σ exp(vᵢ)`.
pub fn logsumexp(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Domain("logsumexp of an empty vector".into()));
    }
    Ok(logsumexp_nonempty(v))
}

/// [`logsumexp`] without the emptiness check, for inner loops.
#[inline]
pub(crate) fn logsumexp_nonempty(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let mut s = 0.0;
    for x in v {
        s += (x - m).exp();
    }
    m + s.ln()
}

/// Logistic sigmoid, evaluated without overflow for large `|x|`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    x.tanh()
}

/// σ'(x) written in terms of `y = σ(x)`.
#[inline]
pub fn sigmoid_grad_from_output(y: f64) -> f64 {
    y * (1.0 - y)
}

/// tanh'(x) written in terms of `y = tanh(x)`.
#[inline]
pub fn tanh_grad_from_output(y: f64) -> f64 {
    1.0 - y * y
}

/// Rescales all gradients jointly so that their combined L2 norm does not
/// exceed `threshold`. Returns the factor that was applied (1.0 when the
/// norm is already within the threshold).
pub fn global_norm_clip(grads: &mut [&mut [f64]], threshold: f64) -> f64 {
    assert!(threshold > 0.0, "clip threshold must be positive");
    let mut sq = 0.0;
    for g in grads.iter() {
        for v in g.iter() {
            sq += v * v;
        }
    }
    let norm = sq.sqrt();
    if norm <= threshold {
        return 1.0;
    }
    let factor = threshold / norm;
    for g in grads.iter_mut() {
        for v in g.iter_mut() {
            *v *= factor;
        }
    }
    factor
}
