//! Linear-chain CRF whose log-potential for the label pair `(a, b)` at
//! position `t` is `W[a,b] · z_t + bias[a,b]`: one weight vector per ordered
//! label pair, so emission and transition scores are not factored apart.
//!
//! Labels are `0..K`. The predecessor of the first position is the reserved
//! START row `K`, which never appears as an output label. There is no STOP
//! state. All inference runs in log space.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{dot, glorot_bound, logsumexp_nonempty, Tensor, TensorSet};

#[derive(Clone, Debug, PartialEq)]
pub struct CrfParams {
    /// Shape `[K+1, K, d]`.
    pub weights: Tensor,
    /// Shape `[K+1, K]`.
    pub bias: Tensor,
}

/// Forward/backward tables of one sentence.
#[derive(Clone, Debug, PartialEq)]
pub struct CrfChart {
    pub log_alpha: Tensor,
    pub log_beta: Tensor,
    pub log_z: f64,
}

/// Gradient of `log p(y|z)` with respect to the CRF parameters and inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct CrfGradient {
    pub params: CrfParams,
    pub dz: Vec<Vec<f64>>,
    pub log_likelihood: f64,
}

impl TensorSet for CrfParams {
    fn tensors(&self) -> Vec<&Tensor> {
        vec![&self.weights, &self.bias]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.weights, &mut self.bias]
    }
}

/// Scores of every reachable label pair, `scores[0][y]` for `(START, y)` and
/// `scores[t][a * K + b]` for `t ≥ 1`.
pub type PairScores = Vec<Vec<f64>>;

impl CrfParams {
    /// Glorot-uniform weights (treating `W` as a `(K+1)·K × d` matrix) and zero bias.
    pub fn new<R: Rng + ?Sized>(num_labels: usize, dim: usize, rng: &mut R) -> Self {
        let rows = (num_labels + 1) * num_labels;
        CrfParams {
            weights: Tensor::uniform(&[num_labels + 1, num_labels, dim], glorot_bound(rows, dim), rng),
            bias: Tensor::zeros(&[num_labels + 1, num_labels]),
        }
    }

    pub fn zeros(num_labels: usize, dim: usize) -> Self {
        CrfParams {
            weights: Tensor::zeros(&[num_labels + 1, num_labels, dim]),
            bias: Tensor::zeros(&[num_labels + 1, num_labels]),
        }
    }

    pub fn num_labels(&self) -> usize {
        self.bias.shape()[1]
    }

    pub fn start(&self) -> usize {
        self.num_labels()
    }

    pub fn dim(&self) -> usize {
        self.weights.shape()[2]
    }

    fn pair_weights(&self, prev: usize, y: usize) -> &[f64] {
        let d = self.dim();
        let off = (prev * self.num_labels() + y) * d;
        &self.weights.data()[off..off + d]
    }

    #[inline]
    fn score_unchecked(&self, z: &[f64], prev: usize, y: usize) -> f64 {
        dot(self.pair_weights(prev, y), z) + self.bias.data()[prev * self.num_labels() + y]
    }

    /// Log-potential `W[prev,y] · z + bias[prev,y]`.
    pub fn pair_score(&self, z: &[f64], prev: usize, y: usize) -> Result<f64> {
        let k = self.num_labels();
        if y >= k {
            return Err(Error::Contract(format!(
                "label {y} is not an output label (K = {k})"
            )));
        }
        if prev > k {
            return Err(Error::Bounds {
                index: prev,
                size: k + 1,
                what: "predecessor labels",
            });
        }
        if z.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "CRF input has {} features, expected {}",
                z.len(),
                self.dim()
            )));
        }
        Ok(self.score_unchecked(z, prev, y))
    }

    fn check_inputs(&self, zs: &[Vec<f64>]) -> Result<()> {
        if zs.is_empty() {
            return Err(Error::Domain("CRF needs a non-empty sequence".into()));
        }
        if let Some(z) = zs.iter().find(|z| z.len() != self.dim()) {
            return Err(Error::Dimension(format!(
                "CRF input has {} features, expected {}",
                z.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn check_labels(&self, zs: &[Vec<f64>], ys: &[usize]) -> Result<()> {
        if ys.len() != zs.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} positions",
                ys.len(),
                zs.len()
            )));
        }
        let k = self.num_labels();
        if let Some(&bad) = ys.iter().find(|&&y| y >= k) {
            return Err(Error::Bounds {
                index: bad,
                size: k,
                what: "output labels",
            });
        }
        Ok(())
    }

    /// Scores of every label pair at every position.
    pub fn pair_scores(&self, zs: &[Vec<f64>]) -> Result<PairScores> {
        self.check_inputs(zs)?;
        let k = self.num_labels();
        let mut out = Vec::with_capacity(zs.len());
        out.push((0..k).map(|y| self.score_unchecked(&zs[0], k, y)).collect());
        for z in &zs[1..] {
            let mut s = Vec::with_capacity(k * k);
            for a in 0..k {
                for b in 0..k {
                    s.push(self.score_unchecked(z, a, b));
                }
            }
            out.push(s);
        }
        Ok(out)
    }

    /// Unnormalised log-score of a labelling, summed left to right.
    pub fn sequence_score(&self, zs: &[Vec<f64>], ys: &[usize]) -> Result<f64> {
        self.check_inputs(zs)?;
        self.check_labels(zs, ys)?;
        let mut acc = 0.0;
        let mut prev = self.start();
        for (z, &y) in zs.iter().zip(ys) {
            acc += self.score_unchecked(z, prev, y);
            prev = y;
        }
        Ok(acc)
    }

    /// `log Z` and the forward/backward chart.
    pub fn log_partition(&self, zs: &[Vec<f64>]) -> Result<(f64, CrfChart)> {
        let scores = self.pair_scores(zs)?;
        Ok(self.chart_from_scores(&scores))
    }

    fn chart_from_scores(&self, scores: &PairScores) -> (f64, CrfChart) {
        let k = self.num_labels();
        let n = scores.len();
        let mut alpha = Tensor::zeros(&[n, k]);
        alpha.row_mut(0).copy_from_slice(&scores[0]);
        let mut buf = vec![0.0; k];
        for t in 1..n {
            for b in 0..k {
                for a in 0..k {
                    buf[a] = alpha.row(t - 1)[a] + scores[t][a * k + b];
                }
                alpha.row_mut(t)[b] = logsumexp_nonempty(&buf);
            }
        }
        let log_z = logsumexp_nonempty(alpha.row(n - 1));

        let mut beta = Tensor::zeros(&[n, k]);
        for t in (0..n - 1).rev() {
            for a in 0..k {
                for b in 0..k {
                    buf[b] = scores[t + 1][a * k + b] + beta.row(t + 1)[b];
                }
                beta.row_mut(t)[a] = logsumexp_nonempty(&buf);
            }
        }
        (
            log_z,
            CrfChart {
                log_alpha: alpha,
                log_beta: beta,
                log_z,
            },
        )
    }

    /// `log Z` recomputed from the backward table:
    /// `logsumexp_y(score(START, y) + log_beta[0][y])`.
    pub fn log_partition_backward(&self, zs: &[Vec<f64>]) -> Result<f64> {
        let scores = self.pair_scores(zs)?;
        let (_, chart) = self.chart_from_scores(&scores);
        let v: Vec<f64> = scores[0]
            .iter()
            .zip(chart.log_beta.row(0))
            .map(|(s, b)| s + b)
            .collect();
        Ok(logsumexp_nonempty(&v))
    }

    /// `log p(ys | zs)`.
    pub fn log_likelihood(&self, zs: &[Vec<f64>], ys: &[usize]) -> Result<f64> {
        let gold = self.sequence_score(zs, ys)?;
        let (log_z, _) = self.log_partition(zs)?;
        Ok(gold - log_z)
    }

    fn marginals_from(&self, scores: &PairScores, chart: &CrfChart) -> PairScores {
        let k = self.num_labels();
        let mut out = Vec::with_capacity(scores.len());
        out.push(
            (0..k)
                .map(|b| (scores[0][b] + chart.log_beta.row(0)[b] - chart.log_z).exp())
                .collect(),
        );
        for t in 1..scores.len() {
            let mut m = Vec::with_capacity(k * k);
            for a in 0..k {
                for b in 0..k {
                    let lp = chart.log_alpha.row(t - 1)[a] + scores[t][a * k + b] + chart.log_beta.row(t)[b]
                        - chart.log_z;
                    m.push(lp.exp());
                }
            }
            out.push(m);
        }
        out
    }

    /// `P(y_{t-1} = a, y_t = b | z)` in [`PairScores`] layout.
    pub fn pairwise_marginals(&self, zs: &[Vec<f64>]) -> Result<PairScores> {
        let scores = self.pair_scores(zs)?;
        let (_, chart) = self.chart_from_scores(&scores);
        Ok(self.marginals_from(&scores, &chart))
    }

    /// Gradient of `log p(ys | zs)`: empirical pair indicators minus model
    /// pairwise marginals, pushed onto the bias, the pair weights and `z`.
    pub fn loglik_gradient(&self, zs: &[Vec<f64>], ys: &[usize]) -> Result<CrfGradient> {
        self.check_inputs(zs)?;
        self.check_labels(zs, ys)?;
        let k = self.num_labels();
        let d = self.dim();
        let scores = self.pair_scores(zs)?;
        let (log_z, chart) = self.chart_from_scores(&scores);
        let marginals = self.marginals_from(&scores, &chart);

        let mut grads = CrfParams::zeros(k, d);
        let mut dz = vec![vec![0.0; d]; zs.len()];
        let mut gold = 0.0;
        for (t, z) in zs.iter().enumerate() {
            let (prevs, gold_prev) = if t == 0 { (k..k + 1, k) } else { (0..k, ys[t - 1]) };
            gold += self.score_unchecked(z, gold_prev, ys[t]);
            for a in prevs {
                for b in 0..k {
                    let m = if t == 0 { marginals[0][b] } else { marginals[t][a * k + b] };
                    let indicator = if a == gold_prev && b == ys[t] { 1.0 } else { 0.0 };
                    let factor = indicator - m;
                    if factor == 0.0 {
                        continue;
                    }
                    let pair = a * k + b;
                    grads.bias.data_mut()[pair] += factor;
                    let gw = &mut grads.weights.data_mut()[pair * d..(pair + 1) * d];
                    for (g, x) in gw.iter_mut().zip(z) {
                        *g += factor * x;
                    }
                    for (g, w) in dz[t].iter_mut().zip(self.pair_weights(a, b)) {
                        *g += factor * w;
                    }
                }
            }
        }
        Ok(CrfGradient {
            params: grads,
            dz,
            log_likelihood: gold - log_z,
        })
    }

    /// Highest-scoring labelling and its score. Ties go to the lowest label
    /// index at the final position and at every backpointer.
    pub fn viterbi_decode(&self, zs: &[Vec<f64>]) -> Result<(Vec<usize>, f64)> {
        let scores = self.pair_scores(zs)?;
        let k = self.num_labels();
        let n = scores.len();
        let mut delta = scores[0].clone();
        let mut back = vec![vec![0usize; k]; n];
        let mut next = vec![0.0; k];
        for t in 1..n {
            for b in 0..k {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for a in 0..k {
                    let v = delta[a] + scores[t][a * k + b];
                    if v > best {
                        best = v;
                        arg = a;
                    }
                }
                next[b] = best;
                back[t][b] = arg;
            }
            std::mem::swap(&mut delta, &mut next);
        }
        let mut best = f64::NEG_INFINITY;
        let mut last = 0;
        for (y, &v) in delta.iter().enumerate() {
            if v > best {
                best = v;
                last = y;
            }
        }
        let mut path = vec![0; n];
        path[n - 1] = last;
        for t in (1..n).rev() {
            path[t - 1] = back[t][path[t]];
        }
        Ok((path, best))
    }
}

/// Exhaustive enumeration over all `K^n` labellings. Intended as a test
/// oracle for the dynamic programs above.
pub mod brute_force {
    use super::*;

    /// Largest number of labellings the oracle will enumerate.
    pub const LIMIT: usize = 1_000_000;

    fn check_size(k: usize, n: usize) -> Result<()> {
        let mut total: usize = 1;
        for _ in 0..n {
            total = total.saturating_mul(k);
            if total > LIMIT {
                return Err(Error::TooLarge {
                    labels: k,
                    length: n,
                    limit: LIMIT,
                });
            }
        }
        Ok(())
    }

    /// Calls `f` with every labelling in lexicographic order along with its score.
    pub fn for_each_sequence<F>(params: &CrfParams, zs: &[Vec<f64>], mut f: F) -> Result<()>
    where
        F: FnMut(&[usize], f64),
    {
        let k = params.num_labels();
        let n = zs.len();
        check_size(k, n)?;
        let mut ys = vec![0usize; n];
        loop {
            let s = params.sequence_score(zs, &ys)?;
            f(&ys, s);
            let mut pos = n;
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                ys[pos] += 1;
                if ys[pos] < k {
                    break;
                }
                ys[pos] = 0;
            }
        }
    }

    pub fn log_partition(params: &CrfParams, zs: &[Vec<f64>]) -> Result<f64> {
        let mut scores = Vec::new();
        for_each_sequence(params, zs, |_, s| scores.push(s))?;
        Ok(logsumexp_nonempty(&scores))
    }

    /// Maximum-score labelling. Among exact ties the labelling that is
    /// smallest when compared from the last position backwards wins, which
    /// is the labelling Viterbi's lowest-index rule selects.
    pub fn decode(params: &CrfParams, zs: &[Vec<f64>]) -> Result<(Vec<usize>, f64)> {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for_each_sequence(params, zs, |ys, s| {
            let better = match &best {
                None => true,
                Some((b, bs)) => s > *bs || (s == *bs && ys.iter().rev().lt(b.iter().rev())),
            };
            if better {
                best = Some((ys.to_vec(), s));
            }
        })?;
        Ok(best.expect("at least one labelling"))
    }

    /// Pairwise marginals in [`PairScores`] layout by summing probabilities.
    pub fn pairwise_marginals(params: &CrfParams, zs: &[Vec<f64>]) -> Result<PairScores> {
        let k = params.num_labels();
        let log_z = log_partition(params, zs)?;
        let mut out: PairScores = (0..zs.len())
            .map(|t| vec![0.0; if t == 0 { k } else { k * k }])
            .collect();
        for_each_sequence(params, zs, |ys, s| {
            let p = (s - log_z).exp();
            out[0][ys[0]] += p;
            for t in 1..ys.len() {
                out[t][ys[t - 1] * k + ys[t]] += p;
            }
        })?;
        Ok(out)
    }
}
