//! LSTM cell without peepholes, an Elman tanh cell for the BRNN baseline,
//! backpropagation through time for both, and bidirectional composition.
//!
//! The LSTM update is
//!
//! ```text
//! i_t = σ(W_i h_{t-1} + U_i x_t + b_i)
//! f_t = σ(W_f h_{t-1} + U_f x_t + b_f)
//! g_t = tanh(W_c h_{t-1} + U_c x_t + b_c)
//! c_t = f_t ⊙ c_{t-1} + i_t ⊙ g_t
//! o_t = σ(W_o h_{t-1} + U_o x_t + b_o)
//! h_t = o_t ⊙ tanh(c_t)
//! ```
//!
//! Both directions of a bidirectional layer start from the zero state and
//! own separate parameters.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{
    matvec_acc, matvec_t_acc, outer_acc, sigmoid, sigmoid_grad_from_output, tanh_grad_from_output, Tensor,
    TensorSet,
};

/// Parameters of one gate: recurrent weights `W` (H×H), input weights `U`
/// (H×D) and bias `b` (H).
#[derive(Clone, Debug, PartialEq)]
pub struct GateParams {
    pub w: Tensor,
    pub u: Tensor,
    pub b: Tensor,
}

impl GateParams {
    fn glorot<R: Rng + ?Sized>(hidden: usize, input: usize, rng: &mut R) -> Self {
        GateParams {
            w: Tensor::glorot(hidden, hidden, rng),
            u: Tensor::glorot(hidden, input, rng),
            b: Tensor::zeros(&[hidden]),
        }
    }

    fn zeros(hidden: usize, input: usize) -> Self {
        GateParams {
            w: Tensor::zeros(&[hidden, hidden]),
            u: Tensor::zeros(&[hidden, input]),
            b: Tensor::zeros(&[hidden]),
        }
    }

    /// `W h + U x + b`.
    fn preactivation(&self, h_prev: &[f64], x: &[f64]) -> Vec<f64> {
        let mut a = self.b.data().to_vec();
        matvec_acc(self.w.data(), h_prev, &mut a);
        matvec_acc(self.u.data(), x, &mut a);
        a
    }

    /// Accumulates parameter gradients for pre-activation gradient `da` and
    /// adds the propagated gradients into `dh_prev` and `dx`.
    fn backprop(&self, grads: &mut GateParams, da: &[f64], h_prev: &[f64], x: &[f64], dh_prev: &mut [f64], dx: &mut [f64]) {
        outer_acc(grads.w.data_mut(), da, h_prev);
        outer_acc(grads.u.data_mut(), da, x);
        for (b, d) in grads.b.data_mut().iter_mut().zip(da) {
            *b += d;
        }
        matvec_t_acc(self.w.data(), da, dh_prev);
        matvec_t_acc(self.u.data(), da, dx);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub input: GateParams,
    pub forget: GateParams,
    pub cell: GateParams,
    pub output: GateParams,
}

impl TensorSet for LstmParams {
    fn tensors(&self) -> Vec<&Tensor> {
        [&self.input, &self.forget, &self.cell, &self.output]
            .into_iter()
            .flat_map(|g| [&g.w, &g.u, &g.b])
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::with_capacity(12);
        for g in [&mut self.input, &mut self.forget, &mut self.cell, &mut self.output] {
            out.push(&mut g.w);
            out.push(&mut g.u);
            out.push(&mut g.b);
        }
        out
    }
}

impl LstmParams {
    /// Glorot-uniform `W`/`U`, zero biases except the forget bias at 1.0.
    pub fn new<R: Rng + ?Sized>(hidden: usize, input: usize, rng: &mut R) -> Self {
        let mut p = LstmParams {
            input: GateParams::glorot(hidden, input, rng),
            forget: GateParams::glorot(hidden, input, rng),
            cell: GateParams::glorot(hidden, input, rng),
            output: GateParams::glorot(hidden, input, rng),
        };
        p.forget.b.fill(1.0);
        p
    }

    pub fn zeros(hidden: usize, input: usize) -> Self {
        LstmParams {
            input: GateParams::zeros(hidden, input),
            forget: GateParams::zeros(hidden, input),
            cell: GateParams::zeros(hidden, input),
            output: GateParams::zeros(hidden, input),
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.input.w.rows()
    }

    pub fn input_size(&self) -> usize {
        self.input.u.shape()[1]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Activations of one LSTM step, kept for the backward pass.
#[derive(Clone, Debug)]
pub struct LstmStepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

fn check_dims(hidden: usize, input: usize, x: &[f64], h: &[f64]) -> Result<()> {
    if x.len() != input || h.len() != hidden {
        return Err(Error::Dimension(format!(
            "recurrent cell expects input {input} and state {hidden}, got {} and {}",
            x.len(),
            h.len()
        )));
    }
    Ok(())
}

/// One LSTM update.
pub fn lstm_step(params: &LstmParams, x: &[f64], prev: &LstmState) -> Result<(LstmState, LstmStepCache)> {
    check_dims(params.hidden_size(), params.input_size(), x, &prev.h)?;
    if prev.c.len() != prev.h.len() {
        return Err(Error::Dimension("cell and hidden state sizes differ".into()));
    }
    let sig = |v: Vec<f64>| v.into_iter().map(sigmoid).collect::<Vec<_>>();
    let i = sig(params.input.preactivation(&prev.h, x));
    let f = sig(params.forget.preactivation(&prev.h, x));
    let g: Vec<f64> = params.cell.preactivation(&prev.h, x).into_iter().map(f64::tanh).collect();
    let o = sig(params.output.preactivation(&prev.h, x));
    let c: Vec<f64> = (0..f.len()).map(|k| f[k] * prev.c[k] + i[k] * g[k]).collect();
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h: Vec<f64> = o.iter().zip(&tanh_c).map(|(a, b)| a * b).collect();
    let next = LstmState { h, c: c.clone() };
    let cache = LstmStepCache {
        x: x.to_vec(),
        h_prev: prev.h.clone(),
        c_prev: prev.c.clone(),
        i,
        f,
        g,
        o,
        c,
        tanh_c,
    };
    Ok((next, cache))
}

/// Runs the LSTM over `xs` from the zero state; returns every `h_t`.
pub fn lstm_forward(params: &LstmParams, xs: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<LstmStepCache>)> {
    let mut state = LstmState::zeros(params.hidden_size());
    let mut hs = Vec::with_capacity(xs.len());
    let mut caches = Vec::with_capacity(xs.len());
    for x in xs {
        let (next, cache) = lstm_step(params, x, &state)?;
        hs.push(next.h.clone());
        caches.push(cache);
        state = next;
    }
    Ok((hs, caches))
}

/// Backpropagation through time. `dh[t]` is the loss gradient with respect
/// to the output `h_t`; the gradient through the recurrent `h` and `c`
/// paths is added internally. Returns parameter gradients and `∂loss/∂x_t`.
pub fn lstm_backward_through_time(
    params: &LstmParams,
    caches: &[LstmStepCache],
    dh: &[Vec<f64>],
) -> Result<(LstmParams, Vec<Vec<f64>>)> {
    if caches.len() != dh.len() {
        return Err(Error::Contract(format!(
            "{} cached steps but {} upstream gradients",
            caches.len(),
            dh.len()
        )));
    }
    let hidden = params.hidden_size();
    let input = params.input_size();
    let mut grads = LstmParams::zeros(hidden, input);
    let mut dxs = vec![Vec::new(); caches.len()];
    let mut dh_next = vec![0.0; hidden];
    let mut dc_next = vec![0.0; hidden];
    let mut da = vec![0.0; hidden];
    for t in (0..caches.len()).rev() {
        let s = &caches[t];
        if dh[t].len() != hidden || s.x.len() != input {
            return Err(Error::Contract("cache does not match these parameters".into()));
        }
        let mut dh_prev = vec![0.0; hidden];
        let mut dx = vec![0.0; input];
        let mut dc_prev = vec![0.0; hidden];
        let mut d_o = vec![0.0; hidden];
        let mut d_f = vec![0.0; hidden];
        let mut d_i = vec![0.0; hidden];
        let mut d_g = vec![0.0; hidden];
        for k in 0..hidden {
            let dhk = dh[t][k] + dh_next[k];
            d_o[k] = dhk * s.tanh_c[k] * sigmoid_grad_from_output(s.o[k]);
            let dc = dc_next[k] + dhk * s.o[k] * tanh_grad_from_output(s.tanh_c[k]);
            d_f[k] = dc * s.c_prev[k] * sigmoid_grad_from_output(s.f[k]);
            d_i[k] = dc * s.g[k] * sigmoid_grad_from_output(s.i[k]);
            d_g[k] = dc * s.i[k] * tanh_grad_from_output(s.g[k]);
            dc_prev[k] = dc * s.f[k];
        }
        for (gate, grad, d) in [
            (&params.input, &mut grads.input, &d_i),
            (&params.forget, &mut grads.forget, &d_f),
            (&params.cell, &mut grads.cell, &d_g),
            (&params.output, &mut grads.output, &d_o),
        ] {
            da.copy_from_slice(d);
            gate.backprop(grad, &da, &s.h_prev, &s.x, &mut dh_prev, &mut dx);
        }
        dxs[t] = dx;
        dh_next = dh_prev;
        dc_next = dc_prev;
    }
    Ok((grads, dxs))
}

/// Elman cell `h_t = tanh(W h_{t-1} + U x_t + b)` for the BRNN baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct RnnParams {
    pub cell: GateParams,
}

impl TensorSet for RnnParams {
    fn tensors(&self) -> Vec<&Tensor> {
        vec![&self.cell.w, &self.cell.u, &self.cell.b]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.cell.w, &mut self.cell.u, &mut self.cell.b]
    }
}

impl RnnParams {
    pub fn new<R: Rng + ?Sized>(hidden: usize, input: usize, rng: &mut R) -> Self {
        RnnParams {
            cell: GateParams::glorot(hidden, input, rng),
        }
    }

    pub fn zeros(hidden: usize, input: usize) -> Self {
        RnnParams {
            cell: GateParams::zeros(hidden, input),
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.cell.w.rows()
    }

    pub fn input_size(&self) -> usize {
        self.cell.u.shape()[1]
    }
}

#[derive(Clone, Debug)]
pub struct RnnStepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub h: Vec<f64>,
}

pub fn rnn_step(params: &RnnParams, x: &[f64], h_prev: &[f64]) -> Result<(Vec<f64>, RnnStepCache)> {
    check_dims(params.hidden_size(), params.input_size(), x, h_prev)?;
    let h: Vec<f64> = params.cell.preactivation(h_prev, x).into_iter().map(f64::tanh).collect();
    let cache = RnnStepCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        h: h.clone(),
    };
    Ok((h, cache))
}

pub fn rnn_forward(params: &RnnParams, xs: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<RnnStepCache>)> {
    let mut h = vec![0.0; params.hidden_size()];
    let mut hs = Vec::with_capacity(xs.len());
    let mut caches = Vec::with_capacity(xs.len());
    for x in xs {
        let (next, cache) = rnn_step(params, x, &h)?;
        hs.push(next.clone());
        caches.push(cache);
        h = next;
    }
    Ok((hs, caches))
}

pub fn rnn_backward_through_time(
    params: &RnnParams,
    caches: &[RnnStepCache],
    dh: &[Vec<f64>],
) -> Result<(RnnParams, Vec<Vec<f64>>)> {
    if caches.len() != dh.len() {
        return Err(Error::Contract(format!(
            "{} cached steps but {} upstream gradients",
            caches.len(),
            dh.len()
        )));
    }
    let hidden = params.hidden_size();
    let mut grads = RnnParams::zeros(hidden, params.input_size());
    let mut dxs = vec![Vec::new(); caches.len()];
    let mut dh_next = vec![0.0; hidden];
    for t in (0..caches.len()).rev() {
        let s = &caches[t];
        let da: Vec<f64> = (0..hidden)
            .map(|k| (dh[t][k] + dh_next[k]) * tanh_grad_from_output(s.h[k]))
            .collect();
        let mut dh_prev = vec![0.0; hidden];
        let mut dx = vec![0.0; params.input_size()];
        params.cell.backprop(&mut grads.cell, &da, &s.h_prev, &s.x, &mut dh_prev, &mut dx);
        dxs[t] = dx;
        dh_next = dh_prev;
    }
    Ok((grads, dxs))
}

/// Either recurrent cell type, so the model can swap BLSTM for BRNN.
#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Recurrent {
    Lstm(LstmParams),
    Rnn(RnnParams),
}

#[derive(Debug)]
pub enum RecurrentCache {
    Lstm(Vec<LstmStepCache>),
    Rnn(Vec<RnnStepCache>),
}

impl TensorSet for Recurrent {
    fn tensors(&self) -> Vec<&Tensor> {
        match self {
            Recurrent::Lstm(p) => p.tensors(),
            Recurrent::Rnn(p) => p.tensors(),
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Recurrent::Lstm(p) => p.tensors_mut(),
            Recurrent::Rnn(p) => p.tensors_mut(),
        }
    }
}

impl Recurrent {
    pub fn hidden_size(&self) -> usize {
        match self {
            Recurrent::Lstm(p) => p.hidden_size(),
            Recurrent::Rnn(p) => p.hidden_size(),
        }
    }

    pub fn input_size(&self) -> usize {
        match self {
            Recurrent::Lstm(p) => p.input_size(),
            Recurrent::Rnn(p) => p.input_size(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        match self {
            Recurrent::Lstm(p) => Recurrent::Lstm(LstmParams::zeros(p.hidden_size(), p.input_size())),
            Recurrent::Rnn(p) => Recurrent::Rnn(RnnParams::zeros(p.hidden_size(), p.input_size())),
        }
    }

    pub fn forward(&self, xs: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, RecurrentCache)> {
        match self {
            Recurrent::Lstm(p) => lstm_forward(p, xs).map(|(h, c)| (h, RecurrentCache::Lstm(c))),
            Recurrent::Rnn(p) => rnn_forward(p, xs).map(|(h, c)| (h, RecurrentCache::Rnn(c))),
        }
    }

    pub fn backward(&self, cache: RecurrentCache, dh: &[Vec<f64>]) -> Result<(Recurrent, Vec<Vec<f64>>)> {
        match (self, cache) {
            (Recurrent::Lstm(p), RecurrentCache::Lstm(c)) => {
                lstm_backward_through_time(p, &c, dh).map(|(g, dx)| (Recurrent::Lstm(g), dx))
            }
            (Recurrent::Rnn(p), RecurrentCache::Rnn(c)) => {
                rnn_backward_through_time(p, &c, dh).map(|(g, dx)| (Recurrent::Rnn(g), dx))
            }
            _ => Err(Error::Contract("recurrent cache from a different cell type".into())),
        }
    }
}

/// Caches of both directions of a bidirectional layer.
#[derive(Debug)]
pub struct BiCache {
    fwd: RecurrentCache,
    bwd: RecurrentCache,
}

/// Runs `fwd` left to right and `bwd` right to left and concatenates the
/// hidden states per position: `out[t] = [h_fwd[t]; h_bwd[t]]`.
pub fn bidirectional_forward(
    fwd: &Recurrent,
    bwd: &Recurrent,
    xs: &[Vec<f64>],
) -> Result<(Vec<Vec<f64>>, BiCache)> {
    if xs.is_empty() {
        return Err(Error::Domain("empty input sequence".into()));
    }
    let (hf, cf) = fwd.forward(xs)?;
    let reversed: Vec<Vec<f64>> = xs.iter().rev().cloned().collect();
    let (mut hb, cb) = bwd.forward(&reversed)?;
    hb.reverse();
    let out = hf
        .into_iter()
        .zip(hb)
        .map(|(mut a, b)| {
            a.extend(b);
            a
        })
        .collect();
    Ok((out, BiCache { fwd: cf, bwd: cb }))
}

/// Gradients of both directions plus `∂loss/∂x_t` given `∂loss/∂out[t]`.
pub fn bidirectional_backward(
    fwd: &Recurrent,
    bwd: &Recurrent,
    cache: BiCache,
    d_out: &[Vec<f64>],
) -> Result<(Recurrent, Recurrent, Vec<Vec<f64>>)> {
    let hf = fwd.hidden_size();
    let d_fwd: Vec<Vec<f64>> = d_out.iter().map(|d| d[..hf].to_vec()).collect();
    let d_bwd: Vec<Vec<f64>> = d_out.iter().rev().map(|d| d[hf..].to_vec()).collect();
    let (gf, mut dx) = fwd.backward(cache.fwd, &d_fwd)?;
    let (gb, dx_rev) = bwd.backward(cache.bwd, &d_bwd)?;
    for (d, e) in dx.iter_mut().zip(dx_rev.iter().rev()) {
        for (a, b) in d.iter_mut().zip(e) {
            *a += b;
        }
    }
    Ok((gf, gb, dx))
}

/// BLSTM outputs for a sequence (no caches kept).
pub fn blstm_forward(xs: &[Vec<f64>], fwd: &LstmParams, bwd: &LstmParams) -> Result<Vec<Vec<f64>>> {
    let (out, _) = bidirectional_forward(&Recurrent::Lstm(fwd.clone()), &Recurrent::Lstm(bwd.clone()), xs)?;
    Ok(out)
}
