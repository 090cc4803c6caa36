//! Backpropagation through time for one LSTM direction, compared with
//! central differences on the loss `Σ_t c_t · h_t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqtag::blstm::{lstm_backward_through_time, lstm_forward, LstmParams};
use seqtag::tensor::{dot, TensorSet};

fn loss(p: &LstmParams, xs: &[Vec<f64>], cs: &[Vec<f64>]) -> f64 {
    let (hs, _) = lstm_forward(p, xs).expect("forward");
    hs.iter().zip(cs).map(|(h, c)| dot(h, c)).sum()
}

fn main() -> seqtag::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (hidden, input, steps) = (4, 3, 6);
    let params = LstmParams::new(hidden, input, &mut rng);
    let xs: Vec<Vec<f64>> = (0..steps).map(|_| (0..input).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let cs: Vec<Vec<f64>> = (0..steps).map(|_| (0..hidden).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();

    let (_, caches) = lstm_forward(&params, &xs)?;
    let (grads, _) = lstm_backward_through_time(&params, &caches, &cs)?;
    let h = 1e-5;
    let names = ["input", "forget", "cell", "output"].iter().flat_map(|g| ["W", "U", "b"].map(|p| format!("{g}.{p}")));
    for ((ti, g), name) in grads.tensors().iter().enumerate().zip(names) {
        let (mut diff, mut scale) = (0.0f64, 0.0f64);
        for j in 0..g.len() {
            let mut p = params.clone();
            p.tensors_mut()[ti].data_mut()[j] += h;
            let plus = loss(&p, &xs, &cs);
            p.tensors_mut()[ti].data_mut()[j] -= 2.0 * h;
            let minus = loss(&p, &xs, &cs);
            let numeric = (plus - minus) / (2.0 * h);
            diff += (numeric - g.data()[j]).powi(2);
            scale += numeric.powi(2).max(g.data()[j].powi(2));
        }
        println!("{name:<9} relative error {:.2e}", (diff / scale.max(1e-300)).sqrt());
    }
    Ok(())
}
