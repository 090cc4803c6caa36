//! CRF inference on a random instance, checked against exhaustive enumeration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqtag::crf::{brute_force, CrfParams};

fn main() -> seqtag::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (k, d, n) = (3, 4, 5);
    let mut crf = CrfParams::new(k, d, &mut rng);
    for b in crf.bias.data_mut() {
        *b = rng.gen_range(-1.0..1.0);
    }
    let zs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();

    let (log_z, _) = crf.log_partition(&zs)?;
    let (path, score) = crf.viterbi_decode(&zs)?;
    println!("log Z     forward {log_z:.12}  brute {:.12}", brute_force::log_partition(&crf, &zs)?);
    let (bpath, bscore) = brute_force::decode(&crf, &zs)?;
    println!("viterbi   {path:?} {score:.6}  brute {bpath:?} {bscore:.6}");
    println!("p(best) = {:.6}", (score - log_z).exp());

    let m = crf.pairwise_marginals(&zs)?;
    let bm = brute_force::pairwise_marginals(&crf, &zs)?;
    let worst = m.iter().flatten().zip(bm.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("unigram marginals at t=0: {:?}", m[0].iter().map(|p| format!("{p:.4}")).collect::<Vec<_>>());
    println!("max marginal difference vs brute force: {worst:.2e}");
    Ok(())
}
