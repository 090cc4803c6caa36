//! Character CNN word representations: padding, max-over-time pooling and
//! which window each filter picked.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqtag::char_cnn::CharCnnParams;

fn main() -> seqtag::Result<()> {
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyz".chars().collect();
    // Row 0 is the padding/unknown row.
    let encode = |w: &str| -> Vec<usize> {
        w.chars().map(|c| alphabet.iter().position(|&a| a == c).map_or(0, |i| i + 1)).collect()
    };
    let cnn = CharCnnParams::new(alphabet.len() + 1, 8, 4, 3, &mut ChaCha8Rng::seed_from_u64(1));
    println!("padding (left, right) = {:?}", cnn.padding());
    for word in ["a", "walked", "walking", "unwalkable"] {
        let chars = encode(word);
        let (rep, cache) = cnn.forward(&chars, None)?;
        println!(
            "{word:>11}: padded len {:>2}, argmax windows {:?}, rep {:?}",
            cache.padded_len(),
            cache.argmax(),
            rep.iter().map(|v| format!("{v:+.3}")).collect::<Vec<_>>()
        );
    }
    Ok(())
}
