//! The frequency rule on a hand-made spectrum, then a layer expansion that
//! keeps the old weights in place.

use ifno::scheduler::{explanation_ratio, find_min_modes};
use ifno::spectral::{expand_weights, frequency_strength, SpectralWeights};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ifno::Result<()> {
    let s = [9.0, 0.5, 0.3, 0.1, 0.1];
    for k in 1..=s.len() {
        println!("K={k}: explains {:.3}", explanation_ratio(&s, k)?);
    }
    for alpha in [0.9, 0.95, 0.99, 1.0] {
        println!("alpha {alpha}: smallest K = {}", find_min_modes(&s, alpha, 1));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = SpectralWeights::random(&[2], 2, 4, 0.3, &mut rng)?;
    let grown = expand_weights(&r, &[4], 1.0 / 16.0, &mut rng)?;
    println!("extents {:?} -> {:?}", r.mode_extents(), grown.mode_extents());
    println!("old strengths {:.4?}", frequency_strength(&r).strengths[0]);
    println!("new strengths {:.4?}", frequency_strength(&grown).strengths[0]);
    Ok(())
}
