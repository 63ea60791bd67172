//! One Fourier layer: truncate to the retained modes, mix channels per mode,
//! scatter back. Shows the per-axis frequency strengths the scheduler reads.

use ifno::spectral::{fourier_conv_forward, frequency_strength, SpectralWeights};
use ifno::tensor::RealTensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ifno::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (n, c) = (64, 3);
    let r = SpectralWeights::random(&[4], 2, c, 0.5, &mut rng)?;
    println!("weights {:?}, effective {:?}, buffer {}", r.weights().shape(), r.effective_modes(), r.buffer_modes());

    let v = RealTensor::from_fn(&[n, c], |i| {
        let (x, ch) = ((i / c) as f64 / n as f64, i % c);
        (2.0 * std::f64::consts::PI * (ch + 1) as f64 * x).sin() + (40.0 * x).cos()
    });
    let y = fourier_conv_forward(&v, &r)?;
    println!("input {:?} -> output {:?}", v.shape(), y.shape());

    // The high-frequency part of the input lies outside the retained modes,
    // so the output is smooth.
    let roughness = |t: &RealTensor| (1..n).map(|i| (t.data()[i * c] - t.data()[(i - 1) * c]).powi(2)).sum::<f64>();
    println!("roughness of channel 0: input {:.3}, output {:.3}", roughness(&v), roughness(&y));

    for (j, s) in frequency_strength(&r).strengths[0].iter().enumerate() {
        println!("mode {j}: strength {s:.4}");
    }
    Ok(())
}
