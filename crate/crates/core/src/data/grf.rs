//! Gaussian random fields on the periodic unit cell by spectral synthesis.
//!
//! The field has covariance `amplitude²·(−Δ + τ²)^(−α)`: the Fourier
//! coefficient at integer wavenumber `k` is
//! `amplitude·(4π²|k|² + τ²)^(−α/2)·ξ_k` with `ξ_k` standard complex Gaussian
//! (`E|ξ|² = 1`), Hermitian symmetric so the field is real. The mean mode is
//! zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};
use crate::tensor::{dft_adjoint, dft_real, ComplexTensor, RealTensor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrfConfig {
    pub tau: f64,
    pub alpha_cov: f64,
    pub amplitude: f64,
    pub resolution: usize,
    pub seed: u64,
}

impl GrfConfig {
    pub fn validate(&self, dims: usize) -> Result<()> {
        if !(self.tau > 0.0) {
            return arg_err("GRF tau must be positive");
        }
        if !(self.amplitude >= 0.0) {
            return arg_err("GRF amplitude must be non-negative");
        }
        let min_alpha = if dims == 1 { 1.0 } else { 1.5 };
        if !(self.alpha_cov > min_alpha) {
            return arg_err(format!("GRF alpha_cov must exceed {min_alpha} in {dims}D"));
        }
        if self.resolution < 2 {
            return arg_err("GRF resolution must be at least 2");
        }
        Ok(())
    }

    /// Coefficient scale at squared wavenumber magnitude `k2`.
    pub fn coefficient(&self, k2: f64) -> f64 {
        self.amplitude * (4.0 * PI * PI * k2 + self.tau * self.tau).powf(-self.alpha_cov / 2.0)
    }

    /// Theoretical `E|û_k|²` of the unnormalized DFT of an `N`-point 1D sample.
    pub fn expected_power_1d(&self, k: usize) -> f64 {
        let n = self.resolution as f64;
        let c = self.coefficient((k * k) as f64);
        n * n * c * c
    }
}

/// Amplitude giving unit pointwise variance for a 1D field with the given `tau`, `alpha_cov`.
pub fn unit_variance_amplitude(tau: f64, alpha_cov: f64) -> f64 {
    let cfg = GrfConfig { tau, alpha_cov, amplitude: 1.0, resolution: 2, seed: 0 };
    let sum: f64 = (1..200_000u64).map(|k| cfg.coefficient((k * k) as f64).powi(2)).sum();
    1.0 / (2.0 * sum).sqrt()
}

/// Draws one field: shape `[N]` for `dims == 1`, `[N, N]` for `dims == 2`.
///
/// In 1D the coefficients are drawn in order of increasing wavenumber, so two
/// resolutions with the same seed sample the same underlying function.
pub fn sample_grf(cfg: &GrfConfig, dims: usize) -> Result<RealTensor> {
    cfg.validate(dims)?;
    let n = cfg.resolution;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match dims {
        1 => {
            let mut spec = ComplexTensor::zeros(&[n]);
            let half = std::f64::consts::FRAC_1_SQRT_2;
            // Wavenumbers 1..⌈N/2⌉−1; the Nyquist mode of an even grid stays zero.
            for k in 1..n.div_ceil(2) {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let z = Complex64::new(re, im) * (half * cfg.coefficient((k * k) as f64));
                spec.data_mut()[k] = z;
                spec.data_mut()[n - k] = z.conj();
            }
            Ok(dft_adjoint(&spec, &[0])?.real_part())
        }
        2 => {
            let noise = RealTensor::from_fn(&[n, n], |_| rng.sample(StandardNormal));
            let mut spec = dft_real(&noise, &[0, 1])?;
            let norm = 1.0 / n as f64;
            let signed = |k: usize| if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            for i in 0..n {
                for j in 0..n {
                    let k2 = signed(i).powi(2) + signed(j).powi(2);
                    let scale = if i == 0 && j == 0 { 0.0 } else { norm * cfg.coefficient(k2) };
                    let z = spec.get(&[i, j]) * scale;
                    spec.set(&[i, j], z);
                }
            }
            Ok(dft_adjoint(&spec, &[0, 1])?.real_part())
        }
        _ => arg_err(format!("GRF dimension must be 1 or 2, got {dims}")),
    }
}
