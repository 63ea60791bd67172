//! PDE datasets: random inputs, reference solvers and the on-disk format.

pub mod burgers;
pub mod darcy;
pub mod dataset;
pub mod grf;

pub use burgers::{solve_burgers, BurgersSolver};
pub use darcy::{darcy_residual, make_darcy_coefficient, solve_darcy, DarcySolver};
pub use dataset::{encoded_len, read_dataset, subsample, write_dataset, Dataset, Problem, Sample};
pub use grf::{sample_grf, unit_variance_amplitude, GrfConfig};

use crate::error::Result;
use crate::tensor::RealTensor;

/// Everything needed to draw one `(input, output)` pair besides its seed and resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeSetup {
    pub problem: Problem,
    pub tau: f64,
    pub alpha_cov: f64,
    pub amplitude: f64,
    /// Burgers viscosity.
    pub viscosity: f64,
    pub t_final: f64,
    /// Darcy coefficient levels.
    pub hi: f64,
    pub lo: f64,
}

impl PdeSetup {
    pub fn burgers() -> Self {
        Self {
            problem: Problem::Burgers,
            tau: 5.0,
            alpha_cov: 2.0,
            amplitude: unit_variance_amplitude(5.0, 2.0),
            viscosity: 0.1,
            t_final: 1.0,
            hi: 12.0,
            lo: 3.0,
        }
    }

    pub fn darcy() -> Self {
        Self { problem: Problem::Darcy, tau: 3.0, amplitude: 1.0, ..Self::burgers() }
    }

    pub fn for_problem(problem: Problem) -> Self {
        match problem {
            Problem::Burgers => Self::burgers(),
            Problem::Darcy => Self::darcy(),
        }
    }

    fn grf(&self, resolution: usize, seed: u64) -> GrfConfig {
        GrfConfig { tau: self.tau, alpha_cov: self.alpha_cov, amplitude: self.amplitude, resolution, seed }
    }

    /// Draws the input field and solves for the output.
    pub fn sample(&self, resolution: usize, seed: u64) -> Result<Sample> {
        let (input, output) = match self.problem {
            Problem::Burgers => {
                let u0 = sample_grf(&self.grf(resolution, seed), 1)?;
                let u1 = solve_burgers(&u0, self.viscosity, self.t_final)?;
                (u0, u1)
            }
            Problem::Darcy => {
                let g = sample_grf(&self.grf(resolution, seed), 2)?;
                let a = make_darcy_coefficient(&g, self.hi, self.lo)?;
                let u = solve_darcy(&a, 1.0)?;
                (a, u)
            }
        };
        Sample::new(with_channel(input)?, with_channel(output)?)
    }

    /// `count` samples with seeds derived from `(base_seed, split, index)`.
    pub fn generate(&self, count: usize, resolution: usize, base_seed: u64, split: u64, config: &str) -> Result<Dataset> {
        let samples = (0..count)
            .map(|i| self.sample(resolution, sample_seed(base_seed, split, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(self.problem, samples, config.to_string())
    }
}

/// Seed of sample `index` in split `split` (0 = train, 1 = test).
pub fn sample_seed(base: u64, split: u64, index: u64) -> u64 {
    let mut z = base ^ split.wrapping_mul(0xD1B5_4A32_D192_ED03) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn with_channel(t: RealTensor) -> Result<RealTensor> {
    let mut shape = t.shape().to_vec();
    shape.push(1);
    t.reshape(shape)
}
