//! Solves viscous Burgers from a random initial condition and checks that
//! refining the grid does not change the answer.

use ifno::data::{sample_grf, solve_burgers, unit_variance_amplitude, GrfConfig};
use ifno::gradcheck::relative_error;

fn main() -> ifno::Result<()> {
    let grf = |n| GrfConfig { tau: 5.0, alpha_cov: 2.0, amplitude: unit_variance_amplitude(5.0, 2.0), resolution: n, seed: 7 };
    let u0 = sample_grf(&grf(1024), 1)?;
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let energy = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    println!("t     mean        energy");
    for t in [0.0, 0.1, 0.25, 0.5, 1.0] {
        let u = if t == 0.0 { u0.clone() } else { solve_burgers(&u0, 0.1, t)? };
        println!("{t:<5} {:+.3e}  {:.4e}", mean(u.data()), energy(u.data()));
    }

    // Same seed on a 4x finer grid shares every low mode of the draw.
    let coarse = solve_burgers(&u0, 0.1, 1.0)?;
    let fine = solve_burgers(&sample_grf(&grf(4096), 1)?, 0.1, 1.0)?;
    let restricted: Vec<f64> = fine.data().iter().step_by(4).copied().collect();
    println!("1024 vs 4096 grid at t=1: relative difference {:.2e}", relative_error(coarse.data(), &restricted));
    Ok(())
}
