//! Darcy flow on the unit square with a two-level coefficient.

use ifno::data::{darcy_residual, make_darcy_coefficient, sample_grf, solve_darcy, GrfConfig};

fn main() -> ifno::Result<()> {
    let n = 65;
    let field = sample_grf(&GrfConfig { tau: 3.0, alpha_cov: 2.0, amplitude: 1.0, resolution: n, seed: 4 }, 2)?;
    let a = make_darcy_coefficient(&field, 12.0, 3.0)?;
    let high = a.data().iter().filter(|&&x| x == 12.0).count() as f64 / a.len() as f64;
    println!("coefficient {n}x{n}, high-permeability fraction {high:.3}");

    let u = solve_darcy(&a, 1.0)?;
    let max = u.data().iter().copied().fold(f64::MIN, f64::max);
    let min = u.data().iter().copied().fold(f64::MAX, f64::min);
    println!("pressure range [{min:.3e}, {max:.3e}]");
    println!("relative residual {:.2e}", darcy_residual(&a, &u, 1.0)?);

    for row in (0..n).step_by(8) {
        let line: String = (0..n).step_by(4).map(|col| if a.data()[row * n + col] > 5.0 { '#' } else { '.' }).collect();
        println!("{line}");
    }
    Ok(())
}
