//! Compares reverse-mode gradients of a small model with central finite
//! differences.

use ifno::gradcheck::{numeric_gradient, relative_error};
use ifno::model::{FnoConfig, FnoModel};
use ifno::tensor::RealTensor;

fn main() -> ifno::Result<()> {
    let cfg = FnoConfig { layers: 2, channels: 4, modes: vec![3], buffer: 2, init_scale: 0.25, ..FnoConfig::new(1) };
    let model = FnoModel::init(cfg, 1, 1, 5)?;
    let v = RealTensor::from_fn(&[16, 1], |i| (0.4 * i as f64).sin());
    let t = RealTensor::from_fn(&[16, 1], |i| (0.2 * i as f64).cos());

    let (loss, grads) = model.loss_and_grads(&v, &t)?;
    let analytic = model.flatten_grads(&grads)?;
    let mut probe = model.clone();
    let numeric = numeric_gradient(
        |p| {
            probe.load_flat_params(p).expect("same layout");
            probe.loss_and_grads(&v, &t).expect("finite").0
        },
        &model.flatten_params(),
        1e-6,
    );
    println!("loss {loss:.6}, {} parameters", analytic.len());
    println!("relative gradient error {:.2e}", relative_error(&analytic, &numeric));
    Ok(())
}
