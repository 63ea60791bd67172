//! Trains a small IFNO on Burgers data and prints how the effective modes
//! grow. Pass an epoch count to train longer.

use ifno::data::Problem;
use ifno::experiment::{generate_split, new_trainer, quick_config};

fn main() -> ifno::Result<()> {
    let epochs = std::env::args().nth(1).map_or(40, |s| s.parse().expect("epoch count"));
    let mut cfg = quick_config(Problem::Burgers);
    cfg.data.n_train = 16;
    cfg.data.n_test = 16;
    cfg.train.epochs = epochs;
    cfg.train.batch_size = 4;
    cfg.train.lr_halving_period = 20;
    let r = cfg.data.train_resolution;
    let train = generate_split(&cfg, 0)?.at_resolution(r)?;
    let test = generate_split(&cfg, 1)?.at_resolution(r)?;

    let mut trainer = new_trainer(&cfg, &train)?;
    println!("{} parameters", trainer.model.num_parameters());
    for _ in 0..epochs {
        let rec = trainer.step_epoch(&train, &test)?;
        if rec.epoch % 5 == 0 || rec.epoch + 1 == epochs {
            let k: Vec<usize> = rec.modes.iter().map(|m| m[0]).collect();
            println!("epoch {:3}  train {:.4}  test {:.4}  K {:?}", rec.epoch, rec.train_l2, rec.test_l2, k);
        }
    }
    let bytes = ifno::checkpoint::to_bytes(&trainer.model);
    let restored = ifno::checkpoint::from_bytes(&bytes)?;
    println!("checkpoint {} bytes, restored modes {:?}", bytes.len(), restored.model_modes());
    Ok(())
}
