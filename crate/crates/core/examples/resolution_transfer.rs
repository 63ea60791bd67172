//! Trains at 64 points and evaluates the same model on finer grids of the
//! same test functions.

use ifno::data::Problem;
use ifno::experiment::{generate_split, new_trainer, quick_config};
use ifno::train::evaluate;

fn main() -> ifno::Result<()> {
    let mut cfg = quick_config(Problem::Burgers);
    cfg.data.n_train = 16;
    cfg.data.n_test = 8;
    cfg.data.generate_resolution = 1024;
    cfg.train.epochs = 30;
    cfg.train.batch_size = 4;
    let train = generate_split(&cfg, 0)?.at_resolution(64)?;
    let test = generate_split(&cfg, 1)?;
    let mut trainer = new_trainer(&cfg, &train)?;
    trainer.run(&train, &test.at_resolution(64)?)?;
    for r in [64, 128, 256, 512, 1024] {
        let losses = evaluate(&trainer.model, &test.at_resolution(r)?)?;
        println!("resolution {r:5}: relative L2 {:.4}", losses.iter().sum::<f64>() / losses.len() as f64);
    }
    Ok(())
}
