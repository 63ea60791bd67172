//! Trains briefly, writes the run CSVs and renders them to SVG.
//! Output goes to the directory given as the first argument.

use std::path::PathBuf;

use ifno::data::Problem;
use ifno::experiment::{cmd_generate, cmd_plot, cmd_train, quick_config};

fn main() -> ifno::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("ifno-plot"), PathBuf::from);
    let mut cfg = quick_config(Problem::Burgers);
    cfg.train.epochs = 15;
    cmd_generate(&cfg, &out)?;
    println!("{}", cmd_train(&cfg, &out)?);
    let csvs: Vec<PathBuf> = ["metrics.csv", "spectrum.csv", "modes.csv"].iter().map(|f| out.join(f)).collect();
    for svg in cmd_plot(&csvs, &out)? {
        println!("wrote {}", svg.display());
    }
    Ok(())
}
