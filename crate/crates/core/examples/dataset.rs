//! Generates a small Burgers dataset, writes it in the binary container,
//! reads it back and subsamples it.

use ifno::data::{encoded_len, read_dataset, write_dataset, PdeSetup};

fn main() -> ifno::Result<()> {
    let ds = PdeSetup::burgers().generate(8, 1024, 42, 0, "example")?;
    let path = std::env::temp_dir().join("ifno-example.ifnd");
    write_dataset(&ds, &path)?;
    let size = std::fs::metadata(&path)?.len();
    println!("{} samples at {:?} -> {} bytes (expected {})", ds.len(), ds.resolution(), size, encoded_len(8, &[1024], 1, 7));

    let back = read_dataset(&path)?;
    assert_eq!(back, ds);
    for r in [512, 256, 64] {
        let coarse = back.at_resolution(r)?;
        println!("at {r}: first input values {:?}", &coarse.samples[0].input.data()[..3]);
    }
    std::fs::remove_file(path)?;
    Ok(())
}
