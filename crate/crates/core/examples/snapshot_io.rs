//! Binary snapshot round trip and what a damaged file looks like on read.

use bfh::dynamics::State;
use bfh::grid::Grid;
use bfh::initial::{random_frame_field, random_velocity};
use bfh::io::{read_snapshot, write_snapshot, Snapshot};

fn main() -> bfh::Result<()> {
    let g = Grid::new(&[32, 24], &[2.0 * std::f64::consts::PI, 4.0])?;
    let st = State::new(random_frame_field(&g, 0.5, 2, 9)?, random_velocity(&g, 0.3, 2, 9)?, 1.25)?;
    let path = std::env::temp_dir().join(format!("bfh_example_{}.bfh", std::process::id()));
    write_snapshot(&path, &g, &st)?;
    let bytes = std::fs::read(&path).map_err(|e| bfh::Error::io("reading back", e))?;
    let back = read_snapshot(&path)?;
    println!("{} bytes, dims {:?}, t = {}, identical: {}", bytes.len(), back.dims, back.state.t, back.state == st);

    let mut flipped = bytes.clone();
    flipped[200] ^= 0x10;
    println!("flipped bit:  {}", Snapshot::from_bytes(&flipped).unwrap_err());
    println!("truncated:    {}", Snapshot::from_bytes(&bytes[..bytes.len() / 2]).unwrap_err());
    let mut future = bytes;
    future[4] = 9;
    println!("new version:  {}", Snapshot::from_bytes(&future).unwrap_err());
    let _ = std::fs::remove_file(&path);
    Ok(())
}
