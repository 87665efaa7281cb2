//! A small-amplitude coupled run with the energy ledger written to CSV.
//!
//! Usage: `cargo run --release --example small_data_run [ledger.csv]`

use bfh::constitutive::ViscousParams;
use bfh::diagnostics::LedgerRecorder;
use bfh::dynamics::{Model, State};
use bfh::elastic::ElasticParams;
use bfh::grid::Grid;
use bfh::initial::{random_frame_field, random_velocity};
use bfh::integrator::{run, Scheme, StepConfig};
use bfh::io::LedgerWriter;

fn main() -> bfh::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "small_data_ledger.csv".into());
    let g = Grid::new(&[32, 32], &[2.0 * std::f64::consts::PI; 2])?;
    let m = Model::new(g, ElasticParams::default(), ViscousParams::default())?;
    let g = &m.grid;
    let s0 = State::new(random_frame_field(g, 1e-2, 2, 42)?, random_velocity(g, 1e-2, 2, 42)?, 0.0)?;
    let cfg = StepConfig {
        dt: 2e-3,
        t_end: 2.0,
        scheme: Scheme::ImexRk2,
        ..Default::default()
    };
    let s = [0, 1, 2];
    let mut sink = LedgerWriter::create(path.as_ref(), &s)?;
    let mut rec = LedgerRecorder::new(&m, &s, 50)?.with_sink(&mut sink);
    let out = run(&m, s0, &cfg, None, &mut rec)?;
    for r in rec.rows.iter().step_by(4) {
        println!(
            "t = {:4.2}  E_0 = {:.6e}  E_2 = {:.6e}  D_0 = {:.3e}  blow-up {:.4e}",
            r.t,
            r.e(0).unwrap(),
            r.e(2).unwrap(),
            r.e_d[0].2,
            r.blowup
        );
    }
    println!("{} steps, ledger in {path}", out.steps);
    Ok(())
}
