//! Both sides of the rotational lower bounds for a family of amplitudes.

use bfh::constitutive::ViscousParams;
use bfh::diagnostics::dissipative_estimate_report;
use bfh::dynamics::{Model, State};
use bfh::elastic::ElasticParams;
use bfh::grid::Grid;
use bfh::initial::{random_frame_field, random_velocity};

fn main() -> bfh::Result<()> {
    let g = Grid::new(&[48, 48], &[2.0 * std::f64::consts::PI; 2])?;
    let m = Model::new(g, ElasticParams::default(), ViscousParams::default())?;
    let g = &m.grid;
    println!("{:>8} {:>2} {:>12} {:>12} {:>12} {:>12}", "amp", "s", "ratio 𝓛F", "ratio 𝓗", "E_s", "D_s");
    for amp in [1e-3, 1e-1, 0.5, 2.0] {
        let st = State::new(random_frame_field(g, amp, 2, 17)?, random_velocity(g, amp, 2, 17)?, 0.0)?;
        for s in 0..=3 {
            let r = dissipative_estimate_report(&m, &st, s)?;
            let hs = r.lfs.map(|x| format!("{:.6}", x.ratio)).unwrap_or_else(|| "-".into());
            let flag = if r.flagged() { " *" } else { "" };
            println!("{amp:8.0e} {s:2} {:12.6} {hs:>12} {:12.4e} {:12.4e}{flag}", r.lf.ratio, r.e_s, r.d_s);
        }
    }
    Ok(())
}
