//! Newtonian limit: a Taylor–Green vortex under a frozen frame decays as
//! `exp(-2η|k|²t)` in kinetic energy.

use bfh::constitutive::ViscousParams;
use bfh::dynamics::{Model, State};
use bfh::elastic::ElasticParams;
use bfh::field::FrameField;
use bfh::grid::Grid;
use bfh::initial::taylor_green;
use bfh::integrator::{run, Scheme, StepConfig};

fn main() -> bfh::Result<()> {
    let eta = 0.05;
    let g = Grid::new(&[32, 32], &[2.0 * std::f64::consts::PI; 2])?;
    let m = Model::new(g, ElasticParams::default(), ViscousParams::newtonian(eta))?.frozen_frame();
    let g = &m.grid;
    let s0 = State::new(FrameField::identity(g.dims()), taylor_green(g, 1.0), 0.0)?;
    let e0 = 0.5 * g.vector_l2_sq(&s0.v);
    let cfg = StepConfig {
        dt: 0.01,
        t_end: 5.0,
        scheme: Scheme::ImexRk2,
        ..Default::default()
    };
    let mut obs = |n: u64, st: &State| -> bfh::Result<()> {
        if n % 100 == 0 {
            let e = 0.5 * g.vector_l2_sq(&st.v);
            let exact = e0 * (-4.0 * eta * st.t).exp();
            println!("t = {:4.2}  E = {e:.10e}  exact {exact:.10e}  rel {:.1e}", st.t, (e / exact - 1.0).abs());
        }
        Ok(())
    };
    run(&m, s0, &cfg, None, &mut obs)?;
    Ok(())
}
