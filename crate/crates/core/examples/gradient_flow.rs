//! Frozen-velocity relaxation of a distorted frame field to equilibrium.

use bfh::dynamics::{Model, State};
use bfh::elastic::{elastic_energy, ElasticParams, ElasticResponse};
use bfh::constitutive::ViscousParams;
use bfh::field::VectorField;
use bfh::grid::Grid;
use bfh::initial::random_frame_field;
use bfh::integrator::{step, Scheme, StepConfig};

fn main() -> bfh::Result<()> {
    let g = Grid::new(&[32, 32], &[2.0 * std::f64::consts::PI; 2])?;
    let m = Model::new(g, ElasticParams::default(), ViscousParams::default())?.frozen_velocity();
    let g = &m.grid;
    let mut st = State::new(random_frame_field(g, 0.8, 1, 7)?, VectorField::zeros(g.dims()), 0.0)?;
    let cfg = StepConfig {
        dt: 0.02,
        scheme: Scheme::ImexRk2,
        ..Default::default()
    };
    for n in 0..=400u64 {
        if n % 50 == 0 {
            let resp = ElasticResponse::compute(&st.f, &m.elastic, g)?;
            let res = (0..3).map(|k| g.l2_sq(&resp.rot[k].data).sqrt()).fold(0.0, f64::max);
            println!("t = {:5.2}  F = {:.8e}  max ‖𝓛_k F‖ = {res:.2e}", st.t, elastic_energy(&st.f, &m.elastic, g)?);
        }
        st = step(&m, &st, cfg.dt, &cfg, n)?;
    }
    Ok(())
}
