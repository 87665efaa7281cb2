//! The six dissipation channels of the energy law at a state, against a
//! centred RK4 difference of the total energy.

use bfh::constitutive::ViscousParams;
use bfh::diagnostics::CHANNEL_NAMES;
use bfh::dynamics::{energy_production_audit, total_energy, Model, State};
use bfh::elastic::ElasticParams;
use bfh::grid::Grid;
use bfh::initial::{random_frame_field, random_velocity};
use bfh::integrator::{step, Scheme, StepConfig};

fn main() -> bfh::Result<()> {
    let g = Grid::new(&[32, 32], &[2.0 * std::f64::consts::PI; 2])?;
    let m = Model::new(g, ElasticParams::default(), ViscousParams::default())?;
    let g = &m.grid;
    let st = State::new(random_frame_field(g, 0.4, 2, 5)?, random_velocity(g, 0.4, 2, 5)?, 0.0)?;
    let ch = energy_production_audit(&m, &st)?;
    for (name, v) in CHANNEL_NAMES.iter().zip(ch.as_array()) {
        println!("{name:>14} {v:.6e}");
    }
    println!("{:>14} {:.6e}", "total", ch.total());
    for dt in [4e-3, 2e-3, 1e-3] {
        let cfg = StepConfig {
            dt,
            scheme: Scheme::ExplicitRk4,
            ..Default::default()
        };
        // integrate backwards and forwards from the audited state
        let before = step(&m, &st, -dt, &cfg, 0)?;
        let after = step(&m, &st, dt, &cfg, 0)?;
        let de = (total_energy(&m, &after)? - total_energy(&m, &before)?) / (2.0 * dt);
        println!("dt = {dt:.0e}: -dE/dt = {:.6e}, residual {:.2e}", -de, (de + ch.total()).abs());
    }
    Ok(())
}
