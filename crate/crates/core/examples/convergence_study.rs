//! Temporal order of both schemes against a fine RK4 reference.

use bfh::constitutive::ViscousParams;
use bfh::dynamics::{Model, State};
use bfh::elastic::ElasticParams;
use bfh::grid::Grid;
use bfh::initial::{random_frame_field, random_velocity};
use bfh::integrator::{run, Scheme, StepConfig};

fn solve(m: &Model, s0: &State, scheme: Scheme, dt: f64, t_end: f64) -> bfh::Result<State> {
    let cfg = StepConfig {
        dt,
        t_end,
        scheme,
        ..Default::default()
    };
    Ok(run(m, s0.clone(), &cfg, None, &mut |_: u64, _: &State| Ok(()))?.state)
}

fn distance(g: &Grid, a: &State, b: &State) -> f64 {
    let df: f64 = (0..3).map(|i| g.vector_l2_sq(&a.f.column_field(i).axpy(-1.0, &b.f.column_field(i)))).sum();
    (df + g.vector_l2_sq(&a.v.axpy(-1.0, &b.v))).sqrt()
}

fn main() -> bfh::Result<()> {
    let g = Grid::new(&[24, 24], &[2.0 * std::f64::consts::PI; 2])?;
    let m = Model::new(g, ElasticParams::default(), ViscousParams::default())?;
    let g = &m.grid;
    let s0 = State::new(random_frame_field(g, 0.3, 1, 4)?, random_velocity(g, 0.3, 1, 4)?, 0.0)?;
    let t_end = 0.05;
    let reference = solve(&m, &s0, Scheme::ExplicitRk4, t_end / 200.0, t_end)?;
    for scheme in [Scheme::ImexRk2, Scheme::ExplicitRk4] {
        let mut prev: Option<f64> = None;
        for n in [5u32, 10, 20] {
            let err = distance(g, &solve(&m, &s0, scheme, t_end / n as f64, t_end)?, &reference);
            let order = prev.map(|p| format!("{:.2}", (p / err).log2())).unwrap_or_else(|| "-".into());
            println!("{scheme:>12}  steps {n:3}  error {err:.3e}  order {order}");
            prev = Some(err);
        }
    }
    Ok(())
}
