//! Molecular fields `h_i` and the rotational derivatives `𝓛_k 𝓕`, checked
//! against a centred difference of the energy along a smooth rotation.

use bfh::elastic::{elastic_energy, ElasticParams, ElasticResponse};
use bfh::field::FrameField;
use bfh::frame::exp_update;
use bfh::grid::Grid;
use bfh::initial::random_frame_field;
use nalgebra::Vector3;

fn main() -> bfh::Result<()> {
    let g = Grid::new(&[48, 48], &[2.0 * std::f64::consts::PI; 2])?;
    let p = ElasticParams::default();
    let f = random_frame_field(&g, 0.5, 2, 21)?;
    let resp = ElasticResponse::compute(&f, &p, &g)?;
    for k in 0..3 {
        println!("‖𝓛_{} F‖ = {:.6e}", k + 1, g.l2_sq(&resp.rot[k].data).sqrt());
    }

    // body-frame rotation about n_1 with a spatially varying angle
    let theta: Vec<f64> = (0..g.len()).map(|x| (x as f64 * 0.01).sin()).collect();
    let rotate = |t: f64| FrameField::from_fn(f.dims, |x| exp_update(&f.at(x), &Vector3::new(theta[x] * t, 0.0, 0.0)));
    let h = 1e-6;
    let fd = (elastic_energy(&rotate(h), &p, &g)? - elastic_energy(&rotate(-h), &p, &g)?) / (2.0 * h);
    let exact = g.cell_volume() * (0..g.len()).map(|x| theta[x] * resp.rot[0].data[x]).sum::<f64>();
    println!("dF/dt: difference {fd:.10e}, from 𝓛_1 {exact:.10e}, rel {:.1e}", ((fd - exact) / exact).abs());
    Ok(())
}
