//! The frame energy in its original form and in the reformulated form with
//! the surface terms; both densities agree pointwise.

use bfh::diff::Derivatives;
use bfh::elastic::{density_original_from, density_reformulated_from, surface_flux, ElasticParams, FrameKinematics};
use bfh::grid::Grid;
use bfh::initial::random_frame_field;

fn main() -> bfh::Result<()> {
    let p = ElasticParams::default();
    for dims in [vec![64, 64], vec![24, 24, 24]] {
        let g = Grid::new(&dims, &vec![2.0 * std::f64::consts::PI; dims.len()])?;
        let f = random_frame_field(&g, 0.6, 2, 11)?;
        let kin = FrameKinematics::compute(&f, &g)?;
        let a = density_original_from(&kin, &p);
        let b = density_reformulated_from(&kin, &p);
        let pw = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        // the surface terms are divergences and integrate to zero
        let flux = surface_flux(&f, 0, &g)?;
        let div = Derivatives::divergence(&g, &flux.c);
        println!(
            "{:?}: F = {:.10e} vs {:.10e}, pointwise {pw:.1e}, ∫ surface term {:.1e}",
            dims,
            g.integrate(&a),
            g.integrate(&b),
            g.integrate(&div)
        );
    }
    Ok(())
}
