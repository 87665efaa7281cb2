//! Pointwise frame algebra: the tangent/normal split of the matrix inner
//! product, rotational derivatives, and the two ways back onto SO(3).

use bfh::frame::{dot, exp_update, orthogonal_decompose, retract, rotational_derivative_of_frame, Frame};
use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bfh::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = Frame::random(&mut rng);
    let a = Matrix3::from_fn(|i, j| (i as f64 + 1.0) * (j as f64 - 0.5));
    let b = Matrix3::from_fn(|i, j| ((i * 3 + j) as f64).sin());

    let d = orthogonal_decompose(&f, &a, &b);
    println!("A·B            = {:+.15}", dot(&a, &b));
    println!("tangent part   = {:+.15}", d.tangent.iter().sum::<f64>());
    println!("normal part    = {:+.15}", d.normal.iter().sum::<f64>());
    println!("split residual = {:.2e}", (d.sum - dot(&a, &b)).abs());

    for k in 0..3 {
        let l = rotational_derivative_of_frame(&f, k);
        // L_k n_k = 0 and the columns stay tangent to the other two axes
        println!("L_{} n_{} = {:.1e}", k + 1, k + 1, l.column(k).norm());
    }

    let omega = Vector3::new(0.3, -0.2, 0.7);
    let g = exp_update(&f, &omega);
    println!("exp update drift    {:.2e}", g.orthonormality_drift());

    let noisy = g.matrix() + Matrix3::from_fn(|i, j| 1e-3 * ((i + 2 * j) as f64).cos());
    let r = retract(&noisy)?;
    println!("retracted drift     {:.2e}, det {:.15}", r.orthonormality_drift(), r.determinant());
    println!("distance to target  {:.2e}", (r.matrix() - g.matrix()).norm());
    Ok(())
}
