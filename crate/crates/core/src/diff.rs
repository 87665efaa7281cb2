//! Differentiation backends on periodic lattices.
//!
//! Elastic and constitutive assembly only needs first derivatives, the
//! Laplacian and the vector operators built from them, so any periodic scheme
//! implementing [`Derivatives`] can be plugged in. [`Grid`] gives the spectral
//! operators; [`FiniteDifference`] is a fourth-order central stencil.

use crate::error::{Error, Result};
use crate::field::Dims;
use crate::grid::Grid;

pub trait Derivatives {
    fn dims(&self) -> Dims;

    /// `∂_axis f`; axes with a single point give zero.
    fn partial(&self, f: &[f64], axis: usize) -> Vec<f64>;

    fn laplacian(&self, f: &[f64]) -> Vec<f64>;

    /// Quadrature weight of one lattice point.
    fn cell_volume(&self) -> f64;

    fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.cell_volume()
    }

    fn gradient(&self, f: &[f64]) -> [Vec<f64>; 3] {
        std::array::from_fn(|a| self.partial(f, a))
    }

    /// Gradients of several fields; backends may share work between them.
    fn gradients(&self, fs: &[&[f64]]) -> Vec<[Vec<f64>; 3]> {
        fs.iter().map(|f| self.gradient(f)).collect()
    }

    fn laplacians(&self, fs: &[&[f64]]) -> Vec<Vec<f64>> {
        fs.iter().map(|f| self.laplacian(f)).collect()
    }

    fn divergence(&self, u: &[Vec<f64>; 3]) -> Vec<f64> {
        let mut out = vec![0.0; u[0].len()];
        for (a, c) in u.iter().enumerate() {
            if self.dims()[a] > 1 {
                for (o, d) in out.iter_mut().zip(self.partial(c, a)) {
                    *o += d;
                }
            }
        }
        out
    }

    fn curl(&self, u: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
        let g: [[Vec<f64>; 3]; 3] = std::array::from_fn(|k| self.gradient(&u[k]));
        std::array::from_fn(|m| {
            let (j, k) = ((m + 1) % 3, (m + 2) % 3);
            g[k][j].iter().zip(&g[j][k]).map(|(a, b)| a - b).collect()
        })
    }

    fn grad_div(&self, u: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
        self.gradient(&self.divergence(u))
    }

    /// `a Δu + b ∇(∇·u) − ∇×q`.
    fn combined_operator(&self, a: f64, b: f64, u: &[Vec<f64>; 3], q: Option<&[Vec<f64>; 3]>) -> [Vec<f64>; 3] {
        let mut out: [Vec<f64>; 3] =
            std::array::from_fn(|p| self.laplacian(&u[p]).into_iter().map(|x| a * x).collect());
        if b != 0.0 {
            for (o, gd) in out.iter_mut().zip(self.grad_div(u)) {
                for (x, y) in o.iter_mut().zip(gd) {
                    *x += b * y;
                }
            }
        }
        if let Some(q) = q {
            for (o, c) in out.iter_mut().zip(self.curl(q)) {
                for (x, y) in o.iter_mut().zip(c) {
                    *x -= y;
                }
            }
        }
        out
    }

    fn check(&self, dims: Dims) -> Result<()> {
        if dims == self.dims() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.dims(),
                found: dims,
            })
        }
    }
}

impl Derivatives for Grid {
    fn dims(&self) -> Dims {
        Grid::dims(self)
    }

    fn partial(&self, f: &[f64], axis: usize) -> Vec<f64> {
        self.d_raw(f, axis)
    }

    fn cell_volume(&self) -> f64 {
        Grid::cell_volume(self)
    }

    fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        self.inverse(&self.lap_pow_spec(&self.forward(f), 1))
    }

    fn gradient(&self, f: &[f64]) -> [Vec<f64>; 3] {
        self.grad_from_spec(&self.forward(f))
    }

    fn gradients(&self, fs: &[&[f64]]) -> Vec<[Vec<f64>; 3]> {
        self.grads_from_specs(&self.forward_many(fs))
    }

    fn laplacians(&self, fs: &[&[f64]]) -> Vec<Vec<f64>> {
        let specs: Vec<_> = self
            .forward_many(fs)
            .iter()
            .map(|s| self.lap_pow_spec(s, 1))
            .collect();
        self.inverse_many(&specs)
    }

    fn divergence(&self, u: &[Vec<f64>; 3]) -> Vec<f64> {
        self.div_raw(u)
    }

    fn curl(&self, u: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
        self.curl_raw(u)
    }

    fn combined_operator(&self, a: f64, b: f64, u: &[Vec<f64>; 3], q: Option<&[Vec<f64>; 3]>) -> [Vec<f64>; 3] {
        self.combined_raw(a, b, u, q)
    }
}

/// Fourth-order central differences on a uniform periodic lattice.
#[derive(Clone, Debug)]
pub struct FiniteDifference {
    dims: Dims,
    spacing: [f64; 3],
}

impl FiniteDifference {
    pub fn new(dims: Dims, lengths: [f64; 3]) -> Self {
        Self {
            dims,
            spacing: std::array::from_fn(|a| lengths[a] / dims[a] as f64),
        }
    }

    pub fn for_grid(grid: &Grid) -> Self {
        Self::new(grid.dims(), grid.lengths())
    }

    fn stencil(&self, f: &[f64], axis: usize, weights: &[(isize, f64)], scale: f64) -> Vec<f64> {
        let d = self.dims;
        let n = d[axis] as isize;
        let stride: usize = d[axis + 1..].iter().product();
        let mut out = vec![0.0; f.len()];
        for (p, o) in out.iter_mut().enumerate() {
            let i = ((p / stride) % d[axis]) as isize;
            let base = p - (i as usize) * stride;
            let mut acc = 0.0;
            for &(off, w) in weights {
                let q = (i + off).rem_euclid(n) as usize;
                acc += w * f[base + q * stride];
            }
            *o = acc * scale;
        }
        out
    }
}

impl Derivatives for FiniteDifference {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    fn partial(&self, f: &[f64], axis: usize) -> Vec<f64> {
        if self.dims[axis] == 1 {
            return vec![0.0; f.len()];
        }
        let w = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
        self.stencil(f, axis, &w, 1.0 / (12.0 * self.spacing[axis]))
    }

    fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let w = [(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)];
        let mut out = vec![0.0; f.len()];
        for a in 0..3 {
            if self.dims[a] == 1 {
                continue;
            }
            let h = self.spacing[a];
            for (o, x) in out.iter_mut().zip(self.stencil(f, a, &w, 1.0 / (12.0 * h * h))) {
                *o += x;
            }
        }
        out
    }
}
