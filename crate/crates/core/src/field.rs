//! Lattice field containers.
//!
//! All fields store real samples row-major with the last axis innermost. A
//! two-dimensional grid is represented with `dims[2] == 1`, i.e. fields are
//! invariant along z and every z-derivative vanishes.

use crate::error::{Error, Result};
use crate::frame::Frame;
use nalgebra::{Matrix3, Vector3};

pub type Dims = [usize; 3];

fn check(expected: Dims, found: Dims) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::GridMismatch { expected, found })
    }
}

fn all_finite(data: &[f64]) -> bool {
    data.iter().all(|x| x.is_finite())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub dims: Dims,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(dims: Dims) -> Self {
        Self {
            dims,
            data: vec![0.0; dims.iter().product()],
        }
    }

    pub fn from_vec(dims: Dims, data: Vec<f64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if data.len() != n {
            return Err(Error::GridMismatch {
                expected: dims,
                found: [data.len(), 1, 1],
            });
        }
        Ok(Self { dims, data })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn check_dims(&self, dims: Dims) -> Result<()> {
        check(dims, self.dims)
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub dims: Dims,
    pub c: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(dims: Dims) -> Self {
        let n = dims.iter().product();
        Self {
            dims,
            c: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    pub fn len(&self) -> usize {
        self.c[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.c[0].is_empty()
    }

    pub fn check_dims(&self, dims: Dims) -> Result<()> {
        check(dims, self.dims)
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|c| all_finite(c))
    }

    #[inline]
    pub fn at(&self, i: usize) -> Vector3<f64> {
        Vector3::new(self.c[0][i], self.c[1][i], self.c[2][i])
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: Vector3<f64>) {
        self.c[0][i] = v.x;
        self.c[1][i] = v.y;
        self.c[2][i] = v.z;
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn max_norm(&self) -> f64 {
        (0..self.len()).fold(0.0_f64, |m, i| m.max(self.at(i).norm()))
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.c.iter_mut().flatten().for_each(|x| *x *= a);
        out
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &VectorField) -> Self {
        let mut out = self.clone();
        for k in 0..3 {
            for (o, x) in out.c[k].iter_mut().zip(&other.c[k]) {
                *o += a * x;
            }
        }
        out
    }
}

/// Second-order tensor field, `c[i][j]` holding component `(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    pub dims: Dims,
    pub c: [[Vec<f64>; 3]; 3],
}

impl TensorField {
    pub fn zeros(dims: Dims) -> Self {
        let n: usize = dims.iter().product();
        let row = || [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        Self {
            dims,
            c: [row(), row(), row()],
        }
    }

    pub fn len(&self) -> usize {
        self.c[0][0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check_dims(&self, dims: Dims) -> Result<()> {
        check(dims, self.dims)
    }

    #[inline]
    pub fn at(&self, p: usize) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.c[i][j][p])
    }

    #[inline]
    pub fn set(&mut self, p: usize, m: &Matrix3<f64>) {
        for i in 0..3 {
            for j in 0..3 {
                self.c[i][j][p] = m[(i, j)];
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = self.clone();
        for i in 0..3 {
            for j in 0..3 {
                out.c[i][j] = self.c[j][i].clone();
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.c
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Grid of orthonormal frames, `n[alpha][k]` = component `k` of column `n_alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameField {
    pub dims: Dims,
    pub n: [[Vec<f64>; 3]; 3],
}

impl FrameField {
    pub fn constant(dims: Dims, frame: &Frame) -> Self {
        let n: usize = dims.iter().product();
        let m = frame.matrix();
        let col = |a: usize| [vec![m[(0, a)]; n], vec![m[(1, a)]; n], vec![m[(2, a)]; n]];
        Self {
            dims,
            n: [col(0), col(1), col(2)],
        }
    }

    pub fn identity(dims: Dims) -> Self {
        Self::constant(dims, &Frame::identity())
    }

    /// Builds the field pointwise from a closure over the flat index.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize) -> Frame) -> Self {
        let mut out = Self::identity(dims);
        for p in 0..out.len() {
            out.set(p, &f(p));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.n[0][0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check_dims(&self, dims: Dims) -> Result<()> {
        check(dims, self.dims)
    }

    pub fn is_finite(&self) -> bool {
        self.n.iter().flatten().all(|c| all_finite(c))
    }

    /// Matrix with columns `(n1, n2, n3)` at point `p`; not re-orthonormalized.
    #[inline]
    pub fn matrix_at(&self, p: usize) -> Matrix3<f64> {
        Matrix3::from_fn(|k, a| self.n[a][k][p])
    }

    #[inline]
    pub fn at(&self, p: usize) -> Frame {
        Frame::from_matrix_unchecked(self.matrix_at(p))
    }

    #[inline]
    pub fn column(&self, alpha: usize, p: usize) -> Vector3<f64> {
        Vector3::new(
            self.n[alpha][0][p],
            self.n[alpha][1][p],
            self.n[alpha][2][p],
        )
    }

    #[inline]
    pub fn set(&mut self, p: usize, frame: &Frame) {
        self.set_matrix(p, frame.matrix());
    }

    #[inline]
    pub fn set_matrix(&mut self, p: usize, m: &Matrix3<f64>) {
        for a in 0..3 {
            for k in 0..3 {
                self.n[a][k][p] = m[(k, a)];
            }
        }
    }

    /// Largest `||F^T F - I||_F` over the grid.
    pub fn max_orthonormality_drift(&self) -> f64 {
        (0..self.len())
            .map(|p| {
                let m = self.matrix_at(p);
                (m.transpose() * m - Matrix3::identity()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Column `alpha` as a vector field.
    pub fn column_field(&self, alpha: usize) -> VectorField {
        VectorField {
            dims: self.dims,
            c: self.n[alpha].clone(),
        }
    }
}
