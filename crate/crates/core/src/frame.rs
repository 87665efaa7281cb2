//! Pointwise frame algebra on SO(3).
//!
//! A frame is stored as a 3×3 matrix whose columns are `n1, n2, n3`. Axis
//! indices are zero-based throughout: axis `0` is `n1`.
//!
//! The infinitesimal rotation about `n_k` is `F ↦ F [e_k]×`, so its action on
//! the columns is `n_i ↦ ε_{ijk} n_j`. An angular increment `ω` (body
//! coordinates) moves the frame as
//!
//! ```text
//! ṅ1 =  ω3 n2 - ω2 n3
//! ṅ2 = -ω3 n1 + ω1 n3
//! ṅ3 =  ω2 n1 - ω1 n2
//! ```
//!
//! i.e. `Ḟ = F [ω]×`.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use crate::error::{Error, Result};

/// Singular values below this mark a frame as degenerate.
pub const SINGULAR_TOL: f64 = 1e-8;

const SERIES_CUTOFF: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    m: Matrix3<f64>,
}

/// `A · B = Σ A_ij B_ij`.
#[inline]
pub fn dot(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    a.component_mul(b).sum()
}

/// Cross-product matrix, `[w]× x = w × x`.
#[inline]
pub fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Inverse of [`skew`] applied to the antisymmetric part of `m`.
#[inline]
pub fn unskew(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// `exp([w]×)` by Rodrigues' formula.
pub fn rotation_matrix(w: &Vector3<f64>) -> Matrix3<f64> {
    let t2 = w.norm_squared();
    let (a, b) = if t2.sqrt() < SERIES_CUTOFF {
        (1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0)
    } else {
        let t = t2.sqrt();
        (t.sin() / t, (1.0 - t.cos()) / t2)
    };
    let k = skew(w);
    Matrix3::identity() + k * a + k * k * b
}

impl Frame {
    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
        }
    }

    /// Wraps a matrix without checking orthonormality.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self { m }
    }

    /// Accepts `m` if it is a proper rotation within `tol` (Frobenius).
    pub fn from_matrix(m: Matrix3<f64>, tol: f64) -> Result<Self> {
        let drift = (m.transpose() * m - Matrix3::identity()).norm();
        let det = m.determinant();
        if drift <= tol && (det - 1.0).abs() <= tol {
            Ok(Self { m })
        } else {
            Err(Error::InvalidParams(format!(
                "matrix is not a rotation: |F^T F - I| = {drift:e}, det = {det}"
            )))
        }
    }

    pub fn from_columns(n1: Vector3<f64>, n2: Vector3<f64>, n3: Vector3<f64>) -> Self {
        Self {
            m: Matrix3::from_columns(&[n1, n2, n3]),
        }
    }

    /// `exp([w]×)`: rotation by angle `|w|` about `w`.
    pub fn from_rotation_vector(w: &Vector3<f64>) -> Self {
        Self {
            m: rotation_matrix(w),
        }
    }

    /// Rotation drawn from a seeded generator (uniform axis, angle below π).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let w = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let w = if w.norm() > 1e-3 { w } else { Vector3::x() };
        let angle = rng.gen_range(0.0..3.0);
        Self::from_rotation_vector(&(w.normalize() * angle))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    #[inline]
    pub fn n(&self, axis: usize) -> Vector3<f64> {
        self.m.column(axis).into_owned()
    }

    pub fn n1(&self) -> Vector3<f64> {
        self.n(0)
    }

    pub fn n2(&self) -> Vector3<f64> {
        self.n(1)
    }

    pub fn n3(&self) -> Vector3<f64> {
        self.n(2)
    }

    pub fn orthonormality_drift(&self) -> f64 {
        (self.m.transpose() * self.m - Matrix3::identity()).norm()
    }

    pub fn determinant(&self) -> f64 {
        self.m.determinant()
    }

    /// Left action of a global rotation, every column rotated by `r`.
    pub fn rotated_by(&self, r: &Matrix3<f64>) -> Self {
        Self { m: r * self.m }
    }

    pub fn tangent_basis(&self) -> TangentBasis {
        TangentBasis {
            v: std::array::from_fn(|k| self.m * skew(&Vector3::ith(k, 1.0))),
        }
    }

    pub fn normal_basis(&self) -> NormalBasis {
        let (n1, n2, n3) = (self.n1(), self.n2(), self.n3());
        let z = Vector3::zeros();
        let c = |a: Vector3<f64>, b: Vector3<f64>, d: Vector3<f64>| Matrix3::from_columns(&[a, b, d]);
        NormalBasis {
            w: [
                c(z, n3, n2),
                c(n3, z, n1),
                c(n2, n1, z),
                c(n1, z, z),
                c(z, n2, z),
                c(z, z, n3),
            ],
        }
    }
}

/// `V1 = (0, n3, -n2)`, `V2 = (-n3, 0, n1)`, `V3 = (n2, -n1, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentBasis {
    pub v: [Matrix3<f64>; 3],
}

/// `W1 = (0, n3, n2)`, `W2 = (n3, 0, n1)`, `W3 = (n2, n1, 0)`,
/// `W4 = (n1, 0, 0)`, `W5 = (0, n2, 0)`, `W6 = (0, 0, n3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalBasis {
    pub w: [Matrix3<f64>; 6],
}

/// Matrix whose `i`-th column is `ε_{ijk} n_j` for the given axis `k`.
pub fn rotational_derivative_of_frame(f: &Frame, axis: usize) -> Matrix3<f64> {
    assert!(axis < 3, "axis index {axis} out of range");
    f.m * skew(&Vector3::ith(axis, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition {
    /// `(A·V_k)(B·V_k) / |V_k|²`
    pub tangent: [f64; 3],
    /// `(A·W_k)(B·W_k) / |W_k|²`
    pub normal: [f64; 6],
    pub sum: f64,
}

/// Splits `A·B` over the orthogonal basis `{V_k} ∪ {W_k}` of 3×3 matrices at `F`.
pub fn orthogonal_decompose(f: &Frame, a: &Matrix3<f64>, b: &Matrix3<f64>) -> Decomposition {
    let tb = f.tangent_basis();
    let nb = f.normal_basis();
    let term = |e: &Matrix3<f64>| dot(a, e) * dot(b, e) / dot(e, e);
    let tangent = std::array::from_fn(|k| term(&tb.v[k]));
    let normal = std::array::from_fn(|k| term(&nb.w[k]));
    let sum = tangent.iter().sum::<f64>() + normal.iter().sum::<f64>();
    Decomposition {
        tangent,
        normal,
        sum,
    }
}

/// Nearest rotation in Frobenius norm (polar factor).
pub fn retract(raw: &Matrix3<f64>) -> Result<Frame> {
    if !raw.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFiniteField("frame"));
    }
    let svd = raw.svd(true, true);
    let (Some(mut u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::SingularFrame { min_singular: 0.0 });
    };
    let sigma = svd.singular_values;
    let (imin, smin) = sigma.argmin();
    if smin < SINGULAR_TOL {
        return Err(Error::SingularFrame { min_singular: smin });
    }
    if (u * v_t).determinant() < 0.0 {
        let mut col = u.column_mut(imin);
        col *= -1.0;
    }
    let mut r = u * v_t;
    // Newton refinement; a no-op up to rounding on exact rotations
    for _ in 0..2 {
        if let Some(inv) = r.try_inverse() {
            r = (r + inv.transpose()) * 0.5;
        }
    }
    Ok(Frame { m: r })
}

/// `F exp([ω]×)`.
pub fn exp_update(f: &Frame, omega: &Vector3<f64>) -> Frame {
    Frame {
        m: f.m * rotation_matrix(omega),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop, prop_assert, proptest, Strategy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn random_matrix(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
        Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0))
    }

    fn eps(i: usize, j: usize, k: usize) -> f64 {
        match (i, j, k) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (2, 1, 0) | (0, 2, 1) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    }

    #[test]
    fn rotational_derivative_at_identity() {
        let l1 = rotational_derivative_of_frame(&Frame::identity(), 0);
        assert_eq!(l1.column(0).into_owned(), Vector3::zeros());
        assert_eq!(l1.column(1).into_owned(), Vector3::z());
        assert_eq!(l1.column(2).into_owned(), -Vector3::y());
    }

    #[test]
    fn rotational_derivative_is_levi_civita_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let f = Frame::random(&mut rng);
            for k in 0..3 {
                let l = rotational_derivative_of_frame(&f, k);
                for i in 0..3 {
                    let expect: Vector3<f64> = (0..3).map(|j| f.n(j) * eps(i, j, k)).sum();
                    assert!((l.column(i) - expect).norm() < 1e-15);
                }
                let nb = f.normal_basis();
                for w in &nb.w {
                    assert!(dot(&l, w).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn rotational_derivative_matches_rotation_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = Frame::random(&mut rng);
        let h = 1e-6;
        for k in 0..3 {
            let e = Vector3::ith(k, 1.0);
            let fp = f.matrix() * rotation_matrix(&(e * h));
            let fm = f.matrix() * rotation_matrix(&(e * -h));
            let fd = (fp - fm) / (2.0 * h);
            let err = (fd - rotational_derivative_of_frame(&f, k)).norm();
            assert!(err < 1e-9, "axis {k}: {err}");
        }
    }

    #[test]
    fn basis_norms_and_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let f = Frame::random(&mut rng);
            let tb = f.tangent_basis();
            let nb = f.normal_basis();
            assert_eq!(
                tb.v[0],
                Matrix3::from_columns(&[Vector3::zeros(), f.n3(), -f.n2()])
            );
            assert_eq!(
                tb.v[1],
                Matrix3::from_columns(&[-f.n3(), Vector3::zeros(), f.n1()])
            );
            assert_eq!(
                tb.v[2],
                Matrix3::from_columns(&[f.n2(), -f.n1(), Vector3::zeros()])
            );
            for j in 0..3 {
                for k in 0..3 {
                    let expect = if j == k { 2.0 } else { 0.0 };
                    assert!((dot(&tb.v[j], &tb.v[k]) - expect).abs() < 1e-14);
                }
                for w in &nb.w {
                    assert!(dot(w, &tb.v[j]).abs() < 1e-14);
                }
            }
            for j in 0..6 {
                for k in 0..6 {
                    let expect = match (j == k, j < 3) {
                        (true, true) => 2.0,
                        (true, false) => 1.0,
                        _ => 0.0,
                    };
                    assert!((dot(&nb.w[j], &nb.w[k]) - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn decompose_basis_elements() {
        let f = Frame::identity();
        let v1 = f.tangent_basis().v[0];
        let d = orthogonal_decompose(&f, &v1, &v1);
        assert!((d.tangent[0] - 2.0).abs() < 1e-15);
        assert!(d.tangent[1..].iter().chain(&d.normal).all(|x| x.abs() < 1e-15));
        assert!((d.sum - 2.0).abs() < 1e-15);

        let w4 = f.normal_basis().w[3];
        let v2 = f.tangent_basis().v[1];
        let d = orthogonal_decompose(&f, &w4, &v2);
        assert!(d.tangent.iter().chain(&d.normal).all(|x| *x == 0.0));
        assert_eq!(d.sum, 0.0);
    }

    #[test]
    fn decompose_reconstructs_dot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let f = Frame::random(&mut rng);
            let a = random_matrix(&mut rng);
            let b = random_matrix(&mut rng);
            let d = orthogonal_decompose(&f, &a, &b);
            let direct = dot(&a, &b);
            let scale = a.norm() * b.norm();
            assert!((d.sum - direct).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn retract_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = Frame::random(&mut rng);
        let back = retract(r.matrix()).unwrap();
        assert!((back.matrix() - r.matrix()).norm() < 1e-14);

        let s = skew(&Vector3::new(0.3, -0.7, 0.2));
        let perturbed = r.matrix() * (Matrix3::identity() + s * 1e-6);
        let fixed = retract(&perturbed).unwrap();
        assert!(fixed.orthonormality_drift() < 1e-14);
        assert!((fixed.determinant() - 1.0).abs() < 1e-14);
        let oracle = r.matrix() * rotation_matrix(&(Vector3::new(0.3, -0.7, 0.2) * 1e-6));
        assert!((fixed.matrix() - oracle).norm() < 1e-11);

        let sym = Matrix3::new(0.5, 0.1, -0.2, 0.1, 0.3, 0.4, -0.2, 0.4, -0.6);
        let stretched = r.matrix() * (Matrix3::identity() + sym * 1e-6);
        assert!((retract(&stretched).unwrap().matrix() - r.matrix()).norm() < 1e-11);

        assert!(matches!(
            retract(&Matrix3::zeros()),
            Err(Error::SingularFrame { .. })
        ));
    }

    #[test]
    fn retract_is_frobenius_nearest() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let r = Frame::random(&mut rng);
            let raw = r.matrix() + random_matrix(&mut rng) * 0.1;
            let p = retract(&raw).unwrap();
            let dist = (raw - p.matrix()).norm();
            for _ in 0..20 {
                let q = exp_update(&p, &(Vector3::from_fn(|_, _| rng.gen_range(-0.05..0.05))));
                assert!((raw - q.matrix()).norm() >= dist - 1e-12);
            }
        }
    }

    #[test]
    fn exp_update_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = Frame::random(&mut rng);
        assert_eq!(exp_update(&f, &Vector3::zeros()), f);

        let q = exp_update(&Frame::identity(), &Vector3::new(FRAC_PI_2, 0.0, 0.0));
        assert!((q.n1() - Vector3::x()).norm() < 1e-15);
        assert!((q.n2() - Vector3::z()).norm() < 1e-15);
        assert!((q.n3() + Vector3::y()).norm() < 1e-15);

        let w = Vector3::new(0.4, -0.3, 0.9);
        let t = 1e-7;
        let moved = exp_update(&f, &(w * t));
        let rate = (moved.matrix() - f.matrix()) / t;
        let (n1, n2, n3) = (f.n1(), f.n2(), f.n3());
        let expect = Matrix3::from_columns(&[
            n2 * w.z - n3 * w.y,
            -n1 * w.z + n3 * w.x,
            n1 * w.y - n2 * w.x,
        ]);
        assert!((rate - expect).norm() < 1e-6);
    }

    #[test]
    fn rodrigues_series_branch_is_continuous() {
        let axis = Vector3::new(0.6, 0.0, 0.8);
        let below = rotation_matrix(&(axis * (SERIES_CUTOFF * 0.999_999)));
        let above = rotation_matrix(&(axis * (SERIES_CUTOFF * 1.000_001)));
        assert!((below - above).norm() < 1e-9);
        assert!((below.transpose() * below - Matrix3::identity()).norm() < 1e-15);
    }

    fn arb_vec(scale: f64) -> impl Strategy<Value = Vector3<f64>> {
        prop::array::uniform3(-scale..scale).prop_map(Vector3::from)
    }

    proptest! {
        #[test]
        fn retract_after_exp_update_is_noop(w0 in arb_vec(1.5), w in arb_vec(1.5)) {
            let f = Frame::from_rotation_vector(&w0);
            let g = exp_update(&f, &w);
            let r = retract(g.matrix()).unwrap();
            prop_assert!((r.matrix() - g.matrix()).norm() < 1e-13);
            prop_assert!(g.orthonormality_drift() < 1e-13);
        }

        #[test]
        fn decomposition_identity(w0 in arb_vec(2.0),
                                  a in prop::array::uniform9(-1.0f64..1.0),
                                  b in prop::array::uniform9(-1.0f64..1.0)) {
            let f = Frame::from_rotation_vector(&w0);
            let a = Matrix3::from_column_slice(&a);
            let b = Matrix3::from_column_slice(&b);
            let d = orthogonal_decompose(&f, &a, &b);
            prop_assert!((d.sum - dot(&a, &b)).abs() <= 1e-12 * (1.0 + a.norm() * b.norm()));
        }

        #[test]
        fn rotational_derivative_is_tangent(w0 in arb_vec(2.0), k in 0usize..3) {
            let f = Frame::from_rotation_vector(&w0);
            let l = rotational_derivative_of_frame(&f, k);
            for w in &f.normal_basis().w {
                prop_assert!(dot(&l, w).abs() <= 1e-13);
            }
        }
    }
}
