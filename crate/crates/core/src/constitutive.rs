//! Tensor bases attached to a frame, strain tensors and the viscous stress.
//!
//! Velocity gradients are stored as `G_ij = ∂_j v_i`, so `D = ½(G + Gᵀ)` and
//! `W = ½(G − Gᵀ)` (a simple shear `v = (y, 0, 0)` has `W_12 = ½`). The frame
//! equations and the stress are written with the transposed spin
//! `Ŵ = −W = ½(∂_i v_j − ∂_j v_i)`, for which `ṅ_i = Ŵ n_i` is rigid
//! co-rotation. The stress couples to the flow through `∂_j σ_ji`.

use nalgebra::Matrix3;

use crate::diff::Derivatives;
use crate::error::Result;
use crate::field::{FrameField, ScalarField, TensorField, VectorField};
use crate::frame::{dot, Frame};

#[derive(Clone, Debug, PartialEq)]
pub struct ViscousParams {
    /// `β0..β5`
    pub beta: [f64; 6],
    pub chi: [f64; 3],
    /// `η1..η3`
    pub eta_rot: [f64; 3],
    /// Solvent viscosity.
    pub eta: f64,
}

impl Default for ViscousParams {
    /// Every coupling inequality at half its bound.
    fn default() -> Self {
        let h = 0.5f64.sqrt();
        Self {
            beta: [h, 1.0, 1.0, 1.0, 1.0, 1.0],
            chi: [1.0; 3],
            eta_rot: [h; 3],
            eta: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub condition: &'static str,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} violated: {}", self.condition, self.detail)
    }
}

impl ViscousParams {
    /// Plain Navier–Stokes: every nematic coupling off.
    pub fn newtonian(eta: f64) -> Self {
        Self {
            beta: [0.0; 6],
            chi: [1.0; 3],
            eta_rot: [0.0; 3],
            eta,
        }
    }

    /// Every violated sign or coupling condition, not just the first.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let b = &self.beta;
        let mut push = |ok: bool, condition: &'static str, detail: String| {
            if !ok {
                out.push(Violation { condition, detail });
            }
        };
        for i in 1..6 {
            push(b[i] >= 0.0, "β_i ≥ 0", format!("β{i} = {}", b[i]));
        }
        for j in 0..3 {
            push(self.chi[j] > 0.0, "χ_j > 0", format!("χ{} = {}", j + 1, self.chi[j]));
        }
        push(self.eta > 0.0, "η > 0", format!("η = {}", self.eta));
        push(
            b[0] * b[0] <= b[1] * b[2],
            "β₀² ≤ β₁β₂",
            format!("β0² = {} > β1β2 = {}", b[0] * b[0], b[1] * b[2]),
        );
        let pairs = [
            (0, 5, "η₁² ≤ β₅χ₁"),
            (1, 4, "η₂² ≤ β₄χ₂"),
            (2, 3, "η₃² ≤ β₃χ₃"),
        ];
        for (k, bi, cond) in pairs {
            let lhs = self.eta_rot[k].powi(2);
            let rhs = b[bi] * self.chi[k];
            push(
                lhs <= rhs,
                cond,
                format!("η{}² = {lhs} > β{bi}χ{} = {rhs}", k + 1, k + 1),
            );
        }
        let all_finite = b
            .iter()
            .chain(&self.chi)
            .chain(&self.eta_rot)
            .chain(std::iter::once(&self.eta))
            .all(|x| x.is_finite());
        push(all_finite, "finite coefficients", "non-finite entry".into());
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn chi_max(&self) -> f64 {
        self.chi.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn chi_min(&self) -> f64 {
        self.chi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Weights `β_j − η²/χ` of the `D·s3`, `D·s4`, `D·s5` channels.
    pub fn scalar_channel_weights(&self) -> [f64; 3] {
        let b = &self.beta;
        [
            b[3] - self.eta_rot[2].powi(2) / self.chi[2],
            b[4] - self.eta_rot[1].powi(2) / self.chi[1],
            b[5] - self.eta_rot[0].powi(2) / self.chi[0],
        ]
    }

    /// Smallest eigenvalue of `[[β1, β0], [β0, β2]]`.
    pub fn block_min_eigenvalue(&self) -> f64 {
        let (a, c, b0) = (self.beta[1], self.beta[2], self.beta[0]);
        0.5 * (a + c) - (0.25 * (a - c).powi(2) + b0 * b0).sqrt()
    }

    /// Largest gain of the on-shell map `D ↦ σ(D)`, used as the implicit
    /// velocity weight in the IMEX split. On shell the stress depends on the
    /// flow only through `Σ c_j (D·s_j) s_j`, so the gain is the largest
    /// channel weight in an orthonormalized basis.
    pub fn symmetric_stiffness(&self) -> f64 {
        let b = &self.beta;
        // s1, s2 have |s|² = 2/3 and 2
        let (a, c, off) = (b[1] * 2.0 / 3.0, b[2] * 2.0, b[0] * (4.0f64 / 3.0).sqrt());
        let block = 0.5 * (a + c) + (0.25 * (a - c).powi(2) + off * off).sqrt();
        self.scalar_channel_weights()
            .iter()
            .fold(block, |m, &w| m.max(0.5 * w))
            .max(0.0)
    }
}

/// `s1..s5` (symmetric traceless) and `a1..a3` (antisymmetric) at a frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TensorBasis {
    pub s: [Matrix3<f64>; 5],
    pub a: [Matrix3<f64>; 3],
}

impl TensorBasis {
    pub fn new(f: &Frame) -> Self {
        let (n1, n2, n3) = (f.n1(), f.n2(), f.n3());
        let o = |u: &nalgebra::Vector3<f64>, v: &nalgebra::Vector3<f64>| u * v.transpose();
        let sym = |u, v| (o(u, v) + o(v, u)) * 0.5;
        Self {
            s: [
                o(&n1, &n1) - Matrix3::identity() / 3.0,
                o(&n2, &n2) - o(&n3, &n3),
                sym(&n1, &n2),
                sym(&n1, &n3),
                sym(&n2, &n3),
            ],
            a: [
                o(&n1, &n2) - o(&n2, &n1),
                o(&n3, &n1) - o(&n1, &n3),
                o(&n2, &n3) - o(&n3, &n2),
            ],
        }
    }
}

/// `G_ij = ∂_j v_i`.
pub fn velocity_gradient<D: Derivatives>(v: &VectorField, d: &D) -> Result<TensorField> {
    d.check(v.dims)?;
    let mut g = TensorField::zeros(v.dims);
    let comps: Vec<&[f64]> = v.c.iter().map(|c| c.as_slice()).collect();
    for (i, gi) in d.gradients(&comps).into_iter().enumerate() {
        g.c[i] = gi;
    }
    Ok(g)
}

/// `(D, W)` from a pointwise velocity gradient.
#[inline]
pub fn split_gradient(g: &Matrix3<f64>) -> (Matrix3<f64>, Matrix3<f64>) {
    let gt = g.transpose();
    ((g + gt) * 0.5, (g - gt) * 0.5)
}

pub fn strain_tensors<D: Derivatives>(v: &VectorField, d: &D) -> Result<(TensorField, TensorField)> {
    let g = velocity_gradient(v, d)?;
    let mut dd = TensorField::zeros(v.dims);
    let mut ww = TensorField::zeros(v.dims);
    for x in 0..g.len() {
        let (s, w) = split_gradient(&g.at(x));
        dd.set(x, &s);
        ww.set(x, &w);
    }
    Ok((dd, ww))
}

/// Strain projections at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projections {
    /// `D·s1 .. D·s5`
    pub d: [f64; 5],
    /// `½ Ŵ·a1 .. ½ Ŵ·a3`
    pub w: [f64; 3],
}

impl Projections {
    pub fn new(basis: &TensorBasis, g: &Matrix3<f64>) -> Self {
        let (dm, wm) = split_gradient(g);
        Self {
            d: std::array::from_fn(|k| dot(&dm, &basis.s[k])),
            w: std::array::from_fn(|k| -0.5 * dot(&wm, &basis.a[k])),
        }
    }
}

/// How the frame rates entering the stress are supplied.
#[derive(Clone, Debug)]
pub enum FrameRates<'a> {
    /// Material derivatives `ṅ1, ṅ2, ṅ3`.
    Raw(&'a [VectorField; 3]),
    /// Rotational derivatives `𝓛_k 𝓕`; the rates follow from the frame equations.
    OnShell(&'a [ScalarField; 3]),
}

/// Relative rates `(ṅ2·n3 − ½Ŵ·a3, ṅ3·n1 − ½Ŵ·a2, ṅ1·n2 − ½Ŵ·a1)`, indexed by the
/// rotation axis `k` they belong to.
fn relative_rates(
    f: &FrameField,
    x: usize,
    pr: &Projections,
    rates: &FrameRates<'_>,
    p: &ViscousParams,
) -> [f64; 3] {
    match rates {
        FrameRates::OnShell(rot) => {
            // axis k = 0, 1, 2 uses D·s5, D·s4, D·s3
            std::array::from_fn(|k| (p.eta_rot[k] * pr.d[4 - k] - rot[k].data[x]) / p.chi[k])
        }
        FrameRates::Raw(nd) => {
            let dotn = |a: usize, b: usize| -> f64 { (0..3).map(|q| nd[a].c[q][x] * f.n[b][q][x]).sum() };
            [
                dotn(1, 2) - pr.w[2],
                dotn(2, 0) - pr.w[1],
                dotn(0, 1) - pr.w[0],
            ]
        }
    }
}

/// Viscous stress at one point.
pub fn viscous_stress_point(basis: &TensorBasis, pr: &Projections, r: &[f64; 3], p: &ViscousParams) -> Matrix3<f64> {
    let (s, a, b) = (&basis.s, &basis.a, &p.beta);
    let d = &pr.d;
    let (e1, e2, e3) = (p.eta_rot[0], p.eta_rot[1], p.eta_rot[2]);
    let (c1, c2, c3) = (p.chi[0], p.chi[1], p.chi[2]);
    s[0] * (b[1] * d[0] + b[0] * d[1])
        + s[1] * (b[0] * d[0] + b[2] * d[1])
        + s[2] * (b[3] * d[2] - e3 * r[2])
        + s[3] * (b[4] * d[3] - e2 * r[1])
        + s[4] * (b[5] * d[4] - e1 * r[0])
        + a[0] * (0.5 * e3 * d[2] - 0.5 * c3 * r[2])
        + a[1] * (0.5 * e2 * d[3] - 0.5 * c2 * r[1])
        + a[2] * (0.5 * e1 * d[4] - 0.5 * c1 * r[0])
}

pub fn viscous_stress_from(
    f: &FrameField,
    g: &TensorField,
    rates: &FrameRates<'_>,
    p: &ViscousParams,
) -> TensorField {
    let mut out = TensorField::zeros(f.dims);
    for x in 0..f.len() {
        let basis = TensorBasis::new(&f.at(x));
        let pr = Projections::new(&basis, &g.at(x));
        let r = relative_rates(f, x, &pr, rates, p);
        out.set(x, &viscous_stress_point(&basis, &pr, &r, p));
    }
    out
}

pub fn viscous_stress<D: Derivatives>(
    f: &FrameField,
    v: &VectorField,
    rates: &FrameRates<'_>,
    p: &ViscousParams,
    d: &D,
) -> Result<TensorField> {
    d.check(f.dims)?;
    let g = velocity_gradient(v, d)?;
    Ok(viscous_stress_from(f, &g, rates, p))
}

/// Quadratic dissipation form of the stress at one point:
/// `β1 d1² + 2β0 d1 d2 + β2 d2²` and the three `(β − η²/χ) d²` channels.
pub fn quadratic_channels(pr: &Projections, p: &ViscousParams) -> [f64; 4] {
    let b = &p.beta;
    let d = &pr.d;
    let w = p.scalar_channel_weights();
    [
        b[1] * d[0] * d[0] + 2.0 * b[0] * d[0] * d[1] + b[2] * d[1] * d[1],
        w[0] * d[2] * d[2],
        w[1] * d[3] * d[3],
        w[2] * d[4] * d[4],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::skew;
    use crate::grid::Grid;
    use crate::initial::{random_frame_field, random_velocity};
    use nalgebra::Vector3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn validation_cases() {
        let ok = ViscousParams {
            beta: [0.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            chi: [1.0; 3],
            eta_rot: [1.0; 3],
            eta: 1.0,
        };
        assert!(ok.validate().is_empty());
        assert!(ViscousParams::default().is_valid());

        let mut bad = ok.clone();
        bad.beta[0] = 2.0;
        let v = bad.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].condition, "β₀² ≤ β₁β₂");

        let mut bad = ok.clone();
        bad.eta_rot[0] = 2.0;
        let v = bad.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].condition, "η₁² ≤ β₅χ₁");

        let mut many = ok;
        many.beta[0] = 2.0;
        many.chi[2] = -1.0;
        many.eta = 0.0;
        assert!(many.validate().len() >= 4);
    }

    #[test]
    fn basis_norms_and_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let b = TensorBasis::new(&Frame::random(&mut rng));
            let norms = [2.0 / 3.0, 2.0, 0.5, 0.5, 0.5];
            for i in 0..5 {
                assert!((dot(&b.s[i], &b.s[i]) - norms[i]).abs() < 1e-14);
                assert!(b.s[i].trace().abs() < 1e-14);
                assert!((b.s[i] - b.s[i].transpose()).norm() < 1e-14);
                for j in 0..3 {
                    assert!(dot(&b.s[i], &b.a[j]).abs() < 1e-14);
                }
                for j in 0..5 {
                    if i != j {
                        assert!(dot(&b.s[i], &b.s[j]).abs() < 1e-14);
                    }
                }
            }
            for i in 0..3 {
                assert!((b.a[i] + b.a[i].transpose()).norm() < 1e-14);
                for j in 0..3 {
                    let e = if i == j { 2.0 } else { 0.0 };
                    assert!((dot(&b.a[i], &b.a[j]) - e).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn strain_of_rotation_and_shear() {
        // locally rigid rotation and simple shear at the origin
        let om = 0.7;
        let (dm, wm) = split_gradient(&Matrix3::new(0.0, -om, 0.0, om, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(dm.norm() == 0.0);
        assert_eq!(wm[(0, 1)], -om);
        assert_eq!(wm[(1, 0)], om);
        let (dm, wm) = split_gradient(&Matrix3::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!((dm[(0, 1)], dm[(1, 0)]), (0.5, 0.5));
        assert_eq!((wm[(0, 1)], wm[(1, 0)]), (0.5, -0.5));
    }

    #[test]
    fn strain_on_grid() {
        let g = Grid::new(&[32, 32], &[2.0 * PI; 2]).unwrap();
        // periodic shear v = (sin y, 0, 0): G_12 = cos y
        let mut v = VectorField::zeros(g.dims());
        for x in 0..g.len() {
            v.c[0][x] = g.coord(x)[1].sin();
        }
        let (dd, ww) = strain_tensors(&v, &g).unwrap();
        for x in 0..g.len() {
            let c = g.coord(x)[1].cos();
            assert!((dd.c[0][1][x] - 0.5 * c).abs() < 1e-13);
            assert!((ww.c[0][1][x] - 0.5 * c).abs() < 1e-13);
            assert!((ww.c[1][0][x] + 0.5 * c).abs() < 1e-13);
        }
        let u = random_velocity(&g, 1.0, 3, 4).unwrap();
        let (dd, ww) = strain_tensors(&u, &g).unwrap();
        let grad = velocity_gradient(&u, &g).unwrap();
        for x in 0..g.len() {
            let (s, w) = (dd.at(x), ww.at(x));
            assert!((s + w - grad.at(x)).norm() < 1e-15);
            assert!(s.trace().abs() < 1e-10);
        }
    }

    #[test]
    fn stress_vanishes_at_rest() {
        let g = Grid::new(&[16, 16], &[2.0 * PI; 2]).unwrap();
        let f = random_frame_field(&g, 0.5, 2, 1).unwrap();
        let v = VectorField::zeros(g.dims());
        let zero_rates: [VectorField; 3] = std::array::from_fn(|_| VectorField::zeros(g.dims()));
        let s = viscous_stress(&f, &v, &FrameRates::Raw(&zero_rates), &ViscousParams::default(), &g).unwrap();
        assert_eq!(s.max_abs(), 0.0);
    }

    #[test]
    fn raw_and_on_shell_rates_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = ViscousParams::default();
        let g = Grid::new(&[16, 16], &[2.0 * PI; 2]).unwrap();
        let f = random_frame_field(&g, 0.7, 2, 2).unwrap();
        let v = random_velocity(&g, 1.0, 2, 3).unwrap();
        let grad = velocity_gradient(&v, &g).unwrap();
        let rot: [ScalarField; 3] = std::array::from_fn(|_| ScalarField {
            dims: g.dims(),
            data: (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        });
        // material rates from the frame equations
        let mut nd: [VectorField; 3] = std::array::from_fn(|_| VectorField::zeros(g.dims()));
        for x in 0..g.len() {
            let fr = f.at(x);
            let b = TensorBasis::new(&fr);
            let pr = Projections::new(&b, &grad.at(x));
            let om = Vector3::from_fn(|k, _| {
                pr.w[2 - k] + (p.eta_rot[k] * pr.d[4 - k] - rot[k].data[x]) / p.chi[k]
            });
            let rate = fr.matrix() * skew(&om);
            for a in 0..3 {
                nd[a].set(x, rate.column(a).into_owned());
            }
        }
        let a = viscous_stress_from(&f, &grad, &FrameRates::OnShell(&rot), &p);
        let b = viscous_stress_from(&f, &grad, &FrameRates::Raw(&nd), &p);
        for x in 0..g.len() {
            assert!((a.at(x) - b.at(x)).norm() < 1e-13);
        }
    }

    #[test]
    fn uniform_strain_dissipates() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = ViscousParams::default();
        for _ in 0..200 {
            let fr = Frame::random(&mut rng);
            let b = TensorBasis::new(&fr);
            let mut dm = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            dm = (dm + dm.transpose()) * 0.5;
            dm -= Matrix3::identity() * (dm.trace() / 3.0);
            let pr = Projections::new(&b, &dm);
            let zero = ScalarField::zeros([1, 1, 1]);
            let rot = [zero.clone(), zero.clone(), zero];
            let f = FrameField::constant([1, 1, 1], &fr);
            let r = relative_rates(&f, 0, &pr, &FrameRates::OnShell(&rot), &p);
            let s = viscous_stress_point(&b, &pr, &r, &p);
            // Ŵ = 0 here, so σ:∇v reduces to σ:D
            let power = dot(&s, &dm);
            let form: f64 = quadratic_channels(&pr, &p).iter().sum();
            assert!(power >= -1e-14);
            assert!((power - form).abs() < 1e-12);
        }
    }

    #[test]
    fn on_shell_power_identity() {
        // σ:∇̂v − Σ ω_k 𝓛_k equals the dissipation integrand pointwise
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p = ViscousParams::default();
        for _ in 0..200 {
            let fr = Frame::random(&mut rng);
            let b = TensorBasis::new(&fr);
            let gm = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let gm = gm - Matrix3::identity() * (gm.trace() / 3.0);
            let pr = Projections::new(&b, &gm);
            let l: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let rot: [ScalarField; 3] = std::array::from_fn(|k| ScalarField {
                dims: [1, 1, 1],
                data: vec![l[k]],
            });
            let f = FrameField::constant([1, 1, 1], &fr);
            let r = relative_rates(&f, 0, &pr, &FrameRates::OnShell(&rot), &p);
            let s = viscous_stress_point(&b, &pr, &r, &p);
            let power = dot(&s, &gm.transpose());
            let omega: [f64; 3] = std::array::from_fn(|k| pr.w[2 - k] + r[k]);
            let lhs = power - (0..3).map(|k| omega[k] * l[k]).sum::<f64>();
            let rhs: f64 = quadratic_channels(&pr, &p).iter().sum::<f64>()
                + (0..3).map(|k| l[k] * l[k] / p.chi[k]).sum::<f64>();
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
        }
    }

    proptest! {
        #[test]
        fn validated_quadratic_form_is_semidefinite(
            b1 in 0.0f64..3.0, b2 in 0.0f64..3.0, t in -1.0f64..1.0,
            b35 in prop::array::uniform3(0.0f64..3.0),
            chi in prop::array::uniform3(0.1f64..3.0),
            fr in prop::array::uniform3(-1.0f64..1.0),
        ) {
            let eta_rot = [
                fr[0] * (b35[2] * chi[0]).sqrt(),
                fr[1] * (b35[1] * chi[1]).sqrt(),
                fr[2] * (b35[0] * chi[2]).sqrt(),
            ];
            let p = ViscousParams {
                beta: [t * (b1 * b2).sqrt(), b1, b2, b35[0], b35[1], b35[2]],
                chi,
                eta_rot,
                eta: 1.0,
            };
            prop_assert!(p.is_valid());
            prop_assert!(p.block_min_eigenvalue() >= -1e-14);
            prop_assert!(p.scalar_channel_weights().iter().all(|&w| w >= -1e-14));
        }

        #[test]
        fn symmetry_type_orthogonality(w in prop::array::uniform3(-3.0f64..3.0),
                                       gv in prop::array::uniform9(-1.0f64..1.0)) {
            let b = TensorBasis::new(&Frame::from_rotation_vector(&Vector3::from(w)));
            let (dm, wm) = split_gradient(&Matrix3::from_column_slice(&gv));
            for s in &b.s { prop_assert!(dot(&wm, s).abs() < 1e-14); }
            for a in &b.a { prop_assert!(dot(&dm, a).abs() < 1e-14); }
        }
    }
}
