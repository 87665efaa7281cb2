//! Right-hand sides of the coupled frame/flow system.
//!
//! The frame moves as `∂_t F = F [Ω]×` with body-frame rate `Ω = ω − α`:
//!
//! ```text
//! ω1 = ½Ŵ·a3 + (η1/χ1) D·s5 − 𝓛1/χ1
//! ω2 = ½Ŵ·a2 + (η2/χ2) D·s4 − 𝓛2/χ2
//! ω3 = ½Ŵ·a1 + (η3/χ3) D·s3 − 𝓛3/χ3
//! ```
//!
//! and `α` the body-frame form of the advection `(v·∇)F`:
//! `α1 = ((v·∇)n2)·n3`, `α2 = ((v·∇)n3)·n1`, `α3 = ((v·∇)n1)·n2`.
//! The velocity tendency is `ηΔv + ∂_j(σ_ji + σ^d_ij) − (v·∇)v` before projection,
//! with the advection written in skew-symmetric form.

use nalgebra::Vector3;

use crate::constitutive::{
    quadratic_channels, velocity_gradient, viscous_stress_point, Projections, TensorBasis,
    ViscousParams,
};
use crate::elastic::{body_force_from, elastic_stress_from, ElasticParams, ElasticResponse};
use crate::error::{Error, Result};
use crate::field::{FrameField, ScalarField, TensorField, VectorField};
use crate::grid::{Grid, Spectrum};

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub f: FrameField,
    pub v: VectorField,
    pub t: f64,
}

impl State {
    pub fn new(f: FrameField, v: VectorField, t: f64) -> Result<Self> {
        v.check_dims(f.dims)?;
        Ok(Self { f, v, t })
    }

    pub fn rest(dims: crate::field::Dims) -> Self {
        Self {
            f: FrameField::identity(dims),
            v: VectorField::zeros(dims),
            t: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Forcing {
    /// `∂_j σ^d_ij`
    #[default]
    StressDivergence,
    /// The body force `𝔉`, equal to the stress divergence up to a gradient.
    BodyForce,
}

/// Physical model: grid, coefficients and which parts of the system evolve.
#[derive(Debug)]
pub struct Model {
    pub grid: Grid,
    pub elastic: ElasticParams,
    pub viscous: ViscousParams,
    pub forcing: Forcing,
    pub evolve_frame: bool,
    pub evolve_velocity: bool,
    /// Apply the 2/3 mask to the assembled nonlinear tendencies.
    pub dealias: bool,
}

impl Model {
    pub fn new(grid: Grid, elastic: ElasticParams, viscous: ViscousParams) -> Result<Self> {
        let bad = viscous.validate();
        if !bad.is_empty() {
            let msg: Vec<String> = bad.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidParams(msg.join("; ")));
        }
        Ok(Self {
            grid,
            elastic,
            viscous,
            forcing: Forcing::default(),
            evolve_frame: true,
            evolve_velocity: true,
            dealias: true,
        })
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self
    }

    /// Pure rotational gradient flow: velocity held at its current value.
    pub fn frozen_velocity(mut self) -> Self {
        self.evolve_velocity = false;
        self
    }

    /// Frame held fixed; with Newtonian coefficients this is plain Navier–Stokes.
    pub fn frozen_frame(mut self) -> Self {
        self.evolve_frame = false;
        self
    }

    pub fn check(&self, s: &State) -> Result<()> {
        self.grid.check_dims_of(s.f.dims)?;
        self.grid.check_dims_of(s.v.dims)?;
        if !s.f.is_finite() {
            return Err(Error::NonFiniteField("frame field"));
        }
        if !s.v.is_finite() {
            return Err(Error::NonFiniteField("velocity field"));
        }
        Ok(())
    }
}

/// Everything assembled from one state.
#[derive(Clone, Debug)]
pub struct Tendency {
    /// `Ω = ω − α`, so that `∂_t F = F [Ω]×`.
    pub omega: [Vec<f64>; 3],
    /// Velocity tendency before projection.
    pub dv: VectorField,
}

/// Intermediate per-point quantities shared by tendency and audit paths.
struct Assembly {
    resp: ElasticResponse,
    grad_v: TensorField,
    /// `ω` without advection
    omega: [Vec<f64>; 3],
    sigma: TensorField,
    channels: [Vec<f64>; 4],
}

fn assemble(m: &Model, s: &State) -> Result<Assembly> {
    m.check(s)?;
    let g = &m.grid;
    let p = &m.viscous;
    let resp = ElasticResponse::compute(&s.f, &m.elastic, g)?;
    let grad_v = velocity_gradient(&s.v, g)?;
    let n = g.len();
    let mut omega: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
    let mut channels: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
    let mut sigma = TensorField::zeros(g.dims());
    for x in 0..n {
        let basis = TensorBasis::new(&s.f.at(x));
        let pr = Projections::new(&basis, &grad_v.at(x));
        // r_k = ω_k − ½Ŵ·a on shell
        let r: [f64; 3] =
            std::array::from_fn(|k| (p.eta_rot[k] * pr.d[4 - k] - resp.rot[k].data[x]) / p.chi[k]);
        for k in 0..3 {
            omega[k][x] = pr.w[2 - k] + r[k];
        }
        sigma.set(x, &viscous_stress_point(&basis, &pr, &r, p));
        let q = quadratic_channels(&pr, p);
        for c in 0..4 {
            channels[c][x] = q[c];
        }
    }
    Ok(Assembly {
        resp,
        grad_v,
        omega,
        sigma,
        channels,
    })
}

/// `ω` of the frame equations (advection excluded).
pub fn frame_angular_velocity(m: &Model, s: &State) -> Result<[ScalarField; 3]> {
    let a = assemble(m, s)?;
    Ok(a.omega.map(|data| ScalarField {
        dims: m.grid.dims(),
        data,
    }))
}

fn advection_rate(s: &State, kin_g: &[[[Vec<f64>; 3]; 3]; 3], x: usize) -> Vector3<f64> {
    // ((v·∇) n_a) · n_b
    let adv = |a: usize, b: usize| -> f64 {
        let mut acc = 0.0;
        for q in 0..3 {
            let d: f64 = (0..3).map(|j| s.v.c[j][x] * kin_g[a][q][j][x]).sum();
            acc += d * s.f.n[b][q][x];
        }
        acc
    };
    Vector3::new(adv(1, 2), adv(2, 0), adv(0, 1))
}

fn mask3(g: &Grid, c: &mut [Vec<f64>; 3]) {
    g.dealias_many(c);
}

/// Assembled in Fourier space with one inverse transform per component;
/// `mask` applies the dealiasing filter on the way back.
fn velocity_rhs(m: &Model, s: &State, a: &Assembly, mask: bool) -> VectorField {
    let g = &m.grid;
    let n = g.len();
    let nd = g.ndim();
    let eta = m.viscous.eta;
    let sd = match m.forcing {
        Forcing::StressDivergence => Some(elastic_stress_from(&s.f, &a.resp.kin, &m.elastic)),
        Forcing::BodyForce => None,
    };
    let bf = match m.forcing {
        Forcing::BodyForce => Some(body_force_from(&s.f, &a.resp.kin, &a.resp.rot)),
        Forcing::StressDivergence => None,
    };
    // per component: the fluxes σ_ji + σ^d_ij − ½ v_i v_j differentiated along j,
    // then the pointwise part −½ (v·∇)v_i (+ 𝔉_i)
    let mut fields: Vec<Vec<f64>> = Vec::with_capacity(3 * (nd + 1));
    for i in 0..3 {
        for j in 0..nd {
            let mut r = a.sigma.c[j][i].clone();
            if let Some(sd) = &sd {
                for (o, x) in r.iter_mut().zip(&sd.c[i][j]) {
                    *o += x;
                }
            }
            for (x, o) in r.iter_mut().enumerate() {
                *o -= 0.5 * s.v.c[i][x] * s.v.c[j][x];
            }
            fields.push(r);
        }
        let local: Vec<f64> = (0..n)
            .map(|x| {
                let conv: f64 = (0..3).map(|j| s.v.c[j][x] * a.grad_v.c[i][j][x]).sum();
                -0.5 * conv + bf.as_ref().map_or(0.0, |b| b.c[i][x])
            })
            .collect();
        fields.push(local);
    }
    fields.extend(s.v.c.iter().cloned());
    let specs = g.forward_many(&fields);
    let out: Vec<Spectrum> = (0..3)
        .map(|i| {
            let base = i * (nd + 1);
            let mut acc = specs[base + nd].clone();
            for j in 0..nd {
                for (o, d) in acc.iter_mut().zip(g.d_spec(&specs[base + j], j)) {
                    *o += d;
                }
            }
            let vi = &specs[3 * (nd + 1) + i];
            for (p, o) in acc.iter_mut().enumerate() {
                *o -= vi[p] * (eta * g.ksq(p));
            }
            if mask {
                g.dealias_spec(&mut acc);
            }
            acc
        })
        .collect();
    let mut it = g.inverse_many(&out).into_iter();
    VectorField {
        dims: g.dims(),
        c: std::array::from_fn(|_| it.next().expect("three components")),
    }
}

/// Full tendency `(Ω, dv)`; parts that are frozen in the model come back as zero.
pub fn tendency(m: &Model, s: &State) -> Result<Tendency> {
    let a = assemble(m, s)?;
    let g = &m.grid;
    let n = g.len();
    let mut omega: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
    if m.evolve_frame {
        for x in 0..n {
            let al = advection_rate(s, &a.resp.kin.g, x);
            for k in 0..3 {
                omega[k][x] = a.omega[k][x] - al[k];
            }
        }
        if m.dealias {
            mask3(g, &mut omega);
        }
    }
    let dv = if m.evolve_velocity {
        velocity_rhs(m, s, &a, m.dealias)
    } else {
        VectorField::zeros(g.dims())
    };
    Ok(Tendency { omega, dv })
}

/// `ηΔv + ∇·σ + ∇·σ^d − (v·∇)v`, unprojected and unmasked.
pub fn velocity_tendency(m: &Model, s: &State) -> Result<VectorField> {
    let a = assemble(m, s)?;
    Ok(velocity_rhs(m, s, &a, false))
}

/// Leray-projected velocity tendency, the actual `∂_t v`.
pub fn projected_velocity_tendency(m: &Model, s: &State) -> Result<VectorField> {
    m.grid.leray_project(&velocity_tendency(m, s)?)
}

/// Integrated dissipation channels of the energy law.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DissipationChannels {
    /// `η ‖∇v‖²`
    pub viscous: f64,
    /// `Σ (1/χ_k) ‖𝓛_k 𝓕‖²`
    pub rotational: f64,
    /// `∫ β1 (D·s1)² + 2β0 (D·s1)(D·s2) + β2 (D·s2)²`
    pub block: f64,
    /// `(β3 − η3²/χ3) ‖D·s3‖²`, `(β4 − η2²/χ2) ‖D·s4‖²`, `(β5 − η1²/χ1) ‖D·s5‖²`
    pub scalar: [f64; 3],
}

impl DissipationChannels {
    pub fn total(&self) -> f64 {
        self.viscous + self.rotational + self.block + self.scalar.iter().sum::<f64>()
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.viscous,
            self.rotational,
            self.block,
            self.scalar[0],
            self.scalar[1],
            self.scalar[2],
        ]
    }
}

/// Channels of `−d/dt(½‖v‖² + 𝓕)` evaluated on shell at the given state.
pub fn energy_production_audit(m: &Model, s: &State) -> Result<DissipationChannels> {
    let a = assemble(m, s)?;
    let g = &m.grid;
    let p = &m.viscous;
    let viscous = p.eta * a.grad_v.c.iter().flatten().map(|c| g.l2_sq(c)).sum::<f64>();
    let rotational = (0..3)
        .map(|k| g.l2_sq(&a.resp.rot[k].data) / p.chi[k])
        .sum();
    Ok(DissipationChannels {
        viscous,
        rotational,
        block: g.integrate(&a.channels[0]),
        scalar: std::array::from_fn(|c| g.integrate(&a.channels[c + 1])),
    })
}

/// Total energy `½‖v‖² + 𝓕`.
pub fn total_energy(m: &Model, s: &State) -> Result<f64> {
    m.check(s)?;
    let fb = crate::elastic::elastic_energy(&s.f, &m.elastic, &m.grid)?;
    Ok(0.5 * m.grid.vector_l2_sq(&s.v) + fb)
}

/// Spectra of the three components of a vector field.
pub fn spectra(g: &Grid, c: &[Vec<f64>; 3]) -> [Spectrum; 3] {
    std::array::from_fn(|a| g.forward(&c[a]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Frame;
    use crate::initial::{random_frame_field, random_velocity, taylor_green};
    use std::f64::consts::PI;

    fn model(n: usize) -> Model {
        let g = Grid::new(&[n, n], &[2.0 * PI; 2]).unwrap();
        Model::new(g, ElasticParams::default(), ViscousParams::default()).unwrap()
    }

    #[test]
    fn rest_state_has_zero_tendency() {
        let m = model(16);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let s = State::new(
            FrameField::constant(m.grid.dims(), &Frame::random(&mut rng)),
            VectorField::zeros(m.grid.dims()),
            0.0,
        )
        .unwrap();
        let t = tendency(&m, &s).unwrap();
        assert!(t.omega.iter().flatten().all(|x| x.abs() < 1e-15));
        assert!(t.dv.max_norm() < 1e-15);
        let ch = energy_production_audit(&m, &s).unwrap();
        assert_eq!(ch.total(), 0.0);
    }

    #[test]
    fn pure_gradient_flow_rate() {
        let m = model(32);
        let f = random_frame_field(&m.grid, 0.5, 2, 1).unwrap();
        let s = State::new(f, VectorField::zeros(m.grid.dims()), 0.0).unwrap();
        let om = frame_angular_velocity(&m, &s).unwrap();
        let resp = ElasticResponse::compute(&s.f, &m.elastic, &m.grid).unwrap();
        for k in 0..3 {
            for x in 0..m.grid.len() {
                let expect = -resp.rot[k].data[x] / m.viscous.chi[k];
                assert!((om[k].data[x] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_frame_co_rotates_with_rigid_spin() {
        // v = (−sin y, sin x, 0) is locally a rigid rotation with rate 1 about e3 at the origin
        let m = model(32);
        let mut v = VectorField::zeros(m.grid.dims());
        for x in 0..m.grid.len() {
            let c = m.grid.coord(x);
            v.c[0][x] = -c[1].sin();
            v.c[1][x] = c[0].sin();
        }
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
        let fr = Frame::random(&mut rng);
        let s = State::new(FrameField::constant(m.grid.dims(), &fr), v, 0.0).unwrap();
        let mut iso = Model::new(m.grid, ElasticParams::default(), ViscousParams::default()).unwrap();
        // only the spin part: no strain couplings
        iso.viscous.eta_rot = [0.0; 3];
        let om = frame_angular_velocity(&iso, &s).unwrap();
        let w = Vector3::new(om[0].data[0], om[1].data[0], om[2].data[0]);
        let rate = fr.matrix() * crate::frame::skew(&w);
        let spin = Vector3::new(0.0, 0.0, 1.0);
        for a in 0..3 {
            let expect = spin.cross(&fr.n(a));
            assert!((rate.column(a) - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn taylor_green_matches_navier_stokes_oracle() {
        let g = Grid::new(&[32, 32], &[2.0 * PI; 2]).unwrap();
        let eta = 0.3;
        let m = Model::new(g, ElasticParams::default(), ViscousParams::newtonian(eta)).unwrap();
        let v = taylor_green(&m.grid, 1.0);
        let s = State::new(FrameField::identity(m.grid.dims()), v.clone(), 0.0).unwrap();
        let dv = velocity_tendency(&m, &s).unwrap();
        // oracle: ηΔv − (v·∇)v with analytic derivatives
        for x in 0..m.grid.len() {
            let c = m.grid.coord(x);
            let (sx, cx) = c[0].sin_cos();
            let (sy, cy) = c[1].sin_cos();
            let (u, w) = (sx * cy, -cx * sy);
            let adv_u = u * (cx * cy) + w * (-sx * sy);
            let adv_w = u * (sx * sy) + w * (-cx * cy);
            let e0 = -2.0 * eta * u - adv_u;
            let e1 = -2.0 * eta * w - adv_w;
            assert!((dv.c[0][x] - e0).abs() < 1e-10);
            assert!((dv.c[1][x] - e1).abs() < 1e-10);
        }
    }

    #[test]
    fn projected_tendency_conserves_momentum() {
        let m = model(32);
        let s = State::new(
            random_frame_field(&m.grid, 0.5, 2, 7).unwrap(),
            random_velocity(&m.grid, 0.5, 2, 7).unwrap(),
            0.0,
        )
        .unwrap();
        let dv = projected_velocity_tendency(&m, &s).unwrap();
        for c in &dv.c {
            assert!(m.grid.integrate(c).abs() < 1e-10);
        }
    }

    #[test]
    fn forcing_paths_agree_after_projection() {
        let m = model(32);
        let s = State::new(
            random_frame_field(&m.grid, 0.5, 2, 8).unwrap(),
            random_velocity(&m.grid, 0.3, 2, 8).unwrap(),
            0.0,
        )
        .unwrap();
        let a = projected_velocity_tendency(&m, &s).unwrap();
        let mb = Model::new(m.grid, m.elastic.clone(), m.viscous.clone())
            .unwrap()
            .with_forcing(Forcing::BodyForce);
        let b = projected_velocity_tendency(&mb, &s).unwrap();
        let rel = (mb.grid.vector_l2_sq(&a.axpy(-1.0, &b)) / mb.grid.vector_l2_sq(&a)).sqrt();
        assert!(rel < 1e-6, "rel {rel}");
    }

    #[test]
    fn channels_nonnegative() {
        let m = model(32);
        for seed in 0..5 {
            let s = State::new(
                random_frame_field(&m.grid, 0.8, 2, seed).unwrap(),
                random_velocity(&m.grid, 0.8, 2, seed).unwrap(),
                0.0,
            )
            .unwrap();
            let ch = energy_production_audit(&m, &s).unwrap();
            assert!(ch.as_array().iter().all(|&c| c >= -1e-12));
        }
    }

    #[test]
    fn energy_rate_matches_channels() {
        // d/dt E along the exact tendency equals minus the channel sum
        let m = model(32);
        let s = State::new(
            random_frame_field(&m.grid, 0.4, 2, 11).unwrap(),
            random_velocity(&m.grid, 0.4, 2, 11).unwrap(),
            0.0,
        )
        .unwrap();
        let t = tendency(&m, &s).unwrap();
        let dv = m.grid.leray_project(&t.dv).unwrap();
        let h = 1e-5;
        let push = |sgn: f64| {
            let f = FrameField::from_fn(m.grid.dims(), |x| {
                let w = Vector3::new(t.omega[0][x], t.omega[1][x], t.omega[2][x]) * (sgn * h);
                crate::frame::exp_update(&s.f.at(x), &w)
            });
            State::new(f, s.v.axpy(sgn * h, &dv), 0.0).unwrap()
        };
        let rate = (total_energy(&m, &push(1.0)).unwrap() - total_energy(&m, &push(-1.0)).unwrap())
            / (2.0 * h);
        let ch = energy_production_audit(&m, &s).unwrap();
        assert!((rate + ch.total()).abs() < 1e-6 * ch.total(), "{rate} vs {}", -ch.total());
    }
}
