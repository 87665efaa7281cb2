//! Time stepping on `SO(3) × div-free fields`.
//!
//! Within a step the frame is written as `F = Fₙ exp([Θ]×)` with a Lie-algebra
//! field `Θ` that starts at zero, so all stage arithmetic is linear and every
//! stage frame is an exact rotation. `Θ` obeys `Θ̇ = dexp⁻¹_Θ(Ω)`, truncated
//! after the double bracket, which is enough for fourth order.
//!
//! `imex_rk2` is the ARS(2,2,2) pair. The implicit part is diagonal in Fourier
//! space: `c_F Δ Θ` for the frame with `c_F = K_max/χ_min`, and `(η + c_v) Δ v`
//! for the velocity, `c_v` bounding the on-shell viscous stress. Everything
//! else, including the difference between the true and implicit stiff parts,
//! is explicit. `explicit_rk4` is the classical Runge–Kutta–Munthe-Kaas method.

use nalgebra::Vector3;

use crate::dynamics::{tendency, Model, State};
use crate::error::{Error, Result};
use crate::field::{FrameField, VectorField};
use crate::frame::{exp_update, retract};
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    ImexRk2,
    ExplicitRk4,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imex_rk2" => Ok(Self::ImexRk2),
            "explicit_rk4" => Ok(Self::ExplicitRk4),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (expected imex_rk2 or explicit_rk4)"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Self::ImexRk2 => "imex_rk2",
            Self::ExplicitRk4 => "explicit_rk4",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub cfl_target: f64,
    pub retract_every: u64,
    /// Shrink `dt` to the CFL bound (re-estimated every 10 steps).
    pub adaptive: bool,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::ImexRk2,
            cfl_target: 0.5,
            retract_every: 100,
            adaptive: false,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("step.dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("step.t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.cfl_target > 0.0 && self.cfl_target <= 1.0) {
            return Err(Error::Config(format!(
                "step.cfl_target must lie in (0, 1], got {}",
                self.cfl_target
            )));
        }
        if self.retract_every == 0 {
            return Err(Error::Config("step.retract_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of fixed steps that reach `t_end`.
    pub fn n_steps(&self) -> u64 {
        let n = self.t_end / self.dt;
        let r = n.round();
        if (n - r).abs() <= 1e-9 * n.max(1.0) {
            r as u64
        } else {
            n.ceil() as u64
        }
    }
}

/// `dexp⁻¹_Θ(Ω) ≈ Ω + ½ Θ×Ω + (1/12) Θ×(Θ×Ω)`.
#[inline]
pub fn dexpinv(theta: &Vector3<f64>, omega: &Vector3<f64>) -> Vector3<f64> {
    let c = theta.cross(omega);
    omega + c * 0.5 + theta.cross(&c) / 12.0
}

type Comp3 = [Vec<f64>; 3];

fn zeros3(n: usize) -> Comp3 {
    std::array::from_fn(|_| vec![0.0; n])
}

fn at3(c: &Comp3, x: usize) -> Vector3<f64> {
    Vector3::new(c[0][x], c[1][x], c[2][x])
}

/// `a + s·b` componentwise, over any number of terms.
fn combine(base: &Comp3, terms: &[(f64, &Comp3)]) -> Comp3 {
    std::array::from_fn(|k| {
        let mut out = base[k].clone();
        for (s, t) in terms {
            for (o, x) in out.iter_mut().zip(&t[k]) {
                *o += s * x;
            }
        }
        out
    })
}

fn frame_at(base: &FrameField, theta: &Comp3) -> FrameField {
    let mut f = base.clone();
    for x in 0..base.len() {
        let th = at3(theta, x);
        if th != Vector3::zeros() {
            f.set(x, &exp_update(&base.at(x), &th));
        }
    }
    f
}

/// One right-hand-side evaluation at stage `(Θ, v)`.
fn stage_rhs(m: &Model, base: &FrameField, theta: &Comp3, v: &Comp3, t: f64) -> Result<(Comp3, Comp3)> {
    let g = &m.grid;
    let s = State {
        f: frame_at(base, theta),
        v: VectorField {
            dims: g.dims(),
            c: v.clone(),
        },
        t,
    };
    let td = tendency(m, &s)?;
    let n = g.len();
    let mut dth = zeros3(n);
    if m.evolve_frame {
        for x in 0..n {
            let d = dexpinv(&at3(theta, x), &at3(&td.omega, x));
            for k in 0..3 {
                dth[k][x] = d[k];
            }
        }
        if m.dealias {
            g.dealias_many(&mut dth);
        }
    }
    let dv = if m.evolve_velocity {
        g.leray_project(&td.dv)?.c
    } else {
        zeros3(n)
    };
    Ok((dth, dv))
}

/// Coefficients of the implicit diffusion split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImplicitSplit {
    pub frame: f64,
    pub velocity: f64,
}

impl ImplicitSplit {
    pub fn for_model(m: &Model) -> Self {
        Self {
            frame: if m.evolve_frame {
                2.0 * m.elastic.k_max() / m.viscous.chi_min()
            } else {
                0.0
            },
            velocity: if m.evolve_velocity {
                m.viscous.eta + m.viscous.symmetric_stiffness()
            } else {
                0.0
            },
        }
    }
}

/// `μ Δ c` for each component.
fn apply_lap(g: &Grid, mu: f64, c: &Comp3) -> Comp3 {
    if mu == 0.0 {
        return zeros3(g.len());
    }
    let mut s = g.forward_many(c);
    for comp in s.iter_mut() {
        for (p, z) in comp.iter_mut().enumerate() {
            *z *= -mu * g.ksq(p);
        }
    }
    to3(g.inverse_many(&s))
}

fn to3(v: Vec<Vec<f64>>) -> Comp3 {
    let mut it = v.into_iter();
    std::array::from_fn(|_| it.next().expect("three components"))
}

/// Solves `(1 − a μ Δ) y = r` componentwise; optionally projects.
fn solve(g: &Grid, a: f64, mu: f64, r: &Comp3, project: bool) -> Comp3 {
    if mu == 0.0 && !project {
        return r.clone();
    }
    let mut it = g.forward_many(r).into_iter();
    let mut s: [Vec<_>; 3] = std::array::from_fn(|_| it.next().expect("three components"));
    for comp in s.iter_mut() {
        for (p, z) in comp.iter_mut().enumerate() {
            *z /= 1.0 + a * mu * g.ksq(p);
        }
    }
    if project {
        g.leray_spec(&mut s);
    }
    to3(g.inverse_many(&s))
}

fn imex_step(m: &Model, s: &State, dt: f64) -> Result<(Comp3, Comp3)> {
    let g = &m.grid;
    let n = g.len();
    let split = ImplicitSplit::for_model(m);
    let gam = 1.0 - 0.5f64.sqrt();
    let del = 1.0 - 0.5 / gam;
    let th0 = zeros3(n);
    let v0 = s.v.c.clone();
    let proj = m.evolve_velocity;

    // stage 1 is explicit at (0, vₙ)
    let (f1, g1) = stage_rhs(m, &s.f, &th0, &v0, s.t)?;
    let lv0 = apply_lap(g, split.velocity, &v0);
    let n1_th = f1;
    let n1_v = combine(&g1, &[(-1.0, &lv0)]);

    let th2 = solve(g, gam * dt, split.frame, &combine(&th0, &[(gam * dt, &n1_th)]), false);
    let v2 = solve(g, gam * dt, split.velocity, &combine(&v0, &[(gam * dt, &n1_v)]), proj);

    let (f2, g2) = stage_rhs(m, &s.f, &th2, &v2, s.t + gam * dt)?;
    let lth2 = apply_lap(g, split.frame, &th2);
    let lv2 = apply_lap(g, split.velocity, &v2);
    let n2_th = combine(&f2, &[(-1.0, &lth2)]);
    let n2_v = combine(&g2, &[(-1.0, &lv2)]);

    let r_th = combine(
        &th0,
        &[((1.0 - gam) * dt, &lth2), (del * dt, &n1_th), ((1.0 - del) * dt, &n2_th)],
    );
    let r_v = combine(
        &v0,
        &[((1.0 - gam) * dt, &lv2), (del * dt, &n1_v), ((1.0 - del) * dt, &n2_v)],
    );
    Ok((
        solve(g, gam * dt, split.frame, &r_th, false),
        solve(g, gam * dt, split.velocity, &r_v, proj),
    ))
}

fn rk4_step(m: &Model, s: &State, dt: f64) -> Result<(Comp3, Comp3)> {
    let n = m.grid.len();
    let th0 = zeros3(n);
    let v0 = &s.v.c;
    let (k1t, k1v) = stage_rhs(m, &s.f, &th0, v0, s.t)?;
    let (k2t, k2v) = stage_rhs(
        m,
        &s.f,
        &combine(&th0, &[(0.5 * dt, &k1t)]),
        &combine(v0, &[(0.5 * dt, &k1v)]),
        s.t + 0.5 * dt,
    )?;
    let (k3t, k3v) = stage_rhs(
        m,
        &s.f,
        &combine(&th0, &[(0.5 * dt, &k2t)]),
        &combine(v0, &[(0.5 * dt, &k2v)]),
        s.t + 0.5 * dt,
    )?;
    let (k4t, k4v) = stage_rhs(
        m,
        &s.f,
        &combine(&th0, &[(dt, &k3t)]),
        &combine(v0, &[(dt, &k3v)]),
        s.t + dt,
    )?;
    let w = [dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0];
    let th = combine(&th0, &[(w[0], &k1t), (w[1], &k2t), (w[2], &k3t), (w[3], &k4t)]);
    let mut v = combine(v0, &[(w[0], &k1v), (w[1], &k2v), (w[2], &k3v), (w[3], &k4v)]);
    if m.evolve_velocity {
        v = solve(&m.grid, 0.0, 0.0, &v, true);
    }
    Ok((th, v))
}

/// `(‖v‖, ‖∇F‖)` in L², used to detect runaway growth.
fn growth_norms(g: &Grid, s: &State) -> (f64, f64) {
    let v = g.vector_l2_sq(&s.v).sqrt();
    let mut gf = 0.0;
    let comps: Vec<&[f64]> = s.f.n.iter().flatten().map(|c| c.as_slice()).collect();
    for spec in g.forward_many(&comps) {
        {
            gf += spec
                .iter()
                .enumerate()
                .map(|(p, z)| z.norm_sqr() * g.ksq(p))
                .sum::<f64>();
        }
    }
    let gf = (gf * g.volume() / (g.len() as f64).powi(2)).sqrt();
    (v, gf)
}

/// Re-orthonormalizes every frame by its polar factor.
pub fn retract_field(f: &FrameField) -> Result<FrameField> {
    let mut out = f.clone();
    for x in 0..f.len() {
        out.set(x, &retract(&f.matrix_at(x))?);
    }
    Ok(out)
}

/// Largest stable step by the advective/rotational CFL estimate.
pub fn cfl_dt(m: &Model, s: &State, cfl: f64) -> Result<f64> {
    let td = tendency(m, s)?;
    let dx = m.grid.min_spacing();
    let mut rate: f64 = 0.0;
    for x in 0..m.grid.len() {
        let speed = s.v.at(x).norm() / dx + at3(&td.omega, x).norm();
        rate = rate.max(speed);
    }
    Ok(if rate > 0.0 { cfl / rate } else { f64::INFINITY })
}

/// Advances one step of size `dt`; `step` is the index of the step being taken.
pub fn step(m: &Model, s: &State, dt: f64, cfg: &StepConfig, step: u64) -> Result<State> {
    m.check(s)?;
    let (th, v) = match cfg.scheme {
        Scheme::ImexRk2 => imex_step(m, s, dt)?,
        Scheme::ExplicitRk4 => rk4_step(m, s, dt)?,
    };
    let mut f = if m.evolve_frame { frame_at(&s.f, &th) } else { s.f.clone() };
    if m.evolve_frame && (step + 1) % cfg.retract_every == 0 {
        f = retract_field(&f)?;
    }
    let next = State {
        f,
        v: VectorField {
            dims: s.v.dims,
            c: v,
        },
        t: s.t + dt,
    };
    if !next.f.is_finite() || !next.v.is_finite() {
        return Err(Error::StepUnstable {
            step,
            t: next.t,
            quantity: "field values",
            growth: f64::INFINITY,
        });
    }
    let (v0, g0) = growth_norms(&m.grid, s);
    let (v1, g1) = growth_norms(&m.grid, &next);
    for (quantity, a, b) in [("velocity norm", v0, v1), ("frame gradient norm", g0, g1)] {
        if a > 1e-200 && b > 10.0 * a {
            return Err(Error::StepUnstable {
                step,
                t: next.t,
                quantity,
                growth: b / a,
            });
        }
    }
    Ok(next)
}

/// Receives the state after every accepted step (and the initial state as step 0).
pub trait Observer {
    fn observe(&mut self, step: u64, state: &State) -> Result<()>;
}

impl<F: FnMut(u64, &State) -> Result<()>> Observer for F {
    fn observe(&mut self, step: u64, state: &State) -> Result<()> {
        self(step, state)
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub state: State,
    pub steps: u64,
    /// Set when the run stopped early on an unstable or degenerate step.
    pub halted: Option<Error>,
}

/// Steps from `state` until `t_end` (or `max_steps`), calling `obs` after each step.
pub fn run(
    m: &Model,
    state: State,
    cfg: &StepConfig,
    max_steps: Option<u64>,
    obs: &mut dyn Observer,
) -> Result<RunOutcome> {
    cfg.validate()?;
    obs.observe(0, &state)?;
    let mut s = state;
    let t_end = s.t + cfg.t_end;
    let limit = max_steps.unwrap_or(u64::MAX);
    let fixed = cfg.n_steps();
    let mut dt = cfg.dt;
    let mut k = 0u64;
    loop {
        let done = if cfg.adaptive {
            s.t >= t_end - 1e-12 * t_end.max(1.0)
        } else {
            k >= fixed
        };
        if done || k >= limit {
            break;
        }
        if cfg.adaptive && k % 10 == 0 {
            dt = cfg.dt.min(cfl_dt(m, &s, cfg.cfl_target)?);
        }
        let h = if cfg.adaptive || k + 1 == fixed {
            dt.min(t_end - s.t).max(0.0)
        } else {
            dt
        };
        let h = if h > 0.0 { h } else { dt };
        match step(m, &s, h, cfg, k) {
            Ok(next) => s = next,
            Err(e @ (Error::StepUnstable { .. } | Error::SingularFrame { .. })) => {
                return Ok(RunOutcome {
                    state: s,
                    steps: k,
                    halted: Some(e),
                })
            }
            Err(e) => return Err(e),
        }
        k += 1;
        obs.observe(k, &s)?;
    }
    Ok(RunOutcome {
        state: s,
        steps: k,
        halted: None,
    })
}
