//! Seeded initial data.
//!
//! Frames are `exp([θ(x)]×)` of a band-limited angle field `θ` scaled so that
//! `max |θ| = ε`; velocities are Leray-projected band-limited fields with zero
//! mean and `max |v| = ε`. The same seed always reproduces the same bits.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{FrameField, VectorField};
use crate::frame::Frame;
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMode {
    Random,
    Zero,
    TaylorGreen,
    Twist,
}

impl std::str::FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "zero" => Ok(Self::Zero),
            "taylor_green" => Ok(Self::TaylorGreen),
            "twist" => Ok(Self::Twist),
            other => Err(Error::BadSpec(format!(
                "unknown init mode '{other}' (expected random, zero, taylor_green or twist)"
            ))),
        }
    }
}

impl std::fmt::Display for InitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Random => "random",
            Self::Zero => "zero",
            Self::TaylorGreen => "taylor_green",
            Self::Twist => "twist",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialSpec {
    pub mode: InitMode,
    pub amplitude: f64,
    pub seed: u64,
    /// Largest wavenumber index per axis in the random modes.
    pub band_limit: usize,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            mode: InitMode::Random,
            amplitude: 1e-2,
            seed: 42,
            band_limit: 2,
        }
    }
}

/// One band-limited real field per output component.
fn random_modes(grid: &Grid, band: usize, rng: &mut ChaCha8Rng) -> [Vec<f64>; 3] {
    let nd = grid.ndim();
    let b = band as i64;
    let mut wave = Vec::new();
    let range = |a: usize| if a < nd { -b..=b } else { 0..=0 };
    for i in range(0) {
        for j in range(1) {
            for k in range(2) {
                // one representative of each ±k pair
                let m = [i, j, k];
                let first = m.iter().find(|&&c| c != 0);
                if matches!(first, Some(&c) if c > 0) {
                    wave.push(m);
                }
            }
        }
    }
    let coeffs: Vec<[(f64, f64); 3]> = wave
        .iter()
        .map(|_| std::array::from_fn(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    let scale: [f64; 3] = std::array::from_fn(|a| 2.0 * std::f64::consts::PI / grid.lengths()[a]);
    let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; grid.len()]);
    for p in 0..grid.len() {
        let x = grid.coord(p);
        for (m, c) in wave.iter().zip(&coeffs) {
            let phase: f64 = (0..3).map(|a| m[a] as f64 * scale[a] * x[a]).sum();
            let (s, co) = phase.sin_cos();
            for comp in 0..3 {
                out[comp][p] += c[comp].0 * co + c[comp].1 * s;
            }
        }
    }
    out
}

fn check_spec(amplitude: f64, band: usize) -> Result<()> {
    if band == 0 {
        return Err(Error::BadSpec("band limit must be positive".into()));
    }
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::BadSpec(format!(
            "amplitude must be finite and non-negative, got {amplitude}"
        )));
    }
    Ok(())
}

fn max_norm3(c: &[Vec<f64>; 3]) -> f64 {
    (0..c[0].len())
        .map(|p| (c[0][p].powi(2) + c[1][p].powi(2) + c[2][p].powi(2)).sqrt())
        .fold(0.0, f64::max)
}

/// `exp([θ]×)` of a seeded band-limited angle field with `max |θ| = amplitude`.
pub fn random_frame_field(grid: &Grid, amplitude: f64, band: usize, seed: u64) -> Result<FrameField> {
    check_spec(amplitude, band)?;
    if amplitude == 0.0 {
        return Ok(FrameField::identity(grid.dims()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = random_modes(grid, band, &mut rng);
    let s = amplitude / max_norm3(&theta);
    Ok(FrameField::from_fn(grid.dims(), |p| {
        Frame::from_rotation_vector(&(Vector3::new(theta[0][p], theta[1][p], theta[2][p]) * s))
    }))
}

/// Divergence-free, zero-mean band-limited velocity with `max |v| = amplitude`.
pub fn random_velocity(grid: &Grid, amplitude: f64, band: usize, seed: u64) -> Result<VectorField> {
    check_spec(amplitude, band)?;
    if amplitude == 0.0 {
        return Ok(VectorField::zeros(grid.dims()));
    }
    // separate stream from the frame angles
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let raw = VectorField {
        dims: grid.dims(),
        c: random_modes(grid, band, &mut rng),
    };
    let v = grid.leray_project(&raw)?;
    let m = v.max_norm();
    Ok(if m > 0.0 { v.scaled(amplitude / m) } else { v })
}

/// Taylor–Green vortex `(a sin x cos y, −a cos x sin y, 0)` on the first two axes.
pub fn taylor_green(grid: &Grid, amplitude: f64) -> VectorField {
    let l = grid.lengths();
    let (kx, ky) = (2.0 * std::f64::consts::PI / l[0], 2.0 * std::f64::consts::PI / l[1]);
    let mut v = VectorField::zeros(grid.dims());
    for p in 0..grid.len() {
        let x = grid.coord(p);
        let (sx, cx) = (kx * x[0]).sin_cos();
        let (sy, cy) = (ky * x[1]).sin_cos();
        v.c[0][p] = amplitude * sx * cy;
        v.c[1][p] = -amplitude * (kx / ky) * cx * sy;
    }
    v
}

/// Rotation about `e3` by `θ = amplitude · sin(2πx/L)`.
pub fn twist_frame(grid: &Grid, amplitude: f64) -> FrameField {
    let l = grid.lengths()[0];
    FrameField::from_fn(grid.dims(), |p| {
        let th = amplitude * (2.0 * std::f64::consts::PI * grid.coord(p)[0] / l).sin();
        Frame::from_rotation_vector(&Vector3::new(0.0, 0.0, th))
    })
}

/// Builds `(F⁰, v⁰)` for a spec.
pub fn generate(grid: &Grid, spec: &InitialSpec) -> Result<(FrameField, VectorField)> {
    check_spec(spec.amplitude, spec.band_limit)?;
    let eps = spec.amplitude;
    Ok(match spec.mode {
        InitMode::Zero => (FrameField::identity(grid.dims()), VectorField::zeros(grid.dims())),
        InitMode::Random => (
            random_frame_field(grid, eps, spec.band_limit, spec.seed)?,
            random_velocity(grid, eps, spec.band_limit, spec.seed)?,
        ),
        InitMode::TaylorGreen => (FrameField::identity(grid.dims()), taylor_green(grid, eps)),
        InitMode::Twist => (twist_frame(grid, eps), VectorField::zeros(grid.dims())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_amplitude_is_trivial_state() {
        let g = Grid::new(&[16, 16], &[2.0 * PI; 2]).unwrap();
        let spec = InitialSpec {
            amplitude: 0.0,
            ..Default::default()
        };
        let (f, v) = generate(&g, &spec).unwrap();
        assert_eq!(f, FrameField::identity(g.dims()));
        assert_eq!(v.max_norm(), 0.0);
    }

    #[test]
    fn construction_guarantees() {
        for dims in [vec![32, 32], vec![16, 16, 16]] {
            let g = Grid::new(&dims, &vec![2.0 * PI; dims.len()]).unwrap();
            let (f, v) = generate(&g, &InitialSpec::default()).unwrap();
            assert!(f.max_orthonormality_drift() <= 1e-13);
            let div = g.div(&v).unwrap();
            assert!(g.l2_sq(&div.data).sqrt() <= 1e-12);
            assert!((v.max_norm() - 1e-2).abs() < 1e-15);
            assert!(v.c.iter().all(|c| g.mean(c).abs() < 1e-15));
        }
    }

    #[test]
    fn seeded_output_is_bit_identical() {
        let g = Grid::new(&[32, 32], &[2.0 * PI; 2]).unwrap();
        let a = generate(&g, &InitialSpec::default()).unwrap();
        let b = generate(&g, &InitialSpec::default()).unwrap();
        assert_eq!(a, b);
        let c = generate(
            &g,
            &InitialSpec {
                seed: 43,
                ..Default::default()
            },
        )
        .unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn bad_specs_rejected() {
        let g = Grid::new(&[16, 16], &[2.0 * PI; 2]).unwrap();
        let spec = InitialSpec {
            band_limit: 0,
            ..Default::default()
        };
        assert!(matches!(generate(&g, &spec), Err(Error::BadSpec(_))));
        assert!("vortex".parse::<InitMode>().is_err());
        assert_eq!("taylor_green".parse::<InitMode>().unwrap(), InitMode::TaylorGreen);
    }
}
