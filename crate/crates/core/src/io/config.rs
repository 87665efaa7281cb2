//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! grid.dims = 64, 64
//! step.scheme = imex_rk2
//! ```
//!
//! Missing keys keep their defaults; unknown keys are errors.

use std::path::{Path, PathBuf};

use crate::constitutive::ViscousParams;
use crate::dynamics::{Forcing, Model};
use crate::elastic::ElasticParams;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initial::{InitMode, InitialSpec};
use crate::integrator::{Scheme, StepConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub dims: Vec<usize>,
    pub lengths: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub forcing: Forcing,
    pub dealias: bool,
    pub evolve_frame: bool,
    pub evolve_velocity: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snapshot_every: u64,
    pub ledger_every: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub grid: GridConfig,
    pub elastic_k: [f64; 12],
    pub viscous: ViscousParams,
    pub model: ModelConfig,
    pub step: StepConfig,
    pub initial: InitialSpec,
    pub output: OutputConfig,
    pub diagnostics_s: Vec<u32>,
}

/// Text of the configuration shipped with the crate.
pub const DEFAULT_CONFIG: &str = include_str!("../../config/default.conf");

impl Default for SimConfig {
    fn default() -> Self {
        let tau = 2.0 * std::f64::consts::PI;
        Self {
            grid: GridConfig {
                dims: vec![64, 64],
                lengths: vec![tau, tau],
            },
            elastic_k: *ElasticParams::default().k(),
            viscous: ViscousParams::default(),
            model: ModelConfig {
                forcing: Forcing::StressDivergence,
                dealias: true,
                evolve_frame: true,
                evolve_velocity: true,
            },
            step: StepConfig {
                dt: 1e-3,
                t_end: 10.0,
                ..Default::default()
            },
            initial: InitialSpec::default(),
            output: OutputConfig {
                dir: PathBuf::from("run"),
                snapshot_every: 1000,
                ledger_every: 10,
            },
            diagnostics_s: vec![0, 2],
        }
    }
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", x.trim())))
        })
        .collect()
}

fn array<const N: usize>(key: &str, v: &str) -> Result<[f64; N]> {
    let xs: Vec<f64> = list(key, v)?;
    xs.try_into()
        .map_err(|xs: Vec<f64>| Error::Config(format!("{key}: expected {N} values, got {}", xs.len())))
}

fn one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn forcing_name(f: Forcing) -> &'static str {
    match f {
        Forcing::StressDivergence => "stress_divergence",
        Forcing::BodyForce => "body_force",
    }
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            c.set(key.trim(), value.trim())
                .map_err(|e| match e {
                    Error::Config(m) => Error::Config(format!("line {}: {m}", lineno + 1)),
                    other => other,
                })?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "grid.dims" => self.grid.dims = list(key, v)?,
            "grid.lengths" => self.grid.lengths = list(key, v)?,
            "elastic.k" => self.elastic_k = array(key, v)?,
            "viscous.beta" => self.viscous.beta = array(key, v)?,
            "viscous.chi" => self.viscous.chi = array(key, v)?,
            "viscous.eta_rot" => self.viscous.eta_rot = array(key, v)?,
            "viscous.eta" => self.viscous.eta = one(key, v)?,
            "model.forcing" => {
                self.model.forcing = match v {
                    "stress_divergence" => Forcing::StressDivergence,
                    "body_force" => Forcing::BodyForce,
                    _ => return Err(Error::Config(format!("{key}: unknown forcing '{v}'"))),
                }
            }
            "model.dealias" => self.model.dealias = one(key, v)?,
            "model.evolve_frame" => self.model.evolve_frame = one(key, v)?,
            "model.evolve_velocity" => self.model.evolve_velocity = one(key, v)?,
            "step.dt" => self.step.dt = one(key, v)?,
            "step.t_end" => self.step.t_end = one(key, v)?,
            "step.scheme" => self.step.scheme = v.parse::<Scheme>()?,
            "step.cfl_target" => self.step.cfl_target = one(key, v)?,
            "step.retract_every" => self.step.retract_every = one(key, v)?,
            "step.adaptive" => self.step.adaptive = one(key, v)?,
            "initial.mode" => self.initial.mode = v.parse::<InitMode>()?,
            "initial.amplitude" => self.initial.amplitude = one(key, v)?,
            "initial.seed" => self.initial.seed = one(key, v)?,
            "initial.band_limit" => self.initial.band_limit = one(key, v)?,
            "output.dir" => self.output.dir = PathBuf::from(v),
            "output.snapshot_every" => self.output.snapshot_every = one(key, v)?,
            "output.ledger_every" => self.output.ledger_every = one(key, v)?,
            "diagnostics.s" => self.diagnostics_s = list(key, v)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Fully resolved text; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("grid.dims", join(&self.grid.dims));
        kv("grid.lengths", join(&self.grid.lengths));
        kv("elastic.k", join(&self.elastic_k));
        kv("viscous.beta", join(&self.viscous.beta));
        kv("viscous.chi", join(&self.viscous.chi));
        kv("viscous.eta_rot", join(&self.viscous.eta_rot));
        kv("viscous.eta", self.viscous.eta.to_string());
        kv("model.forcing", forcing_name(self.model.forcing).into());
        kv("model.dealias", self.model.dealias.to_string());
        kv("model.evolve_frame", self.model.evolve_frame.to_string());
        kv("model.evolve_velocity", self.model.evolve_velocity.to_string());
        kv("step.dt", self.step.dt.to_string());
        kv("step.t_end", self.step.t_end.to_string());
        kv("step.scheme", self.step.scheme.to_string());
        kv("step.cfl_target", self.step.cfl_target.to_string());
        kv("step.retract_every", self.step.retract_every.to_string());
        kv("step.adaptive", self.step.adaptive.to_string());
        kv("initial.mode", self.initial.mode.to_string());
        kv("initial.amplitude", self.initial.amplitude.to_string());
        kv("initial.seed", self.initial.seed.to_string());
        kv("initial.band_limit", self.initial.band_limit.to_string());
        kv("output.dir", self.output.dir.display().to_string());
        kv("output.snapshot_every", self.output.snapshot_every.to_string());
        kv("output.ledger_every", self.output.ledger_every.to_string());
        kv("diagnostics.s", join(&self.diagnostics_s));
        s
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(&self.grid.dims, &self.grid.lengths)
    }

    pub fn elastic(&self) -> Result<ElasticParams> {
        ElasticParams::new(self.elastic_k)
    }

    /// Every check short of building the model.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.elastic()?;
        self.step.validate()?;
        if !(self.initial.amplitude >= 0.0 && self.initial.amplitude.is_finite()) {
            return Err(Error::BadSpec(format!(
                "initial.amplitude must be non-negative, got {}",
                self.initial.amplitude
            )));
        }
        if self.initial.band_limit == 0 {
            return Err(Error::BadSpec("initial.band_limit must be positive".into()));
        }
        if self.output.ledger_every == 0 || self.output.snapshot_every == 0 {
            return Err(Error::Config("output intervals must be at least 1".into()));
        }
        if self.output.snapshot_every % self.output.ledger_every != 0 {
            return Err(Error::Config(
                "output.snapshot_every must be a multiple of output.ledger_every".into(),
            ));
        }
        for &s in &self.diagnostics_s {
            if s > crate::grid::MAX_LAPLACIAN_POWER {
                return Err(Error::SLimitExceeded {
                    s,
                    max: crate::grid::MAX_LAPLACIAN_POWER,
                });
            }
        }
        let bad = self.viscous.validate();
        if !bad.is_empty() {
            let msg: Vec<String> = bad.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidParams(msg.join("; ")));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Model> {
        self.validate()?;
        let mut m = Model::new(self.grid()?, self.elastic()?, self.viscous.clone())?.with_forcing(self.model.forcing);
        m.dealias = self.model.dealias;
        m.evolve_frame = self.model.evolve_frame;
        m.evolve_velocity = self.model.evolve_velocity;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_is_the_default() {
        let c = SimConfig::parse(DEFAULT_CONFIG).unwrap();
        assert_eq!(c, SimConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn text_round_trip() {
        let mut c = SimConfig::default();
        c.grid.dims = vec![24, 24, 24];
        c.grid.lengths = vec![1.0, 2.0, 3.5];
        c.step.scheme = Scheme::ExplicitRk4;
        c.step.dt = 1.0 / 3.0;
        c.model.forcing = Forcing::BodyForce;
        c.initial.mode = InitMode::Twist;
        c.diagnostics_s = vec![1];
        assert_eq!(SimConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_line_and_key() {
        let e = SimConfig::parse("grid.dims = 32, 32\nstep.dtt = 1").unwrap_err();
        assert!(e.to_string().contains("line 2") && e.to_string().contains("step.dtt"), "{e}");
        let e = SimConfig::parse("viscous.beta = 1, 2").unwrap_err();
        assert!(e.to_string().contains("expected 6"), "{e}");
        assert!(SimConfig::parse("just words").is_err());
    }

    #[test]
    fn coupling_violation_is_named() {
        let mut c = SimConfig::default();
        c.viscous.beta[0] = 2.0;
        match c.validate() {
            Err(Error::InvalidParams(m)) => assert!(m.contains("β₀² ≤ β₁β₂"), "{m}"),
            other => panic!("{other:?}"),
        }
    }
}
