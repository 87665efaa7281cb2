//! Command-line front end. [`run`] takes an argument vector and returns the
//! process exit code: 0 success, 1 validation failure, 2 runtime error,
//! 3 run halted on an unstable step.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::diagnostics::{dissipative_estimate_report, energy_functionals, ledger_row, LedgerRecorder, LedgerRow};
use crate::dynamics::{total_energy, Model, State};
use crate::error::{Error, Result};
use crate::initial::generate;
use crate::integrator::{self, Observer, StepConfig};
use crate::io::{read_ledger, read_snapshot, write_snapshot, LedgerWriter, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;

pub const CONFIG_FILE: &str = "config.conf";
pub const LEDGER_FILE: &str = "ledger.csv";

#[derive(Parser, Debug)]
#[command(name = "bfh", version, about = "Biaxial nematic frame hydrodynamics on a periodic box")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Debug, Default)]
struct Common {
    /// Run configuration (defaults to the shipped configuration).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `initial.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check coefficients and settings.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Write the initial state as a snapshot.
    GenInitial {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run to `step.t_end`, writing config copy, ledger and snapshots.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Run directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stop after this many steps.
        #[arg(long)]
        steps: Option<u64>,
        /// Start from a snapshot instead of generated data.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Recompute ledger energies from the snapshots of a run directory.
    Audit {
        #[arg(long)]
        out: PathBuf,
        /// Also write one `t,value` CSV per ledger column here.
        #[arg(long)]
        slices: Option<PathBuf>,
    },
    /// Time-step and grid refinement study from the configured initial data.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Integration horizon for the time-step study.
        #[arg(long, default_value_t = 0.1)]
        horizon: f64,
        /// Number of refinement levels.
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// Energy functionals and estimate report for one snapshot.
    Energy {
        snapshot: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_) | Error::Config(_) | Error::BadSpec(_) | Error::SLimitExceeded { .. } => {
            EXIT_INVALID
        }
        Error::StepUnstable { .. } => EXIT_UNSTABLE,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `argv` (including the program name) and runs one subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_RUNTIME } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load(common: &Common) -> Result<SimConfig> {
    let mut c = match &common.config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::parse(crate::io::config::DEFAULT_CONFIG)?,
    };
    if let Some(s) = common.seed {
        c.initial.seed = s;
    }
    Ok(c)
}

fn dispatch(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Validate { common } => validate(&load(&common)?),
        Cmd::GenInitial { common, out } => {
            let c = load(&common)?;
            let m = c.model()?;
            let (f, v) = generate(&m.grid, &c.initial)?;
            write_snapshot(&out, &m.grid, &State::new(f, v, 0.0)?)?;
            println!("wrote {}", out.display());
            Ok(EXIT_OK)
        }
        Cmd::Simulate {
            common,
            out,
            steps,
            resume,
        } => {
            let mut c = load(&common)?;
            if let Some(o) = out {
                c.output.dir = o;
            }
            simulate(&c, steps, resume.as_deref())
        }
        Cmd::Audit { out, slices } => audit(&out, slices.as_deref()),
        Cmd::Convergence {
            common,
            horizon,
            levels,
        } => convergence(&load(&common)?, horizon, levels),
        Cmd::Energy { snapshot, common } => energy(&load(&common)?, &snapshot),
    }
}

fn validate(c: &SimConfig) -> Result<i32> {
    let mut bad = Vec::new();
    for v in c.viscous.validate() {
        bad.push(v.to_string());
    }
    let mut probe = c.clone();
    probe.viscous = crate::constitutive::ViscousParams::default();
    if let Err(e) = probe.validate() {
        bad.push(e.to_string());
    }
    if bad.is_empty() {
        println!("configuration valid");
        Ok(EXIT_OK)
    } else {
        for b in &bad {
            eprintln!("invalid: {b}");
        }
        Ok(EXIT_INVALID)
    }
}

fn snapshot_name(step: u64) -> String {
    format!("snap_{step:08}.bfh")
}

fn simulate(c: &SimConfig, max_steps: Option<u64>, resume: Option<&Path>) -> Result<i32> {
    let m = c.model()?;
    let s0 = match resume {
        Some(p) => {
            let snap = read_snapshot(p)?;
            m.check(&snap.state)?;
            snap.state
        }
        None => {
            let (f, v) = generate(&m.grid, &c.initial)?;
            State::new(f, v, 0.0)?
        }
    };
    let dir = &c.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let cfg_path = dir.join(CONFIG_FILE);
    std::fs::write(&cfg_path, c.to_text()).map_err(|e| Error::io(format!("writing {}", cfg_path.display()), e))?;
    let mut writer = LedgerWriter::create(&dir.join(LEDGER_FILE), &c.diagnostics_s)?;
    let mut rec = LedgerRecorder::new(&m, &c.diagnostics_s, c.output.ledger_every)?.with_sink(&mut writer);
    let snap_every = c.output.snapshot_every;
    let mut last_snap = None;
    let mut last_step = 0;
    let outcome = {
        let mut obs = |step: u64, st: &State| -> Result<()> {
            rec.observe(step, st)?;
            if step % snap_every == 0 {
                write_snapshot(&dir.join(snapshot_name(step)), &m.grid, st)?;
                last_snap = Some(step);
            }
            last_step = step;
            Ok(())
        };
        integrator::run(&m, s0, &c.step, max_steps, &mut obs)?
    };
    // the final state always gets a ledger row and a snapshot
    if rec.rows.last().map(|r| r.t) != Some(outcome.state.t) {
        rec.record(&outcome.state)?;
    }
    if last_snap != Some(last_step) {
        write_snapshot(&dir.join(snapshot_name(last_step)), &m.grid, &outcome.state)?;
    }
    let e = total_energy(&m, &outcome.state)?;
    println!(
        "{} steps, t = {}, energy = {e:e}, ledger rows = {}",
        outcome.steps,
        outcome.state.t,
        rec.rows.len()
    );
    match outcome.halted {
        Some(err) => {
            eprintln!("halted: {err}");
            Ok(exit_code(&err))
        }
        None => Ok(EXIT_OK),
    }
}

/// Relative difference with an absolute floor for quantities that vanish.
fn rel_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs()).max(1e-300)
    }
}

fn energy_columns(r: &LedgerRow) -> Vec<f64> {
    let mut v = vec![r.kinetic, r.f_bi];
    for &(_, e, d) in &r.e_d {
        v.push(e);
        v.push(d);
    }
    v.extend(r.channels);
    v
}

/// Largest relative deviation between the ledger and recomputed rows, and the number compared.
pub fn audit_run_dir(dir: &Path) -> Result<(f64, usize)> {
    let c = SimConfig::load(&dir.join(CONFIG_FILE))?;
    let m = c.model()?;
    let (s_values, rows) = read_ledger(&dir.join(LEDGER_FILE))?;
    let mut snaps: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(format!("listing {}", dir.display()), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bfh"))
        .collect();
    snaps.sort();
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for p in &snaps {
        let snap = read_snapshot(p)?;
        let Some(row) = rows.iter().find(|r| r.t == snap.state.t) else {
            continue;
        };
        let fresh = ledger_row(&m, &snap.state, &s_values)?;
        for (a, b) in energy_columns(row).iter().zip(energy_columns(&fresh)) {
            worst = worst.max(rel_diff(*a, b));
        }
        compared += 1;
    }
    if compared == 0 {
        return Err(Error::Ledger(format!("no snapshot in {} matches a ledger row", dir.display())));
    }
    Ok((worst, compared))
}

fn audit(dir: &Path, slices: Option<&Path>) -> Result<i32> {
    let (worst, n) = audit_run_dir(dir)?;
    println!("compared {n} snapshots, largest relative deviation {worst:e}");
    if let Some(out) = slices {
        let (s_values, rows) = read_ledger(&dir.join(LEDGER_FILE))?;
        std::fs::create_dir_all(out).map_err(|e| Error::io(format!("creating {}", out.display()), e))?;
        for (k, name) in LedgerRow::header(&s_values).iter().enumerate().skip(1) {
            let p = out.join(format!("{name}.csv"));
            let mut w = csv::Writer::from_path(&p).map_err(|e| Error::Ledger(format!("{}: {e}", p.display())))?;
            let rec = |w: &mut csv::Writer<std::fs::File>, a: String, b: String| {
                w.write_record([a, b]).map_err(|e| Error::Ledger(format!("{}: {e}", p.display())))
            };
            rec(&mut w, "t".into(), name.clone())?;
            for r in &rows {
                let v = r.values();
                rec(&mut w, v[0].to_string(), v[k].to_string())?;
            }
            w.flush().map_err(|e| Error::io(format!("writing {}", p.display()), e))?;
        }
        println!("wrote column slices to {}", out.display());
    }
    Ok(if worst <= 1e-12 { EXIT_OK } else { EXIT_INVALID })
}

fn state_distance(m: &Model, a: &State, b: &State) -> f64 {
    let g = &m.grid;
    let mut d = g.vector_l2_sq(&a.v.axpy(-1.0, &b.v));
    for (x, y) in a.f.n.iter().flatten().zip(b.f.n.iter().flatten()) {
        let diff: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
        d += g.l2_sq(&diff);
    }
    d.sqrt()
}

fn convergence(c: &SimConfig, horizon: f64, levels: u32) -> Result<i32> {
    if levels < 3 {
        return Err(Error::Config("convergence needs at least 3 levels".into()));
    }
    let m = c.model()?;
    let (f, v) = generate(&m.grid, &c.initial)?;
    let s0 = State::new(f, v, 0.0)?;
    let mut sols = Vec::new();
    let out = std::io::stdout();
    let mut out = out.lock();
    let _ = writeln!(out, "# time-step refinement, scheme {}, horizon {horizon}", c.step.scheme);
    for l in 0..levels {
        let cfg = StepConfig {
            dt: c.step.dt / 2f64.powi(l as i32),
            t_end: horizon,
            adaptive: false,
            ..c.step.clone()
        };
        let r = integrator::run(&m, s0.clone(), &cfg, None, &mut |_: u64, _: &State| Ok(()))?;
        if let Some(e) = r.halted {
            return Err(e);
        }
        sols.push((cfg.dt, r.state));
    }
    let errs: Vec<f64> = sols.windows(2).map(|w| state_distance(&m, &w[0].1, &w[1].1)).collect();
    for (i, e) in errs.iter().enumerate() {
        let order = if i > 0 { format!("{:.3}", (errs[i - 1] / e).log2()) } else { "-".into() };
        let _ = writeln!(out, "dt = {:e}  |u(dt) - u(dt/2)| = {e:e}  order = {order}", sols[i].0);
    }
    let _ = writeln!(out, "# grid refinement of the initial energy");
    let mut prev = None;
    for l in 0..levels {
        let dims: Vec<usize> = c.grid.dims.iter().map(|&n| (n / 2).max(16) << l).collect();
        let g = crate::grid::Grid::new(&dims, &c.grid.lengths)?;
        let mg = Model::new(g, c.elastic()?, c.viscous.clone())?;
        let (f, v) = generate(&mg.grid, &c.initial)?;
        let e = total_energy(&mg, &State::new(f, v, 0.0)?)?;
        let diff = prev.map(|p: f64| format!("{:e}", (e - p).abs())).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "dims = {dims:?}  energy = {e:.16e}  change = {diff}");
        prev = Some(e);
    }
    Ok(EXIT_OK)
}

fn energy(c: &SimConfig, path: &Path) -> Result<i32> {
    let snap = read_snapshot(path)?;
    let mut c = c.clone();
    c.grid.dims = snap.dims.clone();
    c.grid.lengths = snap.lengths.clone();
    let m = c.model()?;
    let st = snap.state;
    m.check(&st)?;
    println!("t = {}", st.t);
    println!("total energy = {:e}", total_energy(&m, &st)?);
    for &s in &c.diagnostics_s {
        let eb = energy_functionals(&m, &st, s)?;
        println!(
            "s = {s}: E_s = {:e} (F_Bi {:e}, kinetic {:e}, frame {:e}, high kinetic {:e}), D_s = {:e} {:?}",
            eb.e_s,
            eb.f_bi,
            eb.kinetic,
            eb.frame_terms.iter().map(|t| t.total()).sum::<f64>(),
            eb.high_kinetic,
            eb.d_s,
            eb.d_terms
        );
        let r = dissipative_estimate_report(&m, &st, s)?;
        let lfs = r
            .lfs
            .map(|x| format!("{:e} vs {:e} (ratio {:.6})", x.lhs, x.leading, x.ratio))
            .unwrap_or_else(|| "n/a".into());
        println!(
            "       rotational bound: {:e} vs {:e} (ratio {:.6}); higher-order bound: {lfs}{}",
            r.lf.lhs,
            r.lf.leading,
            r.lf.ratio,
            if r.flagged() { "  [ratio below 1]" } else { "" }
        );
    }
    Ok(EXIT_OK)
}
