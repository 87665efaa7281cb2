//! Energy functionals, dissipation estimates and the blow-up monitor.
//!
//! Higher-order norms are evaluated in Fourier space. Sup norms are grid
//! maxima, which bound the true supremum from below; for band-limited data the
//! gap is negligible.

use num_complex::Complex64;

use crate::dynamics::{energy_production_audit, Model, State};
use crate::elastic::{
    density_reformulated_from, molecular_fields_from, rotational_variational_derivatives, ElasticParams,
    FrameKinematics, MolecularFields,
};
use crate::error::{Error, Result};
use crate::field::{FrameField, ScalarField, VectorField};
use crate::grid::{Grid, MAX_LAPLACIAN_POWER};
use crate::integrator::Observer;

fn check_s(s: u32) -> Result<()> {
    if s > MAX_LAPLACIAN_POWER {
        return Err(Error::SLimitExceeded {
            s,
            max: MAX_LAPLACIAN_POWER,
        });
    }
    Ok(())
}

/// `x^n` for small `n`, cheaper than `powi` in hot loops.
fn ipow(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, _| acc * x)
}

/// `‖·‖²` of a spectrum with per-mode weights.
fn weighted(g: &Grid, spec: &[Complex64], w: &[f64]) -> f64 {
    spec.iter().zip(w).map(|(z, w)| z.norm_sqr() * w).sum::<f64>() * g.volume() / (g.len() as f64).powi(2)
}

/// Spectra shared by every order `s`.
struct EnergySpectra {
    frame: Vec<Vec<Complex64>>,
    div: Vec<Vec<Complex64>>,
    /// `c[j][i]` at index `3 j + i`
    twist: Vec<Vec<Complex64>>,
    vel: Vec<Vec<Complex64>>,
    f_bi: f64,
    /// `|ξ|²` and the first-derivative `Σ_a k_a²`
    ksq: Vec<f64>,
    kdsq: Vec<f64>,
}

impl EnergySpectra {
    fn new(m: &Model, st: &State, kin: &FrameKinematics) -> Self {
        let g = &m.grid;
        let twist: Vec<&[f64]> = kin.c.iter().flatten().map(|c| c.as_slice()).collect();
        let div: Vec<&[f64]> = kin.div.iter().map(|c| c.as_slice()).collect();
        Self {
            frame: frame_spectra(g, &st.f),
            div: g.forward_many(&div),
            twist: g.forward_many(&twist),
            vel: g.forward_many(&st.v.c),
            f_bi: g.integrate(&density_reformulated_from(kin, &m.elastic)),
            ksq: (0..g.len()).map(|p| g.ksq(p)).collect(),
            kdsq: (0..g.len()).map(|p| g.kd_sq(p)).collect(),
        }
    }

    /// `|ξ|^{2n}` weights, optionally times the first-derivative symbol.
    fn weights(&self, n: u32, grad: bool) -> Vec<f64> {
        self.ksq
            .iter()
            .zip(&self.kdsq)
            .map(|(&k2, &kd)| ipow(k2, n) * if grad { kd } else { 1.0 })
            .collect()
    }
}

fn frame_spectra(g: &Grid, f: &FrameField) -> Vec<Vec<Complex64>> {
    let comps: Vec<&[f64]> = f.n.iter().flatten().map(|c| c.as_slice()).collect();
    g.forward_many(&comps)
}

/// `½(γ_i ‖Δ^s ∇n_i‖² + k_i ‖Δ^s div n_i‖² + Σ_j k_ji ‖Δ^s (∇×n_i)·n_j‖²)`, split up.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FrameEnergyTerms {
    pub gradient: f64,
    pub divergence: f64,
    /// Indexed by `j`.
    pub twist: [f64; 3],
}

impl FrameEnergyTerms {
    pub fn total(&self) -> f64 {
        0.5 * (self.gradient + self.divergence + self.twist.iter().sum::<f64>())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub s: u32,
    pub f_bi: f64,
    pub kinetic: f64,
    pub frame_terms: [FrameEnergyTerms; 3],
    /// `½‖Δ^s v‖²`
    pub high_kinetic: f64,
    /// `η‖∇v‖²`, `(2γ²/χ)‖ΔF‖²`, `(γ²/4χ)‖Δ^{s+1}F‖²`, `η‖∇Δ^s v‖²`
    pub d_terms: [f64; 4],
    pub e_s: f64,
    pub d_s: f64,
}

/// Weights `(γ, χ)` of the dissipation functional: smallest `γ_i`, largest `χ_k`.
pub fn dissipation_weights(m: &Model) -> (f64, f64) {
    (m.elastic.gamma_min(), m.viscous.chi_max())
}

/// `E_s` and `D_s` with every contributing term.
pub fn energy_functionals(m: &Model, st: &State, s: u32) -> Result<EnergyBreakdown> {
    check_s(s)?;
    m.check(st)?;
    let g = &m.grid;
    let kin = FrameKinematics::compute(&st.f, g)?;
    energy_functionals_from(m, st, &kin, s)
}

fn energy_functionals_from(m: &Model, st: &State, kin: &FrameKinematics, s: u32) -> Result<EnergyBreakdown> {
    Ok(energy_from_spectra(m, &EnergySpectra::new(m, st, kin), s))
}

fn energy_from_spectra(m: &Model, sp: &EnergySpectra, s: u32) -> EnergyBreakdown {
    let g = &m.grid;
    let e = &m.elastic;
    let (gam, kd, kt) = (e.gamma(), e.k_div(), e.k_twist());
    let w_s = sp.weights(2 * s, false);
    let wg_s = sp.weights(2 * s, true);
    let wg_0 = sp.weights(0, true);
    let frame_terms: [FrameEnergyTerms; 3] = std::array::from_fn(|i| FrameEnergyTerms {
        gradient: gam[i] * (0..3).map(|p| weighted(g, &sp.frame[3 * i + p], &wg_s)).sum::<f64>(),
        divergence: kd[i] * weighted(g, &sp.div[i], &w_s),
        twist: std::array::from_fn(|j| kt[j][i] * weighted(g, &sp.twist[3 * j + i], &w_s)),
    });
    let all = |specs: &[Vec<Complex64>], w: &[f64]| specs.iter().map(|z| weighted(g, z, w)).sum::<f64>();
    let kinetic = 0.5 * all(&sp.vel, &sp.weights(0, false));
    let high_kinetic = 0.5 * all(&sp.vel, &w_s);
    let (gm, chi) = dissipation_weights(m);
    let eta = m.viscous.eta;
    let lap_f = all(&sp.frame, &sp.weights(2, false));
    let lap_f_hi = all(&sp.frame, &sp.weights(2 * s + 2, false));
    let d_terms = [
        eta * all(&sp.vel, &wg_0),
        2.0 * gm * gm / chi * lap_f,
        gm * gm / (4.0 * chi) * lap_f_hi,
        eta * all(&sp.vel, &wg_s),
    ];
    let e_s = sp.f_bi + kinetic + frame_terms.iter().map(FrameEnergyTerms::total).sum::<f64>() + high_kinetic;
    EnergyBreakdown {
        s,
        f_bi: sp.f_bi,
        kinetic,
        frame_terms,
        high_kinetic,
        d_terms,
        e_s,
        d_s: d_terms.iter().sum(),
    }
}

/// `‖∇F‖²_{H^{2s}}` and `‖v‖²_{H^{2s}}` with the multiplier `(1 + |ξ|²)^{2s}`.
pub fn sobolev_norms(g: &Grid, st: &State, s: u32) -> Result<(f64, f64)> {
    check_s(s)?;
    g.check_dims_of(st.f.dims)?;
    let m = 2 * s;
    let mut gf = 0.0;
    for z in frame_spectra(g, &st.f) {
        for a in 0..3 {
            gf += g.sobolev_sq_spec(&g.d_spec(&z, a), m);
        }
    }
    let v = st.v.c.iter().map(|c| g.sobolev_sq_spec(&g.forward(c), m)).sum();
    Ok((gf, v))
}

fn lap_pow_fields(g: &Grid, h: &MolecularFields, s: u32) -> MolecularFields {
    MolecularFields {
        h: std::array::from_fn(|i| VectorField {
            dims: h.h[i].dims,
            c: std::array::from_fn(|p| g.inverse(&g.lap_pow_spec(&g.forward(&h.h[i].c[p]), s))),
        }),
    }
}

/// `𝓗_k = n_{k+1}·Δ^s h_{k+2} − n_{k+2}·Δ^s h_{k+1}` (indices mod 3).
pub fn h_delta_s(g: &Grid, e: &ElasticParams, f: &FrameField, s: u32) -> Result<[ScalarField; 3]> {
    check_s(s)?;
    let kin = FrameKinematics::compute(f, g)?;
    let h = molecular_fields_from(f, &kin, e, g);
    rotational_variational_derivatives(f, &lap_pow_fields(g, &h, s))
}

/// One side-by-side comparison of a dissipative lower bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateSide {
    pub lhs: f64,
    pub leading: f64,
    /// `lhs / leading`, and 1 when both vanish.
    pub ratio: f64,
}

impl EstimateSide {
    fn new(lhs: f64, leading: f64) -> Self {
        let ratio = if leading == 0.0 {
            if lhs == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            lhs / leading
        };
        Self { lhs, leading, ratio }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DissipativeReport {
    pub s: u32,
    /// `Σ (1/χ_k) ‖𝓛_k 𝓕‖²` against `(2γ²/χ) ‖ΔF‖²`.
    pub lf: EstimateSide,
    /// `Σ (1/χ_k) ‖𝓗_k‖²` against `(γ²/4χ) ‖Δ^{s+1}F‖²`; only for `s ≤ 2`.
    pub lfs: Option<EstimateSide>,
    pub e_s: f64,
    pub d_s: f64,
}

impl DissipativeReport {
    /// Whether any ratio fell below one and deserves a look.
    pub fn flagged(&self) -> bool {
        self.lf.ratio < 1.0 || self.lfs.is_some_and(|x| x.ratio < 1.0)
    }
}

/// Evaluates both sides of the two rotational lower bounds. Nothing is asserted.
pub fn dissipative_estimate_report(m: &Model, st: &State, s: u32) -> Result<DissipativeReport> {
    check_s(s)?;
    m.check(st)?;
    let g = &m.grid;
    let kin = FrameKinematics::compute(&st.f, g)?;
    let h = molecular_fields_from(&st.f, &kin, &m.elastic, g);
    let chi = m.viscous.chi;
    let weighted_sum =
        |fields: &[ScalarField; 3]| (0..3).map(|k| g.l2_sq(&fields[k].data) / chi[k]).sum::<f64>();
    let rot = rotational_variational_derivatives(&st.f, &h)?;
    let eb = energy_functionals_from(m, st, &kin, s)?;
    let lf = EstimateSide::new(weighted_sum(&rot), eb.d_terms[1]);
    let lfs = if s <= 2 {
        let hs = rotational_variational_derivatives(&st.f, &lap_pow_fields(g, &h, s))?;
        Some(EstimateSide::new(weighted_sum(&hs), eb.d_terms[2]))
    } else {
        None
    };
    Ok(DissipativeReport {
        s,
        lf,
        lfs,
        e_s: eb.e_s,
        d_s: eb.d_s,
    })
}

/// `(‖∇×v‖_∞, Σ_i ‖∇n_i‖²_∞)` on the grid.
pub fn blowup_integrand(g: &Grid, st: &State) -> Result<(f64, f64)> {
    let curl = g.curl(&st.v)?;
    let kin = FrameKinematics::compute(&st.f, g)?;
    Ok((curl.max_norm(), blowup_frame_part(&kin)))
}

fn blowup_frame_part(kin: &FrameKinematics) -> f64 {
    (0..3)
        .map(|i| {
            (0..kin.len())
                .map(|x| kin.jacobian(i, x).norm_squared())
                .fold(0.0, f64::max)
        })
        .sum()
}

/// One ledger sample.
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub kinetic: f64,
    pub f_bi: f64,
    /// `(s, E_s, D_s)` for each configured order.
    pub e_d: Vec<(u32, f64, f64)>,
    /// Same order as [`crate::dynamics::DissipationChannels::as_array`].
    pub channels: [f64; 6],
    pub curl_inf: f64,
    pub grad_f_sq_inf: f64,
    pub blowup: f64,
    pub orthonormality_drift: f64,
    pub divergence: f64,
}

pub const CHANNEL_NAMES: [&str; 6] = [
    "ch_viscous",
    "ch_rotational",
    "ch_block",
    "ch_scalar_s3",
    "ch_scalar_s4",
    "ch_scalar_s5",
];

impl LedgerRow {
    /// Column names for a given list of orders.
    pub fn header(s_values: &[u32]) -> Vec<String> {
        let mut h = vec!["t".to_string(), "kinetic".into(), "f_bi".into()];
        for s in s_values {
            h.push(format!("E_{s}"));
            h.push(format!("D_{s}"));
        }
        h.extend(CHANNEL_NAMES.iter().map(|c| c.to_string()));
        h.extend(
            ["curl_v_inf", "grad_f_sq_inf", "blowup_integral", "orthonormality_drift", "div_v_l2"]
                .iter()
                .map(|c| c.to_string()),
        );
        h
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.t, self.kinetic, self.f_bi];
        for &(_, e, d) in &self.e_d {
            v.push(e);
            v.push(d);
        }
        v.extend(self.channels);
        v.extend([
            self.curl_inf,
            self.grad_f_sq_inf,
            self.blowup,
            self.orthonormality_drift,
            self.divergence,
        ]);
        v
    }

    /// Inverse of [`LedgerRow::values`].
    pub fn from_values(s_values: &[u32], v: &[f64]) -> Result<Self> {
        let n = 3 + 2 * s_values.len() + 6 + 5;
        if v.len() != n {
            return Err(Error::Ledger(format!("expected {n} columns, found {}", v.len())));
        }
        let e_d = s_values
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, v[3 + 2 * i], v[4 + 2 * i]))
            .collect();
        let o = 3 + 2 * s_values.len();
        Ok(Self {
            t: v[0],
            kinetic: v[1],
            f_bi: v[2],
            e_d,
            channels: std::array::from_fn(|i| v[o + i]),
            curl_inf: v[o + 6],
            grad_f_sq_inf: v[o + 7],
            blowup: v[o + 8],
            orthonormality_drift: v[o + 9],
            divergence: v[o + 10],
        })
    }

    pub fn total_energy(&self) -> f64 {
        self.kinetic + self.f_bi
    }

    pub fn e(&self, s: u32) -> Option<f64> {
        self.e_d.iter().find(|x| x.0 == s).map(|x| x.1)
    }

    fn integrand(&self) -> f64 {
        self.curl_inf + self.grad_f_sq_inf
    }
}

/// Every ledger quantity at one state, with the blow-up column left at zero.
pub fn ledger_row(m: &Model, st: &State, s_values: &[u32]) -> Result<LedgerRow> {
    let mut row = monitor_row(m, st, s_values)?;
    row.channels = energy_production_audit(m, st)?.as_array();
    Ok(row)
}

/// [`ledger_row`] without the dissipation channels, which cost a full tendency evaluation.
pub fn monitor_row(m: &Model, st: &State, s_values: &[u32]) -> Result<LedgerRow> {
    for &s in s_values {
        check_s(s)?;
    }
    m.check(st)?;
    let g = &m.grid;
    let kin = FrameKinematics::compute(&st.f, g)?;
    let mut e_d = Vec::with_capacity(s_values.len());
    let mut base = None;
    if !s_values.is_empty() {
        let sp = EnergySpectra::new(m, st, &kin);
        for &s in s_values {
            let eb = energy_from_spectra(m, &sp, s);
            e_d.push((s, eb.e_s, eb.d_s));
            base = Some((eb.kinetic, eb.f_bi));
        }
    }
    let (kinetic, f_bi) = match base {
        Some(b) => b,
        None => (
            0.5 * g.vector_l2_sq(&st.v),
            g.integrate(&density_reformulated_from(&kin, &m.elastic)),
        ),
    };
    let div = g.div(&st.v)?;
    Ok(LedgerRow {
        t: st.t,
        kinetic,
        f_bi,
        e_d,
        channels: [0.0; 6],
        curl_inf: g.curl(&st.v)?.max_norm(),
        grad_f_sq_inf: blowup_frame_part(&kin),
        blowup: 0.0,
        orthonormality_drift: st.f.max_orthonormality_drift(),
        divergence: g.l2_sq(&div.data).sqrt(),
    })
}

/// Cumulative trapezoid integral of `‖∇×v‖_∞ + ‖∇F‖²_∞` over time-ordered rows.
pub fn blowup_monitor(rows: &[LedgerRow]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows.len());
    let mut acc = 0.0;
    for (i, r) in rows.iter().enumerate() {
        if i > 0 {
            let p = &rows[i - 1];
            acc += 0.5 * (r.t - p.t) * (r.integrand() + p.integrand());
        }
        out.push(acc);
    }
    out
}

/// Destination for ledger rows as they are produced.
pub trait LedgerSink {
    fn write_row(&mut self, row: &LedgerRow) -> Result<()>;
}

/// Observer that samples the ledger every `interval` steps, always including step 0.
pub struct LedgerRecorder<'a> {
    model: &'a Model,
    s_values: Vec<u32>,
    interval: u64,
    pub rows: Vec<LedgerRow>,
    sink: Option<&'a mut dyn LedgerSink>,
}

impl<'a> LedgerRecorder<'a> {
    pub fn new(model: &'a Model, s_values: &[u32], interval: u64) -> Result<Self> {
        for &s in s_values {
            check_s(s)?;
        }
        if interval == 0 {
            return Err(Error::Config("ledger interval must be at least 1".into()));
        }
        Ok(Self {
            model,
            s_values: s_values.to_vec(),
            interval,
            rows: Vec::new(),
            sink: None,
        })
    }

    pub fn with_sink(mut self, sink: &'a mut dyn LedgerSink) -> Self {
        self.sink = Some(sink);
        self
    }

    pub fn s_values(&self) -> &[u32] {
        &self.s_values
    }

    /// Records `st` unconditionally.
    pub fn record(&mut self, st: &State) -> Result<()> {
        let mut row = ledger_row(self.model, st, &self.s_values)?;
        if let Some(p) = self.rows.last() {
            row.blowup = p.blowup + 0.5 * (row.t - p.t) * (row.integrand() + p.integrand());
        }
        if let Some(sink) = self.sink.as_mut() {
            sink.write_row(&row)?;
        }
        self.rows.push(row);
        Ok(())
    }
}

impl Observer for LedgerRecorder<'_> {
    fn observe(&mut self, step: u64, st: &State) -> Result<()> {
        if step % self.interval == 0 {
            self.record(st)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::ViscousParams;
    use crate::frame::Frame;
    use crate::initial::{random_frame_field, random_velocity};
    use nalgebra::Vector3;
    use std::f64::consts::PI;

    fn model(n: usize) -> Model {
        let g = Grid::new(&[n, n], &[2.0 * PI; 2]).unwrap();
        Model::new(g, ElasticParams::default(), ViscousParams::default()).unwrap()
    }

    fn seeded(m: &Model, amp: f64, seed: u64) -> State {
        State::new(
            random_frame_field(&m.grid, amp, 2, seed).unwrap(),
            random_velocity(&m.grid, amp, 2, seed).unwrap(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn constant_state_has_zero_functionals() {
        let m = model(16);
        let f = Frame::from_rotation_vector(&Vector3::new(0.3, -0.2, 0.9));
        let st = State::new(FrameField::constant(m.grid.dims(), &f), VectorField::zeros(m.grid.dims()), 0.0).unwrap();
        for s in 0..=3 {
            let eb = energy_functionals(&m, &st, s).unwrap();
            assert!(eb.e_s.abs() < 1e-24 && eb.d_s.abs() < 1e-24, "{eb:?}");
            let hs = h_delta_s(&m.grid, &m.elastic, &st.f, s).unwrap();
            assert!(hs.iter().all(|h| h.max_abs() < 1e-12));
        }
        let r = dissipative_estimate_report(&m, &st, 1).unwrap();
        assert_eq!(r.lf.ratio, 1.0);
        assert_eq!(r.lfs.unwrap().ratio, 1.0);
        assert!(!r.flagged());
    }

    #[test]
    fn s_limit() {
        let m = model(16);
        let st = State::rest(m.grid.dims());
        assert!(matches!(energy_functionals(&m, &st, 4), Err(Error::SLimitExceeded { s: 4, .. })));
        assert!(h_delta_s(&m.grid, &m.elastic, &st.f, 4).is_err());
        assert!(dissipative_estimate_report(&m, &st, 4).is_err());
        assert!(LedgerRecorder::new(&m, &[0, 5], 1).is_err());
    }

    #[test]
    fn zeroth_order_energy_doubles_basic_energy() {
        let m = model(32);
        for seed in 0..3 {
            let st = seeded(&m, 0.4, seed);
            let eb = energy_functionals(&m, &st, 0).unwrap();
            let basic = eb.f_bi + eb.kinetic;
            assert!((eb.e_s - 2.0 * basic).abs() <= 1e-12 * basic, "{} vs {}", eb.e_s, 2.0 * basic);
            assert!((eb.d_terms[0] - eb.d_terms[3]).abs() <= 1e-14 * eb.d_terms[0]);
        }
    }

    #[test]
    fn h_at_order_zero_is_rotational_derivative() {
        let m = model(32);
        let st = seeded(&m, 0.5, 3);
        let h0 = h_delta_s(&m.grid, &m.elastic, &st.f, 0).unwrap();
        let resp = crate::elastic::ElasticResponse::compute(&st.f, &m.elastic, &m.grid).unwrap();
        for k in 0..3 {
            let d = h0[k].data.iter().zip(&resp.rot[k].data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(d <= 1e-13, "{d}");
        }
    }

    #[test]
    fn h_order_one_matches_refined_grid() {
        let coarse = model(32);
        let fine = model(64);
        let fc = random_frame_field(&coarse.grid, 0.3, 1, 11).unwrap();
        let ff = random_frame_field(&fine.grid, 0.3, 1, 11).unwrap();
        let hc = h_delta_s(&coarse.grid, &coarse.elastic, &fc, 1).unwrap();
        let hf = h_delta_s(&fine.grid, &fine.elastic, &ff, 1).unwrap();
        for k in 0..3 {
            let scale = hf[k].max_abs();
            let mut err: f64 = 0.0;
            for p in 0..coarse.grid.len() {
                let [i, j, _] = coarse.grid.index3(p);
                let q = (2 * i) * 64 + 2 * j;
                err = err.max((hc[k].data[p] - hf[k].data[q]).abs());
            }
            assert!(err <= 1e-8 * scale, "k={k}: {err} vs {scale}");
        }
    }

    #[test]
    fn functionals_are_nonnegative_and_norms_are_equivalent() {
        let m = model(32);
        let mut ratios = Vec::new();
        for seed in 0..20 {
            let st = seeded(&m, 0.2 + 0.02 * seed as f64, seed);
            for s in [1, 2] {
                let eb = energy_functionals(&m, &st, s).unwrap();
                assert!(eb.e_s >= 0.0 && eb.d_s >= 0.0);
                let (gf, v) = sobolev_norms(&m.grid, &st, s).unwrap();
                let r = eb.e_s / (gf + v);
                assert!(r.is_finite() && r > 0.0);
                ratios.push(r);
            }
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 1e-3 && hi < 1e3, "{lo} {hi}");
    }

    #[test]
    fn norms_agree_in_physical_and_fourier_space() {
        let m = model(32);
        let st = seeded(&m, 0.5, 8);
        let g = &m.grid;
        for c in st.v.c.iter().chain(st.f.n.iter().flatten()) {
            let a = g.l2_sq(c);
            let b = g.l2_sq_spec(&g.forward(c));
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
        let kin = FrameKinematics::compute(&st.f, g).unwrap();
        let phys: f64 = (0..3).map(|i| (0..3).map(|p| (0..3).map(|a| g.l2_sq(&kin.g[i][p][a])).sum::<f64>()).sum::<f64>()).sum();
        let (spec, _) = sobolev_norms(g, &st, 0).unwrap();
        assert!((phys - spec).abs() <= 1e-12 * phys);
    }

    #[test]
    fn perturbative_estimate_ratio() {
        let m = model(32);
        for eps in [1e-4, 1e-3] {
            let st = State::new(random_frame_field(&m.grid, eps, 2, 9).unwrap(), VectorField::zeros(m.grid.dims()), 0.0).unwrap();
            for s in [0, 1, 2] {
                let r = dissipative_estimate_report(&m, &st, s).unwrap();
                assert!(r.lf.ratio >= 1.0 - 10.0 * eps, "s={s} eps={eps}: {r:?}");
                assert!(r.lfs.unwrap().ratio >= 1.0 - 10.0 * eps, "s={s} eps={eps}: {r:?}");
            }
        }
    }

    #[test]
    fn blowup_monitor_is_cumulative() {
        let mk = |t: f64, c: f64| LedgerRow {
            t,
            kinetic: 0.0,
            f_bi: 0.0,
            e_d: vec![],
            channels: [0.0; 6],
            curl_inf: c,
            grad_f_sq_inf: c,
            blowup: 0.0,
            orthonormality_drift: 0.0,
            divergence: 0.0,
        };
        let rows = vec![mk(0.0, 1.0), mk(1.0, 0.5), mk(3.0, 0.0)];
        assert_eq!(blowup_monitor(&rows), vec![0.0, 1.5, 2.5]);
        assert_eq!(blowup_monitor(&[]), Vec::<f64>::new());
    }

    #[test]
    fn row_values_round_trip() {
        let m = model(16);
        let st = seeded(&m, 0.3, 1);
        let row = ledger_row(&m, &st, &[0, 2]).unwrap();
        assert_eq!(LedgerRow::header(&[0, 2]).len(), row.values().len());
        assert_eq!(LedgerRow::from_values(&[0, 2], &row.values()).unwrap(), row);
        assert_eq!(row.e(2), Some(row.e_d[1].1));
    }
}
