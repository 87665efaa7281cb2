//! Periodic torus discretization with Fourier pseudo-spectral operators.
//!
//! Forward transforms are unnormalized; inverse transforms divide by the point
//! count. First-derivative multipliers drop the Nyquist wavenumber so odd-order
//! operators map real fields to real fields; even-order multipliers (`Δ`, `Δ^s`)
//! keep it. Products are formed in physical space; the 2/3 mask is applied to
//! the results of nonlinear terms by the callers that need it.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{Dims, ScalarField, VectorField};

/// Upper bound on the Laplacian power used by diagnostics.
pub const MAX_LAPLACIAN_POWER: u32 = 3;

pub type Spectrum = Vec<Complex64>;

struct AxisPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

pub struct Grid {
    dims: Dims,
    lengths: [f64; 3],
    ndim: usize,
    dealias: f64,
    npts: usize,
    plans: [Option<AxisPlan>; 3],
    /// First-derivative wavenumber along each axis for every flat index.
    kd: [Vec<f64>; 3],
    /// `|ξ|²` including Nyquist components.
    ksq: Vec<f64>,
    keep: Vec<bool>,
    /// Flat index of `−ξ` for every flat index.
    neg: Vec<usize>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("dims", &self.dims)
            .field("lengths", &self.lengths)
            .field("dealias", &self.dealias)
            .finish()
    }
}

thread_local! {
    static SCRATCH: std::cell::RefCell<(Vec<Complex64>, Vec<Complex64>)> = const { std::cell::RefCell::new((Vec::new(), Vec::new())) };
}

/// `dst` (cols × rows) = transpose of `src` (rows × cols), both row-major.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 16;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                let row = &src[r * cols..(r + 1) * cols];
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = row[c];
                }
            }
        }
    }
}

fn wavenumbers(n: usize, length: f64) -> (Vec<f64>, Vec<f64>) {
    let scale = 2.0 * std::f64::consts::PI / length;
    let mut first = Vec::with_capacity(n);
    let mut full = Vec::with_capacity(n);
    for i in 0..n {
        let m = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
        full.push(m * scale);
        if n > 1 && n % 2 == 0 && i == n / 2 {
            first.push(0.0);
        } else {
            first.push(m * scale);
        }
    }
    (first, full)
}

impl Grid {
    /// 2-D (`dims.len() == 2`) or 3-D torus with box lengths `lengths`.
    pub fn new(dims: &[usize], lengths: &[f64]) -> Result<Self> {
        Self::with_dealias(dims, lengths, 2.0 / 3.0)
    }

    pub fn with_dealias(dims: &[usize], lengths: &[f64], dealias: f64) -> Result<Self> {
        if !(dims.len() == 2 || dims.len() == 3) || dims.len() != lengths.len() {
            return Err(Error::Config(format!(
                "grid needs 2 or 3 axes with matching lengths, got dims {dims:?}, lengths {lengths:?}"
            )));
        }
        if dims.iter().any(|&n| n < 16 || n % 2 != 0) {
            return Err(Error::Config(format!(
                "grid points per axis must be even and at least 16, got {dims:?}"
            )));
        }
        if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Config(format!(
                "box lengths must be positive, got {lengths:?}"
            )));
        }
        if !(dealias > 0.0 && dealias <= 1.0) {
            return Err(Error::Config(format!(
                "dealias fraction must lie in (0, 1], got {dealias}"
            )));
        }
        let ndim = dims.len();
        let mut d = [1usize; 3];
        let mut l = [1.0; 3];
        d[..ndim].copy_from_slice(dims);
        l[..ndim].copy_from_slice(lengths);
        let npts = d.iter().product();

        let mut planner = FftPlanner::new();
        let plans = std::array::from_fn(|a| {
            (d[a] > 1).then(|| AxisPlan {
                forward: planner.plan_fft_forward(d[a]),
                inverse: planner.plan_fft_inverse(d[a]),
            })
        });

        let axis_k: [(Vec<f64>, Vec<f64>); 3] = std::array::from_fn(|a| wavenumbers(d[a], l[a]));
        let mut kd: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(npts));
        let mut ksq = Vec::with_capacity(npts);
        let mut keep = Vec::with_capacity(npts);
        let mut neg = Vec::with_capacity(npts);
        for i in 0..d[0] {
            for j in 0..d[1] {
                for k in 0..d[2] {
                    let idx = [i, j, k];
                    neg.push((((d[0] - i) % d[0]) * d[1] + (d[1] - j) % d[1]) * d[2] + (d[2] - k) % d[2]);
                    let mut s = 0.0;
                    let mut kept = true;
                    for a in 0..3 {
                        kd[a].push(axis_k[a].0[idx[a]]);
                        s += axis_k[a].1[idx[a]].powi(2);
                        if d[a] > 1 {
                            let m = if idx[a] <= d[a] / 2 {
                                idx[a] as f64
                            } else {
                                d[a] as f64 - idx[a] as f64
                            };
                            // keep |m| < fraction * N/2, strictly, so quadratic aliases land outside the band
                            if m >= dealias * d[a] as f64 / 2.0 {
                                kept = false;
                            }
                        }
                    }
                    ksq.push(s);
                    keep.push(kept);
                }
            }
        }
        Ok(Self {
            dims: d,
            lengths: l,
            ndim,
            dealias,
            npts,
            plans,
            kd,
            ksq,
            keep,
            neg,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn check_dims_of(&self, found: Dims) -> Result<()> {
        if found == self.dims {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.dims,
                found,
            })
        }
    }

    /// Axis count of the physical problem (2 or 3).
    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias
    }

    pub fn len(&self) -> usize {
        self.npts
    }

    pub fn is_empty(&self) -> bool {
        self.npts == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.dims[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.ndim).map(|a| self.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    /// Domain measure (area in 2-D, volume in 3-D).
    pub fn volume(&self) -> f64 {
        self.lengths[..self.ndim].iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.npts as f64
    }

    /// Multi-index of a flat index.
    #[inline]
    pub fn index3(&self, p: usize) -> [usize; 3] {
        let k = p % self.dims[2];
        let j = (p / self.dims[2]) % self.dims[1];
        let i = p / (self.dims[2] * self.dims[1]);
        [i, j, k]
    }

    /// Physical coordinate of a flat index.
    #[inline]
    pub fn coord(&self, p: usize) -> [f64; 3] {
        let idx = self.index3(p);
        std::array::from_fn(|a| idx[a] as f64 * self.spacing(a))
    }

    /// Wavevector (first-derivative convention) of a flat spectral index.
    #[inline]
    pub fn wavevector(&self, p: usize) -> [f64; 3] {
        [self.kd[0][p], self.kd[1][p], self.kd[2][p]]
    }

    #[inline]
    pub fn ksq(&self, p: usize) -> f64 {
        self.ksq[p]
    }

    #[inline]
    /// `Σ_a k_a²` with the first-derivative wavenumbers (Nyquist modes zeroed).
    pub fn kd_sq(&self, p: usize) -> f64 {
        self.kd[0][p].powi(2) + self.kd[1][p].powi(2) + self.kd[2][p].powi(2)
    }

    pub fn is_kept(&self, p: usize) -> bool {
        self.keep[p]
    }

    // ----------------------------------------------------------------------
    // transforms

    fn transform(&self, buf: &mut [Complex64], forward: bool) {
        let d = self.dims;
        SCRATCH.with(|cell| {
            let (lines, scratch) = &mut *cell.borrow_mut();
            for axis in 0..3 {
                let Some(plan) = &self.plans[axis] else { continue };
                let fft = if forward { &plan.forward } else { &plan.inverse };
                let need = fft.get_inplace_scratch_len();
                if scratch.len() < need {
                    scratch.resize(need, Complex64::default());
                }
                let scratch = &mut scratch[..need];
                let n = d[axis];
                let stride: usize = d[axis + 1..].iter().product();
                if stride == 1 {
                    fft.process_with_scratch(buf, scratch);
                    continue;
                }
                // each block is an n × stride matrix; transpose so lines are contiguous
                lines.resize(self.npts, Complex64::default());
                for (block, lo) in buf.chunks_exact(n * stride).zip(lines.chunks_exact_mut(n * stride)) {
                    transpose(block, lo, n, stride);
                }
                fft.process_with_scratch(lines, scratch);
                for (block, lo) in buf.chunks_exact_mut(n * stride).zip(lines.chunks_exact(n * stride)) {
                    transpose(lo, block, stride, n);
                }
            }
        });
    }

    pub fn forward(&self, data: &[f64]) -> Spectrum {
        debug_assert_eq!(data.len(), self.npts);
        let mut buf: Spectrum = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut buf, true);
        buf
    }

    pub fn inverse(&self, spec: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(spec.len(), self.npts);
        let mut buf = spec.to_vec();
        self.transform(&mut buf, false);
        let scale = 1.0 / self.npts as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Spectra of two real fields from a single complex transform.
    pub fn forward_pair(&self, a: &[f64], b: &[f64]) -> (Spectrum, Spectrum) {
        let mut z: Spectrum = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
        self.transform(&mut z, true);
        let half_i = Complex64::new(0.0, -0.5);
        let mut fa = Vec::with_capacity(self.npts);
        let mut fb = Vec::with_capacity(self.npts);
        for p in 0..self.npts {
            let zc = z[self.neg[p]].conj();
            fa.push((z[p] + zc) * 0.5);
            fb.push((z[p] - zc) * half_i);
        }
        (fa, fb)
    }

    /// Inverse of two Hermitian spectra from a single complex transform.
    pub fn inverse_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let mut z: Spectrum = a
            .iter()
            .zip(b)
            .map(|(x, y)| Complex64::new(x.re - y.im, x.im + y.re))
            .collect();
        self.transform(&mut z, false);
        let scale = 1.0 / self.npts as f64;
        z.iter().map(|c| (c.re * scale, c.im * scale)).unzip()
    }

    /// [`Grid::forward`] over many fields, two per transform.
    pub fn forward_many<T: AsRef<[f64]>>(&self, data: &[T]) -> Vec<Spectrum> {
        let mut out = Vec::with_capacity(data.len());
        for ch in data.chunks(2) {
            match ch {
                [a, b] => {
                    let (x, y) = self.forward_pair(a.as_ref(), b.as_ref());
                    out.push(x);
                    out.push(y);
                }
                [a] => out.push(self.forward(a.as_ref())),
                _ => unreachable!(),
            }
        }
        out
    }

    /// [`Grid::inverse`] over many Hermitian spectra, two per transform.
    pub fn inverse_many<T: AsRef<[Complex64]>>(&self, specs: &[T]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(specs.len());
        for ch in specs.chunks(2) {
            match ch {
                [a, b] => {
                    let (x, y) = self.inverse_pair(a.as_ref(), b.as_ref());
                    out.push(x);
                    out.push(y);
                }
                [a] => out.push(self.inverse(a.as_ref())),
                _ => unreachable!(),
            }
        }
        out
    }

    // ----------------------------------------------------------------------
    // spectral multipliers

    /// `∂_axis` applied to a spectrum.
    pub fn d_spec(&self, spec: &[Complex64], axis: usize) -> Spectrum {
        let k = &self.kd[axis];
        spec.iter()
            .zip(k)
            .map(|(c, &kk)| Complex64::new(-c.im * kk, c.re * kk))
            .collect()
    }

    /// `Δ^s` applied to a spectrum, multiplier `(-|ξ|²)^s`.
    pub fn lap_pow_spec(&self, spec: &[Complex64], s: u32) -> Spectrum {
        if s == 0 {
            return spec.to_vec();
        }
        spec.iter()
            .zip(&self.ksq)
            .map(|(c, &k2)| c * (-k2).powi(s as i32))
            .collect()
    }

    pub fn dealias_spec(&self, spec: &mut [Complex64]) {
        for (c, &keep) in spec.iter_mut().zip(&self.keep) {
            if !keep {
                *c = Complex64::default();
            }
        }
    }

    /// Leray projection of three component spectra in place.
    pub fn leray_spec(&self, spec: &mut [Spectrum; 3]) {
        for p in 0..self.npts {
            let k = self.wavevector(p);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                continue;
            }
            let dot = spec[0][p] * k[0] + spec[1][p] * k[1] + spec[2][p] * k[2];
            for a in 0..3 {
                spec[a][p] -= dot * (k[a] / k2);
            }
        }
    }

    // ----------------------------------------------------------------------
    // internal physical-space helpers (no validation)

    pub(crate) fn d_raw(&self, data: &[f64], axis: usize) -> Vec<f64> {
        if self.dims[axis] == 1 {
            return vec![0.0; self.npts];
        }
        self.inverse(&self.d_spec(&self.forward(data), axis))
    }

    /// Gradient components from an existing spectrum.
    pub(crate) fn grad_from_spec(&self, spec: &[Complex64]) -> [Vec<f64>; 3] {
        let mut out = self.grads_from_specs(&[spec]);
        out.pop().expect("one gradient")
    }

    /// Gradients of many fields from their spectra, sharing transforms.
    pub(crate) fn grads_from_specs<T: AsRef<[Complex64]>>(&self, specs: &[T]) -> Vec<[Vec<f64>; 3]> {
        let nd = self.ndim;
        let parts: Vec<Spectrum> = specs
            .iter()
            .flat_map(|s| (0..nd).map(move |a| self.d_spec(s.as_ref(), a)))
            .collect();
        let mut phys = self.inverse_many(&parts).into_iter();
        specs
            .iter()
            .map(|_| std::array::from_fn(|a| if a < nd { phys.next().expect("component") } else { vec![0.0; self.npts] }))
            .collect()
    }

    pub(crate) fn div_raw(&self, c: &[Vec<f64>; 3]) -> Vec<f64> {
        let mut acc = vec![Complex64::default(); self.npts];
        for (a, spec) in self.forward_many(&c[..self.ndim]).iter().enumerate() {
            for (x, y) in acc.iter_mut().zip(self.d_spec(spec, a)) {
                *x += y;
            }
        }
        self.inverse(&acc)
    }

    pub(crate) fn curl_raw(&self, c: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
        let v = self.forward_many(c);
        let spec: [Spectrum; 3] = [v[0].clone(), v[1].clone(), v[2].clone()];
        self.curl_from_spec(&spec)
    }

    pub(crate) fn combined_raw(&self, a: f64, b: f64, u: &[Vec<f64>; 3], q: Option<&[Vec<f64>; 3]>) -> [Vec<f64>; 3] {
        let mut fields: Vec<&[f64]> = u.iter().map(|c| c.as_slice()).collect();
        if let Some(q) = q {
            fields.extend(q.iter().map(|c| c.as_slice()));
        }
        let specs = self.forward_many(&fields);
        let n = self.npts;
        let (k0, k1, k2) = (&self.kd[0][..n], &self.kd[1][..n], &self.kd[2][..n]);
        let kdotu: Vec<Complex64> = (0..n)
            .map(|p| specs[0][p] * k0[p] + specs[1][p] * k1[p] + specs[2][p] * k2[p])
            .collect();
        let out: Vec<Spectrum> = (0..3)
            .map(|m| {
                let (j, k) = ((m + 1) % 3, (m + 2) % 3);
                let km = &self.kd[m][..n];
                let um = &specs[m][..n];
                let mut z: Spectrum = (0..n).map(|p| um[p] * (-a * self.ksq[p]) - kdotu[p] * (b * km[p])).collect();
                if q.is_some() {
                    let (qj, qk) = (&specs[3 + j][..n], &specs[3 + k][..n]);
                    let (kj, kk) = (&self.kd[j][..n], &self.kd[k][..n]);
                    for p in 0..n {
                        // − i (k_j q_k − k_k q_j)
                        let w = qk[p] * kj[p] - qj[p] * kk[p];
                        z[p] += Complex64::new(w.im, -w.re);
                    }
                }
                z
            })
            .collect();
        let mut phys = self.inverse_many(&out).into_iter();
        std::array::from_fn(|_| phys.next().expect("component"))
    }

    pub(crate) fn curl_from_spec(&self, spec: &[Spectrum; 3]) -> [Vec<f64>; 3] {
        let n = self.npts;
        let i = Complex64::new(0.0, 1.0);
        let out: Vec<Spectrum> = (0..3)
            .map(|m| {
                let (j, k) = ((m + 1) % 3, (m + 2) % 3);
                // (curl u)_m = ∂_j u_k - ∂_k u_j
                (0..n)
                    .map(|p| i * (spec[k][p] * self.kd[j][p] - spec[j][p] * self.kd[k][p]))
                    .collect()
            })
            .collect();
        let mut phys = self.inverse_many(&out).into_iter();
        std::array::from_fn(|_| phys.next().expect("component"))
    }

    pub(crate) fn dealias_raw(&self, data: &[f64]) -> Vec<f64> {
        let mut s = self.forward(data);
        self.dealias_spec(&mut s);
        self.inverse(&s)
    }

    pub(crate) fn dealias_many(&self, c: &mut [Vec<f64>]) {
        let mut spec = self.forward_many(c);
        for s in spec.iter_mut() {
            self.dealias_spec(s);
        }
        for (o, x) in c.iter_mut().zip(self.inverse_many(&spec)) {
            *o = x;
        }
    }

    // ----------------------------------------------------------------------
    // public operators

    fn finite(&self, data: &[f64], what: &'static str) -> Result<()> {
        if data.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteField(what))
        }
    }

    fn check_scalar(&self, f: &ScalarField) -> Result<()> {
        f.check_dims(self.dims)?;
        self.finite(&f.data, "scalar field")
    }

    fn check_vector(&self, f: &VectorField) -> Result<()> {
        f.check_dims(self.dims)?;
        for c in &f.c {
            self.finite(c, "vector field")?;
        }
        Ok(())
    }

    pub fn partial(&self, f: &ScalarField, axis: usize) -> Result<ScalarField> {
        self.check_scalar(f)?;
        Ok(ScalarField {
            dims: self.dims,
            data: self.d_raw(&f.data, axis),
        })
    }

    pub fn grad(&self, f: &ScalarField) -> Result<VectorField> {
        self.check_scalar(f)?;
        Ok(VectorField {
            dims: self.dims,
            c: self.grad_from_spec(&self.forward(&f.data)),
        })
    }

    pub fn div(&self, u: &VectorField) -> Result<ScalarField> {
        self.check_vector(u)?;
        Ok(ScalarField {
            dims: self.dims,
            data: self.div_raw(&u.c),
        })
    }

    pub fn curl(&self, u: &VectorField) -> Result<VectorField> {
        self.check_vector(u)?;
        Ok(VectorField {
            dims: self.dims,
            c: self.curl_raw(&u.c),
        })
    }

    pub fn laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        self.laplacian_power(f, 1)
    }

    /// `Δ^s f` for `s <= MAX_LAPLACIAN_POWER` (larger powers are dominated by round-off).
    pub fn laplacian_power(&self, f: &ScalarField, s: u32) -> Result<ScalarField> {
        if s > MAX_LAPLACIAN_POWER {
            return Err(Error::SLimitExceeded {
                s,
                max: MAX_LAPLACIAN_POWER,
            });
        }
        self.check_scalar(f)?;
        Ok(ScalarField {
            dims: self.dims,
            data: self.inverse(&self.lap_pow_spec(&self.forward(&f.data), s)),
        })
    }

    pub fn grad_div(&self, u: &VectorField) -> Result<VectorField> {
        self.check_vector(u)?;
        let div = self.div_raw(&u.c);
        Ok(VectorField {
            dims: self.dims,
            c: self.grad_from_spec(&self.forward(&div)),
        })
    }

    /// L²-orthogonal projection onto divergence-free fields.
    pub fn leray_project(&self, u: &VectorField) -> Result<VectorField> {
        self.check_vector(u)?;
        let mut it = self.forward_many(&u.c).into_iter();
        let mut spec: [Spectrum; 3] = std::array::from_fn(|_| it.next().expect("component"));
        self.leray_spec(&mut spec);
        let mut phys = self.inverse_many(&spec).into_iter();
        Ok(VectorField {
            dims: self.dims,
            c: std::array::from_fn(|_| phys.next().expect("component")),
        })
    }

    /// 2/3-rule truncation of a field.
    pub fn dealias(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check_scalar(f)?;
        Ok(ScalarField {
            dims: self.dims,
            data: self.dealias_raw(&f.data),
        })
    }

    /// Alias-free product: both factors and the result are truncated to the kept band.
    pub fn dealiased_product(&self, a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
        self.check_scalar(a)?;
        self.check_scalar(b)?;
        let fa = self.dealias_raw(&a.data);
        let fb = self.dealias_raw(&b.data);
        let prod: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
        Ok(ScalarField {
            dims: self.dims,
            data: self.dealias_raw(&prod),
        })
    }

    // ----------------------------------------------------------------------
    // quadrature

    pub fn integrate(&self, data: &[f64]) -> f64 {
        data.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn mean(&self, data: &[f64]) -> f64 {
        data.iter().sum::<f64>() / self.npts as f64
    }

    /// `∫ u²` by physical-space quadrature.
    pub fn l2_sq(&self, data: &[f64]) -> f64 {
        data.iter().map(|x| x * x).sum::<f64>() * self.cell_volume()
    }

    /// `∫ u²` from the spectrum of `u` (Parseval).
    pub fn l2_sq_spec(&self, spec: &[Complex64]) -> f64 {
        spec.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.volume()
            / (self.npts as f64 * self.npts as f64)
    }

    /// `∫ a·b` by quadrature.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.cell_volume()
    }

    pub fn vector_l2_sq(&self, u: &VectorField) -> f64 {
        u.c.iter().map(|c| self.l2_sq(c)).sum()
    }

    pub fn vector_inner(&self, u: &VectorField, w: &VectorField) -> f64 {
        (0..3).map(|a| self.inner(&u.c[a], &w.c[a])).sum()
    }

    /// Sobolev norm `Σ (1+|ξ|²)^m |û|²` (scaled as `∫`) of a spectrum.
    pub fn sobolev_sq_spec(&self, spec: &[Complex64], m: u32) -> f64 {
        spec.iter()
            .zip(&self.ksq)
            .map(|(c, &k2)| c.norm_sqr() * (1.0 + k2).powi(m as i32))
            .sum::<f64>()
            * self.volume()
            / (self.npts as f64 * self.npts as f64)
    }
}
