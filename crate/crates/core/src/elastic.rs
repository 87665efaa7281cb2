//! Biaxial elastic energy, molecular fields and elastic stress.
//!
//! With `c_ij = n_i · curl n_j` the bulk density is
//!
//! ```text
//! f = ½ [ K1 (div n1)² + K2 (div n2)² + K3 (div n3)²
//!       + K4 c11² + K5 c22² + K6 c33² + K7 c31² + K8 c12² + K9 c23²
//!       + K10 c21² + K11 c32² + K12 c13² ]  + surface terms
//! ```
//!
//! and it is evaluated in the equivalent split form
//! `½ Σ γ_i |∇n_i|² + ½ (Σ k_i (div n_i)² + Σ k_ij c_ij²)`.
//!
//! Derivative arrays use `g[α][p][i] = ∂_i n_{α p}`.

use nalgebra::{Matrix3, Vector3};

use crate::diff::Derivatives;
use crate::error::{Error, Result};
use crate::field::{FrameField, ScalarField, TensorField, VectorField};

/// `(α, β)` pairs of `c_{αβ}` carried by `K4..K12`, in order.
const TWIST_SLOTS: [(usize, usize); 9] = [
    (0, 0),
    (1, 1),
    (2, 2),
    (2, 0),
    (0, 1),
    (1, 2),
    (1, 0),
    (2, 1),
    (0, 2),
];

#[derive(Clone, Debug, PartialEq)]
pub struct ElasticParams {
    k: [f64; 12],
    gamma: [f64; 3],
    k_div: [f64; 3],
    k_twist: [[f64; 3]; 3],
    surface_gamma: [f64; 3],
}

impl Default for ElasticParams {
    fn default() -> Self {
        Self::new([1.0, 1.2, 1.1, 1.3, 1.0, 1.2, 1.1, 1.4, 1.0, 1.2, 1.3, 1.1])
            .expect("default constants are positive")
    }
}

impl ElasticParams {
    pub fn new(k: [f64; 12]) -> Result<Self> {
        if let Some(i) = k.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidParams(format!(
                "K{} = {} must be positive and finite",
                i + 1,
                k[i]
            )));
        }
        // γ_α is the smallest constant touching n_α
        let group = |a: usize| {
            let mut m = k[a];
            for (slot, &(_, col)) in TWIST_SLOTS.iter().enumerate() {
                if col == a {
                    m = m.min(k[3 + slot]);
                }
            }
            m
        };
        let gamma = [group(0), group(1), group(2)];
        let k_div = std::array::from_fn(|a| k[a] - gamma[a]);
        let mut k_twist = [[0.0; 3]; 3];
        for (slot, &(i, j)) in TWIST_SLOTS.iter().enumerate() {
            k_twist[i][j] = k[3 + slot] - gamma[j];
        }
        Ok(Self {
            k,
            gamma,
            k_div,
            k_twist,
            surface_gamma: gamma,
        })
    }

    /// All twelve constants equal to `c`.
    pub fn isotropic(c: f64) -> Result<Self> {
        Self::new([c; 12])
    }

    /// Replaces the weights of the null-Lagrangian terms in the original density.
    pub fn with_surface_gamma(mut self, g: [f64; 3]) -> Self {
        self.surface_gamma = g;
        self
    }

    pub fn k(&self) -> &[f64; 12] {
        &self.k
    }

    pub fn gamma(&self) -> [f64; 3] {
        self.gamma
    }

    pub fn gamma_min(&self) -> f64 {
        self.gamma.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn k_div(&self) -> [f64; 3] {
        self.k_div
    }

    /// `k_twist()[i][j]` weights `(n_i · curl n_j)²`.
    pub fn k_twist(&self) -> [[f64; 3]; 3] {
        self.k_twist
    }

    pub fn surface_gamma(&self) -> [f64; 3] {
        self.surface_gamma
    }

    pub fn k_max(&self) -> f64 {
        self.k.iter().copied().fold(0.0, f64::max)
    }
}

/// First derivatives of a frame field and the scalars built from them.
#[derive(Clone, Debug)]
pub struct FrameKinematics {
    pub g: [[[Vec<f64>; 3]; 3]; 3],
    pub div: [Vec<f64>; 3],
    pub curl: [[Vec<f64>; 3]; 3],
    /// `c[i][j] = n_i · curl n_j`
    pub c: [[Vec<f64>; 3]; 3],
}

impl FrameKinematics {
    pub fn compute<D: Derivatives>(f: &FrameField, d: &D) -> Result<Self> {
        d.check(f.dims)?;
        if !f.is_finite() {
            return Err(Error::NonFiniteField("frame field"));
        }
        let comps: Vec<&[f64]> = f.n.iter().flatten().map(|c| c.as_slice()).collect();
        let mut grads = d.gradients(&comps).into_iter();
        let g: [[[Vec<f64>; 3]; 3]; 3] =
            std::array::from_fn(|_| std::array::from_fn(|_| grads.next().expect("nine components")));
        let npts = f.len();
        let div = std::array::from_fn(|a| {
            (0..npts)
                .map(|x| g[a][0][0][x] + g[a][1][1][x] + g[a][2][2][x])
                .collect()
        });
        let curl: [[Vec<f64>; 3]; 3] = std::array::from_fn(|a| {
            std::array::from_fn(|m| {
                let (j, k) = ((m + 1) % 3, (m + 2) % 3);
                (0..npts).map(|x| g[a][k][j][x] - g[a][j][k][x]).collect()
            })
        });
        let c = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..npts)
                    .map(|x| (0..3).map(|m| f.n[i][m][x] * curl[j][m][x]).sum())
                    .collect()
            })
        });
        Ok(Self { g, div, curl, c })
    }

    pub fn len(&self) -> usize {
        self.div[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `A[p][i] = ∂_i n_{α p}` at a point.
    #[inline]
    pub fn jacobian(&self, alpha: usize, x: usize) -> Matrix3<f64> {
        Matrix3::from_fn(|p, i| self.g[alpha][p][i][x])
    }

    /// `Σ_α |∇n_α|²` at a point.
    pub fn grad_sq(&self, x: usize) -> f64 {
        self.g.iter().flatten().flatten().map(|c| c[x] * c[x]).sum()
    }

    /// `∇·[(n·∇)n − (div n) n]` for column `α`, expanded as `tr(A²) − (div n)²`.
    pub fn surface_term(&self, alpha: usize, x: usize) -> f64 {
        let a = self.jacobian(alpha, x);
        (a * a).trace() - self.div[alpha][x].powi(2)
    }
}

fn scalar<D: Derivatives>(d: &D, data: Vec<f64>) -> ScalarField {
    ScalarField {
        dims: d.dims(),
        data,
    }
}

pub fn density_reformulated_from(kin: &FrameKinematics, params: &ElasticParams) -> Vec<f64> {
    let (gm, kd, kt) = (params.gamma, params.k_div, params.k_twist);
    (0..kin.len())
        .map(|x| {
            let mut s = 0.0;
            for a in 0..3 {
                let g2: f64 = kin.g[a].iter().flatten().map(|c| c[x] * c[x]).sum();
                s += gm[a] * g2 + kd[a] * kin.div[a][x].powi(2);
                for b in 0..3 {
                    s += kt[a][b] * kin.c[a][b][x].powi(2);
                }
            }
            0.5 * s
        })
        .collect()
}

pub fn density_original_from(kin: &FrameKinematics, params: &ElasticParams) -> Vec<f64> {
    let k = &params.k;
    let sg = params.surface_gamma;
    (0..kin.len())
        .map(|x| {
            let mut s = 0.0;
            for a in 0..3 {
                s += k[a] * kin.div[a][x].powi(2);
                s += sg[a] * kin.surface_term(a, x);
            }
            for (slot, &(i, j)) in TWIST_SLOTS.iter().enumerate() {
                s += k[3 + slot] * kin.c[i][j][x].powi(2);
            }
            0.5 * s
        })
        .collect()
}

/// Density with all twelve bulk terms and the three null-Lagrangian terms.
pub fn density_original<D: Derivatives>(
    f: &FrameField,
    params: &ElasticParams,
    d: &D,
) -> Result<ScalarField> {
    let kin = FrameKinematics::compute(f, d)?;
    Ok(scalar(d, density_original_from(&kin, params)))
}

/// Density in the split form `½ Σ γ_i |∇n_i|² + W`.
pub fn density_reformulated<D: Derivatives>(
    f: &FrameField,
    params: &ElasticParams,
    d: &D,
) -> Result<ScalarField> {
    let kin = FrameKinematics::compute(f, d)?;
    Ok(scalar(d, density_reformulated_from(&kin, params)))
}

/// `∫ f` over the torus.
pub fn elastic_energy<D: Derivatives>(f: &FrameField, params: &ElasticParams, d: &D) -> Result<f64> {
    Ok(d.integrate(&density_reformulated(f, params, d)?.data))
}

/// Flux `(n_α·∇)n_α − (div n_α) n_α` whose divergence is the surface density.
pub fn surface_flux<D: Derivatives>(f: &FrameField, alpha: usize, d: &D) -> Result<VectorField> {
    let kin = FrameKinematics::compute(f, d)?;
    let n = &f.n[alpha];
    let c = std::array::from_fn(|j| {
        (0..f.len())
            .map(|x| {
                let adv: f64 = (0..3).map(|k| n[k][x] * kin.g[alpha][j][k][x]).sum();
                adv - kin.div[alpha][x] * n[j][x]
            })
            .collect()
    });
    Ok(VectorField { dims: f.dims, c })
}

#[derive(Clone, Debug)]
pub struct MolecularFields {
    pub h: [VectorField; 3],
}

impl MolecularFields {
    pub fn zeros(dims: crate::field::Dims) -> Self {
        Self {
            h: std::array::from_fn(|_| VectorField::zeros(dims)),
        }
    }
}

/// `h_i = γ_i Δn_i + k_i ∇div n_i − Σ_j k_ji curl(c_ji n_j) − Σ_j k_ij c_ij curl n_j`.
pub fn molecular_fields_from<D: Derivatives>(
    f: &FrameField,
    kin: &FrameKinematics,
    params: &ElasticParams,
    d: &D,
) -> MolecularFields {
    let npts = f.len();
    let (gm, kd, kt) = (params.gamma, params.k_div, params.k_twist);
    let h = std::array::from_fn(|i| {
        let mut flux: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; npts]);
        let mut any = false;
        for j in 0..3 {
            let w = kt[j][i];
            if w == 0.0 {
                continue;
            }
            any = true;
            for p in 0..3 {
                for x in 0..npts {
                    flux[p][x] += w * kin.c[j][i][x] * f.n[j][p][x];
                }
            }
        }
        let mut out = d.combined_operator(gm[i], kd[i], &f.n[i], any.then_some(&flux));
        for j in 0..3 {
            let w = kt[i][j];
            if w == 0.0 {
                continue;
            }
            for p in 0..3 {
                for x in 0..npts {
                    out[p][x] -= w * kin.c[i][j][x] * kin.curl[j][p][x];
                }
            }
        }
        VectorField {
            dims: f.dims,
            c: out,
        }
    });
    MolecularFields { h }
}

pub fn molecular_fields<D: Derivatives>(
    f: &FrameField,
    params: &ElasticParams,
    d: &D,
) -> Result<MolecularFields> {
    let kin = FrameKinematics::compute(f, d)?;
    Ok(molecular_fields_from(f, &kin, params, d))
}

/// `(n2·h3 − n3·h2, n3·h1 − n1·h3, n1·h2 − n2·h1)`.
pub fn rotational_variational_derivatives(
    f: &FrameField,
    h: &MolecularFields,
) -> Result<[ScalarField; 3]> {
    for hi in &h.h {
        hi.check_dims(f.dims)?;
    }
    Ok(std::array::from_fn(|k| {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        let data = (0..f.len())
            .map(|x| {
                (0..3)
                    .map(|p| f.n[a][p][x] * h.h[b].c[p][x] - f.n[b][p][x] * h.h[a].c[p][x])
                    .sum()
            })
            .collect();
        ScalarField { dims: f.dims, data }
    }))
}

/// Elastic stress assembled term by term from frame gradients.
pub fn elastic_stress_from(f: &FrameField, kin: &FrameKinematics, params: &ElasticParams) -> TensorField {
    let (gm, kd, kt) = (params.gamma, params.k_div, params.k_twist);
    let mut out = TensorField::zeros(f.dims);
    for x in 0..f.len() {
        let mut s = Matrix3::zeros();
        let nb: [Vector3<f64>; 3] = std::array::from_fn(|b| f.column(b, x));
        for a in 0..3 {
            let j = kin.jacobian(a, x);
            let jt = j.transpose();
            s -= jt * j * gm[a];
            s -= jt * (kd[a] * kin.div[a][x]);
            let sk = j - jt;
            let s1 = jt * sk;
            for (b, n) in nb.iter().enumerate() {
                let w = kt[b][a];
                if w == 0.0 {
                    continue;
                }
                let t2 = (jt * (sk.transpose() * n)) * n.transpose();
                let t3 = (jt * n) * (sk * n).transpose();
                s -= (s1 + t2 + t3) * w;
            }
        }
        out.set(x, &s);
    }
    out
}

pub fn elastic_stress<D: Derivatives>(
    f: &FrameField,
    params: &ElasticParams,
    d: &D,
) -> Result<TensorField> {
    let kin = FrameKinematics::compute(f, d)?;
    Ok(elastic_stress_from(f, &kin, params))
}

/// `𝔉_i = ∂_i n1·n2 𝓛3 + ∂_i n3·n1 𝓛2 + ∂_i n2·n3 𝓛1`.
pub fn body_force_from(f: &FrameField, kin: &FrameKinematics, rot: &[ScalarField; 3]) -> VectorField {
    let mut out = VectorField::zeros(f.dims);
    // (column differentiated, column projected on, rotation index)
    let terms = [(0, 1, 2), (2, 0, 1), (1, 2, 0)];
    for i in 0..3 {
        for x in 0..f.len() {
            let mut s = 0.0;
            for &(a, b, k) in &terms {
                let proj: f64 = (0..3).map(|p| kin.g[a][p][i][x] * f.n[b][p][x]).sum();
                s += proj * rot[k].data[x];
            }
            out.c[i][x] = s;
        }
    }
    out
}

pub fn body_force<D: Derivatives>(
    f: &FrameField,
    h: &MolecularFields,
    d: &D,
) -> Result<VectorField> {
    let kin = FrameKinematics::compute(f, d)?;
    let rot = rotational_variational_derivatives(f, h)?;
    Ok(body_force_from(f, &kin, &rot))
}

/// Everything the dynamics needs from one frame configuration.
#[derive(Clone, Debug)]
pub struct ElasticResponse {
    pub kin: FrameKinematics,
    pub h: MolecularFields,
    pub rot: [ScalarField; 3],
}

impl ElasticResponse {
    pub fn compute<D: Derivatives>(f: &FrameField, params: &ElasticParams, d: &D) -> Result<Self> {
        let kin = FrameKinematics::compute(f, d)?;
        let h = molecular_fields_from(f, &kin, params, d);
        let rot = rotational_variational_derivatives(f, &h)?;
        Ok(Self { kin, h, rot })
    }
}
