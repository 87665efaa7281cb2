use std::f64::consts::PI;

use bfh::constitutive::ViscousParams;
use bfh::diagnostics::energy_functionals;
use bfh::dynamics::{tendency, Model, State};
use bfh::elastic::ElasticParams;
use bfh::field::{FrameField, VectorField};
use bfh::frame::Frame;
use bfh::grid::Grid;
use bfh::initial::{random_frame_field, random_velocity};
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

/// Lattice point reached by a quarter turn about `e3`: `R⁻¹x = (y, −x, z)`.
fn source_index(g: &Grid, p: usize) -> usize {
    let d = g.dims();
    let [i, j, k] = g.index3(p);
    let (si, sj) = (j, (d[0] - i) % d[0]);
    (0..g.len()).find(|&q| g.index3(q) == [si, sj, k]).expect("square grid")
}

fn quarter_turn() -> Matrix3<f64> {
    Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0)
}

fn rotate_state(g: &Grid, st: &State, map: &[usize]) -> State {
    let r = quarter_turn();
    let f = FrameField::from_fn(g.dims(), |p| Frame::from_matrix_unchecked(r * st.f.matrix_at(map[p])));
    let mut v = VectorField::zeros(g.dims());
    for p in 0..g.len() {
        v.set(p, r * st.v.at(map[p]));
    }
    State::new(f, v, st.t).unwrap()
}

fn check_equivariance(g: Grid) {
    let map: Vec<usize> = (0..g.len()).map(|p| source_index(&g, p)).collect();
    let m = Model::new(g, ElasticParams::default(), ViscousParams::default()).unwrap();
    let g = &m.grid;
    let st = State::new(
        random_frame_field(g, 0.6, 2, 8).unwrap(),
        random_velocity(g, 0.5, 2, 8).unwrap(),
        0.0,
    )
    .unwrap();
    let a = tendency(&m, &st).unwrap();
    let b = tendency(&m, &rotate_state(g, &st, &map)).unwrap();
    let r = quarter_turn();
    let scale = a.dv.max_norm().max(1.0);
    for p in 0..g.len() {
        for k in 0..3 {
            // body-frame rates are scalars under the joint rotation
            assert!((b.omega[k][p] - a.omega[k][map[p]]).abs() <= 1e-10 * scale);
        }
        let expect = r * a.dv.at(map[p]);
        assert!((b.dv.at(p) - expect).norm() <= 1e-10 * scale);
    }
}

#[test]
fn tendency_commutes_with_lattice_rotation_2d() {
    check_equivariance(Grid::new(&[24, 24], &[2.0 * PI; 2]).unwrap());
}

#[test]
fn tendency_commutes_with_lattice_rotation_3d() {
    check_equivariance(Grid::new(&[16, 16, 16], &[2.0 * PI, 2.0 * PI, 3.0]).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn leray_projection_is_idempotent(seed in 0u64..1000, amp in 0.1f64..2.0) {
        let g = Grid::new(&[16, 16], &[2.0 * PI; 2]).unwrap();
        let raw = VectorField {
            dims: g.dims(),
            c: random_frame_field(&g, amp, 3, seed).unwrap().n[0].clone(),
        };
        let once = g.leray_project(&raw).unwrap();
        let twice = g.leray_project(&once).unwrap();
        let d = g.vector_l2_sq(&once.axpy(-1.0, &twice)).sqrt();
        prop_assert!(d <= 1e-13 * g.vector_l2_sq(&raw).sqrt().max(1.0));
        let div = g.div(&once).unwrap();
        prop_assert!(div.max_abs() < 1e-12);
    }

    #[test]
    fn energy_functionals_are_nonnegative(seed in 0u64..1000, amp in 0.01f64..1.5, s in 0u32..=3) {
        let g = Grid::new(&[16, 16], &[2.0 * PI; 2]).unwrap();
        let m = Model::new(g, ElasticParams::default(), ViscousParams::default()).unwrap();
        let st = State::new(
            random_frame_field(&m.grid, amp, 2, seed).unwrap(),
            random_velocity(&m.grid, amp, 2, seed).unwrap(),
            0.0,
        )
        .unwrap();
        let eb = energy_functionals(&m, &st, s).unwrap();
        prop_assert!(eb.e_s >= 0.0 && eb.d_s >= 0.0);
        prop_assert!(eb.d_terms.iter().all(|&d| d >= 0.0));
        prop_assert!(eb.f_bi >= -1e-12 * eb.e_s);
    }

    #[test]
    fn constant_frames_are_at_rest(w in prop::array::uniform3(-3.0f64..3.0)) {
        let g = Grid::new(&[16, 16], &[1.0; 2]).unwrap();
        let m = Model::new(g, ElasticParams::default(), ViscousParams::default()).unwrap();
        let f = Frame::from_rotation_vector(&Vector3::from(w));
        let st = State::new(FrameField::constant(m.grid.dims(), &f), VectorField::zeros(m.grid.dims()), 0.0).unwrap();
        let t = tendency(&m, &st).unwrap();
        prop_assert!(t.omega.iter().flatten().all(|x| x.abs() < 1e-13));
        prop_assert!(t.dv.max_norm() < 1e-13);
    }
}
