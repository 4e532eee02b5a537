mod common;

use common::{gaussian, rng};
use rand::Rng;
use symquant_core::circuit_builder::{self, legendre, CircuitSystem};
use symquant_core::linalg::{expm, rank_kernel, Mat, Tolerance, Vector};
use symquant_core::models::{self, BlackBoxParams};
use symquant_core::williamson::{canonical_j, classify_dof, normal_form};

/// Printed black-box Hamiltonian in `(Q, Φ_c, P, Π_c, Φ_J, Π_J)` order.
fn printed_blackbox(o: f64, oc: f64, oj: f64) -> Mat {
    let s = (o * oc).sqrt();
    let t = 2.0 * oj.powf(1.5) / o.sqrt();
    let a = 4.0 * oj * oj / o;
    #[rustfmt::skip]
    let rows = [
        o / 4.0, 0.0, s / 2.0, s / 2.0, 0.0, -o / 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, o / 4.0, -s / 2.0, 0.0, o / 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        s / 2.0, -s / 2.0, 2.0 * oc, oc, -s, -s, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        s / 2.0, 0.0, oc, oc, 0.0, -s, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, o / 2.0, -s, 0.0, 2.0 * a + o, -a, 0.0, 0.0, 0.0, 0.0, t, t,
        -o / 2.0, 0.0, -s, -s, -a, a + o, 0.0, 0.0, 0.0, 0.0, -t, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, oc, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, oc, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, t, -t, 0.0, 0.0, 0.0, 0.0, oj, 0.0,
        0.0, 0.0, 0.0, 0.0, t, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, oj,
    ];
    Mat::from_row_slice(12, 12, &rows)
}

#[test]
fn blackbox_matches_printed_matrix() {
    let tol = Tolerance::default();
    for (o, oc, oj) in [(1.0, 1.0, 1.0), (1.3, 0.7, 2.1)] {
        let p = BlackBoxParams {
            omega: o,
            omega_c: oc,
            omega_j: oj,
            ..Default::default()
        };
        let hs = models::blackbox_hamiltonian(&p, &tol).unwrap();
        let diff = (hs.display_h() - printed_blackbox(o, oc, oj)).amax();
        assert!(diff < 1e-6, "({o},{oc},{oj}) max diff {diff}");
    }
}

#[test]
fn blackbox_linearization_block() {
    let tol = Tolerance::default();
    let p = BlackBoxParams {
        omega_j: 1.7,
        lj_ratio: Some(0.6),
        ..Default::default()
    };
    let hs = models::blackbox_hamiltonian(&p, &tol).unwrap();
    let added = hs.linearized() - &hs.h;
    let junctions = hs.registry.junction_coords();
    for i in 0..12 {
        for j in 0..12 {
            let expected = if i == j && junctions.contains(&i) {
                0.6 * 1.7
            } else {
                0.0
            };
            assert!((added[(i, j)] - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn provenance_is_symplectic_and_compact_rows_vanish() {
    let tol = Tolerance::default();
    let hs = models::blackbox_hamiltonian(&BlackBoxParams::default(), &tol).unwrap();
    let j = canonical_j(6);
    for t in &hs.provenance {
        assert!(
            (t.matrix.transpose() * &j * &t.matrix - &j).norm() <= 1e-10,
            "{}",
            t.label
        );
    }
    for c in hs.registry.junction_coords() {
        assert!(hs.registry.coords[c].compact);
        assert!(hs.h.row(c).amax() < 1e-12);
    }
    let bare = legendre(hs.circuit.as_ref().unwrap());
    let t = hs.total_transform();
    assert!((t.transpose() * &bare.h * &t - &hs.h).amax() < 1e-10);
}

#[test]
fn degenerate_turns_sever_couplings() {
    let tol = Tolerance::default();
    let p = BlackBoxParams {
        turns: [0.0; 4],
        ..Default::default()
    };
    let cs = models::blackbox_circuit(&p).unwrap();
    assert_eq!(rank_kernel(&cs.d_mat.transpose(), &tol).basis.ncols(), 2);
    let bare = legendre(&cs);
    let c = classify_dof(&bare.h, &tol).unwrap();
    let c0 = classify_dof(
        &legendre(&models::blackbox_circuit(&BlackBoxParams::default()).unwrap()).h,
        &tol,
    )
    .unwrap();
    assert_ne!((c.n_nd, c.n_f, c.n_ho), (c0.n_nd, c0.n_f, c0.n_ho));
}

fn random_lc(r: &mut impl Rng, n_c: usize, m_l: usize) -> CircuitSystem {
    let c: Vec<f64> = (0..n_c).map(|_| r.random_range(0.2..3.0)).collect();
    let l: Vec<f64> = (0..m_l).map(|_| r.random_range(0.2..3.0)).collect();
    let d = Mat::from_fn(m_l, n_c, |_, _| match r.random_range(0..4) {
        0 => 1.0,
        1 => -1.0,
        _ => 0.0,
    });
    let caps: Vec<String> = (0..n_c).map(|i| format!("c{i}")).collect();
    let inds: Vec<String> = (0..m_l).map(|i| format!("l{i}")).collect();
    CircuitSystem::from_matrices(&c, &l, d, Mat::zeros(m_l, m_l), &[], &caps, &inds)
}

#[test]
fn lc_counting_law() {
    let tol = Tolerance::default();
    let mut r = rng(11);
    for _ in 0..100 {
        let n_c = r.random_range(1..6);
        let m_l = r.random_range(1..6);
        let cs = random_lc(&mut r, n_c, m_l);
        let kd = rank_kernel(&cs.d_mat, &tol).basis.ncols();
        let kdt = rank_kernel(&cs.d_mat.transpose(), &tol).basis.ncols();
        let c = classify_dof(&legendre(&cs).h, &tol).unwrap();
        assert_eq!(c.n_f, kd + kdt);
        assert_eq!(c.n_nd, (n_c + m_l - c.n_f) / 2);
        assert_eq!(c.n_ho, c.n_nd);
    }
}

/// Hamilton's equations mapped back through provenance obey
/// `CΦ̈ + DᵀQ̇ = 0` and `LQ̈ − DΦ̇ = 0`.
#[test]
fn kirchhoff_consistency() {
    let mut r = rng(12);
    for _ in 0..20 {
        let n_c = r.random_range(1..5);
        let m_l = r.random_range(1..5);
        let cs = random_lc(&mut r, n_c, m_l);
        let hs = circuit_builder::rescale(&legendre(&cs)).unwrap();
        let t = hs.total_transform();
        let n = n_c + m_l;
        let a = canonical_j(n) * &hs.h;
        let x0 = Vector::from_fn(2 * n, |_, _| gaussian(&mut r));
        for time in [0.3, 1.0, 2.5] {
            let x = expm(&a, time).unwrap() * &x0;
            let xd = &a * &x;
            let xdd = &a * &xd;
            let (y, yd, ydd) = (&t * x, &t * xd, &t * xdd);
            let phi_d = yd.rows(m_l, n_c);
            let phi_dd = ydd.rows(m_l, n_c);
            let q_d = yd.rows(0, m_l);
            let q_dd = ydd.rows(0, m_l);
            let kcl = &cs.c_mat * phi_dd + cs.d_mat.transpose() * q_d;
            let kvl = &cs.l_mat * q_dd - &cs.d_mat * phi_d;
            let scale = 1.0 + y.amax() + ydd.amax();
            assert!(kcl.amax() < 1e-6 * scale && kvl.amax() < 1e-6 * scale);
        }
    }
}

#[test]
fn lcc_cq_file_builds() {
    let src = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../netlists/lcc.cq"
    ))
    .unwrap();
    let n = symquant_core::netlist::parse(&src).unwrap();
    let cs = circuit_builder::build(&n).unwrap();
    let nf = normal_form(&legendre(&cs).h, &Tolerance::default()).unwrap();
    assert_eq!(nf.omega.len(), 1);
}

#[test]
fn blackbox_cq_file_matches_preset() {
    let src = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../netlists/blackbox.cq"
    ))
    .unwrap();
    let n = symquant_core::netlist::parse(&src).unwrap();
    let cs = circuit_builder::build(&n).unwrap();
    let preset = models::blackbox_circuit(&BlackBoxParams::default()).unwrap();
    assert_eq!(cs.d_mat, preset.d_mat);
    assert_eq!(cs.z_mat, preset.z_mat);
}
