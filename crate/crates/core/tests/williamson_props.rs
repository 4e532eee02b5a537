mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use symquant_core::linalg::{expm, Mat, Tolerance};
use symquant_core::williamson::{
    canonical_j, classify_dof, linear_invariants, normal_form, normal_form_with,
    quadratic_invariant_basis, NormalFormOptions,
};

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

#[test]
fn reconstruction_and_dynamics() {
    let tol = Tolerance::default();
    let mut r = rng(7);
    for case in 0..300 {
        let n = r.random_range(1..=8);
        let h = random_psd(&mut r, n, case);
        let nf = normal_form(&h, &tol).unwrap_or_else(|e| panic!("case {case}: {e}"));
        let j = canonical_j(n);
        assert!(nf.residuals.h <= 1e-8 * (1.0 + h.norm()), "case {case}");
        let x0 = random_vector(&mut r, 2 * n).normalize();
        for t in [0.1, 1.0, 5.0] {
            let lhs = expm(&(&j * &h), t).unwrap() * &x0;
            let rhs = &nf.s * expm(&nf.generator(), t).unwrap() * (&nf.s_inv * &x0);
            assert!((lhs - rhs).norm() <= 1e-6, "case {case} t={t}");
        }
        let s = normal_form_with(&h, &tol, NormalFormOptions { symplectic_w: true })
            .unwrap()
            .canonical_s();
        assert!((s.transpose() * &j * &s - &j).norm() < 1e-6 * (1.0 + s.norm().powi(2)));
    }
}

/// Frequencies agree with the imaginary parts of the spectrum of `JH`.
#[test]
fn spectral_consistency() {
    let tol = Tolerance::default();
    let mut r = rng(8);
    for _ in 0..100 {
        let n = r.random_range(1..=6);
        let b = random_matrix(&mut r, 2 * n, 2 * n);
        let h = b.transpose() * b + Mat::identity(2 * n, 2 * n) * 0.1;
        let nf = normal_form(&h, &tol).unwrap();
        let ev = (canonical_j(n) * &h).complex_eigenvalues();
        let mut im: Vec<f64> = ev.iter().map(|z| z.im).filter(|x| *x > 0.0).collect();
        im = sorted(im);
        assert_eq!(im.len(), nf.omega.len());
        for (a, b) in im.iter().zip(&nf.omega) {
            assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
        }
    }
}

#[test]
fn classification_is_symplectic_invariant() {
    let tol = Tolerance::default();
    let mut r = rng(9);
    for case in 0..60 {
        let n = r.random_range(1..=6);
        let h = random_psd(&mut r, n, case);
        let t = random_symplectic(&mut r, n, 0.5);
        let h2 = t.transpose() * &h * &t;
        let h2 = (&h2 + h2.transpose()) * 0.5;
        let (a, b) = (
            classify_dof(&h, &tol).unwrap(),
            classify_dof(&h2, &tol).unwrap(),
        );
        assert_eq!(
            (a.n_nd, a.n_f, a.n_ho),
            (b.n_nd, b.n_f, b.n_ho),
            "case {case}"
        );
        let (wa, wb) = (
            normal_form(&h, &tol).unwrap().omega,
            normal_form(&h2, &tol).unwrap().omega,
        );
        for (x, y) in wa.iter().zip(&wb) {
            assert!((x - y).abs() < 1e-7 * (1.0 + x));
        }
    }
}

#[test]
fn invariants_are_conserved() {
    let tol = Tolerance::default();
    let mut r = rng(10);
    for case in 0..40 {
        let n = r.random_range(1..=5);
        let h = random_psd(&mut r, n, case);
        let j = canonical_j(n);
        let x0 = random_vector(&mut r, 2 * n);
        for t in [0.5, 2.0] {
            let x = expm(&(&j * &h), t).unwrap() * &x0;
            for f in linear_invariants(&h, &tol).unwrap() {
                assert!((f.dot(&x) - f.dot(&x0)).abs() < 1e-8 * (1.0 + x0.norm() * f.norm()));
            }
        }
    }
    for case in 0..20 {
        let n = r.random_range(1..=4);
        let hd = normal_hamiltonian(&mut r, 0, 0, n, case % 2 == 0);
        let t = random_symplectic(&mut r, n, 0.5);
        let ti = t.clone().try_inverse().unwrap();
        let h = ti.transpose() * hd * ti;
        let h = (&h + h.transpose()) * 0.5;
        let x0 = random_vector(&mut r, 2 * n).normalize();
        let a = canonical_j(n) * &h;
        for b in quadratic_invariant_basis(&h, &tol).unwrap() {
            let q0 = x0.dot(&(&b * &x0));
            for time in [0.3, 1.7] {
                let x = expm(&a, time).unwrap() * &x0;
                assert!((x.dot(&(&b * &x)) - q0).abs() < 1e-8 * (1.0 + b.norm()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Diagonal Hamiltonians `diag(a, b)` per pair are oscillators of frequency √(ab).
    #[test]
    fn diagonal_pairs(vals in proptest::collection::vec((0.1f64..5.0, 0.1f64..5.0), 1..5)) {
        let n = vals.len();
        let mut h = Mat::zeros(2 * n, 2 * n);
        for (i, (a, b)) in vals.iter().enumerate() {
            h[(i, i)] = *a;
            h[(n + i, n + i)] = *b;
        }
        let nf = normal_form(&h, &Tolerance::default()).unwrap();
        let expected = sorted(vals.iter().map(|(a, b)| (a * b).sqrt()).collect());
        for (x, y) in nf.omega.iter().zip(&expected) {
            prop_assert!((x - y).abs() < 1e-10 * (1.0 + y));
        }
    }

    /// Scaling `H` scales frequencies and leaves the classification unchanged.
    #[test]
    fn homogeneity(seed in 0u64..1000, scale in 0.01f64..100.0) {
        let tol = Tolerance::default();
        let mut r = rng(seed);
        let n = r.random_range(1..=4);
        let h = random_psd(&mut r, n, seed as usize);
        let a = normal_form(&h, &tol).unwrap();
        let b = normal_form(&(&h * scale), &tol).unwrap();
        prop_assert_eq!(a.omega.len(), b.omega.len());
        for (x, y) in a.omega.iter().zip(&b.omega) {
            prop_assert!((x * scale - y).abs() < 1e-7 * (1.0 + y));
        }
    }
}
