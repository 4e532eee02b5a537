#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use symquant_core::linalg::{expm, Mat, Vector};
use symquant_core::williamson::canonical_j;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    // Box-Muller keeps the dependency list short.
    let u1: f64 = r.random_range(f64::EPSILON..1.0);
    let u2: f64 = r.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(r))
}

pub fn random_vector(r: &mut ChaCha8Rng, n: usize) -> Vector {
    DVector::from_fn(n, |_, _| gaussian(r))
}

/// exp(J A) with A symmetric of Frobenius norm `size`.
pub fn random_symplectic(r: &mut ChaCha8Rng, n: usize, size: f64) -> Mat {
    let a = random_matrix(r, 2 * n, 2 * n);
    let a = (&a + a.transpose()) * 0.5;
    let a = &a * (size / a.norm());
    expm(&(canonical_j(n) * a), 1.0).unwrap()
}

/// Normal-form Hamiltonian with the given sector sizes, with frequencies
/// drawn in [0.5, 2] and optionally repeated.
pub fn normal_hamiltonian(
    r: &mut ChaCha8Rng,
    n_nd: usize,
    n_f: usize,
    n_ho: usize,
    degenerate: bool,
) -> Mat {
    let n = n_nd + n_f + n_ho;
    let mut h = Mat::zeros(2 * n, 2 * n);
    // free particles: momentum only
    for i in 0..n_f {
        let k = n_nd + i;
        h[(n + k, n + k)] = r.random_range(0.5..2.0);
    }
    let mut last = 1.0;
    for i in 0..n_ho {
        let k = n_nd + n_f + i;
        let w = if degenerate && i % 2 == 1 {
            last
        } else {
            r.random_range(0.5..2.0)
        };
        last = w;
        h[(k, k)] = w;
        h[(n + k, n + k)] = w;
    }
    h
}

/// Random PSD matrix of dimension 2n from one of several families.
pub fn random_psd(r: &mut ChaCha8Rng, n: usize, family: usize) -> Mat {
    match family % 4 {
        0 => {
            let b = random_matrix(r, 2 * n, 2 * n);
            b.transpose() * b
        }
        1 => {
            let rank = r.random_range(1..2 * n);
            let b = random_matrix(r, rank, 2 * n);
            b.transpose() * b
        }
        _ => {
            let n_nd = r.random_range(0..=n / 3);
            let n_f = r.random_range(0..=(n - n_nd) / 2);
            let n_ho = n - n_nd - n_f;
            let hd = normal_hamiltonian(r, n_nd, n_f, n_ho, family % 4 == 3);
            let t = random_symplectic(r, n, 1.0);
            let ti = t.clone().try_inverse().unwrap();
            let h = ti.transpose() * hd * ti;
            (&h + h.transpose()) * 0.5
        }
    }
}
