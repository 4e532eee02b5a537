//! Symplectic normal form of positive-semidefinite quadratic Hamiltonians.
//!
//! Phase-space vectors are ordered `(q_1..q_n, p_1..p_n)` and the Hamiltonian
//! is `½ xᵀ H x`. A PSD `H` splits phase space into nondynamical pairs (`W`),
//! free particles (`E`, `F`) and harmonic oscillators (`𝓔`, `𝓕`). The
//! transformation `S` returned by [`normal_form`] has columns `[W | E | F | 𝓔 | 𝓕]`
//! and brings `H` to `SᵀHS = diag(0, 0, I, Ω, Ω)`.

use crate::linalg::{
    canonical_basis, eig_nonsymmetric, fix_sign, orthonormal_span, rank_kernel, rank_kernel_rel,
    serde_mat, solve_min_norm, LinalgError, Mat, Tolerance, Vector,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WilliamsonError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("phase space dimension must be even, got {0}")]
    OddDimension(usize),
    #[error("matrix is not symmetric (max deviation {deviation:.3e})")]
    NotSymmetric { deviation: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.6e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("degenerate normalization in {sector} sector, pair {index}: {value:.3e}")]
    DegenerateNormalization {
        sector: &'static str,
        index: usize,
        value: f64,
    },
    #[error(
        "verification of {identity} failed: residual {residual:.3e} exceeds bound {bound:.3e}"
    )]
    VerificationFailure {
        identity: String,
        residual: f64,
        bound: f64,
    },
    #[error("inconsistent kernel structure: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

type Result<T> = std::result::Result<T, WilliamsonError>;

/// Coordinate layout: `n` degrees of freedom, positions first, then momenta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceLayout {
    pub n: usize,
    /// One label per phase-space coordinate (`2n` entries).
    pub labels: Vec<String>,
}

impl PhaseSpaceLayout {
    pub fn new(n: usize) -> Self {
        let labels = (1..=n)
            .map(|i| format!("q{i}"))
            .chain((1..=n).map(|i| format!("p{i}")))
            .collect();
        PhaseSpaceLayout { n, labels }
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if !labels.len().is_multiple_of(2) {
            return Err(WilliamsonError::OddDimension(labels.len()));
        }
        Ok(PhaseSpaceLayout {
            n: labels.len() / 2,
            labels,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn j(&self) -> Mat {
        canonical_j(self.n)
    }
}

/// `[[0, I], [−I, 0]]` of size `2n`.
pub fn canonical_j(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

fn dof_count(h: &Mat) -> Result<usize> {
    if !h.is_square() {
        return Err(WilliamsonError::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    if !h.nrows().is_multiple_of(2) {
        return Err(WilliamsonError::OddDimension(h.nrows()));
    }
    crate::linalg::check_finite(h)?;
    Ok(h.nrows() / 2)
}

fn asymmetry(h: &Mat) -> f64 {
    (h - h.transpose()).amax()
}

fn min_eigenvalue(h: &Mat) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    let sym = (h + h.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// True iff `h` is symmetric and its smallest eigenvalue is not below `−verify_abs·‖h‖`.
pub fn check_psd(h: &Mat, tol: &Tolerance) -> Result<bool> {
    dof_count(h)?;
    let scale = h.amax().max(1.0);
    if asymmetry(h) > tol.verify_abs * scale {
        return Ok(false);
    }
    Ok(min_eigenvalue(h) >= -tol.verify_abs * h.norm())
}

fn require_psd(h: &Mat, tol: &Tolerance) -> Result<usize> {
    let n = dof_count(h)?;
    let scale = h.amax().max(1.0);
    let dev = asymmetry(h);
    if dev > tol.verify_abs * scale {
        return Err(WilliamsonError::NotSymmetric { deviation: dev });
    }
    let lmin = min_eigenvalue(h);
    if lmin < -tol.verify_abs * h.norm() {
        return Err(WilliamsonError::NotPsd {
            min_eigenvalue: lmin,
        });
    }
    Ok(n)
}

/// Degree-of-freedom counts and the kernels that determine them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofClassification {
    pub n_nd: usize,
    pub n_f: usize,
    pub n_ho: usize,
    /// Orthonormal basis of `ker(JH)`.
    #[serde(with = "serde_mat")]
    pub k1_basis: Mat,
    /// Orthonormal basis of `ker((JH)²)`.
    #[serde(with = "serde_mat")]
    pub k2_basis: Mat,
}

impl DofClassification {
    pub fn n(&self) -> usize {
        self.n_nd + self.n_f + self.n_ho
    }
}

/// Threshold for deciding which directions of `ker H` pair up symplectically.
/// Bases are orthonormal, so this is an absolute cutoff on a unit-scale form.
fn radical_threshold(tol: &Tolerance) -> f64 {
    tol.rank_rel.sqrt()
}

/// Directions of `K1` that are symplectically orthogonal to all of `K1`;
/// these span `E = JH[K2]`.
fn free_directions(j: &Mat, k1: &Mat, tol: &Tolerance) -> Mat {
    if k1.ncols() == 0 {
        return Mat::zeros(k1.nrows(), 0);
    }
    let g = k1.transpose() * j * k1;
    let (sv, v) = {
        let svd = crate::linalg::svd(&g);
        let v_t = svd.v_t.expect("v_t requested");
        (svd.singular_values, v_t.transpose())
    };
    let thr = radical_threshold(tol);
    let mut cols = Vec::new();
    for i in 0..sv.len() {
        if sv[i] <= thr {
            cols.push(v.column(i).into_owned());
        }
    }
    if cols.is_empty() {
        return Mat::zeros(k1.nrows(), 0);
    }
    let null = Mat::from_columns(&cols);
    let e = k1 * null;
    canonical_basis(&orthonormal_span(&e, 1e-12))
}

struct KernelData {
    n: usize,
    j: Mat,
    k1: Mat,
    e_tilde: Mat,
    f_tilde: Mat,
    k2: Mat,
}

fn kernel_data(h: &Mat, tol: &Tolerance) -> Result<KernelData> {
    let n = h.nrows() / 2;
    let j = canonical_j(n);
    let jh = &j * h;
    let k1 = rank_kernel(&jh, tol).basis;
    let e_tilde = free_directions(&j, &k1, tol);
    let n_f = e_tilde.ncols();
    let mut f_tilde = Mat::zeros(2 * n, n_f);
    for i in 0..n_f {
        let x = solve_min_norm(&jh, &e_tilde.column(i).into_owned(), tol)?;
        f_tilde.set_column(i, &x);
    }
    let k2 = if n_f == 0 {
        k1.clone()
    } else {
        let mut both = Mat::zeros(2 * n, k1.ncols() + n_f);
        both.view_mut((0, 0), (2 * n, k1.ncols())).copy_from(&k1);
        for i in 0..n_f {
            let c = f_tilde.column(i);
            both.set_column(k1.ncols() + i, &(c / c.norm()));
        }
        orthonormal_span(&both, tol.rank_rel.sqrt())
    };
    if k2.ncols() != k1.ncols() + n_f {
        return Err(WilliamsonError::Inconsistent(format!(
            "dim K2 = {} but dim K1 + n_f = {}",
            k2.ncols(),
            k1.ncols() + n_f
        )));
    }
    if !(k1.ncols() - n_f).is_multiple_of(2) {
        return Err(WilliamsonError::Inconsistent(format!(
            "dim K1 - n_f = {} is odd",
            k1.ncols() - n_f
        )));
    }
    Ok(KernelData {
        n,
        j,
        k1,
        e_tilde,
        f_tilde,
        k2,
    })
}

fn classification_from(kd: &KernelData) -> DofClassification {
    let n_f = kd.e_tilde.ncols();
    let n_nd = (kd.k1.ncols() - n_f) / 2;
    DofClassification {
        n_nd,
        n_f,
        n_ho: kd.n - n_f - n_nd,
        k1_basis: kd.k1.clone(),
        k2_basis: kd.k2.clone(),
    }
}

fn balance(h: &Mat) -> (Mat, f64) {
    let s = h.amax();
    if s == 0.0 {
        (h.clone(), 1.0)
    } else {
        (h / s, s)
    }
}

/// Count nondynamical pairs, free particles and oscillators.
pub fn classify_dof(h: &Mat, tol: &Tolerance) -> Result<DofClassification> {
    require_psd(h, tol)?;
    let (hs, _) = balance(h);
    Ok(classification_from(&kernel_data(&hs, tol)?))
}

/// Symplectically orthonormal free-particle pairs with `JH f_I = e_I`.
pub fn free_particle_pairs(
    h: &Mat,
    classification: &DofClassification,
    tol: &Tolerance,
) -> Result<(Mat, Mat)> {
    let n = dof_count(h)?;
    let j = canonical_j(n);
    let jh = &j * h;
    let e_tilde = free_directions(&j, &classification.k1_basis, tol);
    let mut f_tilde = Mat::zeros(2 * n, e_tilde.ncols());
    for i in 0..e_tilde.ncols() {
        let x = solve_min_norm(&jh, &e_tilde.column(i).into_owned(), tol)?;
        f_tilde.set_column(i, &x);
    }
    free_sgs(h, &j, &e_tilde, &f_tilde, tol)
}

fn form(j: &Mat, a: &Vector, b: &Vector) -> f64 {
    a.dot(&(j * b))
}

fn free_sgs(h: &Mat, j: &Mat, e_t: &Mat, f_t: &Mat, tol: &Tolerance) -> Result<(Mat, Mat)> {
    let dim = h.nrows();
    let nf = e_t.ncols();
    let mut es: Vec<Vector> = Vec::with_capacity(nf);
    let mut fs: Vec<Vector> = Vec::with_capacity(nf);
    for i in 0..nf {
        let et = e_t.column(i).into_owned();
        let ft = f_t.column(i).into_owned();
        let mut e = et.clone();
        let mut f = ft.clone();
        let mut a_inv2 = ft.dot(&(h * &ft));
        for k in 0..i {
            let c_ef = form(j, &et, &fs[k]);
            e -= &es[k] * c_ef;
            f -= &es[k] * form(j, &ft, &fs[k]);
            f += &fs[k] * form(j, &ft, &es[k]);
            a_inv2 -= c_ef * form(j, &es[k], &ft);
        }
        if a_inv2.is_nan() || a_inv2 <= tol.verify_abs {
            return Err(WilliamsonError::DegenerateNormalization {
                sector: "free-particle",
                index: i,
                value: a_inv2,
            });
        }
        let a = a_inv2.sqrt().recip();
        es.push(e * a);
        fs.push(f * a);
    }
    Ok((cols(&es, dim), cols(&fs, dim)))
}

fn cols(v: &[Vector], dim: usize) -> Mat {
    if v.is_empty() {
        Mat::zeros(dim, 0)
    } else {
        Mat::from_columns(v)
    }
}

/// Nondynamical directions, made symplectically orthogonal to the free pairs.
pub fn nondynamical_block(
    h: &Mat,
    classification: &DofClassification,
    e_basis: &Mat,
    f_basis: &Mat,
    tol: &Tolerance,
) -> Result<Mat> {
    let n = dof_count(h)?;
    let j = canonical_j(n);
    Ok(nondynamical_from(
        &j,
        &classification.k1_basis,
        e_basis,
        f_basis,
        tol,
    ))
}

fn nondynamical_from(j: &Mat, k1: &Mat, e: &Mat, f: &Mat, _tol: &Tolerance) -> Mat {
    let dim = k1.nrows();
    let target = k1.ncols() - e.ncols();
    if target == 0 {
        return Mat::zeros(dim, 0);
    }
    // Euclidean complement of E inside K1.
    let q_e = if e.ncols() > 0 {
        orthonormal_span(e, 1e-12)
    } else {
        Mat::zeros(dim, 0)
    };
    let proj = k1 - &q_e * (q_e.transpose() * k1);
    let mut w_t = orthonormal_span(&proj, 1e-8);
    if w_t.ncols() > target {
        w_t = w_t.columns(0, target).into_owned();
    }
    let mut out = Vec::with_capacity(w_t.ncols());
    for i in 0..w_t.ncols() {
        let wt = w_t.column(i).into_owned();
        let mut w = wt.clone();
        for k in 0..e.ncols() {
            let fk = f.column(k).into_owned();
            w -= e.column(k) * form(j, &wt, &fk);
        }
        out.push(w);
    }
    cols(&out, dim)
}

/// Oscillator pairs and their frequencies (descending).
#[derive(Debug, Clone)]
pub struct HarmonicSector {
    pub eps: Mat,
    pub f: Mat,
    pub omega: Vec<f64>,
}

/// Oscillator pairs with `JH e = −ω f`, `JH f = ω e` and `⟨e, J f⟩ = 1`.
pub fn harmonic_pairs(h: &Mat, tol: &Tolerance) -> Result<HarmonicSector> {
    require_psd(h, tol)?;
    let (hs, s) = balance(h);
    let kd = kernel_data(&hs, tol)?;
    let mut hsec = harmonic_from(&hs, &kd.j, &kd.k2, tol)?;
    for w in hsec.omega.iter_mut() {
        *w *= s;
    }
    Ok(hsec)
}

fn harmonic_from(h: &Mat, j: &Mat, k2: &Mat, tol: &Tolerance) -> Result<HarmonicSector> {
    let dim = h.nrows();
    let constraint = k2.transpose() * j;
    let q = if k2.ncols() == 0 {
        Mat::identity(dim, dim)
    } else {
        rank_kernel_rel(&constraint, 1e-8).basis
    };
    let m = q.ncols();
    if m % 2 != 0 {
        return Err(WilliamsonError::Inconsistent(format!(
            "oscillator subspace has odd dimension {m}"
        )));
    }
    if m == 0 {
        return Ok(HarmonicSector {
            eps: Mat::zeros(dim, 0),
            f: Mat::zeros(dim, 0),
            omega: vec![],
        });
    }
    let hr = q.transpose() * h * &q;
    let hr = (&hr + hr.transpose()) * 0.5;
    let jr = q.transpose() * j * &q;
    let chol = hr
        .clone()
        .cholesky()
        .ok_or_else(|| WilliamsonError::NotPsd {
            min_eigenvalue: hr.symmetric_eigenvalues().min(),
        })?;
    let l = chol.l();
    let jr_inv = jr.clone().try_inverse().ok_or_else(|| {
        WilliamsonError::Inconsistent("oscillator subspace is not symplectic".into())
    })?;
    let k = -(l.transpose() * jr_inv * &l);
    let k = (&k - k.transpose()) * 0.5;
    let ep = eig_nonsymmetric(&k, tol)?;
    let l_inv_t = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| WilliamsonError::Inconsistent("singular Cholesky factor".into()))?;
    let lift = &q * l_inv_t;

    // Upper half-plane eigenvectors, grouped by frequency.
    let mut picks: Vec<(f64, Vector, Vector)> = Vec::new();
    for (lam, v) in ep.eigenvalues.iter().zip(&ep.eigenvectors) {
        if lam.im > 0.0 {
            let re = &lift * v.map(|z| z.re);
            let im = &lift * v.map(|z| z.im);
            picks.push((lam.im, re, im));
        }
    }
    if picks.len() * 2 != m {
        return Err(WilliamsonError::Inconsistent(format!(
            "found {} oscillator eigenvectors for a {}-dimensional subspace",
            picks.len(),
            m
        )));
    }
    // Stable sort keeps eigensolver order inside a degenerate group.
    picks.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let wmax = picks.first().map_or(0.0, |p| p.0);
    let width = tol.degeneracy_rel * wmax;

    let mut eps = Vec::new();
    let mut fs = Vec::new();
    let mut omega = Vec::new();
    let mut group_start = 0;
    for (idx, (w, et, ft)) in picks.iter().enumerate() {
        if idx > 0 && (picks[group_start].0 - w).abs() > width {
            group_start = idx;
        }
        let mut e = et.clone();
        let mut f = ft.clone();
        for b in group_start..idx {
            let (eb, fb): (&Vector, &Vector) = (&eps[b], &fs[b]);
            let pe = form(j, &e, fb);
            let qe = form(j, &e, eb);
            let pf = form(j, &f, fb);
            let qf = form(j, &f, eb);
            e = e - eb * pe + fb * qe;
            f = f - eb * pf + fb * qf;
        }
        let norm2 = form(j, &e, &f);
        if norm2.is_nan() || norm2 <= tol.verify_abs * e.norm() * f.norm() {
            return Err(WilliamsonError::DegenerateNormalization {
                sector: "harmonic",
                index: idx,
                value: norm2,
            });
        }
        let a = norm2.sqrt().recip();
        eps.push(e * a);
        fs.push(f * a);
        omega.push(*w);
    }
    // Representative frequency per degenerate group.
    let mut i = 0;
    while i < omega.len() {
        let mut k = i;
        while k + 1 < omega.len() && (omega[i] - omega[k + 1]).abs() <= width {
            k += 1;
        }
        let mean = omega[i..=k].iter().sum::<f64>() / (k - i + 1) as f64;
        for w in &mut omega[i..=k] {
            *w = mean;
        }
        i = k + 1;
    }
    Ok(HarmonicSector {
        eps: cols(&eps, dim),
        f: cols(&fs, dim),
        omega,
    })
}

/// Symplectic Gram-Schmidt on a nondegenerate set of columns. Returns
/// `[A | B]` with `[A|B]ᵀ J [A|B] = J_k`.
pub fn symplectic_gram_schmidt(j: &Mat, w: &Mat, tol: &Tolerance) -> Result<Mat> {
    let dim = w.nrows();
    let mut rest: Vec<Vector> = (0..w.ncols()).map(|i| w.column(i).into_owned()).collect();
    let mut a_vecs = Vec::new();
    let mut b_vecs = Vec::new();
    while !rest.is_empty() {
        let u = rest.remove(0);
        let (best, c) = rest
            .iter()
            .enumerate()
            .map(|(i, v)| (i, form(j, &u, v)))
            .fold((usize::MAX, 0.0f64), |acc, x| {
                if x.1.abs() > acc.1.abs() {
                    x
                } else {
                    acc
                }
            });
        if best == usize::MAX || c.abs() <= tol.verify_abs * u.norm().max(1.0) {
            return Err(WilliamsonError::DegenerateNormalization {
                sector: "nondynamical",
                index: a_vecs.len(),
                value: c,
            });
        }
        let v = rest.remove(best);
        let s = c.abs().sqrt();
        let a = &u / s;
        let b = &v * (c.signum() / s);
        for x in rest.iter_mut() {
            let xa = form(j, x, &a);
            let xb = form(j, x, &b);
            *x -= &a * xb;
            *x += &b * xa;
        }
        a_vecs.push(a);
        b_vecs.push(b);
    }
    a_vecs.extend(b_vecs);
    Ok(cols(&a_vecs, dim))
}

/// Options for [`normal_form_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NormalFormOptions {
    /// Apply symplectic Gram-Schmidt to `W` so that `S` is fully symplectic.
    pub symplectic_w: bool,
}

/// Norms of the verification identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖SᵀHS − H_D‖`
    pub h: f64,
    /// `‖SᵀJS − Σ‖` with `Σ` the expected block structure
    pub j: f64,
    /// `‖S⁻¹JHS − D_J‖`
    pub generator: f64,
    /// `‖S⁻¹S − I‖`
    pub inverse: f64,
}

#[derive(Debug, Clone)]
pub struct NormalForm {
    /// Columns `[W | E | F | 𝓔 | 𝓕]`.
    pub s: Mat,
    pub s_inv: Mat,
    /// The computed `SᵀHS`.
    pub h_diag: Mat,
    /// Oscillator frequencies, descending, with multiplicity.
    pub omega: Vec<f64>,
    pub classification: DofClassification,
    /// `WᵀJW`.
    pub w_block: Mat,
    pub residuals: Residuals,
    pub symplectic_w: bool,
}

impl NormalForm {
    pub fn n(&self) -> usize {
        self.s.nrows() / 2
    }

    fn offsets(&self) -> [usize; 5] {
        let c = &self.classification;
        let w = 2 * c.n_nd;
        [0, w, w + c.n_f, w + 2 * c.n_f, w + 2 * c.n_f + c.n_ho]
    }

    pub fn w_cols(&self) -> std::ops::Range<usize> {
        let o = self.offsets();
        o[0]..o[1]
    }
    pub fn e_cols(&self) -> std::ops::Range<usize> {
        let o = self.offsets();
        o[1]..o[2]
    }
    pub fn f_cols(&self) -> std::ops::Range<usize> {
        let o = self.offsets();
        o[2]..o[3]
    }
    pub fn eps_cols(&self) -> std::ops::Range<usize> {
        let o = self.offsets();
        o[3]..o[4]
    }
    pub fn osc_f_cols(&self) -> std::ops::Range<usize> {
        let o = self.offsets();
        o[4]..o[4] + self.classification.n_ho
    }

    /// Expected `SᵀHS`.
    pub fn target_h(&self) -> Mat {
        expected_h(&self.classification, &self.omega)
    }

    /// Generator `D_J` of the normal-coordinate dynamics `ẏ = D_J y`.
    pub fn generator(&self) -> Mat {
        expected_generator(&self.classification, &self.omega)
    }

    /// Column permutation taking `[W_q | W_p | E | F | 𝓔 | 𝓕]` to canonical
    /// `(W_q, E, 𝓔, W_p, F, 𝓕)` order. Only meaningful with `symplectic_w`.
    pub fn canonical_permutation(&self) -> Vec<usize> {
        let c = &self.classification;
        let w = self.w_cols();
        let wq = w.start..w.start + c.n_nd;
        let wp = w.start + c.n_nd..w.end;
        wq.chain(self.e_cols())
            .chain(self.eps_cols())
            .chain(wp)
            .chain(self.f_cols())
            .chain(self.osc_f_cols())
            .collect()
    }

    /// `S` with columns reordered to canonical pairs (see [`Self::canonical_permutation`]).
    pub fn canonical_s(&self) -> Mat {
        let perm = self.canonical_permutation();
        let mut out = Mat::zeros(self.s.nrows(), perm.len());
        for (dst, &src) in perm.iter().enumerate() {
            out.set_column(dst, &self.s.column(src));
        }
        out
    }

    pub fn report(&self) -> NormalFormReport {
        NormalFormReport {
            s: self.s.clone(),
            h_diag: self.h_diag.clone(),
            omega: self.omega.clone(),
            counts: Counts::from(&self.classification),
            w_block: self.w_block.clone(),
            residuals: ResidualReport {
                h: self.residuals.h,
                j: self.residuals.j,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n_nd: usize,
    pub n_f: usize,
    pub n_ho: usize,
}

impl From<&DofClassification> for Counts {
    fn from(c: &DofClassification) -> Self {
        Counts {
            n_nd: c.n_nd,
            n_f: c.n_f,
            n_ho: c.n_ho,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub h: f64,
    pub j: f64,
}

/// Serialized normal form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormReport {
    #[serde(with = "serde_mat")]
    pub s: Mat,
    #[serde(with = "serde_mat")]
    pub h_diag: Mat,
    pub omega: Vec<f64>,
    pub counts: Counts,
    #[serde(with = "serde_mat")]
    pub w_block: Mat,
    pub residuals: ResidualReport,
}

fn expected_h(c: &DofClassification, omega: &[f64]) -> Mat {
    let dim = 2 * c.n();
    let mut d = Mat::zeros(dim, dim);
    let f0 = 2 * c.n_nd + c.n_f;
    for i in 0..c.n_f {
        d[(f0 + i, f0 + i)] = 1.0;
    }
    let h0 = 2 * c.n_nd + 2 * c.n_f;
    for (i, w) in omega.iter().enumerate() {
        d[(h0 + i, h0 + i)] = *w;
        d[(h0 + c.n_ho + i, h0 + c.n_ho + i)] = *w;
    }
    d
}

fn expected_generator(c: &DofClassification, omega: &[f64]) -> Mat {
    let dim = 2 * c.n();
    let mut d = Mat::zeros(dim, dim);
    let e0 = 2 * c.n_nd;
    for i in 0..c.n_f {
        d[(e0 + i, e0 + c.n_f + i)] = 1.0;
    }
    let h0 = e0 + 2 * c.n_f;
    for (i, w) in omega.iter().enumerate() {
        d[(h0 + i, h0 + c.n_ho + i)] = *w;
        d[(h0 + c.n_ho + i, h0 + i)] = -*w;
    }
    d
}

/// Expected `SᵀJS` given the `W` block.
fn expected_j(c: &DofClassification, w_block: &Mat) -> Mat {
    let dim = 2 * c.n();
    let mut d = Mat::zeros(dim, dim);
    let w = 2 * c.n_nd;
    d.view_mut((0, 0), (w, w)).copy_from(w_block);
    for i in 0..c.n_f {
        d[(w + i, w + c.n_f + i)] = 1.0;
        d[(w + c.n_f + i, w + i)] = -1.0;
    }
    let h0 = w + 2 * c.n_f;
    for i in 0..c.n_ho {
        d[(h0 + i, h0 + c.n_ho + i)] = 1.0;
        d[(h0 + c.n_ho + i, h0 + i)] = -1.0;
    }
    d
}

/// Normal form with default options (non-symplectic `W`).
pub fn normal_form(h: &Mat, tol: &Tolerance) -> Result<NormalForm> {
    normal_form_with(h, tol, NormalFormOptions::default())
}

pub fn normal_form_with(h: &Mat, tol: &Tolerance, opts: NormalFormOptions) -> Result<NormalForm> {
    tol.validate()?;
    let n = require_psd(h, tol)?;
    let dim = 2 * n;
    let (hs, scale) = balance(h);
    let kd = kernel_data(&hs, tol)?;
    let classification = classification_from(&kd);

    let (e_s, f_s) = free_sgs(&hs, &kd.j, &kd.e_tilde, &kd.f_tilde, tol)?;
    let mut w = nondynamical_from(&kd.j, &kd.k1, &e_s, &f_s, tol);
    if w.ncols() != 2 * classification.n_nd {
        return Err(WilliamsonError::Inconsistent(format!(
            "expected {} nondynamical directions, found {}",
            2 * classification.n_nd,
            w.ncols()
        )));
    }
    if opts.symplectic_w && w.ncols() > 0 {
        w = symplectic_gram_schmidt(&kd.j, &w, tol)?;
    }
    let hsec = harmonic_from(&hs, &kd.j, &kd.k2, tol)?;
    if hsec.omega.len() != classification.n_ho {
        return Err(WilliamsonError::Inconsistent(format!(
            "expected {} oscillators, found {}",
            classification.n_ho,
            hsec.omega.len()
        )));
    }
    let root = scale.sqrt();
    let e = e_s * root;
    let f = f_s / root;
    let omega: Vec<f64> = hsec.omega.iter().map(|w| w * scale).collect();

    let mut s = Mat::zeros(dim, dim);
    let mut col = 0;
    for block in [&w, &e, &f, &hsec.eps, &hsec.f] {
        if block.ncols() > 0 {
            s.view_mut((0, col), (dim, block.ncols())).copy_from(block);
        }
        col += block.ncols();
    }
    debug_assert_eq!(col, dim);
    assemble(h, s, omega, classification, &kd.j, opts.symplectic_w, tol)
}

fn assemble(
    h: &Mat,
    s: Mat,
    omega: Vec<f64>,
    classification: DofClassification,
    j: &Mat,
    symplectic_w: bool,
    tol: &Tolerance,
) -> Result<NormalForm> {
    let dim = s.nrows();
    let nw = 2 * classification.n_nd;
    let sjs = s.transpose() * j * &s;
    let w_block = sjs.view((0, 0), (nw, nw)).into_owned();
    let w_inv = if nw == 0 {
        Mat::zeros(0, 0)
    } else {
        w_block
            .clone()
            .try_inverse()
            .ok_or_else(|| WilliamsonError::VerificationFailure {
                identity: "invertibility of WᵀJW".into(),
                residual: f64::INFINITY,
                bound: 0.0,
            })?
    };
    let mut pre = Mat::zeros(dim, dim);
    pre.view_mut((0, 0), (nw, nw)).copy_from(&w_inv);
    let nf = classification.n_f;
    let nh = classification.n_ho;
    for (start, k) in [(nw, nf), (nw + 2 * nf, nh)] {
        for i in 0..k {
            pre[(start + i, start + k + i)] = -1.0;
            pre[(start + k + i, start + i)] = 1.0;
        }
    }
    let s_inv = pre * s.transpose() * j;

    let h_diag = s.transpose() * h * &s;
    let target_h = expected_h(&classification, &omega);
    let target_j = expected_j(&classification, &w_block);
    let gen = expected_generator(&classification, &omega);
    let residuals = Residuals {
        h: (&h_diag - &target_h).norm(),
        j: (&sjs - &target_j).norm(),
        generator: (&s_inv * j * h * &s - &gen).norm(),
        inverse: (&s_inv * &s - Mat::identity(dim, dim)).norm(),
    };
    let hn = h.norm();
    let sn2 = s.norm().powi(2).max(1.0);
    let cond = s.norm() * s_inv.norm();
    let checks = [
        ("SᵀHS = H_D", residuals.h, tol.verify_abs * (1.0 + hn) * sn2),
        ("SᵀJS block structure", residuals.j, tol.verify_abs * sn2),
        (
            "S⁻¹JHS = D_J",
            residuals.generator,
            tol.verify_abs * (1.0 + hn) * cond.max(1.0),
        ),
        (
            "S⁻¹S = I",
            residuals.inverse,
            tol.verify_abs * cond.max(1.0),
        ),
    ];
    for (identity, residual, bound) in checks {
        if residual.is_nan() || bound.is_nan() || residual > bound {
            return Err(WilliamsonError::VerificationFailure {
                identity: identity.to_string(),
                residual,
                bound,
            });
        }
    }
    Ok(NormalForm {
        s,
        s_inv,
        h_diag,
        omega,
        classification,
        w_block,
        residuals,
        symplectic_w,
    })
}

/// Basis of covectors `f` with `f·x` conserved, i.e. `HJf = 0`.
pub fn linear_invariants(h: &Mat, tol: &Tolerance) -> Result<Vec<Vector>> {
    let n = dof_count(h)?;
    let j = canonical_j(n);
    let k = rank_kernel(h, tol).basis;
    let f = -(&j * k);
    let f = canonical_basis(&f);
    Ok((0..f.ncols())
        .map(|i| {
            let mut v = f.column(i).into_owned();
            fix_sign(&mut v);
            v
        })
        .collect())
}

/// Whether `½ xᵀBx` Poisson-commutes with `½ xᵀHx`: `[JH, JB] = 0`.
pub fn quadratic_commutant_check(h: &Mat, b: &Mat, tol: &Tolerance) -> Result<bool> {
    let n = dof_count(h)?;
    if b.shape() != h.shape() {
        return Err(WilliamsonError::Linalg(LinalgError::Shape(format!(
            "B is {}x{}, H is {}x{}",
            b.nrows(),
            b.ncols(),
            h.nrows(),
            h.ncols()
        ))));
    }
    let dev = asymmetry(b);
    if dev > tol.verify_abs * b.amax().max(1.0) {
        return Err(WilliamsonError::NotSymmetric { deviation: dev });
    }
    let j = canonical_j(n);
    let jh = &j * h;
    let jb = &j * b;
    let comm = &jh * &jb - &jb * &jh;
    Ok(comm.norm() <= tol.verify_abs * jh.norm() * jb.norm())
}

/// Basis of quadratic invariants of a positive-definite `H`: `d²` elements per
/// frequency of degeneracy `d`.
pub fn quadratic_invariant_basis(h: &Mat, tol: &Tolerance) -> Result<Vec<Mat>> {
    let n = require_psd(h, tol)?;
    let lmin = min_eigenvalue(h);
    let nf = normal_form(h, tol)?;
    if nf.classification.n_ho != n || n == 0 {
        return Err(WilliamsonError::NotPositiveDefinite {
            min_eigenvalue: lmin,
        });
    }
    let dim = 2 * n;
    let width = tol.degeneracy_rel * nf.omega.first().copied().unwrap_or(0.0);
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut k = i + 1;
        while k < n && (nf.omega[k] - nf.omega[i]).abs() <= width {
            k += 1;
        }
        groups.push((i, k - i));
        i = k;
    }
    let s_inv = &nf.s_inv;
    let mut out = Vec::new();
    for (start, d) in groups {
        let mut push = |bt: Mat| {
            let b = s_inv.transpose() * bt * s_inv;
            let b = (&b + b.transpose()) * 0.5;
            let nrm = b.norm();
            out.push(b / nrm);
        };
        for a in 0..d {
            for c in a..d {
                let mut bt = Mat::zeros(dim, dim);
                let (ia, ic) = (start + a, start + c);
                for (r, s) in [(ia, ic), (ic, ia)] {
                    bt[(r, s)] = 1.0;
                    bt[(n + r, n + s)] = 1.0;
                }
                push(bt);
            }
        }
        for a in 0..d {
            for c in a + 1..d {
                let mut bt = Mat::zeros(dim, dim);
                let (ia, ic) = (start + a, start + c);
                // M = E_ac − E_ca placed as [[N, −M], [M, N]].
                bt[(ia, n + ic)] = -1.0;
                bt[(ic, n + ia)] = 1.0;
                bt[(n + ia, ic)] = 1.0;
                bt[(n + ic, ia)] = -1.0;
                push(bt);
            }
        }
    }
    Ok(out)
}
