//! Dense real linear algebra with an explicit tolerance policy.
//!
//! Matrices are plain `nalgebra::DMatrix<f64>` values. [`RealMatrix`] is the
//! serialized form (`{"rows", "cols", "entries"}` in row-major order) and can
//! also be read from CSV.

use nalgebra::{DMatrix, DVector, Dyn, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type CMat = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,
    #[error("inconsistent system: residual {residual:.3e} exceeds bound {bound:.3e}")]
    Inconsistent { residual: f64, bound: f64 },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("matrix parse error: {0}")]
    Parse(String),
}

/// Numerical thresholds used throughout the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel: f64,
    /// Residual bound for verification identities.
    pub verify_abs: f64,
    /// Relative width for grouping (near-)equal eigenvalues.
    pub degeneracy_rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rel: 1e-10,
            verify_abs: 1e-9,
            degeneracy_rel: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, verify_abs: f64, degeneracy_rel: f64) -> Result<Self, LinalgError> {
        let t = Tolerance {
            rank_rel,
            verify_abs,
            degeneracy_rel,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), LinalgError> {
        for (name, v) in [
            ("rank_rel", self.rank_rel),
            ("verify_abs", self.verify_abs),
            ("degeneracy_rel", self.degeneracy_rel),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(LinalgError::InvalidTolerance(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Serialized matrix: shape plus row-major entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl RealMatrix {
    pub fn to_matrix(&self) -> Result<Mat, LinalgError> {
        if self.entries.len() != self.rows * self.cols {
            return Err(LinalgError::Shape(format!(
                "{} entries for a {}x{} matrix",
                self.entries.len(),
                self.rows,
                self.cols
            )));
        }
        let m = Mat::from_row_slice(self.rows, self.cols, &self.entries);
        check_finite(&m)?;
        Ok(m)
    }

    pub fn from_matrix(m: &Mat) -> Self {
        let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push(m[(i, j)]);
            }
        }
        RealMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }
}

impl From<&Mat> for RealMatrix {
    fn from(m: &Mat) -> Self {
        RealMatrix::from_matrix(m)
    }
}

/// Serde adapter so that structs can hold a `Mat` and serialize it as a [`RealMatrix`].
pub mod serde_mat {
    use super::{Mat, RealMatrix};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        RealMatrix::from_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        RealMatrix::deserialize(d)?
            .to_matrix()
            .map_err(serde::de::Error::custom)
    }
}

pub fn check_finite(m: &Mat) -> Result<(), LinalgError> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(LinalgError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Parse a matrix from JSON (`RealMatrix` object) or CSV text.
pub fn parse_matrix(text: &str) -> Result<Mat, LinalgError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let rm: RealMatrix =
            serde_json::from_str(text).map_err(|e| LinalgError::Parse(e.to_string()))?;
        rm.to_matrix()
    } else {
        parse_csv(text)
    }
}

pub fn parse_csv(text: &str) -> Result<Mat, LinalgError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| LinalgError::Parse(e.to_string()))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| LinalgError::Parse(format!("row {}: bad number '{f}'", idx + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(LinalgError::Parse(format!(
                    "row {} has {} columns, expected {}",
                    idx + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let m = Mat::from_row_slice(r, c, &flat);
    check_finite(&m)?;
    Ok(m)
}

/// Rank and orthonormal kernel basis of a matrix.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub rank: usize,
    /// Columns form an orthonormal basis of the kernel.
    pub basis: Mat,
}

/// Thin SVD `m = U Σ Vᵀ` with both factors.
///
/// nalgebra's Golub-Kahan iteration occasionally returns factors that do not
/// reproduce `m` (observed on rank-one products); the result is checked and
/// recomputed with one-sided Jacobi when that happens.
pub fn svd(m: &Mat) -> SVD<f64, Dyn, Dyn> {
    let fast = m.clone().svd(true, true);
    let scale = m.amax();
    let ok = match (&fast.u, &fast.v_t) {
        (Some(u), Some(v_t)) => {
            let rec = u * Mat::from_diagonal(&fast.singular_values) * v_t;
            let bound = 1e-12 * (1.0 + scale) * (m.nrows().max(m.ncols()) as f64);
            (rec - m).amax() <= bound && fast.singular_values.iter().all(|x| x.is_finite())
        }
        _ => false,
    };
    if ok {
        fast
    } else {
        jacobi_svd(m)
    }
}

fn jacobi_svd(m: &Mat) -> SVD<f64, Dyn, Dyn> {
    let (r, c) = m.shape();
    if r < c {
        let t = jacobi_svd(&m.transpose());
        return SVD {
            u: t.v_t.map(|v| v.transpose()),
            v_t: t.u.map(|u| u.transpose()),
            singular_values: t.singular_values,
        };
    }
    let mut a = m.clone();
    let mut v = Mat::identity(c, c);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let (x, y) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = cs * x - sn * y;
                        mat[(i, q)] = sn * x + cs * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..c).collect();
    let norms: Vec<f64> = (0..c).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut u = Mat::zeros(r, c);
    let mut v_t = Mat::zeros(c, c);
    let mut sv = Vector::zeros(c);
    let smax = norms.iter().copied().fold(0.0, f64::max);
    for (dst, &k) in order.iter().enumerate() {
        sv[dst] = norms[k];
        v_t.set_row(dst, &v.column(k).transpose());
        if norms[k] > f64::EPSILON * smax && norms[k] > 0.0 {
            u.set_column(dst, &(a.column(k) / norms[k]));
        }
    }
    // Complete U for vanishing singular values.
    for dst in 0..c {
        if u.column(dst).norm() > 0.5 {
            continue;
        }
        for e in 0..r {
            let mut w = Vector::zeros(r);
            w[e] = 1.0;
            for _ in 0..2 {
                for k in 0..c {
                    if k != dst {
                        let d = u.column(k).dot(&w);
                        w -= u.column(k) * d;
                    }
                }
            }
            if w.norm() > 0.5 {
                let nw = w.norm();
                u.set_column(dst, &(w / nw));
                break;
            }
        }
    }
    SVD {
        u: Some(u),
        v_t: Some(v_t),
        singular_values: sv,
    }
}

/// Singular values and the full right-singular basis (columns of V).
fn full_svd(m: &Mat) -> (Vec<f64>, Mat) {
    let (r, c) = m.shape();
    if c == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    // Pad with zero rows so the thin SVD yields the complete V.
    let padded = if r < c {
        let mut p = Mat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = svd(&padded);
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sv: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let mut v = Mat::zeros(c, order.len());
    for (dst, &k) in order.iter().enumerate() {
        v.set_column(dst, &v_t.row(k).transpose());
    }
    (sv, v)
}

/// Rank with threshold `rank_rel * sigma_max` and a canonical orthonormal kernel basis.
pub fn rank_kernel(m: &Mat, tol: &Tolerance) -> Kernel {
    rank_kernel_rel(m, tol.rank_rel)
}

/// As [`rank_kernel`] with an explicit relative threshold.
pub fn rank_kernel_rel(m: &Mat, rel: f64) -> Kernel {
    let c = m.ncols();
    if c == 0 {
        return Kernel {
            rank: 0,
            basis: Mat::zeros(0, 0),
        };
    }
    let (sv, v) = full_svd(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > rel * smax && s > 0.0).count();
    let null = v.columns(rank, c - rank).into_owned();
    Kernel {
        rank,
        basis: canonical_basis(&null),
    }
}

/// Canonical orthonormal basis for the column span of an orthonormal `q`.
///
/// Built from the orthogonal projector so the result depends only on the
/// subspace: pivoted Gram-Schmidt over projector columns, then each vector is
/// signed so its first significant component is positive.
pub fn canonical_basis(q: &Mat) -> Mat {
    let (n, k) = q.shape();
    if k == 0 {
        return Mat::zeros(n, 0);
    }
    let p = q * q.transpose();
    let mut cols: Vec<Vector> = (0..n).map(|j| p.column(j).into_owned()).collect();
    let mut out = Mat::zeros(n, k);
    for slot in 0..k {
        let (best, _) =
            cols.iter()
                .enumerate()
                .map(|(i, c)| (i, c.norm()))
                .fold(
                    (0, -1.0),
                    |acc, x| if x.1 > acc.1 + 1e-12 { x } else { acc },
                );
        let mut v = cols[best].clone();
        // Two passes against previously accepted vectors.
        for _ in 0..2 {
            for prev in 0..slot {
                let u = out.column(prev);
                let d = u.dot(&v);
                v -= u * d;
            }
        }
        let nv = v.norm();
        v /= nv;
        fix_sign(&mut v);
        out.set_column(slot, &v);
        for c in cols.iter_mut() {
            let d = v.dot(c);
            *c -= &v * d;
        }
    }
    out
}

/// Flip `v` so its first component with magnitude above a small fraction of
/// the largest is positive.
pub fn fix_sign(v: &mut Vector) {
    let big = v.amax();
    if big == 0.0 {
        return;
    }
    if let Some(x) = v.iter().find(|x| x.abs() > 1e-8 * big) {
        if *x < 0.0 {
            v.neg_mut();
        }
    }
}

/// Orthonormal basis of the span of the given columns (rank decided by `rel`).
pub fn orthonormal_span(cols: &Mat, rel: f64) -> Mat {
    let n = cols.nrows();
    if cols.ncols() == 0 || n == 0 {
        return Mat::zeros(n, 0);
    }
    let svd = svd(cols);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel * smax && svd.singular_values[i] > 0.0)
        .collect();
    let mut q = Mat::zeros(n, keep.len());
    for (dst, &i) in keep.iter().enumerate() {
        q.set_column(dst, &u.column(i));
    }
    canonical_basis(&q)
}

/// Minimum-norm solution of `a x = b`, rejecting inconsistent right-hand sides.
pub fn solve_min_norm(a: &Mat, b: &Vector, tol: &Tolerance) -> Result<Vector, LinalgError> {
    if a.nrows() != b.len() {
        return Err(LinalgError::Shape(format!(
            "matrix has {} rows, rhs has {}",
            a.nrows(),
            b.len()
        )));
    }
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        let x = Vector::zeros(n);
        let res = b.norm();
        let bound = tol.verify_abs * (1.0 + b.norm());
        return if res <= bound {
            Ok(x)
        } else {
            Err(LinalgError::Inconsistent {
                residual: res,
                bound,
            })
        };
    }
    let svd = svd(a);
    let smax = svd.singular_values.max();
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let pinv_apply = |rhs: &Vector| {
        let mut x = Vector::zeros(n);
        for i in 0..svd.singular_values.len() {
            let s = svd.singular_values[i];
            if s > tol.rank_rel * smax && s > 0.0 {
                let coeff = u.column(i).dot(rhs) / s;
                x += v_t.row(i).transpose() * coeff;
            }
        }
        x
    };
    let mut x = pinv_apply(b);
    // A few refinement sweeps; the SVD factors are only accurate to a modest
    // multiple of machine precision.
    let mut res = (a * &x - b).norm();
    for _ in 0..3 {
        let r = b - a * &x;
        let cand = &x + pinv_apply(&r);
        let cres = (a * &cand - b).norm();
        if cres < res {
            x = cand;
            res = cres;
        } else {
            break;
        }
    }
    let bound = tol.verify_abs * (1.0 + a.norm() * x.norm() + b.norm());
    if res > bound {
        return Err(LinalgError::Inconsistent {
            residual: res,
            bound,
        });
    }
    Ok(x)
}

/// `exp(m t)`; used as a dynamics oracle.
pub fn expm(m: &Mat, t: f64) -> Result<Mat, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    Ok((m * t).exp())
}

/// Eigen-decomposition of a general real square matrix.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// One entry per returned eigenvector.
    pub eigenvalues: Vec<Complex64>,
    /// Unit-norm eigenvectors, column-matched with `eigenvalues`.
    pub eigenvectors: Vec<CVector>,
    /// Algebraic multiplicity of the cluster each eigenvector belongs to.
    pub algebraic_multiplicity: Vec<usize>,
    /// Index of the eigenvector carrying the conjugate eigenvalue (itself when real).
    pub conjugate: Vec<usize>,
    /// Full eigenvalue multiset, sorted by (real, imaginary).
    pub spectrum: Vec<Complex64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

fn cmp_complex(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
}

/// Eigenvalues (Schur form) and eigenvectors (null spaces of `m - λI`).
///
/// Eigenvalues closer than `degeneracy_rel * max|λ|` are clustered; each
/// cluster gets as many independent eigenvectors as its geometric multiplicity.
/// Vectors for eigenvalues in the lower half plane are conjugates of those in
/// the upper half plane, so conjugate pairing is exact.
pub fn eig_nonsymmetric(m: &Mat, tol: &Tolerance) -> Result<EigenPairs, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    check_finite(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(EigenPairs {
            eigenvalues: vec![],
            eigenvectors: vec![],
            algebraic_multiplicity: vec![],
            conjugate: vec![],
            spectrum: vec![],
        });
    }
    let schur = m
        .clone()
        .try_schur(f64::EPSILON, 100 * n.max(10))
        .ok_or(LinalgError::ConvergenceFailure)?;
    let mut spectrum: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    spectrum.sort_by(cmp_complex);

    let scale = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let width = tol.degeneracy_rel * scale;
    let clusters = cluster(&spectrum, width);

    let mnorm = m.norm();
    let mc: CMat = m.map(|x| Complex64::new(x, 0.0));
    let mut eigenvalues = Vec::new();
    let mut eigenvectors: Vec<CVector> = Vec::new();
    let mut mult = Vec::new();

    // Representative value and multiplicity per cluster.
    let reps: Vec<(Complex64, usize)> = clusters
        .iter()
        .map(|c| {
            let s: Complex64 = c.iter().map(|&i| spectrum[i]).sum();
            (s / c.len() as f64, c.len())
        })
        .collect();
    let is_real = |z: &Complex64| z.im.abs() <= width.max(f64::EPSILON * scale);

    let mut vectors_for: Vec<Option<Vec<CVector>>> = vec![None; reps.len()];
    for (ci, &(lam, alg)) in reps.iter().enumerate() {
        if lam.im < 0.0 && !is_real(&lam) {
            continue;
        }
        let vecs = if is_real(&lam) {
            let shifted = m - Mat::identity(n, n) * lam.re;
            let k = nullspace_smallest(&shifted, alg, mnorm, tol);
            k.into_iter()
                .map(|v| v.map(|x| Complex64::new(x, 0.0)))
                .collect()
        } else {
            let shifted = &mc - CMat::identity(n, n) * lam;
            complex_nullspace_smallest(&shifted, alg, mnorm, tol)
        };
        vectors_for[ci] = Some(vecs);
    }
    // Lower half-plane clusters take conjugates of their mirror cluster.
    for (ci, &(lam, _)) in reps.iter().enumerate() {
        if vectors_for[ci].is_some() {
            continue;
        }
        let mirror = (0..reps.len())
            .filter(|&k| vectors_for[k].is_some() && reps[k].0.im > 0.0)
            .min_by(|&a, &b| {
                let da = (reps[a].0 - lam.conj()).norm();
                let db = (reps[b].0 - lam.conj()).norm();
                da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
            });
        let vecs = match mirror {
            Some(k) => vectors_for[k]
                .as_ref()
                .map(|vs| vs.iter().map(|v| v.map(|z| z.conj())).collect())
                .unwrap_or_default(),
            None => Vec::new(),
        };
        vectors_for[ci] = Some(vecs);
    }

    for (ci, &(lam, alg)) in reps.iter().enumerate() {
        let lam = if is_real(&lam) {
            Complex64::new(lam.re, 0.0)
        } else {
            lam
        };
        for v in vectors_for[ci].take().unwrap_or_default() {
            eigenvalues.push(lam);
            eigenvectors.push(v);
            mult.push(alg);
        }
    }

    // Pair each vector with its conjugate partner.
    let mut conjugate = vec![usize::MAX; eigenvalues.len()];
    for i in 0..eigenvalues.len() {
        if eigenvalues[i].im == 0.0 {
            conjugate[i] = i;
            continue;
        }
        if conjugate[i] != usize::MAX {
            continue;
        }
        let target = eigenvectors[i].map(|z| z.conj());
        if let Some(j) = (0..eigenvalues.len()).find(|&j| {
            j != i
                && conjugate[j] == usize::MAX
                && (eigenvalues[j] - eigenvalues[i].conj()).norm() <= width.max(1e-300)
                && (&eigenvectors[j] - &target).norm() < 1e-12
        }) {
            conjugate[i] = j;
            conjugate[j] = i;
        } else {
            conjugate[i] = i;
        }
    }

    Ok(EigenPairs {
        eigenvalues,
        eigenvectors,
        algebraic_multiplicity: mult,
        conjugate,
        spectrum,
    })
}

fn cluster(sorted: &[Complex64], width: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut assigned = vec![false; sorted.len()];
    for i in 0..sorted.len() {
        if assigned[i] {
            continue;
        }
        let mut group = vec![i];
        assigned[i] = true;
        let mut k = 0;
        while k < group.len() {
            let a = sorted[group[k]];
            for j in 0..sorted.len() {
                if !assigned[j] && (sorted[j] - a).norm() <= width {
                    assigned[j] = true;
                    group.push(j);
                }
            }
            k += 1;
        }
        group.sort_unstable();
        clusters.push(group);
    }
    clusters
}

fn nullspace_smallest(a: &Mat, max_count: usize, mnorm: f64, tol: &Tolerance) -> Vec<Vector> {
    let (sv, v) = full_svd(a);
    let n = a.ncols();
    let thresh = tol.rank_rel.sqrt() * mnorm.max(f64::MIN_POSITIVE);
    let nullity = sv.iter().filter(|&&s| s <= thresh).count().max(1);
    let count = nullity.min(max_count).min(n);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut col = v.column(n - 1 - k).into_owned();
        fix_sign(&mut col);
        out.push(col);
    }
    out
}

fn complex_nullspace_smallest(
    a: &CMat,
    max_count: usize,
    mnorm: f64,
    tol: &Tolerance,
) -> Vec<CVector> {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| {
        svd.singular_values[x]
            .partial_cmp(&svd.singular_values[y])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let thresh = tol.rank_rel.sqrt() * mnorm.max(f64::MIN_POSITIVE);
    let nullity = order
        .iter()
        .filter(|&&i| svd.singular_values[i] <= thresh)
        .count()
        .max(1);
    let count = nullity.min(max_count).min(n);
    order
        .into_iter()
        .take(count)
        .map(|i| {
            // Rows of V^H are conjugated right singular vectors.
            let mut v: CVector = v_t.row(i).transpose().map(|z| z.conj());
            fix_phase(&mut v);
            v
        })
        .collect()
}

/// Normalize and rotate the phase so the largest component is real positive.
pub fn fix_phase(v: &mut CVector) {
    let nrm = v.norm();
    if nrm == 0.0 {
        return;
    }
    *v /= Complex64::new(nrm, 0.0);
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best_abs * (1.0 + 1e-9) {
            best_abs = z.norm();
            best = i;
        }
    }
    let ph = v[best] / v[best].norm();
    *v *= ph.conj();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn jacobi_svd_reconstructs() {
        let a = Mat::from_fn(5, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        for m in [
            a.clone(),
            a.transpose(),
            a.column(0) * a.column(1).transpose(),
        ] {
            let s = jacobi_svd(&m);
            let (u, v_t) = (s.u.unwrap(), s.v_t.unwrap());
            let rec = &u * Mat::from_diagonal(&s.singular_values) * &v_t;
            assert!((rec - &m).amax() < 1e-12);
            let k = u.ncols();
            assert!((u.transpose() * &u - Mat::identity(k, k)).amax() < 1e-12);
            assert!(s
                .singular_values
                .as_slice()
                .windows(2)
                .all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn kernel_of_rank_one() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let k = rank_kernel(&m, &tol());
        assert_eq!(k.rank, 1);
        let s = 1.0 / 2f64.sqrt();
        assert!((k.basis[(0, 0)] - s).abs() < 1e-14);
        assert!((k.basis[(1, 0)] + s).abs() < 1e-14);
    }

    #[test]
    fn kernel_of_zero_is_everything() {
        let k = rank_kernel(&Mat::zeros(3, 3), &tol());
        assert_eq!(k.rank, 0);
        assert!((k.basis.clone() - Mat::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn kernel_of_lcc_incidence() {
        let d = Mat::from_row_slice(1, 2, &[1.0, 1.0]);
        let k = rank_kernel(&d, &tol());
        assert_eq!(k.basis.ncols(), 1);
        assert!((k.basis[(0, 0)] - 0.5f64.sqrt()).abs() < 1e-14);
        let kt = rank_kernel(&d.transpose(), &tol());
        assert_eq!(kt.basis.ncols(), 0);
    }

    #[test]
    fn min_norm_examples() {
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let x = solve_min_norm(&a, &Vector::from_vec(vec![1.0, 0.0]), &tol()).unwrap();
        assert!((x - Vector::from_vec(vec![0.0, 1.0])).norm() < 1e-14);
        let a = Mat::from_row_slice(1, 2, &[1.0, 1.0]);
        let x = solve_min_norm(&a, &Vector::from_vec(vec![2.0]), &tol()).unwrap();
        assert!((x - Vector::from_vec(vec![1.0, 1.0])).norm() < 1e-14);
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let err = solve_min_norm(&a, &Vector::from_vec(vec![0.0, 1.0]), &tol());
        assert!(matches!(err, Err(LinalgError::Inconsistent { .. })));
    }

    #[test]
    fn expm_nilpotent_and_rotation() {
        let n = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = expm(&n, 3.0).unwrap();
        assert!((e - Mat::from_row_slice(2, 2, &[1.0, 3.0, 0.0, 1.0])).norm() < 1e-13);
        let j = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let th = 0.7f64;
        let e = expm(&j, th).unwrap();
        let r = Mat::from_row_slice(2, 2, &[th.cos(), th.sin(), -th.sin(), th.cos()]);
        assert!((e - r).norm() < 1e-13);
    }

    #[test]
    fn eig_oscillator_pair() {
        // JH with H = diag(1, 4)
        let jh = Mat::from_row_slice(2, 2, &[0.0, 4.0, -1.0, 0.0]);
        let ep = eig_nonsymmetric(&jh, &tol()).unwrap();
        assert_eq!(ep.len(), 2);
        for (l, v) in ep.eigenvalues.iter().zip(&ep.eigenvectors) {
            assert!((l.im.abs() - 2.0).abs() < 1e-12);
            let r = jh.map(|x| Complex64::new(x, 0.0)) * v - v * *l;
            assert!(r.norm() < 1e-12);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(ep.conjugate, vec![1, 0]);
    }

    #[test]
    fn eig_free_particle_jordan_block() {
        // JH with H = diag(0, 1)
        let jh = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let ep = eig_nonsymmetric(&jh, &tol()).unwrap();
        assert_eq!(ep.len(), 1);
        assert_eq!(ep.algebraic_multiplicity[0], 2);
        assert_eq!(ep.spectrum.len(), 2);
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 1e-9, 1e-8).is_err());
        assert!(Tolerance::new(1e-10, 1.0, 1e-8).is_err());
        assert!(Tolerance::new(1e-10, 1e-9, 1e-8).is_ok());
    }

    #[test]
    fn matrix_formats() {
        let m = parse_matrix(r#"{"rows":2,"cols":2,"entries":[1,2,3,4]}"#).unwrap();
        assert_eq!(m[(1, 0)], 3.0);
        let c = parse_matrix("1, 2\n3, 4\n").unwrap();
        assert_eq!(m, c);
        assert!(parse_matrix(r#"{"rows":2,"cols":2,"entries":[1,2,3]}"#).is_err());
        assert!(parse_matrix("1,2\n3\n").is_err());
    }
}
