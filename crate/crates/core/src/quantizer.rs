//! Quantized models by two routes: partial diagonalization of the linear
//! sector with junctions kept whole, and full linearization of the cosines.
//!
//! Conventions: `ħ = 1`, ladder operators `ε = (a + a†)/√2`, `f = −i(a − a†)/√2`.

use crate::circuit_builder::{CosineTerm, HamiltonianSystem, NonlinearKind};
use crate::linalg::{serde_mat, CMat, Mat, Tolerance};
use crate::williamson::{normal_form_with, Counts, NormalForm, NormalFormOptions, WilliamsonError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantizerError {
    #[error("junction '{junction}' has a compact phase; linearization needs the transmon-regime override")]
    CompactVariableRefused { junction: String },
    #[error("junction coordinate '{label}' still appears in the quadratic part (|h| = {value:.3e}); apply the charge shift first")]
    JunctionInQuadratic { label: String, value: f64 },
    #[error("routes disagree: worst frequency delta {max_delta:.3e} exceeds {tolerance:.1e}")]
    MismatchBeyondTolerance {
        max_delta: f64,
        tolerance: f64,
        report: CrossReport,
    },
    #[error(transparent)]
    Williamson(#[from] WilliamsonError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    TwoTier,
    Blackbox,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QuantizeOptions {
    /// Allow linearizing compact junction phases.
    pub transmon_override: bool,
}

/// One term `c·φ^order` of the expansion of `−cos φ` beyond second order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorTerm {
    pub order: u32,
    pub numerator: i64,
    pub denominator: u64,
    pub coefficient: f64,
}

/// Orders 4 through 12 of `−cos φ`, i.e. `(−1)^{m+1}/(2m)!` for `m = 2..6`.
pub fn taylor_tail() -> Vec<TaylorTerm> {
    (2u32..=6)
        .map(|m| {
            let denominator: u64 = (1..=2 * m as u64).product();
            let numerator = if m % 2 == 0 { -1 } else { 1 };
            TaylorTerm {
                order: 2 * m,
                numerator,
                denominator,
                coefficient: numerator as f64 / denominator as f64,
            }
        })
        .collect()
}

/// Residual nonlinear potential `−E cos(argᵀy)` or its tail `E Σ c_k (argᵀy)^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionTerm {
    pub name: String,
    pub kind: NonlinearKind,
    pub energy: f64,
    /// Phase covector in the model's output coordinates.
    pub arg: Vec<f64>,
    /// Empty when the cosine is kept whole.
    pub taylor: Vec<TaylorTerm>,
    /// Higher orders not listed.
    pub remainder: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMat> for ComplexMatrix {
    fn from(m: &CMat) -> Self {
        let part = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        ComplexMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedModel {
    pub route: Route,
    /// Descending.
    pub mode_freqs: Vec<f64>,
    /// `g = √½(G − iM)`, modes × junctions.
    #[serde(skip)]
    pub couplings: CMat,
    /// Cross block between mode positions and junction momenta (two-tier),
    /// or phase participation on mode positions (black box).
    #[serde(with = "serde_mat")]
    pub g_block: Mat,
    #[serde(with = "serde_mat")]
    pub m_block: Mat,
    pub junction_names: Vec<String>,
    pub junction_terms: Vec<JunctionTerm>,
    /// Junction phases in output coordinates, one row per junction.
    #[serde(with = "serde_mat")]
    pub mode_expressions: Mat,
    pub nd_dependency: Vec<bool>,
    pub counts: Counts,
    pub warnings: Vec<String>,
    /// Quadratic Hamiltonian in output coordinates.
    #[serde(with = "serde_mat")]
    pub h_out: Mat,
    /// `x_in = S y_out`.
    #[serde(with = "serde_mat")]
    pub s: Mat,
    /// Cosines in output coordinates, unexpanded.
    pub potential: Vec<CosineTerm>,
    pub provenance_ref: Vec<String>,
}

/// Serialized form of a [`QuantizedModel`].
#[derive(Debug, Clone, Serialize)]
pub struct ModelReport<'a> {
    pub route: Route,
    pub mode_freqs: &'a [f64],
    pub couplings: ComplexMatrix,
    pub junction_names: &'a [String],
    pub junction_terms: &'a [JunctionTerm],
    pub mode_expressions: Vec<Vec<f64>>,
    pub nd_dependency: &'a [bool],
    pub counts: Counts,
    pub warnings: &'a [String],
    pub provenance_ref: &'a [String],
}

impl QuantizedModel {
    pub fn report(&self) -> ModelReport<'_> {
        ModelReport {
            route: self.route,
            mode_freqs: &self.mode_freqs,
            couplings: ComplexMatrix::from(&self.couplings),
            junction_names: &self.junction_names,
            junction_terms: &self.junction_terms,
            mode_expressions: self
                .mode_expressions
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            nd_dependency: &self.nd_dependency,
            counts: self.counts,
            warnings: &self.warnings,
            provenance_ref: &self.provenance_ref,
        }
    }

    /// Output-coordinate quadratic Hamiltonian with cosines expanded to second order.
    pub fn linearized(&self) -> Mat {
        self.potential
            .iter()
            .fold(self.h_out.clone(), |acc, c| acc + c.quadratic())
    }
}

fn couplings_from(g: &Mat, m: &Mat) -> CMat {
    CMat::from_fn(g.nrows(), g.ncols(), |i, j| {
        Complex64::new(g[(i, j)], -m[(i, j)]) * FRAC_1_SQRT_2
    })
}

fn provenance_labels(hs: &HamiltonianSystem) -> Vec<String> {
    hs.provenance.iter().map(|t| t.label.clone()).collect()
}

fn transform_potential(potential: &[CosineTerm], s: &Mat) -> Vec<CosineTerm> {
    potential
        .iter()
        .map(|c| CosineTerm {
            arg: (s.transpose() * c.arg_vector()).iter().copied().collect(),
            ..c.clone()
        })
        .collect()
}

fn expressions(potential: &[CosineTerm]) -> Mat {
    let dim = potential.first().map_or(0, |c| c.arg.len());
    Mat::from_fn(potential.len(), dim, |i, j| potential[i].arg[j])
}

/// Permutation sorting the oscillator columns by descending frequency.
fn descending(nf: &NormalForm) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..nf.omega.len()).collect();
    idx.sort_by(|&a, &b| nf.omega[b].total_cmp(&nf.omega[a]));
    idx
}

/// Partial diagonalization: Williamson on the complement of the junction
/// conjugate pairs, cosines kept whole and coupled through junction momenta.
pub fn two_tier(hs: &HamiltonianSystem, tol: &Tolerance) -> Result<QuantizedModel, QuantizerError> {
    let n = hs.layout.n;
    let dim = 2 * n;
    let junctions = hs.registry.junction_coords();
    let scale = hs.h.amax().max(1.0);
    for &c in &junctions {
        let v = hs.h.row(c).amax();
        if v > tol.verify_abs * scale {
            return Err(QuantizerError::JunctionInQuadratic {
                label: hs.layout.labels.get(c).cloned().unwrap_or_default(),
                value: v,
            });
        }
    }
    let rest: Vec<usize> = (0..n).filter(|i| !junctions.contains(i)).collect();
    let keep: Vec<usize> = rest
        .iter()
        .copied()
        .chain(rest.iter().map(|i| i + n))
        .collect();
    let h_rest = Mat::from_fn(keep.len(), keep.len(), |i, j| hs.h[(keep[i], keep[j])]);
    let nf = normal_form_with(&h_rest, tol, NormalFormOptions { symplectic_w: true })?;

    // Output coordinates: [canonical S columns on the rest | junction pairs].
    let cs = nf.canonical_s();
    let r = rest.len();
    let nj = junctions.len();
    let mut s = Mat::zeros(dim, dim);
    let out_pos = |k: usize| if k < r { k } else { k - r + n };
    for (col, src) in cs.column_iter().enumerate() {
        let dst = out_pos(col);
        for (row, &x) in src.iter().enumerate() {
            s[(keep[row], dst)] = x;
        }
    }
    for (k, &c) in junctions.iter().enumerate() {
        s[(c, r + k)] = 1.0;
        s[(c + n, n + r + k)] = 1.0;
    }

    // Within the harmonic block of the canonical order, modes sit after W_q and E.
    let c = &nf.classification;
    let offset = c.n_nd + c.n_f;
    let order = descending(&nf);
    let mode_q: Vec<usize> = order.iter().map(|&k| offset + k).collect();
    let mode_p: Vec<usize> = mode_q.iter().map(|&k| k + n).collect();
    let pi_j: Vec<usize> = (0..nj).map(|k| n + r + k).collect();

    let mut h_out = s.transpose() * &hs.h * &s;
    let mut g = Mat::from_fn(mode_q.len(), nj, |i, j| h_out[(mode_q[i], pi_j[j])]);
    let mut m = Mat::from_fn(mode_q.len(), nj, |i, j| h_out[(mode_p[i], pi_j[j])]);

    // Gauge: rotate each pair so the last junction with nonzero coupling has M = 0, G > 0.
    let mut rot = Mat::identity(dim, dim);
    for i in 0..mode_q.len() {
        let Some(last) = (0..nj)
            .rev()
            .find(|&j| g[(i, j)].hypot(m[(i, j)]) > tol.verify_abs * scale)
        else {
            continue;
        };
        let theta = m[(i, last)].atan2(g[(i, last)]);
        let (sn, cs) = theta.sin_cos();
        let (q, p) = (mode_q[i], mode_p[i]);
        rot[(q, q)] = cs;
        rot[(p, q)] = sn;
        rot[(q, p)] = -sn;
        rot[(p, p)] = cs;
        for j in 0..nj {
            let (gv, mv) = (g[(i, j)], m[(i, j)]);
            g[(i, j)] = cs * gv + sn * mv;
            m[(i, j)] = -sn * gv + cs * mv;
        }
        m[(i, last)] = 0.0;
    }
    let s = s * &rot;
    h_out = rot.transpose() * h_out * &rot;
    h_out = (&h_out + h_out.transpose()) * 0.5;

    let mut warnings = Vec::new();
    let harmonic: Vec<usize> = mode_q.iter().chain(&mode_p).copied().collect();
    let stray = (0..r)
        .chain(n..n + r)
        .filter(|k| !harmonic.contains(k))
        .flat_map(|k| pi_j.iter().map(move |&j| (k, j)))
        .map(|(k, j)| h_out[(k, j)].abs())
        .fold(0.0, f64::max);
    if stray > tol.verify_abs * scale {
        warnings.push(format!(
            "junction momenta also couple to free or nondynamical coordinates (max {stray:.3e}); these terms are not part of g"
        ));
    }

    let potential = transform_potential(&hs.potential, &s);
    let junction_terms = potential
        .iter()
        .map(|c| JunctionTerm {
            name: c.name.clone(),
            kind: c.kind,
            energy: c.energy,
            arg: c.arg.clone(),
            taylor: Vec::new(),
            remainder: None,
        })
        .collect();
    Ok(QuantizedModel {
        route: Route::TwoTier,
        mode_freqs: order.iter().map(|&k| nf.omega[k]).collect(),
        couplings: couplings_from(&g, &m),
        g_block: g,
        m_block: m,
        junction_names: potential.iter().map(|c| c.name.clone()).collect(),
        junction_terms,
        mode_expressions: expressions(&potential),
        nd_dependency: vec![false; potential.len()],
        counts: Counts::from(&nf.classification),
        warnings,
        h_out,
        s,
        potential,
        provenance_ref: provenance_labels(hs),
    })
}

/// Full linearization: cosines split at second order, Williamson on everything,
/// nonlinear tails re-expressed in normal coordinates.
pub fn blackbox(
    hs: &HamiltonianSystem,
    tol: &Tolerance,
    opts: QuantizeOptions,
) -> Result<QuantizedModel, QuantizerError> {
    for c in &hs.potential {
        let compact = hs
            .registry
            .coords
            .get(c.coordinate)
            .is_some_and(|x| x.compact);
        if compact && c.kind == NonlinearKind::Josephson && !opts.transmon_override {
            return Err(QuantizerError::CompactVariableRefused {
                junction: c.name.clone(),
            });
        }
    }
    let nf = normal_form_with(
        &hs.linearized(),
        tol,
        NormalFormOptions { symplectic_w: true },
    )?;
    let s = nf.s.clone();
    let potential = transform_potential(&hs.potential, &s);
    let expr = expressions(&potential);

    let order = descending(&nf);
    let eps: Vec<usize> = order.iter().map(|&k| nf.eps_cols().start + k).collect();
    let fs: Vec<usize> = order.iter().map(|&k| nf.osc_f_cols().start + k).collect();
    let nj = potential.len();
    let g = Mat::from_fn(eps.len(), nj, |i, j| expr[(j, eps[i])]);
    let m = Mat::from_fn(eps.len(), nj, |i, j| expr[(j, fs[i])]);

    let w = nf.w_cols();
    let nd_dependency: Vec<bool> = (0..nj)
        .map(|j| {
            let row_scale = expr.row(j).amax().max(1.0);
            w.clone()
                .any(|k| expr[(j, k)].abs() > tol.verify_abs * row_scale)
        })
        .collect();
    let mut warnings = Vec::new();
    if nd_dependency.iter().any(|&b| b) {
        warnings.push(
            "junction phases depend on nondynamical coordinates; the black-box expansion is unreliable here and the two-tier route should be preferred".into(),
        );
    }
    let junction_terms = potential
        .iter()
        .map(|c| JunctionTerm {
            name: c.name.clone(),
            kind: c.kind,
            energy: c.energy,
            arg: c.arg.clone(),
            taylor: taylor_tail(),
            remainder: Some("O(phi^14)".into()),
        })
        .collect();
    let h_lin = nf.h_diag.clone();
    Ok(QuantizedModel {
        route: Route::Blackbox,
        mode_freqs: order.iter().map(|&k| nf.omega[k]).collect(),
        couplings: couplings_from(&g, &m),
        g_block: g,
        m_block: m,
        junction_names: potential.iter().map(|c| c.name.clone()).collect(),
        junction_terms,
        mode_expressions: expr,
        nd_dependency,
        counts: Counts::from(&nf.classification),
        warnings,
        // The quadratic cosine parts are already inside h_lin.
        h_out: h_lin
            - potential
                .iter()
                .fold(Mat::zeros(s.nrows(), s.ncols()), |a, c| a + c.quadratic()),
        s,
        potential,
        provenance_ref: provenance_labels(hs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossReport {
    /// Frequencies of the two-tier model after second-order expansion.
    pub two_tier_linearized: Vec<f64>,
    pub blackbox: Vec<f64>,
    pub deltas: Vec<f64>,
    pub max_delta: f64,
}

/// Expand the two-tier cosines to second order, diagonalize again, and compare
/// frequencies with the black-box model.
pub fn cross_validate(
    two_tier_model: &QuantizedModel,
    blackbox_model: &QuantizedModel,
    tol: &Tolerance,
    max_delta: f64,
) -> Result<CrossReport, QuantizerError> {
    let nf = normal_form_with(
        &two_tier_model.linearized(),
        tol,
        NormalFormOptions::default(),
    )?;
    let mut a = nf.omega.clone();
    a.sort_by(|x, y| y.total_cmp(x));
    let b = blackbox_model.mode_freqs.clone();
    let deltas: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect();
    let worst = if a.len() == b.len() {
        deltas.iter().copied().fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let report = CrossReport {
        two_tier_linearized: a,
        blackbox: b,
        deltas,
        max_delta: worst,
    };
    if worst > max_delta {
        return Err(QuantizerError::MismatchBeyondTolerance {
            max_delta: worst,
            tolerance: max_delta,
            report,
        });
    }
    Ok(report)
}
