//! Lowering of netlists to quadratic Hamiltonians plus cosine potentials.
//!
//! Pipeline: [`eliminate_transformers`] → [`assemble_lagrangian`] →
//! [`legendre`] → [`charge_shift`] → [`rescale`]. Phase-space coordinates are
//! ordered `(Q, Φ, P, Π)`: inductor loop charges, capacitor branch fluxes and
//! their conjugate momenta. Units: `e = ħ = 1`, `Φ₀ = 1`.

use crate::linalg::{serde_mat, solve_min_norm, LinalgError, Mat, Tolerance, Vector};
use crate::netlist::{self, Diagnostic, Incidence, Netlist, Target};
use crate::williamson::{canonical_j, PhaseSpaceLayout};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("netlist is not buildable: {}", first_error(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("unsupported element '{name}': {reason}")]
    UnsupportedElement { name: String, reason: String },
    #[error("transformers must be eliminated before assembly")]
    TransformersPresent,
    #[error("Z is singular on the junction block (residual {residual:.3e})")]
    SingularZ { residual: f64 },
    #[error("transformation '{label}' is not symplectic (residual {residual:.3e})")]
    NotSymplectic { label: String, residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn first_error(d: &[Diagnostic]) -> String {
    d.iter()
        .find(|x| x.severity == netlist::Severity::Error)
        .map(|x| x.to_string())
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordKind {
    Flux,
    Charge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordRole {
    /// Carries a nonlinear element.
    Junction,
    /// Capacitor flux without a junction.
    Coupling,
    /// Inductor loop charge without a junction.
    Internal,
}

/// One configuration coordinate; its conjugate momentum sits `n` slots later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coordinate {
    pub element: String,
    pub kind: CoordKind,
    pub role: CoordRole,
    pub compact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    pub layout: PhaseSpaceLayout,
    pub coords: Vec<Coordinate>,
}

impl Registry {
    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Positions of junction-role coordinates.
    pub fn junction_coords(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.coords[i].role == CoordRole::Junction)
            .collect()
    }

    /// Permutation listing non-junction positions, their momenta, then
    /// junction positions and junction momenta.
    pub fn display_permutation(&self) -> Vec<usize> {
        let n = self.n();
        let (jn, rest): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| self.coords[i].role == CoordRole::Junction);
        rest.iter()
            .copied()
            .chain(rest.iter().map(|i| i + n))
            .chain(jn.iter().copied())
            .chain(jn.iter().map(|i| i + n))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearKind {
    Josephson,
    PhaseSlip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearTerm {
    pub name: String,
    pub kind: NonlinearKind,
    /// Position index in the registry.
    pub coordinate: usize,
    pub energy: f64,
}

/// Quadratic Lagrangian data `½(Φ̇ᵀCΦ̇ + Q̇ᵀLQ̇ − 2Q̇ᵀDΦ + Q̇ᵀZQ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSystem {
    #[serde(with = "serde_mat")]
    pub c_mat: Mat,
    #[serde(with = "serde_mat")]
    pub l_mat: Mat,
    /// Rows: inductors, columns: capacitors.
    #[serde(with = "serde_mat")]
    pub d_mat: Mat,
    #[serde(with = "serde_mat")]
    pub z_mat: Mat,
    pub registry: Registry,
    pub nonlinear: Vec<NonlinearTerm>,
    /// Reference resistance for rescaling charges.
    pub r_ref: f64,
    /// Reference inductance for rescaling fluxes.
    pub l_ref: f64,
}

impl CircuitSystem {
    pub fn m_l(&self) -> usize {
        self.l_mat.nrows()
    }

    pub fn n_c(&self) -> usize {
        self.c_mat.nrows()
    }

    /// Build from matrices; junctions given as `(name, capacitor index, E_J, island)`.
    pub fn from_matrices(
        c: &[f64],
        l: &[f64],
        d: Mat,
        z: Mat,
        junctions: &[(String, usize, f64, bool)],
        cap_names: &[String],
        ind_names: &[String],
    ) -> Self {
        let m_l = l.len();
        let mut coords: Vec<Coordinate> = ind_names
            .iter()
            .map(|n| Coordinate {
                element: n.clone(),
                kind: CoordKind::Charge,
                role: CoordRole::Internal,
                compact: false,
            })
            .chain(cap_names.iter().map(|n| Coordinate {
                element: n.clone(),
                kind: CoordKind::Flux,
                role: CoordRole::Coupling,
                compact: false,
            }))
            .collect();
        let mut nonlinear = Vec::new();
        for (name, cap, ej, island) in junctions {
            let idx = m_l + cap;
            coords[idx].role = CoordRole::Junction;
            coords[idx].compact = *island;
            nonlinear.push(NonlinearTerm {
                name: name.clone(),
                kind: NonlinearKind::Josephson,
                coordinate: idx,
                energy: *ej,
            });
        }
        let labels = coords
            .iter()
            .map(position_label)
            .chain(coords.iter().map(momentum_label))
            .collect();
        let layout = PhaseSpaceLayout {
            n: coords.len(),
            labels,
        };
        let r_ref = reference_resistance(&z);
        CircuitSystem {
            c_mat: Mat::from_diagonal(&Vector::from_row_slice(c)),
            l_mat: Mat::from_diagonal(&Vector::from_row_slice(l)),
            d_mat: d,
            z_mat: z,
            registry: Registry { layout, coords },
            nonlinear,
            r_ref,
            l_ref: l.first().copied().unwrap_or(1.0),
        }
    }
}

fn position_label(c: &Coordinate) -> String {
    match c.kind {
        CoordKind::Charge => format!("Q_{}", c.element),
        CoordKind::Flux => format!("Phi_{}", c.element),
    }
}

fn momentum_label(c: &Coordinate) -> String {
    match c.kind {
        CoordKind::Charge => format!("P_{}", c.element),
        CoordKind::Flux => format!("Pi_{}", c.element),
    }
}

fn reference_resistance(z: &Mat) -> f64 {
    for i in 0..z.nrows() {
        for j in i + 1..z.ncols() {
            if z[(i, j)] != 0.0 {
                return z[(i, j)].abs();
            }
        }
    }
    1.0
}

/// Replace every transformer by the couplings it induces: an inductor wired
/// to left port `k` picks up `Σ_r N[r][k]·(right-port r incidences)`.
pub fn eliminate_transformers(n: &Netlist) -> Netlist {
    let mut out = n.clone();
    out.transformers.clear();
    for ind in out.inductors.iter_mut() {
        let mut coeffs: Vec<(String, f64)> = Vec::new();
        let mut add = |cap: &str, v: f64| {
            if let Some(e) = coeffs.iter_mut().find(|(c, _)| c == cap) {
                e.1 += v;
            } else {
                coeffs.push((cap.to_string(), v));
            }
        };
        for inc in &ind.incidences {
            match &inc.target {
                Target::Capacitor(c) => add(c, inc.coeff),
                Target::TransformerPort { transformer, port } => {
                    let Some(t) = n.transformers.iter().find(|t| &t.name == transformer) else {
                        continue;
                    };
                    for (r, row) in t.turns.iter().enumerate() {
                        let turns = row.get(port - 1).copied().unwrap_or(0.0);
                        if turns == 0.0 {
                            continue;
                        }
                        for right in t.right_ports.get(r).map(Vec::as_slice).unwrap_or(&[]) {
                            if let Target::Capacitor(c) = &right.target {
                                add(c, inc.coeff * turns * right.coeff);
                            }
                        }
                    }
                }
            }
        }
        // Canonical order: capacitor declaration order.
        coeffs.sort_by_key(|(c, _)| n.capacitor_index(c).unwrap_or(usize::MAX));
        ind.incidences = coeffs
            .into_iter()
            .filter(|(_, v)| *v != 0.0)
            .map(|(c, v)| Incidence {
                target: Target::Capacitor(c),
                coeff: v,
            })
            .collect();
    }
    out
}

/// Matrices and registry of a validated, transformer-free netlist.
pub fn assemble_lagrangian(n: &Netlist) -> Result<CircuitSystem, CircuitError> {
    if let Some(c) = n.circulators.first() {
        return Err(CircuitError::UnsupportedElement {
            name: c.name.clone(),
            reason: "an ideal circulator has a singular impedance description and requires an extra constraint".into(),
        });
    }
    if !n.transformers.is_empty() {
        return Err(CircuitError::TransformersPresent);
    }
    let diags = netlist::validate(n);
    if !netlist::is_buildable(&diags) {
        return Err(CircuitError::Invalid(diags));
    }
    let m_l = n.inductors.len();
    let n_c = n.capacitors.len();
    let mut d = Mat::zeros(m_l, n_c);
    for (i, ind) in n.inductors.iter().enumerate() {
        for inc in &ind.incidences {
            if let Target::Capacitor(c) = &inc.target {
                let k = n.capacitor_index(c).expect("resolved by parser");
                d[(i, k)] += inc.coeff;
            }
        }
    }
    let mut z = Mat::zeros(m_l, m_l);
    for g in &n.gyrators {
        let a = n
            .inductor_index(&g.charge_ports[0])
            .expect("resolved by parser");
        let b = n
            .inductor_index(&g.charge_ports[1])
            .expect("resolved by parser");
        z[(a, b)] -= g.r;
        z[(b, a)] += g.r;
    }
    let junctions: Vec<(String, usize, f64, bool)> = n
        .junctions
        .iter()
        .map(|j| {
            let cap = j.shunt_cap.as_deref().expect("validated");
            (
                j.name.clone(),
                n.capacitor_index(cap).expect("resolved by parser"),
                j.ej,
                j.island,
            )
        })
        .collect();
    let caps: Vec<f64> = n.capacitors.iter().map(|c| c.value).collect();
    let inds: Vec<f64> = n.inductors.iter().map(|l| l.value).collect();
    let cap_names: Vec<String> = n.capacitors.iter().map(|c| c.name.clone()).collect();
    let ind_names: Vec<String> = n.inductors.iter().map(|l| l.name.clone()).collect();
    let mut cs =
        CircuitSystem::from_matrices(&caps, &inds, d, z, &junctions, &cap_names, &ind_names);
    for p in &n.phase_slips {
        let idx = n.inductor_index(&p.series_ind).expect("resolved by parser");
        cs.registry.coords[idx].role = CoordRole::Junction;
        cs.nonlinear.push(NonlinearTerm {
            name: p.name.clone(),
            kind: NonlinearKind::PhaseSlip,
            coordinate: idx,
            energy: p.eps,
        });
    }
    Ok(cs)
}

/// Validate, eliminate transformers and assemble.
pub fn build(n: &Netlist) -> Result<CircuitSystem, CircuitError> {
    if let Some(c) = n.circulators.first() {
        return Err(CircuitError::UnsupportedElement {
            name: c.name.clone(),
            reason: "an ideal circulator has a singular impedance description and requires an extra constraint".into(),
        });
    }
    let diags = netlist::validate(n);
    if !netlist::is_buildable(&diags) {
        return Err(CircuitError::Invalid(diags));
    }
    assemble_lagrangian(&eliminate_transformers(n))
}

/// `−E cos(argᵀx)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineTerm {
    pub name: String,
    pub kind: NonlinearKind,
    pub energy: f64,
    /// Registry position of the element's own coordinate.
    pub coordinate: usize,
    /// Phase covector in the current phase-space coordinates.
    pub arg: Vec<f64>,
    /// Period of the potential in the original coordinate.
    pub period: f64,
}

impl CosineTerm {
    pub fn arg_vector(&self) -> Vector {
        Vector::from_row_slice(&self.arg)
    }

    /// Quadratic part `E·arg·argᵀ` (the `½xᵀ(·)x` convention).
    pub fn quadratic(&self) -> Mat {
        let a = self.arg_vector();
        &a * a.transpose() * self.energy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub label: String,
    /// Maps new coordinates to old ones: `x_old = T x_new`.
    #[serde(with = "serde_mat")]
    pub matrix: Mat,
}

/// Quadratic Hamiltonian `½xᵀhx` plus cosine potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSystem {
    #[serde(with = "serde_mat")]
    pub h: Mat,
    pub layout: PhaseSpaceLayout,
    pub registry: Registry,
    pub potential: Vec<CosineTerm>,
    pub provenance: Vec<Transform>,
    #[serde(skip)]
    pub circuit: Option<CircuitSystem>,
}

impl HamiltonianSystem {
    /// Apply the canonical change of variables `x_old = T x_new`.
    pub fn transformed(&self, t: &Mat, label: &str) -> Result<Self, CircuitError> {
        let n = self.layout.n;
        let j = canonical_j(n);
        let residual = (t.transpose() * &j * t - &j).norm();
        if residual > 1e-10 * (1.0 + t.norm().powi(2)) {
            return Err(CircuitError::NotSymplectic {
                label: label.into(),
                residual,
            });
        }
        let h = t.transpose() * &self.h * t;
        let h = (&h + h.transpose()) * 0.5;
        let potential = self
            .potential
            .iter()
            .map(|c| {
                let arg = t.transpose() * c.arg_vector();
                CosineTerm {
                    arg: arg.iter().copied().collect(),
                    ..c.clone()
                }
            })
            .collect();
        let mut provenance = self.provenance.clone();
        provenance.push(Transform {
            label: label.into(),
            matrix: t.clone(),
        });
        Ok(HamiltonianSystem {
            h,
            layout: self.layout.clone(),
            registry: self.registry.clone(),
            potential,
            provenance,
            circuit: self.circuit.clone(),
        })
    }

    /// Product of all recorded transformations.
    pub fn total_transform(&self) -> Mat {
        let dim = self.h.nrows();
        self.provenance
            .iter()
            .fold(Mat::identity(dim, dim), |acc, t| acc * &t.matrix)
    }

    /// Quadratic part with all cosines expanded to second order.
    pub fn linearized(&self) -> Mat {
        self.potential
            .iter()
            .fold(self.h.clone(), |acc, c| acc + c.quadratic())
    }

    /// `h` with rows and columns permuted by [`Registry::display_permutation`].
    pub fn display_h(&self) -> Mat {
        let p = self.registry.display_permutation();
        Mat::from_fn(p.len(), p.len(), |i, j| self.h[(p[i], p[j])])
    }
}

/// `h` for `½ΠᵀC⁻¹Π + ½(P − ½ZQ + DΦ)ᵀL⁻¹(P − ½ZQ + DΦ)`; cosines carried over.
pub fn legendre(cs: &CircuitSystem) -> HamiltonianSystem {
    let m = cs.m_l();
    let nc = cs.n_c();
    let n = m + nc;
    let mut v = Mat::zeros(m, 2 * n);
    if m > 0 {
        v.view_mut((0, 0), (m, m)).copy_from(&(&cs.z_mat * -0.5));
        if nc > 0 {
            v.view_mut((0, m), (m, nc)).copy_from(&cs.d_mat);
        }
        v.view_mut((0, n), (m, m)).copy_from(&Mat::identity(m, m));
    }
    let l_inv = Mat::from_diagonal(&cs.l_mat.diagonal().map(|x| 1.0 / x));
    let mut h = v.transpose() * l_inv * &v;
    for k in 0..nc {
        h[(n + m + k, n + m + k)] += 1.0 / cs.c_mat[(k, k)];
    }
    let potential = cs
        .nonlinear
        .iter()
        .map(|t| {
            let kappa = match t.kind {
                NonlinearKind::Josephson => 2.0 * PI,
                NonlinearKind::PhaseSlip => PI / 2.0,
            };
            let mut arg = vec![0.0; 2 * n];
            arg[t.coordinate] = kappa;
            CosineTerm {
                name: t.name.clone(),
                kind: t.kind,
                energy: t.energy,
                coordinate: t.coordinate,
                arg,
                period: 2.0 * PI / kappa,
            }
        })
        .collect();
    HamiltonianSystem {
        h,
        layout: cs.registry.layout.clone(),
        registry: cs.registry.clone(),
        potential,
        provenance: Vec::new(),
        circuit: Some(cs.clone()),
    }
}

/// Shift inductor charges by junction fluxes, `Q = Q̃ + XΦ̃_J` with `½ZX = D_J`,
/// so junction fluxes drop out of the quadratic part.
pub fn charge_shift(
    hs: &HamiltonianSystem,
    tol: &Tolerance,
) -> Result<HamiltonianSystem, CircuitError> {
    let n = hs.layout.n;
    let dim = 2 * n;
    let Some(cs) = hs.circuit.as_ref() else {
        return hs.transformed(&Mat::identity(dim, dim), "charge-shift");
    };
    let m = cs.m_l();
    let jcols: Vec<usize> = cs
        .nonlinear
        .iter()
        .filter(|t| t.kind == NonlinearKind::Josephson)
        .map(|t| t.coordinate)
        .collect();
    let mut a = Mat::identity(n, n);
    let half_z = &cs.z_mat * 0.5;
    for &coord in &jcols {
        let dj = cs.d_mat.column(coord - m).into_owned();
        if dj.amax() == 0.0 {
            continue;
        }
        let x = match solve_min_norm(&half_z, &dj, tol) {
            Ok(x) => x,
            Err(LinalgError::Inconsistent { residual, .. }) => {
                return Err(CircuitError::SingularZ { residual })
            }
            Err(e) => return Err(e.into()),
        };
        for i in 0..m {
            a[(i, coord)] = x[i];
        }
    }
    let a_inv_t = a
        .clone()
        .try_inverse()
        .expect("unit triangular")
        .transpose();
    let mut t = Mat::zeros(dim, dim);
    t.view_mut((0, 0), (n, n)).copy_from(&a);
    t.view_mut((n, n), (n, n)).copy_from(&a_inv_t);
    let out = hs.transformed(&t, "charge-shift")?;
    let scale = out.h.amax().max(1.0);
    for &coord in &jcols {
        let row = out.h.row(coord).amax();
        if row > tol.verify_abs * scale {
            return Err(CircuitError::SingularZ { residual: row });
        }
    }
    Ok(out)
}

/// Make coordinates dimensionally homogeneous: `Q̄ = √R Q̃`, `P̄ = P̃/√R`,
/// `Φ̄ = C^{1/4}L^{−1/4}Φ̃`, `Π̄ = C^{−1/4}L^{1/4}Π̃`.
pub fn rescale(hs: &HamiltonianSystem) -> Result<HamiltonianSystem, CircuitError> {
    let n = hs.layout.n;
    let dim = 2 * n;
    let Some(cs) = hs.circuit.as_ref() else {
        return hs.transformed(&Mat::identity(dim, dim), "rescale");
    };
    let m = cs.m_l();
    let mut t = Mat::identity(dim, dim);
    let sr = cs.r_ref.sqrt();
    for i in 0..m {
        t[(i, i)] = 1.0 / sr;
        t[(n + i, n + i)] = sr;
    }
    for k in 0..cs.n_c() {
        let alpha = (cs.c_mat[(k, k)] / cs.l_ref).powf(0.25);
        t[(m + k, m + k)] = 1.0 / alpha;
        t[(n + m + k, n + m + k)] = alpha;
    }
    hs.transformed(&t, "rescale")
}

/// Legendre transform, charge shift and rescaling in sequence.
pub fn hamiltonian(cs: &CircuitSystem, tol: &Tolerance) -> Result<HamiltonianSystem, CircuitError> {
    rescale(&charge_shift(&legendre(cs), tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse;
    use crate::williamson::classify_dof;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn lcc_matrices() {
        let n = parse("C c1 1\nC c2 2\nL l1 3 c1:+ c2:+").unwrap();
        let cs = assemble_lagrangian(&n).unwrap();
        assert_eq!(
            cs.c_mat,
            Mat::from_diagonal(&Vector::from_vec(vec![1.0, 2.0]))
        );
        assert_eq!(cs.l_mat[(0, 0)], 3.0);
        assert_eq!(cs.d_mat, Mat::from_row_slice(1, 2, &[1.0, 1.0]));
        let hs = legendre(&cs);
        let c = classify_dof(&hs.h, &tol()).unwrap();
        assert_eq!((c.n_nd, c.n_f, c.n_ho), (1, 1, 1));
    }

    #[test]
    fn lone_capacitor_is_a_free_particle() {
        let cs = assemble_lagrangian(&parse("C c 2").unwrap()).unwrap();
        let hs = legendre(&cs);
        assert_eq!(hs.h, Mat::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.5]));
        let c = classify_dof(&hs.h, &tol()).unwrap();
        assert_eq!((c.n_nd, c.n_f, c.n_ho), (0, 1, 0));
    }

    #[test]
    fn lc_tank_frequency() {
        let cs = assemble_lagrangian(&parse("C c 2\nL l 8 c:+").unwrap()).unwrap();
        let nf = crate::williamson::normal_form(&legendre(&cs).h, &tol()).unwrap();
        assert_eq!(nf.omega.len(), 1);
        assert!((nf.omega[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn identity_transformer_is_transparent() {
        let direct = parse("C a 1\nL l 1 a:+").unwrap();
        let via = parse("C a 1\nTR t turns=1 right=a:+\nL l 1 t.1:+").unwrap();
        let e = eliminate_transformers(&via);
        assert_eq!(
            assemble_lagrangian(&e).unwrap().d_mat,
            assemble_lagrangian(&direct).unwrap().d_mat
        );
        let zero = parse("C a 1\nTR t turns=0 right=a:+\nL l 1 t.1:+").unwrap();
        let cs = assemble_lagrangian(&eliminate_transformers(&zero)).unwrap();
        assert_eq!(cs.d_mat, Mat::zeros(1, 1));
    }

    #[test]
    fn circulator_rejected() {
        let n = parse("L a 1\nL b 1\nL c 1\nCIRC x 1 a b c").unwrap();
        assert!(matches!(
            build(&n),
            Err(CircuitError::UnsupportedElement { .. })
        ));
    }

    #[test]
    fn singular_z_with_junction() {
        let n = parse("C cj 1\nL l 1 cj:+\nJJ j 1 cj").unwrap();
        let cs = build(&n).unwrap();
        assert!(matches!(
            charge_shift(&legendre(&cs), &tol()),
            Err(CircuitError::SingularZ { .. })
        ));
    }

    #[test]
    fn no_junctions_identity_shift() {
        let cs = build(&parse("C c 1\nL l 1 c:+").unwrap()).unwrap();
        let hs = legendre(&cs);
        let shifted = charge_shift(&hs, &tol()).unwrap();
        assert_eq!(shifted.h, hs.h);
        assert_eq!(shifted.provenance.len(), 1);
    }

    #[test]
    fn rescale_round_trip() {
        let cs = build(&parse("C c 3\nC d 0.2\nL l 5 c:+ d:-\nL m 2 c:+\nGYR g 7 l m").unwrap())
            .unwrap();
        let hs = legendre(&cs);
        let r = rescale(&hs).unwrap();
        let t = &r.provenance[0].matrix;
        let back = r
            .transformed(&t.clone().try_inverse().unwrap(), "inverse")
            .unwrap();
        assert!((back.h - &hs.h).amax() < 1e-12);
    }

    #[test]
    fn unit_rescale_is_identity() {
        let cs = build(&parse("C c 1\nL l 1 c:+\nL m 1\nGYR g 1 l m").unwrap()).unwrap();
        let hs = legendre(&cs);
        let r = rescale(&hs).unwrap();
        assert_eq!(r.provenance[0].matrix, Mat::identity(6, 6));
    }
}
