//! Worked-example generators: two charged particles in a magnetic field,
//! the series LC-C circuit and the gyrator/transformer black box.

use crate::circuit_builder::{self, CircuitError, CircuitSystem, HamiltonianSystem};
use crate::linalg::{Mat, Tolerance};
use crate::netlist;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

fn positive(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            reason: "must be non-negative and finite",
        })
    }
}

/// Two unit-charge particles of mass `m` joined by a spring `k` in a field `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauParams {
    pub m: f64,
    pub k: f64,
    pub b: f64,
}

impl LandauParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        positive("m", self.m)?;
        non_negative("k", self.k)?;
        non_negative("b", self.b)
    }

    /// Minimal-coupling constant `g = b/2`.
    pub fn g(&self) -> f64 {
        self.b / 2.0
    }

    /// Cyclotron frequency `b/m`.
    pub fn omega_c(&self) -> f64 {
        self.b / self.m
    }

    /// Vertical oscillator frequency `√(2k/m)`.
    pub fn omega_z(&self) -> f64 {
        (2.0 * self.k / self.m).sqrt()
    }

    /// Coupling parameter of the rescaled in-plane matrix, `χ² = k/(mΩ_c²)`.
    pub fn chi(&self) -> f64 {
        (self.k / self.m).sqrt() / self.omega_c()
    }

    /// Parameters with `Ω_c = 1` and the given `χ`.
    pub fn at_chi(chi: f64) -> Self {
        LandauParams {
            m: 1.0,
            k: chi * chi,
            b: 1.0,
        }
    }
}

/// Vertical sector in `(z₁, z₂, p₁, p₂)`.
pub fn landau_z(p: &LandauParams) -> Result<Mat, ModelError> {
    p.validate()?;
    let (k, im) = (p.k, 1.0 / p.m);
    Ok(Mat::from_row_slice(
        4,
        4,
        &[
            k, -k, 0.0, 0.0, //
            -k, k, 0.0, 0.0, //
            0.0, 0.0, im, 0.0, //
            0.0, 0.0, 0.0, im,
        ],
    ))
}

/// In-plane sector in `(x₁, x₂, y₁, y₂, p_x₁, p_x₂, p_y₁, p_y₂)`, physical units.
pub fn landau_xy_unscaled(p: &LandauParams) -> Result<Mat, ModelError> {
    p.validate()?;
    let (k, m, g) = (p.k, p.m, p.g());
    let kt = k + g * g / m;
    let gm = g / m;
    let mut h = Mat::zeros(8, 8);
    for (i, j, v) in [
        (0, 0, kt),
        (1, 1, kt),
        (2, 2, kt),
        (3, 3, kt),
        (0, 1, -k),
        (2, 3, -k),
        (0, 6, -gm),
        (1, 7, -gm),
        (2, 4, gm),
        (3, 5, gm),
        (4, 4, 1.0 / m),
        (5, 5, 1.0 / m),
        (6, 6, 1.0 / m),
        (7, 7, 1.0 / m),
    ] {
        h[(i, j)] = v;
        h[(j, i)] = v;
    }
    Ok(h)
}

/// Symplectic map `x_unscaled = T x_scaled`: `q → q/√(mΩ_c)`, `p → √(mΩ_c) p`.
pub fn landau_xy_rescaling(p: &LandauParams) -> Result<Mat, ModelError> {
    p.validate()?;
    positive("b", p.b)?;
    let s = (p.m * p.omega_c()).sqrt();
    let mut t = Mat::identity(8, 8);
    for i in 0..4 {
        t[(i, i)] = 1.0 / s;
        t[(i + 4, i + 4)] = s;
    }
    Ok(t)
}

/// In-plane sector after rescaling: `Ω_c` times a matrix depending on `χ` only.
pub fn landau_xy(p: &LandauParams) -> Result<Mat, ModelError> {
    p.validate()?;
    positive("b", p.b)?;
    let wc = p.omega_c();
    let c2 = p.chi().powi(2);
    let d = c2 + 0.25;
    let mut h = Mat::zeros(8, 8);
    for (i, j, v) in [
        (0, 0, d),
        (1, 1, d),
        (2, 2, d),
        (3, 3, d),
        (0, 1, -c2),
        (2, 3, -c2),
        (0, 6, -0.5),
        (1, 7, -0.5),
        (2, 4, 0.5),
        (3, 5, 0.5),
        (4, 4, 1.0),
        (5, 5, 1.0),
        (6, 6, 1.0),
        (7, 7, 1.0),
    ] {
        h[(i, j)] = v * wc;
        h[(j, i)] = v * wc;
    }
    Ok(h)
}

/// Direct sum of two Hamiltonians in `(positions, momenta)` ordering.
pub fn direct_sum(a: &Mat, b: &Mat) -> Mat {
    let (na, nb) = (a.nrows() / 2, b.nrows() / 2);
    let n = na + nb;
    let pa: Vec<usize> = (0..na).chain(n..n + na).collect();
    let pb: Vec<usize> = (na..n).chain(n + na..2 * n).collect();
    let mut h = Mat::zeros(2 * n, 2 * n);
    for (i, &ri) in pa.iter().enumerate() {
        for (j, &rj) in pa.iter().enumerate() {
            h[(ri, rj)] = a[(i, j)];
        }
    }
    for (i, &ri) in pb.iter().enumerate() {
        for (j, &rj) in pb.iter().enumerate() {
            h[(ri, rj)] = b[(i, j)];
        }
    }
    h
}

/// Full two-particle Hamiltonian, vertical sector first.
pub fn landau_full(p: &LandauParams) -> Result<Mat, ModelError> {
    Ok(direct_sum(&landau_z(p)?, &landau_xy(p)?))
}

/// Inductor `l` in series with capacitors `c1` and `c2`.
pub fn lcc_circuit(c1: f64, c2: f64, l: f64) -> Result<CircuitSystem, ModelError> {
    positive("c1", c1)?;
    positive("c2", c2)?;
    positive("l", l)?;
    Ok(CircuitSystem::from_matrices(
        &[c1, c2],
        &[l],
        Mat::from_row_slice(1, 2, &[1.0, 1.0]),
        Mat::zeros(1, 1),
        &[],
        &["c1".into(), "c2".into()],
        &["l".into()],
    ))
}

/// Series combination `C₁C₂/(C₁+C₂)`.
pub fn series_capacitance(c1: f64, c2: f64) -> f64 {
    c1 * c2 / (c1 + c2)
}

/// Oscillation frequency of [`lcc_circuit`]: `1/√(L·C_s)`.
pub fn lcc_frequency(c1: f64, c2: f64, l: f64) -> f64 {
    1.0 / (l * series_capacitance(c1, c2)).sqrt()
}

/// Gyrator-coupled transformer black box with two shunted junctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlackBoxParams {
    /// `R/L`.
    pub omega: f64,
    /// `1/√(C_c L)`.
    pub omega_c: f64,
    /// `1/√(C_J L)`.
    pub omega_j: f64,
    /// `[n₁₁, n₁₂, n₂₁, n₂₂]`.
    pub turns: [f64; 4],
    /// Explicit junction energies; overrides `lj_ratio`.
    pub ej: Option<[f64; 2]>,
    /// `L/L_J`; defaults to 1.
    pub lj_ratio: Option<f64>,
}

impl Default for BlackBoxParams {
    fn default() -> Self {
        BlackBoxParams {
            omega: 1.0,
            omega_c: 1.0,
            omega_j: 1.0,
            turns: [1.0, 1.0, 0.0, 1.0],
            ej: None,
            lj_ratio: None,
        }
    }
}

/// Inductance scale of the preset.
const BB_L: f64 = 1.0;

impl BlackBoxParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        positive("omega", self.omega)?;
        positive("omega_c", self.omega_c)?;
        positive("omega_j", self.omega_j)?;
        if self.turns.iter().any(|t| !t.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "turns",
                value: f64::NAN,
                reason: "must be finite",
            });
        }
        if let Some(ej) = self.ej {
            positive("ej", ej[0])?;
            positive("ej", ej[1])?;
        }
        if let Some(r) = self.lj_ratio {
            positive("lj_ratio", r)?;
        }
        Ok(())
    }

    /// Junction energies; `E_J = (L/L_J)/(4π²L)` when only the ratio is given.
    pub fn junction_energies(&self) -> [f64; 2] {
        self.ej.unwrap_or_else(|| {
            let e = self.lj_ratio.unwrap_or(1.0) / (4.0 * PI * PI * BB_L);
            [e, e]
        })
    }

    /// Netlist text for the preset.
    pub fn netlist(&self) -> String {
        let l = BB_L;
        let r = self.omega * l;
        let cc = 1.0 / (self.omega_c.powi(2) * l);
        let cj = 1.0 / (self.omega_j.powi(2) * l);
        let [n11, n12, n21, n22] = self.turns;
        let [ea, eb] = self.junction_energies();
        format!(
            "# gyrator-coupled black box with two transmon-like junctions\n\
             C cja {cj:e}\n\
             C cjb {cj:e}\n\
             C cca {cc:e}\n\
             C ccb {cc:e}\n\
             TR t turns={n11:e},{n12:e},0,0;0,0,{n21:e},{n22:e} right=cja:+,cca:+;cjb:+,ccb:+\n\
             L l1 {l:e} t.1:- t.3:-\n\
             L l2 {l:e} t.2:- t.4:-\n\
             GYR g {r:e} l1 l2\n\
             JJ ja {ea:e} cja\n\
             JJ jb {eb:e} cjb\n"
        )
    }
}

/// Circuit matrices of the black box; capacitors ordered `(C_Ja, C_Jb, C_ca, C_cb)`.
pub fn blackbox_circuit(p: &BlackBoxParams) -> Result<CircuitSystem, ModelError> {
    p.validate()?;
    let n = netlist::parse(&p.netlist()).expect("generated netlist parses");
    Ok(circuit_builder::build(&n)?)
}

/// Quadratic Hamiltonian of the black box after charge shift and rescaling.
pub fn blackbox_hamiltonian(
    p: &BlackBoxParams,
    tol: &Tolerance,
) -> Result<HamiltonianSystem, ModelError> {
    Ok(circuit_builder::hamiltonian(&blackbox_circuit(p)?, tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::williamson::{check_psd, classify_dof};

    #[test]
    fn landau_z_free_limit() {
        let h = landau_z(&LandauParams {
            m: 2.0,
            k: 0.0,
            b: 1.0,
        })
        .unwrap();
        assert_eq!(
            h,
            Mat::from_diagonal(&crate::linalg::Vector::from_vec(vec![0.0, 0.0, 0.5, 0.5]))
        );
    }

    #[test]
    fn rescaling_maps_unscaled_to_scaled() {
        let p = LandauParams {
            m: 1.7,
            k: 0.6,
            b: 2.3,
        };
        let t = landau_xy_rescaling(&p).unwrap();
        let h = t.transpose() * landau_xy_unscaled(&p).unwrap() * &t;
        assert!((h - landau_xy(&p).unwrap()).amax() < 1e-12);
    }

    #[test]
    fn zero_field_rejected_for_rescaled_form() {
        let p = LandauParams {
            m: 1.0,
            k: 1.0,
            b: 0.0,
        };
        assert!(landau_xy(&p).is_err());
        assert!(landau_xy_unscaled(&p).is_ok());
    }

    #[test]
    fn generated_matrices_are_psd() {
        let tol = Tolerance::default();
        let p = LandauParams {
            m: 0.8,
            k: 1.3,
            b: 0.4,
        };
        for h in [
            landau_z(&p).unwrap(),
            landau_xy(&p).unwrap(),
            landau_full(&p).unwrap(),
        ] {
            check_psd(&h, &tol).unwrap();
        }
        let hs = blackbox_hamiltonian(&BlackBoxParams::default(), &tol).unwrap();
        check_psd(&hs.h, &tol).unwrap();
    }

    #[test]
    fn combined_landau_counts() {
        let tol = Tolerance::default();
        let c = classify_dof(&landau_full(&LandauParams::at_chi(0.7)).unwrap(), &tol).unwrap();
        assert_eq!((c.n_nd, c.n_f, c.n_ho), (1, 1, 4));
    }

    #[test]
    fn blackbox_d_matrix() {
        let cs = blackbox_circuit(&BlackBoxParams::default()).unwrap();
        let d = Mat::from_row_slice(2, 4, &[-1.0, 0.0, -1.0, 0.0, -1.0, -1.0, -1.0, -1.0]);
        assert_eq!(cs.d_mat, d);
        assert_eq!(cs.z_mat, Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
    }
}
