use crate::args::{ModelParams, Preset, Source};
use crate::Failure;
use std::io::Read;
use symquant_core::circuit_builder::{self, CircuitError, HamiltonianSystem};
use symquant_core::linalg::{parse_matrix, Mat, RealMatrix, Tolerance};
use symquant_core::models::{self, BlackBoxParams, LandauParams, ModelError};
use symquant_core::netlist::{self, Severity};

/// A quadratic Hamiltonian, with its circuit origin when there is one.
pub struct Loaded {
    pub h: Mat,
    pub system: Option<HamiltonianSystem>,
    pub warnings: Vec<String>,
}

impl Loaded {
    fn matrix(h: Mat) -> Self {
        Loaded {
            h,
            system: None,
            warnings: Vec::new(),
        }
    }

    fn circuit(system: HamiltonianSystem, warnings: Vec<String>) -> Self {
        Loaded {
            h: system.h.clone(),
            system: Some(system),
            warnings,
        }
    }
}

pub fn load(source: &Source, tol: &Tolerance) -> Result<Loaded, Failure> {
    if let Some(preset) = source.model {
        return load_model(&preset, &source.params, tol);
    }
    let path = source.input.as_deref().unwrap_or("-");
    let text = read(path)?;
    let lower = path.to_ascii_lowercase();
    if lower.ends_with(".cq") {
        return load_netlist(&text, tol);
    }
    if lower.ends_with(".json") || lower.ends_with(".csv") {
        return load_matrix(&text);
    }
    match load_matrix(&text) {
        Ok(l) => Ok(l),
        Err(matrix_err) => match load_netlist(&text, tol) {
            Ok(l) => Ok(l),
            Err(Failure::Domain { kind: "parse", .. }) => Err(matrix_err),
            Err(e) => Err(e),
        },
    }
}

fn read(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Io(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{path}: {e}")))
    }
}

/// A bare matrix, or any JSON object carrying one under `h`.
fn load_matrix(text: &str) -> Result<Loaded, Failure> {
    let parse_err = |e: String| Failure::domain("parse", e);
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        let inner = v.get("h").cloned().unwrap_or(v);
        let rm: RealMatrix = serde_json::from_value(inner).map_err(|e| parse_err(e.to_string()))?;
        return rm
            .to_matrix()
            .map(Loaded::matrix)
            .map_err(|e| parse_err(e.to_string()));
    }
    parse_matrix(text)
        .map(Loaded::matrix)
        .map_err(|e| parse_err(e.to_string()))
}

fn load_netlist(text: &str, tol: &Tolerance) -> Result<Loaded, Failure> {
    let n = netlist::parse(text).map_err(|e| Failure::domain("parse", e))?;
    let diags = netlist::validate(&n);
    let warnings = diags
        .iter()
        .filter(|d| d.severity == Severity::Warning)
        .map(|d| d.to_string())
        .collect();
    let cs = circuit_builder::build(&n).map_err(circuit_failure)?;
    let hs = circuit_builder::hamiltonian(&cs, tol).map_err(circuit_failure)?;
    Ok(Loaded::circuit(hs, warnings))
}

pub fn circuit_failure(e: CircuitError) -> Failure {
    match &e {
        CircuitError::Invalid(diags) => Failure::Domain {
            kind: "invalid-netlist",
            message: e.to_string(),
            details: serde_json::json!({
                "diagnostics": diags
                    .iter()
                    .map(|d| serde_json::json!({
                        "severity": d.severity,
                        "line": d.line,
                        "col": d.col,
                        "element": d.element,
                        "message": d.message,
                        "text": d.to_string(),
                    }))
                    .collect::<Vec<_>>()
            }),
        },
        CircuitError::UnsupportedElement { .. } => Failure::domain("unsupported-element", e),
        CircuitError::SingularZ { .. } => Failure::domain("singular-z", e),
        _ => Failure::domain("circuit", e),
    }
}

fn model_failure(e: ModelError) -> Failure {
    match e {
        ModelError::Circuit(c) => circuit_failure(c),
        other => Failure::domain("invalid-parameter", other),
    }
}

pub fn load_model(preset: &Preset, p: &ModelParams, tol: &Tolerance) -> Result<Loaded, Failure> {
    let landau = match p.chi {
        Some(chi) => LandauParams::at_chi(chi),
        None => LandauParams {
            m: p.m,
            k: p.k,
            b: p.b,
        },
    };
    match preset {
        Preset::LandauZ => models::landau_z(&landau)
            .map(Loaded::matrix)
            .map_err(model_failure),
        Preset::LandauXy => models::landau_xy(&landau)
            .map(Loaded::matrix)
            .map_err(model_failure),
        Preset::Lcc => {
            let cs = models::lcc_circuit(p.c1, p.c2, p.l).map_err(model_failure)?;
            let hs = circuit_builder::hamiltonian(&cs, tol).map_err(circuit_failure)?;
            Ok(Loaded::circuit(hs, Vec::new()))
        }
        Preset::Blackbox => {
            let turns: [f64; 4] = p
                .turns
                .clone()
                .try_into()
                .map_err(|_| Failure::domain("invalid-parameter", "turns needs four values"))?;
            let bp = BlackBoxParams {
                omega: p.omega,
                omega_c: p.omega_c,
                omega_j: p.omega_j,
                turns,
                ej: None,
                lj_ratio: p.lj_ratio,
            };
            let hs = models::blackbox_hamiltonian(&bp, tol).map_err(model_failure)?;
            Ok(Loaded::circuit(hs, Vec::new()))
        }
    }
}
