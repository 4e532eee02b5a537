use crate::args::{Cli, Format, Mode, QuantizeArgs};
use crate::input::Loaded;
use crate::{Failure, Output};
use serde::Serialize;
use serde_json::json;
use std::fmt::Write;
use symquant_core::linalg::{Mat, RealMatrix, Tolerance};
use symquant_core::quantizer::{self, QuantizeOptions, QuantizedModel, QuantizerError};
use symquant_core::williamson::{
    classify_dof, linear_invariants, normal_form_with, quadratic_invariant_basis, Counts,
    NormalForm, NormalFormOptions, WilliamsonError,
};

/// Six significant digits, trailing zeros trimmed.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn json_body<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))
}

fn done(body: String, warnings: Vec<String>) -> Result<Output, Failure> {
    Ok(Output {
        body,
        warnings,
        code: 0,
    })
}

pub fn williamson_failure(e: WilliamsonError) -> Failure {
    let kind = match &e {
        WilliamsonError::NotPsd { .. } => "not-psd",
        WilliamsonError::NotPositiveDefinite { .. } => "not-positive-definite",
        WilliamsonError::NotSymmetric { .. } => "not-symmetric",
        WilliamsonError::NotSquare { .. } | WilliamsonError::OddDimension(_) => "shape",
        WilliamsonError::VerificationFailure {
            identity,
            residual,
            bound,
        } => {
            return Failure::Domain {
                kind: "verification",
                message: e.to_string(),
                details: json!({ "identity": identity, "residual": residual, "bound": bound }),
            }
        }
        _ => "williamson",
    };
    Failure::domain(kind, e)
}

fn quantizer_failure(e: QuantizerError) -> Failure {
    match e {
        QuantizerError::Williamson(w) => williamson_failure(w),
        QuantizerError::CompactVariableRefused { .. } => {
            Failure::domain("compact-variable-refused", e)
        }
        QuantizerError::JunctionInQuadratic { .. } => Failure::domain("precondition", e),
        QuantizerError::MismatchBeyondTolerance { ref report, .. } => Failure::Domain {
            kind: "mismatch",
            message: e.to_string(),
            details: serde_json::to_value(report).unwrap_or_default(),
        },
    }
}

fn run_normal_form(h: &Mat, tol: &Tolerance, symplectic_w: bool) -> Result<NormalForm, Failure> {
    normal_form_with(h, tol, NormalFormOptions { symplectic_w }).map_err(williamson_failure)
}

fn sector_table(counts: Counts, omega: &[f64]) -> String {
    if counts.n_nd + counts.n_f + counts.n_ho == 0 {
        return "no degrees of freedom\n".into();
    }
    let mut s = String::new();
    let _ = writeln!(s, "{:<14} {:>5}  frequencies", "sector", "pairs");
    let _ = writeln!(s, "{:<14} {:>5}", "nondynamical", counts.n_nd);
    let _ = writeln!(s, "{:<14} {:>5}", "free", counts.n_f);
    let freqs: Vec<String> = omega.iter().map(|w| sig6(*w)).collect();
    let _ = writeln!(
        s,
        "{:<14} {:>5}  {}",
        "harmonic",
        counts.n_ho,
        freqs.join("  ")
    );
    s
}

fn residual_lines(nf: &NormalForm) -> String {
    let r = &nf.residuals;
    format!(
        "residuals: |S^T H S - H_D| {:.3e}  |S^T J S - J| {:.3e}  |S^-1 JH S - D_J| {:.3e}  |S S^-1 - I| {:.3e}\n",
        r.h, r.j, r.generator, r.inverse
    )
}

fn matrix_text(m: &Mat, labels: Option<&[String]>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        if let Some(l) = labels {
            let _ = write!(s, "{:<10}", l.get(i).map(String::as_str).unwrap_or(""));
        }
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:>11}", sig6(m[(i, j)])))
            .collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

pub fn diag(input: &Loaded, tol: &Tolerance, cli: &Cli) -> Result<Output, Failure> {
    let nf = run_normal_form(&input.h, tol, cli.symplectic_w)?;
    let body = match cli.format {
        Format::Json => {
            let mut v =
                serde_json::to_value(nf.report()).map_err(|e| Failure::Io(e.to_string()))?;
            if nf.symplectic_w {
                v["canonical_s"] = serde_json::to_value(RealMatrix::from_matrix(&nf.canonical_s()))
                    .map_err(|e| Failure::Io(e.to_string()))?;
            }
            json_body(&v)?
        }
        Format::Text => {
            let counts = Counts::from(&nf.classification);
            let mut s = sector_table(counts, &nf.omega);
            if counts.n_nd + counts.n_f + counts.n_ho > 0 {
                s.push_str(&residual_lines(&nf));
            }
            s.trim_end().to_string()
        }
    };
    done(body, input.warnings.clone())
}

pub fn dof(input: &Loaded, tol: &Tolerance, format: Format) -> Result<Output, Failure> {
    let c = classify_dof(&input.h, tol).map_err(williamson_failure)?;
    let counts = Counts::from(&c);
    let body = match format {
        Format::Json => json_body(&counts)?,
        Format::Text => {
            if c.n() == 0 {
                "no degrees of freedom".into()
            } else {
                format!(
                    "nondynamical {}\nfree         {}\nharmonic     {}",
                    counts.n_nd, counts.n_f, counts.n_ho
                )
            }
        }
    };
    done(body, input.warnings.clone())
}

pub fn invariants(input: &Loaded, tol: &Tolerance, format: Format) -> Result<Output, Failure> {
    let linear = linear_invariants(&input.h, tol).map_err(williamson_failure)?;
    let quadratic = quadratic_invariant_basis(&input.h, tol);
    let body = match format {
        Format::Json => {
            let lin: Vec<Vec<f64>> = linear.iter().map(|v| v.iter().copied().collect()).collect();
            let (quad, reason) = match &quadratic {
                Ok(q) => (
                    Some(q.iter().map(RealMatrix::from_matrix).collect::<Vec<_>>()),
                    None,
                ),
                Err(e) => (None, Some(e.to_string())),
            };
            json_body(
                &json!({ "linear": lin, "quadratic": quad, "quadratic_unavailable": reason }),
            )?
        }
        Format::Text => {
            let mut s = format!("linear invariants: {}\n", linear.len());
            for v in &linear {
                let row: Vec<String> = v.iter().map(|x| sig6(*x)).collect();
                let _ = writeln!(s, "  [{}]", row.join(", "));
            }
            match &quadratic {
                Ok(q) => {
                    let _ = writeln!(s, "quadratic invariants: {}", q.len());
                    for (k, b) in q.iter().enumerate() {
                        let _ = writeln!(s, "  B{k}:");
                        s.push_str(&matrix_text(b, None));
                    }
                }
                Err(e) => {
                    let _ = writeln!(s, "quadratic invariants: unavailable ({e})");
                }
            }
            s.trim_end().to_string()
        }
    };
    done(body, input.warnings.clone())
}

pub fn verify(input: &Loaded, tol: &Tolerance, cli: &Cli) -> Result<Output, Failure> {
    let nf = run_normal_form(&input.h, tol, cli.symplectic_w)?;
    let r = &nf.residuals;
    let body = match cli.format {
        Format::Json => json_body(&json!({
            "ok": true,
            "residuals": { "h": r.h, "j": r.j, "generator": r.generator, "inverse": r.inverse },
        }))?,
        Format::Text => format!("all identities hold\n{}", residual_lines(&nf).trim_end()),
    };
    done(body, input.warnings.clone())
}

fn model_text(m: &QuantizedModel) -> String {
    let mut s = String::new();
    let label = match m.route {
        quantizer::Route::TwoTier => "two-tier",
        quantizer::Route::Blackbox => "black-box",
    };
    let _ = writeln!(s, "route: {label}");
    let c = m.counts;
    let _ = writeln!(
        s,
        "sectors: nondynamical {}  free {}  harmonic {}",
        c.n_nd, c.n_f, c.n_ho
    );
    let _ = writeln!(
        s,
        "{:<6} {:>11}  couplings g (re, im) per junction",
        "mode", "frequency"
    );
    for (i, w) in m.mode_freqs.iter().enumerate() {
        let g: Vec<String> = (0..m.couplings.ncols())
            .map(|j| {
                let z = m.couplings[(i, j)];
                format!("{}: ({}, {})", m.junction_names[j], sig6(z.re), sig6(z.im))
            })
            .collect();
        let _ = writeln!(s, "{:<6} {:>11}  {}", i, sig6(*w), g.join("  "));
    }
    for (t, nd) in m.junction_terms.iter().zip(&m.nd_dependency) {
        let form = if t.taylor.is_empty() {
            "cosine"
        } else {
            "taylor tail 4..12"
        };
        let _ = writeln!(
            s,
            "junction {}: E = {}  {}  nondynamical dependence: {}",
            t.name,
            sig6(t.energy),
            form,
            nd
        );
    }
    s
}

pub fn quantize(
    input: &Loaded,
    tol: &Tolerance,
    a: &QuantizeArgs,
    format: Format,
) -> Result<Output, Failure> {
    let hs = input.system.as_ref().ok_or_else(|| {
        Failure::domain(
            "not-a-circuit",
            "quantize needs a netlist or a circuit preset (lcc, blackbox)",
        )
    })?;
    let opts = QuantizeOptions {
        transmon_override: a.transmon_override,
    };
    let mut warnings = input.warnings.clone();
    let tt = match a.mode {
        Mode::TwoTier | Mode::Both => {
            Some(quantizer::two_tier(hs, tol).map_err(quantizer_failure)?)
        }
        Mode::Blackbox => None,
    };
    let bb = match a.mode {
        Mode::Blackbox | Mode::Both => {
            Some(quantizer::blackbox(hs, tol, opts).map_err(quantizer_failure)?)
        }
        Mode::TwoTier => None,
    };
    for m in tt.iter().chain(bb.iter()) {
        warnings.extend(m.warnings.iter().cloned());
    }
    let cross = match (&tt, &bb) {
        (Some(t), Some(b)) => {
            Some(quantizer::cross_validate(t, b, tol, a.max_delta).map_err(quantizer_failure)?)
        }
        _ => None,
    };
    let body = match format {
        Format::Json => match (&tt, &bb) {
            (Some(t), Some(b)) => json_body(&json!({
                "two_tier": t.report(),
                "blackbox": b.report(),
                "cross_validate": cross,
            }))?,
            (Some(t), None) => json_body(&t.report())?,
            (None, Some(b)) => json_body(&b.report())?,
            (None, None) => unreachable!("at least one route runs"),
        },
        Format::Text => {
            let mut s = String::new();
            for m in tt.iter().chain(bb.iter()) {
                s.push_str(&model_text(m));
                s.push('\n');
            }
            if let Some(c) = &cross {
                let _ = writeln!(
                    s,
                    "cross-validation: max frequency delta {:.3e}",
                    c.max_delta
                );
            }
            s.trim_end().to_string()
        }
    };
    done(body, warnings)
}

pub fn model(input: &Loaded, format: Format) -> Result<Output, Failure> {
    let body = match format {
        Format::Json => match &input.system {
            Some(hs) => json_body(hs)?,
            None => json_body(&json!({ "h": RealMatrix::from_matrix(&input.h) }))?,
        },
        Format::Text => {
            let labels = input.system.as_ref().map(|hs| hs.layout.labels.as_slice());
            matrix_text(&input.h, labels).trim_end().to_string()
        }
    };
    done(body, input.warnings.clone())
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(2.524337), "2.52434");
        assert_eq!(sig6(0.7922871), "0.792287");
        assert_eq!(sig6(0.730290), "0.73029");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(-0.25), "-0.25");
        assert_eq!(sig6(1.5e-7), "1.50000e-7");
        assert_eq!(sig6(-0.0), "0");
    }
}
