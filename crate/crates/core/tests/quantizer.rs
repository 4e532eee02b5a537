use symquant_core::circuit_builder::{self, HamiltonianSystem};
use symquant_core::linalg::{Mat, Tolerance};
use symquant_core::models::{self, BlackBoxParams};
use symquant_core::netlist;
use symquant_core::quantizer::{self, QuantizeOptions, QuantizerError};
use symquant_core::williamson::normal_form;

fn preset() -> HamiltonianSystem {
    models::blackbox_hamiltonian(&BlackBoxParams::default(), &Tolerance::default()).unwrap()
}

const OVERRIDE: QuantizeOptions = QuantizeOptions {
    transmon_override: true,
};

#[test]
fn two_tier_frequencies_and_couplings() {
    let m = quantizer::two_tier(&preset(), &Tolerance::default()).unwrap();
    let expected = [2.52434, 0.792287];
    for (w, e) in m.mode_freqs.iter().zip(expected) {
        assert!((w - e).abs() < 1e-4, "{:?}", m.mode_freqs);
    }
    let g = [[0.800274, 0.5491], [-0.251173, 0.5491]];
    let mm = [[-0.317023, 0.0], [0.317023, 0.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!(
                (m.g_block[(i, j)] - g[i][j]).abs() < 1e-4,
                "G {}",
                m.g_block
            );
            assert!(
                (m.m_block[(i, j)] - mm[i][j]).abs() < 1e-4,
                "M {}",
                m.m_block
            );
        }
    }
    let c = m.couplings[(0, 0)];
    assert!((c.re - 0.800274 / 2f64.sqrt()).abs() < 1e-4);
    assert!((c.im - 0.317023 / 2f64.sqrt()).abs() < 1e-4);
    assert_eq!((m.counts.n_nd, m.counts.n_f, m.counts.n_ho), (0, 2, 2));
}

#[test]
fn two_tier_output_transform_is_consistent() {
    let hs = preset();
    let m = quantizer::two_tier(&hs, &Tolerance::default()).unwrap();
    let diff = m.s.transpose() * &hs.h * &m.s - &m.h_out;
    assert!(diff.amax() < 1e-9);
    // Junction pairs are only relabelled, so each cosine keeps its single entry.
    for (a, b) in m.potential.iter().zip(&hs.potential) {
        let nonzero = |v: &[f64]| v.iter().copied().filter(|x| *x != 0.0).collect::<Vec<_>>();
        assert_eq!(nonzero(&a.arg), nonzero(&b.arg));
        assert_eq!(a.energy, b.energy);
    }
}

#[test]
fn blackbox_frequencies() {
    let m = quantizer::blackbox(&preset(), &Tolerance::default(), OVERRIDE).unwrap();
    let expected = [2.61227, 1.20569, 0.73029, 0.434761];
    assert_eq!(m.mode_freqs.len(), 4);
    for (w, e) in m.mode_freqs.iter().zip(expected) {
        assert!((w - e).abs() < 1e-4, "{:?}", m.mode_freqs);
    }
    assert_eq!(m.nd_dependency, vec![false, false]);
    assert!(m.warnings.is_empty());
    assert_eq!((m.counts.n_nd, m.counts.n_f, m.counts.n_ho), (2, 0, 4));
    assert_eq!(m.junction_terms[0].taylor.len(), 5);
}

#[test]
fn compact_junction_refused_without_override() {
    let err = quantizer::blackbox(&preset(), &Tolerance::default(), QuantizeOptions::default());
    assert!(matches!(
        err,
        Err(QuantizerError::CompactVariableRefused { .. })
    ));
}

#[test]
fn noncompact_junctions_need_no_override() {
    let src = models::BlackBoxParams::default()
        .netlist()
        .replace(" cja\n", " cja noisland\n")
        .replace(" cjb\n", " cjb noisland\n");
    let cs = circuit_builder::build(&netlist::parse(&src).unwrap()).unwrap();
    let hs = circuit_builder::hamiltonian(&cs, &Tolerance::default()).unwrap();
    assert!(quantizer::blackbox(&hs, &Tolerance::default(), QuantizeOptions::default()).is_ok());
}

#[test]
fn routes_agree() {
    let tol = Tolerance::default();
    let hs = preset();
    let tt = quantizer::two_tier(&hs, &tol).unwrap();
    let bb = quantizer::blackbox(&hs, &tol, OVERRIDE).unwrap();
    let r = quantizer::cross_validate(&tt, &bb, &tol, 1e-6).unwrap();
    assert!(r.max_delta <= 1e-6);
}

#[test]
fn perturbed_junction_inductance_is_caught() {
    let tol = Tolerance::default();
    let tt = quantizer::two_tier(&preset(), &tol).unwrap();
    let p = BlackBoxParams {
        lj_ratio: Some(1.2),
        ..Default::default()
    };
    let bb = quantizer::blackbox(
        &models::blackbox_hamiltonian(&p, &tol).unwrap(),
        &tol,
        OVERRIDE,
    )
    .unwrap();
    assert!(matches!(
        quantizer::cross_validate(&tt, &bb, &tol, 1e-6),
        Err(QuantizerError::MismatchBeyondTolerance { .. })
    ));
}

/// Rebuild the quadratic form from frequencies, G, M and the junction kinetic
/// block, add the linearized cosines and diagonalize again.
#[test]
fn coupling_reconstruction() {
    let tol = Tolerance::default();
    let hs = preset();
    let tt = quantizer::two_tier(&hs, &tol).unwrap();
    let bb = quantizer::blackbox(&hs, &tol, OVERRIDE).unwrap();
    let (k, nj) = (tt.mode_freqs.len(), tt.junction_names.len());
    let n = k + nj;
    let nfull = hs.layout.n;
    let pi_j: Vec<usize> = (0..nj).map(|j| 2 * nfull - nj + j).collect();
    let mut h = Mat::zeros(2 * n, 2 * n);
    for i in 0..k {
        h[(i, i)] = tt.mode_freqs[i];
        h[(n + i, n + i)] = tt.mode_freqs[i];
        for j in 0..nj {
            for (row, v) in [(i, tt.g_block[(i, j)]), (n + i, tt.m_block[(i, j)])] {
                h[(row, n + k + j)] = v;
                h[(n + k + j, row)] = v;
            }
        }
    }
    for a in 0..nj {
        for b in 0..nj {
            h[(n + k + a, n + k + b)] = tt.h_out[(pi_j[a], pi_j[b])];
        }
    }
    for (j, c) in tt.potential.iter().enumerate() {
        let phi = 2 * nfull - 2 * nj - (nfull - nj) + j;
        let a = c.arg[phi];
        h[(k + j, k + j)] += c.energy * a * a;
    }
    assert!((&h - h.transpose()).amax() == 0.0);
    let nf = normal_form(&h, &tol).unwrap();
    for (a, b) in nf.omega.iter().zip(&bb.mode_freqs) {
        assert!(
            (a - b).abs() < 1e-6,
            "{:?} vs {:?}",
            nf.omega,
            bb.mode_freqs
        );
    }
}

#[test]
fn junction_free_two_tier_is_normal_form() {
    let tol = Tolerance::default();
    let cs = models::lcc_circuit(1.0, 2.0, 3.0).unwrap();
    let hs = circuit_builder::hamiltonian(&cs, &tol).unwrap();
    let tt = quantizer::two_tier(&hs, &tol).unwrap();
    let nf = normal_form(&hs.h, &tol).unwrap();
    assert_eq!(tt.couplings.ncols(), 0);
    assert!((tt.mode_freqs[0] - nf.omega[0]).abs() < 1e-12);
    let bb = quantizer::blackbox(&hs, &tol, QuantizeOptions::default()).unwrap();
    assert!(quantizer::cross_validate(&tt, &bb, &tol, 1e-9).is_ok());
}

#[test]
fn decoupled_islands_have_no_modes() {
    let tol = Tolerance::default();
    let src = "C ca 1\nC cb 2\nJJ ja 0.1 ca\nJJ jb 0.2 cb\n";
    let cs = circuit_builder::build(&netlist::parse(src).unwrap()).unwrap();
    let hs = circuit_builder::hamiltonian(&cs, &tol).unwrap();
    let tt = quantizer::two_tier(&hs, &tol).unwrap();
    assert!(tt.mode_freqs.is_empty());
    assert_eq!(tt.couplings.nrows(), 0);
    assert_eq!(tt.g_block.len(), 0);
}

#[test]
fn nd_dependency_invariant_under_w_reordering() {
    let tol = Tolerance::default();
    let bb = quantizer::blackbox(&preset(), &tol, OVERRIDE).unwrap();
    let nd = 2 * bb.counts.n_nd;
    let mut expr = bb.mode_expressions.clone();
    if nd >= 2 {
        expr.swap_columns(0, nd - 1);
    }
    let flags: Vec<bool> = (0..expr.nrows())
        .map(|j| (0..nd).any(|k| expr[(j, k)].abs() > 1e-9))
        .collect();
    assert_eq!(flags, bb.nd_dependency);
}

#[test]
fn json_is_deterministic() {
    let tol = Tolerance::default();
    let a = serde_json::to_string(&quantizer::two_tier(&preset(), &tol).unwrap().report()).unwrap();
    let b = serde_json::to_string(&quantizer::two_tier(&preset(), &tol).unwrap().report()).unwrap();
    assert_eq!(a, b);
}
