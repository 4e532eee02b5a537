//! Line-oriented netlist format (`.cq`) for lumped networks in doubled
//! coordinates: one branch flux per capacitor, one loop charge per inductor.
//!
//! ```text
//! # comment
//! C    <name> <capacitance>
//! L    <name> <inductance> [<target>:<coef> ...]
//! GYR  <name> <resistance> <inductor> <inductor>
//! CIRC <name> <resistance> <inductor> <inductor> <inductor>
//! TR   <name> turns=<row>;<row>... right=<incs>;<incs>...
//! JJ   <name> <E_J> [<capacitor>] [island|noisland]
//! PS   <name> <E_PS> <inductor>
//! ```
//!
//! An incidence target is a capacitor name or a transformer left port
//! `<transformer>.<k>` (1-based). The coefficient is `+`, `-` or a number.
//! `+1` means the inductor loop current enters the capacitor's positive
//! terminal.

use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use thiserror::Error;

/// Source position (1-based). Positions are not part of a netlist's value:
/// any two spans compare equal.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetlistError {
    #[error("{line}:{col}: syntax error: {message}")]
    SyntaxError {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: unknown reference '{name}'")]
    UnknownReference {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: duplicate name '{name}'")]
    DuplicateName {
        line: usize,
        col: usize,
        name: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Capacitor(String),
    /// Left port `port` (1-based) of a transformer.
    TransformerPort {
        transformer: String,
        port: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incidence {
    pub target: Target,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capacitor {
    pub name: String,
    pub value: f64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inductor {
    pub name: String,
    pub value: f64,
    pub incidences: Vec<Incidence>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gyrator {
    pub name: String,
    pub r: f64,
    pub charge_ports: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circulator {
    pub name: String,
    pub r: f64,
    pub charge_ports: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transformer {
    pub name: String,
    /// `r × l` turns-ratio matrix, one row per right port.
    pub turns: Vec<Vec<f64>>,
    /// Capacitor incidences of each right port.
    pub right_ports: Vec<Vec<Incidence>>,
    pub span: Span,
}

impl Transformer {
    pub fn left_ports(&self) -> usize {
        self.turns.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub name: String,
    pub ej: f64,
    pub shunt_cap: Option<String>,
    pub island: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSlip {
    pub name: String,
    pub eps: f64,
    pub series_ind: String,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub capacitors: Vec<Capacitor>,
    pub inductors: Vec<Inductor>,
    pub gyrators: Vec<Gyrator>,
    pub circulators: Vec<Circulator>,
    pub transformers: Vec<Transformer>,
    pub junctions: Vec<Junction>,
    pub phase_slips: Vec<PhaseSlip>,
}

impl Netlist {
    pub fn is_empty(&self) -> bool {
        self.capacitors.is_empty()
            && self.inductors.is_empty()
            && self.gyrators.is_empty()
            && self.circulators.is_empty()
            && self.transformers.is_empty()
            && self.junctions.is_empty()
            && self.phase_slips.is_empty()
    }

    pub fn capacitor_index(&self, name: &str) -> Option<usize> {
        self.capacitors.iter().position(|c| c.name == name)
    }

    pub fn inductor_index(&self, name: &str) -> Option<usize> {
        self.inductors.iter().position(|l| l.name == name)
    }
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in code.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &code[s..i],
                    col: code[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &code[s..],
            col: code[..s].chars().count() + 1,
        });
    }
    out
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> NetlistError {
    NetlistError::SyntaxError {
        line,
        col,
        message: message.into(),
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn ident(line: usize, tok: Token<'_>) -> Result<String, NetlistError> {
    if is_ident(tok.text) {
        Ok(tok.text.to_string())
    } else {
        Err(syntax(
            line,
            tok.col,
            format!("invalid name '{}'", tok.text),
        ))
    }
}

fn number(line: usize, col: usize, text: &str) -> Result<f64, NetlistError> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(syntax(
            line,
            col,
            format!("expected a finite number, found '{text}'"),
        )),
    }
}

fn coefficient(line: usize, col: usize, text: &str) -> Result<f64, NetlistError> {
    match text {
        "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => number(line, col, text),
    }
}

/// Reference recorded during the first pass and resolved once all names are known.
struct PendingRef {
    name: String,
    line: usize,
    col: usize,
    kind: RefKind,
}

#[derive(PartialEq)]
enum RefKind {
    Capacitor,
    Inductor,
    Transformer,
}

fn incidence(
    line: usize,
    col: usize,
    text: &str,
    refs: &mut Vec<PendingRef>,
    allow_ports: bool,
) -> Result<Incidence, NetlistError> {
    let (target, coef) = text.rsplit_once(':').ok_or_else(|| {
        syntax(
            line,
            col,
            format!("expected <target>:<coef>, found '{text}'"),
        )
    })?;
    let coeff = coefficient(line, col + target.chars().count() + 1, coef)?;
    let target = match target.split_once('.') {
        Some((tr, port)) if allow_ports => {
            if !is_ident(tr) {
                return Err(syntax(line, col, format!("invalid name '{tr}'")));
            }
            let port: usize = port
                .parse()
                .ok()
                .filter(|&p| p >= 1)
                .ok_or_else(|| syntax(line, col, format!("invalid port index '{port}'")))?;
            refs.push(PendingRef {
                name: tr.to_string(),
                line,
                col,
                kind: RefKind::Transformer,
            });
            Target::TransformerPort {
                transformer: tr.to_string(),
                port,
            }
        }
        _ => {
            if !is_ident(target) {
                return Err(syntax(line, col, format!("invalid name '{target}'")));
            }
            refs.push(PendingRef {
                name: target.to_string(),
                line,
                col,
                kind: RefKind::Capacitor,
            });
            Target::Capacitor(target.to_string())
        }
    };
    Ok(Incidence { target, coeff })
}

fn need(line: usize, toks: &[Token<'_>], count: usize, usage: &str) -> Result<(), NetlistError> {
    if toks.len() < count {
        let col = toks.last().map_or(1, |t| t.col + t.text.chars().count());
        return Err(syntax(line, col, format!("expected: {usage}")));
    }
    Ok(())
}

fn no_extra(line: usize, toks: &[Token<'_>], count: usize) -> Result<(), NetlistError> {
    match toks.get(count) {
        Some(t) => Err(syntax(
            line,
            t.col,
            format!("unexpected token '{}'", t.text),
        )),
        None => Ok(()),
    }
}

/// Parse netlist text; all references are resolved.
pub fn parse(text: &str) -> Result<Netlist, NetlistError> {
    let mut nl = Netlist::default();
    let mut refs: Vec<PendingRef> = Vec::new();
    let mut names: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw);
        let Some(head) = toks.first() else { continue };
        let span = Span {
            line,
            col: head.col,
        };
        let declared: String;
        match head.text {
            "C" => {
                need(line, &toks, 3, "C <name> <capacitance>")?;
                no_extra(line, &toks, 3)?;
                let name = ident(line, toks[1])?;
                let value = number(line, toks[2].col, toks[2].text)?;
                declared = name.clone();
                nl.capacitors.push(Capacitor { name, value, span });
            }
            "L" => {
                need(
                    line,
                    &toks,
                    3,
                    "L <name> <inductance> [<target>:<coef> ...]",
                )?;
                let name = ident(line, toks[1])?;
                let value = number(line, toks[2].col, toks[2].text)?;
                let incidences = toks[3..]
                    .iter()
                    .map(|t| incidence(line, t.col, t.text, &mut refs, true))
                    .collect::<Result<Vec<_>, _>>()?;
                declared = name.clone();
                nl.inductors.push(Inductor {
                    name,
                    value,
                    incidences,
                    span,
                });
            }
            "GYR" | "CIRC" => {
                need(
                    line,
                    &toks,
                    3,
                    "GYR|CIRC <name> <resistance> <inductor> ...",
                )?;
                let name = ident(line, toks[1])?;
                let r = number(line, toks[2].col, toks[2].text)?;
                let mut charge_ports = Vec::new();
                for t in &toks[3..] {
                    let p = ident(line, *t)?;
                    refs.push(PendingRef {
                        name: p.clone(),
                        line,
                        col: t.col,
                        kind: RefKind::Inductor,
                    });
                    charge_ports.push(p);
                }
                declared = name.clone();
                if head.text == "GYR" {
                    nl.gyrators.push(Gyrator {
                        name,
                        r,
                        charge_ports,
                        span,
                    });
                } else {
                    nl.circulators.push(Circulator {
                        name,
                        r,
                        charge_ports,
                        span,
                    });
                }
            }
            "TR" => {
                need(line, &toks, 4, "TR <name> turns=<rows> right=<ports>")?;
                no_extra(line, &toks, 4)?;
                let name = ident(line, toks[1])?;
                let turns_tok = toks[2];
                let turns_src = turns_tok
                    .text
                    .strip_prefix("turns=")
                    .ok_or_else(|| syntax(line, turns_tok.col, "expected turns=<rows>"))?;
                let turns = turns_src
                    .split(';')
                    .map(|row| {
                        row.split(',')
                            .map(|x| number(line, turns_tok.col, x))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let right_tok = toks[3];
                let right_src = right_tok
                    .text
                    .strip_prefix("right=")
                    .ok_or_else(|| syntax(line, right_tok.col, "expected right=<ports>"))?;
                let right_ports = right_src
                    .split(';')
                    .map(|port| {
                        if port.is_empty() {
                            return Ok(Vec::new());
                        }
                        port.split(',')
                            .map(|inc| incidence(line, right_tok.col, inc, &mut refs, false))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                declared = name.clone();
                nl.transformers.push(Transformer {
                    name,
                    turns,
                    right_ports,
                    span,
                });
            }
            "JJ" => {
                need(
                    line,
                    &toks,
                    3,
                    "JJ <name> <E_J> [<capacitor>] [island|noisland]",
                )?;
                let name = ident(line, toks[1])?;
                let ej = number(line, toks[2].col, toks[2].text)?;
                let mut shunt_cap = None;
                let mut island = true;
                let mut island_seen = false;
                for t in &toks[3..] {
                    match t.text {
                        "island" | "noisland" if !island_seen => {
                            island = t.text == "island";
                            island_seen = true;
                        }
                        _ if shunt_cap.is_none() && !island_seen => {
                            let c = ident(line, *t)?;
                            refs.push(PendingRef {
                                name: c.clone(),
                                line,
                                col: t.col,
                                kind: RefKind::Capacitor,
                            });
                            shunt_cap = Some(c);
                        }
                        _ => {
                            return Err(syntax(
                                line,
                                t.col,
                                format!("unexpected token '{}'", t.text),
                            ))
                        }
                    }
                }
                declared = name.clone();
                nl.junctions.push(Junction {
                    name,
                    ej,
                    shunt_cap,
                    island,
                    span,
                });
            }
            "PS" => {
                need(line, &toks, 4, "PS <name> <E_PS> <inductor>")?;
                no_extra(line, &toks, 4)?;
                let name = ident(line, toks[1])?;
                let eps = number(line, toks[2].col, toks[2].text)?;
                let ind = ident(line, toks[3])?;
                refs.push(PendingRef {
                    name: ind.clone(),
                    line,
                    col: toks[3].col,
                    kind: RefKind::Inductor,
                });
                declared = name.clone();
                nl.phase_slips.push(PhaseSlip {
                    name,
                    eps,
                    series_ind: ind,
                    span,
                });
            }
            other => {
                return Err(syntax(
                    line,
                    head.col,
                    format!(
                        "unknown element kind '{other}' (expected C, L, GYR, CIRC, TR, JJ or PS)"
                    ),
                ))
            }
        }
        let name = declared;
        if !names.insert(name.clone()) {
            return Err(NetlistError::DuplicateName {
                line,
                col: toks[1].col,
                name,
            });
        }
    }

    let referable: HashMap<&str, &RefKind> = {
        let mut m = HashMap::new();
        for c in &nl.capacitors {
            m.insert(c.name.as_str(), &RefKind::Capacitor);
        }
        for l in &nl.inductors {
            m.insert(l.name.as_str(), &RefKind::Inductor);
        }
        for t in &nl.transformers {
            m.insert(t.name.as_str(), &RefKind::Transformer);
        }
        m
    };
    for r in refs {
        match referable.get(r.name.as_str()) {
            Some(k) if **k == r.kind => {}
            _ => {
                return Err(NetlistError::UnknownReference {
                    line: r.line,
                    col: r.col,
                    name: r.name,
                })
            }
        }
    }
    Ok(nl)
}

fn fmt_num(v: f64) -> String {
    format!("{v:e}")
}

fn fmt_coeff(c: f64) -> String {
    if c == 1.0 {
        "+".into()
    } else if c == -1.0 {
        "-".into()
    } else {
        fmt_num(c)
    }
}

fn fmt_incidence(inc: &Incidence) -> String {
    match &inc.target {
        Target::Capacitor(c) => format!("{c}:{}", fmt_coeff(inc.coeff)),
        Target::TransformerPort { transformer, port } => {
            format!("{transformer}.{port}:{}", fmt_coeff(inc.coeff))
        }
    }
}

/// Canonical text form; parsing it yields an equal netlist.
pub fn serialize(n: &Netlist) -> String {
    let mut out = String::new();
    for c in &n.capacitors {
        let _ = writeln!(out, "C {} {}", c.name, fmt_num(c.value));
    }
    for l in &n.inductors {
        let _ = write!(out, "L {} {}", l.name, fmt_num(l.value));
        for inc in &l.incidences {
            let _ = write!(out, " {}", fmt_incidence(inc));
        }
        out.push('\n');
    }
    for g in &n.gyrators {
        let _ = writeln!(
            out,
            "GYR {} {} {}",
            g.name,
            fmt_num(g.r),
            g.charge_ports.join(" ")
        );
    }
    for c in &n.circulators {
        let _ = writeln!(
            out,
            "CIRC {} {} {}",
            c.name,
            fmt_num(c.r),
            c.charge_ports.join(" ")
        );
    }
    for t in &n.transformers {
        let turns: Vec<String> = t
            .turns
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| fmt_num(*x))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        let right: Vec<String> = t
            .right_ports
            .iter()
            .map(|p| p.iter().map(fmt_incidence).collect::<Vec<_>>().join(","))
            .collect();
        let _ = writeln!(
            out,
            "TR {} turns={} right={}",
            t.name,
            turns.join(";"),
            right.join(";")
        );
    }
    for j in &n.junctions {
        let _ = write!(out, "JJ {} {}", j.name, fmt_num(j.ej));
        if let Some(c) = &j.shunt_cap {
            let _ = write!(out, " {c}");
        }
        let _ = writeln!(out, " {}", if j.island { "island" } else { "noisland" });
    }
    for p in &n.phase_slips {
        let _ = writeln!(out, "PS {} {} {}", p.name, fmt_num(p.eps), p.series_ind);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub col: usize,
    pub element: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {sev}: {}: {}",
            self.line, self.col, self.element, self.message
        )
    }
}

/// Numerical rank of a small dense matrix given as rows.
fn rank_of(rows: &[Vec<f64>]) -> usize {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return 0;
    }
    let m = nalgebra::DMatrix::from_fn(r, c, |i, j| rows[i][j]);
    crate::linalg::rank_kernel(&m, &crate::linalg::Tolerance::default()).rank
}

/// Structural checks. Empty result iff the netlist can be lowered.
pub fn validate(n: &Netlist) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |sev: Severity, span: Span, element: &str, message: String| {
        out.push(Diagnostic {
            severity: sev,
            line: span.line,
            col: span.col,
            element: element.to_string(),
            message,
        })
    };
    for c in &n.capacitors {
        if c.value.is_nan() || c.value <= 0.0 {
            push(
                Severity::Error,
                c.span,
                &c.name,
                "capacitance must be positive".into(),
            );
        }
    }
    let transformers: HashMap<&str, &Transformer> = n
        .transformers
        .iter()
        .map(|t| (t.name.as_str(), t))
        .collect();
    for l in &n.inductors {
        if l.value.is_nan() || l.value <= 0.0 {
            push(
                Severity::Error,
                l.span,
                &l.name,
                "inductance must be positive".into(),
            );
        }
        for inc in &l.incidences {
            if let Target::TransformerPort { transformer, port } = &inc.target {
                if let Some(t) = transformers.get(transformer.as_str()) {
                    if *port > t.left_ports() {
                        push(
                            Severity::Error,
                            l.span,
                            &l.name,
                            format!(
                                "transformer '{transformer}' has {} left ports, port {port} referenced",
                                t.left_ports()
                            ),
                        );
                    }
                }
            }
        }
    }
    for g in &n.gyrators {
        if g.r.is_nan() || g.r <= 0.0 {
            push(
                Severity::Error,
                g.span,
                &g.name,
                "gyration resistance must be positive".into(),
            );
        }
        if g.charge_ports.len() != 2 {
            push(
                Severity::Error,
                g.span,
                &g.name,
                "gyrator needs two loop-charge ports".into(),
            );
        } else if g.charge_ports[0] == g.charge_ports[1] {
            push(
                Severity::Error,
                g.span,
                &g.name,
                "gyrator ports must be distinct inductors".into(),
            );
        }
    }
    for c in &n.circulators {
        if c.charge_ports.len() != 3 {
            push(
                Severity::Error,
                c.span,
                &c.name,
                "circulator needs three loop-charge ports".into(),
            );
        }
        push(
            Severity::Error,
            c.span,
            &c.name,
            "ideal circulator has a singular impedance matrix; it needs an additional flux or charge constraint and is not supported".into(),
        );
    }
    for t in &n.transformers {
        let l = t.left_ports();
        if t.turns.iter().any(|row| row.len() != l) || l == 0 {
            push(
                Severity::Error,
                t.span,
                &t.name,
                "turns matrix rows must be non-empty and of equal length".into(),
            );
            continue;
        }
        if t.turns.len() != t.right_ports.len() {
            push(
                Severity::Error,
                t.span,
                &t.name,
                format!(
                    "turns matrix has {} rows but {} right ports are given",
                    t.turns.len(),
                    t.right_ports.len()
                ),
            );
        }
        let rank = rank_of(&t.turns);
        if rank < t.turns.len().min(l) {
            push(
                Severity::Warning,
                t.span,
                &t.name,
                format!(
                    "turns matrix is rank deficient (rank {rank}); expect additional kernel directions"
                ),
            );
        }
    }
    let mut used_caps: HashSet<&str> = HashSet::new();
    for j in &n.junctions {
        if j.ej < 0.0 {
            push(
                Severity::Error,
                j.span,
                &j.name,
                "junction energy must be non-negative".into(),
            );
        }
        match &j.shunt_cap {
            None => push(
                Severity::Error,
                j.span,
                &j.name,
                "a Josephson junction must sit in parallel with a capacitor so its flux has a kinetic term; declare the shunt capacitor".into(),
            ),
            Some(c) => {
                if !used_caps.insert(c.as_str()) {
                    push(
                        Severity::Error,
                        j.span,
                        &j.name,
                        format!("capacitor '{c}' already shunts another junction"),
                    );
                }
            }
        }
    }
    let mut used_inds: HashSet<&str> = HashSet::new();
    for p in &n.phase_slips {
        if p.eps < 0.0 {
            push(
                Severity::Error,
                p.span,
                &p.name,
                "phase-slip energy must be non-negative".into(),
            );
        }
        if !used_inds.insert(p.series_ind.as_str()) {
            push(
                Severity::Error,
                p.span,
                &p.name,
                format!(
                    "inductor '{}' already carries another phase-slip element",
                    p.series_ind
                ),
            );
        }
    }
    out.sort_by_key(|a| (a.line, a.col, a.severity));
    out
}

/// True when no diagnostic is an error.
pub fn is_buildable(diags: &[Diagnostic]) -> bool {
    diags.iter().all(|d| d.severity != Severity::Error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcc_netlist() {
        let n = parse("C c1 1e-12\nC c2 1e-12\nL l1 1e-9 c1:+ c2:+").unwrap();
        assert_eq!(n.capacitors.len(), 2);
        assert_eq!(n.inductors[0].incidences.len(), 2);
        assert_eq!(n.inductors[0].incidences[1].coeff, 1.0);
        assert!(validate(&n).is_empty());
    }

    #[test]
    fn empty_text() {
        let n = parse("").unwrap();
        assert!(n.is_empty());
        assert!(validate(&n).is_empty());
    }

    #[test]
    fn dangling_reference() {
        let err = parse("L l1 1e-9 cX:+").unwrap_err();
        assert_eq!(
            err,
            NetlistError::UnknownReference {
                line: 1,
                col: 11,
                name: "cX".into()
            }
        );
    }

    #[test]
    fn duplicate_name() {
        let err = parse("C a 1\nL a 1").unwrap_err();
        assert!(matches!(err, NetlistError::DuplicateName { line: 2, .. }));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("C c1 abc").unwrap_err();
        assert!(matches!(
            err,
            NetlistError::SyntaxError {
                line: 1,
                col: 6,
                ..
            }
        ));
        let err = parse("# ok\nX y 1").unwrap_err();
        assert!(matches!(
            err,
            NetlistError::SyntaxError {
                line: 2,
                col: 1,
                ..
            }
        ));
    }

    #[test]
    fn gyrator_with_one_port() {
        let n = parse("L l1 1\nGYR g 1 l1").unwrap();
        let d = validate(&n);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "gyrator needs two loop-charge ports");
    }

    #[test]
    fn junction_without_capacitor() {
        let n = parse("JJ j1 1.0").unwrap();
        let d = validate(&n);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Error);
        assert!(d[0].message.contains("parallel with a capacitor"));
    }

    #[test]
    fn rank_deficient_turns_warns() {
        let src = "C a 1\nC b 1\nTR t turns=1,1;1,1 right=a:+;b:+\nL l1 1 t.1:+\nL l2 1 t.2:+";
        let d = validate(&parse(src).unwrap());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);
        assert!(is_buildable(&d));
    }

    #[test]
    fn round_trip() {
        let src = "C a 1.5\nC b 2 # comment\nL l1 0.3 a:+ b:-0.5 t.1:-\nL l2 1 \
                   \nGYR g 2 l1 l2\nTR t turns=1,0.5 right=a:+,b:-\nJJ j 3 a noisland\nPS p 0.1 l2\n";
        let n = parse(src).unwrap();
        let again = parse(&serialize(&n)).unwrap();
        assert_eq!(n, again);
        assert_eq!(serialize(&n), serialize(&again));
    }

    #[test]
    fn diagnostics_sorted_by_location() {
        let n = parse("C a -1\nL l 1\nGYR g 1 l\nJJ j 1").unwrap();
        let d = validate(&n);
        let lines: Vec<usize> = d.iter().map(|x| x.line).collect();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted);
        assert_eq!(d.len(), 3);
    }
}
