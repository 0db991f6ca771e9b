//! Boolean circuits over the shared variables, one gate per proof step.
//!
//! Netlist text format, line oriented:
//!
//! ```text
//! INPUT <var>
//! c prov <gate> <step>
//! GATE <gate> <KIND> <args...>
//! OUTPUT <gate>
//! ```
//!
//! Gate ids are dense and 0-based; every argument refers to an earlier
//! gate, so a single forward pass evaluates the whole netlist. The
//! `c prov` comment ties a gate to the proof step it was extracted from.

use crate::qbf::{Assignment, Var};
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GateKind {
    Const0,
    Const1,
    /// Reads one declared input variable.
    Input(Var),
    Id(usize),
    Or2(usize, usize),
    And2(usize, usize),
    /// `Sel(x, a, b)` = if x then b else a.
    Sel(Var, usize, usize),
    /// `Mono3(x, a, b)` = (x or a) and b. Monotone in x.
    Mono3(Var, usize, usize),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Gate {
    pub kind: GateKind,
    /// Id of the proof step this gate was extracted from, if any.
    pub prov: Option<u32>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Circuit {
    pub inputs: Vec<Var>,
    pub gates: Vec<Gate>,
    pub output: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CircuitError {
    PartialAssignment(Var),
}

impl fmt::Display for CircuitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitError::PartialAssignment(v) => {
                write!(f, "PARTIAL_ASSIGNMENT: input {} has no value", v.0)
            }
        }
    }
}

impl Circuit {
    /// Evaluate every gate in one forward pass. All declared inputs that
    /// feed gates must be assigned.
    pub fn eval_all(&self, a: &Assignment) -> Result<Vec<bool>, CircuitError> {
        let mut vals: Vec<bool> = Vec::with_capacity(self.gates.len());
        let read = |v: Var, a: &Assignment| -> Result<bool, CircuitError> {
            a.get(v).ok_or(CircuitError::PartialAssignment(v))
        };
        for g in &self.gates {
            let val = match g.kind {
                GateKind::Const0 => false,
                GateKind::Const1 => true,
                GateKind::Input(v) => read(v, a)?,
                GateKind::Id(u) => vals[u],
                GateKind::Or2(u, w) => vals[u] || vals[w],
                GateKind::And2(u, w) => vals[u] && vals[w],
                GateKind::Sel(x, u, w) => {
                    if read(x, a)? {
                        vals[w]
                    } else {
                        vals[u]
                    }
                }
                GateKind::Mono3(x, u, w) => (read(x, a)? || vals[u]) && vals[w],
            };
            vals.push(val);
        }
        Ok(vals)
    }

    pub fn eval(&self, a: &Assignment) -> Result<bool, CircuitError> {
        Ok(self.eval_all(a)?[self.output])
    }

    /// No selector gates anywhere. Constants, and/or, and Mono3 are all
    /// monotone in the inputs.
    pub fn is_monotone(&self) -> bool {
        !self
            .gates
            .iter()
            .any(|g| matches!(g.kind, GateKind::Sel(..)))
    }

    pub fn has_mono3(&self) -> bool {
        self.gates
            .iter()
            .any(|g| matches!(g.kind, GateKind::Mono3(..)))
    }
}

fn kind_name(k: GateKind) -> &'static str {
    match k {
        GateKind::Const0 => "CONST0",
        GateKind::Const1 => "CONST1",
        GateKind::Input(_) => "INPUT",
        GateKind::Id(_) => "ID",
        GateKind::Or2(..) => "OR2",
        GateKind::And2(..) => "AND2",
        GateKind::Sel(..) => "SEL",
        GateKind::Mono3(..) => "MONO3",
    }
}

pub fn write_netlist(c: &Circuit) -> String {
    let mut out = String::new();
    for v in &c.inputs {
        out.push_str(&format!("INPUT {}\n", v.0));
    }
    for (i, g) in c.gates.iter().enumerate() {
        if let Some(step) = g.prov {
            out.push_str(&format!("c prov {} {}\n", i, step));
        }
        let args = match g.kind {
            GateKind::Const0 | GateKind::Const1 => String::new(),
            GateKind::Input(v) => format!(" {}", v.0),
            GateKind::Id(u) => format!(" {}", u),
            GateKind::Or2(u, w) | GateKind::And2(u, w) => format!(" {} {}", u, w),
            GateKind::Sel(x, u, w) | GateKind::Mono3(x, u, w) => {
                format!(" {} {} {}", x.0, u, w)
            }
        };
        out.push_str(&format!("GATE {} {}{}\n", i, kind_name(g.kind), args));
    }
    out.push_str(&format!("OUTPUT {}\n", c.output));
    out
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum NetlistError {
    Syntax { line: usize, msg: String },
}

impl fmt::Display for NetlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetlistError::Syntax { line, msg } => write!(f, "SYNTAX at line {}: {}", line, msg),
        }
    }
}

impl std::error::Error for NetlistError {}

pub fn parse_netlist(text: &str) -> Result<Circuit, NetlistError> {
    let syn = |line: usize, msg: &str| NetlistError::Syntax { line, msg: msg.to_string() };
    let mut inputs: Vec<Var> = Vec::new();
    let mut gates: Vec<Gate> = Vec::new();
    let mut output: Option<usize> = None;
    let mut pending_prov: Option<(usize, u32, usize)> = None;
    let mut last_line = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks[0] == "c" {
            if toks.len() == 4 && toks[1] == "prov" {
                if pending_prov.is_some() {
                    return Err(syn(lineno, "prov comment without a following GATE"));
                }
                let gid: usize =
                    toks[2].parse().map_err(|_| syn(lineno, "bad gate id in prov"))?;
                let step: u32 =
                    toks[3].parse().map_err(|_| syn(lineno, "bad step id in prov"))?;
                pending_prov = Some((gid, step, lineno));
            }
            continue;
        }
        if output.is_some() {
            return Err(syn(lineno, "content after OUTPUT"));
        }
        match toks[0] {
            "INPUT" => {
                if toks.len() != 2 {
                    return Err(syn(lineno, "INPUT takes one variable"));
                }
                let v: u32 = toks[1]
                    .parse()
                    .ok()
                    .filter(|&v| v > 0)
                    .ok_or_else(|| syn(lineno, "bad input variable"))?;
                let v = Var(v);
                if inputs.contains(&v) {
                    return Err(syn(lineno, "duplicate input"));
                }
                inputs.push(v);
            }
            "GATE" => {
                if toks.len() < 3 {
                    return Err(syn(lineno, "GATE needs an id and a kind"));
                }
                let gid: usize = toks[1].parse().map_err(|_| syn(lineno, "bad gate id"))?;
                if gid != gates.len() {
                    return Err(syn(lineno, "gate ids must be dense and increasing"));
                }
                let prov = match pending_prov.take() {
                    Some((pg, step, pl)) => {
                        if pg != gid {
                            return Err(syn(pl, "prov names a different gate"));
                        }
                        Some(step)
                    }
                    None => None,
                };
                let args = &toks[3..];
                let garg = |s: &str| -> Result<usize, NetlistError> {
                    let u: usize = s.parse().map_err(|_| syn(lineno, "bad gate argument"))?;
                    if u >= gid {
                        return Err(syn(lineno, "gate argument must precede the gate"));
                    }
                    Ok(u)
                };
                let varg = |s: &str| -> Result<Var, NetlistError> {
                    let v: u32 = s
                        .parse()
                        .ok()
                        .filter(|&v| v > 0)
                        .ok_or_else(|| syn(lineno, "bad variable argument"))?;
                    let v = Var(v);
                    if !inputs.contains(&v) {
                        return Err(syn(lineno, "variable is not a declared input"));
                    }
                    Ok(v)
                };
                let kind = match (toks[2], args.len()) {
                    ("CONST0", 0) => GateKind::Const0,
                    ("CONST1", 0) => GateKind::Const1,
                    ("INPUT", 1) => GateKind::Input(varg(args[0])?),
                    ("ID", 1) => GateKind::Id(garg(args[0])?),
                    ("OR2", 2) => GateKind::Or2(garg(args[0])?, garg(args[1])?),
                    ("AND2", 2) => GateKind::And2(garg(args[0])?, garg(args[1])?),
                    ("SEL", 3) => {
                        GateKind::Sel(varg(args[0])?, garg(args[1])?, garg(args[2])?)
                    }
                    ("MONO3", 3) => {
                        GateKind::Mono3(varg(args[0])?, garg(args[1])?, garg(args[2])?)
                    }
                    ("CONST0" | "CONST1" | "INPUT" | "ID" | "OR2" | "AND2" | "SEL"
                    | "MONO3", _) => return Err(syn(lineno, "wrong argument count")),
                    _ => return Err(syn(lineno, "unknown gate kind")),
                };
                gates.push(Gate { kind, prov });
            }
            "OUTPUT" => {
                if toks.len() != 2 {
                    return Err(syn(lineno, "OUTPUT takes one gate id"));
                }
                let gid: usize = toks[1].parse().map_err(|_| syn(lineno, "bad gate id"))?;
                if gid >= gates.len() {
                    return Err(syn(lineno, "OUTPUT names an undefined gate"));
                }
                output = Some(gid);
            }
            _ => return Err(syn(lineno, "unknown directive")),
        }
    }
    if let Some((_, _, pl)) = pending_prov {
        return Err(syn(pl, "prov comment without a following GATE"));
    }
    match output {
        Some(o) => Ok(Circuit { inputs, gates, output: o }),
        None => Err(syn(last_line.max(1), "missing OUTPUT")),
    }
}

/// Graphviz rendering: inputs as plaintext nodes, gates as boxes labeled
/// with kind and originating proof step, the output gate double-framed.
pub fn to_dot(c: &Circuit) -> String {
    let mut out = String::from("digraph circuit {\n  rankdir=BT;\n");
    for v in &c.inputs {
        out.push_str(&format!("  v{} [shape=plaintext, label=\"x{}\"];\n", v.0, v.0));
    }
    for (i, g) in c.gates.iter().enumerate() {
        let prov = g
            .prov
            .map(|s| format!("\\ns{}", s))
            .unwrap_or_default();
        let peripheries = if i == c.output { 2 } else { 1 };
        out.push_str(&format!(
            "  g{} [shape=box, peripheries={}, label=\"{} #{}{}\"];\n",
            i,
            peripheries,
            kind_name(g.kind),
            i,
            prov
        ));
        match g.kind {
            GateKind::Const0 | GateKind::Const1 => {}
            GateKind::Input(v) => out.push_str(&format!("  v{} -> g{};\n", v.0, i)),
            GateKind::Id(u) => out.push_str(&format!("  g{} -> g{};\n", u, i)),
            GateKind::Or2(u, w) | GateKind::And2(u, w) => {
                out.push_str(&format!("  g{} -> g{};\n  g{} -> g{};\n", u, i, w, i));
            }
            GateKind::Sel(x, u, w) | GateKind::Mono3(x, u, w) => {
                out.push_str(&format!(
                    "  v{} -> g{};\n  g{} -> g{};\n  g{} -> g{};\n",
                    x.0, i, u, i, w, i
                ));
            }
        }
    }
    out.push_str("}\n");
    out
}
