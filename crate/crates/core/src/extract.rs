//! Interpolation-circuit and strategy-circuit extraction.
//!
//! Every proof step becomes exactly one gate, in step order, so the gate
//! count equals the step count and the `c prov` netlist comments tie each
//! gate back to its step. The circuit's inputs are the shared p block; the
//! output gate belongs to the final step.

use crate::checker::{check_refutation, expansion_axiom, Violation};
use crate::circuit::{Circuit, Gate, GateKind};
use crate::qbf::{Clause, Partition, Pol, Qbf, Var};
use crate::trace::{Aux, Concl, ProofTrace, Rule};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    General,
    Monotone,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ExtractError {
    /// The formula carries no partition comment.
    NoPartition,
    /// The proof does not check; extraction refuses to guess.
    NotVerified(Violation),
    /// A matrix clause mentions both q and r variables.
    MixedClause { clause: usize },
    /// An axiom step's clause cannot be assigned a side.
    AmbiguousAxiom { step: u32 },
    /// Monotone mode requires p variables to occur only positively in A.
    PNotPositive(Var),
    /// A resolution pivot lies outside all partition groups.
    MixedPivot { step: u32, var: Var },
    /// Strategy extraction needs the marker universal b.
    BNotMarked,
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractError::NoPartition => write!(f, "NO_PARTITION: formula has no partition"),
            ExtractError::NotVerified(v) => write!(f, "NOT_VERIFIED: {}", v),
            ExtractError::MixedClause { clause } => {
                write!(f, "MIXED_CLAUSE: matrix clause {} has q and r variables", clause)
            }
            ExtractError::AmbiguousAxiom { step } => {
                write!(f, "AMBIGUOUS_AXIOM: step {} uses a clause with no side", step)
            }
            ExtractError::PNotPositive(v) => {
                write!(f, "P_NOT_POSITIVE: variable {} occurs negatively in A", v.0)
            }
            ExtractError::MixedPivot { step, var } => {
                write!(f, "MIXED_PIVOT: step {} resolves on unlabeled variable {}", step, var.0)
            }
            ExtractError::BNotMarked => {
                write!(f, "B_NOT_MARKED: formula has no marker universal b")
            }
        }
    }
}

impl std::error::Error for ExtractError {}

/// Side classification of a single matrix clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseSide {
    A,
    B,
    /// Shared variables only and no marker literal; no side is forced.
    Neither,
    /// Carries both q and r variables; not a legal input clause.
    Mixed,
}

/// Side of a single clause: q variables put it in A, r variables in B,
/// both at once is illegal, and a clause over shared variables only is
/// decided by its b literal when one is present.
pub fn side_of_clause(c: &Clause, part: &Partition) -> ClauseSide {
    let has_q = c.iter().any(|l| part.q.contains(&l.var));
    let has_r = c.iter().any(|l| part.r.contains(&l.var));
    match (has_q, has_r) {
        (true, true) => ClauseSide::Mixed,
        (true, false) => ClauseSide::A,
        (false, true) => ClauseSide::B,
        (false, false) => {
            if let Some(b) = part.b {
                for l in c.iter() {
                    if l.var == b {
                        return if l.pol == Pol::Pos {
                            ClauseSide::A
                        } else {
                            ClauseSide::B
                        };
                    }
                }
            }
            ClauseSide::Neither
        }
    }
}

/// Side of an axiom step. CDCL axioms carry their matrix clause verbatim;
/// expansion axioms are matched back to the matrix clauses that produce
/// them, which must agree on a side.
fn side_of_axiom(
    step_id: u32,
    concl: &Concl,
    qbf: &Qbf,
    part: &Partition,
) -> Result<Side, ExtractError> {
    match concl {
        Concl::Cdcl(c) => match side_of_clause(c, part) {
            ClauseSide::A => Ok(Side::A),
            ClauseSide::B => Ok(Side::B),
            ClauseSide::Neither => Err(ExtractError::AmbiguousAxiom { step: step_id }),
            ClauseSide::Mixed => {
                let idx = qbf.matrix.iter().position(|m| m == c).unwrap_or(0);
                Err(ExtractError::MixedClause { clause: idx })
            }
        },
        Concl::Exp(ac) => {
            let mut agreed: Option<Side> = None;
            let mut any_match = false;
            for (i, m) in qbf.matrix.iter().enumerate() {
                if &expansion_axiom(m, &qbf.prefix) != ac {
                    continue;
                }
                any_match = true;
                let s = match side_of_clause(m, part) {
                    ClauseSide::A => Side::A,
                    ClauseSide::B => Side::B,
                    ClauseSide::Neither => {
                        return Err(ExtractError::AmbiguousAxiom { step: step_id })
                    }
                    ClauseSide::Mixed => return Err(ExtractError::MixedClause { clause: i }),
                };
                match agreed {
                    None => agreed = Some(s),
                    Some(prev) if prev == s => {}
                    Some(_) => return Err(ExtractError::AmbiguousAxiom { step: step_id }),
                }
            }
            debug_assert!(any_match, "axiom survived checking but matches no clause");
            agreed.ok_or(ExtractError::AmbiguousAxiom { step: step_id })
        }
    }
}

fn pivot_of(step: &crate::trace::ProofStep) -> (Var, Pol) {
    match &step.aux {
        Aux::Lit(l) => (l.var, l.pol),
        Aux::ALit(al) => (al.lit.var, al.lit.pol),
        _ => unreachable!("resolution aux is a literal"),
    }
}

/// Extract the circuit of a checked refutation of a partitioned formula.
/// In monotone mode, p variables must occur only positively on the A side
/// and selector gates are replaced by their monotone upper bound.
pub fn extract_circuit(trace: &ProofTrace, qbf: &Qbf, mode: Mode) -> Result<Circuit, ExtractError> {
    let part = qbf.partition.as_ref().ok_or(ExtractError::NoPartition)?;
    let report = check_refutation(trace, qbf, None);
    if let Some(v) = report.first_failure {
        return Err(ExtractError::NotVerified(v));
    }

    if mode == Mode::Monotone {
        for (i, c) in qbf.matrix.iter().enumerate() {
            match side_of_clause(c, part) {
                ClauseSide::A => {
                    for l in c.iter() {
                        if part.p.contains(&l.var) && l.pol == Pol::Neg {
                            return Err(ExtractError::PNotPositive(l.var));
                        }
                    }
                }
                ClauseSide::B | ClauseSide::Neither => {}
                ClauseSide::Mixed => return Err(ExtractError::MixedClause { clause: i }),
            }
        }
    }

    let mut gate_of: BTreeMap<u32, usize> = BTreeMap::new();
    let mut gates: Vec<Gate> = Vec::with_capacity(trace.steps.len());
    for step in &trace.steps {
        let kind = match step.rule {
            Rule::Ax => match side_of_axiom(step.id, &step.conclusion, qbf, part)? {
                Side::A => GateKind::Const0,
                Side::B => GateKind::Const1,
            },
            Rule::Ured | Rule::UredStar | Rule::Inst | Rule::Merge => {
                GateKind::Id(gate_of[&step.antecedents[0]])
            }
            Rule::Res => {
                let (x, pol) = pivot_of(step);
                let g1 = gate_of[&step.antecedents[0]];
                let g2 = gate_of[&step.antecedents[1]];
                match part.group_of(x) {
                    Some(crate::qbf::Group::P) => {
                        // v holds the positive pivot; the aux literal is the
                        // pivot as it occurs in the first antecedent.
                        let (gv, gw) = if pol == Pol::Pos { (g1, g2) } else { (g2, g1) };
                        match mode {
                            Mode::General => GateKind::Sel(x, gv, gw),
                            Mode::Monotone => GateKind::Mono3(x, gv, gw),
                        }
                    }
                    Some(crate::qbf::Group::Q) => GateKind::Or2(g1, g2),
                    Some(crate::qbf::Group::R) => GateKind::And2(g1, g2),
                    Some(crate::qbf::Group::B) => GateKind::Id(g1),
                    None => return Err(ExtractError::MixedPivot { step: step.id, var: x }),
                }
            }
        };
        gate_of.insert(step.id, gates.len());
        gates.push(Gate { kind, prov: Some(step.id) });
    }

    let root = trace.root().expect("checked refutation is nonempty");
    Ok(Circuit { inputs: qbf.p_vars(), gates, output: gate_of[&root.id] })
}

/// Extract the universal player's strategy circuit for the marked variable
/// b. Same engine as interpolation; requiring the marker up front gives the
/// caller a clearer error than an ambiguous-axiom failure later.
pub fn extract_b_strategy(
    trace: &ProofTrace,
    qbf: &Qbf,
    mode: Mode,
) -> Result<Circuit, ExtractError> {
    let part = qbf.partition.as_ref().ok_or(ExtractError::NoPartition)?;
    if part.b.is_none() {
        return Err(ExtractError::BNotMarked);
    }
    extract_circuit(trace, qbf, mode)
}
