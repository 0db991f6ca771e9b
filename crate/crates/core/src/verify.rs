//! Semantic verification of extracted circuits against the brute-force
//! evaluator: an interpolant must point at a false half of the formula for
//! every shared assignment, and a strategy circuit must pick a falsifying
//! move for the marker universal.

use crate::circuit::{Circuit, CircuitError};
use crate::oracle::{eval_qbf, OracleError, DEFAULT_EVAL_CAP};
use crate::qbf::{Assignment, Qbf, Var};
use crate::restrict::{one_sided, RestrictError, RestrictionSide};
use std::fmt;

/// Default bound on the number of shared variables enumerated exhaustively.
pub const DEFAULT_P_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyError {
    NoPartition,
    BNotMarked,
    TooManyPVars { count: usize, cap: usize },
    /// The circuit reads an input outside the shared block.
    PartialAssignment(Var),
    /// A one-sided evaluation blew the evaluator's variable cap.
    CapExceeded { unassigned: usize, cap: usize },
    /// The circuit's verdict is wrong at this shared assignment: the side it
    /// picked is satisfiable there.
    NotFalsified { bits: String, side: RestrictionSide },
    Internal(String),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::NoPartition => write!(f, "NO_PARTITION: formula has no partition"),
            VerifyError::BNotMarked => {
                write!(f, "B_NOT_MARKED: formula has no marker universal b")
            }
            VerifyError::TooManyPVars { count, cap } => {
                write!(f, "TOO_MANY_P_VARS: {count} shared variables exceed cap {cap}")
            }
            VerifyError::PartialAssignment(v) => {
                write!(f, "PARTIAL_ASSIGNMENT: input {} has no value", v.0)
            }
            VerifyError::CapExceeded { unassigned, cap } => write!(
                f,
                "CAP_EXCEEDED: {unassigned} unassigned prefix variables exceed cap {cap}"
            ),
            VerifyError::NotFalsified { bits, side } => write!(
                f,
                "NOT_FALSIFIED: side {side} formula is true at p-assignment {bits}"
            ),
            VerifyError::Internal(msg) => write!(f, "INTERNAL_INVARIANT: {msg}"),
        }
    }
}

impl std::error::Error for VerifyError {}

fn map_circuit(e: CircuitError) -> VerifyError {
    match e {
        CircuitError::PartialAssignment(v) => VerifyError::PartialAssignment(v),
    }
}

fn map_oracle(e: OracleError) -> VerifyError {
    match e {
        OracleError::CapExceeded { unassigned, cap } => {
            VerifyError::CapExceeded { unassigned, cap }
        }
    }
}

fn map_restrict(e: RestrictError) -> VerifyError {
    match e {
        RestrictError::NoPartition => VerifyError::NoPartition,
        other => VerifyError::Internal(other.to_string()),
    }
}

/// Check `circuit` as an interpolation circuit for `qbf`: at every shared
/// assignment, the half of the formula the circuit points at must evaluate
/// to false. `p_cap` bounds the exhaustive enumeration of the shared block.
pub fn verify_interpolant(qbf: &Qbf, circuit: &Circuit, p_cap: usize) -> Result<(), VerifyError> {
    if qbf.partition.is_none() {
        return Err(VerifyError::NoPartition);
    }
    let p_vars: Vec<Var> = qbf.p_vars();
    if p_vars.len() > p_cap.min(63) {
        return Err(VerifyError::TooManyPVars {
            count: p_vars.len(),
            cap: p_cap,
        });
    }
    for m in 0u64..(1u64 << p_vars.len()) {
        let mut a = Assignment::new();
        for (i, &v) in p_vars.iter().enumerate() {
            a.set(v, (m >> i) & 1 == 1);
        }
        let side = if circuit.eval(&a).map_err(map_circuit)? {
            RestrictionSide::R
        } else {
            RestrictionSide::Q
        };
        let f = one_sided(qbf, side, &a).map_err(map_restrict)?;
        if eval_qbf(&f, &Assignment::new(), DEFAULT_EVAL_CAP).map_err(map_oracle)? {
            return Err(VerifyError::NotFalsified {
                bits: a.to_bits(&p_vars),
                side,
            });
        }
    }
    Ok(())
}

/// Check `circuit` as a strategy for the marker universal: at every shared
/// assignment, substituting the circuit's move for the marker must leave the
/// whole formula false.
pub fn verify_b_strategy(qbf: &Qbf, circuit: &Circuit, p_cap: usize) -> Result<(), VerifyError> {
    let part = qbf.partition.as_ref().ok_or(VerifyError::NoPartition)?;
    let b = part.b.ok_or(VerifyError::BNotMarked)?;
    let p_vars: Vec<Var> = qbf.p_vars();
    if p_vars.len() > p_cap.min(63) {
        return Err(VerifyError::TooManyPVars {
            count: p_vars.len(),
            cap: p_cap,
        });
    }
    for m in 0u64..(1u64 << p_vars.len()) {
        let mut a = Assignment::new();
        for (i, &v) in p_vars.iter().enumerate() {
            a.set(v, (m >> i) & 1 == 1);
        }
        let mv = circuit.eval(&a).map_err(map_circuit)?;
        let side = if mv {
            RestrictionSide::R
        } else {
            RestrictionSide::Q
        };
        let mut extended = a.clone();
        extended.set(b, mv);
        if eval_qbf(qbf, &extended, DEFAULT_EVAL_CAP).map_err(map_oracle)? {
            return Err(VerifyError::NotFalsified {
                bits: a.to_bits(&p_vars),
                side,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, GateKind};
    use crate::extract::{extract_b_strategy, extract_circuit, Mode};
    use crate::qdimacs::parse_qdimacs;
    use crate::trace::parse_trace;

    const MICRO_Q: &str = "c partition p: 1 q: 2 r: 3\np cnf 3 2\ne 1 0\na 2 3 0\n1 2 0\n-1 3 0\n";
    const MICRO_T: &str = "s qrtf qres\n1 1 2 0 AX 0\n2 1 0 URED 1 0 2 0\n3 -1 3 0 AX 0\n4 -1 0 URED 3 0 3 0\n5 0 RES 2 4 0 1 0\n";

    #[test]
    fn extracted_interpolant_verifies() {
        let qbf = parse_qdimacs(MICRO_Q).unwrap();
        let tr = parse_trace(MICRO_T, &qbf).unwrap();
        let c = extract_circuit(&tr, &qbf, Mode::General).unwrap();
        assert_eq!(verify_interpolant(&qbf, &c, DEFAULT_P_CAP), Ok(()));
    }

    #[test]
    fn wrong_circuit_is_caught_with_a_witness() {
        let qbf = parse_qdimacs(MICRO_Q).unwrap();
        // Constant 0 claims the first half is false everywhere, but at
        // p-assignment 1 the clause (1 2) is satisfied outright.
        let c = Circuit {
            inputs: qbf.p_vars(),
            gates: vec![Gate {
                kind: GateKind::Const0,
                prov: None,
            }],
            output: 0,
        };
        assert_eq!(
            verify_interpolant(&qbf, &c, DEFAULT_P_CAP),
            Err(VerifyError::NotFalsified {
                bits: "1".into(),
                side: RestrictionSide::Q
            })
        );
    }

    #[test]
    fn p_cap_is_enforced() {
        let qbf = parse_qdimacs(MICRO_Q).unwrap();
        let c = Circuit {
            inputs: qbf.p_vars(),
            gates: vec![Gate {
                kind: GateKind::Const0,
                prov: None,
            }],
            output: 0,
        };
        assert_eq!(
            verify_interpolant(&qbf, &c, 0),
            Err(VerifyError::TooManyPVars { count: 1, cap: 0 })
        );
    }

    #[test]
    fn strategy_requires_marker() {
        let qbf = parse_qdimacs(MICRO_Q).unwrap();
        let c = Circuit {
            inputs: qbf.p_vars(),
            gates: vec![Gate {
                kind: GateKind::Const0,
                prov: None,
            }],
            output: 0,
        };
        assert_eq!(
            verify_b_strategy(&qbf, &c, DEFAULT_P_CAP),
            Err(VerifyError::BNotMarked)
        );
    }

    #[test]
    fn extracted_strategy_verifies_and_flips_fail() {
        let q = "c partition p: 1 q: 3 r: 4 b: 2\np cnf 4 4\ne 1 0\na 2 0\ne 3 4 0\n1 2 3 0\n2 -3 0\n-1 -2 4 0\n-2 -4 0\n";
        let t = "s qrtf lquplus\n1 1 2 3 0 AX 0\n2 2 -3 0 AX 0\n3 -1 -2 4 0 AX 0\n4 -2 -4 0 AX 0\n5 1 2 0 RES 1 2 0 3 0\n6 -1 -2 0 RES 3 4 0 4 0\n7 2* 0 RES 5 6 0 1 0\n8 0 URED* 7 0 2* 0\n";
        let qbf = parse_qdimacs(q).unwrap();
        let tr = parse_trace(t, &qbf).unwrap();
        let c = extract_b_strategy(&tr, &qbf, Mode::General).unwrap();
        assert_eq!(verify_b_strategy(&qbf, &c, DEFAULT_P_CAP), Ok(()));
        assert_eq!(verify_interpolant(&qbf, &c, DEFAULT_P_CAP), Ok(()));

        // The complemented strategy plays into the satisfiable half at 0.
        let flipped = Circuit {
            inputs: c.inputs.clone(),
            gates: vec![Gate {
                kind: GateKind::Const1,
                prov: None,
            }],
            output: 0,
        };
        let err = verify_b_strategy(&qbf, &flipped, DEFAULT_P_CAP).unwrap_err();
        assert!(matches!(err, VerifyError::NotFalsified { .. }));
    }
}
