//! QBF resolution proof toolkit: proof checking for CDCL-style and
//! expansion-based calculi, interpolation-circuit and strategy-circuit
//! extraction, per-assignment proof restriction, brute-force semantic
//! oracles, and a clique/no-clique family generator.

pub mod annot;
pub mod checker;
pub mod clique;
pub mod circuit;
pub mod extract;
pub mod oracle;
pub mod qbf;
pub mod qdimacs;
pub mod restrict;
pub mod trace;
pub mod verify;

pub use annot::{
    complete, filter_annotation, instantiate, merge_annotations, preceq_ann, preceq_annotated,
    ALit, Ann, AnnClause, AnnVal,
};
pub use checker::{check_refutation, expansion_axiom, CheckReport, Label, Violation};
pub use clique::{gen_clique_noclique, gen_fb, has_k_clique, CliqueError, CliqueNoClique, FbError};
pub use extract::{
    extract_b_strategy, extract_circuit, side_of_clause, ClauseSide, ExtractError, Mode, Side,
};
pub use circuit::{
    parse_netlist, to_dot, write_netlist, Circuit, CircuitError, Gate, GateKind, NetlistError,
};
pub use qbf::{
    preceq_clause, restrict_clause, Assignment, BitsError, Clause, Group, Lit, Partition, Pol,
    Prefix, Qbf, Quant, Restricted, RestrictClauseError, Var,
};
pub use oracle::{eval_qbf, find_qres_refutation, OracleError, SolveOutcome, DEFAULT_EVAL_CAP};
pub use qdimacs::{parse_qdimacs, write_qdimacs, QdimacsError};
pub use restrict::{
    one_sided, restrict_proof, NodeOutcome, RestrictError, RestrictedProof, RestrictionSide,
};
pub use verify::{verify_b_strategy, verify_interpolant, VerifyError, DEFAULT_P_CAP};
pub use trace::{
    parse_trace, write_trace, Aux, Calculus, Concl, Family, ProofStep, ProofTrace, Rule,
    TraceError,
};
