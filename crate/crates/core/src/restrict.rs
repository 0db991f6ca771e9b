//! Restriction of a refutation under a point assignment to the shared
//! variables.
//!
//! Given a proof, its extracted circuit, and an assignment `a` to the shared
//! block, the circuit value picks a side: 0 means the first group's half of
//! the formula is false under `a`, 1 means the second group's half is. This
//! module replays the proof on the nodes whose gate agrees with the root and
//! produces a standalone refutation of the chosen one-sided formula,
//! witnessing that the circuit's answer is correct at `a`.
//!
//! Every replayed node `u` carries a clause `D_u` that subsumes the original
//! conclusion (after dropping marker literals when a marker universal is
//! present). The emitted refutation is re-checked from scratch before it is
//! returned.

use crate::annot::{
    instantiate, merge_annotations, preceq_ann, preceq_annotated, ALit, Ann, AnnClause,
};
use crate::checker::{cdcl_resolve, check_refutation, irm_decompose, irm_resolve};
use crate::circuit::Circuit;
use crate::extract::{extract_circuit, side_of_clause, ClauseSide, ExtractError, Mode};
use crate::qbf::{
    preceq_clause, restrict_clause, Assignment, Clause, Group, Lit, Pol, Prefix, Qbf, Quant,
    Restricted, Var,
};
use crate::trace::{Aux, Calculus, Concl, Family, ProofStep, ProofTrace, Rule};
use crate::Violation;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Which half of the partitioned formula the restricted refutation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestrictionSide {
    /// Circuit value 0: refute the first-group half.
    Q,
    /// Circuit value 1: refute the second-group half.
    R,
}

impl RestrictionSide {
    pub fn name(self) -> &'static str {
        match self {
            RestrictionSide::Q => "Q",
            RestrictionSide::R => "R",
        }
    }
}

impl fmt::Display for RestrictionSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fate of one original proof step under the restriction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeOutcome {
    /// The step is on the replayed side and feeds the restricted root; the
    /// payload is its replayed clause (before dropping falsified literals).
    Kept(Concl),
    Pruned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedProof {
    pub side: RestrictionSide,
    /// The one-sided formula the emitted trace refutes.
    pub formula: Qbf,
    pub trace: ProofTrace,
    /// One entry per original step, in original order.
    pub nodes: Vec<(u32, NodeOutcome)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RestrictError {
    NoPartition,
    NotVerified(Violation),
    /// The supplied circuit is not the one this proof extracts to.
    CircuitMismatch,
    PartialAssignment(Var),
    /// The replay broke one of its own invariants; always a bug or an
    /// unsupported input shape, never a property of a valid proof.
    Internal { step: u32, detail: String },
}

impl fmt::Display for RestrictError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestrictError::NoPartition => write!(f, "NO_PARTITION: formula has no partition"),
            RestrictError::NotVerified(v) => write!(f, "NOT_VERIFIED: {v}"),
            RestrictError::CircuitMismatch => {
                write!(f, "CIRCUIT_MISMATCH: circuit does not match the proof")
            }
            RestrictError::PartialAssignment(v) => {
                write!(f, "PARTIAL_ASSIGNMENT: input {} has no value", v.0)
            }
            RestrictError::Internal { step, detail } => {
                write!(f, "INTERNAL_INVARIANT at step {step}: {detail}")
            }
        }
    }
}

impl std::error::Error for RestrictError {}

/// Build the one-sided formula for `side` under `a`: the side's quantifier
/// block (with the marker universal, if any, leading it), and the side's
/// matrix clauses restricted by `a`, satisfied ones dropped.
pub fn one_sided(qbf: &Qbf, side: RestrictionSide, a: &Assignment) -> Result<Qbf, RestrictError> {
    let part = qbf.partition.as_ref().ok_or(RestrictError::NoPartition)?;
    let want = match side {
        RestrictionSide::Q => ClauseSide::A,
        RestrictionSide::R => ClauseSide::B,
    };
    let group = match side {
        RestrictionSide::Q => &part.q,
        RestrictionSide::R => &part.r,
    };
    let mut order: Vec<(Var, Quant)> = Vec::new();
    if let Some(b) = part.b {
        order.push((b, Quant::Forall));
    }
    for (v, qn) in qbf.prefix.vars() {
        if group.contains(&v) {
            order.push((v, qn));
        }
    }
    let mut matrix: Vec<Clause> = Vec::new();
    for c in &qbf.matrix {
        if side_of_clause(c, part) != want {
            continue;
        }
        match restrict_clause(c, a) {
            Ok(Restricted::Satisfied) => {}
            Ok(Restricted::Clause(rc)) => {
                if !matrix.contains(&rc) {
                    matrix.push(rc);
                }
            }
            Err(e) => {
                return Err(RestrictError::Internal {
                    step: 0,
                    detail: e.to_string(),
                })
            }
        }
    }
    Ok(Qbf {
        prefix: Prefix::new(order),
        matrix,
        partition: None,
    })
}

// Replay bookkeeping. A node either has a replayed clause with the recipe
// that produced it, or a poison explaining why it could not be replayed.
// Poison only matters if the node ends up feeding the restricted root.

type MergeRec = (ALit, ALit, ALit);

#[derive(Clone)]
enum ExpBase {
    /// Single-antecedent chain: optional instantiation, then merges.
    From {
        child: u32,
        inst: Option<(Ann, AnnClause)>,
    },
    /// Resolution on the replayed pivot images, then merges.
    Res {
        v: u32,
        w: u32,
        piv1: ALit,
        res: AnnClause,
    },
}

#[derive(Clone)]
enum DKind {
    Leaf,
    /// Replayed clause equals the child's, possibly minus one literal; emits
    /// no step of its own.
    Copy { child: u32 },
    Ured { child: u32, lit: Lit },
    ResC { v: u32, w: u32, pivot: Lit },
    Exp { base: ExpBase, merges: Vec<MergeRec> },
}

#[derive(Clone)]
struct NodeData {
    d: Concl,
    kind: DKind,
}

#[derive(Clone)]
struct Poison {
    step: u32,
    detail: String,
}

/// Deliberately merge literals of `d` until each maps to a distinct literal
/// of `target` it subsumes. Returns the fitted clause and the merges applied,
/// in order. Fails only if some literal of `d` subsumes nothing in `target`.
fn fit(d: AnnClause, target: &AnnClause) -> Result<(AnnClause, Vec<MergeRec>), String> {
    fn augment(
        i: usize,
        adj: &[Vec<usize>],
        owner: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none() || augment(owner[j].unwrap(), adj, owner, seen) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }

    let tlits: Vec<&ALit> = target.iter().collect();
    let mut cur = d;
    let mut merges = Vec::new();
    loop {
        let lits: Vec<ALit> = cur.iter().cloned().collect();
        let adj: Vec<Vec<usize>> = lits
            .iter()
            .map(|l| {
                tlits
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.lit == l.lit && preceq_ann(&l.ann, &t.ann))
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        let mut owner: Vec<Option<usize>> = vec![None; tlits.len()];
        let mut matched = vec![false; lits.len()];
        for (i, m) in matched.iter_mut().enumerate() {
            let mut seen = vec![false; tlits.len()];
            *m = augment(i, &adj, &mut owner, &mut seen);
        }
        let Some(i) = (0..lits.len()).find(|&i| !matched[i]) else {
            return Ok((cur, merges));
        };
        let Some(&j) = adj[i].first() else {
            return Err(format!(
                "literal {} subsumes nothing in the target clause",
                lits[i]
            ));
        };
        // i failed to match, so every candidate target is owned.
        let occupant = owner[j].expect("unmatched literal's candidate must be owned");
        let a = lits[i].clone();
        let b = lits[occupant].clone();
        let Some(mann) = merge_annotations(&a.ann, &b.ann) else {
            return Err(format!("cannot merge {} with {}", a, b));
        };
        let m = ALit::new(a.lit, mann);
        merges.push((a.clone(), b.clone(), m.clone()));
        cur = cur.merge_pair(&a, &b, m);
    }
}

/// Instantiate `d` by `tau`, then fit the result into `target`. Records an
/// instantiation step only when it changes the clause.
fn minst(
    tau: &Ann,
    d: &AnnClause,
    target: &AnnClause,
    prefix: &Prefix,
    child: u32,
) -> Result<(AnnClause, DKind), String> {
    let inst_res = instantiate(tau, d, prefix);
    let inst = (inst_res != *d).then(|| (tau.clone(), inst_res.clone()));
    let (fitted, merges) = fit(inst_res, target)?;
    Ok((
        fitted,
        DKind::Exp {
            base: ExpBase::From { child, inst },
            merges,
        },
    ))
}

/// Find the second-antecedent pivot image that validates an expansion
/// resolution step, in canonical literal order, together with the stated
/// step's residue split.
fn find_exp_split(
    c2: &AnnClause,
    aux: &ALit,
    c1: &AnnClause,
    stated: &AnnClause,
    prefix: &Prefix,
) -> Option<(ALit, Ann, Ann, Ann)> {
    let comp = aux.lit.complement()?;
    for cand in c2.iter().filter(|al| al.lit == comp) {
        if let Ok((tau, xi, sigma)) = irm_decompose(&aux.ann, &cand.ann) {
            if let Ok(r) = irm_resolve(c1, c2, aux, cand, prefix) {
                if &r == stated {
                    return Some((cand.clone(), tau, xi, sigma));
                }
            }
        }
    }
    None
}

fn strip_cdcl(c: &Clause, a: &Assignment) -> Clause {
    Clause::new(c.iter().filter(|l| l.eval(a) != Some(false)).copied().collect())
}

fn strip_exp(c: &AnnClause, a: &Assignment) -> AnnClause {
    AnnClause::new(
        c.iter()
            .filter(|al| al.lit.eval(a) != Some(false))
            .cloned()
            .collect(),
    )
}

struct Emitter {
    steps: Vec<ProofStep>,
    next: u32,
}

impl Emitter {
    fn emit(&mut self, conclusion: Concl, rule: Rule, antecedents: Vec<u32>, aux: Aux) -> u32 {
        let id = self.next;
        self.next += 1;
        self.steps.push(ProofStep {
            id,
            conclusion,
            rule,
            antecedents,
            aux,
        });
        id
    }
}

/// Replay `trace` under `a` on the side selected by `circuit` and emit a
/// refutation of that side's restricted formula. `circuit` must be exactly
/// the circuit extracted from this proof (general or monotone).
pub fn restrict_proof(
    trace: &ProofTrace,
    qbf: &Qbf,
    circuit: &Circuit,
    a: &Assignment,
) -> Result<RestrictedProof, RestrictError> {
    let part = qbf.partition.as_ref().ok_or(RestrictError::NoPartition)?;
    let report = check_refutation(trace, qbf, None);
    if let Some(v) = report.first_failure {
        return Err(RestrictError::NotVerified(v));
    }
    for v in qbf.p_vars() {
        if a.get(v).is_none() {
            return Err(RestrictError::PartialAssignment(v));
        }
    }
    let mode = if circuit.has_mono3() {
        Mode::Monotone
    } else {
        Mode::General
    };
    let mine = extract_circuit(trace, qbf, mode).map_err(|e| match e {
        ExtractError::NoPartition => RestrictError::NoPartition,
        ExtractError::NotVerified(v) => RestrictError::NotVerified(v),
        other => RestrictError::Internal {
            step: 0,
            detail: other.to_string(),
        },
    })?;
    if &mine != circuit {
        return Err(RestrictError::CircuitMismatch);
    }

    let vals = match mine.eval_all(a) {
        Ok(v) => v,
        Err(crate::circuit::CircuitError::PartialAssignment(v)) => {
            return Err(RestrictError::PartialAssignment(v))
        }
    };
    let root_val = vals[mine.output];
    let side = if root_val {
        RestrictionSide::R
    } else {
        RestrictionSide::Q
    };

    let family = trace.calculus.family();
    let long = trace.calculus.long_distance();
    let prefix = &qbf.prefix;
    let fb = part.b;
    let idx_of: BTreeMap<u32, usize> = trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id, i))
        .collect();
    let gval = |id: u32| vals[idx_of[&id]];

    let mut data: BTreeMap<u32, Result<NodeData, Poison>> = BTreeMap::new();

    // Bottom-up replay over the active cone (gate value equals the root's).
    for (i, step) in trace.steps.iter().enumerate() {
        if vals[i] != root_val {
            continue;
        }
        let sid = step.id;
        let poison = |detail: String| Poison { step: sid, detail };
        let fetch_cdcl = |data: &BTreeMap<u32, Result<NodeData, Poison>>,
                          id: u32|
         -> Result<Clause, Poison> {
            match data.get(&id) {
                Some(Ok(nd)) => match &nd.d {
                    Concl::Cdcl(c) => Ok(c.clone()),
                    Concl::Exp(_) => Err(poison("antecedent clause family mismatch".into())),
                },
                Some(Err(p)) => Err(p.clone()),
                None => Err(poison(format!("required antecedent {id} is inactive"))),
            }
        };
        let fetch_exp = |data: &BTreeMap<u32, Result<NodeData, Poison>>,
                         id: u32|
         -> Result<AnnClause, Poison> {
            match data.get(&id) {
                Some(Ok(nd)) => match &nd.d {
                    Concl::Exp(c) => Ok(c.clone()),
                    Concl::Cdcl(_) => Err(poison("antecedent clause family mismatch".into())),
                },
                Some(Err(p)) => Err(p.clone()),
                None => Err(poison(format!("required antecedent {id} is inactive"))),
            }
        };

        let computed: Result<NodeData, Poison> = (|| match family {
            Family::Cdcl => {
                let stated = match &step.conclusion {
                    Concl::Cdcl(c) => c,
                    Concl::Exp(_) => unreachable!("checked trace"),
                };
                match step.rule {
                    Rule::Ax => Ok(NodeData {
                        d: Concl::Cdcl(stated.clone()),
                        kind: DKind::Leaf,
                    }),
                    Rule::Ured | Rule::UredStar => {
                        let child = step.antecedents[0];
                        let dv = fetch_cdcl(&data, child)?;
                        let red = match step.aux {
                            Aux::Lit(l) => l,
                            _ => unreachable!("checked trace"),
                        };
                        let occ = dv.pols_of(red.var);
                        if occ.is_empty() {
                            Ok(NodeData {
                                d: Concl::Cdcl(dv),
                                kind: DKind::Copy { child },
                            })
                        } else {
                            let actual = Lit {
                                var: red.var,
                                pol: occ[0],
                            };
                            Ok(NodeData {
                                d: Concl::Cdcl(dv.without_var(red.var)),
                                kind: DKind::Ured { child, lit: actual },
                            })
                        }
                    }
                    Rule::Res => {
                        let aux = match step.aux {
                            Aux::Lit(l) => l,
                            _ => unreachable!("checked trace"),
                        };
                        match part.group_of(aux.var) {
                            Some(Group::P) => {
                                let (v_id, w_id) = if aux.pol == Pol::Pos {
                                    (step.antecedents[0], step.antecedents[1])
                                } else {
                                    (step.antecedents[1], step.antecedents[0])
                                };
                                let xval = a.get(aux.var).expect("shared block fully assigned");
                                let take_w = if mode == Mode::Monotone {
                                    xval || (gval(v_id) && !gval(w_id))
                                } else {
                                    xval
                                };
                                let (child, strip) = if take_w {
                                    (w_id, Lit::neg(aux.var))
                                } else {
                                    (v_id, Lit::pos(aux.var))
                                };
                                let dc = fetch_cdcl(&data, child)?;
                                Ok(NodeData {
                                    d: Concl::Cdcl(dc.without(strip)),
                                    kind: DKind::Copy { child },
                                })
                            }
                            Some(Group::Q) | Some(Group::R) => {
                                let trigger = part.group_of(aux.var) == Some(Group::Q);
                                let v_id = step.antecedents[0];
                                let w_id = step.antecedents[1];
                                let piv_v = aux;
                                let piv_w = aux.complement().expect("pivot is never starred");
                                if gval(v_id) == trigger {
                                    let dv = fetch_cdcl(&data, v_id)?;
                                    return Ok(NodeData {
                                        d: Concl::Cdcl(dv),
                                        kind: DKind::Copy { child: v_id },
                                    });
                                }
                                if gval(w_id) == trigger {
                                    let dw = fetch_cdcl(&data, w_id)?;
                                    return Ok(NodeData {
                                        d: Concl::Cdcl(dw),
                                        kind: DKind::Copy { child: w_id },
                                    });
                                }
                                let dv = fetch_cdcl(&data, v_id)?;
                                if !dv.contains(piv_v) {
                                    return Ok(NodeData {
                                        d: Concl::Cdcl(dv),
                                        kind: DKind::Copy { child: v_id },
                                    });
                                }
                                let dw = fetch_cdcl(&data, w_id)?;
                                if !dw.contains(piv_w) {
                                    return Ok(NodeData {
                                        d: Concl::Cdcl(dw),
                                        kind: DKind::Copy { child: w_id },
                                    });
                                }
                                match cdcl_resolve(&dv, &dw, piv_v, long, prefix) {
                                    Ok(r) => Ok(NodeData {
                                        d: Concl::Cdcl(r),
                                        kind: DKind::ResC {
                                            v: v_id,
                                            w: w_id,
                                            pivot: piv_v,
                                        },
                                    }),
                                    Err(l) => Err(poison(format!(
                                        "replayed resolution fails: {}",
                                        l.name()
                                    ))),
                                }
                            }
                            Some(Group::B) => {
                                // Marker-pivot step: the marker literal is one-
                                // sided per replay side, so the first
                                // antecedent's clause already works.
                                let child = step.antecedents[0];
                                let dc = fetch_cdcl(&data, child)?;
                                Ok(NodeData {
                                    d: Concl::Cdcl(dc),
                                    kind: DKind::Copy { child },
                                })
                            }
                            None => Err(poison("pivot outside the partition".into())),
                        }
                    }
                    Rule::Inst | Rule::Merge => unreachable!("checked trace"),
                }
            }
            Family::Expansion => {
                let stated = match &step.conclusion {
                    Concl::Exp(c) => c,
                    Concl::Cdcl(_) => unreachable!("checked trace"),
                };
                match step.rule {
                    Rule::Ax => Ok(NodeData {
                        d: Concl::Exp(stated.clone()),
                        kind: DKind::Leaf,
                    }),
                    Rule::Inst => {
                        let child = step.antecedents[0];
                        let tau = match &step.aux {
                            Aux::Inst(t) => t.clone(),
                            _ => unreachable!("checked trace"),
                        };
                        let dv = fetch_exp(&data, child)?;
                        let (d, kind) = minst(&tau, &dv, stated, prefix, child)
                            .map_err(&poison)?;
                        Ok(NodeData {
                            d: Concl::Exp(d),
                            kind,
                        })
                    }
                    Rule::Merge => {
                        let child = step.antecedents[0];
                        let dv = fetch_exp(&data, child)?;
                        let (d, merges) = fit(dv, stated).map_err(&poison)?;
                        Ok(NodeData {
                            d: Concl::Exp(d),
                            kind: DKind::Exp {
                                base: ExpBase::From { child, inst: None },
                                merges,
                            },
                        })
                    }
                    Rule::Res => {
                        let piv1 = match &step.aux {
                            Aux::ALit(al) => al.clone(),
                            _ => unreachable!("checked trace"),
                        };
                        match part.group_of(piv1.lit.var) {
                            Some(Group::P) => {
                                // Shared-block pivots carry empty annotations,
                                // so this mirrors the clausal case.
                                let (v_id, w_id) = if piv1.lit.pol == Pol::Pos {
                                    (step.antecedents[0], step.antecedents[1])
                                } else {
                                    (step.antecedents[1], step.antecedents[0])
                                };
                                let xval =
                                    a.get(piv1.lit.var).expect("shared block fully assigned");
                                let take_w = if mode == Mode::Monotone {
                                    xval || (gval(v_id) && !gval(w_id))
                                } else {
                                    xval
                                };
                                let (child, strip) = if take_w {
                                    (w_id, Lit::neg(piv1.lit.var))
                                } else {
                                    (v_id, Lit::pos(piv1.lit.var))
                                };
                                let dc = fetch_exp(&data, child)?;
                                Ok(NodeData {
                                    d: Concl::Exp(dc.without(&ALit::new(strip, Ann::empty()))),
                                    kind: DKind::Copy { child },
                                })
                            }
                            Some(Group::Q) | Some(Group::R) => {
                                let v_id = step.antecedents[0];
                                let w_id = step.antecedents[1];
                                let c1 = match &trace.steps[idx_of[&v_id]].conclusion {
                                    Concl::Exp(c) => c,
                                    Concl::Cdcl(_) => unreachable!("checked trace"),
                                };
                                let c2 = match &trace.steps[idx_of[&w_id]].conclusion {
                                    Concl::Exp(c) => c,
                                    Concl::Cdcl(_) => unreachable!("checked trace"),
                                };
                                let Some((piv2, _tau, xi, sigma)) =
                                    find_exp_split(c2, &piv1, c1, stated, prefix)
                                else {
                                    return Err(poison(
                                        "no validating pivot split found".into(),
                                    ));
                                };
                                let trigger =
                                    part.group_of(piv1.lit.var) == Some(Group::Q);
                                if gval(v_id) == trigger {
                                    let dv = fetch_exp(&data, v_id)?;
                                    let (d, kind) = minst(
                                        &sigma.star_to_zero(),
                                        &dv,
                                        stated,
                                        prefix,
                                        v_id,
                                    )
                                    .map_err(&poison)?;
                                    return Ok(NodeData {
                                        d: Concl::Exp(d),
                                        kind,
                                    });
                                }
                                if gval(w_id) == trigger {
                                    let dw = fetch_exp(&data, w_id)?;
                                    let (d, kind) = minst(
                                        &xi.star_to_zero(),
                                        &dw,
                                        stated,
                                        prefix,
                                        w_id,
                                    )
                                    .map_err(&poison)?;
                                    return Ok(NodeData {
                                        d: Concl::Exp(d),
                                        kind,
                                    });
                                }
                                let dv = fetch_exp(&data, v_id)?;
                                let m1 = dv
                                    .iter()
                                    .find(|al| {
                                        al.lit == piv1.lit && preceq_ann(&al.ann, &piv1.ann)
                                    })
                                    .cloned();
                                let Some(m1) = m1 else {
                                    let (d, kind) = minst(
                                        &sigma.star_to_zero(),
                                        &dv,
                                        stated,
                                        prefix,
                                        v_id,
                                    )
                                    .map_err(&poison)?;
                                    return Ok(NodeData {
                                        d: Concl::Exp(d),
                                        kind,
                                    });
                                };
                                let dw = fetch_exp(&data, w_id)?;
                                let m2 = dw
                                    .iter()
                                    .find(|al| {
                                        al.lit == piv2.lit && preceq_ann(&al.ann, &piv2.ann)
                                    })
                                    .cloned();
                                let Some(m2) = m2 else {
                                    let (d, kind) = minst(
                                        &xi.star_to_zero(),
                                        &dw,
                                        stated,
                                        prefix,
                                        w_id,
                                    )
                                    .map_err(&poison)?;
                                    return Ok(NodeData {
                                        d: Concl::Exp(d),
                                        kind,
                                    });
                                };
                                let res = irm_resolve(&dv, &dw, &m1, &m2, prefix)
                                    .map_err(|l| {
                                        poison(format!(
                                            "replayed resolution fails: {}",
                                            l.name()
                                        ))
                                    })?;
                                let (d, merges) =
                                    fit(res.clone(), stated).map_err(&poison)?;
                                Ok(NodeData {
                                    d: Concl::Exp(d),
                                    kind: DKind::Exp {
                                        base: ExpBase::Res {
                                            v: v_id,
                                            w: w_id,
                                            piv1: m1,
                                            res,
                                        },
                                        merges,
                                    },
                                })
                            }
                            Some(Group::B) | None => {
                                Err(poison("pivot outside the expansion partition".into()))
                            }
                        }
                    }
                    Rule::Ured | Rule::UredStar => unreachable!("checked trace"),
                }
            }
        })();

        // Post-checks: a replayed clause satisfied under `a` is useless, and
        // every replayed clause must subsume its original conclusion (modulo
        // marker literals when a marker universal is present).
        let checked = computed.and_then(|nd| {
            match (&nd.d, &step.conclusion) {
                (Concl::Cdcl(dc), Concl::Cdcl(cu)) => {
                    if dc.iter().any(|l| l.eval(a) == Some(true)) {
                        return Err(poison("replayed clause is satisfied".into()));
                    }
                    let cmp = match fb {
                        Some(b) => dc.without_var(b),
                        None => dc.clone(),
                    };
                    if !preceq_clause(&cmp, cu) {
                        return Err(poison(
                            "replayed clause does not subsume the original".into(),
                        ));
                    }
                    if let Some(b) = fb {
                        if dc.contains(Lit::star(b)) {
                            return Err(poison("marker literal was merged".into()));
                        }
                    }
                }
                (Concl::Exp(de), Concl::Exp(cu)) => {
                    if de.iter().any(|al| al.lit.eval(a) == Some(true)) {
                        return Err(poison("replayed clause is satisfied".into()));
                    }
                    if !preceq_annotated(de, cu) {
                        return Err(poison(
                            "replayed clause does not subsume the original".into(),
                        ));
                    }
                }
                _ => return Err(poison("clause family mismatch".into())),
            }
            Ok(nd)
        });
        data.insert(sid, checked);
    }

    // Walk the replayed root's cone to find the nodes actually used.
    let root_id = trace.root().expect("checked trace is nonempty").id;
    let mut used: BTreeSet<u32> = BTreeSet::new();
    let mut stack = vec![root_id];
    while let Some(id) = stack.pop() {
        if !used.insert(id) {
            continue;
        }
        let nd = match data.get(&id) {
            Some(Ok(nd)) => nd,
            Some(Err(p)) => {
                return Err(RestrictError::Internal {
                    step: p.step,
                    detail: p.detail.clone(),
                })
            }
            None => {
                return Err(RestrictError::Internal {
                    step: id,
                    detail: "used node was never replayed".into(),
                })
            }
        };
        match &nd.kind {
            DKind::Leaf => {}
            DKind::Copy { child } | DKind::Ured { child, .. } => stack.push(*child),
            DKind::ResC { v, w, .. } => {
                stack.push(*v);
                stack.push(*w);
            }
            DKind::Exp { base, .. } => match base {
                ExpBase::From { child, .. } => stack.push(*child),
                ExpBase::Res { v, w, .. } => {
                    stack.push(*v);
                    stack.push(*w);
                }
            },
        }
    }

    // Emit the restricted refutation in original step order (a valid
    // topological order), renumbering densely from 1. Falsified shared
    // literals are dropped from every emitted conclusion.
    let mut em = Emitter {
        steps: Vec::new(),
        next: 1,
    };
    let mut mapped: BTreeMap<u32, u32> = BTreeMap::new();
    let node_of = |id: u32, data: &BTreeMap<u32, Result<NodeData, Poison>>| -> NodeData {
        match data.get(&id) {
            Some(Ok(nd)) => nd.clone(),
            _ => unreachable!("used nodes are replayed"),
        }
    };
    for &id in &used {
        let nd = node_of(id, &data);
        let pid = match &nd.kind {
            DKind::Copy { child } => mapped[child],
            DKind::Leaf => {
                let concl = match &nd.d {
                    Concl::Cdcl(c) => Concl::Cdcl(strip_cdcl(c, a)),
                    Concl::Exp(c) => Concl::Exp(strip_exp(c, a)),
                };
                em.emit(concl, Rule::Ax, Vec::new(), Aux::None)
            }
            DKind::Ured { child, lit } => {
                let rule = if lit.is_star() {
                    Rule::UredStar
                } else {
                    Rule::Ured
                };
                let concl = match &nd.d {
                    Concl::Cdcl(c) => Concl::Cdcl(strip_cdcl(c, a)),
                    Concl::Exp(_) => unreachable!("clausal rule"),
                };
                em.emit(concl, rule, vec![mapped[child]], Aux::Lit(*lit))
            }
            DKind::ResC { v, w, pivot } => {
                let concl = match &nd.d {
                    Concl::Cdcl(c) => Concl::Cdcl(strip_cdcl(c, a)),
                    Concl::Exp(_) => unreachable!("clausal rule"),
                };
                em.emit(
                    concl,
                    Rule::Res,
                    vec![mapped[v], mapped[w]],
                    Aux::Lit(*pivot),
                )
            }
            DKind::Exp { base, merges } => {
                let (mut cur_id, mut cur_clause) = match base {
                    ExpBase::From { child, inst } => {
                        let mut cid = mapped[child];
                        let mut cc = match node_of(*child, &data).d {
                            Concl::Exp(c) => c,
                            Concl::Cdcl(_) => unreachable!("expansion rule"),
                        };
                        if let Some((tau, after)) = inst {
                            cid = em.emit(
                                Concl::Exp(strip_exp(after, a)),
                                Rule::Inst,
                                vec![cid],
                                Aux::Inst(tau.clone()),
                            );
                            cc = after.clone();
                        }
                        (cid, cc)
                    }
                    ExpBase::Res { v, w, piv1, res } => {
                        let sid = em.emit(
                            Concl::Exp(strip_exp(res, a)),
                            Rule::Res,
                            vec![mapped[v], mapped[w]],
                            Aux::ALit(piv1.clone()),
                        );
                        (sid, res.clone())
                    }
                };
                for (ma, mb, mm) in merges {
                    let next = cur_clause.merge_pair(ma, mb, mm.clone());
                    cur_id = em.emit(
                        Concl::Exp(strip_exp(&next, a)),
                        Rule::Merge,
                        vec![cur_id],
                        Aux::Merge(ma.clone(), mb.clone()),
                    );
                    cur_clause = next;
                }
                cur_id
            }
        };
        mapped.insert(id, pid);
    }

    // Close out the root. With a marker universal, the replayed root may
    // still carry marker literals; reduce them away. Everything else must
    // already be empty.
    let root_nd = node_of(root_id, &data);
    let mut final_id = mapped[&root_id];
    match &root_nd.d {
        Concl::Cdcl(c) => {
            let mut remaining = strip_cdcl(c, a);
            loop {
                let Some(lit) = remaining.iter().next().copied() else {
                    break;
                };
                let Some(b) = fb else {
                    return Err(RestrictError::Internal {
                        step: root_id,
                        detail: "replayed root clause is nonempty".into(),
                    });
                };
                if lit.var != b {
                    return Err(RestrictError::Internal {
                        step: root_id,
                        detail: "non-marker literal survives at the root".into(),
                    });
                }
                let rule = if lit.is_star() {
                    if !long {
                        return Err(RestrictError::Internal {
                            step: root_id,
                            detail: "merged marker literal in a short-distance calculus".into(),
                        });
                    }
                    Rule::UredStar
                } else {
                    Rule::Ured
                };
                remaining = remaining.without(lit);
                final_id = em.emit(
                    Concl::Cdcl(remaining.clone()),
                    rule,
                    vec![final_id],
                    Aux::Lit(lit),
                );
            }
        }
        Concl::Exp(c) => {
            if !strip_exp(c, a).is_empty() {
                return Err(RestrictError::Internal {
                    step: root_id,
                    detail: "replayed root clause is nonempty".into(),
                });
            }
        }
    }
    let _ = final_id;

    let calculus = match family {
        Family::Cdcl => trace.calculus,
        Family::Expansion => Calculus::Irmcalc,
    };
    let pi = ProofTrace {
        calculus,
        steps: em.steps,
    };
    let formula = one_sided(qbf, side, a)?;
    let rep = check_refutation(&pi, &formula, None);
    if let Some(v) = rep.first_failure {
        return Err(RestrictError::Internal {
            step: v.step,
            detail: format!("restricted proof fails its own check: {}", v.label.name()),
        });
    }

    let nodes = trace
        .steps
        .iter()
        .map(|s| {
            let outcome = if used.contains(&s.id) {
                NodeOutcome::Kept(node_of(s.id, &data).d)
            } else {
                NodeOutcome::Pruned
            };
            (s.id, outcome)
        })
        .collect();

    Ok(RestrictedProof {
        side,
        formula,
        trace: pi,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qbf::Partition;
    use crate::qdimacs::parse_qdimacs;
    use crate::trace::parse_trace;

    fn setup(qdimacs: &str, trace: &str) -> (Qbf, ProofTrace, Circuit) {
        let qbf = parse_qdimacs(qdimacs).unwrap();
        let tr = parse_trace(trace, &qbf).unwrap();
        let circ = extract_circuit(&tr, &qbf, Mode::General).unwrap();
        (qbf, tr, circ)
    }

    fn bit(v: u32, val: bool) -> Assignment {
        let mut a = Assignment::new();
        a.set(Var(v), val);
        a
    }

    const MICRO_Q: &str = "c partition p: 1 q: 2 r: 3\np cnf 3 2\ne 1 0\na 2 3 0\n1 2 0\n-1 3 0\n";
    const MICRO_T: &str = "s qrtf qres\n1 1 2 0 AX 0\n2 1 0 URED 1 0 2 0\n3 -1 3 0 AX 0\n4 -1 0 URED 3 0 3 0\n5 0 RES 2 4 0 1 0\n";

    #[test]
    fn micro_restriction_both_points() {
        let (qbf, tr, circ) = setup(MICRO_Q, MICRO_T);
        let r0 = restrict_proof(&tr, &qbf, &circ, &bit(1, false)).unwrap();
        assert_eq!(r0.side, RestrictionSide::Q);
        assert_eq!(r0.formula.matrix, vec![Clause::new(vec![Lit::pos(Var(2))])]);
        assert_eq!(r0.trace.steps.len(), 2);
        assert_eq!(
            r0.nodes.iter().filter(|(_, o)| *o == NodeOutcome::Pruned).count(),
            2
        );
        let r1 = restrict_proof(&tr, &qbf, &circ, &bit(1, true)).unwrap();
        assert_eq!(r1.side, RestrictionSide::R);
        assert_eq!(r1.formula.matrix, vec![Clause::new(vec![Lit::pos(Var(3))])]);
        assert_eq!(r1.trace.steps.len(), 2);
    }

    #[test]
    fn long_distance_merge_survives_restriction() {
        let q = "c partition p: 1 q: 2 3 r: 4 5\np cnf 5 4\ne 1 2 0\na 3 4 0\ne 5 0\n1 2 3 0\n1 -2 -3 0\n-1 4 5 0\n-1 4 -5 0\n";
        let t = "s qrtf ldqres\n1 1 2 3 0 AX 0\n2 1 -2 -3 0 AX 0\n3 -1 4 5 0 AX 0\n4 -1 4 -5 0 AX 0\n5 1 3* 0 RES 1 2 0 2 0\n6 1 0 URED* 5 0 3* 0\n7 -1 4 0 RES 3 4 0 5 0\n8 -1 0 URED 7 0 4 0\n9 0 RES 6 8 0 1 0\n";
        let (qbf, tr, circ) = setup(q, t);
        let r0 = restrict_proof(&tr, &qbf, &circ, &bit(1, false)).unwrap();
        assert_eq!(r0.side, RestrictionSide::Q);
        assert_eq!(r0.trace.calculus, Calculus::Ldqres);
        assert_eq!(r0.trace.steps.len(), 4);
        assert!(r0
            .trace
            .steps
            .iter()
            .any(|s| s.rule == Rule::UredStar));
        let r1 = restrict_proof(&tr, &qbf, &circ, &bit(1, true)).unwrap();
        assert_eq!(r1.side, RestrictionSide::R);
        assert_eq!(r1.trace.steps.len(), 4);
    }

    // Marker-pivot resolution at the root: the replayed root keeps the marker
    // literal, and the closing reduction removes it.
    #[test]
    fn marker_pivot_root_gets_closing_reduction() {
        let q = "c partition p: q: 3 r: 4 b: 2\np cnf 4 4\na 2 0\ne 3 4 0\n2 3 0\n2 -3 0\n-2 4 0\n-2 -4 0\n";
        let t = "s qrtf qures\n1 2 3 0 AX 0\n2 2 -3 0 AX 0\n3 2 0 RES 1 2 0 3 0\n4 -2 4 0 AX 0\n5 -2 -4 0 AX 0\n6 -2 0 RES 4 5 0 4 0\n7 0 RES 3 6 0 2 0\n";
        let (qbf, tr, circ) = setup(q, t);
        let r = restrict_proof(&tr, &qbf, &circ, &Assignment::new()).unwrap();
        assert_eq!(r.side, RestrictionSide::Q);
        let last = r.trace.steps.last().unwrap();
        assert_eq!(last.rule, Rule::Ured);
        assert_eq!(last.aux, Aux::Lit(Lit::pos(Var(2))));
        assert!(last.conclusion.is_empty());
        assert_eq!(r.formula.prefix.quant(Var(2)), Some(Quant::Forall));
    }

    #[test]
    fn marker_formula_restriction_both_points() {
        let q = "c partition p: 1 q: 3 r: 4 b: 2\np cnf 4 4\ne 1 0\na 2 0\ne 3 4 0\n1 2 3 0\n2 -3 0\n-1 -2 4 0\n-2 -4 0\n";
        let t = "s qrtf lquplus\n1 1 2 3 0 AX 0\n2 2 -3 0 AX 0\n3 -1 -2 4 0 AX 0\n4 -2 -4 0 AX 0\n5 1 2 0 RES 1 2 0 3 0\n6 -1 -2 0 RES 3 4 0 4 0\n7 -3 -4 0 RES 2 4 0 2 0\n8 1 2 -4 0 RES 1 7 0 3 0\n9 2* 0 RES 5 6 0 1 0\n10 0 URED* 9 0 2* 0\n";
        let (qbf, tr, circ) = setup(q, t);
        for val in [false, true] {
            let r = restrict_proof(&tr, &qbf, &circ, &bit(1, val)).unwrap();
            assert_eq!(
                r.side,
                if val { RestrictionSide::R } else { RestrictionSide::Q }
            );
            assert_eq!(r.trace.steps.len(), 4);
            let last = r.trace.steps.last().unwrap();
            assert!(last.conclusion.is_empty());
            assert_eq!(last.rule, Rule::Ured);
        }
    }

    #[test]
    fn expansion_restriction_with_instantiation() {
        let q = "c partition p: 1 q: 2 3 r: 4 5\np cnf 5 4\ne 1 0\na 2 0\ne 3 0\na 4 0\ne 5 0\n1 3 0\n1 -2 -3 0\n-1 5 0\n-1 -4 -5 0\n";
        let t = "s qrtf ircalc\n1 1 3 0 AX 0\n2 1 -3:2=1 0 AX 0\n3 1 3:2=1 0 INST 1 0 2=1 0\n4 1 0 RES 3 2 0 3:2=1 0\n5 -1 5 0 AX 0\n6 -1 -5:4=1 0 AX 0\n7 -1 5:4=1 0 INST 5 0 4=1 0\n8 -1 0 RES 7 6 0 5:4=1 0\n9 0 RES 4 8 0 1 0\n";
        let (qbf, tr, circ) = setup(q, t);
        let r0 = restrict_proof(&tr, &qbf, &circ, &bit(1, false)).unwrap();
        assert_eq!(r0.side, RestrictionSide::Q);
        assert_eq!(r0.trace.calculus, Calculus::Irmcalc);
        assert!(r0.trace.steps.iter().any(|s| s.rule == Rule::Inst));
        assert!(r0.trace.steps.last().unwrap().conclusion.is_empty());
        let r1 = restrict_proof(&tr, &qbf, &circ, &bit(1, true)).unwrap();
        assert_eq!(r1.side, RestrictionSide::R);
        assert!(r1.trace.steps.iter().any(|s| s.rule == Rule::Inst));
    }

    // A replayed resolvent that is broader than the original conclusion gets
    // refitted with an explicit merge step.
    #[test]
    fn expansion_restriction_emits_merge() {
        let q = "c partition p: 1 q: 2 3 4 5 r: 6 7\np cnf 7 5\ne 1 0\na 2 0\ne 3 0\na 4 0\ne 5 0\na 6 0\ne 7 0\n1 2 3 4 5 0\n1 -3 -4 5 0\n1 -5 0\n-1 6 7 0\n-1 6 -7 0\n";
        let t = "s qrtf irmcalc\n1 1 3:2=0 5:2=0,4=0 0 AX 0\n2 1 -3 5:4=1 0 AX 0\n3 1 5:2=0,4=0 5:2=0,4=1 0 RES 1 2 0 3:2=0 0\n4 1 5:2=0,4=* 0 MERGE 3 0 5:2=0,4=0 5:2=0,4=1 0\n5 1 -5 0 AX 0\n6 1 0 RES 4 5 0 5:2=0,4=* 0\n7 -1 7:6=0 0 AX 0\n8 -1 -7:6=0 0 AX 0\n9 -1 0 RES 7 8 0 7:6=0 0\n10 0 RES 6 9 0 1 0\n";
        let (qbf, tr, circ) = setup(q, t);
        let r0 = restrict_proof(&tr, &qbf, &circ, &bit(1, false)).unwrap();
        assert_eq!(r0.side, RestrictionSide::Q);
        assert!(r0.trace.steps.iter().any(|s| s.rule == Rule::Merge));
        assert!(r0.trace.steps.last().unwrap().conclusion.is_empty());
        let r1 = restrict_proof(&tr, &qbf, &circ, &bit(1, true)).unwrap();
        assert_eq!(r1.side, RestrictionSide::R);
        assert_eq!(r1.trace.steps.len(), 3);
    }

    #[test]
    fn mismatched_circuit_is_rejected() {
        let (qbf, tr, mut circ) = setup(MICRO_Q, MICRO_T);
        circ.gates[0].prov = None;
        assert_eq!(
            restrict_proof(&tr, &qbf, &circ, &bit(1, false)),
            Err(RestrictError::CircuitMismatch)
        );
    }

    #[test]
    fn unassigned_shared_variable_is_rejected() {
        let (qbf, tr, circ) = setup(MICRO_Q, MICRO_T);
        assert_eq!(
            restrict_proof(&tr, &qbf, &circ, &Assignment::new()),
            Err(RestrictError::PartialAssignment(Var(1)))
        );
    }

    #[test]
    fn one_sided_requires_partition() {
        let mut qbf = parse_qdimacs(MICRO_Q).unwrap();
        qbf.partition = None;
        assert_eq!(
            one_sided(&qbf, RestrictionSide::Q, &bit(1, false)),
            Err(RestrictError::NoPartition)
        );
    }

    #[test]
    fn one_sided_leads_with_marker_and_drops_satisfied() {
        let q = "c partition p: 1 q: 3 r: 4 b: 2\np cnf 4 4\ne 1 0\na 2 0\ne 3 4 0\n1 2 3 0\n2 -3 0\n-1 -2 4 0\n-2 -4 0\n";
        let qbf = parse_qdimacs(q).unwrap();
        let f = one_sided(&qbf, RestrictionSide::Q, &bit(1, true)).unwrap();
        let order: Vec<(Var, Quant)> = f.prefix.vars().collect();
        assert_eq!(
            order,
            vec![(Var(2), Quant::Forall), (Var(3), Quant::Exists)]
        );
        // 1 2 3 is satisfied by the assignment, leaving the marker unit.
        assert_eq!(
            f.matrix,
            vec![Clause::new(vec![Lit::pos(Var(2)), Lit::neg(Var(3))])]
        );
        let _ = Partition::default();
    }

    #[test]
    fn fit_merges_toward_target() {
        let v2 = Var(2);
        let v4 = Var(4);
        let l5 = Lit::pos(Var(5));
        let a0 = Ann::new(vec![(v2, crate::annot::AnnVal::Zero), (v4, crate::annot::AnnVal::Zero)]);
        let a1 = Ann::new(vec![(v2, crate::annot::AnnVal::Zero), (v4, crate::annot::AnnVal::One)]);
        let astar = Ann::new(vec![
            (v2, crate::annot::AnnVal::Zero),
            (v4, crate::annot::AnnVal::Star),
        ]);
        let d = AnnClause::new(vec![ALit::new(l5, a0.clone()), ALit::new(l5, a1.clone())]);
        let target = AnnClause::new(vec![ALit::new(l5, astar.clone())]);
        let (fitted, merges) = fit(d, &target).unwrap();
        assert_eq!(fitted, target);
        assert_eq!(merges.len(), 1);
        assert_eq!(merges[0].2, ALit::new(l5, astar));
    }
}
