//! Brute-force semantic oracles, for desk-scale cross-checking only:
//! a memoizing game-tree evaluator for prenex CNF formulas and a small
//! saturation prover for the basic clausal calculus.

use crate::qbf::{Assignment, Clause, Lit, Qbf, Quant, Var};
use crate::trace::{Aux, Calculus, Concl, ProofStep, ProofTrace, Rule};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// Too many unassigned prefix variables for exhaustive evaluation.
    CapExceeded { unassigned: usize, cap: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::CapExceeded { unassigned, cap } => write!(
                f,
                "CAP_EXCEEDED: {unassigned} unassigned prefix variables exceed cap {cap}"
            ),
        }
    }
}

impl std::error::Error for OracleError {}

/// Default bound on the number of unassigned prefix variables `eval_qbf`
/// will recurse over.
pub const DEFAULT_EVAL_CAP: usize = 28;

fn canonical(mut m: Vec<Clause>) -> Vec<Clause> {
    m.sort();
    m.dedup();
    m
}

/// Substitute `v = val` into `m`. Returns `None` when some clause becomes
/// empty (the branch is false), otherwise the simplified matrix.
fn assign_var(m: &[Clause], v: Var, val: bool) -> Option<Vec<Clause>> {
    let sat = if val { Lit::pos(v) } else { Lit::neg(v) };
    let mut out = Vec::with_capacity(m.len());
    for c in m {
        if c.contains(sat) {
            continue;
        }
        let rc = c.without_var(v);
        if rc.is_empty() {
            return None;
        }
        out.push(rc);
    }
    Some(out)
}

fn eval_rec(
    pos: usize,
    matrix: Vec<Clause>,
    order: &[(Var, Quant)],
    memo: &mut HashMap<(usize, Vec<Clause>), bool>,
) -> bool {
    if matrix.is_empty() {
        return true;
    }
    debug_assert!(pos < order.len(), "nonempty matrix with no variables left");
    let key = (pos, matrix);
    if let Some(&b) = memo.get(&key) {
        return b;
    }
    let (v, q) = order[pos];
    let branch = |val: bool, memo: &mut HashMap<(usize, Vec<Clause>), bool>| {
        match assign_var(&key.1, v, val) {
            None => false,
            Some(next) => eval_rec(pos + 1, canonical(next), order, memo),
        }
    };
    let result = match q {
        Quant::Exists => branch(false, memo) || branch(true, memo),
        Quant::Forall => branch(false, memo) && branch(true, memo),
    };
    memo.insert(key, result);
    result
}

/// Evaluate `f` under `partial` by exhaustive game-tree recursion over the
/// remaining prefix, memoizing on the simplified matrix. `cap` bounds the
/// number of unassigned prefix variables at entry.
pub fn eval_qbf(f: &Qbf, partial: &Assignment, cap: usize) -> Result<bool, OracleError> {
    let order: Vec<(Var, Quant)> = f
        .prefix
        .vars()
        .filter(|(v, _)| partial.get(*v).is_none())
        .collect();
    if order.len() > cap {
        return Err(OracleError::CapExceeded {
            unassigned: order.len(),
            cap,
        });
    }
    let mut matrix: Vec<Clause> = Vec::with_capacity(f.matrix.len());
    for c in &f.matrix {
        let mut cur = c.clone();
        let mut satisfied = false;
        for (v, val) in partial.iter() {
            let sat = if val { Lit::pos(v) } else { Lit::neg(v) };
            if cur.contains(sat) {
                satisfied = true;
                break;
            }
            cur = cur.without_var(v);
        }
        if satisfied {
            continue;
        }
        if cur.is_empty() {
            return Ok(false);
        }
        matrix.push(cur);
    }
    let mut memo = HashMap::new();
    Ok(eval_rec(0, canonical(matrix), &order, &mut memo))
}

/// Result of a prover run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Refuted(ProofTrace),
    /// The clause space saturated without deriving the empty clause.
    NotRefutable,
    /// The step budget ran out first.
    Exhausted,
}

struct Prover<'a> {
    qbf: &'a Qbf,
    steps: Vec<ProofStep>,
    budget: usize,
    /// First step id that derived each clause.
    seen: BTreeMap<Clause, u32>,
}

enum Recorded {
    Id(u32),
    OverBudget,
}

impl<'a> Prover<'a> {
    fn record(&mut self, conclusion: Clause, rule: Rule, antecedents: Vec<u32>, aux: Aux) -> Recorded {
        if self.steps.len() >= self.budget {
            return Recorded::OverBudget;
        }
        let id = self.steps.len() as u32 + 1;
        self.steps.push(ProofStep {
            id,
            conclusion: Concl::Cdcl(conclusion.clone()),
            rule,
            antecedents,
            aux,
        });
        self.seen.entry(conclusion).or_insert(id);
        Recorded::Id(id)
    }

    /// The universal literal of largest index that the reduction rule can
    /// drop from `c`, if any.
    fn reducible(&self, c: &Clause) -> Option<Lit> {
        let max_e = c
            .iter()
            .filter(|l| self.qbf.prefix.is_existential(l.var))
            .filter_map(|l| self.qbf.prefix.ind(l.var))
            .max()
            .unwrap_or(0);
        c.iter()
            .filter(|l| self.qbf.prefix.is_universal(l.var))
            .filter(|l| self.qbf.prefix.ind(l.var).unwrap_or(0) >= max_e)
            .max_by_key(|l| self.qbf.prefix.ind(l.var))
            .copied()
    }

    /// Reduce `c` to its fully reduced form without recording anything.
    fn reduced_form(&self, c: &Clause) -> Clause {
        let mut cur = c.clone();
        while let Some(l) = self.reducible(&cur) {
            cur = cur.without(l);
        }
        cur
    }

    /// Record the reduction chain from `c` down to its fully reduced form.
    fn record_reduction(&mut self, mut c: Clause, mut id: u32) -> Result<(Clause, u32), SolveOutcome> {
        while let Some(l) = self.reducible(&c) {
            c = c.without(l);
            match self.record(c.clone(), Rule::Ured, vec![id], Aux::Lit(l)) {
                Recorded::Id(nid) => id = nid,
                Recorded::OverBudget => return Err(SolveOutcome::Exhausted),
            }
        }
        Ok((c, id))
    }

    fn prune(&self, root: u32) -> ProofTrace {
        let by_id: BTreeMap<u32, &ProofStep> =
            self.steps.iter().map(|s| (s.id, s)).collect();
        let mut used: Vec<u32> = Vec::new();
        let mut mark = vec![false; self.steps.len() + 1];
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if mark[id as usize] {
                continue;
            }
            mark[id as usize] = true;
            used.push(id);
            stack.extend(&by_id[&id].antecedents);
        }
        used.sort();
        let renum: BTreeMap<u32, u32> = used
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i as u32 + 1))
            .collect();
        let steps = used
            .iter()
            .map(|id| {
                let s = by_id[id];
                ProofStep {
                    id: renum[id],
                    conclusion: s.conclusion.clone(),
                    rule: s.rule,
                    antecedents: s.antecedents.iter().map(|a| renum[a]).collect(),
                    aux: s.aux.clone(),
                }
            })
            .collect();
        ProofTrace {
            calculus: Calculus::Qres,
            steps,
        }
    }
}

/// Search for a refutation in the basic clausal calculus (existential pivots
/// plus universal reduction) by given-clause saturation, shortest clauses
/// first. Every recorded step counts against `budget`. Deterministic.
pub fn find_qres_refutation(qbf: &Qbf, budget: usize) -> SolveOutcome {
    let mut p = Prover {
        qbf,
        steps: Vec::new(),
        budget,
        seen: BTreeMap::new(),
    };
    // Min-heap on (length, clause); ties broken by the canonical clause order.
    let mut passive: BinaryHeap<Reverse<(usize, Clause)>> = BinaryHeap::new();
    let mut active: Vec<(Clause, u32)> = Vec::new();

    for c in &qbf.matrix {
        if c.is_tautological() {
            continue;
        }
        let fresh = !p.seen.contains_key(c);
        let id = match p.record(c.clone(), Rule::Ax, Vec::new(), Aux::None) {
            Recorded::Id(id) => id,
            Recorded::OverBudget => return SolveOutcome::Exhausted,
        };
        if !fresh {
            continue;
        }
        let target = p.reduced_form(c);
        if p.seen.contains_key(&target) && target != *c {
            continue;
        }
        let (rc, rid) = match p.record_reduction(c.clone(), id) {
            Ok(v) => v,
            Err(out) => return out,
        };
        if rc.is_empty() {
            return SolveOutcome::Refuted(p.prune(rid));
        }
        passive.push(Reverse((rc.len(), rc)));
    }

    while let Some(Reverse((_, given))) = passive.pop() {
        if active.iter().any(|(c, _)| *c == given) {
            continue;
        }
        let given_id = p.seen[&given];
        active.push((given.clone(), given_id));
        let partners: Vec<(Clause, u32)> = active.clone();
        for (other, other_id) in partners {
            for x in given.vars() {
                if !qbf.prefix.is_existential(x) {
                    continue;
                }
                let (pos_c, pos_id, neg_c, neg_id) =
                    if given.contains(Lit::pos(x)) && other.contains(Lit::neg(x)) {
                        (&given, given_id, &other, other_id)
                    } else if given.contains(Lit::neg(x)) && other.contains(Lit::pos(x)) {
                        (&other, other_id, &given, given_id)
                    } else {
                        continue;
                    };
                let resolvent = pos_c.without(Lit::pos(x)).union(&neg_c.without(Lit::neg(x)));
                if resolvent.is_tautological() {
                    continue;
                }
                let target = p.reduced_form(&resolvent);
                if p.seen.contains_key(&target) || p.seen.contains_key(&resolvent) {
                    continue;
                }
                let id = match p.record(
                    resolvent.clone(),
                    Rule::Res,
                    vec![pos_id, neg_id],
                    Aux::Lit(Lit::pos(x)),
                ) {
                    Recorded::Id(id) => id,
                    Recorded::OverBudget => return SolveOutcome::Exhausted,
                };
                let (rc, rid) = match p.record_reduction(resolvent, id) {
                    Ok(v) => v,
                    Err(out) => return out,
                };
                if rc.is_empty() {
                    return SolveOutcome::Refuted(p.prune(rid));
                }
                passive.push(Reverse((rc.len(), rc)));
            }
        }
    }
    SolveOutcome::NotRefutable
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check_refutation;
    use crate::qdimacs::parse_qdimacs;

    fn qbf(text: &str) -> Qbf {
        parse_qdimacs(text).unwrap()
    }

    #[test]
    fn evaluates_simple_formulas() {
        // forall x exists y (x xor y): true.
        let f = qbf("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n");
        assert_eq!(eval_qbf(&f, &Assignment::new(), 10), Ok(true));
        // exists y forall x (x xor y): false.
        let g = qbf("p cnf 2 2\ne 2 0\na 1 0\n1 2 0\n-1 -2 0\n");
        assert_eq!(eval_qbf(&g, &Assignment::new(), 10), Ok(false));
    }

    #[test]
    fn partial_assignment_restricts_before_recursion() {
        let f = qbf("p cnf 2 2\ne 1 0\ne 2 0\n1 2 0\n-1 2 0\n");
        let mut a = Assignment::new();
        a.set(Var(2), false);
        assert_eq!(eval_qbf(&f, &a, 10), Ok(false));
        a.set(Var(2), true);
        assert_eq!(eval_qbf(&f, &a, 10), Ok(true));
    }

    #[test]
    fn cap_counts_only_unassigned_variables() {
        let f = qbf("p cnf 3 1\ne 1 2 3 0\n1 2 3 0\n");
        let mut a = Assignment::new();
        assert_eq!(
            eval_qbf(&f, &a, 2),
            Err(OracleError::CapExceeded {
                unassigned: 3,
                cap: 2
            })
        );
        a.set(Var(1), false);
        assert_eq!(eval_qbf(&f, &a, 2), Ok(true));
    }

    #[test]
    fn empty_matrix_is_true_and_empty_clause_false() {
        let t = Qbf {
            prefix: crate::qbf::Prefix::new(vec![]),
            matrix: vec![],
            partition: None,
        };
        assert_eq!(eval_qbf(&t, &Assignment::new(), 0), Ok(true));
        let f = Qbf {
            prefix: crate::qbf::Prefix::new(vec![]),
            matrix: vec![Clause::empty()],
            partition: None,
        };
        assert_eq!(eval_qbf(&f, &Assignment::new(), 0), Ok(false));
    }

    #[test]
    fn prover_refutes_and_the_checker_agrees() {
        let texts = [
            "p cnf 2 3\ne 1 0\ne 2 0\n1 2 0\n-1 2 0\n-2 0\n",
            "p cnf 3 4\ne 1 0\na 2 0\ne 3 0\n1 2 3 0\n1 2 -3 0\n-1 -2 3 0\n-1 -2 -3 0\n",
            "p cnf 5 4\ne 1 0\na 2 0\ne 3 0\na 4 0\ne 5 0\n1 2 3 0\n1 2 -3 0\n-1 4 5 0\n-1 4 -5 0\n",
        ];
        for (i, t) in texts.iter().enumerate() {
            let f = qbf(t);
            let out = find_qres_refutation(&f, 100_000);
            let SolveOutcome::Refuted(tr) = out else {
                panic!("case {i} not refuted");
            };
            let rep = check_refutation(&tr, &f, None);
            assert!(rep.valid, "case {i}: {:?}", rep.first_failure);
            assert_eq!(eval_qbf(&f, &Assignment::new(), 10), Ok(false));
        }
    }

    #[test]
    fn prover_saturates_on_true_formulas() {
        // forall x exists y (x xor y) has no refutation.
        let f = qbf("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n");
        assert_eq!(find_qres_refutation(&f, 100_000), SolveOutcome::NotRefutable);
    }

    #[test]
    fn budget_exhaustion_reported() {
        let f = qbf("p cnf 3 4\ne 1 0\na 2 0\ne 3 0\n1 2 3 0\n1 2 -3 0\n-1 -2 3 0\n-1 -2 -3 0\n");
        assert_eq!(find_qres_refutation(&f, 3), SolveOutcome::Exhausted);
    }

    #[test]
    fn prover_output_is_deterministic() {
        let f = qbf("p cnf 5 4\ne 1 0\na 2 0\ne 3 0\na 4 0\ne 5 0\n1 2 3 0\n1 2 -3 0\n-1 4 5 0\n-1 4 -5 0\n");
        let a = find_qres_refutation(&f, 100_000);
        let b = find_qres_refutation(&f, 100_000);
        assert_eq!(a, b);
    }

    #[test]
    fn prover_reduces_axioms_eagerly() {
        // The sole axiom reduces to the empty clause immediately.
        let f = qbf("p cnf 2 1\ne 1 0\na 2 0\n2 0\n");
        let SolveOutcome::Refuted(tr) = find_qres_refutation(&f, 100) else {
            panic!("expected refutation");
        };
        assert_eq!(tr.steps.len(), 2);
        assert_eq!(tr.steps[1].rule, Rule::Ured);
        assert!(check_refutation(&tr, &f, None).valid);
    }
}
