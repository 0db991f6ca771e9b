//! Step-by-step proof checking for all six calculi.
//!
//! The checker validates each step against its stated rule and antecedents,
//! stopping at the first violation. Violations carry one label from a fixed
//! vocabulary so that corrupted traces fail deterministically.

use crate::annot::{
    filter_annotation, instantiate, merge_annotations, ALit, Ann, AnnClause, AnnVal,
};
use crate::qbf::{Clause, Lit, Pol, Prefix, Qbf, Quant, Var};
use crate::trace::{Aux, Calculus, Concl, Family, ProofStep, ProofTrace, Rule};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Label {
    NotAxiom,
    BadAxiomAnnotation,
    UShape,
    UIndex,
    RedNotUniversal,
    RedIndex,
    StarPivot,
    PivotKind,
    PivotMismatch,
    TautologyResolvent,
    ExistentialClash,
    WrongConclusion,
    NoEmptyRoot,
    RuleNotInCalculus,
    DomainsNotDisjoint,
    TauRange,
    PivotAnnotationMismatch,
    MergeDomain,
    InstRange,
    InternalInvariant,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::NotAxiom => "NOT_AXIOM",
            Label::BadAxiomAnnotation => "BAD_AXIOM_ANNOTATION",
            Label::UShape => "U_SHAPE",
            Label::UIndex => "U_INDEX",
            Label::RedNotUniversal => "RED_NOT_UNIVERSAL",
            Label::RedIndex => "RED_INDEX",
            Label::StarPivot => "STAR_PIVOT",
            Label::PivotKind => "PIVOT_KIND",
            Label::PivotMismatch => "PIVOT_MISMATCH",
            Label::TautologyResolvent => "TAUTOLOGY_RESOLVENT",
            Label::ExistentialClash => "EXISTENTIAL_CLASH",
            Label::WrongConclusion => "WRONG_CONCLUSION",
            Label::NoEmptyRoot => "NO_EMPTY_ROOT",
            Label::RuleNotInCalculus => "RULE_NOT_IN_CALCULUS",
            Label::DomainsNotDisjoint => "DOMAINS_NOT_DISJOINT",
            Label::TauRange => "TAU_RANGE",
            Label::PivotAnnotationMismatch => "PIVOT_ANNOTATION_MISMATCH",
            Label::MergeDomain => "MERGE_DOMAIN",
            Label::InstRange => "INST_RANGE",
            Label::InternalInvariant => "INTERNAL_INVARIANT",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Violation {
    pub step: u32,
    pub label: Label,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at step {}", self.label, self.step)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CheckReport {
    pub valid: bool,
    pub first_failure: Option<Violation>,
    /// Step counts per rule over the whole trace, failures included.
    pub stats: BTreeMap<Rule, usize>,
}

/// The expansion-calculus axiom of a matrix clause: existential literals
/// annotated with the falsifying assignment of the clause's universal
/// literals, filtered to universals left of each literal.
pub fn expansion_axiom(c: &Clause, prefix: &Prefix) -> AnnClause {
    let mut bindings = Vec::new();
    for &l in c.iter() {
        if prefix.quant(l.var) == Some(Quant::Forall) {
            let val = match l.pol {
                Pol::Pos => AnnVal::Zero,
                Pol::Neg => AnnVal::One,
                Pol::Star => unreachable!("matrix clauses never hold merged literals"),
            };
            bindings.push((l.var, val));
        }
    }
    let tau = Ann::new(bindings);
    AnnClause::new(
        c.iter()
            .filter(|l| prefix.quant(l.var) == Some(Quant::Exists))
            .map(|&l| ALit::new(l, filter_annotation(&tau, l.var, prefix)))
            .collect(),
    )
}

/// Resolve two CDCL clauses on `pivot` (the literal as it occurs in `c1`).
/// Presence of the pivot pair is the caller's concern. In long-distance
/// mode, universal variables shared by the remainders merge into starred
/// literals subject to the index condition; the short-distance mode rejects
/// stars and complementary remainder pairs outright.
pub(crate) fn cdcl_resolve(
    c1: &Clause,
    c2: &Clause,
    pivot: Lit,
    long_distance: bool,
    prefix: &Prefix,
) -> Result<Clause, Label> {
    let comp = pivot.complement().ok_or(Label::StarPivot)?;
    let rem1 = c1.without(pivot);
    let rem2 = c2.without(comp);
    if !long_distance {
        if rem1.iter().chain(rem2.iter()).any(|l| l.is_star()) {
            return Err(Label::UShape);
        }
        let union = rem1.union(&rem2);
        if union.is_tautological() {
            return Err(Label::TautologyResolvent);
        }
        return Ok(union);
    }
    let shared: Vec<Var> = rem1
        .vars()
        .intersection(&rem2.vars())
        .copied()
        .collect();
    let mut out: Vec<Lit> = Vec::new();
    for &l in rem1.iter().chain(rem2.iter()) {
        if !shared.contains(&l.var) {
            out.push(l);
        }
    }
    for &v in &shared {
        let p1 = rem1.pols_of(v);
        let p2 = rem2.pols_of(v);
        let plain_equal = p1 == p2 && !p1.contains(&Pol::Star);
        if prefix.is_existential(v) {
            if p1 != p2 {
                return Err(Label::ExistentialClash);
            }
            out.extend(p1.iter().map(|&p| Lit { var: v, pol: p }));
        } else if plain_equal {
            // Equal plain universal literals pass through unmerged.
            out.extend(p1.iter().map(|&p| Lit { var: v, pol: p }));
        } else {
            // Complementary or star-involving universal pair: merge.
            let pi = prefix.ind(pivot.var).expect("pivot var in prefix");
            let vi = prefix.ind(v).expect("shared var in prefix");
            if pi >= vi {
                return Err(Label::UIndex);
            }
            out.push(Lit::star(v));
        }
    }
    Ok(Clause::new(out))
}

/// Split an IRM resolution pivot pair into (tau, xi, sigma): tau is the
/// shared part (values must agree and be star-free), xi and sigma the
/// residues of the first and second annotation.
pub(crate) fn irm_decompose(a: &Ann, b: &Ann) -> Result<(Ann, Ann, Ann), Label> {
    let mut tau = Vec::new();
    for (v, av) in a.iter() {
        if let Some(bv) = b.get(v) {
            if av != bv {
                return Err(Label::DomainsNotDisjoint);
            }
            if av == AnnVal::Star {
                return Err(Label::TauRange);
            }
            tau.push((v, av));
        }
    }
    let tau = Ann::new(tau);
    Ok((tau.clone(), a.minus_domain(&tau), b.minus_domain(&tau)))
}

/// Conclusion of an IRM resolution on pivot `piv1` in `c1` against `piv2`
/// in `c2`: cross-instantiate the remainders with the opposing residues.
pub(crate) fn irm_resolve(
    c1: &AnnClause,
    c2: &AnnClause,
    piv1: &ALit,
    piv2: &ALit,
    prefix: &Prefix,
) -> Result<AnnClause, Label> {
    let (_tau, xi, sigma) = irm_decompose(&piv1.ann, &piv2.ann)?;
    let left = instantiate(&sigma, &c1.without(piv1), prefix);
    let right = instantiate(&xi, &c2.without(piv2), prefix);
    Ok(left.union(&right))
}

fn cdcl_clause(c: &Concl) -> &Clause {
    match c {
        Concl::Cdcl(c) => c,
        Concl::Exp(_) => unreachable!("family checked before dispatch"),
    }
}

fn exp_clause(c: &Concl) -> &AnnClause {
    match c {
        Concl::Exp(c) => c,
        Concl::Cdcl(_) => unreachable!("family checked before dispatch"),
    }
}

/// Compare a recomputed CDCL conclusion against the stated one. Equal sets
/// pass; a difference confined to star-ness of variables present on both
/// sides is a U_SHAPE violation, anything else WRONG_CONCLUSION.
fn compare_cdcl(computed: &Clause, stated: &Clause) -> Result<(), Label> {
    if computed == stated {
        return Ok(());
    }
    let mut vars = computed.vars();
    vars.extend(stated.vars());
    let mut all_star_diffs = true;
    for v in vars {
        let pc = computed.pols_of(v);
        let ps = stated.pols_of(v);
        if pc == ps {
            continue;
        }
        let star_involved = pc.contains(&Pol::Star) || ps.contains(&Pol::Star);
        if pc.is_empty() || ps.is_empty() || !star_involved {
            all_star_diffs = false;
        }
    }
    Err(if all_star_diffs { Label::UShape } else { Label::WrongConclusion })
}

fn check_cdcl_step(
    step: &ProofStep,
    ants: &[&ProofStep],
    calc: Calculus,
    qbf: &Qbf,
) -> Result<(), Label> {
    let prefix = &qbf.prefix;
    let stated = cdcl_clause(&step.conclusion);
    match step.rule {
        Rule::Ax => {
            if qbf.matrix.iter().any(|c| c == stated) {
                Ok(())
            } else {
                Err(Label::NotAxiom)
            }
        }
        Rule::Ured | Rule::UredStar => {
            if step.rule == Rule::UredStar && !calc.long_distance() {
                return Err(Label::RuleNotInCalculus);
            }
            let lit = match step.aux {
                Aux::Lit(l) => l,
                _ => unreachable!("parser fixes aux shape"),
            };
            let starred = lit.pol == Pol::Star;
            if starred != (step.rule == Rule::UredStar) {
                return Err(Label::UShape);
            }
            let ant = cdcl_clause(&ants[0].conclusion);
            if !ant.contains(lit) {
                return Err(Label::WrongConclusion);
            }
            if !prefix.is_universal(lit.var) {
                return Err(Label::RedNotUniversal);
            }
            let remainder = ant.without(lit);
            let ui = prefix.ind(lit.var).expect("reduced var in prefix");
            for l in remainder.iter() {
                if prefix.is_existential(l.var) {
                    let li = prefix.ind(l.var).expect("remainder var in prefix");
                    if ui < li {
                        return Err(Label::RedIndex);
                    }
                }
            }
            compare_cdcl(&remainder, stated)
        }
        Rule::Res => {
            let pivot = match step.aux {
                Aux::Lit(l) => l,
                _ => unreachable!("parser fixes aux shape"),
            };
            if pivot.pol == Pol::Star {
                return Err(Label::StarPivot);
            }
            if prefix.is_universal(pivot.var) && !calc.universal_pivots() {
                return Err(Label::PivotKind);
            }
            let c1 = cdcl_clause(&ants[0].conclusion);
            let c2 = cdcl_clause(&ants[1].conclusion);
            let comp = pivot.complement().expect("non-star pivot");
            if !c1.contains(pivot) || !c2.contains(comp) {
                return Err(Label::PivotMismatch);
            }
            let computed = cdcl_resolve(c1, c2, pivot, calc.long_distance(), prefix)?;
            compare_cdcl(&computed, stated)
        }
        Rule::Inst | Rule::Merge => Err(Label::RuleNotInCalculus),
    }
}

fn check_exp_step(
    step: &ProofStep,
    ants: &[&ProofStep],
    calc: Calculus,
    qbf: &Qbf,
) -> Result<(), Label> {
    let prefix = &qbf.prefix;
    let stated = exp_clause(&step.conclusion);
    match step.rule {
        Rule::Ax => {
            for c in &qbf.matrix {
                if &expansion_axiom(c, prefix) == stated {
                    return Ok(());
                }
            }
            // Right existential skeleton with wrong annotations?
            let skel = stated.skeleton();
            for c in &qbf.matrix {
                let mut want: Vec<Lit> = c
                    .iter()
                    .copied()
                    .filter(|l| prefix.is_existential(l.var))
                    .collect();
                want.sort();
                want.dedup();
                if want == skel {
                    return Err(Label::BadAxiomAnnotation);
                }
            }
            Err(Label::NotAxiom)
        }
        Rule::Inst => {
            let tau = match &step.aux {
                Aux::Inst(a) => a,
                _ => unreachable!("parser fixes aux shape"),
            };
            if tau.has_star() {
                return Err(Label::InstRange);
            }
            let ant = exp_clause(&ants[0].conclusion);
            if &instantiate(tau, ant, prefix) == stated {
                Ok(())
            } else {
                Err(Label::WrongConclusion)
            }
        }
        Rule::Merge => {
            if calc != Calculus::Irmcalc {
                return Err(Label::RuleNotInCalculus);
            }
            let (a, b) = match &step.aux {
                Aux::Merge(a, b) => (a, b),
                _ => unreachable!("parser fixes aux shape"),
            };
            let merged = match merge_annotations(&a.ann, &b.ann) {
                Some(m) => m,
                None => return Err(Label::MergeDomain),
            };
            let ant = exp_clause(&ants[0].conclusion);
            if !ant.contains(a) || !ant.contains(b) {
                return Err(Label::PivotAnnotationMismatch);
            }
            let computed = ant.merge_pair(a, b, ALit::new(a.lit, merged));
            if &computed == stated {
                Ok(())
            } else {
                Err(Label::WrongConclusion)
            }
        }
        Rule::Res => {
            let pivot = match &step.aux {
                Aux::ALit(l) => l,
                _ => unreachable!("parser fixes aux shape"),
            };
            let c1 = exp_clause(&ants[0].conclusion);
            let c2 = exp_clause(&ants[1].conclusion);
            if !c1.contains(pivot) {
                return Err(Label::PivotAnnotationMismatch);
            }
            let comp_lit = pivot.lit.complement().expect("expansion literals are plain");
            if calc == Calculus::Ircalc {
                // Pivot annotations must coincide exactly.
                let comp = ALit::new(comp_lit, pivot.ann.clone());
                if !c2.contains(&comp) {
                    return Err(Label::PivotAnnotationMismatch);
                }
                let computed = c1.without(pivot).union(&c2.without(&comp));
                if &computed == stated {
                    Ok(())
                } else {
                    Err(Label::WrongConclusion)
                }
            } else {
                let candidates: Vec<&ALit> =
                    c2.iter().filter(|d| d.lit == comp_lit).collect();
                if candidates.is_empty() {
                    return Err(Label::PivotAnnotationMismatch);
                }
                let mut first_failure: Option<Label> = None;
                let mut any_passed = false;
                for cand in candidates {
                    match irm_resolve(c1, c2, pivot, cand, prefix) {
                        Ok(computed) => {
                            if &computed == stated {
                                return Ok(());
                            }
                            any_passed = true;
                        }
                        Err(l) => {
                            first_failure.get_or_insert(l);
                        }
                    }
                }
                if any_passed {
                    Err(Label::WrongConclusion)
                } else {
                    Err(first_failure.expect("some candidate failed"))
                }
            }
        }
        Rule::Ured | Rule::UredStar => Err(Label::RuleNotInCalculus),
    }
}

/// Check a trace against a formula. `mode` overrides the trace's declared
/// calculus (e.g. to re-check a qres trace under the lquplus rules). The
/// report's statistics always cover the full trace.
pub fn check_refutation(trace: &ProofTrace, qbf: &Qbf, mode: Option<Calculus>) -> CheckReport {
    let calc = mode.unwrap_or(trace.calculus);
    let mut stats: BTreeMap<Rule, usize> = BTreeMap::new();
    for step in &trace.steps {
        *stats.entry(step.rule).or_insert(0) += 1;
    }
    let fail = |violation: Violation, stats: BTreeMap<Rule, usize>| CheckReport {
        valid: false,
        first_failure: Some(violation),
        stats,
    };

    for step in &trace.steps {
        let family_ok = matches!(
            (&step.conclusion, calc.family()),
            (Concl::Cdcl(_), Family::Cdcl) | (Concl::Exp(_), Family::Expansion)
        );
        if !family_ok {
            return fail(
                Violation { step: step.id, label: Label::RuleNotInCalculus },
                stats,
            );
        }
        let ants: Vec<&ProofStep> = step
            .antecedents
            .iter()
            .map(|&id| trace.step_by_id(id).expect("parser checked references"))
            .collect();
        let result = match calc.family() {
            Family::Cdcl => check_cdcl_step(step, &ants, calc, qbf),
            Family::Expansion => check_exp_step(step, &ants, calc, qbf),
        };
        if let Err(label) = result {
            return fail(Violation { step: step.id, label }, stats);
        }
    }

    match trace.root() {
        Some(root) if root.conclusion.is_empty() => {
            CheckReport { valid: true, first_failure: None, stats }
        }
        Some(root) => fail(
            Violation { step: root.id, label: Label::NoEmptyRoot },
            stats,
        ),
        None => fail(Violation { step: 0, label: Label::NoEmptyRoot }, stats),
    }
}
