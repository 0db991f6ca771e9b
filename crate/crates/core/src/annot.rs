//! Annotations and annotated clauses for the expansion-based calculi.
//!
//! An annotation is a partial assignment to universal variables with values
//! 0, 1, or * (the merge marker). Annotated literals pair an existential
//! literal with an annotation restricted to universals quantified left of
//! the literal's variable.

use crate::qbf::{Lit, Pol, Prefix, Var};
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum AnnVal {
    Zero,
    One,
    Star,
}

impl fmt::Display for AnnVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnVal::Zero => write!(f, "0"),
            AnnVal::One => write!(f, "1"),
            AnnVal::Star => write!(f, "*"),
        }
    }
}

/// Sorted map from universal variables to annotation values.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Ann(Vec<(Var, AnnVal)>);

impl Ann {
    pub fn empty() -> Self {
        Ann(Vec::new())
    }

    /// Build from bindings; keys must be distinct.
    pub fn new(mut bindings: Vec<(Var, AnnVal)>) -> Self {
        bindings.sort();
        for w in bindings.windows(2) {
            assert!(w[0].0 != w[1].0, "duplicate key {} in annotation", w[0].0);
        }
        Ann(bindings)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, v: Var) -> Option<AnnVal> {
        self.0
            .binary_search_by_key(&v, |&(k, _)| k)
            .ok()
            .map(|i| self.0[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, AnnVal)> + '_ {
        self.0.iter().copied()
    }

    pub fn domain(&self) -> Vec<Var> {
        self.0.iter().map(|&(v, _)| v).collect()
    }

    pub fn has_star(&self) -> bool {
        self.0.iter().any(|&(_, val)| val == AnnVal::Star)
    }

    /// Bindings of `self` that are not bound in `other`.
    pub fn minus_domain(&self, other: &Ann) -> Ann {
        Ann(self
            .0
            .iter()
            .copied()
            .filter(|&(v, _)| other.get(v).is_none())
            .collect())
    }

    /// Star-free proxy: each * becomes 0. The result always satisfies
    /// `preceq_ann(proxy, self)`.
    pub fn star_to_zero(&self) -> Ann {
        Ann(self
            .0
            .iter()
            .map(|&(v, val)| (v, if val == AnnVal::Star { AnnVal::Zero } else { val }))
            .collect())
    }
}

impl fmt::Display for Ann {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, val)| format!("{}={}", v, val))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Completion: bindings of `first` take precedence, `second` fills the
/// gaps. Associative, with `first` winning end to end.
pub fn complete(first: &Ann, second: &Ann) -> Ann {
    let mut out = first.0.clone();
    for &(v, val) in &second.0 {
        if first.get(v).is_none() {
            out.push((v, val));
        }
    }
    out.sort();
    Ann(out)
}

/// Keep only bindings of universals quantified strictly left of `of_var`.
/// Star bindings pass the filter like any other value.
pub fn filter_annotation(sigma: &Ann, of_var: Var, prefix: &Prefix) -> Ann {
    let bound = prefix.ind(of_var).expect("annotated literal var not in prefix");
    Ann(sigma
        .0
        .iter()
        .copied()
        .filter(|&(u, _)| prefix.ind(u).is_some_and(|i| i < bound))
        .collect())
}

/// Pointwise merge of equal-domain annotations: equal values survive,
/// disagreements become *. None when the domains differ.
pub fn merge_annotations(mu: &Ann, sigma: &Ann) -> Option<Ann> {
    if mu.domain() != sigma.domain() {
        return None;
    }
    Some(Ann(mu
        .0
        .iter()
        .zip(sigma.0.iter())
        .map(|(&(v, a), &(_, b))| (v, if a == b { a } else { AnnVal::Star }))
        .collect()))
}

/// Annotation embedding: equal domains, and pointwise each value of `a`
/// maps to itself or to * in `b`.
pub fn preceq_ann(a: &Ann, b: &Ann) -> bool {
    a.0.len() == b.0.len()
        && a.0
            .iter()
            .zip(b.0.iter())
            .all(|(&(va, x), &(vb, y))| va == vb && (x == y || y == AnnVal::Star))
}

/// Annotated literal. The base literal is never starred in the expansion
/// calculi; stars live in the annotation values.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ALit {
    pub lit: Lit,
    pub ann: Ann,
}

impl ALit {
    pub fn new(lit: Lit, ann: Ann) -> Self {
        debug_assert!(lit.pol != Pol::Star);
        ALit { lit, ann }
    }

    pub fn complement_with_ann(&self, ann: Ann) -> Option<ALit> {
        Some(ALit { lit: self.lit.complement()?, ann })
    }
}

impl fmt::Display for ALit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ann.is_empty() {
            write!(f, "{}", self.lit)
        } else {
            write!(f, "{}:{}", self.lit, self.ann)
        }
    }
}

/// Set of annotated literals, sorted and deduplicated. Several literals of
/// the same variable and polarity with different annotations may coexist.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct AnnClause(Vec<ALit>);

impl AnnClause {
    pub fn new(mut lits: Vec<ALit>) -> Self {
        lits.sort();
        lits.dedup();
        AnnClause(lits)
    }

    pub fn empty() -> Self {
        AnnClause(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ALit> {
        self.0.iter()
    }

    pub fn contains(&self, l: &ALit) -> bool {
        self.0.binary_search(l).is_ok()
    }

    pub fn without(&self, l: &ALit) -> AnnClause {
        AnnClause(self.0.iter().filter(|&x| x != l).cloned().collect())
    }

    pub fn union(&self, other: &AnnClause) -> AnnClause {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        AnnClause::new(v)
    }

    /// Replace two literals by their merge result.
    pub fn merge_pair(&self, a: &ALit, b: &ALit, merged: ALit) -> AnnClause {
        let mut v: Vec<ALit> = self
            .0
            .iter()
            .filter(|&x| x != a && x != b)
            .cloned()
            .collect();
        v.push(merged);
        AnnClause::new(v)
    }

    /// The (var, pol) skeleton, for axiom shape matching.
    pub fn skeleton(&self) -> Vec<Lit> {
        let mut v: Vec<Lit> = self.0.iter().map(|l| l.lit).collect();
        v.sort();
        v.dedup();
        v
    }
}

impl fmt::Display for AnnClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "<empty>");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Instantiate by `tau`: each literal's annotation is completed with `tau`
/// (existing bindings win) and then filtered to universals left of the
/// literal.
pub fn instantiate(tau: &Ann, c: &AnnClause, prefix: &Prefix) -> AnnClause {
    AnnClause::new(
        c.iter()
            .map(|al| {
                let full = complete(&al.ann, tau);
                ALit::new(al.lit, filter_annotation(&full, al.lit.var, prefix))
            })
            .collect(),
    )
}

/// Annotated-clause embedding: an injection mapping every literal of `c` to
/// a literal of `d` with the same base literal and an embeddable annotation.
/// Decided by bipartite matching.
pub fn preceq_annotated(c: &AnnClause, d: &AnnClause) -> bool {
    let cs: Vec<&ALit> = c.iter().collect();
    let ds: Vec<&ALit> = d.iter().collect();
    if cs.len() > ds.len() {
        return false;
    }
    // adj[i] = indices in d that literal i of c may map to
    let adj: Vec<Vec<usize>> = cs
        .iter()
        .map(|cl| {
            ds.iter()
                .enumerate()
                .filter(|(_, dl)| cl.lit == dl.lit && preceq_ann(&cl.ann, &dl.ann))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut matched_to: Vec<Option<usize>> = vec![None; ds.len()];

    fn augment(
        i: usize,
        adj: &[Vec<usize>],
        matched_to: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if matched_to[j].is_none()
                || augment(matched_to[j].unwrap(), adj, matched_to, seen)
            {
                matched_to[j] = Some(i);
                return true;
            }
        }
        false
    }

    for i in 0..cs.len() {
        let mut seen = vec![false; ds.len()];
        if !augment(i, &adj, &mut matched_to, &mut seen) {
            return false;
        }
    }
    true
}
