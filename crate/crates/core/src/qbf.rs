//! Prenex QBF syntax: variables, literals, clauses, prefixes, formulas,
//! and partial assignments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Variable identifier. Ids are positive in the text formats; 0 never occurs.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Quant {
    Exists,
    Forall,
}

/// Literal polarity. `Star` is the merged-literal marker (u*) produced by
/// long-distance resolution steps; it only ever attaches to universal
/// variables. The derived order (Pos < Neg < Star) fixes the canonical
/// literal order inside a clause.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Pol {
    Pos,
    Neg,
    Star,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Lit {
    pub var: Var,
    pub pol: Pol,
}

impl Lit {
    pub fn pos(v: Var) -> Self {
        Lit { var: v, pol: Pol::Pos }
    }

    pub fn neg(v: Var) -> Self {
        Lit { var: v, pol: Pol::Neg }
    }

    pub fn star(v: Var) -> Self {
        Lit { var: v, pol: Pol::Star }
    }

    pub fn is_star(&self) -> bool {
        self.pol == Pol::Star
    }

    /// The opposite-polarity literal; star literals have no complement.
    pub fn complement(&self) -> Option<Lit> {
        match self.pol {
            Pol::Pos => Some(Lit::neg(self.var)),
            Pol::Neg => Some(Lit::pos(self.var)),
            Pol::Star => None,
        }
    }

    /// Truth value under a (partial) assignment; None when the variable is
    /// unassigned. Star literals never evaluate.
    pub fn eval(&self, a: &Assignment) -> Option<bool> {
        let v = a.get(self.var)?;
        match self.pol {
            Pol::Pos => Some(v),
            Pol::Neg => Some(!v),
            Pol::Star => None,
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pol {
            Pol::Pos => write!(f, "{}", self.var),
            Pol::Neg => write!(f, "-{}", self.var),
            Pol::Star => write!(f, "{}*", self.var),
        }
    }
}

/// A clause is a set of literals, stored sorted by (var, pol) with
/// duplicates removed. Distinct polarities of one variable may coexist
/// (e.g. while diffing a bogus conclusion against a recomputed one).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Clause(Vec<Lit>);

impl Clause {
    pub fn new(mut lits: Vec<Lit>) -> Self {
        lits.sort();
        lits.dedup();
        Clause(lits)
    }

    pub fn empty() -> Self {
        Clause(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Lit> {
        self.0.iter()
    }

    pub fn contains(&self, l: Lit) -> bool {
        self.0.binary_search(&l).is_ok()
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.0.iter().any(|l| l.var == v)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.0.iter().map(|l| l.var).collect()
    }

    /// All polarities of `v` present in this clause.
    pub fn pols_of(&self, v: Var) -> Vec<Pol> {
        self.0.iter().filter(|l| l.var == v).map(|l| l.pol).collect()
    }

    /// Clause without any literal of variable `v`.
    pub fn without_var(&self, v: Var) -> Clause {
        Clause(self.0.iter().copied().filter(|l| l.var != v).collect())
    }

    /// Clause without one specific literal.
    pub fn without(&self, l: Lit) -> Clause {
        Clause(self.0.iter().copied().filter(|&x| x != l).collect())
    }

    pub fn union(&self, other: &Clause) -> Clause {
        let mut v = self.0.clone();
        v.extend(other.0.iter().copied());
        Clause::new(v)
    }

    pub fn insert(&mut self, l: Lit) {
        if let Err(i) = self.0.binary_search(&l) {
            self.0.insert(i, l);
        }
    }

    /// True when some variable occurs both positively and negatively.
    pub fn is_tautological(&self) -> bool {
        self.0
            .iter()
            .any(|l| l.pol == Pol::Pos && self.contains(Lit::neg(l.var)))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "<empty>");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Quantifier prefix: an ordered list of (variable, quantifier) with 1-based
/// index lookup. Indices drive the universal-reduction and merge side
/// conditions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Prefix {
    order: Vec<(Var, Quant)>,
    info: BTreeMap<Var, (u32, Quant)>,
}

impl Prefix {
    /// Build from an ordered list. Duplicate variables are a caller bug.
    pub fn new(order: Vec<(Var, Quant)>) -> Self {
        let mut info = BTreeMap::new();
        for (i, &(v, q)) in order.iter().enumerate() {
            let prev = info.insert(v, (i as u32 + 1, q));
            assert!(prev.is_none(), "duplicate variable {} in prefix", v);
        }
        Prefix { order, info }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = (Var, Quant)> + '_ {
        self.order.iter().copied()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.info.contains_key(&v)
    }

    /// 1-based position of `v` in the prefix.
    pub fn ind(&self, v: Var) -> Option<u32> {
        self.info.get(&v).map(|&(i, _)| i)
    }

    pub fn quant(&self, v: Var) -> Option<Quant> {
        self.info.get(&v).map(|&(_, q)| q)
    }

    pub fn is_universal(&self, v: Var) -> bool {
        self.quant(v) == Some(Quant::Forall)
    }

    pub fn is_existential(&self, v: Var) -> bool {
        self.quant(v) == Some(Quant::Exists)
    }

    pub fn max_var(&self) -> u32 {
        self.order.iter().map(|&(v, _)| v.0).max().unwrap_or(0)
    }
}

/// Interpolation partition: p (shared existential block), q (A-side locals),
/// r (B-side locals), and optionally the marker universal b used by the
/// strategy-form transform. Variables outside all groups are permitted; an
/// unlabeled resolution pivot only surfaces as an error during extraction.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Partition {
    pub p: BTreeSet<Var>,
    pub q: BTreeSet<Var>,
    pub r: BTreeSet<Var>,
    pub b: Option<Var>,
}

impl Partition {
    pub fn group_of(&self, v: Var) -> Option<Group> {
        if self.b == Some(v) {
            Some(Group::B)
        } else if self.p.contains(&v) {
            Some(Group::P)
        } else if self.q.contains(&v) {
            Some(Group::Q)
        } else if self.r.contains(&v) {
            Some(Group::R)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Group {
    P,
    Q,
    R,
    B,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Qbf {
    pub prefix: Prefix,
    pub matrix: Vec<Clause>,
    pub partition: Option<Partition>,
}

impl Qbf {
    /// Prefix vars of the p group, in prefix order. Assignment bitstrings
    /// are read against this ordering.
    pub fn p_vars(&self) -> Vec<Var> {
        match &self.partition {
            Some(part) => self
                .prefix
                .vars()
                .map(|(v, _)| v)
                .filter(|v| part.p.contains(v))
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn max_var(&self) -> u32 {
        let m = self.prefix.max_var();
        self.matrix
            .iter()
            .flat_map(|c| c.iter())
            .map(|l| l.var.0)
            .fold(m, u32::max)
    }
}

/// Partial assignment of Boolean values to variables.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment(BTreeMap<Var, bool>);

impl Assignment {
    pub fn new() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.0.get(&v).copied()
    }

    pub fn set(&mut self, v: Var, val: bool) {
        self.0.insert(v, val);
    }

    pub fn unset(&mut self, v: Var) {
        self.0.remove(&v);
    }

    pub fn contains(&self, v: Var) -> bool {
        self.0.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.0.iter().map(|(&v, &b)| (v, b))
    }

    /// Read a 0/1 bitstring positionally against `vars`.
    pub fn from_bits(bits: &str, vars: &[Var]) -> Result<Self, BitsError> {
        let bits = bits.trim();
        if bits.len() != vars.len() {
            return Err(BitsError::Length { want: vars.len(), got: bits.len() });
        }
        let mut a = Assignment::new();
        for (ch, &v) in bits.chars().zip(vars) {
            match ch {
                '0' => a.set(v, false),
                '1' => a.set(v, true),
                _ => return Err(BitsError::BadChar(ch)),
            }
        }
        Ok(a)
    }

    /// Bitstring over `vars`, inverse of `from_bits`.
    pub fn to_bits(&self, vars: &[Var]) -> String {
        vars.iter()
            .map(|&v| match self.get(v) {
                Some(true) => '1',
                Some(false) => '0',
                None => '?',
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BitsError {
    #[error("assignment bitstring has {got} bits, expected {want}")]
    Length { want: usize, got: usize },
    #[error("assignment bitstring contains '{0}', expected only 0/1")]
    BadChar(char),
}

/// Outcome of restricting a clause by a partial assignment.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Restricted {
    Satisfied,
    Clause(Clause),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RestrictClauseError {
    #[error("ASSIGN_TO_STAR: variable {0} of a merged literal is assigned")]
    AssignToStar(Var),
}

/// Drop falsified literals; report satisfaction if any literal holds.
/// Assigning a variable that occurs starred is an error: merged literals
/// have no truth value.
pub fn restrict_clause(c: &Clause, a: &Assignment) -> Result<Restricted, RestrictClauseError> {
    let mut rest = Vec::new();
    for &l in c.iter() {
        match a.get(l.var) {
            None => rest.push(l),
            Some(val) => match l.pol {
                Pol::Star => return Err(RestrictClauseError::AssignToStar(l.var)),
                Pol::Pos if val => return Ok(Restricted::Satisfied),
                Pol::Neg if !val => return Ok(Restricted::Satisfied),
                _ => {}
            },
        }
    }
    Ok(Restricted::Clause(Clause::new(rest)))
}

/// Clause embedding: every plain literal of `c` occurs in `d` plainly or
/// starred, and every starred literal of `c` occurs starred in `d`.
pub fn preceq_clause(c: &Clause, d: &Clause) -> bool {
    c.iter().all(|&l| match l.pol {
        Pol::Star => d.contains(l),
        _ => d.contains(l) || d.contains(Lit::star(l.var)),
    })
}
