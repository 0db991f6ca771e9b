//! Generator for the clique/no-clique interpolation family and the marker
//! transform that turns any partitioned formula into its strategy form.
//!
//! For an even `n` and `k = n/2`, the formula is false on every shared
//! assignment, and the only correct interpolant is the k-clique detector on
//! the n-vertex graph encoded by the shared variables.

use crate::extract::{side_of_clause, ClauseSide};
use crate::qbf::{Clause, Lit, Partition, Prefix, Qbf, Quant, Var};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliqueError {
    BadN(u32),
}

impl fmt::Display for CliqueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliqueError::BadN(n) => {
                write!(f, "BAD_N: n must be even and at least 2, got {n}")
            }
        }
    }
}

impl std::error::Error for CliqueError {}

/// The generated formula plus its variable layout, so callers can map
/// vertices and edges back to variable ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueNoClique {
    pub qbf: Qbf,
    pub n: u32,
    pub k: u32,
}

impl CliqueNoClique {
    fn pairs(&self) -> u32 {
        self.n * (self.n - 1) / 2
    }

    fn pair_rank(&self, u: u32, v: u32) -> u32 {
        assert!(1 <= u && u < v && v <= self.n, "want 1 <= u < v <= n");
        (u - 1) * self.n - u * (u - 1) / 2 + (v - u)
    }

    /// Edge variable for u < v.
    pub fn p_var(&self, u: u32, v: u32) -> Var {
        Var(self.pair_rank(u, v))
    }

    /// "Clique slot i is vertex u", i in 1..=k, u in 1..=n.
    pub fn q_var(&self, i: u32, u: u32) -> Var {
        assert!(1 <= i && i <= self.k && 1 <= u && u <= self.n);
        Var(self.pairs() + (i - 1) * self.n + u)
    }

    /// Universal vertex-subset variable, u in 1..=n.
    pub fn r1_var(&self, u: u32) -> Var {
        assert!(1 <= u && u <= self.n);
        Var(self.pairs() + self.k * self.n + u)
    }

    /// "The subset is small" flag.
    pub fn l_var(&self) -> Var {
        Var(self.pairs() + self.k * self.n + self.n + 1)
    }

    /// "u and v witness a non-edge inside the subset", u < v.
    pub fn t_var(&self, u: u32, v: u32) -> Var {
        Var(self.l_var().0 + self.pair_rank(u, v))
    }

    /// Counter register j after reading subset inputs 1..=i, defined for
    /// i in 1..n and j in 1..=min(i, k-1).
    pub fn s_var(&self, i: u32, j: u32) -> Var {
        let m = self.k - 1;
        assert!(1 <= i && i < self.n && 1 <= j && j <= i.min(m));
        let before: u32 = (1..i).map(|a| a.min(m)).sum();
        Var(self.l_var().0 + self.pairs() + before + j)
    }
}

/// Build the clique/no-clique formula for even `n >= 2` with `k = n/2`.
///
/// The first half says the q block picks a k-clique of the shared graph; the
/// second half says every k-element vertex subset contains a non-edge, via a
/// universally chosen subset, a non-edge witness, and a conditional
/// sequential counter enforcing "at most k-1 chosen" when the small-subset
/// flag is raised.
pub fn gen_clique_noclique(n: u32) -> Result<CliqueNoClique, CliqueError> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(CliqueError::BadN(n));
    }
    let k = n / 2;
    let m = k - 1;
    let g = CliqueNoClique {
        qbf: Qbf {
            prefix: Prefix::new(vec![]),
            matrix: vec![],
            partition: None,
        },
        n,
        k,
    };

    let mut order: Vec<(Var, Quant)> = Vec::new();
    let mut p_set = BTreeSet::new();
    let mut q_set = BTreeSet::new();
    let mut r_set = BTreeSet::new();
    for u in 1..=n {
        for v in u + 1..=n {
            order.push((g.p_var(u, v), Quant::Exists));
            p_set.insert(g.p_var(u, v));
        }
    }
    for i in 1..=k {
        for u in 1..=n {
            order.push((g.q_var(i, u), Quant::Exists));
            q_set.insert(g.q_var(i, u));
        }
    }
    for u in 1..=n {
        order.push((g.r1_var(u), Quant::Forall));
        r_set.insert(g.r1_var(u));
    }
    order.push((g.l_var(), Quant::Exists));
    r_set.insert(g.l_var());
    for u in 1..=n {
        for v in u + 1..=n {
            order.push((g.t_var(u, v), Quant::Exists));
            r_set.insert(g.t_var(u, v));
        }
    }
    for i in 1..n {
        for j in 1..=i.min(m) {
            order.push((g.s_var(i, j), Quant::Exists));
            r_set.insert(g.s_var(i, j));
        }
    }

    let mut matrix: Vec<Clause> = Vec::new();
    // Every clique slot is filled.
    for i in 1..=k {
        matrix.push(Clause::new(
            (1..=n).map(|u| Lit::pos(g.q_var(i, u))).collect(),
        ));
    }
    // No two slots share a vertex.
    for i in 1..=k {
        for j in i + 1..=k {
            for u in 1..=n {
                matrix.push(Clause::new(vec![
                    Lit::neg(g.q_var(i, u)),
                    Lit::neg(g.q_var(j, u)),
                ]));
            }
        }
    }
    // No slot holds two vertices.
    for i in 1..=k {
        for u in 1..=n {
            for v in u + 1..=n {
                matrix.push(Clause::new(vec![
                    Lit::neg(g.q_var(i, u)),
                    Lit::neg(g.q_var(i, v)),
                ]));
            }
        }
    }
    // Chosen vertices are pairwise adjacent.
    for i in 1..=k {
        for j in 1..=k {
            if i == j {
                continue;
            }
            for u in 1..=n {
                for v in u + 1..=n {
                    matrix.push(Clause::new(vec![
                        Lit::neg(g.q_var(i, u)),
                        Lit::neg(g.q_var(j, v)),
                        Lit::pos(g.p_var(u, v)),
                    ]));
                }
            }
        }
    }

    // Second half: the subset is small, or some inside pair is a non-edge.
    let mut main = vec![Lit::pos(g.l_var())];
    for u in 1..=n {
        for v in u + 1..=n {
            main.push(Lit::pos(g.t_var(u, v)));
        }
    }
    matrix.push(Clause::new(main));
    for u in 1..=n {
        for v in u + 1..=n {
            let t = g.t_var(u, v);
            matrix.push(Clause::new(vec![Lit::neg(t), Lit::pos(g.r1_var(u))]));
            matrix.push(Clause::new(vec![Lit::neg(t), Lit::pos(g.r1_var(v))]));
            matrix.push(Clause::new(vec![Lit::neg(t), Lit::neg(g.p_var(u, v))]));
        }
    }
    // Conditional sequential counter: when the flag is raised, at most k-1
    // subset inputs are on.
    let nl = Lit::neg(g.l_var());
    let x = |u: u32| g.r1_var(u);
    if m == 0 {
        for u in 1..=n {
            matrix.push(Clause::new(vec![nl, Lit::neg(x(u))]));
        }
    } else {
        matrix.push(Clause::new(vec![nl, Lit::neg(x(1)), Lit::pos(g.s_var(1, 1))]));
        for i in 2..n {
            matrix.push(Clause::new(vec![nl, Lit::neg(x(i)), Lit::pos(g.s_var(i, 1))]));
            for j in 2..=i.min(m) {
                matrix.push(Clause::new(vec![
                    nl,
                    Lit::neg(x(i)),
                    Lit::neg(g.s_var(i - 1, j - 1)),
                    Lit::pos(g.s_var(i, j)),
                ]));
            }
            for j in 1..=(i - 1).min(m) {
                matrix.push(Clause::new(vec![
                    nl,
                    Lit::neg(g.s_var(i - 1, j)),
                    Lit::pos(g.s_var(i, j)),
                ]));
            }
            if i > m {
                matrix.push(Clause::new(vec![
                    nl,
                    Lit::neg(x(i)),
                    Lit::neg(g.s_var(i - 1, m)),
                ]));
            }
        }
        matrix.push(Clause::new(vec![
            nl,
            Lit::neg(x(n)),
            Lit::neg(g.s_var(n - 1, m)),
        ]));
    }

    let qbf = Qbf {
        prefix: Prefix::new(order),
        matrix,
        partition: Some(Partition {
            p: p_set,
            q: q_set,
            r: r_set,
            b: None,
        }),
    };
    Ok(CliqueNoClique { qbf, n, k })
}

/// Direct k-clique test on the graph encoded by an edge assignment, for
/// cross-checking. `edge(u, v)` is queried with u < v.
pub fn has_k_clique(n: u32, k: u32, edge: &dyn Fn(u32, u32) -> bool) -> bool {
    fn go(n: u32, need: u32, start: u32, chosen: &mut Vec<u32>, edge: &dyn Fn(u32, u32) -> bool) -> bool {
        if need == 0 {
            return true;
        }
        for v in start..=n {
            if chosen.iter().all(|&u| edge(u, v)) {
                chosen.push(v);
                if go(n, need - 1, v + 1, chosen, edge) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    go(n, k, 1, &mut Vec::new(), edge)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FbError {
    NoPartition,
    /// A clause with both q and r variables cannot be given a marker.
    MixedClause { clause: usize },
    /// A clause over shared variables only has no side to mark.
    AmbiguousClause { clause: usize },
    AlreadyMarked,
}

impl fmt::Display for FbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FbError::NoPartition => write!(f, "NO_PARTITION: formula has no partition"),
            FbError::MixedClause { clause } => {
                write!(f, "MIXED_CLAUSE: matrix clause {clause} has q and r variables")
            }
            FbError::AmbiguousClause { clause } => {
                write!(f, "AMBIGUOUS_CLAUSE: matrix clause {clause} has no side")
            }
            FbError::AlreadyMarked => {
                write!(f, "ALREADY_MARKED: formula already has a marker universal")
            }
        }
    }
}

impl std::error::Error for FbError {}

/// Strategy-form transform: add a fresh universal marker right after the
/// shared block, positively to every first-half clause and negatively to
/// every second-half clause. Preserves falsity, and makes the first-half
/// interpolant a winning strategy for the marker variable.
pub fn gen_fb(qbf: &Qbf) -> Result<Qbf, FbError> {
    let part = qbf.partition.as_ref().ok_or(FbError::NoPartition)?;
    if part.b.is_some() {
        return Err(FbError::AlreadyMarked);
    }
    let b = Var(qbf.max_var() + 1);

    let mut order: Vec<(Var, Quant)> = Vec::new();
    let last_p = qbf
        .prefix
        .vars()
        .enumerate()
        .filter(|(_, (v, _))| part.p.contains(v))
        .map(|(i, _)| i)
        .max();
    for (i, (v, q)) in qbf.prefix.vars().enumerate() {
        if last_p.is_none() && i == 0 {
            order.push((b, Quant::Forall));
        }
        order.push((v, q));
        if last_p == Some(i) {
            order.push((b, Quant::Forall));
        }
    }
    if qbf.prefix.is_empty() {
        order.push((b, Quant::Forall));
    }

    let mut matrix = Vec::with_capacity(qbf.matrix.len());
    for (i, c) in qbf.matrix.iter().enumerate() {
        let lit = match side_of_clause(c, part) {
            ClauseSide::A => Lit::pos(b),
            ClauseSide::B => Lit::neg(b),
            ClauseSide::Mixed => return Err(FbError::MixedClause { clause: i }),
            ClauseSide::Neither => return Err(FbError::AmbiguousClause { clause: i }),
        };
        let mut nc = c.clone();
        nc.insert(lit);
        matrix.push(nc);
    }

    Ok(Qbf {
        prefix: Prefix::new(order),
        matrix,
        partition: Some(Partition {
            p: part.p.clone(),
            q: part.q.clone(),
            r: part.r.clone(),
            b: Some(b),
        }),
    })
}
