//! QDIMACS reader and writer, extended with an optional partition comment:
//!
//! ```text
//! c partition p: 1 2 q: 3 4 r: 5 6 b: 7
//! p cnf 7 3
//! e 1 2 0
//! ...
//! ```
//!
//! The partition comment may appear anywhere among the comments; the `b:`
//! segment is optional. The partition need not cover every variable.

use crate::qbf::{Clause, Lit, Partition, Prefix, Qbf, Quant, Var};
use std::collections::BTreeSet;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QdimacsError {
    #[error("SYNTAX at line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("TAUTOLOGICAL_CLAUSE at line {line}")]
    TautologicalClause { line: usize },
    #[error("UNBOUND_VARIABLE: variable {0} occurs in the matrix but not in the prefix")]
    UnboundVariable(u32),
    #[error("BAD_PARTITION: {0}")]
    BadPartition(String),
}

fn syntax(line: usize, msg: impl Into<String>) -> QdimacsError {
    QdimacsError::Syntax { line, msg: msg.into() }
}

struct PartitionSpec {
    p: Vec<u32>,
    q: Vec<u32>,
    r: Vec<u32>,
    b: Option<u32>,
}

fn parse_partition_comment(line: usize, rest: &str) -> Result<PartitionSpec, QdimacsError> {
    let mut spec = PartitionSpec { p: Vec::new(), q: Vec::new(), r: Vec::new(), b: None };
    let mut current: Option<char> = None;
    let mut b_ids = Vec::new();
    for tok in rest.split_whitespace() {
        match tok {
            "p:" => current = Some('p'),
            "q:" => current = Some('q'),
            "r:" => current = Some('r'),
            "b:" => current = Some('b'),
            _ => {
                let id: u32 = tok
                    .parse()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| syntax(line, format!("bad partition token '{tok}'")))?;
                match current {
                    Some('p') => spec.p.push(id),
                    Some('q') => spec.q.push(id),
                    Some('r') => spec.r.push(id),
                    Some('b') => b_ids.push(id),
                    _ => return Err(syntax(line, "partition ids before any group label")),
                }
            }
        }
    }
    match b_ids.len() {
        0 => {}
        1 => spec.b = Some(b_ids[0]),
        _ => return Err(syntax(line, "partition b: segment holds more than one id")),
    }
    Ok(spec)
}

fn validate_partition(spec: &PartitionSpec, prefix: &Prefix) -> Result<Partition, QdimacsError> {
    let bad = |msg: String| QdimacsError::BadPartition(msg);
    let mut seen = BTreeSet::new();
    for (&ids, name) in [(&spec.p, "p"), (&spec.q, "q"), (&spec.r, "r")]
        .iter()
        .map(|(ids, name)| (ids, *name))
    {
        for &id in ids.iter() {
            if !prefix.contains(Var(id)) {
                return Err(bad(format!("partition {name}-variable {id} is not in the prefix")));
            }
            if !seen.insert(id) {
                return Err(bad(format!("variable {id} appears in more than one group")));
            }
        }
    }
    if let Some(id) = spec.b {
        if !prefix.contains(Var(id)) {
            return Err(bad(format!("partition b-variable {id} is not in the prefix")));
        }
        if !seen.insert(id) {
            return Err(bad(format!("variable {id} appears in more than one group")));
        }
        if !prefix.is_universal(Var(id)) {
            return Err(bad(format!("b-variable {id} must be universal")));
        }
    }
    for &id in &spec.p {
        if !prefix.is_existential(Var(id)) {
            return Err(bad(format!("p-variable {id} must be existential")));
        }
    }
    let max_p = spec.p.iter().filter_map(|&id| prefix.ind(Var(id))).max();
    let min_qr = spec
        .q
        .iter()
        .chain(spec.r.iter())
        .filter_map(|&id| prefix.ind(Var(id)))
        .min();
    if let (Some(mp), Some(mqr)) = (max_p, min_qr) {
        if mp >= mqr {
            return Err(bad("every p-variable must precede every q/r-variable".into()));
        }
    }
    if let Some(bid) = spec.b {
        let bi = prefix.ind(Var(bid)).unwrap();
        if let Some(mp) = max_p {
            if bi <= mp {
                return Err(bad(format!("b-variable {bid} must come after the p block")));
            }
        }
        if let Some(mqr) = min_qr {
            if bi >= mqr {
                return Err(bad(format!("b-variable {bid} must come before the q/r variables")));
            }
        }
    }
    Ok(Partition {
        p: spec.p.iter().map(|&id| Var(id)).collect(),
        q: spec.q.iter().map(|&id| Var(id)).collect(),
        r: spec.r.iter().map(|&id| Var(id)).collect(),
        b: spec.b.map(Var),
    })
}

pub fn parse_qdimacs(text: &str) -> Result<Qbf, QdimacsError> {
    let mut nvars: Option<u32> = None;
    let mut nclauses: Option<usize> = None;
    let mut prefix_order: Vec<(Var, Quant)> = Vec::new();
    let mut prefix_vars: BTreeSet<u32> = BTreeSet::new();
    let mut clauses: Vec<Clause> = Vec::new();
    let mut partition_spec: Option<PartitionSpec> = None;
    let mut in_matrix = false;
    // Clause tokens may span lines; a clause is terminated by 0. Errors are
    // reported at the line where the clause started.
    let mut pending: Vec<i64> = Vec::new();
    let mut pending_line = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("c") {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                let rest = rest.trim_start();
                if let Some(body) = rest.strip_prefix("partition") {
                    if partition_spec.is_some() {
                        return Err(syntax(lineno, "duplicate partition comment"));
                    }
                    partition_spec = Some(parse_partition_comment(lineno, body)?);
                }
                continue;
            }
            return Err(syntax(lineno, "malformed comment line"));
        }
        if let Some(rest) = line.strip_prefix("p ") {
            if nvars.is_some() {
                return Err(syntax(lineno, "duplicate problem line"));
            }
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 3 || toks[0] != "cnf" {
                return Err(syntax(lineno, "problem line must be 'p cnf <vars> <clauses>'"));
            }
            nvars = Some(
                toks[1]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad variable count"))?,
            );
            nclauses = Some(
                toks[2]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad clause count"))?,
            );
            continue;
        }
        if line.starts_with("e ") || line.starts_with("a ") || line == "e" || line == "a" {
            if nvars.is_none() {
                return Err(syntax(lineno, "quantifier line before problem line"));
            }
            if in_matrix {
                return Err(syntax(lineno, "quantifier line after a clause"));
            }
            let quant = if line.starts_with('e') { Quant::Exists } else { Quant::Forall };
            let toks: Vec<&str> = line[1..].split_whitespace().collect();
            if toks.last() != Some(&"0") {
                return Err(syntax(lineno, "quantifier line must end with 0"));
            }
            if toks.len() == 1 {
                return Err(syntax(lineno, "empty quantifier block"));
            }
            for tok in &toks[..toks.len() - 1] {
                let id: u32 = tok
                    .parse()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| syntax(lineno, format!("bad variable token '{tok}'")))?;
                if id > nvars.unwrap() {
                    return Err(syntax(
                        lineno,
                        format!("variable {id} exceeds declared count"),
                    ));
                }
                if !prefix_vars.insert(id) {
                    return Err(syntax(lineno, format!("variable {id} quantified twice")));
                }
                prefix_order.push((Var(id), quant));
            }
            continue;
        }
        // Clause tokens.
        if nvars.is_none() {
            return Err(syntax(lineno, "clause before problem line"));
        }
        if pending.is_empty() {
            pending_line = lineno;
        }
        in_matrix = true;
        for tok in line.split_whitespace() {
            let n: i64 = tok
                .parse()
                .map_err(|_| syntax(lineno, format!("bad literal token '{tok}'")))?;
            if n == 0 {
                let mut lits = Vec::new();
                for &x in &pending {
                    let id = x.unsigned_abs() as u32;
                    if id > nvars.unwrap() {
                        return Err(syntax(
                            pending_line,
                            format!("variable {id} exceeds declared count"),
                        ));
                    }
                    let v = Var(id);
                    lits.push(if x > 0 { Lit::pos(v) } else { Lit::neg(v) });
                }
                let clause = Clause::new(lits);
                if clause.is_tautological() {
                    return Err(QdimacsError::TautologicalClause { line: pending_line });
                }
                clauses.push(clause);
                pending.clear();
                pending_line = lineno;
            } else {
                pending.push(n);
            }
        }
    }
    if !pending.is_empty() {
        return Err(syntax(pending_line, "unterminated clause"));
    }
    if nvars.is_none() {
        return Err(syntax(1, "missing problem line"));
    }
    if let Some(nc) = nclauses {
        if clauses.len() != nc {
            return Err(syntax(
                1,
                format!("declared {nc} clauses, found {}", clauses.len()),
            ));
        }
    }
    let prefix = Prefix::new(prefix_order);
    for c in &clauses {
        for l in c.iter() {
            if !prefix.contains(l.var) {
                return Err(QdimacsError::UnboundVariable(l.var.0));
            }
        }
    }
    let partition = match partition_spec {
        Some(spec) => Some(validate_partition(&spec, &prefix)?),
        None => None,
    };
    Ok(Qbf { prefix, matrix: clauses, partition })
}

pub fn write_qdimacs(qbf: &Qbf) -> String {
    let mut out = String::new();
    if let Some(part) = &qbf.partition {
        out.push_str("c partition p:");
        for v in &part.p {
            let _ = write!(out, " {v}");
        }
        out.push_str(" q:");
        for v in &part.q {
            let _ = write!(out, " {v}");
        }
        out.push_str(" r:");
        for v in &part.r {
            let _ = write!(out, " {v}");
        }
        if let Some(b) = part.b {
            let _ = write!(out, " b: {b}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "p cnf {} {}", qbf.max_var(), qbf.matrix.len());
    // Merge consecutive same-quantifier blocks into one line.
    let mut run: Vec<Var> = Vec::new();
    let mut run_quant: Option<Quant> = None;
    let flush = |out: &mut String, run: &mut Vec<Var>, q: Option<Quant>| {
        if let (Some(q), false) = (q, run.is_empty()) {
            out.push(if q == Quant::Exists { 'e' } else { 'a' });
            for v in run.iter() {
                let _ = write!(out, " {v}");
            }
            out.push_str(" 0\n");
            run.clear();
        }
    };
    for (v, q) in qbf.prefix.vars() {
        if run_quant != Some(q) {
            flush(&mut out, &mut run, run_quant);
            run_quant = Some(q);
        }
        run.push(v);
    }
    flush(&mut out, &mut run, run_quant);
    for c in &qbf.matrix {
        for l in c.iter() {
            match l.pol {
                crate::qbf::Pol::Pos => {
                    let _ = write!(out, "{} ", l.var);
                }
                crate::qbf::Pol::Neg => {
                    let _ = write!(out, "-{} ", l.var);
                }
                crate::qbf::Pol::Star => unreachable!("matrix clauses never hold merged literals"),
            }
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
c partition p: 1 q: 2 3 r: 4 5
p cnf 5 4
e 1 0
a 2 0
e 3 0
a 4 0
e 5 0
1 2 3 0
1 2 -3 0
-1 4 5 0
-1 4 -5 0
";

    #[test]
    fn parse_sample() {
        let qbf = parse_qdimacs(SAMPLE).unwrap();
        assert_eq!(qbf.prefix.len(), 5);
        assert_eq!(qbf.matrix.len(), 4);
        let part = qbf.partition.as_ref().unwrap();
        assert!(part.p.contains(&Var(1)));
        assert!(part.q.contains(&Var(3)));
        assert!(part.r.contains(&Var(5)));
        assert_eq!(part.b, None);
        assert_eq!(qbf.p_vars(), vec![Var(1)]);
    }

    #[test]
    fn roundtrip_is_identity_on_canonical_text() {
        let qbf = parse_qdimacs(SAMPLE).unwrap();
        let text = write_qdimacs(&qbf);
        let qbf2 = parse_qdimacs(&text).unwrap();
        assert_eq!(qbf, qbf2);
        assert_eq!(write_qdimacs(&qbf2), text);
    }

    #[test]
    fn consecutive_blocks_merge_on_write() {
        let text = "p cnf 3 1\ne 1 0\ne 2 0\na 3 0\n1 2 3 0\n";
        let qbf = parse_qdimacs(text).unwrap();
        let out = write_qdimacs(&qbf);
        assert!(out.contains("e 1 2 0\n"));
        assert!(out.contains("a 3 0\n"));
    }

    #[test]
    fn tautological_clause_reports_line() {
        let text = "p cnf 2 1\ne 1 2 0\n1 -1 0\n";
        assert_eq!(
            parse_qdimacs(text),
            Err(QdimacsError::TautologicalClause { line: 3 })
        );
    }

    #[test]
    fn unbound_variable_detected() {
        let text = "p cnf 2 1\ne 1 0\n1 2 0\n";
        assert_eq!(parse_qdimacs(text), Err(QdimacsError::UnboundVariable(2)));
    }

    #[test]
    fn bad_partitions_rejected() {
        let overlap = "c partition p: 1 q: 1 r: 2\np cnf 2 1\ne 1 0\na 2 0\n1 0\n";
        assert!(matches!(
            parse_qdimacs(overlap),
            Err(QdimacsError::BadPartition(_))
        ));
        let p_universal = "c partition p: 1 q: 2 r:\np cnf 2 1\na 1 0\ne 2 0\n2 0\n";
        assert!(matches!(
            parse_qdimacs(p_universal),
            Err(QdimacsError::BadPartition(_))
        ));
        let p_after_q = "c partition p: 2 q: 1 r:\np cnf 2 1\ne 1 2 0\n1 0\n";
        assert!(matches!(
            parse_qdimacs(p_after_q),
            Err(QdimacsError::BadPartition(_))
        ));
        let b_existential = "c partition p: 1 q: 3 r: b: 2\np cnf 3 1\ne 1 2 0\na 3 0\n3 0\n";
        assert!(matches!(
            parse_qdimacs(b_existential),
            Err(QdimacsError::BadPartition(_))
        ));
        let b_before_p = "c partition p: 2 q: 3 r: b: 1\np cnf 3 1\na 1 0\ne 2 3 0\n3 0\n";
        assert!(matches!(
            parse_qdimacs(b_before_p),
            Err(QdimacsError::BadPartition(_))
        ));
        let unknown = "c partition p: 1 q: 9 r:\np cnf 1 1\ne 1 0\n1 0\n";
        assert!(matches!(
            parse_qdimacs(unknown),
            Err(QdimacsError::BadPartition(_))
        ));
    }

    #[test]
    fn partition_comment_allows_empty_segments_and_b() {
        let text = "c partition p: 1 q: 3 r: b: 2\np cnf 3 1\ne 1 0\na 2 0\ne 3 0\n2 3 0\n";
        let qbf = parse_qdimacs(text).unwrap();
        let part = qbf.partition.unwrap();
        assert_eq!(part.b, Some(Var(2)));
        assert!(part.r.is_empty());
    }

    #[test]
    fn partition_survives_roundtrip_with_b() {
        let text = "c partition p: 1 q: 3 r: b: 2\np cnf 3 1\ne 1 0\na 2 0\ne 3 0\n2 3 0\n";
        let qbf = parse_qdimacs(text).unwrap();
        let qbf2 = parse_qdimacs(&write_qdimacs(&qbf)).unwrap();
        assert_eq!(qbf, qbf2);
    }

    #[test]
    fn syntax_errors_report_lines() {
        let unterminated = "p cnf 2 1\ne 1 2 0\n1 2\n";
        assert!(matches!(
            parse_qdimacs(unterminated),
            Err(QdimacsError::Syntax { line: 3, .. })
        ));
        let dup_quant = "p cnf 2 1\ne 1 0\na 1 0\n1 0\n";
        assert!(matches!(
            parse_qdimacs(dup_quant),
            Err(QdimacsError::Syntax { line: 3, .. })
        ));
        let count_mismatch = "p cnf 2 2\ne 1 2 0\n1 2 0\n";
        assert!(matches!(
            parse_qdimacs(count_mismatch),
            Err(QdimacsError::Syntax { .. })
        ));
    }
}
