//! Resolution proof traces: six calculi, one line-oriented text format.
//!
//! ```text
//! s qrtf <calculus>
//! <id> <lits> 0 <RULE> <antecedents> 0 [<aux> 0]
//! ```
//!
//! Step ids are strictly increasing; the last step is the root. `AX` lines
//! carry no aux section; `URED`/`URED*` name the reduced literal, `RES` the
//! pivot literal as it occurs in the first antecedent, `INST` a single
//! comma-joined annotation, `MERGE` the two annotated literals being merged.

use crate::annot::{ALit, Ann, AnnClause, AnnVal};
use crate::qbf::{Clause, Lit, Qbf, Var};
use std::fmt;
use std::fmt::Write as _;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Calculus {
    Qres,
    Qures,
    Ldqres,
    Lquplus,
    Ircalc,
    Irmcalc,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Family {
    Cdcl,
    Expansion,
}

impl Calculus {
    pub fn name(self) -> &'static str {
        match self {
            Calculus::Qres => "qres",
            Calculus::Qures => "qures",
            Calculus::Ldqres => "ldqres",
            Calculus::Lquplus => "lquplus",
            Calculus::Ircalc => "ircalc",
            Calculus::Irmcalc => "irmcalc",
        }
    }

    pub fn from_name(s: &str) -> Option<Calculus> {
        Some(match s {
            "qres" => Calculus::Qres,
            "qures" => Calculus::Qures,
            "ldqres" => Calculus::Ldqres,
            "lquplus" => Calculus::Lquplus,
            "ircalc" => Calculus::Ircalc,
            "irmcalc" => Calculus::Irmcalc,
            _ => return None,
        })
    }

    pub fn family(self) -> Family {
        match self {
            Calculus::Ircalc | Calculus::Irmcalc => Family::Expansion,
            _ => Family::Cdcl,
        }
    }

    /// Long-distance merging (and URED*) is available only here.
    pub fn long_distance(self) -> bool {
        matches!(self, Calculus::Ldqres | Calculus::Lquplus)
    }

    /// Universal resolution pivots are available only here.
    pub fn universal_pivots(self) -> bool {
        matches!(self, Calculus::Qures | Calculus::Lquplus)
    }
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rule {
    Ax,
    Ured,
    UredStar,
    Res,
    Inst,
    Merge,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Ax => "AX",
            Rule::Ured => "URED",
            Rule::UredStar => "URED*",
            Rule::Res => "RES",
            Rule::Inst => "INST",
            Rule::Merge => "MERGE",
        }
    }

    fn from_name(s: &str) -> Option<Rule> {
        Some(match s {
            "AX" => Rule::Ax,
            "URED" => Rule::Ured,
            "URED*" => Rule::UredStar,
            "RES" => Rule::Res,
            "INST" => Rule::Inst,
            "MERGE" => Rule::Merge,
            _ => return None,
        })
    }

    fn n_ants(self) -> usize {
        match self {
            Rule::Ax => 0,
            Rule::Res => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Step conclusion, typed by the trace family.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Concl {
    Cdcl(Clause),
    Exp(AnnClause),
}

impl Concl {
    pub fn is_empty(&self) -> bool {
        match self {
            Concl::Cdcl(c) => c.is_empty(),
            Concl::Exp(c) => c.is_empty(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Aux {
    None,
    Lit(Lit),
    ALit(ALit),
    Inst(Ann),
    Merge(ALit, ALit),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProofStep {
    pub id: u32,
    pub conclusion: Concl,
    pub rule: Rule,
    pub antecedents: Vec<u32>,
    pub aux: Aux,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProofTrace {
    pub calculus: Calculus,
    pub steps: Vec<ProofStep>,
}

impl ProofTrace {
    pub fn root(&self) -> Option<&ProofStep> {
        self.steps.last()
    }

    pub fn step_by_id(&self, id: u32) -> Option<&ProofStep> {
        self.steps
            .binary_search_by_key(&id, |s| s.id)
            .ok()
            .map(|i| &self.steps[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("SYNTAX at line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("FORWARD_REFERENCE at line {line}: step {id} is not defined yet")]
    ForwardReference { line: usize, id: u32 },
    #[error("BAD_ARITY at line {line}: {msg}")]
    BadArity { line: usize, msg: String },
    #[error("ANNOTATION_IN_CDCL_TRACE at line {line}")]
    AnnotationInCdclTrace { line: usize },
    #[error("STAR_IN_EXPANSION_LITERAL at line {line}")]
    StarInExpansionLiteral { line: usize },
}

fn syntax(line: usize, msg: impl Into<String>) -> TraceError {
    TraceError::Syntax { line, msg: msg.into() }
}

/// Parse a CDCL literal token: `-?digits` or `digits*`.
fn parse_cdcl_lit(tok: &str, qbf: &Qbf, line: usize) -> Result<Lit, TraceError> {
    if tok.contains(':') {
        return Err(TraceError::AnnotationInCdclTrace { line });
    }
    let (neg, body) = match tok.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, tok),
    };
    let (star, digits) = match body.strip_suffix('*') {
        Some(rest) => (true, rest),
        None => (false, body),
    };
    if neg && star {
        return Err(syntax(line, format!("literal token '{tok}' is both negated and starred")));
    }
    let id: u32 = digits
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| syntax(line, format!("bad literal token '{tok}'")))?;
    let v = Var(id);
    if !qbf.prefix.contains(v) {
        return Err(syntax(line, format!("variable {id} is not in the prefix")));
    }
    if star {
        if !qbf.prefix.is_universal(v) {
            return Err(syntax(line, format!("merged literal {id}* on an existential variable")));
        }
        Ok(Lit::star(v))
    } else if neg {
        Ok(Lit::neg(v))
    } else {
        Ok(Lit::pos(v))
    }
}

/// Parse an annotation body `k=v[,k=v]*`.
fn parse_ann_body(body: &str, qbf: &Qbf, line: usize) -> Result<Ann, TraceError> {
    let mut pairs = Vec::new();
    for part in body.split(',') {
        let (k, val) = part
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("bad annotation pair '{part}'")))?;
        let id: u32 = k
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| syntax(line, format!("bad annotation key '{k}'")))?;
        let v = Var(id);
        if !qbf.prefix.is_universal(v) {
            return Err(syntax(line, format!("annotation key {id} is not a universal variable")));
        }
        let av = match val {
            "0" => AnnVal::Zero,
            "1" => AnnVal::One,
            "*" => AnnVal::Star,
            _ => return Err(syntax(line, format!("bad annotation value '{val}'"))),
        };
        if pairs.iter().any(|&(pv, _)| pv == v) {
            return Err(syntax(line, format!("duplicate annotation key {id}")));
        }
        pairs.push((v, av));
    }
    Ok(Ann::new(pairs))
}

/// Parse an expansion literal token: `-?digits[:k=v,...]`.
fn parse_exp_lit(tok: &str, qbf: &Qbf, line: usize) -> Result<ALit, TraceError> {
    let (base, ann_body) = match tok.split_once(':') {
        Some((b, a)) => (b, Some(a)),
        None => (tok, None),
    };
    if base.ends_with('*') {
        return Err(TraceError::StarInExpansionLiteral { line });
    }
    let (neg, digits) = match base.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, base),
    };
    let id: u32 = digits
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| syntax(line, format!("bad literal token '{tok}'")))?;
    let v = Var(id);
    if !qbf.prefix.contains(v) {
        return Err(syntax(line, format!("variable {id} is not in the prefix")));
    }
    let ann = match ann_body {
        Some(body) => parse_ann_body(body, qbf, line)?,
        None => Ann::empty(),
    };
    let lit = if neg { Lit::neg(v) } else { Lit::pos(v) };
    Ok(ALit::new(lit, ann))
}

pub fn parse_trace(text: &str, qbf: &Qbf) -> Result<ProofTrace, TraceError> {
    let mut calculus: Option<Calculus> = None;
    let mut steps: Vec<ProofStep> = Vec::new();
    let mut last_id: u32 = 0;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("c ") || line == "c" {
            continue;
        }
        if calculus.is_none() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 || toks[0] != "s" || toks[1] != "qrtf" {
                return Err(syntax(lineno, "expected header 's qrtf <calculus>'"));
            }
            calculus = Some(
                Calculus::from_name(toks[2])
                    .ok_or_else(|| syntax(lineno, format!("unknown calculus '{}'", toks[2])))?,
            );
            continue;
        }
        let calc = calculus.unwrap();
        let toks: Vec<&str> = line.split_whitespace().collect();
        let mut pos = 0;

        let id: u32 = toks
            .first()
            .and_then(|t| t.parse().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| syntax(lineno, "step line must start with a positive id"))?;
        if id <= last_id {
            return Err(syntax(lineno, format!("step id {id} does not increase")));
        }
        pos += 1;

        // Conclusion literals up to the terminator.
        let mut concl_toks = Vec::new();
        loop {
            match toks.get(pos) {
                Some(&"0") => {
                    pos += 1;
                    break;
                }
                Some(&t) => {
                    concl_toks.push(t);
                    pos += 1;
                }
                None => return Err(syntax(lineno, "unterminated conclusion")),
            }
        }

        let rule_tok = toks
            .get(pos)
            .ok_or_else(|| syntax(lineno, "missing rule name"))?;
        let rule = Rule::from_name(rule_tok)
            .ok_or_else(|| syntax(lineno, format!("unknown rule '{rule_tok}'")))?;
        pos += 1;

        let mut ants: Vec<u32> = Vec::new();
        loop {
            match toks.get(pos) {
                Some(&"0") => {
                    pos += 1;
                    break;
                }
                Some(&t) => {
                    let ant: u32 = t
                        .parse()
                        .ok()
                        .filter(|&n| n > 0)
                        .ok_or_else(|| syntax(lineno, format!("bad antecedent '{t}'")))?;
                    if steps.binary_search_by_key(&ant, |s| s.id).is_err() {
                        return Err(TraceError::ForwardReference { line: lineno, id: ant });
                    }
                    ants.push(ant);
                    pos += 1;
                }
                None => return Err(syntax(lineno, "unterminated antecedent list")),
            }
        }
        if ants.len() != rule.n_ants() {
            return Err(TraceError::BadArity {
                line: lineno,
                msg: format!("{} takes {} antecedents, got {}", rule, rule.n_ants(), ants.len()),
            });
        }

        // Optional aux section: remaining tokens, 0-terminated.
        let aux_toks: Option<Vec<&str>> = if pos == toks.len() {
            None
        } else {
            if toks.last() != Some(&"0") {
                return Err(syntax(lineno, "unterminated aux section"));
            }
            Some(toks[pos..toks.len() - 1].to_vec())
        };

        let expect_aux = |n: usize| -> Result<&Vec<&str>, TraceError> {
            match &aux_toks {
                Some(v) if v.len() == n => Ok(v),
                Some(v) => Err(TraceError::BadArity {
                    line: lineno,
                    msg: format!("{} takes {} aux tokens, got {}", rule, n, v.len()),
                }),
                None => Err(TraceError::BadArity {
                    line: lineno,
                    msg: format!("{rule} requires an aux section"),
                }),
            }
        };

        let aux = match rule {
            Rule::Ax => {
                if aux_toks.is_some() {
                    return Err(TraceError::BadArity {
                        line: lineno,
                        msg: "AX carries no aux section".into(),
                    });
                }
                Aux::None
            }
            Rule::Ured | Rule::UredStar | Rule::Res => {
                let v = expect_aux(1)?;
                match calc.family() {
                    Family::Cdcl => Aux::Lit(parse_cdcl_lit(v[0], qbf, lineno)?),
                    Family::Expansion => Aux::ALit(parse_exp_lit(v[0], qbf, lineno)?),
                }
            }
            Rule::Inst => {
                let v = expect_aux(1)?;
                Aux::Inst(parse_ann_body(v[0], qbf, lineno)?)
            }
            Rule::Merge => {
                let v = expect_aux(2)?;
                let a = parse_exp_lit(v[0], qbf, lineno)?;
                let b = parse_exp_lit(v[1], qbf, lineno)?;
                if a.lit != b.lit {
                    return Err(syntax(lineno, "MERGE literals differ in variable or polarity"));
                }
                if a.ann == b.ann {
                    return Err(syntax(lineno, "MERGE literals carry identical annotations"));
                }
                Aux::Merge(a, b)
            }
        };

        let conclusion = match calc.family() {
            Family::Cdcl => {
                let mut lits = Vec::new();
                for t in &concl_toks {
                    lits.push(parse_cdcl_lit(t, qbf, lineno)?);
                }
                Concl::Cdcl(Clause::new(lits))
            }
            Family::Expansion => {
                let mut lits = Vec::new();
                for t in &concl_toks {
                    lits.push(parse_exp_lit(t, qbf, lineno)?);
                }
                Concl::Exp(AnnClause::new(lits))
            }
        };

        steps.push(ProofStep { id, conclusion, rule, antecedents: ants, aux });
        last_id = id;
    }

    let calculus = calculus.ok_or_else(|| syntax(1, "missing header"))?;
    Ok(ProofTrace { calculus, steps })
}

fn write_cdcl_lit(out: &mut String, l: Lit) {
    match l.pol {
        crate::qbf::Pol::Pos => {
            let _ = write!(out, "{}", l.var);
        }
        crate::qbf::Pol::Neg => {
            let _ = write!(out, "-{}", l.var);
        }
        crate::qbf::Pol::Star => {
            let _ = write!(out, "{}*", l.var);
        }
    }
}

fn write_alit(out: &mut String, l: &ALit) {
    write_cdcl_lit(out, l.lit);
    if !l.ann.is_empty() {
        let _ = write!(out, ":{}", l.ann);
    }
}

pub fn write_trace(trace: &ProofTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "s qrtf {}", trace.calculus);
    for step in &trace.steps {
        let _ = write!(out, "{}", step.id);
        match &step.conclusion {
            Concl::Cdcl(c) => {
                for &l in c.iter() {
                    out.push(' ');
                    write_cdcl_lit(&mut out, l);
                }
            }
            Concl::Exp(c) => {
                for l in c.iter() {
                    out.push(' ');
                    write_alit(&mut out, l);
                }
            }
        }
        let _ = write!(out, " 0 {}", step.rule);
        for a in &step.antecedents {
            let _ = write!(out, " {a}");
        }
        out.push_str(" 0");
        match &step.aux {
            Aux::None => {}
            Aux::Lit(l) => {
                out.push(' ');
                write_cdcl_lit(&mut out, *l);
                out.push_str(" 0");
            }
            Aux::ALit(l) => {
                out.push(' ');
                write_alit(&mut out, l);
                out.push_str(" 0");
            }
            Aux::Inst(ann) => {
                let _ = write!(out, " {ann} 0");
            }
            Aux::Merge(a, b) => {
                out.push(' ');
                write_alit(&mut out, a);
                out.push(' ');
                write_alit(&mut out, b);
                out.push_str(" 0");
            }
        }
        out.push('\n');
    }
    out
}
