// Shared between the integration test binaries; not every binary uses
// every helper.
#![allow(dead_code)]

use qbfi_core::{parse_qdimacs, parse_trace, Calculus, Label, ProofTrace, Qbf};
use std::fs;
use std::path::PathBuf;

/// Fixture stems paired with the calculus their trace declares.
pub const GOLDENS: &[(&str, Calculus)] = &[
    ("qres_interp", Calculus::Qres),
    ("qres_two_p", Calculus::Qres),
    ("qres_red_order", Calculus::Qres),
    ("qres_negp", Calculus::Qres),
    ("qures_upivot", Calculus::Qures),
    ("ldqres_star", Calculus::Ldqres),
    ("lquplus_full", Calculus::Lquplus),
    ("lquplus_uindex", Calculus::Lquplus),
    ("ircalc_basic", Calculus::Ircalc),
    ("ircalc_inst", Calculus::Ircalc),
    ("irmcalc_merge", Calculus::Irmcalc),
    ("irmcalc_inst_chain", Calculus::Irmcalc),
    ("irmcalc_disjoint", Calculus::Irmcalc),
    ("irmcalc_taurange", Calculus::Irmcalc),
    ("irmcalc_domain", Calculus::Irmcalc),
    ("fb_lquplus", Calculus::Lquplus),
    ("fb_bpivot", Calculus::Lquplus),
    ("fb_ircalc", Calculus::Ircalc),
];

pub fn fixture_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(file)
}

pub fn fixture_text(file: &str) -> String {
    let path = fixture_path(file);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

pub fn load(stem: &str) -> (Qbf, ProofTrace) {
    let qbf = parse_qdimacs(&fixture_text(&format!("{stem}.qdimacs")))
        .unwrap_or_else(|e| panic!("{stem}.qdimacs: {e}"));
    let trace = parse_trace(&fixture_text(&format!("{stem}.qrtf")), &qbf)
        .unwrap_or_else(|e| panic!("{stem}.qrtf: {e}"));
    (qbf, trace)
}

/// Rewrite one line of a fixture trace (0 is the header; step n sits on
/// line n in every golden). An empty replacement deletes the line.
pub fn patched_trace(stem: &str, line: usize, replacement: &str) -> String {
    let text = fixture_text(&format!("{stem}.qrtf"));
    let mut lines: Vec<&str> = text.lines().collect();
    if replacement.is_empty() {
        lines.remove(line);
    } else {
        lines[line] = replacement;
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// A single-line corruption that must be rejected by the checker at a
/// designated step with a designated label.
pub struct Broken {
    pub tag: &'static str,
    pub stem: &'static str,
    pub line: usize,
    pub replacement: &'static str,
    pub step: u32,
    pub label: Label,
}

pub const BROKEN: &[Broken] = &[
    Broken {
        tag: "universal pivot smuggled into qres",
        stem: "qres_interp",
        line: 5,
        replacement: "5 1 2 0 RES 1 2 0 2 0",
        step: 5,
        label: Label::PivotKind,
    },
    Broken {
        tag: "pivot with no complement in the second antecedent",
        stem: "qres_interp",
        line: 5,
        replacement: "5 1 2 0 RES 1 2 0 1 0",
        step: 5,
        label: Label::PivotMismatch,
    },
    Broken {
        tag: "swapped resolution antecedents",
        stem: "qres_interp",
        line: 9,
        replacement: "9 0 RES 8 6 0 1 0",
        step: 9,
        label: Label::PivotMismatch,
    },
    Broken {
        tag: "reduction aux names a variable not in the antecedent",
        stem: "qres_interp",
        line: 6,
        replacement: "6 1 0 URED 5 0 4 0",
        step: 6,
        label: Label::WrongConclusion,
    },
    Broken {
        tag: "reduction conclusion keeps an extra literal",
        stem: "qres_interp",
        line: 6,
        replacement: "6 1 4 0 URED 5 0 2 0",
        step: 6,
        label: Label::WrongConclusion,
    },
    Broken {
        tag: "resolvent drops a literal it must keep",
        stem: "qres_interp",
        line: 5,
        replacement: "5 1 0 RES 1 2 0 3 0",
        step: 5,
        label: Label::WrongConclusion,
    },
    Broken {
        tag: "final step removed",
        stem: "qres_interp",
        line: 9,
        replacement: "",
        step: 8,
        label: Label::NoEmptyRoot,
    },
    Broken {
        tag: "axiom widened beyond the matrix clause",
        stem: "qres_interp",
        line: 1,
        replacement: "1 1 2 3 4 0 AX 0",
        step: 1,
        label: Label::NotAxiom,
    },
    Broken {
        tag: "starred reduction rule in a short-distance calculus",
        stem: "qres_interp",
        line: 6,
        replacement: "6 1 0 URED* 5 0 2 0",
        step: 6,
        label: Label::RuleNotInCalculus,
    },
    Broken {
        tag: "merged literal written without its star",
        stem: "ldqres_star",
        line: 5,
        replacement: "5 1 3 0 RES 1 2 0 2 0",
        step: 5,
        label: Label::UShape,
    },
    Broken {
        tag: "plain reduction applied to a starred literal",
        stem: "ldqres_star",
        line: 6,
        replacement: "6 1 0 URED 5 0 3* 0",
        step: 6,
        label: Label::UShape,
    },
    Broken {
        tag: "long-distance trace declared as qres",
        stem: "ldqres_star",
        line: 0,
        replacement: "s qrtf qres",
        step: 5,
        label: Label::TautologyResolvent,
    },
    Broken {
        tag: "universal-pivot trace declared as qres",
        stem: "qures_upivot",
        line: 0,
        replacement: "s qrtf qres",
        step: 6,
        label: Label::PivotKind,
    },
    Broken {
        tag: "reduction aux swapped to an absent universal",
        stem: "qures_upivot",
        line: 9,
        replacement: "9 -1 0 URED 8 0 5 0",
        step: 9,
        label: Label::WrongConclusion,
    },
    Broken {
        tag: "swapped antecedents on the first shared pivot",
        stem: "qres_two_p",
        line: 13,
        replacement: "13 2 0 RES 10 8 0 1 0",
        step: 13,
        label: Label::PivotMismatch,
    },
    Broken {
        tag: "universal-pivot step declared as ldqres",
        stem: "lquplus_full",
        line: 0,
        replacement: "s qrtf ldqres",
        step: 8,
        label: Label::PivotKind,
    },
    Broken {
        tag: "starred pivot",
        stem: "lquplus_uindex",
        line: 5,
        replacement: "5 1 3* 0 RES 1 2 0 2* 0",
        step: 5,
        label: Label::StarPivot,
    },
    Broken {
        tag: "merge across a pivot with a larger prefix index",
        stem: "lquplus_uindex",
        line: 5,
        replacement: "5 1 3* 0 RES 1 2 0 3 0",
        step: 5,
        label: Label::UIndex,
    },
    Broken {
        tag: "reduction of a universal left of an existential",
        stem: "qres_red_order",
        line: 5,
        replacement: "5 1 2 3 0 URED 1 0 2 0",
        step: 5,
        label: Label::RedIndex,
    },
    Broken {
        tag: "reduction aimed at an existential variable",
        stem: "qres_red_order",
        line: 5,
        replacement: "5 1 2 3 0 URED 1 0 3 0",
        step: 5,
        label: Label::RedNotUniversal,
    },
    Broken {
        tag: "pivot annotations disagree on a shared key",
        stem: "irmcalc_disjoint",
        line: 5,
        replacement: "5 1 5:2=0,4=1 0 RES 3 4 0 5:2=0,4=1 0",
        step: 5,
        label: Label::DomainsNotDisjoint,
    },
    Broken {
        tag: "shared star lands in the common pivot part",
        stem: "irmcalc_taurange",
        line: 10,
        replacement: "10 1 0 RES 4 8 0 6:2=0,5=* 0",
        step: 10,
        label: Label::TauRange,
    },
    Broken {
        tag: "merge of occurrences with different domains",
        stem: "irmcalc_domain",
        line: 5,
        replacement: "5 1 5:2=0,4=* 0 MERGE 3 0 5:2=0 5:2=0,4=0 0",
        step: 5,
        label: Label::MergeDomain,
    },
    Broken {
        tag: "instantiation with a star value",
        stem: "ircalc_inst",
        line: 3,
        replacement: "3 1 3:2=1 0 INST 1 0 2=* 0",
        step: 3,
        label: Label::InstRange,
    },
    Broken {
        tag: "axiom with the right skeleton but wrong annotation",
        stem: "irmcalc_merge",
        line: 1,
        replacement: "1 1 3:2=1 5:2=0,4=0 0 AX 0",
        step: 1,
        label: Label::BadAxiomAnnotation,
    },
    Broken {
        tag: "axiom whose skeleton matches no clause",
        stem: "irmcalc_merge",
        line: 1,
        replacement: "1 -1 3:2=0 5:2=0,4=0 0 AX 0",
        step: 1,
        label: Label::NotAxiom,
    },
    Broken {
        tag: "residue-splitting resolution declared as ircalc",
        stem: "irmcalc_merge",
        line: 0,
        replacement: "s qrtf ircalc",
        step: 3,
        label: Label::PivotAnnotationMismatch,
    },
    Broken {
        tag: "merge rule declared as ircalc",
        stem: "irmcalc_inst_chain",
        line: 0,
        replacement: "s qrtf ircalc",
        step: 5,
        label: Label::RuleNotInCalculus,
    },
    Broken {
        tag: "expansion resolvent keeps a phantom literal",
        stem: "ircalc_basic",
        line: 5,
        replacement: "5 1 5:4=0 0 RES 1 2 0 3:2=0 0",
        step: 5,
        label: Label::WrongConclusion,
    },
    Broken {
        tag: "pivot annotation absent from the first antecedent",
        stem: "ircalc_basic",
        line: 5,
        replacement: "5 1 0 RES 1 2 0 3:2=1 0",
        step: 5,
        label: Label::PivotAnnotationMismatch,
    },
    Broken {
        tag: "antecedents sharing an existential with opposite signs",
        stem: "fb_bpivot",
        line: 7,
        replacement: "7 -3 -4 0 RES 1 3 0 2 0",
        step: 7,
        label: Label::ExistentialClash,
    },
];

/// A corruption the parser itself must reject; `expect` names the
/// `TraceError` variant via its display prefix.
pub struct ParseBroken {
    pub tag: &'static str,
    pub stem: &'static str,
    pub line: usize,
    pub replacement: &'static str,
    pub expect: &'static str,
}

pub const PARSE_BROKEN: &[ParseBroken] = &[
    ParseBroken {
        tag: "antecedent referencing a later step",
        stem: "qres_interp",
        line: 5,
        replacement: "5 1 2 0 RES 1 99 0 3 0",
        expect: "FORWARD_REFERENCE",
    },
    ParseBroken {
        tag: "resolution with one antecedent",
        stem: "qres_interp",
        line: 5,
        replacement: "5 1 2 0 RES 1 0 3 0",
        expect: "BAD_ARITY",
    },
    ParseBroken {
        tag: "reduction with two aux literals",
        stem: "qres_interp",
        line: 6,
        replacement: "6 1 0 URED 5 0 2 4 0",
        expect: "BAD_ARITY",
    },
    ParseBroken {
        tag: "unknown calculus in the header",
        stem: "qres_interp",
        line: 0,
        replacement: "s qrtf foo",
        expect: "SYNTAX",
    },
    ParseBroken {
        tag: "literal both negated and starred",
        stem: "ldqres_star",
        line: 5,
        replacement: "5 1 -3* 0 RES 1 2 0 2 0",
        expect: "SYNTAX",
    },
    ParseBroken {
        tag: "non-increasing step id",
        stem: "qres_interp",
        line: 5,
        replacement: "4 1 2 0 RES 1 2 0 3 0",
        expect: "SYNTAX",
    },
    ParseBroken {
        tag: "annotation keyed by an existential variable",
        stem: "ircalc_basic",
        line: 1,
        replacement: "1 1 3:3=0 0 AX 0",
        expect: "SYNTAX",
    },
    ParseBroken {
        tag: "annotated literal inside a cdcl trace",
        stem: "qres_interp",
        line: 1,
        replacement: "1 1 2 3:2=0 0 AX 0",
        expect: "ANNOTATION_IN_CDCL_TRACE",
    },
    ParseBroken {
        tag: "starred literal inside an expansion trace",
        stem: "ircalc_basic",
        line: 1,
        replacement: "1 1* 3:2=0 0 AX 0",
        expect: "STAR_IN_EXPANSION_LITERAL",
    },
];
