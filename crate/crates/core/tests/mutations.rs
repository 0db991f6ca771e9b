// Single-line corruptions of the golden traces. Each case must be rejected
// at a designated step with a designated label, so the checker's error
// reporting is pinned down, not just its accept/reject bit.

mod common;

use common::{fixture_text, patched_trace, BROKEN, PARSE_BROKEN};
use qbfi_core::{check_refutation, parse_qdimacs, parse_trace, Qbf};

fn formula(stem: &str) -> Qbf {
    parse_qdimacs(&fixture_text(&format!("{stem}.qdimacs"))).unwrap()
}

#[test]
fn corrupted_traces_fail_at_the_designated_step() {
    for case in BROKEN {
        let qbf = formula(case.stem);
        let text = patched_trace(case.stem, case.line, case.replacement);
        let trace = parse_trace(&text, &qbf)
            .unwrap_or_else(|e| panic!("{}: unexpected parse failure: {e}", case.tag));
        let report = check_refutation(&trace, &qbf, None);
        assert!(!report.valid, "{}: checker accepted the corruption", case.tag);
        let v = report.first_failure.unwrap();
        assert_eq!(
            (v.step, v.label),
            (case.step, case.label),
            "{}: reported {} at step {}",
            case.tag,
            v.label,
            v.step
        );
    }
}

#[test]
fn malformed_traces_fail_in_the_parser() {
    for case in PARSE_BROKEN {
        let qbf = formula(case.stem);
        let text = patched_trace(case.stem, case.line, case.replacement);
        match parse_trace(&text, &qbf) {
            Ok(_) => panic!("{}: parser accepted the corruption", case.tag),
            Err(e) => {
                let msg = e.to_string();
                assert!(
                    msg.starts_with(case.expect),
                    "{}: expected {} error, got '{msg}'",
                    case.tag,
                    case.expect
                );
            }
        }
    }
}

#[test]
fn corpus_is_large_enough_to_gate_on() {
    assert!(BROKEN.len() >= 25, "need at least 25 checker-level corruptions");
    assert!(BROKEN.len() + PARSE_BROKEN.len() >= 40);
}
