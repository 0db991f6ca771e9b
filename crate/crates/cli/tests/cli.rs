//! End-to-end exercises of the binary: each test drives real processes over
//! real files and checks stdout plus exit codes.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

const FORMULA: &str = "\
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

const PROOF: &str = "\
s qrtf qres
1 1 2 3 0 AX 0
2 1 2 -3 0 AX 0
3 -1 4 5 0 AX 0
4 -1 4 -5 0 AX 0
5 1 2 0 RES 1 2 0 3 0
6 1 0 URED 5 0 2 0
7 -1 4 0 RES 3 4 0 5 0
8 -1 0 URED 7 0 4 0
9 0 RES 6 8 0 1 0
";

/// Same shape with the shared variable flipped, so the first half holds it
/// negatively and monotone extraction must refuse.
const NEG_FORMULA: &str = "\
c partition p: 1 q: 2 3 r: 4 5
p cnf 5 4
e 1 0
a 2 0
e 3 0
a 4 0
e 5 0
-1 2 3 0
-1 2 -3 0
1 4 5 0
1 4 -5 0
";

const NEG_PROOF: &str = "\
s qrtf qres
1 -1 2 3 0 AX 0
2 -1 2 -3 0 AX 0
3 1 4 5 0 AX 0
4 1 4 -5 0 AX 0
5 -1 2 0 RES 1 2 0 3 0
6 -1 0 URED 5 0 2 0
7 1 4 0 RES 3 4 0 5 0
8 1 0 URED 7 0 4 0
9 0 RES 8 6 0 1 0
";

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn qbfi(args: &[&str], stdin: Option<&str>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qbfi"));
    cmd.args(args).stdout(Stdio::piped()).stderr(Stdio::piped());
    cmd.stdin(if stdin.is_some() { Stdio::piped() } else { Stdio::null() });
    let mut child = cmd.spawn().expect("spawning qbfi");
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    let out = child.wait_with_output().expect("waiting for qbfi");
    Run {
        code: out.status.code().expect("qbfi was killed by a signal"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn generated_clique_formula_evaluates_false() {
    for extra in [&[][..], &["--fb"][..]] {
        let gen = qbfi(&[&["gen-clique", "--n", "2"], extra].concat(), None);
        assert_eq!(gen.code, 0, "{}", gen.stderr);
        let eval = qbfi(&["eval", "-"], Some(&gen.stdout));
        assert_eq!(eval.code, 0, "{}", eval.stderr);
        assert_eq!(eval.stdout, "FALSE\n");
    }
}

#[test]
fn check_reports_verdict_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.qdimacs", FORMULA);
    let p = write(dir.path(), "p.qrtf", PROOF);

    let good = qbfi(&["check", &f, &p], None);
    assert_eq!(good.code, 0, "{}", good.stderr);
    assert!(good.stdout.starts_with("VALID qres steps=9"), "{}", good.stdout);

    // Same step shapes, universal pivot: wrong rule for this calculus.
    let broken = PROOF.replace("5 1 2 0 RES 1 2 0 3 0", "5 1 3 0 RES 1 2 0 2 0");
    let bad = write(dir.path(), "bad.qrtf", &broken);
    let rejected = qbfi(&["check", &f, &bad], None);
    assert_eq!(rejected.code, 1);
    assert_eq!(rejected.stdout, "INVALID PIVOT_KIND at step 5\n");
}

#[test]
fn interpolation_restriction_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.qdimacs", FORMULA);
    let p = write(dir.path(), "p.qrtf", PROOF);
    let net = dir.path().join("interp.net");
    let net = net.to_str().unwrap();

    let extract = qbfi(&["interpolate", &f, &p, "--monotone", "--out", net], None);
    assert_eq!(extract.code, 0, "{}", extract.stderr);
    assert!(extract.stdout.contains("gates=9"), "{}", extract.stdout);

    let verified = qbfi(&["verify-interpolant", &f, net, "--jobs", "2"], None);
    assert_eq!(verified.code, 0, "{}", verified.stderr);
    assert!(verified.stdout.starts_with("VERIFIED interpolant"), "{}", verified.stdout);

    for (bits, side) in [("0", "SIDE Q"), ("1", "SIDE R")] {
        let rt = dir.path().join(format!("r{bits}.qrtf"));
        let rf = dir.path().join(format!("r{bits}.qdimacs"));
        let restricted = qbfi(
            &[
                "restrict",
                &f,
                &p,
                net,
                "--assign",
                bits,
                "--emit-trace",
                rt.to_str().unwrap(),
                "--emit-formula",
                rf.to_str().unwrap(),
            ],
            None,
        );
        assert_eq!(restricted.code, 0, "{}", restricted.stderr);
        assert!(restricted.stdout.starts_with(side), "{}", restricted.stdout);

        // The emitted pair is self-contained: the binary re-checks it.
        let again = qbfi(&["check", rf.to_str().unwrap(), rt.to_str().unwrap()], None);
        assert_eq!(again.code, 0, "{}", again.stderr);
        assert!(again.stdout.starts_with("VALID"), "{}", again.stdout);
    }
}

#[test]
fn monotone_extraction_refuses_negative_shared_occurrence() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.qdimacs", NEG_FORMULA);
    let p = write(dir.path(), "p.qrtf", NEG_PROOF);

    let general = qbfi(&["interpolate", &f, &p], None);
    assert_eq!(general.code, 0, "{}", general.stderr);

    let refused = qbfi(&["interpolate", &f, &p, "--monotone"], None);
    assert_eq!(refused.code, 1);
    assert!(refused.stdout.starts_with("P_NOT_POSITIVE"), "{}", refused.stdout);
}

#[test]
fn solver_emits_a_checkable_trace() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.qdimacs", FORMULA);
    let t = dir.path().join("found.qrtf");

    let solved = qbfi(&["solve", &f, "--emit", t.to_str().unwrap()], None);
    assert_eq!(solved.code, 0, "{}", solved.stderr);
    assert!(solved.stdout.starts_with("REFUTED steps="), "{}", solved.stdout);

    let checked = qbfi(&["check", &f, t.to_str().unwrap()], None);
    assert_eq!(checked.code, 0, "{}", checked.stderr);

    let starved = qbfi(&["solve", &f, "--budget", "3"], None);
    assert_eq!(starved.code, 2);
    assert_eq!(starved.stdout, "EXHAUSTED budget=3\n");
}

#[test]
fn strategy_pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.qdimacs", FORMULA);

    let fb = qbfi(&["gen-fb", &f], None);
    assert_eq!(fb.code, 0, "{}", fb.stderr);
    assert!(fb.stdout.contains("b: 6"), "{}", fb.stdout);
    let fbf = write(dir.path(), "fb.qdimacs", &fb.stdout);

    let t = dir.path().join("fb.qrtf");
    let solved = qbfi(&["solve", &fbf, "--emit", t.to_str().unwrap()], None);
    assert_eq!(solved.code, 0, "{}", solved.stderr);

    let net = dir.path().join("strategy.net");
    let extracted = qbfi(
        &["extract-strategy", &fbf, t.to_str().unwrap(), "--monotone", "--out", net.to_str().unwrap()],
        None,
    );
    assert_eq!(extracted.code, 0, "{}", extracted.stderr);

    let verified = qbfi(&["verify-strategy", &fbf, net.to_str().unwrap()], None);
    assert_eq!(verified.code, 0, "{}", verified.stderr);
    assert!(verified.stdout.starts_with("VERIFIED strategy"), "{}", verified.stdout);

    // Without the marker the same command is a usage error.
    let unmarked = qbfi(&["verify-strategy", &f, net.to_str().unwrap()], None);
    assert_eq!(unmarked.code, 2);
    assert!(unmarked.stderr.contains("B_NOT_MARKED"), "{}", unmarked.stderr);
}

#[test]
fn output_is_deterministic_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.qdimacs", FORMULA);
    let p = write(dir.path(), "p.qrtf", PROOF);

    let a = qbfi(&["interpolate", &f, &p], None);
    let b = qbfi(&["interpolate", &f, &p], None);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);

    let c = qbfi(&["gen-clique", "--n", "4"], None);
    let d = qbfi(&["gen-clique", "--n", "4"], None);
    assert_eq!(c.code, 0);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn unusable_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();

    let odd = qbfi(&["gen-clique", "--n", "3"], None);
    assert_eq!(odd.code, 2);
    assert!(odd.stderr.contains("BAD_N"), "{}", odd.stderr);

    let garbled = qbfi(&["eval", "-"], Some("p cnf what\n"));
    assert_eq!(garbled.code, 2);
    assert!(garbled.stderr.contains("SYNTAX"), "{}", garbled.stderr);

    let missing = qbfi(&["check", dir.path().join("nope").to_str().unwrap(), "-"], None);
    assert_eq!(missing.code, 2);

    let unknown = qbfi(&["frobnicate"], None);
    assert_eq!(unknown.code, 2);

    let bad_calc = qbfi(&["check", "-", "-", "--calculus", "frege"], Some(FORMULA));
    assert_eq!(bad_calc.code, 2);
    assert!(bad_calc.stderr.contains("unknown calculus"), "{}", bad_calc.stderr);
}
