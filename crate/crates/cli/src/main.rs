//! qbfi: check QBF resolution refutations, extract interpolation and
//! strategy circuits from them, replay proofs under shared assignments, and
//! generate the clique/no-clique benchmark family.
//!
//! Exit codes: 0 for a positive verdict, 1 for a negative one (invalid
//! proof, failed verification, no refutation), 2 for unusable input,
//! exhausted resources, or usage errors.

use clap::{Parser, Subcommand};
use qbfi_core::{
    check_refutation, eval_qbf, extract_b_strategy, extract_circuit, find_qres_refutation,
    gen_clique_noclique, gen_fb, one_sided, parse_netlist, parse_qdimacs, parse_trace,
    restrict_proof, to_dot, write_netlist, write_qdimacs, write_trace, Assignment, Calculus,
    Circuit, ExtractError, Mode, NodeOutcome, ProofTrace, Qbf, RestrictError, RestrictionSide,
    DEFAULT_EVAL_CAP, DEFAULT_P_CAP,
};
use rayon::prelude::*;
use std::error::Error;
use std::fs;
use std::io::Read;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "qbfi", version, about = "QBF resolution proofs: check, interpolate, restrict")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a refutation trace against a formula
    Check {
        /// Formula in QDIMACS ("-" for stdin)
        formula: String,
        /// Trace in QRTF ("-" for stdin)
        proof: String,
        /// Check against this calculus instead of the trace header
        #[arg(long)]
        calculus: Option<String>,
    },
    /// Extract the interpolation circuit of a checked refutation
    Interpolate {
        formula: String,
        proof: String,
        /// Build the monotone variant (shared inputs must be positive in
        /// the first half)
        #[arg(long)]
        monotone: bool,
        /// Write the netlist here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a Graphviz rendering
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Extract the strategy circuit for the marker universal
    ExtractStrategy {
        formula: String,
        proof: String,
        #[arg(long)]
        monotone: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Replay a proof under a shared assignment, one-sided
    Restrict {
        formula: String,
        proof: String,
        /// Netlist of the circuit extracted from this very proof
        circuit: String,
        /// Assignment to the shared block: a 0/1 bitstring, or a file
        /// holding one
        #[arg(long)]
        assign: String,
        /// Write the replayed trace here
        #[arg(long)]
        emit_trace: Option<PathBuf>,
        /// Write the one-sided restricted formula here
        #[arg(long)]
        emit_formula: Option<PathBuf>,
    },
    /// Exhaustively verify a circuit as an interpolant
    VerifyInterpolant {
        formula: String,
        circuit: String,
        /// Maximum shared-block width to enumerate (env QBFI_CAP)
        #[arg(long)]
        cap: Option<usize>,
        /// Worker threads for the enumeration
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Exhaustively verify a circuit as a winning strategy for the marker
    VerifyStrategy {
        formula: String,
        circuit: String,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print a clique/no-clique family instance
    GenClique {
        /// Number of vertices (even); the clique size is n/2
        #[arg(long)]
        n: u32,
        /// Apply the strategy-form marker transform first
        #[arg(long)]
        fb: bool,
    },
    /// Add the strategy-form marker to a partitioned formula
    GenFb { formula: String },
    /// Search for a refutation with the built-in prover
    Solve {
        formula: String,
        /// Derived-clause budget
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        /// Write the found trace here
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Evaluate a formula under the empty assignment
    Eval {
        formula: String,
        /// Maximum unassigned prefix width (env QBFI_CAP)
        #[arg(long)]
        cap: Option<usize>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn read_input(arg: &str) -> Result<String, Box<dyn Error>> {
    if arg == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?)
    }
}

fn load_formula(arg: &str) -> Result<Qbf, Box<dyn Error>> {
    Ok(parse_qdimacs(&read_input(arg)?)?)
}

fn load_proof(arg: &str, qbf: &Qbf) -> Result<ProofTrace, Box<dyn Error>> {
    Ok(parse_trace(&read_input(arg)?, qbf)?)
}

fn load_circuit(arg: &str) -> Result<Circuit, Box<dyn Error>> {
    Ok(parse_netlist(&read_input(arg)?)?)
}

fn env_cap(flag: Option<usize>, default: usize) -> usize {
    flag.or_else(|| std::env::var("QBFI_CAP").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(default)
}

fn emit_circuit(
    circuit: &Circuit,
    out: Option<PathBuf>,
    dot: Option<PathBuf>,
) -> Result<(), Box<dyn Error>> {
    let text = write_netlist(circuit);
    match out {
        Some(path) => {
            fs::write(&path, text)?;
            println!("WROTE {} gates={}", path.display(), circuit.gates.len());
        }
        None => print!("{text}"),
    }
    if let Some(path) = dot {
        fs::write(&path, to_dot(circuit))?;
    }
    Ok(())
}

/// Extraction outcomes that are proof verdicts, not input errors.
fn extraction_verdict(e: &ExtractError) -> bool {
    matches!(e, ExtractError::NotVerified(_) | ExtractError::PNotPositive(_))
}

fn run(cli: Cli) -> Result<i32, Box<dyn Error>> {
    match cli.cmd {
        Cmd::Check { formula, proof, calculus } => {
            let mode = match calculus {
                Some(name) => Some(
                    Calculus::from_name(&name)
                        .ok_or_else(|| format!("unknown calculus {name}"))?,
                ),
                None => None,
            };
            let qbf = load_formula(&formula)?;
            let trace = load_proof(&proof, &qbf)?;
            let report = check_refutation(&trace, &qbf, mode);
            if report.valid {
                let stats: Vec<String> =
                    report.stats.iter().map(|(r, n)| format!("{r}={n}")).collect();
                println!(
                    "VALID {} steps={} {}",
                    mode.unwrap_or(trace.calculus).name(),
                    trace.steps.len(),
                    stats.join(" ")
                );
                Ok(0)
            } else {
                println!("INVALID {}", report.first_failure.expect("invalid report has a failure"));
                Ok(1)
            }
        }

        Cmd::Interpolate { formula, proof, monotone, out, dot } => {
            let qbf = load_formula(&formula)?;
            let trace = load_proof(&proof, &qbf)?;
            let mode = if monotone { Mode::Monotone } else { Mode::General };
            match extract_circuit(&trace, &qbf, mode) {
                Ok(circuit) => {
                    emit_circuit(&circuit, out, dot)?;
                    Ok(0)
                }
                Err(e) if extraction_verdict(&e) => {
                    println!("{e}");
                    Ok(1)
                }
                Err(e) => Err(e.into()),
            }
        }

        Cmd::ExtractStrategy { formula, proof, monotone, out, dot } => {
            let qbf = load_formula(&formula)?;
            let trace = load_proof(&proof, &qbf)?;
            let mode = if monotone { Mode::Monotone } else { Mode::General };
            match extract_b_strategy(&trace, &qbf, mode) {
                Ok(circuit) => {
                    emit_circuit(&circuit, out, dot)?;
                    Ok(0)
                }
                Err(e) if extraction_verdict(&e) => {
                    println!("{e}");
                    Ok(1)
                }
                Err(e) => Err(e.into()),
            }
        }

        Cmd::Restrict { formula, proof, circuit, assign, emit_trace, emit_formula } => {
            let qbf = load_formula(&formula)?;
            let trace = load_proof(&proof, &qbf)?;
            let circuit = load_circuit(&circuit)?;
            let bits = if !assign.is_empty() && assign.chars().all(|c| c == '0' || c == '1') {
                assign
            } else {
                fs::read_to_string(&assign)
                    .map_err(|e| format!("{assign}: {e}"))?
                    .trim()
                    .to_string()
            };
            let a = Assignment::from_bits(&bits, &qbf.p_vars())?;
            let restricted = match restrict_proof(&trace, &qbf, &circuit, &a) {
                Ok(r) => r,
                Err(e @ RestrictError::NotVerified(_)) => {
                    println!("{e}");
                    return Ok(1);
                }
                Err(e) => return Err(e.into()),
            };
            let kept = restricted
                .nodes
                .iter()
                .filter(|(_, o)| matches!(o, NodeOutcome::Kept(_)))
                .count();
            println!(
                "SIDE {} kept={} pruned={} steps={}",
                restricted.side,
                kept,
                restricted.nodes.len() - kept,
                restricted.trace.steps.len()
            );
            if let Some(path) = emit_trace {
                fs::write(&path, write_trace(&restricted.trace))?;
            }
            if let Some(path) = emit_formula {
                fs::write(&path, write_qdimacs(&restricted.formula))?;
            }
            Ok(0)
        }

        Cmd::VerifyInterpolant { formula, circuit, cap, jobs } => {
            let qbf = load_formula(&formula)?;
            let circuit = load_circuit(&circuit)?;
            verify_exhaustively(&qbf, &circuit, env_cap(cap, DEFAULT_P_CAP), false, jobs)
        }

        Cmd::VerifyStrategy { formula, circuit, cap, jobs } => {
            let qbf = load_formula(&formula)?;
            let circuit = load_circuit(&circuit)?;
            verify_exhaustively(&qbf, &circuit, env_cap(cap, DEFAULT_P_CAP), true, jobs)
        }

        Cmd::GenClique { n, fb } => {
            let g = gen_clique_noclique(n)?;
            let qbf = if fb { gen_fb(&g.qbf)? } else { g.qbf };
            print!("{}", write_qdimacs(&qbf));
            Ok(0)
        }

        Cmd::GenFb { formula } => {
            let qbf = load_formula(&formula)?;
            print!("{}", write_qdimacs(&gen_fb(&qbf)?));
            Ok(0)
        }

        Cmd::Solve { formula, budget, emit } => {
            let qbf = load_formula(&formula)?;
            match find_qres_refutation(&qbf, budget) {
                qbfi_core::SolveOutcome::Refuted(trace) => {
                    println!("REFUTED steps={}", trace.steps.len());
                    if let Some(path) = emit {
                        fs::write(&path, write_trace(&trace))?;
                    }
                    Ok(0)
                }
                qbfi_core::SolveOutcome::NotRefutable => {
                    println!("NOT_REFUTABLE");
                    Ok(1)
                }
                qbfi_core::SolveOutcome::Exhausted => {
                    println!("EXHAUSTED budget={budget}");
                    Ok(2)
                }
            }
        }

        Cmd::Eval { formula, cap } => {
            let qbf = load_formula(&formula)?;
            let cap = env_cap(cap, DEFAULT_EVAL_CAP);
            let value = eval_qbf(&qbf, &Assignment::new(), cap)?;
            println!("{}", if value { "TRUE" } else { "FALSE" });
            Ok(0)
        }
    }
}

/// Why one shared assignment failed during exhaustive verification.
enum BadMask {
    /// The half the circuit points at is satisfiable: a real counterexample.
    NotFalsified(RestrictionSide),
    /// The tooling could not decide this assignment at all.
    Undecidable(String),
}

/// Enumerate every shared assignment in parallel and report the smallest
/// failing one, so reruns print identical output regardless of scheduling.
fn verify_exhaustively(
    qbf: &Qbf,
    circuit: &Circuit,
    cap: usize,
    strategy: bool,
    jobs: Option<usize>,
) -> Result<i32, Box<dyn Error>> {
    if qbf.partition.is_none() {
        return Err("NO_PARTITION: formula has no partition".into());
    }
    let marker = qbf.partition.as_ref().and_then(|p| p.b);
    if strategy && marker.is_none() {
        return Err("B_NOT_MARKED: formula has no marker universal b".into());
    }
    let p_vars = qbf.p_vars();
    if p_vars.len() > cap.min(63) {
        return Err(
            format!("TOO_MANY_P_VARS: {} shared variables exceed cap {cap}", p_vars.len()).into(),
        );
    }

    let check_one = |mask: u64| -> Option<(u64, BadMask)> {
        let mut a = Assignment::new();
        for (i, &v) in p_vars.iter().enumerate() {
            a.set(v, (mask >> i) & 1 == 1);
        }
        let value = match circuit.eval(&a) {
            Ok(v) => v,
            Err(e) => return Some((mask, BadMask::Undecidable(format!("{e:?}")))),
        };
        let side = if value { RestrictionSide::R } else { RestrictionSide::Q };
        let satisfiable = if strategy {
            let mut extended = a.clone();
            extended.set(marker.expect("checked above"), value);
            eval_qbf(qbf, &extended, DEFAULT_EVAL_CAP)
        } else {
            match one_sided(qbf, side, &a) {
                Ok(half) => eval_qbf(&half, &Assignment::new(), DEFAULT_EVAL_CAP),
                Err(e) => return Some((mask, BadMask::Undecidable(e.to_string()))),
            }
        };
        match satisfiable {
            Ok(true) => Some((mask, BadMask::NotFalsified(side))),
            Ok(false) => None,
            Err(e) => Some((mask, BadMask::Undecidable(e.to_string()))),
        }
    };

    let sweep = || {
        (0..1u64 << p_vars.len())
            .into_par_iter()
            .filter_map(check_one)
            .min_by_key(|&(mask, _)| mask)
    };
    let worst = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new().num_threads(j).build()?.install(sweep),
        None => sweep(),
    };

    match worst {
        None => {
            println!(
                "VERIFIED {} shared_vars={} assignments={}",
                if strategy { "strategy" } else { "interpolant" },
                p_vars.len(),
                1u64 << p_vars.len()
            );
            Ok(0)
        }
        Some((mask, BadMask::NotFalsified(side))) => {
            let mut a = Assignment::new();
            for (i, &v) in p_vars.iter().enumerate() {
                a.set(v, (mask >> i) & 1 == 1);
            }
            println!("NOT_FALSIFIED side={} p={}", side, a.to_bits(&p_vars));
            Ok(1)
        }
        Some((mask, BadMask::Undecidable(why))) => {
            Err(format!("at shared assignment {mask}: {why}").into())
        }
    }
}
