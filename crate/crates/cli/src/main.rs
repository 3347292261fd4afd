use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use zonelogic::arch::{coherence_check, monoidal_law_check, parse_elems, print_elems, Bindings, Cartesian, Evaluator, MutatedDiagonal};
use zonelogic::calculus::{check, rule_listing, Derivation};
use zonelogic::cut_elim::{eliminate, CutElimError, CutMode, Elimination};
use zonelogic::diagram::{compile, export_dot, identity_rho, wire_blocks, DiagTerm};
use zonelogic::files::{parse_bindings, parse_discipline, parse_program, print_derivation, Program};
use zonelogic::search::{default_cap, search, SearchBudget, SearchResult};
use zonelogic::signature::{extract_signature, validate_discipline, DisciplineSpec, StructuralFamily, SubexpSignature, Zone, ZonePreorder};
use zonelogic::syntax::parse_sequent_in;

#[derive(Parser)]
#[command(name = "zonelogic", version, about = "Zone disciplines, the tensorial zone calculus and its diagram semantics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check upward closure and zone references of a discipline
    ValidateDiscipline { discipline: PathBuf },
    /// Print the extracted subexponential signature
    Extract { discipline: PathBuf },
    /// List the inference rules of the extracted calculus
    Rules { discipline: PathBuf },
    /// Check a derivation file
    Check { discipline: PathBuf, derivation: PathBuf },
    /// Eliminate cuts from a derivation
    Elim {
        discipline: PathBuf,
        derivation: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Guarded)]
        mode: Mode,
        /// Reduction steps allowed; defaults to 10 n^2 for n nodes
        #[arg(long)]
        fuel: Option<usize>,
        /// Write the result here instead of stdout
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Search for a cut-free derivation of a sequent
    Search {
        discipline: PathBuf,
        sequent: String,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Maximum multiplicity contraction may create; defaults to the goal size
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Compile a derivation or block wiring to a diagram term
    Compile {
        discipline: PathBuf,
        program: PathBuf,
        bindings: Option<PathBuf>,
    },
    /// Evaluate a compiled diagram on one input
    Eval {
        discipline: PathBuf,
        program: PathBuf,
        bindings: PathBuf,
        /// Input elements, e.g. "[1, (0, 1), ()]"
        #[arg(long)]
        input: String,
    },
    /// Export a compiled diagram as DOT
    Dot {
        discipline: PathBuf,
        program: PathBuf,
        bindings: Option<PathBuf>,
    },
    /// Run the coherence and monoidal law suites
    Selftest {
        #[arg(long, default_value_t = 3)]
        max_size: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Paper,
    Guarded,
}

enum Fail {
    Usage(String),
    Internal(String),
}

type Outcome = Result<u8, Fail>;

fn usage(e: impl std::fmt::Display) -> Fail {
    Fail::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<DisciplineSpec, Fail> {
    parse_discipline(&read(path)?).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn load_sig(path: &Path) -> Result<(DisciplineSpec, SubexpSignature), Fail> {
    let spec = load_spec(path)?;
    let sig = extract_signature(&spec).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
    Ok((spec, sig))
}

fn load_program(path: &Path, sig: &SubexpSignature) -> Result<Program, Fail> {
    parse_program(&read(path)?, Some(sig)).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn load_bindings(path: &Path) -> Result<Bindings, Fail> {
    parse_bindings(&read(path)?).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn derivation_atoms(d: &Derivation) -> BTreeSet<String> {
    let mut atoms = Vec::new();
    d.walk(&mut |_, node| {
        for f in node.conclusion.formulas() {
            f.atoms(&mut atoms);
        }
    });
    atoms.into_iter().collect()
}

/// The diagram term of a program; `None` with a printed verdict when the
/// derivation is not valid.
fn term_of(spec: &DisciplineSpec, sig: &SubexpSignature, program: &Program) -> Result<Option<DiagTerm>, Fail> {
    match program {
        Program::Derivation(d) => {
            let verdict = check(sig, d);
            if !verdict.is_valid() {
                println!("{verdict}");
                return Ok(None);
            }
            let atoms = derivation_atoms(d);
            let rho = identity_rho(atoms.iter().map(String::as_str));
            compile(spec, &rho, d).map(Some).map_err(usage)
        }
        Program::Wiring(names) => {
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            wire_blocks(spec, &names).map(Some).map_err(usage)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::ValidateDiscipline { discipline } => {
            let report = validate_discipline(&load_spec(&discipline)?);
            println!("{report}");
            Ok(if report.is_ok() { 0 } else { 1 })
        }
        Command::Extract { discipline } => {
            let spec = load_spec(&discipline)?;
            match extract_signature(&spec) {
                Ok(sig) => {
                    println!("{sig}");
                    Ok(0)
                }
                Err(e) => {
                    println!("{e}");
                    Ok(1)
                }
            }
        }
        Command::Rules { discipline } => {
            let (_, sig) = load_sig(&discipline)?;
            print!("{}", rule_listing(&sig));
            Ok(0)
        }
        Command::Check { discipline, derivation } => {
            let (_, sig) = load_sig(&discipline)?;
            let Program::Derivation(d) = load_program(&derivation, &sig)? else {
                return Err(Fail::Usage("check expects a derivation file".into()));
            };
            let verdict = check(&sig, &d);
            println!("{verdict}");
            Ok(if verdict.is_valid() { 0 } else { 1 })
        }
        Command::Elim {
            discipline,
            derivation,
            mode,
            fuel,
            out,
        } => {
            let (_, sig) = load_sig(&discipline)?;
            let Program::Derivation(d) = load_program(&derivation, &sig)? else {
                return Err(Fail::Usage("elim expects a derivation file".into()));
            };
            let mode = match mode {
                Mode::Paper => CutMode::PaperCut,
                Mode::Guarded => CutMode::GuardedCut,
            };
            if fuel == Some(0) {
                return Err(Fail::Usage("fuel must be positive".into()));
            }
            let (status, tree, code) = match eliminate(&sig, &d, mode, fuel) {
                Err(e @ CutElimError::NotValid(_)) | Err(e @ CutElimError::GuardViolated { .. }) => {
                    println!("{e}");
                    return Ok(1);
                }
                Ok(Elimination::CutFree { derivation, steps }) => {
                    if derivation.conclusion.canonical() != d.conclusion.canonical() || !check(&sig, &derivation).is_valid() {
                        return Err(Fail::Internal("elimination changed the end-sequent or broke validity".into()));
                    }
                    (format!("CutFree after {steps} step(s)"), derivation, 0)
                }
                Ok(Elimination::Stuck { path, reason, witness, steps }) => (
                    format!("Stuck at {} after {steps} step(s): {reason}", zonelogic::calculus::fmt_path(&path)),
                    witness,
                    1,
                ),
                Ok(Elimination::FuelExhausted { partial, steps }) => (format!("FuelExhausted after {steps} step(s)"), partial, 1),
            };
            eprintln!("{status}");
            let text = print_derivation(&tree);
            match out {
                Some(path) => fs::write(&path, text).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
            Ok(code)
        }
        Command::Search {
            discipline,
            sequent,
            depth,
            cap,
        } => {
            let (_, sig) = load_sig(&discipline)?;
            let goal = parse_sequent_in(&sequent, &sig).map_err(usage)?;
            if depth == 0 || cap == Some(0) {
                return Err(Fail::Usage("depth and cap must be positive".into()));
            }
            let cap = cap.unwrap_or_else(|| default_cap(&goal));
            let result = search(&sig, &goal, SearchBudget::new(depth, cap));
            println!("{result}");
            match &result {
                SearchResult::Found(d) => {
                    if !check(&sig, d).is_valid() {
                        return Err(Fail::Internal("search returned an invalid derivation".into()));
                    }
                    print!("{}", print_derivation(d));
                }
                SearchResult::Exhausted => println!("no cut-free derivation with contraction multiplicity at most {cap}"),
                SearchResult::NotDerivableWithinBudget => eprintln!("none found; the depth bound {depth} cut off the search"),
            }
            Ok(result.exit_code() as u8)
        }
        Command::Compile {
            discipline,
            program,
            bindings,
        } => {
            let (spec, sig) = load_sig(&discipline)?;
            let Some(t) = term_of(&spec, &sig, &load_program(&program, &sig)?)? else {
                return Ok(1);
            };
            if let Some(b) = bindings {
                Evaluator::new(&spec, &load_bindings(&b)?, &t).map_err(usage)?;
            }
            println!("{}", t.to_sexpr());
            Ok(0)
        }
        Command::Eval {
            discipline,
            program,
            bindings,
            input,
        } => {
            let (spec, sig) = load_sig(&discipline)?;
            let Some(t) = term_of(&spec, &sig, &load_program(&program, &sig)?)? else {
                return Ok(1);
            };
            let ev = Evaluator::new(&spec, &load_bindings(&bindings)?, &t).map_err(usage)?;
            let input = parse_elems(&input).map_err(usage)?;
            let out = ev.run_elems(&input).map_err(usage)?;
            println!("{}", print_elems(&out));
            Ok(0)
        }
        Command::Dot {
            discipline,
            program,
            bindings,
        } => {
            let (spec, sig) = load_sig(&discipline)?;
            let Some(t) = term_of(&spec, &sig, &load_program(&program, &sig)?)? else {
                return Ok(1);
            };
            if let Some(b) = bindings {
                Evaluator::new(&spec, &load_bindings(&b)?, &t).map_err(usage)?;
            }
            print!("{}", export_dot(&t).map_err(|e| Fail::Internal(e.to_string()))?);
            Ok(0)
        }
        Command::Selftest { max_size } => selftest(max_size),
    }
}

fn selftest(max_size: usize) -> Outcome {
    let z = |s: &str| Zone::new(s).expect("zone id");
    let three = DisciplineSpec::new(
        ZonePreorder::discrete([z("p"), z("r"), z("l")]),
        StructuralFamily::new([z("p")], [z("p"), z("r")]),
    );
    let chain = DisciplineSpec::new(
        ZonePreorder::close([z("a"), z("b"), z("c")], &[(z("a"), z("b")), (z("b"), z("c"))]).expect("zones declared"),
        StructuralFamily::new([z("b"), z("c")], [z("a"), z("b"), z("c")]),
    );
    let mut ok = true;
    for (name, spec) in [("three-zone", &three), ("chain", &chain)] {
        let report = coherence_check(spec, &Cartesian, max_size, 32, 1);
        println!("coherence, cartesian, {name} discipline:");
        print!("{report}");
        ok &= report.all_pass();
    }
    let mutated = coherence_check(&three, &MutatedDiagonal { fixed: 0 }, max_size, 32, 1);
    let caught = mutated.get("diagonal naturality").is_some_and(|r| !r.passed());
    println!(
        "coherence, mutated diagonal: {}",
        if caught { "rejected as expected" } else { "NOT rejected" }
    );
    for r in mutated.failures() {
        println!("  {}: {}", r.name, r.counterexample.as_deref().unwrap_or(""));
    }
    ok &= caught;
    let laws = monoidal_law_check(max_size, 2, 200, 7);
    println!("monoidal laws:");
    print!("{laws}");
    ok &= laws.all_pass();
    if ok {
        Ok(0)
    } else {
        Err(Fail::Internal("selftest failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| run(cli)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(Fail::Internal(msg))
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
    }
}
