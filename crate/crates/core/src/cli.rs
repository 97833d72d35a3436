//! The `jck` command line. Every verb is a thin adapter over one library
//! operation; `run` never touches stdout so it can be tested directly.
//!
//! Exit codes: 0 success, 1 logical rejection, 2 input error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::acceptance::{demo_attack, run_all};
use crate::deduction::{
    parse_cs_table, parse_derivation_with, print_cs_table, print_derivation, ConstantSpecification,
    Derivation, Kernel,
};
use crate::modal::{
    forgetful, forgetful_soundness_probe, parse_modal, probe_formula, realizes, translate_derivation_x,
};
use crate::semantics::{parse_model, satisfies, valid_in_model, validate_model, ParsedModel};
use crate::synthesis::{LiftingContext, Synth};
use crate::syntax::{parse_formula, parse_formula_with, parse_term, Names, Sort, Term};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// What a run printed and how it ended.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    /// Diagnostics: usage errors, load warnings.
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "jck", version, about = "Checker and synthesiser for justification logic with common knowledge")]
struct Cli {
    /// Number of agents when the input does not declare `h:`.
    #[arg(long, global = true, default_value_t = 2)]
    h: usize,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Term,
    Formula,
    Modal,
    Derivation,
    Model,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Parse and print in canonical form.
    Parse {
        #[arg(long, value_enum, default_value_t = Kind::Formula)]
        kind: Kind,
        /// Text for terms and formulas, a file path for derivations and models.
        input: String,
    },
    /// Check a derivation file.
    Check {
        #[arg(long)]
        cs: Option<String>,
        file: PathBuf,
    },
    /// Lift a derivation to a `[t]` derivation of the given sort.
    Lift {
        #[arg(long)]
        cs: Option<String>,
        #[arg(long, default_value = "C")]
        sort: String,
        /// Treat `[s]@C B` hypotheses as plain too.
        #[arg(long)]
        all_plain: bool,
        file: PathBuf,
    },
    /// Internalize a hypothesis-free derivation as `[t] A`.
    Necessitate {
        #[arg(long)]
        cs: Option<String>,
        #[arg(long, default_value = "C")]
        sort: String,
        file: PathBuf,
    },
    /// From a proof of `A -> [s]@E A` derive `A -> [ind(t, s)]@C A`.
    Induct1 {
        #[arg(long)]
        cs: Option<String>,
        file: PathBuf,
    },
    /// From a proof of `B -> [s]@E (A & B)` derive `B -> [c * ind(t, s)]@C A`.
    Induct2 {
        #[arg(long)]
        cs: Option<String>,
        file: PathBuf,
    },
    /// Evaluate a formula in a model, at one world or at all of them.
    Eval {
        model: PathBuf,
        formula: String,
        /// World name or index; omitted means validity in the model.
        #[arg(long)]
        world: Option<String>,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Check the frame conditions and well-sortedness of a model file.
    Validate { model: PathBuf },
    /// Translate a derivation into the fragment without group evidence.
    TranslateX {
        #[arg(long)]
        cs: Option<String>,
        file: PathBuf,
    },
    /// Print the forgetful projection of a formula.
    TranslateO { formula: String },
    /// Does the first formula realize the modal one?
    RealizeCheck { formula: String, modal: String },
    /// Search random Kripke models for a countermodel.
    Probe {
        /// A derivation file whose conclusion is projected.
        #[arg(long, conflicts_with = "modal", required_unless_present = "modal")]
        file: Option<PathBuf>,
        /// A modal formula given directly.
        #[arg(long)]
        modal: Option<String>,
        #[arg(long)]
        cs: Option<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reproduce the coordinated-attack scenario.
    DemoAttack {
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Run the acceptance suite.
    Selftest {
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
    },
}

struct Input(String);

type Res = Result<(i32, String), Input>;

fn input(msg: impl std::fmt::Display) -> Input {
    Input(msg.to_string())
}

fn read(path: &Path) -> Result<String, Input> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn parse_sort(s: &str, h: usize) -> Result<Sort, Input> {
    let s = s.trim_start_matches('@');
    match s {
        "E" => Ok(Sort::E),
        "C" => Ok(Sort::C),
        _ => match s.parse::<u32>() {
            Ok(i) if i >= 1 && i as usize <= h => Ok(Sort::agent(i)),
            _ => Err(input(format!("bad sort `{s}`; expected 1..{h}, E or C"))),
        },
    }
}

/// A derivation file with its agent count and aliases.
struct Loaded {
    h: usize,
    derivation: Derivation,
    names: Names,
    text: String,
}

fn load_derivation(path: &Path, h: usize) -> Result<Loaded, Input> {
    let text = read(path)?;
    let p = parse_derivation_with(&text, h, &Names::new()).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        h: p.h.unwrap_or(h),
        derivation: p.derivation,
        names: p.names,
        text,
    })
}

/// `--cs totalC`, `--cs <path>`, or else the table embedded in the
/// derivation file, or else `TotalC`.
fn resolve_cs(flag: Option<&str>, d: &Loaded) -> Result<ConstantSpecification, Input> {
    let kernel = Kernel::new(d.h);
    match flag {
        Some(s) if s.eq_ignore_ascii_case("totalc") => Ok(ConstantSpecification::TotalC),
        Some(path) => {
            let text = read(Path::new(path))?;
            parse_cs_table(&text, &kernel, &d.names).map_err(|e| input(format!("{path}: {e}")))
        }
        None if d.text.contains(":=") => {
            parse_cs_table(&d.text, &kernel, &d.names).map_err(input)
        }
        None => Ok(ConstantSpecification::TotalC),
    }
}

/// Checks the input first, so a bad proof is a rejection rather than a
/// synthesis failure.
fn checked_input(d: &Loaded, cs: &ConstantSpecification) -> Result<(), String> {
    let report = Kernel::new(d.h).check(&d.derivation, cs);
    match report.rejection() {
        Some(_) => Err(format!("input {report}\n")),
        None => Ok(()),
    }
}

/// The output derivation, followed by its table when it is not `TotalC`.
fn emit(out: &mut String, h: usize, term: Option<&Term>, d: &Derivation, cs: &ConstantSpecification) {
    if let Some(t) = term {
        writeln!(out, "// term: {t}").unwrap();
    }
    out.push_str(&print_derivation(d, Some(h)));
    if !matches!(cs, ConstantSpecification::TotalC) {
        out.push_str(&print_cs_table(cs));
    }
}

fn synth_for(cs: &ConstantSpecification, h: usize) -> Result<Synth, Input> {
    Synth::from_cs(h, cs).map_err(|e| input(format!("--cs: {e}")))
}

fn load_model(path: &Path, warnings: &mut String) -> Result<ParsedModel, Input> {
    let text = read(path)?;
    let p = parse_model(&text, path.parent()).map_err(|e| input(format!("{}: {e}", path.display())))?;
    for w in &p.warnings {
        writeln!(warnings, "warning: {w}").unwrap();
    }
    Ok(p)
}

fn synthesis_verb(
    h: usize,
    file: &Path,
    cs: Option<&str>,
    op: impl FnOnce(&mut Synth, &Loaded) -> Result<(Option<Term>, Derivation), crate::synthesis::SynthError>,
) -> Res {
    let d = load_derivation(file, h)?;
    let cs = resolve_cs(cs, &d)?;
    if let Err(msg) = checked_input(&d, &cs) {
        return Ok((EXIT_REJECTED, msg));
    }
    let mut sy = synth_for(&cs, d.h)?;
    match op(&mut sy, &d) {
        Ok((t, out)) => {
            let mut s = String::new();
            emit(&mut s, d.h, t.as_ref(), &out, &sy.cs());
            Ok((EXIT_OK, s))
        }
        Err(e) => Ok((EXIT_REJECTED, format!("{e}\n"))),
    }
}

fn dispatch(cli: Cli, diag: &mut String) -> Res {
    let h = cli.h;
    match cli.verb {
        Verb::Parse { kind, input: text } => {
            let out = match kind {
                Kind::Term => parse_term(&text, h).map_err(input)?.to_string(),
                Kind::Formula => parse_formula(&text, h).map_err(input)?.to_string(),
                Kind::Modal => parse_modal(&text, h).map_err(input)?.to_string(),
                Kind::Derivation => {
                    let d = load_derivation(Path::new(&text), h)?;
                    return Ok((EXIT_OK, print_derivation(&d.derivation, Some(d.h))));
                }
                Kind::Model => {
                    let m = load_model(Path::new(&text), diag)?;
                    return Ok((EXIT_OK, crate::semantics::print_model(&m.model)));
                }
            };
            Ok((EXIT_OK, out + "\n"))
        }
        Verb::Check { cs, file } => {
            let d = load_derivation(&file, h)?;
            let cs = resolve_cs(cs.as_deref(), &d)?;
            let report = Kernel::new(d.h).check(&d.derivation, &cs);
            let code = if report.is_accepted() { EXIT_OK } else { EXIT_REJECTED };
            Ok((code, format!("{report}\n")))
        }
        Verb::Lift { cs, sort, all_plain, file } => synthesis_verb(h, &file, cs.as_deref(), |sy, d| {
            let target = parse_sort(&sort, d.h).map_err(|e| crate::synthesis::SynthError::InvalidInput(e.0))?;
            let ctx = if all_plain {
                LiftingContext::all_plain(&d.derivation)
            } else {
                LiftingContext::infer(&d.derivation)
            };
            let l = sy.lift(&d.derivation, target, &ctx)?;
            Ok((Some(l.term), l.derivation))
        }),
        Verb::Necessitate { cs, sort, file } => synthesis_verb(h, &file, cs.as_deref(), |sy, d| {
            let target = parse_sort(&sort, d.h).map_err(|e| crate::synthesis::SynthError::InvalidInput(e.0))?;
            let (t, out) = sy.necessitate(&d.derivation, target)?;
            Ok((Some(t), out))
        }),
        Verb::Induct1 { cs, file } => synthesis_verb(h, &file, cs.as_deref(), |sy, d| {
            let (t, out) = sy.internalize_induction_1(&d.derivation)?;
            Ok((Some(t), out))
        }),
        Verb::Induct2 { cs, file } => synthesis_verb(h, &file, cs.as_deref(), |sy, d| {
            let (t, _, out) = sy.internalize_induction_2(&d.derivation)?;
            Ok((Some(t), out))
        }),
        Verb::Eval { model, formula, world, depth } => {
            let p = load_model(&model, diag)?;
            let m = &p.model;
            let a = parse_formula_with(&formula, m.h(), &p.names).map_err(input)?;
            let value = match world {
                Some(w) => {
                    let idx = m
                        .frame
                        .world(&w)
                        .or_else(|| w.parse::<usize>().ok().filter(|&k| k < m.frame.len()))
                        .ok_or_else(|| input(format!("unknown world `{w}`")))?;
                    satisfies(m, idx, &a, depth).map_err(input)?
                }
                None => valid_in_model(m, &a, depth).map_err(input)?,
            };
            Ok((EXIT_OK, format!("{value}\n")))
        }
        Verb::Validate { model } => {
            let p = load_model(&model, diag)?;
            let report = validate_model(&p.model);
            let code = if report.is_valid() { EXIT_OK } else { EXIT_REJECTED };
            Ok((code, format!("{report}\n")))
        }
        Verb::TranslateX { cs, file } => {
            let d = load_derivation(&file, h)?;
            let cs = resolve_cs(cs.as_deref(), &d)?;
            match translate_derivation_x(&d.derivation, &cs, d.h) {
                Ok(x) => {
                    let mut s = print_derivation(&x.derivation, Some(d.h));
                    s.push_str(&print_cs_table(&x.cs_x));
                    for e in &x.flagged {
                        writeln!(s, "// flagged: c{}@{} := {} is not a single-agent axiom", e.constant, e.sort, e.formula)
                            .unwrap();
                    }
                    Ok((EXIT_OK, s))
                }
                Err(e) => Ok((EXIT_REJECTED, format!("{e}\n"))),
            }
        }
        Verb::TranslateO { formula } => {
            let a = parse_formula(&formula, h).map_err(input)?;
            Ok((EXIT_OK, format!("{}\n", forgetful(&a))))
        }
        Verb::RealizeCheck { formula, modal } => {
            let r = parse_formula(&formula, h).map_err(input)?;
            let a = parse_modal(&modal, h).map_err(input)?;
            Ok((EXIT_OK, format!("{}\n", realizes(&r, &a))))
        }
        Verb::Probe { file, modal, cs, trials, seed } => {
            let report = match (file, modal) {
                (Some(file), _) => {
                    let d = load_derivation(&file, h)?;
                    let cs = resolve_cs(cs.as_deref(), &d)?;
                    if let Err(msg) = checked_input(&d, &cs) {
                        return Ok((EXIT_REJECTED, msg));
                    }
                    if !d.derivation.hypotheses.is_empty() {
                        return Err(input("probe needs a hypothesis-free derivation"));
                    }
                    forgetful_soundness_probe(&d.derivation, d.h, trials, seed)
                }
                (None, Some(text)) => probe_formula(&parse_modal(&text, h).map_err(input)?, h, trials, seed),
                (None, None) => return Err(input("give --file or --modal")),
            };
            let code = if report.counterexample.is_some() { EXIT_REJECTED } else { EXIT_OK };
            Ok((code, format!("{report}\n")))
        }
        Verb::DemoAttack { depth } => {
            let r = demo_attack(depth);
            let code = if r.passed() { EXIT_OK } else { EXIT_REJECTED };
            Ok((code, format!("{r}\n")))
        }
        Verb::Selftest { seed } => {
            let r = run_all(seed);
            let code = if r.passed() { EXIT_OK } else { EXIT_REJECTED };
            Ok((code, format!("{r}\n")))
        }
    }
}

/// Runs one command line; `argv[0]` is the program name.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    if cli.h == 0 {
        return Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: "error: --h must be at least 1\n".into() };
    }
    let mut diag = String::new();
    match dispatch(cli, &mut diag) {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: diag },
        Err(Input(msg)) => {
            writeln!(diag, "error: {msg}").unwrap();
            Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: diag }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jck(args: &[&str]) -> Outcome {
        run(std::iter::once("jck").chain(args.iter().copied()))
    }

    #[test]
    fn parse_canonicalizes() {
        let o = jck(&["parse", "[x1@C]@C (P1->P2)"]);
        assert_eq!(o.code, EXIT_OK);
        assert_eq!(o.stdout, "[x1@C]@C (P1 -> P2)\n");
        assert_eq!(jck(&["parse", "--kind", "modal", "#1 P1 -> #C P1"]).stdout, "#1 P1 -> #C P1\n");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(jck(&["frobnicate"]).code, EXIT_INPUT);
        let o = jck(&["parse", "[x1@C P1"]);
        assert_eq!(o.code, EXIT_INPUT);
        assert!(o.stderr.starts_with("error:"));
        assert_eq!(jck(&["check", "/nonexistent/file.drv"]).code, EXIT_INPUT);
    }

    #[test]
    fn translate_o_and_realize() {
        assert_eq!(jck(&["translate-o", "[c2@1]@1 [c1@2]@2 P1"]).stdout, "#1 #2 P1\n");
        assert_eq!(jck(&["realize-check", "[x1@C]@C P1", "#C P1"]).stdout, "true\n");
        assert_eq!(jck(&["realize-check", "[x1@1]@1 P1", "#C P1"]).stdout, "false\n");
    }

    #[test]
    fn probe_exit_codes() {
        assert_eq!(jck(&["probe", "--modal", "#1 P1 -> #C P1"]).code, EXIT_REJECTED);
        assert_eq!(jck(&["probe", "--modal", "#C P1 -> P1"]).code, EXIT_OK);
    }

    #[test]
    fn demo_attack_passes() {
        let o = jck(&["demo-attack", "--depth", "2"]);
        assert_eq!(o.code, EXIT_OK, "{}", o.stdout);
        assert!(o.stdout.contains("bounded check"));
    }
}
