use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rqpap::e91::{e91_source, verify_e91, E91Options};
use rqpap::sweep::{self, SweepKind};
use rqpap::Error;
use rqpap_core::bisim::{check, config_equivalent, Equivalence};
use rqpap_core::parser::{parse_file, render, RqpFile};
use rqpap_core::rewrite::{normalize, weight_audit, DEFAULT_FUEL};
use rqpap_core::sos::{build_forward_lts, build_lts, Configuration, Lts, Sos, StepLimits};
use rqpap_core::term::Term;

#[derive(Parser)]
#[command(name = "rqpap", version, about = "Reversible quantum process algebra workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fr,
    Branching,
    Rooted,
}

impl From<Mode> for Equivalence {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Fr => Equivalence::Fr,
            Mode::Branching => Equivalence::Branching,
            Mode::Rooted => Equivalence::Rooted,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a file and print its terms back.
    Parse { file: PathBuf },
    /// Explore a term's transition system.
    Lts {
        file: PathBuf,
        #[arg(long)]
        term: String,
        /// Write the `F`/`R`/`T` export here instead of standard output.
        #[arg(long)]
        export: Option<PathBuf>,
        #[arg(long, default_value_t = StepLimits::default().max_states)]
        max_states: usize,
        #[arg(long, default_value_t = StepLimits::default().max_depth)]
        max_depth: usize,
        /// Forward steps only, histories forgotten after each step.
        #[arg(long)]
        forward_only: bool,
    },
    /// Compare two terms.
    Bisim {
        file: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, value_enum, default_value = "fr")]
        mode: Mode,
        #[arg(long)]
        witness: bool,
        #[arg(long)]
        forward_only: bool,
        #[arg(long, default_value_t = StepLimits::default().max_states)]
        max_states: usize,
    },
    /// Rewrite a term to normal form.
    Normalize {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        trace: bool,
        /// Check the weight of every step.
        #[arg(long)]
        audit: bool,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Check the E91 protocol against its external specification.
    VerifyE91 {
        #[arg(long, default_value_t = 1)]
        pairs: usize,
        #[arg(long, default_value_t = 1)]
        tokens: usize,
        #[arg(long)]
        concrete: bool,
        #[arg(long)]
        swapped_measurements: bool,
        /// Print the generated `.rqp` model and exit.
        #[arg(long)]
        emit_source: bool,
    },
    /// Run a property sweep.
    Sweep {
        #[arg(value_parser = parse_kind)]
        kind: SweepKind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 50)]
        max_failures: usize,
    },
}

fn parse_kind(s: &str) -> Result<SweepKind, String> {
    s.parse()
}

fn load(path: &Path) -> Result<RqpFile, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    parse_file(&text).map_err(|error| Error::Parse { file: path.display().to_string(), error })
}

fn term<'f>(f: &'f RqpFile, n: &str) -> Result<&'f Term, Error> {
    f.term(n).ok_or_else(|| Error::Usage(format!("no term named `{n}`")))
}

fn explore(f: &RqpFile, t: &Term, limits: StepLimits, forward_only: bool) -> Result<Lts, Error> {
    let sos = Sos::new(&f.model);
    let c = Configuration::initial(t.clone(), &f.model.backend);
    Ok(if forward_only { build_forward_lts(&c, &sos, limits)? } else { build_lts(&c, &sos, limits)? })
}

fn limits(max_states: usize) -> StepLimits {
    StepLimits { max_states, ..StepLimits::default() }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Parse { file } => {
            let f = load(&file)?;
            for (name, spec) in &f.specs {
                println!("#RQ SPEC {name} {}", spec.equations.len());
            }
            for (name, t) in &f.terms {
                println!("#RQ TERM {name} {}", render(t));
            }
            Ok(0)
        }
        Command::Lts { file, term: n, export, max_states, max_depth, forward_only } => {
            let f = load(&file)?;
            let lts = explore(&f, term(&f, &n)?, StepLimits { max_states, max_depth }, forward_only)?;
            let text = lts.graph.export();
            match export {
                Some(p) => std::fs::write(&p, &text).map_err(|source| Error::Io { path: p, source })?,
                None => print!("{text}"),
            }
            println!("#RQ STATES {}", lts.state_count());
            if lts.graph.truncated {
                println!("#RQ TRUNCATED yes");
                return Ok(3);
            }
            Ok(0)
        }
        Command::Bisim { file, left, right, mode, witness, forward_only, max_states } => {
            let f = load(&file)?;
            let (l, r) = (term(&f, &left)?, term(&f, &right)?);
            let verdict = if f.model.is_concrete() && !forward_only {
                let sos = Sos::new(&f.model);
                let c = |t: &Term| Configuration::initial(t.clone(), &f.model.backend);
                let v = config_equivalent(&c(l), &c(r), &sos, mode.into(), limits(max_states))?;
                if v.alarm {
                    println!("#RQ ALARM direct and reduced routes disagree");
                }
                v.verdict
            } else {
                let gl = explore(&f, l, limits(max_states), forward_only)?;
                let gr = explore(&f, r, limits(max_states), forward_only)?;
                check(mode.into(), &gl.graph, &gr.graph)?
            };
            for line in verdict.export(witness).lines() {
                println!("#RQ {line}");
            }
            Ok(if verdict.related { 0 } else { 1 })
        }
        Command::Normalize { file, term: n, trace, audit, fuel } => {
            let f = load(&file)?;
            let (nf, tr) = normalize(term(&f, &n)?, &f.model, fuel)?;
            if trace {
                for s in &tr.steps {
                    println!("#RQ {s}");
                }
            }
            println!("#RQ NORMAL {}", render(&nf));
            if audit {
                let a = weight_audit(&tr);
                for line in a.violations() {
                    println!("#RQ AUDIT_VIOLATION {}", line.step);
                }
                for line in a.reported() {
                    println!("#RQ AUDIT_REPORTED {}", line.step);
                }
                println!("#RQ AUDIT {}", if a.passed() { "pass" } else { "fail" });
                return Ok(if a.passed() { 0 } else { 1 });
            }
            Ok(0)
        }
        Command::VerifyE91 { pairs, tokens, concrete, swapped_measurements, emit_source } => {
            let o = E91Options { pairs, tokens, concrete, swapped_measurements };
            if emit_source {
                print!("{}", e91_source(&o)?);
                return Ok(0);
            }
            let report = verify_e91(&o)?;
            print!("{}", report.render());
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Sweep { kind, seed, budget, max_failures } => {
            let report = sweep::run(kind, seed, budget)?;
            print!("{}", report.render(max_failures));
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
