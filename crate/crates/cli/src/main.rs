use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hj_core::hj::{verify_relation, WeakOptions};
use hj_core::phase::{builtin_model, load_model, Builtin, Model};
use hj_core::pipeline::{analyze, bracket_stage, validate_brackets, Options};
use hj_core::reference::{compare_all, reference_for, table};
use hj_core::report::{AnalysisReport, Format, RelationRow, TextStyle};
use hj_core::Error;

#[derive(Parser)]
#[command(name = "hj", version, about = "Hamilton-Jacobi constraint analysis of field theories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Built-in model name (pontryagin, euler) or path to a model file
    #[arg(long, global = true, default_value = "pontryagin")]
    model: String,
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
    /// Write the report here instead of standard output
    #[arg(short = 'o', global = true)]
    output: Option<PathBuf>,
    /// Seeded phase-space points for the numeric cross-check (0 skips it)
    #[arg(long, global = true, default_value_t = 100)]
    oracle_trials: usize,
    /// Largest accepted deviation between symbolic and numeric brackets
    #[arg(long, global = true, default_value_t = 1e-10)]
    oracle_tol: f64,
    /// First seed of the numeric cross-check
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Field degree of reducibility coefficients
    #[arg(long, global = true, default_value_t = 1)]
    ansatz_degree: usize,
    /// Bound on integrability generations
    #[arg(long, global = true, default_value_t = 10)]
    max_generations: usize,
    /// Timing log on standard error
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Text,
    Structured,
    Latex,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: classification through gauge transformations
    Analyze {
        /// Also verify the printed reducibility relations of a built-in model
        #[arg(long)]
        check_reducibility: bool,
    },
    /// Classification, C-matrix and bracket tables only
    Brackets,
    /// Numeric cross-check of the generalized-bracket table
    Validate,
    /// Load and lint a model file
    Parse,
}

/// Exit 2 for input problems, 1 for analysis failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::UndeclaredSymbol(_)
        | Error::IndexKind(_)
        | Error::DuplicateMomentum(_)
        | Error::NoFields
        | Error::UnknownModel(_)
        | Error::Unsupported(_) => 2,
        _ => 1,
    }
}

fn load(sel: &str) -> Result<Model, Error> {
    if let Ok(b) = sel.parse::<Builtin>() {
        return Ok(builtin_model(b));
    }
    let path = PathBuf::from(sel);
    if path.is_file() {
        let src = std::fs::read_to_string(&path).map_err(|e| Error::Structural(format!("{}: {e}", path.display())))?;
        return load_model(&src);
    }
    Err(Error::UnknownModel(sel.to_string()))
}

struct Run<'a> {
    c: &'a Common,
    start: Instant,
}

impl Run<'_> {
    fn log(&self, msg: &str) {
        if self.c.verbose > 0 {
            eprintln!("[{:>8.3}s] {msg}", self.start.elapsed().as_secs_f64());
        }
    }

    fn options(&self) -> Options {
        Options { weak: WeakOptions::default(), max_generations: self.c.max_generations, ansatz_degree: self.c.ansatz_degree }
    }

    fn emit(&self, r: &AnalysisReport) -> Result<(), Error> {
        let format = match self.c.emit {
            Emit::Text => Format::Text,
            Emit::Structured => Format::Structured,
            Emit::Latex => Format::Latex,
        };
        let body = r.emit(format, TextStyle::from_env());
        match &self.c.output {
            Some(p) => {
                std::fs::write(p, body).map_err(|e| Error::Structural(format!("{}: {e}", p.display())))?;
                self.log(&format!("wrote {}", p.display()));
            }
            None => print!("{body}"),
        }
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let run = Run { c: &cli.common, start: Instant::now() };
    let model = load(&cli.common.model)?;
    run.log(&format!("loaded model {}", model.name));
    match &cli.command {
        Command::Parse => {
            println!(
                "model {}: {} fields, {} primary Hamiltonians, {} bracket entries, canonical Hamiltonian {}",
                model.name,
                model.fields.len(),
                model.primaries.len(),
                model.table.entries.len(),
                model.canonical_name
            );
            Ok(0)
        }
        Command::Brackets => {
            let stage = bracket_stage(&model, &run.options())?;
            run.log("bracket stage done");
            run.emit(&AnalysisReport::from_stage(&stage))?;
            Ok(0)
        }
        Command::Validate => {
            let stage = bracket_stage(&model, &run.options())?;
            run.log("bracket stage done");
            let cv = validate_brackets(&stage, cli.common.oracle_trials, cli.common.oracle_tol, cli.common.seed)?;
            run.log("oracle done");
            let passed = cv.passed();
            run.emit(&AnalysisReport::from_stage(&stage).with_oracle(cv))?;
            Ok(if passed { 0 } else { 1 })
        }
        Command::Analyze { check_reducibility } => {
            let a = analyze(&model, &run.options())?;
            run.log("pipeline done");
            let mut report = AnalysisReport::from_analysis(&a);
            if cli.common.oracle_trials > 0 {
                let cv = validate_brackets(&a.stage, cli.common.oracle_trials, cli.common.oracle_tol, cli.common.seed)?;
                run.log("oracle done");
                report = report.with_oracle(cv);
            }
            if let Some(r) = reference_for(&model) {
                report = report.with_comparisons(&compare_all(r, &a)?);
                run.log("compared with printed results");
                if *check_reducibility {
                    let tab = table(&model, &a.hamiltonians);
                    for (family, lhs, rhs) in r.relations {
                        let lhs = hj_core::parse::parse_expression(lhs, &tab)?;
                        let rhs = hj_core::parse::parse_expression(rhs, &tab)?;
                        let rel = verify_relation(family, &lhs, &rhs, &a.hamiltonians)?;
                        report.reducibility.push(RelationRow {
                            family: format!("{family} (printed)"),
                            lhs: (&rel.lhs).into(),
                            rhs: (&rel.rhs).into(),
                            holds: rel.holds(),
                            conditions: rel.conditions(),
                        });
                    }
                }
            }
            let ok = a.algebra.closed && report.oracle.as_ref().is_none_or(|o| o.passed());
            run.emit(&report)?;
            Ok(if ok { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
