//! The `evoorder` command line.
//!
//! Exit codes: 0 for an affirmative answer (accepted, evolutionary,
//! satisfiable, or a successful write), 1 for a negative answer, 2 for usage
//! and format errors.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::certificates::{assignment_from_ordering, ordering_from_assignment};
use crate::cnf::{dpll_sat, gen_cnf, parse_assignment, parse_dimacs, write_dimacs, SatResult};
use crate::reduction::{build_instance, parse_rolemap_standalone, serialize_rolemap, ReductionInstance};
use crate::search::{brute_force, decide_with, gen_family, SearchOptions};
use crate::setfam::{
    check_evolutionary, parse_family, parse_ordering, serialize_family, serialize_ordering, Ordering, SetFamily,
};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Affirmative,
    Negative,
    UsageError,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            ExitStatus::Affirmative => 0,
            ExitStatus::Negative => 1,
            ExitStatus::UsageError => 2,
        }
    }

    fn from_answer(yes: bool) -> Self {
        if yes {
            ExitStatus::Affirmative
        } else {
            ExitStatus::Negative
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "evoorder", version, about = "Evolutionary orderings of set families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Verify an ordering of a family.
    Check { family: PathBuf, ordering: PathBuf },
    /// Decide whether a family is evolutionary.
    Solve {
        family: PathBuf,
        /// Enumerate permutations instead of searching (at most 9 sets).
        #[arg(long)]
        brute_force: bool,
        /// Skip the necessary-condition prechecks.
        #[arg(long)]
        no_precheck: bool,
        /// Write the witness ordering here when one exists.
        #[arg(long, value_name = "OUT")]
        witness: Option<PathBuf>,
        #[arg(short, long)]
        verbose: bool,
    },
    /// Compile a 3-CNF formula into a family and role map.
    Reduce {
        cnf: PathBuf,
        #[arg(long, value_name = "FAMILY")]
        out: PathBuf,
        #[arg(long, value_name = "MAP")]
        map: PathBuf,
        /// Compile the formula as given, without duplicating its clauses.
        #[arg(long)]
        no_duplicate: bool,
    },
    /// Build an ordering of a compiled instance from an assignment.
    Forward {
        map: PathBuf,
        assignment: PathBuf,
        #[arg(long, value_name = "ORDERING")]
        out: PathBuf,
    },
    /// Extract an assignment from an ordering of a compiled instance.
    Extract {
        map: PathBuf,
        ordering: PathBuf,
        #[arg(short, long)]
        verbose: bool,
    },
    /// Decide satisfiability of a DIMACS formula with DPLL.
    Sat { cnf: PathBuf },
    /// Generate random instances on standard output.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Random set family.
    Family {
        #[arg(long)]
        sets: usize,
        #[arg(long)]
        universe: usize,
        #[arg(long)]
        density: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Random 3-CNF formula.
    Cnf {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        clauses: usize,
        #[arg(long)]
        seed: u64,
    },
}

/// A one-line diagnostic.
struct Failure(String);

type CliResult<T> = Result<T, Failure>;

fn fail(path: &Path, err: impl std::fmt::Display) -> Failure {
    Failure(format!("{}: {err}", path.display()))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| fail(path, e))
}

fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(path, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail(path, e))?;
    tmp.persist(path).map_err(|e| fail(path, e.error))?;
    Ok(())
}

fn load_family(path: &Path, err: &mut dyn Write) -> CliResult<SetFamily> {
    let parsed = parse_family(&read(path)?).map_err(|e| fail(path, e))?;
    for warning in &parsed.warnings {
        let _ = writeln!(err, "warning: {}: {warning}", path.display());
    }
    Ok(parsed.family)
}

fn load_ordering(path: &Path, num_sets: usize) -> CliResult<Ordering> {
    let ordering = parse_ordering(&read(path)?).map_err(|e| fail(path, e))?;
    ordering.validate(num_sets).map_err(|e| fail(path, e))?;
    Ok(ordering)
}

fn load_map(path: &Path) -> CliResult<ReductionInstance> {
    parse_rolemap_standalone(&read(path)?).map_err(|e| fail(path, e))
}

fn io_failure(e: io::Error) -> Failure {
    Failure(format!("<stdout>: {e}"))
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                ExitStatus::UsageError
            } else {
                let _ = write!(out, "{rendered}");
                ExitStatus::Affirmative
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(status) => status,
        Err(Failure(message)) => {
            let _ = writeln!(err, "error: {message}");
            ExitStatus::UsageError
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<ExitStatus> {
    match command {
        Command::Check { family, ordering } => {
            let fam = load_family(&family, err)?;
            let ord = load_ordering(&ordering, fam.num_sets())?;
            let report = check_evolutionary(&fam, &ord).map_err(|e| fail(&ordering, e))?;
            write!(out, "{}", report.render(&fam)).map_err(io_failure)?;
            Ok(ExitStatus::from_answer(report.accepted()))
        }
        Command::Solve { family, brute_force: brute, no_precheck, witness, verbose } => {
            let fam = load_family(&family, err)?;
            let verdict = if brute {
                brute_force(&fam).map_err(|e| fail(&family, e))?
            } else {
                decide_with(&fam, &SearchOptions { precheck: !no_precheck, ..Default::default() })
            };
            match &verdict.witness {
                Some(w) => {
                    writeln!(out, "EVOLUTIONARY").map_err(io_failure)?;
                    writeln!(out, "{w}").map_err(io_failure)?;
                    if let Some(path) = &witness {
                        write_atomic(path, &serialize_ordering(w))?;
                    }
                }
                None => writeln!(out, "NOT EVOLUTIONARY").map_err(io_failure)?,
            }
            if verbose {
                writeln!(out, "{}", verdict.stats).map_err(io_failure)?;
            }
            Ok(ExitStatus::from_answer(verdict.evolutionary))
        }
        Command::Reduce { cnf, out: family_path, map, no_duplicate } => {
            let formula = parse_dimacs(&read(&cnf)?).map_err(|e| fail(&cnf, e))?;
            let instance = if no_duplicate {
                build_instance(&formula, false)
            } else {
                build_instance(&crate::cnf::duplicate_clauses(&formula), true)
            };
            write_atomic(&family_path, &serialize_family(instance.family()))?;
            write_atomic(&map, &serialize_rolemap(&instance))?;
            writeln!(
                err,
                "wrote {} sets over {} elements",
                instance.family().num_sets(),
                instance.family().universe_size()
            )
            .map_err(io_failure)?;
            Ok(ExitStatus::Affirmative)
        }
        Command::Forward { map, assignment, out: ordering_path } => {
            let instance = load_map(&map)?;
            let alpha = parse_assignment(&read(&assignment)?, instance.num_vars()).map_err(|e| fail(&assignment, e))?;
            let ordering = ordering_from_assignment(&instance, &alpha).map_err(|e| fail(&assignment, e))?;
            write_atomic(&ordering_path, &serialize_ordering(&ordering))?;
            Ok(ExitStatus::Affirmative)
        }
        Command::Extract { map, ordering, verbose } => {
            let instance = load_map(&map)?;
            let ord = load_ordering(&ordering, instance.family().num_sets())?;
            let (alpha, report) = assignment_from_ordering(&instance, &ord).map_err(|e| fail(&ordering, e))?;
            let check = check_evolutionary(instance.family(), &ord).map_err(|e| fail(&ordering, e))?;
            writeln!(out, "{alpha}").map_err(io_failure)?;
            if verbose {
                write!(out, "{}", report.render_table()).map_err(io_failure)?;
            }
            if let Some(v) = check.violation {
                writeln!(
                    err,
                    "warning: {}: ordering rejected at step {} ({}); assignment is untrusted",
                    ordering.display(),
                    v.position,
                    v.reason
                )
                .map_err(io_failure)?;
            }
            Ok(ExitStatus::from_answer(check.accepted()))
        }
        Command::Sat { cnf } => {
            let formula = parse_dimacs(&read(&cnf)?).map_err(|e| fail(&cnf, e))?;
            let result = dpll_sat(&formula);
            writeln!(out, "{result}").map_err(io_failure)?;
            Ok(ExitStatus::from_answer(matches!(result, SatResult::Sat(_))))
        }
        Command::Gen(GenCommand::Family { sets, universe, density, seed }) => {
            let fam = gen_family(sets, universe, density, seed).map_err(|e| Failure(format!("gen family: {e}")))?;
            write!(out, "{}", serialize_family(&fam)).map_err(io_failure)?;
            Ok(ExitStatus::Affirmative)
        }
        Command::Gen(GenCommand::Cnf { vars, clauses, seed }) => {
            let formula = gen_cnf(vars, clauses, seed).map_err(|e| Failure(format!("gen cnf: {e}")))?;
            write!(out, "{}", write_dimacs(&formula)).map_err(io_failure)?;
            Ok(ExitStatus::Affirmative)
        }
    }
}
