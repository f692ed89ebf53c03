//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 parse error, 3 timeout,
//! 4 verification mismatch.

use std::fs;
use std::io::{self, BufRead, BufReader, LineWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use crate::benchgen::{generate_cnf, read_edge_list, GenOptions, GraphQuerySpec, QueryKind};
use crate::cnfio::{format_model, parse_dimacs, CnfProblem};
use crate::oracle::{brute_count, MAX_BRUTE_VARIABLES};
use crate::ordering::{compute_stats, OrderingStrategy};
use crate::solver::{choose_permutation, run_with, InsertionRatio, Mode, Observer, OrderingChoice, SolveError, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "tetris-count", version, about = "Exact model counting by geometric resolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count the models of a DIMACS CNF file
    Count(SolveArgs),
    /// Count the models and print each one as a "v" line
    Enumerate(SolveArgs),
    /// Generate a clique or path counting CNF from an edge list
    Gen(GenArgs),
    /// Print formula statistics and the chosen variable ordering
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// DIMACS file, or "-" for stdin
    pub input: PathBuf,
    /// Variable ordering: naive-degree, grouped-optimal, grouped-heuristic,
    /// treewidth, minfill, or identity
    #[arg(long, default_value = "grouped-heuristic")]
    pub ordering: String,
    /// Minimum λ fraction for a resolvent to be cached, in [0, 1]
    #[arg(long, default_value = "0.45")]
    pub insertion_ratio: String,
    #[arg(long)]
    pub no_lambda_skip: bool,
    /// Give up after this many seconds
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Cross-check the count against a truth table (at most 24 variables)
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Edge list, or "-" for stdin
    pub input: PathBuf,
    #[arg(long, default_value = "clique")]
    pub query: String,
    #[arg(long, default_value_t = 3)]
    pub size: usize,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Merge clause pairs that differ in one literal's sign
    #[arg(long)]
    pub merge: bool,
    #[arg(long, default_value_t = crate::benchgen::DEFAULT_VARIABLE_CAP)]
    pub max_variables: usize,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// DIMACS file, or "-" for stdin
    pub input: PathBuf,
    #[arg(long, default_value = "grouped-heuristic")]
    pub ordering: String,
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

/// Parses `args` (program name first) and runs the command, writing to the
/// given streams. Returns the process exit code.
pub fn run_cli<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Count(a) => solve(&a, Mode::Count, input, out, err),
        Command::Enumerate(a) => solve(&a, Mode::Enumerate, input, out, err),
        Command::Gen(a) => gen(&a, input, out),
        Command::Stats(a) => stats(&a, input, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let stdout = io::stdout();
    // one line at a time so an interrupted enumeration leaves whole lines
    let mut out = LineWriter::new(stdout.lock());
    let mut err = io::stderr();
    let code = run_cli(std::env::args_os(), &mut input, &mut out, &mut err);
    let _ = out.flush();
    code
}

fn read_input<'a>(path: &Path, stdin: &'a mut dyn BufRead) -> Result<Box<dyn Read + 'a>, Failure> {
    if path == Path::new("-") {
        Ok(Box::new(stdin))
    } else {
        let f = fs::File::open(path).map_err(|e| fail(EXIT_USAGE, format!("cannot open {}: {e}", path.display())))?;
        Ok(Box::new(BufReader::new(f)))
    }
}

fn load_cnf(path: &Path, stdin: &mut dyn BufRead) -> Result<CnfProblem, Failure> {
    parse_dimacs(read_input(path, stdin)?).map_err(|e| fail(EXIT_PARSE, e.to_string()))
}

fn parse_ordering(s: &str) -> Result<OrderingChoice, Failure> {
    if s == "identity" {
        return Ok(OrderingChoice::Identity);
    }
    s.parse::<OrderingStrategy>().map(OrderingChoice::Strategy).map_err(|e| fail(EXIT_USAGE, e))
}

fn io_fail(e: io::Error) -> Failure {
    fail(EXIT_USAGE, format!("write failed: {e}"))
}

struct ModelPrinter<'a> {
    out: &'a mut dyn Write,
    broken: Option<io::Error>,
}

impl Observer for ModelPrinter<'_> {
    fn on_model(&mut self, assignment: &[bool]) {
        if self.broken.is_none() {
            if let Err(e) = writeln!(self.out, "v {}", format_model(assignment)) {
                self.broken = Some(e);
            }
        }
    }

    fn should_stop(&mut self) -> bool {
        self.broken.is_some()
    }
}

fn solve(a: &SolveArgs, mode: Mode, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let ratio: InsertionRatio = a.insertion_ratio.parse().map_err(|e: crate::solver::RatioError| fail(EXIT_USAGE, e.to_string()))?;
    let ordering = parse_ordering(&a.ordering)?;
    let timeout = match a.timeout {
        Some(t) if !(t.is_finite() && t >= 0.0) => return Err(fail(EXIT_USAGE, format!("invalid timeout {t}"))),
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    let started = Instant::now();
    let cnf = load_cnf(&a.input, stdin)?;
    let config = SolverConfig {
        insertion_ratio: ratio,
        ordering,
        mode,
        lambda_skip: !a.no_lambda_skip,
        deadline: timeout.map(|t| started + t),
        ..SolverConfig::default()
    };
    let mut printer = ModelPrinter { out, broken: None };
    let result = run_with(&cnf, &config, &mut printer);
    if let Some(e) = printer.broken.take() {
        return Err(io_fail(e));
    }
    let outcome = match result {
        Ok(o) => o,
        Err(SolveError::Timeout { partial_count, iterations }) => {
            writeln!(out, "c timeout after {iterations} iterations, {partial_count} models so far").map_err(io_fail)?;
            writeln!(out, "s UNKNOWN").map_err(io_fail)?;
            return Ok(EXIT_TIMEOUT);
        }
        Err(e) => return Err(fail(EXIT_USAGE, e.to_string())),
    };
    writeln!(out, "s MODELS {}", outcome.model_count).map_err(io_fail)?;
    writeln!(out, "c loadtime {:.6}", outcome.load_time.as_secs_f64()).map_err(io_fail)?;
    writeln!(out, "c runtime {:.6}", outcome.run_time.as_secs_f64()).map_err(io_fail)?;
    if a.verify {
        if cnf.variable_count > MAX_BRUTE_VARIABLES {
            writeln!(out, "c verify skipped: more than {MAX_BRUTE_VARIABLES} variables").map_err(io_fail)?;
        } else {
            let expected = brute_count(&cnf).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
            if expected != outcome.model_count {
                writeln!(out, "c verify mismatch: truth table gives {expected}").map_err(io_fail)?;
                let _ = writeln!(err, "verification failed: solver {} vs truth table {expected}", outcome.model_count);
                return Ok(EXIT_MISMATCH);
            }
            writeln!(out, "c verify ok").map_err(io_fail)?;
        }
    }
    Ok(EXIT_OK)
}

fn gen(a: &GenArgs, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32, Failure> {
    let kind: QueryKind = a.query.parse().map_err(|e: String| fail(EXIT_USAGE, e))?;
    let mut text = String::new();
    read_input(&a.input, stdin)?.read_to_string(&mut text).map_err(|e| fail(EXIT_PARSE, format!("cannot read edge list: {e}")))?;
    let g = read_edge_list(&text).map_err(|e| fail(EXIT_PARSE, e.to_string()))?;
    let spec = GraphQuerySpec::new(kind, a.size, &g).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    let opts = GenOptions { variable_cap: a.max_variables, merge: a.merge };
    let cnf = generate_cnf(&g, &spec, &opts).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    let text = cnf.to_dimacs();
    match &a.out {
        Some(path) => fs::write(path, text).map_err(|e| fail(EXIT_USAGE, format!("cannot write {}: {e}", path.display())))?,
        None => out.write_all(text.as_bytes()).map_err(io_fail)?,
    }
    Ok(EXIT_OK)
}

fn stats(a: &StatsArgs, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32, Failure> {
    let ordering = parse_ordering(&a.ordering)?;
    let cnf = load_cnf(&a.input, stdin)?;
    let s = compute_stats(&cnf);
    let mut lines = vec![format!("c variables {}", cnf.variable_count), format!("c clauses {}", cnf.clauses.len())];
    let mut histogram = std::collections::BTreeMap::new();
    for &d in s.degrees() {
        *histogram.entry(d).or_insert(0usize) += 1;
    }
    for (d, count) in histogram {
        lines.push(format!("c degree {d} variables {count}"));
    }
    let perm = choose_permutation(&cnf, &ordering);
    let order: Vec<String> = perm.order().iter().map(u32::to_string).collect();
    lines.push(format!("c ordering {}", a.ordering));
    lines.push(format!("o {}", order.join(" ")));
    for l in lines {
        writeln!(out, "{l}").map_err(io_fail)?;
    }
    Ok(EXIT_OK)
}
