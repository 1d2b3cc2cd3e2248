//! `abacus`: solve, trace and verify absorbing Markov chains.
//!
//! Exit codes: 0 success, 1 verification failure or method mismatch,
//! 2 input error, 3 step budget exhausted.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abacus_core::chain::{integerize, parse_chain, validate_absorbing, ChainError, ChainSpec, IntegerChain};
use abacus_core::corpus::{random_chain, CorpusParams};
use abacus_core::engine::{run_engel, solve_rows, EngineError, DEFAULT_BUDGET};
use abacus_core::oracle::matrix_solve;
use abacus_core::rng::small_rng;
use abacus_core::simulate::{monte_carlo_estimate, SimulationError};
use abacus_core::verify::{verify_many, VerifyError, VerifyOptions};
use clap::{Parser, Subcommand, ValueEnum};

use crate::output::{SolveDocument, VerifyDocument};

#[derive(Parser, Debug)]
#[command(name = "abacus", version, about = "Exact absorbing Markov chain solver (Engel's chip abacus + exact linear algebra)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute N and B.
    Solve {
        file: PathBuf,
        /// Only the row for this start state.
        #[arg(long)]
        start: Option<usize>,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Also print decimal approximations in text output.
        #[arg(long)]
        decimals: bool,
    },
    /// Print the move-by-move table of one abacus run.
    Trace {
        file: PathBuf,
        /// Defaults to the file's `start:` state.
        #[arg(long)]
        start: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Print Q, R, N = (I-Q)^-1 and B = NR.
    Oracle {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check recurrence, method A/B, abelian and oracle properties.
    Verify {
        /// A single chain file.
        file: Option<PathBuf>,
        /// Verify every `*.chain` file in a directory.
        #[arg(long)]
        chains_dir: Option<PathBuf>,
        /// Also verify this many randomly generated chains.
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        corpus_seed: u64,
        /// Random firing schedules per start state.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Random sub-critical loadings per start state.
        #[arg(long, default_value_t = 3)]
        starts: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Monte Carlo estimate of one row, printed next to the exact values.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        start: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Write randomly generated absorbing chains as `NNN.chain` files.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        max_transient: usize,
        #[arg(long, default_value_t = 3)]
        max_absorbing: usize,
        #[arg(long, default_value_t = 8)]
        max_denominator: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Abacus,
    Matrix,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

/// Error carrying its exit code. Verification failures are not errors:
/// their report still goes to stdout, with exit code 1.
#[derive(Debug)]
enum Failure {
    Input(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e.root() {
            EngineError::BudgetExhausted { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Chain(c) => c.into(),
            VerifyError::Engine(g) => g.into(),
        }
    }
}

impl From<SimulationError> for Failure {
    fn from(e: SimulationError) -> Self {
        match e {
            SimulationError::StepCap { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load(path: &Path) -> Result<ChainSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let spec = parse_chain(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    validate_absorbing(&spec).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(spec)
}

fn start_state(spec: &ChainSpec, start: Option<usize>) -> Result<usize, Failure> {
    let u = start
        .or(spec.start())
        .ok_or_else(|| Failure::Input("no start state: pass --start or add `start:` to the file".into()))?;
    if !spec.is_transient(u) {
        return Err(Failure::Input(format!("start state {u} is not transient")));
    }
    Ok(u)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

fn run(command: Command) -> Result<(String, u8), Failure> {
    match command {
        Command::Solve {
            file,
            start,
            method,
            format,
            budget,
            decimals,
        } => {
            let spec = load(&file)?;
            let chain = integerize(&spec)?;
            let doc = solve(&spec, &chain, start, method, budget)?;
            let code = if doc.agree == Some(false) { 1 } else { 0 };
            let out = match format {
                Format::Json => to_json(&doc),
                Format::Text => output::solve_text(&doc, decimals),
            };
            Ok((out, code))
        }
        Command::Trace { file, start, budget } => {
            let spec = load(&file)?;
            let chain = integerize(&spec)?;
            let u = start_state(&spec, start)?;
            let run = run_engel(&chain, u, budget)?;
            Ok((run.trace.render(&chain), 0))
        }
        Command::Oracle { file, format } => {
            let spec = load(&file)?;
            let doc = output::oracle_document(&spec).map_err(|e| Failure::Input(e.to_string()))?;
            let out = match format {
                Format::Json => to_json(&doc),
                Format::Text => output::oracle_text(&doc),
            };
            Ok((out, 0))
        }
        Command::Verify {
            file,
            chains_dir,
            random,
            corpus_seed,
            seeds,
            starts,
            budget,
            format,
        } => {
            let mut chains = Vec::new();
            if let Some(f) = &file {
                chains.push((f.display().to_string(), load(f)?));
            }
            if let Some(dir) = &chains_dir {
                chains.extend(load_dir(dir)?);
            }
            let mut rng = small_rng(corpus_seed);
            for i in 0..random {
                chains.push((format!("random#{i}"), random_chain(&mut rng, &CorpusParams::default())));
            }
            if chains.is_empty() {
                return Err(Failure::Input("nothing to verify: give a file, --chains-dir or --random".into()));
            }
            let opts = VerifyOptions {
                seeds,
                starts,
                budget,
                seed: corpus_seed,
            };
            let reports = verify_many(&chains, &opts)
                .into_iter()
                .collect::<Result<Vec<_>, _>>()?;
            let doc = VerifyDocument::new(reports);
            let code = if doc.passed { 0 } else { 1 };
            let out = match format {
                Format::Json => to_json(&doc),
                Format::Text => output::verify_text(&doc),
            };
            Ok((out, code))
        }
        Command::Simulate {
            file,
            start,
            trials,
            seed,
            format,
        } => {
            let spec = load(&file)?;
            let u = start_state(&spec, start)?;
            let est = monte_carlo_estimate(&spec, u, trials, seed)?;
            let exact = matrix_solve(&spec).map_err(|e| Failure::Input(e.to_string()))?;
            let doc = output::simulation_document(&est, &exact);
            let out = match format {
                Format::Json => to_json(&doc),
                Format::Text => output::simulation_text(&doc),
            };
            Ok((out, 0))
        }
        Command::Generate {
            out,
            count,
            seed,
            max_transient,
            max_absorbing,
            max_denominator,
        } => {
            if max_transient == 0 || max_absorbing == 0 || max_denominator == 0 {
                return Err(Failure::Input("size limits must be positive".into()));
            }
            let params = CorpusParams {
                max_transient,
                max_absorbing,
                max_denominator,
            };
            fs::create_dir_all(&out).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
            let mut rng = small_rng(seed);
            let mut listing = String::new();
            for i in 0..count {
                let spec = random_chain(&mut rng, &params);
                let path = out.join(format!("{i:03}.chain"));
                fs::write(&path, spec.to_string()).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                listing.push_str(&format!("{}\n", path.display()));
            }
            Ok((listing, 0))
        }
    }
}

fn load_dir(dir: &Path) -> Result<Vec<(String, ChainSpec)>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "chain"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| Ok((p.display().to_string(), load(&p)?)))
        .collect()
}

fn solve(
    spec: &ChainSpec,
    chain: &IntegerChain,
    start: Option<usize>,
    method: Method,
    budget: u64,
) -> Result<SolveDocument, Failure> {
    let starts: Vec<usize> = match start {
        Some(u) => vec![start_state(spec, Some(u))?],
        None => chain.transient_labels().to_vec(),
    };
    let abacus = match method {
        Method::Matrix => None,
        _ => Some(solve_rows(chain, &starts, budget)?),
    };
    let matrix = match method {
        Method::Abacus => None,
        _ => Some(matrix_solve(spec).map_err(|e| Failure::Input(e.to_string()))?),
    };
    Ok(SolveDocument::new(chain, method, &starts, abacus.as_deref(), matrix.as_ref()))
}
