//! `kmpe` — k most plausible explanations for discrete models.
//!
//! Subcommands: `solve` (genetic search), `oracle` (exact enumeration),
//! `check` (model validation), `qtable` (singleton commonality tables),
//! `gen` (random model generation).
//!
//! Exit codes are disjoint per error class:
//!   0 success, 2 usage, 3 parse/I-O, 4 validation, 5 no solution,
//!   6 capacity guard exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kmpe_core::error::Error;
use kmpe_core::format::{
    fnv1a64, model_to_json, parse_evidence_str, parse_model_str, result_file, result_to_json,
    result_to_text, QueryEcho,
};
use kmpe_core::gen::{generate_model, GenSpec};
use kmpe_core::model::ModelKind;
use kmpe_core::oracle::{enumerate_top_k, DEFAULT_ENUMERATION_GUARD};
use kmpe_core::{k_mpe, Evidence, GaParams, Model, Selection};

const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_VALIDATION: u8 = 4;
const EXIT_NO_SOLUTION: u8 = 5;
const EXIT_CAPACITY: u8 = 6;

#[derive(Parser)]
#[command(
    name = "kmpe",
    version,
    about = "k most plausible explanations for discrete Bayesian and belief-function models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the k best explanations with the genetic solver.
    Solve(SolveArgs),
    /// Find the exact k best explanations by enumeration (small models).
    Oracle(OracleArgs),
    /// Validate a model file; exit 0 iff the report is clean.
    Check {
        #[arg(long)]
        model: PathBuf,
    },
    /// Print the singleton commonality table of every universe (dst only).
    Qtable {
        #[arg(long)]
        model: PathBuf,
    },
    /// Emit a random valid model.
    Gen(GenArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    model: PathBuf,
    /// Evidence file; omit for an unconstrained query.
    #[arg(long)]
    evidence: Option<PathBuf>,
    /// Number of explanations to return.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Population size.
    #[arg(long)]
    pop: Option<usize>,
    /// Per-locus mutation probability.
    #[arg(long)]
    pm: Option<f64>,
    /// Per-pair crossover probability.
    #[arg(long)]
    pc: Option<f64>,
    /// Generation limit per run.
    #[arg(long)]
    gens: Option<usize>,
    /// Early stop after this many unimproved generations (0 disables).
    #[arg(long)]
    stagnation: Option<usize>,
    /// Best individuals copied unchanged each generation.
    #[arg(long)]
    elitism: Option<usize>,
    /// Parent selection: "tournament", "tournament:N", or "roulette".
    #[arg(long)]
    selection: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    evidence: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Args)]
struct GenArgs {
    /// Model kind: bayesian or dst.
    #[arg(long)]
    kind: GenKind,
    /// Number of variables.
    #[arg(long)]
    vars: usize,
    /// Largest frame size (sizes drawn from 2..=max-frame).
    #[arg(long, default_value_t = 3)]
    max_frame: usize,
    /// Bayesian parent density in [0, 1].
    #[arg(long, default_value_t = 0.4)]
    density: f64,
    /// Informative focal sets per dst universe.
    #[arg(long, default_value_t = 4)]
    focal: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Bayesian,
    Dst,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kmpe: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => EXIT_PARSE,
        Error::Invalid(_) | Error::Index(_) | Error::TotalConflict => EXIT_VALIDATION,
        Error::Capacity(_) => EXIT_CAPACITY,
        Error::NoSolution(_) => EXIT_NO_SOLUTION,
        Error::Params(_) => EXIT_USAGE,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Check { model } => cmd_check(&model),
        Command::Qtable { model } => cmd_qtable(&model),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<(Model, u64), Error> {
    let text = read_file(path)?;
    let model = parse_model_str(&text)?;
    Ok((model, fnv1a64(text.as_bytes())))
}

fn load_validated_model(path: &Path) -> Result<(Model, u64), Error> {
    let (model, hash) = load_model(path)?;
    let report = model.validate();
    if !report.is_empty() {
        return Err(Error::Invalid(format!(
            "{} violation(s):\n  {}",
            report.len(),
            report.join("\n  ")
        )));
    }
    Ok((model, hash))
}

fn load_evidence(path: Option<&Path>, model: &Model) -> Result<Evidence, Error> {
    match path {
        None => Ok(Evidence::unconstrained()),
        Some(p) => parse_evidence_str(&read_file(p)?, model),
    }
}

fn parse_selection(text: &str) -> Result<Selection, Error> {
    if text == "roulette" {
        return Ok(Selection::Roulette);
    }
    if text == "tournament" {
        return Ok(Selection::Tournament(2));
    }
    if let Some(size) = text.strip_prefix("tournament:") {
        let size: usize = size
            .parse()
            .map_err(|_| Error::Params(format!("bad tournament size in \"{text}\"")))?;
        return Ok(Selection::Tournament(size));
    }
    Err(Error::Params(format!(
        "unknown selection \"{text}\" (expected tournament, tournament:N, or roulette)"
    )))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display()))),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), Error> {
    if args.k == 0 {
        return Err(Error::Params("--k must be at least 1".into()));
    }
    let mut params = GaParams {
        seed: args.seed,
        ..GaParams::default()
    };
    if let Some(pop) = args.pop {
        params.population_size = pop;
    }
    if let Some(pm) = args.pm {
        params.p_m = pm;
    }
    if let Some(pc) = args.pc {
        params.p_c = pc;
    }
    if let Some(gens) = args.gens {
        params.max_generations = gens;
    }
    if let Some(stagnation) = args.stagnation {
        params.stagnation_window = stagnation;
    }
    if let Some(elitism) = args.elitism {
        params.elitism = elitism;
    }
    if let Some(selection) = &args.selection {
        params.selection = parse_selection(selection)?;
    }
    let (model, hash) = load_validated_model(&args.model)?;
    let ev = load_evidence(args.evidence.as_deref(), &model)?;
    let ranked = k_mpe(&model, &ev, &params, args.k)?;
    let file = result_file(&model, hash, &ev, QueryEcho::solver(args.k, &params), &ranked);
    let text = match args.format {
        OutputFormat::Json => result_to_json(&file),
        OutputFormat::Text => result_to_text(&file),
    };
    emit(&text, args.out.as_deref())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Error> {
    if args.k == 0 {
        return Err(Error::Params("--k must be at least 1".into()));
    }
    let (model, hash) = load_validated_model(&args.model)?;
    let ev = load_evidence(args.evidence.as_deref(), &model)?;
    let result = enumerate_top_k(&model, &ev, args.k, DEFAULT_ENUMERATION_GUARD)?;
    let file = result_file(&model, hash, &ev, QueryEcho::oracle(args.k), &result.top);
    let text = match args.format {
        OutputFormat::Json => result_to_json(&file),
        OutputFormat::Text => result_to_text(&file),
    };
    emit(&text, args.out.as_deref())
}

fn cmd_check(path: &Path) -> Result<(), Error> {
    let (model, _) = load_model(path)?;
    let report = model.validate();
    if report.is_empty() {
        println!("ok: {} is valid", path.display());
        Ok(())
    } else {
        for v in &report {
            println!("{v}");
        }
        Err(Error::Invalid(format!("{} violation(s)", report.len())))
    }
}

fn cmd_qtable(path: &Path) -> Result<(), Error> {
    let (model, _) = load_validated_model(path)?;
    if model.kind() != ModelKind::Dst {
        return Err(Error::Params(
            "qtable requires a dst model; bayesian tables are already explicit".into(),
        ));
    }
    let masses = model.mass_universes().expect("kind checked");
    let tables = model.commonality_tables().expect("kind checked");
    for (i, table) in tables.iter().enumerate() {
        let table = table
            .as_ref()
            .expect("validated model has well-formed universes");
        let var_names: Vec<&str> = masses[i]
            .universe_vars()
            .iter()
            .map(|&v| model.variables()[v].name.as_str())
            .collect();
        println!("Q[{i}] over {}", var_names.join(","));
        for (idx, q) in table.values().iter().enumerate() {
            let tuple = table.row_tuple(idx);
            let labels: Vec<&str> = tuple
                .iter()
                .zip(table.universe_vars())
                .map(|(&ord, &v)| model.variables()[v].frame[ord].as_str())
                .collect();
            println!("  ({}) {:.6}", labels.join(","), q);
        }
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let spec = GenSpec {
        kind: match args.kind {
            GenKind::Bayesian => ModelKind::Bayesian,
            GenKind::Dst => ModelKind::Dst,
        },
        n_vars: args.vars,
        max_frame: args.max_frame,
        density: args.density,
        focal_count: args.focal,
        seed: args.seed,
    };
    let model = generate_model(&spec)?;
    emit(&model_to_json(&model), args.out.as_deref())
}
