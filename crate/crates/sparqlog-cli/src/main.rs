use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sparqlog::datalog::{
    audit_recursion, check_warded, parse_program, render_program, stratify, EvalOptions, Program,
    DEFAULT_MAX_DERIVATIONS,
};
use sparqlog::oracle::compare_multisets;
use sparqlog::rdf::{load_dataset, Dataset};
use sparqlog::solution::{parse_tsv, Format};
use sparqlog::sparql::{parse_query, Query};
use sparqlog::translator::translate_query_mode;
use sparqlog::{run_query, run_query_direct, Answer, Error};

const LIMIT_ENV: &str = "SPARQLOG_MAX_DERIVATIONS";

#[derive(Parser)]
#[command(name = "sparqlog", version, about = "Answer SPARQL queries through warded Datalog± programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a query over a dataset and print the results.
    Run(RunArgs),
    /// Print the program a query translates to.
    Translate(TranslateArgs),
    /// Report stratification, wardedness and the recursion audit.
    Check(CheckArgs),
    /// Compare engine results with the direct evaluator or a TSV file.
    Diff(DiffArgs),
}

#[derive(Args)]
struct DataArgs {
    /// N-Triples or N-Quads file merged into the default graph.
    #[arg(long = "data", value_name = "FILE")]
    data: Vec<PathBuf>,
    /// Named graph as NAME=FILE.
    #[arg(long = "named", value_name = "NAME=FILE")]
    named: Vec<String>,
    #[arg(long, value_name = "FILE")]
    query: PathBuf,
    /// Maximum number of stored atoms (default from SPARQLOG_MAX_DERIVATIONS, else 10^7).
    #[arg(long = "limit-derivations", value_name = "N")]
    limit_derivations: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Tsv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: DataArgs,
    #[arg(long, value_enum, default_value = "tsv")]
    format: OutputFormat,
    /// Evaluate with the direct evaluator instead of the rule engine.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct TranslateArgs {
    #[arg(long, value_name = "FILE")]
    query: PathBuf,
    /// Set semantics: no identifier columns.
    #[arg(long)]
    distinct: bool,
    #[arg(short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct CheckSource {
    #[arg(long, value_name = "FILE")]
    query: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    program: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: CheckSource,
}

#[derive(Args)]
struct DiffArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Expected results as TSV; without it the direct evaluator is used.
    #[arg(long, value_name = "FILE")]
    expected: Option<PathBuf>,
    #[arg(long = "blank-insensitive")]
    blank_insensitive: bool,
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn load_query(path: &Path) -> Result<Query, Error> {
    Ok(parse_query(&read(path)?)?)
}

fn load_data(args: &DataArgs) -> Result<Dataset, Error> {
    let named = args
        .named
        .iter()
        .map(|n| match n.split_once('=') {
            Some((name, file)) if !name.is_empty() && !file.is_empty() => Ok((name.to_string(), PathBuf::from(file))),
            _ => Err(Error::Usage(format!("--named expects NAME=FILE, got {n:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(load_dataset(&args.data, &named)?)
}

fn eval_options(args: &DataArgs) -> Result<EvalOptions, Error> {
    let limit = match args.limit_derivations {
        Some(n) => n,
        None => match std::env::var(LIMIT_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| Error::Usage(format!("{LIMIT_ENV} must be a number, got {v:?}")))?,
            Err(_) => DEFAULT_MAX_DERIVATIONS,
        },
    };
    Ok(EvalOptions { max_derivations: limit, ..EvalOptions::default() })
}

fn run(args: &RunArgs) -> Result<i32, Error> {
    let q = load_query(&args.input.query)?;
    let d = load_data(&args.input)?;
    let answer = if args.oracle { run_query_direct(&q, &d) } else { run_query(&q, &d, &eval_options(&args.input)?)? };
    let format = match args.format {
        OutputFormat::Tsv => Format::Tsv,
        OutputFormat::Json => Format::Json,
    };
    print!("{}", answer.serialize(format));
    Ok(0)
}

fn translate(args: &TranslateArgs) -> Result<i32, Error> {
    let q = load_query(&args.query)?;
    let text = render_program(&translate_query_mode(&q, args.distinct || q.is_distinct())?);
    match &args.output {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io { path: path.clone(), source })?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn check(args: &CheckArgs) -> Result<i32, Error> {
    let program: Program = match (&args.source.query, &args.source.program) {
        (Some(q), _) => sparqlog::translator::translate_query(&load_query(q)?)?,
        (None, Some(p)) => parse_program(&read(p)?)?,
        (None, None) => return Err(Error::Usage("give --query or --program".into())),
    };
    let strata = stratify(&program);
    let warded = check_warded(&program);
    let audit = audit_recursion(&program);
    match &strata {
        Ok(s) => {
            println!("stratified: true");
            println!("strata: {}", s.len());
            for (i, preds) in s.iter().enumerate() {
                println!("  {i}: {}", preds.iter().cloned().collect::<Vec<_>>().join(" "));
            }
        }
        Err(e) => println!("stratified: false ({e})"),
    }
    println!("warded: {}", warded.is_warded);
    if let Some(r) = warded.witness {
        println!("  unwarded rule: {}", program.rules[r]);
    }
    println!("recursion audit: {}", if audit.passed() { "passed" } else { "failed" });
    for r in &audit.violations {
        println!("  {r}");
    }
    Ok(if strata.is_ok() && warded.is_warded && audit.passed() { 0 } else { 4 })
}

fn diff(args: &DiffArgs) -> Result<i32, Error> {
    let q = load_query(&args.input.query)?;
    let d = load_data(&args.input)?;
    let got = run_query(&q, &d, &eval_options(&args.input)?)?;
    let expected = match &args.expected {
        Some(path) => {
            let text = read(path)?;
            match got {
                Answer::Boolean(_) => match text.trim() {
                    "true" => Answer::Boolean(true),
                    "false" => Answer::Boolean(false),
                    other => return Err(Error::Usage(format!("expected true or false, found {other:?}"))),
                },
                Answer::Solutions { .. } => {
                    let multiset = parse_tsv(&text)?;
                    Answer::Solutions { sequence: vec![], multiset }
                }
            }
        }
        None => run_query_direct(&q, &d),
    };
    let equal = match (&expected, &got) {
        (Answer::Boolean(a), Answer::Boolean(b)) => {
            println!("equal: {}", a == b);
            println!("expected: {a}");
            println!("got: {b}");
            a == b
        }
        (Answer::Solutions { multiset: e, .. }, Answer::Solutions { multiset: g, .. }) => {
            let report = compare_multisets(e, g, args.blank_insensitive);
            println!("equal: {}", report.equal);
            println!("correct: {:.6}", report.correct_ratio);
            println!("complete: {:.6}", report.complete_ratio);
            for line in &report.diff {
                println!("{line}");
            }
            report.equal
        }
        _ => {
            println!("equal: false");
            false
        }
    };
    Ok(if equal { 0 } else { 4 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Translate(a) => translate(a),
        Command::Check(a) => check(a),
        Command::Diff(a) => diff(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("sparqlog: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
