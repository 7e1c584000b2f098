//! crjet: pull real algebraic models back through holomorphic map jets.
//!
//! Jets travel as JSON documents (schema version "1") or as inline
//! polynomial expressions; results come back as canonical series text,
//! JSON reports, or aligned tables. Exit codes: 0 success, 1 failed check,
//! 2 validation error, 3 computation error, 4 I/O error. Every nonzero exit
//! writes one machine-readable error object to stderr.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

use crjet_core::{
    crossover_order, dimension_report, is_jet_preimage, jet_pullback, key_observation_check,
    rank_trials, series_from_expression, weighted_norm, AlgebraicModel, CrSignature,
    DimensionReport, ExperimentConfig, ExperimentError, JetDocument, MapJet, SeriesVector,
    VariableSpace,
};

#[derive(Parser)]
#[command(
    name = "crjet",
    version,
    about = "Pullbacks of real algebraic models through holomorphic jets: germs, dimensions, experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pull the model back through the map and print the graph germ.
    Pullback(PullbackArgs),
    /// Verify that the embedded germ equals the pullback of map and model.
    Check {
        /// Jet document with a germ field.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Jet-space dimension report for one signature.
    Dims {
        #[command(flatten)]
        sig: SignatureArgs,
        /// Truncation order.
        #[arg(long)]
        k: u32,
        /// Emit JSON instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Smallest order where the germ space outgrows both jet sources.
    Crossover {
        #[command(flatten)]
        sig: SignatureArgs,
        /// Largest order to scan.
        #[arg(long)]
        kmax: u32,
        /// Emit JSON instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Truncation-stability experiment (randomized trials from a config).
    Keyobs {
        /// Experiment config JSON.
        #[arg(long)]
        config: PathBuf,
    },
    /// Finite-difference Jacobian rank trials from a config.
    Rank {
        /// Experiment config JSON.
        #[arg(long)]
        config: PathBuf,
    },
    /// Weighted norm of the germ at parameter t.
    Norm {
        /// Jet document; the germ is computed when not embedded.
        #[arg(long = "in")]
        input: PathBuf,
        /// Positive rational weight, as p or p/q.
        #[arg(long, allow_hyphen_values = true)]
        t: String,
    },
}

#[derive(Args)]
struct SignatureArgs {
    /// Source holomorphic dimension m.
    #[arg(long)]
    m: usize,
    /// CR codimension d.
    #[arg(long)]
    d: usize,
    /// Target holomorphic dimension m'.
    #[arg(long)]
    mprime: usize,
    /// Model degree bound.
    #[arg(long)]
    nu: u32,
}

#[derive(Args)]
struct PullbackArgs {
    /// Jet document to read; omit to build the jet from expressions.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Write the document back with the germ filled in.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, requires = "d")]
    m: Option<usize>,
    #[arg(long, requires = "mprime")]
    d: Option<usize>,
    #[arg(long, requires = "nu")]
    mprime: Option<usize>,
    #[arg(long, requires = "k")]
    nu: Option<u32>,
    #[arg(long, requires = "m")]
    k: Option<u32>,
    /// Component of f over z1..zm, w1..wd; repeat m' times.
    #[arg(long = "f", allow_hyphen_values = true)]
    f_exprs: Vec<String>,
    /// Component of g over z1..zm, w1..wd; repeat d times.
    #[arg(long = "g", allow_hyphen_values = true)]
    g_exprs: Vec<String>,
    /// Model component over z1..zm', ~z1.., w1..wd, ~w1..; repeat d times.
    #[arg(long = "model", allow_hyphen_values = true)]
    model_exprs: Vec<String>,
}

/// Failed outcomes, in exit-code order: check mismatch (1), bad input (2),
/// failed computation (3), I/O (4).
enum Failure {
    Mismatch(String),
    Validation(String),
    Computation(String),
    Io(String),
}

fn validation(e: impl Display) -> Failure {
    Failure::Validation(e.to_string())
}

fn computation(e: impl Display) -> Failure {
    Failure::Computation(e.to_string())
}

fn experiment(e: ExperimentError) -> Failure {
    match e {
        ExperimentError::InvalidConfig(_) => Failure::Validation(e.to_string()),
        _ => Failure::Computation(e.to_string()),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn read_document(path: &Path) -> Result<JetDocument, Failure> {
    JetDocument::from_json(&read_file(path)?).map_err(validation)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return fail(&Failure::Validation(e.to_string()));
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(&f),
    }
}

fn fail(f: &Failure) -> ExitCode {
    let (kind, code, msg) = match f {
        Failure::Mismatch(m) => ("mismatch", 1u8, m),
        Failure::Validation(m) => ("validation", 2, m),
        Failure::Computation(m) => ("computation", 3, m),
        Failure::Io(m) => ("io", 4, m),
    };
    eprintln!(
        "{}",
        serde_json::json!({"error": {"kind": kind, "message": msg}})
    );
    ExitCode::from(code)
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Pullback(args) => pullback(&args),
        Command::Check { input } => check(&input),
        Command::Dims { sig, k, json } => {
            let sig = CrSignature::new(sig.m, sig.d, sig.mprime, sig.nu, k).map_err(validation)?;
            print_report(&dimension_report(&sig), json);
            Ok(())
        }
        Command::Crossover { sig, kmax, json } => {
            let found = crossover_order(sig.m, sig.d, sig.mprime, sig.nu, kmax)
                .map_err(validation)?;
            match found {
                Some(report) => {
                    println!("crossover order: {}", report.signature.k());
                    print_report(&report, json);
                }
                None => println!("no crossover up to k = {kmax}"),
            }
            Ok(())
        }
        Command::Keyobs { config } => {
            let cfg = ExperimentConfig::from_json(&read_file(&config)?).map_err(experiment)?;
            let report = key_observation_check(&cfg).map_err(experiment)?;
            println!("{}", pretty(&report.to_json()));
            Ok(())
        }
        Command::Rank { config } => {
            let cfg = ExperimentConfig::from_json(&read_file(&config)?).map_err(experiment)?;
            let reports = rank_trials(&cfg).map_err(experiment)?;
            let values: Vec<_> = reports.iter().map(|r| r.to_json()).collect();
            println!("{}", pretty(&serde_json::Value::Array(values)));
            Ok(())
        }
        Command::Norm { input, t } => norm(&input, &t),
    }
}

fn print_report(report: &DimensionReport, json: bool) {
    if json {
        println!("{}", pretty(&report.to_json()));
    } else {
        print!("{}", report.to_table());
    }
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("report serialization is infallible")
}

fn pullback(args: &PullbackArgs) -> Result<(), Failure> {
    let (map, model) = if let Some(path) = &args.input {
        if args.m.is_some() || !args.f_exprs.is_empty() {
            return Err(Failure::Validation(
                "--in and inline jet flags are mutually exclusive".into(),
            ));
        }
        let doc = read_document(path)?;
        (
            doc.map_jet().map_err(validation)?,
            doc.model().map_err(validation)?,
        )
    } else {
        inline_jet(args)?
    };
    let result = jet_pullback(&map, &model).map_err(computation)?;
    for comp in result.germ.r().iter() {
        println!("{}", comp.to_text());
    }
    if let Some(out) = &args.out {
        let doc =
            JetDocument::from_values(&map, &model, Some(&result.germ)).map_err(validation)?;
        write_file(out, &doc.to_json_string())?;
    }
    Ok(())
}

fn inline_jet(args: &PullbackArgs) -> Result<(MapJet, AlgebraicModel), Failure> {
    let (Some(m), Some(d), Some(mprime), Some(nu), Some(k)) =
        (args.m, args.d, args.mprime, args.nu, args.k)
    else {
        return Err(Failure::Validation(
            "pass --in, or the full signature --m --d --mprime --nu --k with --f/--g/--model".into(),
        ));
    };
    let sig = CrSignature::new(m, d, mprime, nu, k).map_err(validation)?;
    let source = VariableSpace::holomorphic_jet(m, d);
    let doubled = VariableSpace::doubled(mprime, d);
    let f = expressions_to_vector(&args.f_exprs, &source, k, mprime, "--f")?;
    let g = expressions_to_vector(&args.g_exprs, &source, k, d, "--g")?;
    let rho = expressions_to_vector(&args.model_exprs, &doubled, nu, d, "--model")?;
    Ok((
        MapJet::new(sig, f, g).map_err(validation)?,
        AlgebraicModel::new(sig, rho).map_err(validation)?,
    ))
}

fn expressions_to_vector(
    exprs: &[String],
    space: &Arc<VariableSpace>,
    order: u32,
    expected: usize,
    flag: &str,
) -> Result<SeriesVector, Failure> {
    if exprs.len() != expected {
        return Err(Failure::Validation(format!(
            "{flag} given {} times, signature demands {expected}",
            exprs.len()
        )));
    }
    let comps = exprs
        .iter()
        .map(|text| series_from_expression(text, space, order))
        .collect::<Result<Vec<_>, _>>()
        .map_err(validation)?;
    SeriesVector::new(comps).map_err(validation)
}

fn check(input: &Path) -> Result<(), Failure> {
    let doc = read_document(input)?;
    let map = doc.map_jet().map_err(validation)?;
    let model = doc.model().map_err(validation)?;
    let germ = doc
        .germ()
        .map_err(validation)?
        .ok_or_else(|| Failure::Validation("document has no germ to check".into()))?;
    if is_jet_preimage(&map, &model, &germ).map_err(computation)? {
        println!("germ verified");
        Ok(())
    } else {
        Err(Failure::Mismatch(
            "embedded germ is not the pullback of the embedded map and model".into(),
        ))
    }
}

fn norm(input: &Path, t_text: &str) -> Result<(), Failure> {
    let doc = read_document(input)?;
    let germ = match doc.germ().map_err(validation)? {
        Some(germ) => germ,
        None => {
            let map = doc.map_jet().map_err(validation)?;
            let model = doc.model().map_err(validation)?;
            jet_pullback(&map, &model).map_err(computation)?.germ
        }
    };
    let t = parse_rational(t_text)?;
    let value = weighted_norm(germ.r(), &t).map_err(validation)?;
    println!("{}", format_rational(&value));
    Ok(())
}

fn parse_rational(text: &str) -> Result<BigRational, Failure> {
    let bad = || Failure::Validation(format!("`{text}` is not a rational p or p/q"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let num: BigInt = num.trim().parse().map_err(|_| bad())?;
    let den: BigInt = den.trim().parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Failure::Validation("zero denominator".into()));
    }
    Ok(BigRational::new(num, den))
}

fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
