use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use ncfield::ncrank::{self, RankMethod};
use ncfield::{
    rmtlab, spectra, Confidence, Error, LinearPencil, MatrixTuple, PolyMatrix, RankOptions, RatExpr,
    RationalFunction,
};
use serde_json::{json, Value};

/// Bordered pencils up to this size may be decided by exhaustive block search.
const EXACT_ZERO_TEST_LIMIT: usize = 5;

#[derive(Parser)]
#[command(name = "ncfield", version, about = "Rational functions over the free field and the spectra of linear pencils")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RankArgs {
    /// Seed for every randomized tester.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Blow-up dimension; defaults to the pencil size.
    #[arg(long)]
    blowup_dim: Option<usize>,
    #[arg(long, default_value_t = 3)]
    trials: usize,
}

impl RankArgs {
    fn options(&self) -> RankOptions {
        RankOptions { dim: self.blowup_dim, trials: self.trials, ..RankOptions::with_seed(self.seed) }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Certificate,
    Blowup,
    FullBlock,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a rational expression and print its canonical form.
    Parse {
        #[arg(long)]
        expr: String,
    },
    /// Print the formal linear representation of an expression.
    Linearize {
        #[arg(long)]
        expr: String,
    },
    /// Inner rank of a linear pencil or of a square polynomial matrix.
    Rank {
        #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
        pencil: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Certificate)]
        method: Method,
        #[command(flatten)]
        rank: RankArgs,
    },
    /// Decide whether an expression is zero in the free field.
    Zerotest {
        #[arg(long)]
        expr: String,
        /// Decide by exhaustive block search when the bordered pencil is small enough.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        rank: RankArgs,
    },
    /// Evaluate an expression on a matrix tuple.
    Eval {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        tuple: PathBuf,
        #[command(flatten)]
        rank: RankArgs,
    },
    /// Atoms of the distribution of a selfadjoint pencil at a semicircular tuple.
    Atoms {
        #[arg(long)]
        pencil: PathBuf,
        #[command(flatten)]
        rank: RankArgs,
    },
    /// Entropy dimension of a selfadjoint pencil at a semicircular tuple.
    EntropyDim {
        #[arg(long)]
        pencil: PathBuf,
        #[command(flatten)]
        rank: RankArgs,
    },
    /// Hölder constant of the distribution function for a semi-flat pencil.
    Hoelder {
        #[arg(long)]
        pencil: PathBuf,
        /// Fisher information of the operator tuple; defaults to the number of variables.
        #[arg(long)]
        fisher: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Eigenvalues of the pencil evaluated at independent GUE matrices.
    Simulate {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long, default_value_t = 500)]
        dim: usize,
        #[arg(long, default_value_t = rmtlab::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// With `--format csv`, also write the JSON summary to this file.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Window widths for the modulus of continuity of the empirical distribution function.
        #[arg(long, value_delimiter = ',', default_values_t = [0.001, 0.01, 0.05, 0.1])]
        deltas: Vec<f64>,
    },
}

/// Output of a verb: the text for standard output and the exit code.
struct Outcome {
    stdout: String,
    code: u8,
}

impl Outcome {
    fn json(v: Value, code: u8) -> Self {
        Outcome { stdout: pretty(&v), code }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_pencil(path: &Path) -> anyhow::Result<LinearPencil> {
    Ok(LinearPencil::from_json(&read(path)?)?)
}

fn rank_json(cert: &ncfield::RankCertificate) -> Value {
    cert.to_json_value()
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Parse { expr } => {
            let r = RatExpr::parse(&expr)?;
            Ok(Outcome::json(
                json!({
                    "expr": r.to_string(),
                    "nvars": r.nvars(),
                    "nodes": r.nodes().len(),
                    "linear_dimension": r.linear_dimension(),
                }),
                0,
            ))
        }
        Command::Linearize { expr } => {
            let rep = ncfield::linearize(&RatExpr::parse(&expr)?);
            Ok(Outcome::json(rep.to_json_value(), 0))
        }
        Command::Rank { pencil, matrix, method, rank } => {
            let opts = rank.options();
            if let Some(path) = pencil {
                let p = load_pencil(&path)?;
                let v = match method {
                    Method::Certificate => rank_json(&ncrank::is_full(&p, &opts)?),
                    Method::Blowup | Method::FullBlock => poly_rank_json(&p.to_poly_matrix(), method, &opts)?,
                };
                return Ok(Outcome::json(v, 0));
            }
            let path = matrix.expect("clap requires --pencil or --matrix");
            let m = PolyMatrix::from_json(&read(&path)?)?;
            let v = match method {
                Method::Certificate => rank_json(&ncrank::certify_poly_matrix(&m, &opts)?),
                _ => poly_rank_json(&m, method, &opts)?,
            };
            Ok(Outcome::json(v, 0))
        }
        Command::Zerotest { expr, exact, rank } => {
            let opts = rank.options();
            let rf = RationalFunction::parse(&expr, &opts)?;
            let rep = rf.rep();
            if exact && rep.dim() >= EXACT_ZERO_TEST_LIMIT {
                eprintln!("note: representation of dimension {} is too large for the exact test; using the randomized one", rep.dim());
            }
            let (zero, confidence) = if exact && rep.dim() < EXACT_ZERO_TEST_LIMIT {
                let bordered = ncrank::bordered_pencil(&rep.u, &rep.a, &rep.v)?;
                let rho = ncrank::inner_rank_poly(&bordered.to_poly_matrix(), RankMethod::FullBlock, &opts)?;
                (rho == rep.dim(), Confidence::Exact)
            } else {
                (rf.is_zero()?, Confidence::Randomized { trials: opts.trials, tol: opts.rel_tol })
            };
            let v = json!({
                "zero": zero,
                "expr": rf.source().map(|s| s.to_string()),
                "dimension": rep.dim(),
                "confidence": confidence.to_json_value(),
            });
            Ok(Outcome::json(v, if zero { 0 } else { 1 }))
        }
        Command::Eval { expr, tuple, rank } => {
            let rf = RationalFunction::parse(&expr, &rank.options())?;
            let x = MatrixTuple::from_json(&read(&tuple)?)?;
            let value = rf.evaluate(&x)?;
            Ok(Outcome::json(
                json!({"dim": x.dim(), "value": ncfield::io::cmat_to_value(&value), "norm": value.norm()}),
                0,
            ))
        }
        Command::Atoms { pencil, rank } => {
            let report = spectra::full_spectrum(&load_pencil(&pencil)?, &rank.options())?;
            Ok(Outcome::json(report.to_json_value(), 0))
        }
        Command::EntropyDim { pencil, rank } => {
            let report = spectra::full_spectrum(&load_pencil(&pencil)?, &rank.options())?;
            let v = json!({
                "entropy_dimension": spectra::entropy_dimension(&report),
                "atoms": report.atoms.len(),
                "validity": "valid under delta*-maximality of the operator tuple",
            });
            Ok(Outcome::json(v, 0))
        }
        Command::Hoelder { pencil, fisher, seed } => {
            let p = load_pencil(&pencil)?;
            let fisher = fisher.unwrap_or(p.nvars() as f64);
            let report = spectra::hoelder_constant(&p, fisher, seed)?;
            Ok(Outcome::json(report.to_json_value(), 0))
        }
        Command::Simulate { pencil, dim, samples, seed, format, summary, deltas } => {
            let p = load_pencil(&pencil)?;
            let predicted = spectra::full_spectrum(&p, &RankOptions::with_seed(seed))?;
            let spectra = rmtlab::pencil_spectra(&p, dim, samples, seed)?;
            let lambdas: Vec<f64> = predicted.atoms.iter().map(|a| a.lambda).collect();
            let weights: Vec<(f64, f64)> = predicted.atoms.iter().map(|a| (a.lambda, a.weight)).collect();
            let empirical = rmtlab::empirical_atoms(&spectra, &lambdas, None);
            let summary_value = rmtlab::summary_json(&spectra, &weights, &empirical, &deltas);
            match format {
                Format::Json => Ok(Outcome::json(summary_value, 0)),
                Format::Csv => {
                    if let Some(path) = summary {
                        fs::write(&path, pretty(&summary_value)).with_context(|| format!("writing {}", path.display()))?;
                    }
                    let mut csv = String::from("sample,seed,index,eigenvalue\n");
                    for (s, sample) in spectra.iter().enumerate() {
                        for (k, e) in sample.eigenvalues.iter().enumerate() {
                            csv.push_str(&format!("{s},{},{k},{e}\n", sample.seed));
                        }
                    }
                    Ok(Outcome { stdout: csv, code: 0 })
                }
            }
        }
    }
}

fn poly_rank_json(m: &PolyMatrix, method: Method, opts: &RankOptions) -> anyhow::Result<Value> {
    let (method, name, confidence) = match method {
        Method::FullBlock => (RankMethod::FullBlock, "full_block", Confidence::Exact),
        _ => (RankMethod::Blowup, "blowup", Confidence::Randomized { trials: opts.trials, tol: opts.rel_tol }),
    };
    let rho = ncrank::inner_rank_poly(m, method, opts)?;
    Ok(json!({"rho": rho, "method": name, "confidence": confidence.to_json_value()}))
}

/// 1 for a semantic negative, 3 for an internal inconsistency, 2 for bad input.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Inconsistent(_)) | Some(Error::CertificateInvalid(_)) => 3,
        Some(Error::Domain { .. })
        | Some(Error::NotSemiFlat(_))
        | Some(Error::DivisionByZeroFunction)
        | Some(Error::NotReducible(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.stdout.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(out.code)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
