//! `pyth`: command-line front end for Pythagorean modules.
//!
//! Exit status: 0 success, 1 validation or parse failure, 2 indeterminate,
//! 3 resource bound, 64 usage error.

mod catalog;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use pyth_core::classify::{classification_report, fingerprint, Diffuseness};
use pyth_core::decompose::{decompose_with_seed, pdim};
use pyth_core::forest::parse_element;
use pyth_core::linalg::basis_vector;
use pyth_core::moduli::{orbit_distance, tangent_dimension};
use pyth_core::pmodule::{atomic_module, bernoulli_module, default_tolerance, gp_module, random_module};
use pyth_core::rep::{self, TreeVector};
use pyth_core::words::necklace_count;
use pyth_core::{unitary_equivalent, BinaryWord, CVector, Error, PModule, PhaseDiagonal, C64};

const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser)]
#[command(name = "pyth", version, about = "Pythagorean modules, their decompositions and induced representations")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Validation tolerance for loaded modules (default 1e-10·d).
    #[arg(long, global = true, env = "PYTH_TOL")]
    tol: Option<f64>,
    /// Emit compact JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check `A*A + B*B = I` for a module file.
    Validate { module: PathBuf },
    /// Full classification report.
    Classify { module: PathBuf },
    /// Pythagorean dimension.
    Pdim { module: PathBuf },
    /// Orthogonal decomposition into irreducibles plus residual.
    Decompose { module: PathBuf },
    /// Constructive unitary-equivalence test.
    Equiv { first: PathBuf, second: PathBuf },
    /// Random module of dimension `d` from the seed.
    Sample { d: usize },
    /// Atomic module `Z · m_w`; phases given in turns.
    Atomic {
        word: String,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        turns: Option<Vec<f64>>,
    },
    /// Weighted shift from a JSON list `[[[a_re, a_im], [b_re, b_im]], ...]`.
    Gp { weights: String },
    /// Bernoulli module `(p^{1/2 + is}, (1 − p)^{1/2 + is})`.
    Bernoulli {
        p: f64,
        #[arg(allow_negative_numbers = true, default_value_t = 0.0)]
        s: f64,
    },
    /// Matrix coefficient `⟨σ(g) ξ, η⟩`.
    EvalCoeff {
        module: PathBuf,
        element: String,
        /// JSON vector `[[re, im], ...]`; default `e_0`.
        #[arg(long)]
        xi: Option<String>,
        #[arg(long)]
        eta: Option<String>,
    },
    /// Cesàro average `(1/n) Σ_{k<n} ⟨σ(g^k) ξ, η⟩`.
    Cesaro {
        module: PathBuf,
        element: String,
        n: usize,
        #[arg(long)]
        xi: Option<String>,
        #[arg(long)]
        eta: Option<String>,
        /// Largest leaf count allowed for powers of `g`.
        #[arg(long, default_value_t = rep::DEFAULT_LEAF_BOUND)]
        leaf_bound: usize,
        /// Print every running average, not just the last.
        #[arg(long)]
        series: bool,
    },
    /// Truncated 2-adic unitary applied to a tree vector file.
    TwoAdic { module: PathBuf, vector: PathBuf, k: usize },
    /// Tangent and orbit dimensions at a module.
    Tangent { module: PathBuf },
    /// Distance between unitary orbits.
    OrbitDist { first: PathBuf, second: PathBuf },
    /// Number of prime necklaces of length `d`.
    Necklaces { d: usize },
    /// Store a module and its report in a catalog directory.
    CatalogAdd { dir: PathBuf, module: PathBuf },
    /// Look up catalog entries.
    CatalogQuery {
        dir: PathBuf,
        /// Match entries with this module's fingerprint, confirming equivalence.
        module: Option<PathBuf>,
        #[arg(long)]
        hash: Option<String>,
        #[arg(long)]
        pdim: Option<usize>,
        #[arg(long)]
        kind: Option<String>,
    },
}

pub struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::InvalidArgument(_) => (1, "invalid_argument"),
            Error::Validation { .. } => (1, "validation"),
            Error::Parse { .. } => (1, "parse"),
            Error::Serde(_) => (1, "parse"),
            Error::Indeterminate(_) => (2, "indeterminate"),
            Error::Unresolved(_) => (2, "unresolved"),
            Error::Resource(_) => (3, "resource"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            kind: "io",
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure {
            code: 1,
            kind: "parse",
            message: e.to_string(),
        }
    }
}

/// What a command produced: the JSON value, a text rendering, and the exit
/// status to report alongside a successful computation.
struct Output {
    value: Value,
    text: String,
    code: u8,
}

impl Output {
    fn json<T: Serialize>(v: &T) -> Result<Output, Failure> {
        let value = serde_json::to_value(v)?;
        let text = serde_json::to_string_pretty(&value)?;
        Ok(Output { value, text, code: 0 })
    }

    fn scalar(value: Value, text: String) -> Output {
        Output { value, text, code: 0 }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: 1,
        kind: "io",
        message: format!("{}: {e}", path.display()),
    })
}

pub fn load_module(path: &Path, tol: Option<f64>) -> Result<PModule, Failure> {
    Ok(PModule::from_json_str_with_tolerance(&read(path)?, tol)?)
}

fn parse_vector(text: Option<&str>, d: usize) -> Result<CVector, Failure> {
    match text {
        None => Ok(basis_vector(d, 0)),
        Some(t) => {
            let v: pyth_core::json::VectorJson = serde_json::from_str(t)?;
            Ok(v.to_vector(d)?)
        }
    }
}

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let tol = cli.tol;
    let seed = cli.seed;
    match &cli.command {
        Command::Validate { module } => {
            let text = read(module)?;
            let v: Value = serde_json::from_str(&text)?;
            let d = v.get("d").and_then(Value::as_u64).unwrap_or(0) as usize;
            let tolerance = tol.unwrap_or_else(|| default_tolerance(d.max(1)));
            match PModule::from_json_str_with_tolerance(&text, tol) {
                Ok(m) => Ok(Output {
                    text: format!("valid: d = {}, residual {:.3e} ≤ {tolerance:.3e}", m.dim(), m.residual()),
                    value: json!({"valid": true, "d": m.dim(), "residual": m.residual(), "tolerance": tolerance}),
                    code: 0,
                }),
                Err(Error::Validation { what, residual, tolerance }) => Ok(Output {
                    text: format!("invalid: {what}, residual {residual:.3e} > {tolerance:.3e}"),
                    value: json!({"valid": false, "d": d, "residual": residual, "tolerance": tolerance, "failed": what}),
                    code: 1,
                }),
                Err(e) => Err(e.into()),
            }
        }
        Command::Classify { module } => {
            let m = load_module(module, tol)?;
            let report = classification_report(&m, seed);
            let mut out = Output::json(&report)?;
            if report.pdim.is_none() || report.diffuseness == Diffuseness::Indeterminate {
                out.code = 2;
            }
            Ok(out)
        }
        Command::Pdim { module } => {
            let p = pdim(&load_module(module, tol)?)?;
            Ok(Output::scalar(json!({"pdim": p}), p.to_string()))
        }
        Command::Decompose { module } => {
            let m = load_module(module, tol)?;
            let dec = decompose_with_seed(&m, seed)?;
            Output::json(&json!({
                "component_dims": dec.component_dims(),
                "irreducibles": dec.irreducibles,
                "residual": dec.residual,
            }))
        }
        Command::Equiv { first, second } => {
            let m1 = load_module(first, tol)?;
            let m2 = load_module(second, tol)?;
            match unitary_equivalent(&m1, &m2)? {
                Some(x) => Output::json(&json!({"equivalent": true, "intertwiner": x})),
                None => Output::json(&json!({"equivalent": false})),
            }
        }
        Command::Sample { d } => Output::json(&random_module(*d, seed)?),
        Command::Atomic { word, turns } => {
            let w: BinaryWord = word.parse()?;
            let z = match turns {
                Some(t) => PhaseDiagonal::from_turns(t)?,
                None => PhaseDiagonal::identity(w.len().max(1)),
            };
            Output::json(&atomic_module(&w, &z)?)
        }
        Command::Gp { weights } => {
            let raw: Vec<[[f64; 2]; 2]> = serde_json::from_str(weights)?;
            let z: Vec<(C64, C64)> = raw
                .iter()
                .map(|[a, b]| (C64::new(a[0], a[1]), C64::new(b[0], b[1])))
                .collect();
            Output::json(&gp_module(&z)?)
        }
        Command::Bernoulli { p, s } => Output::json(&bernoulli_module(*p, *s)?),
        Command::EvalCoeff { module, element, xi, eta } => {
            let m = load_module(module, tol)?;
            let g = parse_element(element)?;
            let xi = parse_vector(xi.as_deref(), m.dim())?;
            let eta = parse_vector(eta.as_deref(), m.dim())?;
            let z = rep::matrix_coefficient(&m, &g, &xi, &eta)?;
            Ok(Output::scalar(json!({"coefficient": complex(z)}), format!("{} {}", z.re, z.im)))
        }
        Command::Cesaro { module, element, n, xi, eta, leaf_bound, series } => {
            let m = load_module(module, tol)?;
            let g = parse_element(element)?;
            let x = TreeVector::embed(&parse_vector(xi.as_deref(), m.dim())?);
            let y = TreeVector::embed(&parse_vector(eta.as_deref(), m.dim())?);
            let all = rep::cesaro_series(&m, &g, &x, &y, *n, *leaf_bound)?;
            let last = *all.last().expect("n ≥ 1");
            let mut value = json!({"n": n, "average": complex(last)});
            if *series {
                value["series"] = Value::Array(all.iter().map(|&z| complex(z)).collect());
            }
            Ok(Output::scalar(value, format!("{} {}", last.re, last.im)))
        }
        Command::TwoAdic { module, vector, k } => {
            let m = load_module(module, tol)?;
            let v = TreeVector::from_json_str(&read(vector)?)?;
            let r = rep::two_adic_unitary(&m, &v, *k)?;
            let (residual, _) = rep::two_adic_relation(&m, &v, *k)?;
            Output::json(&json!({
                "vector": r.vector,
                "tail_bound": r.tail_bound,
                "remainder": r.remainder,
                "relation_residual": residual,
            }))
        }
        Command::Tangent { module } => Output::json(&tangent_dimension(&load_module(module, tol)?)?),
        Command::OrbitDist { first, second } => {
            let m1 = load_module(first, tol)?;
            let m2 = load_module(second, tol)?;
            Output::json(&orbit_distance(&m1, &m2, seed)?)
        }
        Command::Necklaces { d } => {
            let n = necklace_count(*d)?;
            Ok(Output::scalar(json!({"d": d, "count": n}), n.to_string()))
        }
        Command::CatalogAdd { dir, module } => {
            let m = load_module(module, tol)?;
            let entry = catalog::add(dir, &m, seed)?;
            Output::json(&entry)
        }
        Command::CatalogQuery { dir, module, hash, pdim, kind } => {
            let probe = match module {
                Some(p) => Some(load_module(p, tol)?),
                None => None,
            };
            let hits = catalog::query(dir, probe.as_ref(), hash.as_deref(), *pdim, kind.as_deref(), tol)?;
            Output::json(&json!({"entries": hits}))
        }
    }
}

/// Quantized hash of the short fingerprint; shared by catalog writes and lookups.
pub fn fingerprint_hash(m: &PModule) -> Result<String, Failure> {
    catalog::hash_fingerprint(&fingerprint(m, catalog::HASH_MAXLEN)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", out.value);
            } else {
                println!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            if cli.json {
                println!("{}", json!({"error": f.kind, "message": f.message}));
            }
            eprintln!("pyth: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
