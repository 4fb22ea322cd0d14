use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use hqx_core::family::{build_lambda_h, specialize_h, HilbertFamily};
use hqx_core::hecke_spectral::{
    aj_scalar, euler_e, euler_e0, euler_e1, euler_e1_norm, ordinary_data, q_f_polynomial, ramanujan_check,
    spectral_data, twist_index,
};
use hqx_core::pipeline::{apply_ops, parse_ops, Expansion, PipelineError};
use hqx_core::qexpansion::make_formal_eigenform;
use hqx_core::suites::{run_suite, SuiteParams, SUITES};
use hqx_core::symbolic::{random_seed_table, Report};
use hqx_core::{Error, HilbertQExp, PadicNum, PrimeSplit, QuadField, QuadInt, SCHEMA};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "hqx", version, about = "p-adic q-expansions of Hilbert modular forms over real quadratic fields")]
struct Cli {
    /// Seed for randomized trials and random eigenform seeds.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Field data of Q(sqrt D): discriminant, fundamental unit, norm -1 flag.
    Field {
        #[arg(long = "D")]
        d: i64,
        /// Accept fields whose fundamental unit has norm +1.
        #[arg(long)]
        allow_norm_plus_one: bool,
    },
    /// Splitting data of p in Q(sqrt D).
    Split {
        #[arg(long = "D")]
        d: i64,
        #[arg(long)]
        p: u64,
        #[arg(long, env = "PREC_DEFAULT", default_value_t = 6)]
        prec: u32,
    },
    /// Totally positive integers of trace at most the bound.
    Enumerate {
        #[arg(long = "D")]
        d: i64,
        #[arg(long)]
        bound: u64,
        #[arg(long)]
        include_zero: bool,
    },
    /// A formal simultaneous eigenform for the Hecke operators above p.
    Eigenform {
        #[arg(long = "D")]
        d: i64,
        #[arg(long)]
        p: u64,
        #[arg(long, env = "PREC_DEFAULT", default_value_t = 6)]
        prec: u32,
        #[arg(long, allow_hyphen_values = true)]
        a_pi: String,
        #[arg(long, allow_hyphen_values = true)]
        a_pi_prime: String,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        bound: u64,
        /// JSON list of {"nu": [x, y], "value": "..."} giving the coefficients
        /// at indices prime to p; random from --seed when absent.
        #[arg(long)]
        seeds: Option<PathBuf>,
    },
    /// Runs an operator pipeline described by a JSON spec ("-" for stdin).
    Apply {
        spec: PathBuf,
        #[arg(long, env = "PREC_DEFAULT", default_value_t = 6)]
        prec: u32,
    },
    /// Runs a verification suite; exits 1 when any check fails.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        k: Option<i64>,
        #[arg(long)]
        t: Option<i64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "D")]
        d: Option<i64>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, env = "PREC_DEFAULT", default_value_t = 6)]
        prec: u32,
    },
    /// Unit root data and Euler factors of an ordinary elliptic eigenform,
    /// and E(f, g) when Hilbert eigenvalues are given.
    Euler {
        #[arg(long, allow_hyphen_values = true)]
        bp: BigInt,
        #[arg(long)]
        k0: i64,
        #[arg(long)]
        p: u64,
        #[arg(long, env = "PREC_DEFAULT", default_value_t = 6)]
        prec: u32,
        #[arg(long, allow_hyphen_values = true, requires_all = ["a_pi_prime", "k"])]
        a_pi: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        a_pi_prime: Option<String>,
        #[arg(long)]
        k: Option<i64>,
        #[arg(long)]
        t: Option<i64>,
    },
    /// Both scalar factors of the Gross-Zagier formula.
    AjScalar {
        #[arg(long)]
        k: i64,
        #[arg(long)]
        k0: i64,
        #[arg(long)]
        p: u64,
        #[arg(long, env = "PREC_DEFAULT", default_value_t = 6)]
        prec: u32,
        #[arg(long, allow_hyphen_values = true)]
        a_pi: String,
        #[arg(long, allow_hyphen_values = true)]
        a_pi_prime: String,
        #[arg(long, allow_hyphen_values = true)]
        bp: BigInt,
    },
    /// Specializes the twisted restriction of a family at (j, s).
    FamilySpecialize {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        j: i64,
        #[arg(long, allow_hyphen_values = true)]
        s: i64,
        /// Depth of the ordinary projection; none when absent.
        #[arg(long)]
        depth: Option<u32>,
    },
}

/// A failure carrying its exit code and machine-readable body.
struct Failure {
    code: u8,
    body: Value,
}

impl Failure {
    fn domain(e: &Error) -> Self {
        Self { code: exit_code(e), body: json!({"kind": kind(e), "message": e.to_string()}) }
    }

    fn input(msg: String) -> Self {
        Self { code: 2, body: json!({"kind": "InvalidInput", "message": msg}) }
    }

    fn pipeline(e: &PipelineError) -> Self {
        Self {
            code: exit_code(&e.error),
            body: json!({"kind": kind(&e.error), "message": e.error.to_string(), "op_index": e.index, "op": e.op}),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::domain(&e)
    }
}

/// 3 for an exhausted truncation bound, 2 for every other domain error.
fn exit_code(e: &Error) -> u8 {
    if matches!(e, Error::InsufficientBound { .. }) {
        3
    } else {
        2
    }
}

fn kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

type CliResult = Result<Outcome, Failure>;

/// Output document and whether it reports success.
struct Outcome {
    doc: Value,
    ok: bool,
}

impl From<Value> for Outcome {
    fn from(doc: Value) -> Self {
        Self { doc, ok: true }
    }
}

fn split_for(d: i64, p: u64, prec: u32) -> Result<Arc<PrimeSplit>, Error> {
    Ok(Arc::new(QuadField::new(d)?.split_prime(p, prec)?))
}

/// Parses an integer or a fraction `a/b` into the base ring.
fn parse_padic(s: &str, p: u64, prec: u32) -> Result<PadicNum, Failure> {
    let r: BigRational = s.parse().map_err(|_| Failure::input(format!("not a rational number: {s:?}")))?;
    if r.is_integer() {
        return Ok(PadicNum::from_bigint(p, r.numer(), prec as i64));
    }
    if (r.denom() % BigInt::from(p)) == BigInt::from(0) {
        return Err(Error::NotPIntegral(p).into());
    }
    Ok(PadicNum::from_rational(p, &r, prec as i64))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| Failure::input(format!("stdin: {e}")))?
    } else {
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn cmd_field(d: i64, allow_norm_plus_one: bool) -> CliResult {
    let field = QuadField::with_options(d, !allow_norm_plus_one)?;
    let u = field.fund_unit();
    Ok(json!({
        "schema": SCHEMA,
        "D": field.d(),
        "disc": field.disc(),
        "basis": if field.basis_shift() == 1 { "(1+sqrt D)/2" } else { "sqrt D" },
        "fund_unit": [u.x(), u.y()],
        "fund_unit_norm": u.norm(),
        "has_norm_minus_one": field.has_norm_minus_one(),
    })
    .into())
}

fn cmd_split(d: i64, p: u64, prec: u32) -> CliResult {
    let s = split_for(d, p, prec)?;
    Ok(serde_json::to_value(s.summary()).expect("serializable").into())
}

fn cmd_enumerate(d: i64, bound: u64, include_zero: bool) -> CliResult {
    let field = QuadField::with_options(d, false)?;
    let elems: Vec<Value> = field
        .enumerate_totally_positive(bound, include_zero)
        .iter()
        .map(|v| json!({"nu": [v.x(), v.y()], "trace": v.trace(), "norm": v.norm()}))
        .collect();
    Ok(json!({"schema": SCHEMA, "D": d, "bound": bound, "count": elems.len(), "elements": elems}).into())
}

#[derive(Deserialize)]
struct SeedRecord {
    nu: [i64; 2],
    value: String,
}

#[allow(clippy::too_many_arguments)]
fn eigenform(
    d: i64,
    p: u64,
    prec: u32,
    a_pi: &str,
    a_pi_prime: &str,
    k: i64,
    bound: u64,
    seeds: Option<&Value>,
    rng_seed: u64,
) -> Result<HilbertQExp, Failure> {
    let split = split_for(d, p, prec)?;
    let a = parse_padic(a_pi, p, prec)?;
    let ap = parse_padic(a_pi_prime, p, prec)?;
    let f = match seeds {
        Some(v) => {
            let records: Vec<SeedRecord> =
                serde_json::from_value(v.clone()).map_err(|e| Failure::input(format!("seeds: {e}")))?;
            let mut table = std::collections::BTreeMap::new();
            for r in records {
                table.insert(split.field().int(r.nu[0], r.nu[1]), parse_padic(&r.value, p, prec)?);
            }
            make_formal_eigenform(split, |nu: &QuadInt| table.get(nu).cloned(), &a, &ap, k, bound)?
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let table = random_seed_table(&mut rng, p, prec);
            make_formal_eigenform(split, table, &a, &ap, k, bound)?
        }
    };
    Ok(f)
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Source {
    Expansion {
        expansion: Value,
    },
    Eigenform {
        a_pi: String,
        a_pi_prime: String,
        k: i64,
        bound: u64,
        #[serde(default)]
        seeds: Option<Value>,
        #[serde(default)]
        seed: Option<u64>,
    },
    Family {
        file: PathBuf,
        s: i64,
    },
}

#[derive(Deserialize)]
struct PipelineSpec {
    #[serde(rename = "D")]
    d: Option<i64>,
    p: Option<u64>,
    precision: Option<u32>,
    source: Source,
    #[serde(default)]
    ops: Vec<String>,
    output: Option<PathBuf>,
}

fn cmd_apply(spec_path: &Path, default_prec: u32, rng_seed: u64) -> CliResult {
    let spec: PipelineSpec = serde_json::from_value(read_json(spec_path)?)
        .map_err(|e| Failure::input(format!("pipeline spec: {e}")))?;
    let ops = parse_ops(&spec.ops)?;
    let prec = spec.precision.unwrap_or(default_prec);
    let input = match spec.source {
        Source::Expansion { expansion } => {
            let x = Expansion::from_json(&expansion)?;
            if let Expansion::Hilbert(f) = &x {
                if spec.d.is_some_and(|d| d != f.field().d()) || spec.p.is_some_and(|p| p != f.split().p()) {
                    return Err(Failure::input("expansion does not match the pipeline's D and p".into()));
                }
            }
            x
        }
        Source::Eigenform { a_pi, a_pi_prime, k, bound, seeds, seed } => {
            let (Some(d), Some(p)) = (spec.d, spec.p) else {
                return Err(Failure::input("an eigenform source needs \"D\" and \"p\"".into()));
            };
            let f = eigenform(d, p, prec, &a_pi, &a_pi_prime, k, bound, seeds.as_ref(), seed.unwrap_or(rng_seed))?;
            Expansion::Hilbert(f)
        }
        Source::Family { file, s } => {
            let base = spec_path.parent().filter(|_| spec_path.as_os_str() != "-").unwrap_or(Path::new("."));
            let fam = HilbertFamily::from_json(&read_json(&base.join(file))?)?;
            Expansion::Hilbert(fam.specialize(s)?)
        }
    };
    let (out, provenance) = apply_ops(input, &ops).map_err(|e| Failure::pipeline(&e))?;
    let doc = json!({"schema": SCHEMA, "result": out.to_json(), "provenance": provenance});
    if let Some(path) = spec.output {
        let text = serde_json::to_string_pretty(&doc).expect("serializable");
        fs::write(&path, text + "\n").map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    Ok(doc.into())
}

fn cmd_verify(suite: &str, params: SuiteParams) -> CliResult {
    let report: Report = run_suite(suite, &params)?;
    let ok = report.all_passed();
    Ok(Outcome { doc: report.to_json(), ok })
}

#[allow(clippy::too_many_arguments)]
fn cmd_euler(
    bp: &BigInt,
    k0: i64,
    p: u64,
    prec: u32,
    a_pi: Option<&str>,
    a_pi_prime: Option<&str>,
    k: Option<i64>,
    t: Option<i64>,
) -> CliResult {
    let b = PadicNum::from_bigint(p, bp, prec as i64);
    let mut doc = json!({
        "schema": SCHEMA,
        "p": p,
        "prec": prec,
        "k0": k0,
        "b_p": bp.to_string(),
        "ramanujan": ramanujan_check(bp, p, k0),
        "E1_over_both_roots": euler_e1_norm(&b, k0, prec),
    });
    let od = match ordinary_data(&b, k0, prec) {
        Ok(od) => od,
        Err(e) if a_pi.is_none() => {
            doc["ordinary"] = json!(false);
            doc["note"] = json!(e.to_string());
            return Ok(doc.into());
        }
        Err(e) => return Err(e.into()),
    };
    doc["ordinary"] = json!(true);
    doc["beta0"] = json!(od.beta0);
    doc["beta1"] = json!(od.beta1);
    doc["E0"] = json!(euler_e0(&od)?);
    doc["E1"] = json!(euler_e1(&od));
    if let (Some(a), Some(ap), Some(k)) = (a_pi, a_pi_prime, k) {
        let sd = spectral_data(&parse_padic(a, p, prec)?, &parse_padic(ap, p, prec)?, k, prec)?;
        let t = match t {
            Some(t) => t,
            None => twist_index(k, k0)?,
        };
        doc["t"] = json!(t);
        doc["E"] = json!(euler_e(&sd, &od.beta1, t)?);
        doc["Q_f"] = json!(q_f_polynomial(&sd)?);
    }
    Ok(doc.into())
}

#[allow(clippy::too_many_arguments)]
fn cmd_aj_scalar(k: i64, k0: i64, p: u64, prec: u32, a_pi: &str, a_pi_prime: &str, bp: &BigInt) -> CliResult {
    let sd = spectral_data(&parse_padic(a_pi, p, prec)?, &parse_padic(a_pi_prime, p, prec)?, k, prec)?;
    let od = ordinary_data(&PadicNum::from_bigint(p, bp, prec as i64), k0, prec)?;
    let t = twist_index(k, k0)?;
    let s = aj_scalar(&sd, &od, t)?;
    Ok(json!({
        "schema": SCHEMA,
        "k": k,
        "k0": k0,
        "t": s.t,
        "sign": s.sign,
        "factorial": s.factorial.to_string(),
        "aj_side": s.aj_side,
        "l_side": s.l_side,
        "E0": s.e0,
        "E1": s.e1,
        "E": s.e,
    })
    .into())
}

fn cmd_family_specialize(file: &Path, j: i64, s: i64, depth: Option<u32>) -> CliResult {
    let fam = HilbertFamily::from_json(&read_json(file)?)?;
    let h = build_lambda_h(&fam)?;
    Ok(specialize_h(&h, j, s, depth)?.to_json().into())
}

fn run(cli: Cli) -> CliResult {
    let seed = cli.seed;
    match cli.command {
        Command::Field { d, allow_norm_plus_one } => cmd_field(d, allow_norm_plus_one),
        Command::Split { d, p, prec } => cmd_split(d, p, prec),
        Command::Enumerate { d, bound, include_zero } => cmd_enumerate(d, bound, include_zero),
        Command::Eigenform { d, p, prec, a_pi, a_pi_prime, k, bound, seeds } => {
            let seeds = seeds.map(|path| read_json(&path)).transpose()?;
            Ok(eigenform(d, p, prec, &a_pi, &a_pi_prime, k, bound, seeds.as_ref(), seed)?.to_json().into())
        }
        Command::Apply { spec, prec } => cmd_apply(&spec, prec, seed),
        Command::Verify { suite, trials, k, t, n, d, p, prec } => {
            cmd_verify(&suite, SuiteParams { trials, seed, k, t, n, d, p, precision: prec })
        }
        Command::Euler { bp, k0, p, prec, a_pi, a_pi_prime, k, t } => {
            cmd_euler(&bp, k0, p, prec, a_pi.as_deref(), a_pi_prime.as_deref(), k, t)
        }
        Command::AjScalar { k, k0, p, prec, a_pi, a_pi_prime, bp } => {
            cmd_aj_scalar(k, k0, p, prec, &a_pi, &a_pi_prime, &bp)
        }
        Command::FamilySpecialize { file, j, s, depth } => cmd_family_specialize(&file, j, s, depth),
    }
}

fn emit(mut out: impl Write, doc: &Value) {
    // a closed pipe on the reading side is not an error of ours
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(doc).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            emit(std::io::stdout().lock(), &out.doc);
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(f) => {
            emit(std::io::stderr().lock(), &json!({"schema": SCHEMA, "error": f.body}));
            ExitCode::from(f.code)
        }
    }
}
