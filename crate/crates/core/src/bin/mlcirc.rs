use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use mlcirc::balance::balance_pipeline;
use mlcirc::bench::{fit, run_bench, write_csv, BenchConfig};
use mlcirc::circuit::{validate, Circuit};
use mlcirc::depth::reduce_depth_delta;
use mlcirc::error::Error;
use mlcirc::field::{Field, DEFAULT_PRIME};
use mlcirc::generate::{generate, GeneratorSpec};
use mlcirc::text::{parse, serialize};
use mlcirc::verify::{check_equivalence, structural_report};

const EXIT_NOT_EQUIVALENT: u8 = 1;
const EXIT_BAD_INPUT: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;
const EXIT_BUDGET: u8 = 5;
const EXIT_IO: u8 = 6;

#[derive(Parser)]
#[command(name = "mlcirc", version, about = "Balancing and depth reduction for multilinear algebraic circuits")]
struct Cli {
    /// Field modulus
    #[arg(long, global = true, env = "MLCIRC_PRIME", default_value_t = DEFAULT_PRIME)]
    prime: u64,
    #[arg(long, global = true, env = "MLCIRC_SEED", default_value_t = 0)]
    seed: u64,
    /// Monomial budget for exact expansions
    #[arg(long, global = true, env = "MLCIRC_BUDGET", default_value_t = 1 << 20)]
    budget: u64,
    /// Print failures as JSON on stderr
    #[arg(long, global = true)]
    error_json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    ProductOfSums,
    RandomMultilinear,
    RandomMultiKIc,
    FullMultilinear,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a circuit file; diagnostics go to stderr
    Validate { file: PathBuf },
    /// Structural statistics
    Stats {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Normalize and balance
    Balance {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Balance, then reduce to product-depth DELTA
    Reduce {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        delta: u32,
        #[arg(long)]
        t: Option<u32>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the layered JSON form
        #[arg(long)]
        layered: Option<PathBuf>,
    },
    /// Exit 0 iff both circuits compute the same polynomial
    Verify {
        a: PathBuf,
        b: PathBuf,
        /// Exact comparison when expansions fit; defaults to --budget
        #[arg(long)]
        exact_budget: Option<u64>,
        #[arg(long, default_value_t = 20)]
        trials: u64,
    },
    /// Generate a circuit
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        gates: Option<usize>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the bound-ratio suite
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Where to write the per-group fit as CSV
        #[arg(long)]
        fit: Option<PathBuf>,
    },
}

/// Failure with an exit class.
struct Failure {
    code: u8,
    kind: &'static str,
    err: anyhow::Error,
}

fn classify(err: anyhow::Error) -> Failure {
    let (code, kind) = match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. } | Error::Invalid(_)) => (EXIT_BAD_INPUT, "bad_input"),
        Some(Error::NotPrime(_) | Error::ModulusTooLarge(_)) => (EXIT_PRECONDITION, "bad_field"),
        Some(Error::ExpansionTooLarge { .. } | Error::TooManyProofTrees { .. }) => (EXIT_BUDGET, "budget"),
        Some(Error::IncompatibleArity) => (EXIT_NOT_EQUIVALENT, "incompatible"),
        Some(_) => (EXIT_PRECONDITION, "precondition"),
        None if err.downcast_ref::<std::io::Error>().is_some() => (EXIT_IO, "io"),
        None if err.downcast_ref::<serde_json::Error>().is_some() => (EXIT_BAD_INPUT, "bad_input"),
        None => (EXIT_IO, "io"),
    };
    Failure { code, kind, err }
}

fn read_circuit(path: &Path, field: Field) -> Result<Circuit> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let c = parse(&src, field).with_context(|| format!("parsing {}", path.display()))?;
    let diags = validate(&c);
    if !diags.is_empty() {
        return Err(anyhow::Error::new(Error::Invalid(diags)).context(format!("validating {}", path.display())));
    }
    Ok(c)
}

fn write_out(path: &Path, body: &str) -> Result<()> {
    if path == Path::new("-") {
        std::io::stdout().write_all(body.as_bytes())?;
        return Ok(());
    }
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn run(cli: &Cli) -> Result<u8> {
    let field = Field::new(cli.prime)?;
    let budget = cli.budget as u128;
    match &cli.cmd {
        Cmd::Validate { file } => {
            let src = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let c = parse(&src, field)?;
            let diags = validate(&c);
            if cli.error_json && !diags.is_empty() {
                let body = json!({"error": "bad_input", "exit_code": EXIT_BAD_INPUT, "diagnostics": diags});
                eprintln!("{body}");
            } else {
                for d in &diags {
                    eprintln!("{}: {d}", file.display());
                }
            }
            Ok(if diags.is_empty() { 0 } else { EXIT_BAD_INPUT })
        }
        Cmd::Stats { file, json } => {
            let c = read_circuit(file, field)?;
            let rep = structural_report(&c, budget);
            if *json {
                print!("{}", to_json(&rep)?);
            } else {
                println!("name            {}", c.name());
                println!("n               {}", rep.n);
                println!("size            {}", rep.size);
                println!("gates           {} ({} input, {} const, {} add, {} mul)", rep.gates, rep.inputs, rep.consts, rep.adds, rep.muls);
                println!("depth           {}", rep.depth);
                println!("product depth   {}", rep.product_depth);
                println!("max fan-in      add {} mul {}", rep.max_add_fanin, rep.max_mul_fanin);
                println!("top fan-in      {}", rep.top_fanin);
                println!("k               {}", rep.k);
                println!("|Var(output)|   {}", rep.var_output_total);
                match rep.degree {
                    Some(d) if rep.degree_approximate => println!("degree          >= {d} (sampled)"),
                    Some(d) => println!("degree          {d}"),
                    None => println!("degree          - (zero polynomial)"),
                }
            }
            Ok(0)
        }
        Cmd::Balance { input, output, report } => {
            let c = read_circuit(input, field)?;
            let (out, rep) = balance_pipeline(&c)?;
            write_out(output, &serialize(&out))?;
            if let Some(r) = report {
                write_out(r, &to_json(&rep)?)?;
            }
            Ok(0)
        }
        Cmd::Reduce { input, output, delta, t, report, layered } => {
            let c = read_circuit(input, field)?;
            let (l, rep) = reduce_depth_delta(&c, *delta, *t, budget)?;
            write_out(output, &serialize(&l.to_circuit().with_name(c.name())))?;
            if let Some(r) = report {
                write_out(r, &to_json(&rep)?)?;
            }
            if let Some(p) = layered {
                write_out(p, &to_json(&l.to_json())?)?;
            }
            Ok(0)
        }
        Cmd::Verify { a, b, exact_budget, trials } => {
            let ca = read_circuit(a, field)?;
            let cb = read_circuit(b, field)?;
            let budget = exact_budget.map_or(budget, |v| v as u128);
            let outcome = check_equivalence(&ca, &cb, budget, *trials, cli.seed);
            println!("{}", serde_json::to_string(&outcome)?);
            Ok(if outcome.verdict.is_equivalent() { 0 } else { EXIT_NOT_EQUIVALENT })
        }
        Cmd::Gen { family, n, gates, k, blocks, width, output } => {
            let need = |v: Option<usize>, name: &str| {
                v.ok_or_else(|| Error::InvalidSpec(format!("--{name} is required for this family")))
            };
            let spec = match family {
                FamilyArg::ProductOfSums => GeneratorSpec::product_of_sums(need(*blocks, "blocks")?, need(*width, "width")?),
                FamilyArg::RandomMultilinear => GeneratorSpec::random_multilinear(need(*gates, "gates")?, need(*n, "n")?, cli.seed),
                FamilyArg::RandomMultiKIc => {
                    let k = k.ok_or_else(|| Error::InvalidSpec("--k is required for this family".into()))?;
                    GeneratorSpec::random_multi_k_ic(need(*gates, "gates")?, k, need(*n, "n")?, cli.seed)
                }
                FamilyArg::FullMultilinear => GeneratorSpec::full_multilinear(need(*n, "n")?),
            };
            let c = generate(&spec, field)?;
            write_out(output, &serialize(&c))?;
            Ok(0)
        }
        Cmd::Bench { config, output, fit: fit_path } => {
            let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
            let cfg: BenchConfig = serde_json::from_str(&text).context("parsing bench config")?;
            let rows = run_bench(&cfg, field)?;
            let mut buf = Vec::new();
            write_csv(&mut buf, &rows)?;
            write_out(output, std::str::from_utf8(&buf)?)?;
            let fits = fit(&rows);
            for f in &fits {
                println!(
                    "{} delta={} t={} rows={} C in [{:.3}, {:.3}] mean {:.3} spread {:.2}",
                    f.family, f.delta, f.t, f.rows, f.c_min, f.c_max, f.c_mean, f.spread
                );
            }
            if let Some(p) = fit_path {
                let mut buf = Vec::new();
                write_csv(&mut buf, &fits)?;
                write_out(p, std::str::from_utf8(&buf)?)?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let f = classify(err);
            if cli.error_json {
                let diagnostics = match f.err.downcast_ref::<Error>() {
                    Some(Error::Invalid(d)) => serde_json::to_value(d).unwrap_or_default(),
                    _ => json!([]),
                };
                let body = json!({
                    "error": f.kind,
                    "exit_code": f.code,
                    "message": format!("{:#}", f.err),
                    "diagnostics": diagnostics,
                });
                eprintln!("{body}");
            } else {
                eprintln!("error: {:#}", f.err);
                if let Some(Error::Invalid(diags)) = f.err.downcast_ref::<Error>() {
                    for d in diags {
                        eprintln!("  {d}");
                    }
                }
            }
            ExitCode::from(f.code)
        }
    }
}
