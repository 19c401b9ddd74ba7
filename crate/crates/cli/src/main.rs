use clap::{Args, Parser, Subcommand};
use sli::clifford::Sign;
use sli::fields::FieldConfig;
use sli::kernels::{kernel_table, KernelId};
use sli::lineint::{lineint_table, LineFn};
use sli::report::{run_suites, RunOptions};
use sli::slayer::{bose_results, fermi_results, Constants};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "sli", version, about = "Surface-layer integral verification and tabulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a JSON report.
    Verify(VerifyArgs),
    /// Tabulate a momentum-space kernel as CSV.
    Kernels(KernelArgs),
    /// Tabulate a piecewise line-integral weight function as CSV.
    Lineint(LineintArgs),
    /// Tabulate the mass-shell convolution closed forms as CSV.
    Convolution(ConvolutionArgs),
    /// Evaluate surface-layer functionals of configured fields.
    Slayer {
        #[command(subcommand)]
        command: SlayerCommand,
    },
    /// Summarize a JSON report written by `verify`.
    Report {
        /// Report file.
        path: PathBuf,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated suites, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    suites: Vec<String>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Tolerance override `CHECK=VALUE`, e.g. `slayer.bose_conservation=1e-9`.
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Field configuration (JSON); the built-in default is used otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    /// Kernel name, e.g. IK0_over_t2.
    #[arg(long)]
    kernel: String,
    /// ω range `LO:HI`.
    #[arg(long, value_parser = parse_range, default_value = "-3:3", allow_hyphen_values = true)]
    omega: (f64, f64),
    /// k range `LO:HI`.
    #[arg(long, value_parser = parse_range, default_value = "0.1:3", allow_hyphen_values = true)]
    k: (f64, f64),
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LineintArgs {
    /// One of J, I, U, Jtilde, V.
    #[arg(long)]
    function: String,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    lo: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    hi: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvolutionArgs {
    /// Query `Q0,Q1,Q2,Q3,M`; repeatable.
    #[arg(long = "query", value_parser = parse_query, required = true, allow_hyphen_values = true)]
    queries: Vec<([f64; 4], f64)>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SlayerCommand {
    /// Evaluate σ and (·,·) on the first two configured fields of each kind.
    Eval(EvalArgs),
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    config: PathBuf,
    /// Sign convention of the fermionic inner product, `+` or `-`.
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    chirality_sign: String,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, v) = s.split_once('=').ok_or("expected CHECK=VALUE")?;
    Ok((name.to_string(), v.parse().map_err(|e| format!("{e}"))?))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    Ok((a.parse().map_err(|e| format!("{e}"))?, b.parse().map_err(|e| format!("{e}"))?))
}

fn parse_query(s: &str) -> Result<([f64; 4], f64), String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("{e}"))).collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b, c, d, m] => Ok(([*a, *b, *c, *d], *m)),
        _ => Err("expected Q0,Q1,Q2,Q3,M".into()),
    }
}

/// A failure with its exit code.
struct Failure(u8, String);

fn config_error(e: impl std::fmt::Display) -> Failure {
    Failure(EXIT_CONFIG, e.to_string())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| config_error(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let mut opts = RunOptions::new(a.seed);
    opts.tolerances.extend(a.tol);
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        opts = opts.with_fields_json(&text).map_err(config_error)?;
    }
    let report = run_suites(&a.suites, &opts).map_err(config_error)?;
    emit(&a.out, &(report.to_json() + "\n"))?;
    for f in report.failures() {
        eprintln!("FAIL {} value={} tolerance={} ({})", f.check, f.value, f.tolerance, f.paper_ref);
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure(EXIT_FAIL, format!("{} check(s) failed", report.failures().count())))
    }
}

fn slayer_eval(a: EvalArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.config).map_err(|e| config_error(format!("{}: {e}", a.config.display())))?;
    let cfg = FieldConfig::from_json_str(&text).map_err(config_error)?;
    let sign = match a.chirality_sign.as_str() {
        "+" | "+1" | "1" => Sign::Plus,
        "-" | "-1" => Sign::Minus,
        s => return Err(config_error(format!("chirality sign must be + or -, got {s}"))),
    };
    let k = Constants {
        delta: a.delta,
        ..Constants::default()
    };
    let mut results = Vec::new();
    if let [u, v, ..] = cfg.maxwell.as_slice() {
        results.extend(bose_results(&cfg.setting, u, v, &k).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?);
    }
    if let [u, v, ..] = cfg.jets.as_slice() {
        results.extend(fermi_results(&cfg.setting, u, v, sign, &k).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?);
    }
    let json = serde_json::to_string_pretty(&results).map_err(config_error)?;
    emit(&a.out, &(json + "\n"))
}

fn summarize(path: &PathBuf) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(config_error)?;
    let checks = v["checks"].as_array().ok_or_else(|| config_error("report has no `checks` array"))?;
    let mut failed = 0;
    for c in checks {
        let status = c["status"].as_str().unwrap_or("fail");
        if status != "pass" {
            failed += 1;
        }
        println!("{:<4} {:<55} value={} tolerance={}", status.to_uppercase(), c["check"].as_str().unwrap_or("?"), c["value"], c["tolerance"]);
    }
    println!("{} checks, {} failed", checks.len(), failed);
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure(EXIT_FAIL, format!("{failed} check(s) failed")))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Verify(a) => verify(a),
        Command::Kernels(a) => {
            let id = KernelId::from_name(&a.kernel).ok_or_else(|| config_error(format!("unknown kernel `{}`", a.kernel)))?;
            emit(&a.out, &kernel_table(id, a.omega, a.k, a.step))
        }
        Command::Lineint(a) => {
            let f = LineFn::from_name(&a.function).ok_or_else(|| config_error(format!("unknown function `{}`", a.function)))?;
            emit(&a.out, &lineint_table(f, a.lo, a.hi, a.step))
        }
        Command::Convolution(a) => {
            let table = sli::convolution::convolution_table(&a.queries).map_err(config_error)?;
            emit(&a.out, &table)
        }
        Command::Slayer {
            command: SlayerCommand::Eval(a),
        } => slayer_eval(a),
        Command::Report { path } => summarize(&path),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
