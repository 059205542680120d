use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use condexp_lab::condexp::lyz_check;
use condexp_lab::lab::{fmt_num, opnorm_csv, parse_sweep, run_opnorm, LabConfig, Preset, Resolved};
use condexp_lab::mixed_norm::parse_exponent;
use condexp_lab::{cond_exp, mixed_norm, AscentOptions, LabError, Method, MixedExponents};

const EXIT_INVALID: u8 = 2;
const EXIT_SIZE_CAP: u8 = 3;

/// Conditional expectations, mixed norms and operator-norm estimates on
/// finite product spaces.
#[derive(Parser, Debug)]
#[command(name = "condlab", version)]
struct Cli {
    /// JSON configuration document.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Named configuration preset; fills whatever the config leaves out.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output file (default stdout).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write E(f|F) in the function format.
    Condexp,
    /// Print the mixed norm of the configured function.
    Norm(ExponentArgs),
    /// Estimate the operator norm of E(.|F) on L^p(L^q).
    Opnorm(OpnormArgs),
    /// Check whether averaging out the second factor preserves F-measurability.
    LyzCheck,
    /// Run one of the built-in experiments.
    Example {
        #[arg(value_parser = ["qiu", "pisier", "hytonen", "progressive"])]
        name: String,
    },
}

#[derive(Args, Debug)]
struct ExponentArgs {
    /// Outer exponent; accepts decimals, fractions like 4/3, or inf.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    /// Exponent of the pointwise norm on vector values.
    #[arg(long)]
    r: Option<String>,
}

#[derive(Args, Debug)]
struct OpnormArgs {
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, value_parser = ["oracle", "ascent"])]
    method: Option<String>,
    /// Sweep of the outer exponent, as p=start:stop:step.
    #[arg(long, value_name = "p=a:b:step")]
    sweep: Option<String>,
}

fn load(cli: &Cli) -> Result<Resolved, LabError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| LabError::Invalid(format!("cannot read {}: {e}", path.display())))?;
            LabConfig::from_json(&text)?
        }
        None => LabConfig::default(),
    };
    if cfg.preset.is_none() {
        cfg.preset = cli.preset.clone();
    }
    if cli.config.is_none() && cfg.preset.is_none() {
        return Err(LabError::Invalid("pass --config or --preset".into()));
    }
    let mut resolved = cfg.resolve()?;
    if let Some(seed) = cli.seed {
        resolved.seed = seed;
    }
    Ok(resolved)
}

fn exponent(flag: &Option<String>, fallback: Option<f64>, default: f64) -> Result<f64, LabError> {
    match flag {
        Some(s) => parse_exponent(s),
        None => Ok(fallback.unwrap_or(default)),
    }
}

fn run(cli: &Cli) -> Result<String, LabError> {
    match &cli.command {
        Command::Condexp => {
            let r = load(cli)?;
            let f = r
                .function
                .ok_or_else(|| LabError::Invalid("config needs a function".into()))?;
            let ef = cond_exp(&r.space, &r.sigma, &f)?;
            let mut text =
                serde_json::to_string(&ef).map_err(|e| LabError::Invalid(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        Command::Norm(args) => {
            let r = load(cli)?;
            let f = r
                .function
                .ok_or_else(|| LabError::Invalid("config needs a function".into()))?;
            let base = r.exponents;
            let e = MixedExponents::new(
                exponent(&args.p, base.map(|e| e.p), 2.0)?,
                exponent(&args.q, base.map(|e| e.q), 2.0)?,
                exponent(&args.r, base.map(|e| e.r), 2.0)?,
            )?;
            Ok(format!("{}\n", fmt_num(mixed_norm(&r.space, &f, &e)?)))
        }
        Command::Opnorm(args) => {
            let r = load(cli)?;
            let p_values = match &args.sweep {
                Some(s) => {
                    let (name, values) = parse_sweep(s)?;
                    if name != "p" {
                        return Err(LabError::Invalid(format!("can only sweep p, not {name:?}")));
                    }
                    values
                }
                None => vec![exponent(&args.p, r.exponents.map(|e| e.p), 2.0)?],
            };
            let q = exponent(&args.q, r.exponents.map(|e| e.q), 2.0)?;
            let method = match &args.method {
                Some(m) => m.parse::<Method>()?,
                None => r.method,
            };
            let restarts = args.restarts.unwrap_or(r.restarts);
            if restarts == 0 {
                return Err(LabError::ZeroRestarts);
            }
            let opts = AscentOptions::new(restarts, r.seed);
            Ok(opnorm_csv(&run_opnorm(
                &r.space, &r.sigma, &p_values, q, method, &opts,
            )?))
        }
        Command::LyzCheck => {
            let r = load(cli)?;
            let report = lyz_check(&r.space, &r.sigma)?;
            let mut text = format!("{}\n", report.holds);
            let json = |f| serde_json::to_string(f).map_err(|e| LabError::Invalid(e.to_string()));
            if let (Some(w), Some(img)) = (&report.witness, &report.image) {
                text.push_str(&format!("witness {}\nimage {}\n", json(w)?, json(img)?));
            }
            Ok(text)
        }
        Command::Example { name } => {
            let preset: Preset = name.parse()?;
            preset.run_default(cli.seed.unwrap_or(0))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match run(&cli) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("condlab: {err}");
            return ExitCode::from(if err.is_size_cap() {
                EXIT_SIZE_CAP
            } else {
                EXIT_INVALID
            });
        }
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("condlab: cannot write output: {err}");
            ExitCode::FAILURE
        }
    }
}
