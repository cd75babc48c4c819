use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use cauchy_chain_cli::{commands, exit, CliError, ConfigError, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "cauchy-chain", version, about = "Kernels, verification suites and spectral data for the Cauchy chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` config file; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    precision_bits: Option<String>,
    /// lo:hi:count[:log]
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    p: Option<String>,
    /// Comma-separated exponents a₁,…,a_p.
    #[arg(long, global = true, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, global = true)]
    c0: Option<String>,
    /// Criterion ids or module names for `verify`, comma-separated.
    #[arg(long, global = true)]
    only: Option<String>,
    /// Output file, `-` for stdout.
    #[arg(long, short, global = true)]
    output: Option<String>,
    /// Any config key as key=value; repeatable, applied last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Limit kernel G_{jℓ} on a (ξ, η) grid with a cross-route check.
    LimitKernel,
    /// Run the acceptance criteria and print one line per criterion.
    Verify,
    /// Finite-n scaled kernels against the limit kernel.
    Universality,
    /// Densities ρ₁, ρ₂ of the β-curve on the grid.
    Spectral,
    /// Chain separation blocks over the Λ list.
    Separation,
    /// Print the resolved configuration in canonical form.
    Config,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    let flags = [
        ("precision_bits", &cli.precision_bits),
        ("grid", &cli.grid),
        ("p", &cli.p),
        ("a", &cli.a),
        ("c0", &cli.c0),
        ("only", &cli.only),
        ("output", &cli.output),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError::Invalid(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v)?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let cfg = resolve(cli)?;
    let mut sink: Box<dyn Write> = if cfg.output == "-" {
        Box::new(BufWriter::new(io::stdout().lock()))
    } else {
        Box::new(BufWriter::new(File::create(&cfg.output)?))
    };
    let code = match cli.command {
        Command::LimitKernel => commands::limit_kernel(&cfg, &mut sink)?,
        Command::Verify => commands::verify(&cfg, &mut sink)?,
        Command::Universality => commands::universality(&cfg, &mut sink)?,
        Command::Spectral => commands::spectral(&cfg, &mut sink)?,
        Command::Separation => commands::separation(&cfg, &mut sink)?,
        Command::Config => {
            cfg.validate()?;
            write!(sink, "{}", cfg.to_text())?;
            exit::OK
        }
    };
    sink.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("cauchy-chain: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
