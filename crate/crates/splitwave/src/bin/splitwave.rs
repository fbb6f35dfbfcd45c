use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use splitwave::cli::{parse_config, run_command, Command};

/// Pseudospectral operator-splitting solver and verification harness for
/// u_t + u u_x = K u with a Fourier-multiplier K.
#[derive(Parser)]
#[command(name = "splitwave", version, about)]
struct Cli {
    /// Path to a key=value config file (flags override file values).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    common: CommonArgs,

    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args)]
struct CommonArgs {
    /// Scheme: godunov, strang, or reference (run only).
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// Substep order: nonlinear_first or linear_first.
    #[arg(long, global = true)]
    order: Option<String>,
    /// Symbol name: zero, kdv, bo, burgers, fractional, whitham, extended_whitham.
    #[arg(long, global = true)]
    symbol: Option<String>,
    /// Surface-tension parameter of extended_whitham.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Exponent of the fractional symbol, in [1, 3].
    #[arg(long, global = true)]
    a: Option<f64>,
    /// Number of grid points (even, >= 8).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Domain length L.
    #[arg(long, global = true)]
    length: Option<f64>,
    /// Step size dt.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Horizon T.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Comma-separated decreasing step sizes for converge/local-order.
    #[arg(long, global = true)]
    dts: Option<String>,
    /// Comma-separated Sobolev indices to measure in.
    #[arg(long, global = true)]
    sigmas: Option<String>,
    /// Initial data: sine, two_mode, or a snapshot path.
    #[arg(long, global = true)]
    u0: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    outdir: Option<PathBuf>,
    /// RNG seed for randomized trials.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Reference step size override.
    #[arg(long, global = true)]
    dt_ref: Option<f64>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Integrate one trajectory and write diagnostics plus the final state.
    Run,
    /// Sweep step sizes and fit the global convergence order.
    Converge,
    /// Fit the one-step (local) error order.
    LocalOrder,
    /// Scan a symbol against the dissipativity/symmetry/cancellation conditions.
    VerifySymbol {
        /// Symbol name (alias for --symbol).
        #[arg(long)]
        name: Option<String>,
        /// Scan window half-width.
        #[arg(long)]
        ximax: Option<f64>,
        /// Number of lattice samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Randomized numerical check of the commutator and bilinear bounds.
    VerifyLemmas {
        /// Number of random trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Sobolev index s of the bounds.
        #[arg(long)]
        s: Option<f64>,
        /// Secondary index sigma.
        #[arg(long)]
        sigma: Option<f64>,
    },
}

fn push(overrides: &mut Vec<(String, String)>, key: &str, value: Option<String>) {
    if let Some(v) = value {
        overrides.push((key.to_string(), v));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let mut overrides = Vec::new();
    let c = &cli.common;
    push(&mut overrides, "scheme", c.scheme.clone());
    push(&mut overrides, "order", c.order.clone());
    push(&mut overrides, "symbol", c.symbol.clone());
    push(&mut overrides, "beta", c.beta.map(|v| v.to_string()));
    push(&mut overrides, "a", c.a.map(|v| v.to_string()));
    push(&mut overrides, "n", c.n.map(|v| v.to_string()));
    push(&mut overrides, "length", c.length.map(|v| v.to_string()));
    push(&mut overrides, "dt", c.dt.map(|v| v.to_string()));
    push(&mut overrides, "horizon", c.horizon.map(|v| v.to_string()));
    push(&mut overrides, "dts", c.dts.clone());
    push(&mut overrides, "sigmas", c.sigmas.clone());
    push(&mut overrides, "u0", c.u0.clone());
    push(
        &mut overrides,
        "outdir",
        c.outdir.as_ref().map(|v| v.display().to_string()),
    );
    push(&mut overrides, "seed", c.seed.map(|v| v.to_string()));
    push(&mut overrides, "dt_ref", c.dt_ref.map(|v| v.to_string()));

    let command = match &cli.command {
        CliCommand::Run => Command::Run,
        CliCommand::Converge => Command::Converge,
        CliCommand::LocalOrder => Command::LocalOrder,
        CliCommand::VerifySymbol {
            name,
            ximax,
            samples,
        } => {
            push(&mut overrides, "symbol", name.clone());
            push(&mut overrides, "ximax", ximax.map(|v| v.to_string()));
            push(&mut overrides, "samples", samples.map(|v| v.to_string()));
            Command::VerifySymbol
        }
        CliCommand::VerifyLemmas { trials, s, sigma } => {
            push(&mut overrides, "trials", trials.map(|v| v.to_string()));
            push(&mut overrides, "s", s.map(|v| v.to_string()));
            push(&mut overrides, "sigma", sigma.map(|v| v.to_string()));
            Command::VerifyLemmas
        }
    };

    let cfg = match parse_config(cli.config.as_deref(), &overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error={e}");
            return ExitCode::from(2);
        }
    };

    match run_command(command, &cfg) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => {
            eprintln!("error=assertions failed (see report.txt)");
            ExitCode::from(code.min(255) as u8)
        }
        Err(e) => {
            eprintln!("error={e}");
            ExitCode::from(2)
        }
    }
}
