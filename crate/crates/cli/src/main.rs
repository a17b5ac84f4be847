//! `walkident`: evaluate closed forms, verify identities, sweep parameter
//! grids, emit the chain figure data, and inspect the exact oracle.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use render::OutputFormat;

#[derive(Parser)]
#[command(
    name = "walkident",
    version,
    about = "Exact checks of delayed-walk probability identities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form probabilities and total for one model at time m.
    Eval {
        #[arg(value_enum, value_name = "MODEL")]
        kind: ModelKind,
        #[command(flatten)]
        args: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check one identity; exit 0 iff it sums to exactly 1.
    Verify {
        /// eq1, eq2, three-node, multilevel, eq3, eq4, eq5 or gosper.
        #[arg(long)]
        id: String,
        /// Check every time step of the natural range instead of one m.
        #[arg(long)]
        all_m: bool,
        #[command(flatten)]
        args: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check an identity over a grid; `--n` and `--m` take lists such as
    /// `2..8,10`, and `--p` is the value set for every probability slot.
    Sweep {
        #[arg(long)]
        id: String,
        #[command(flatten)]
        args: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Long-format CSV of both summands of the single-level chain identity.
    Figure1 {
        #[arg(long, default_value_t = 28)]
        n: u32,
        #[arg(long, default_value = "0.1,0.9")]
        p: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact oracle snapshot, optionally diffed against the closed form and
    /// a seeded Monte Carlo estimate.
    Oracle {
        #[arg(value_enum, value_name = "MODEL")]
        kind: ModelKind,
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        args: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Chain,
    Walk2d,
    Simple1d,
    Barrier2d,
    Gosper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Literal,
    Corrected,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Chain length, barrier size or race length.
    #[arg(long)]
    pub n: Option<String>,
    /// Probabilities as `a/b` or exact decimals, comma separated.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub p1: Option<String>,
    #[arg(long)]
    pub p2: Option<String>,
    #[arg(long)]
    pub p3: Option<String>,
    #[arg(long)]
    pub p4: Option<String>,
    /// Tower height for multi-level chains.
    #[arg(long)]
    pub levels: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<String>,
    /// All four move probabilities equal to 1/4.
    #[arg(long)]
    pub uniform: bool,
    /// JSON model file for chains and general lattice walks.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "literal")]
    pub mode: ModeArg,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    #[arg(long, value_enum, default_value = "table")]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Eval { kind, args, out } => commands::eval(kind, &args, &out),
        Command::Verify {
            id,
            all_m,
            args,
            out,
        } => commands::verify(&id, all_m, &args, &out),
        Command::Sweep { id, args, out } => commands::sweep(&id, &args, &out),
        Command::Figure1 { n, p, out } => commands::figure1(n, &p, out.as_deref()),
        Command::Oracle {
            kind,
            compare,
            samples,
            seed,
            args,
            out,
        } => commands::oracle(kind, compare, samples, seed, &args, &out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        super::Cli::command().debug_assert();
    }
}
