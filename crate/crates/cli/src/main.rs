use clap::{Args, Parser, Subcommand};
use ripot_cli::{run, Command, VerifyOp, YoungOp};
use std::path::PathBuf;
use std::process::ExitCode;

/// Rearrangement-invariant norms, Riesz potentials and inequality sweeps.
#[derive(Parser)]
#[command(name = "ripot", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Io {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV/JSON reports.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decreasing rearrangement of a sampled field.
    Rearrange(Io),
    /// Norms of a field or profile in a list of spaces.
    Norm(Io),
    /// Young-function constructions.
    Young {
        #[command(subcommand)]
        op: YoungCmd,
    },
    /// Riesz potential of a sampled field.
    Riesz(Io),
    /// Brute-force K-functional, with the Holmstedt formula when available.
    Kfunc(Io),
    /// Inequality sweeps with trend classification.
    Verify {
        #[command(subcommand)]
        op: VerifyCmd,
    },
}

#[derive(Subcommand)]
enum YoungCmd {
    Conj(Io),
    Hat(Io),
    Equiv(Io),
}

#[derive(Subcommand)]
enum VerifyCmd {
    Hardy(Io),
    Riesz(Io),
    RearrEst(Io),
    Counterexample(Io),
    Orlicz(Io),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("RIPOT_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: RIPOT_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(1);
            }
        }
    }
    let (cmd, io) = match cli.cmd {
        Cmd::Rearrange(io) => (Command::Rearrange, io),
        Cmd::Norm(io) => (Command::Norm, io),
        Cmd::Riesz(io) => (Command::Riesz, io),
        Cmd::Kfunc(io) => (Command::Kfunc, io),
        Cmd::Young { op } => match op {
            YoungCmd::Conj(io) => (Command::Young(YoungOp::Conj), io),
            YoungCmd::Hat(io) => (Command::Young(YoungOp::Hat), io),
            YoungCmd::Equiv(io) => (Command::Young(YoungOp::Equiv), io),
        },
        Cmd::Verify { op } => match op {
            VerifyCmd::Hardy(io) => (Command::Verify(VerifyOp::Hardy), io),
            VerifyCmd::Riesz(io) => (Command::Verify(VerifyOp::Riesz), io),
            VerifyCmd::RearrEst(io) => (Command::Verify(VerifyOp::RearrEst), io),
            VerifyCmd::Counterexample(io) => (Command::Verify(VerifyOp::Counterexample), io),
            VerifyCmd::Orlicz(io) => (Command::Verify(VerifyOp::Orlicz), io),
        },
    };
    match run(cmd, &io.config, &io.out) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
