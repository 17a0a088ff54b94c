//! `mvchain`: overhead tables, encode/decode roundtrips and straggler
//! simulations for multivariate coded matrix-chain multiplication.
//!
//! Exit codes: 0 success, 1 decoding or correctness failure, 2 bad input.

mod commands;
mod config;
mod values;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::values::{Convention, FractionList, IntList, Latency, MemoryList};

pub const OUT_DIR_ENV: &str = "MVCHAIN_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "mvchain", version, about = "Multivariate polynomial codes for distributed matrix chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Overhead curves and the asymptotic table as CSV.
    Analyze(AnalyzeArgs),
    /// Encode a seeded chain, compute on the minimal grid, decode, compare.
    Roundtrip(RoundtripArgs),
    /// Event-driven straggler simulation over seeds.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// key = value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for CSV and dump output [default: $MVCHAIN_OUT_DIR, else stdout].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    /// Figure to emit: 2 (computation), 3 (storage vs p), 4 (storage vs N).
    #[arg(long, conflicts_with = "table")]
    pub figure: Option<u8>,
    /// Table to emit: 1 (leading-order overheads).
    #[arg(long)]
    pub table: Option<u8>,
    /// Chain lengths [default: 5,10].
    #[arg(long)]
    pub m: Option<IntList>,
    /// Partitions per dimension [default: 2..50; 5 for figure 4; 2,5,10,50 for table 1].
    #[arg(long)]
    pub p: Option<IntList>,
    /// Worker counts [default: 5 for figure 3; 1..50 for figure 4; 5,50 for table 1].
    #[arg(long)]
    pub n: Option<IntList>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ChainArgs {
    /// mv1 or mv2 (simulate accepts a comma list).
    #[arg(long)]
    pub scheme: Option<String>,
    /// Partition counts p_0..p_m.
    #[arg(long)]
    pub parts: Option<IntList>,
    /// Dimensions r_0..r_m [default: 2 p_i].
    #[arg(long)]
    pub dims: Option<IntList>,
    /// Prime field modulus [default: 2147483647].
    #[arg(long)]
    pub modulus: Option<u64>,
    /// Seed for matrices, points and latencies [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Inner MV2 axis size: minus = 2p-1, plus = 2p+1 [default: minus].
    #[arg(long, value_enum)]
    pub grid_convention: Option<Convention>,
}

#[derive(Args, Debug, Clone)]
pub struct RoundtripArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Matrix fixture files in chain order, replacing the random chain.
    #[arg(long = "matrix")]
    pub matrices: Vec<PathBuf>,
    /// Write every coded task and the decoded product here.
    #[arg(long)]
    pub dump_dir: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// shared, dedicated, or both [default: shared].
    #[arg(long)]
    pub memory: Option<MemoryList>,
    /// Worker counts [default: 4].
    #[arg(long)]
    pub workers: Option<IntList>,
    /// Storage fractions s_k for dedicated plans, one per variable or a
    /// single value for all [default: N^{-1/variables} when rational].
    #[arg(long)]
    pub fractions: Option<FractionList>,
    /// shifted-exp:SHIFT,RATE or det:TIME [default: shifted-exp:1,1].
    #[arg(long)]
    pub latency: Option<Latency>,
    /// Seeds to sweep [default: 0..19].
    #[arg(long)]
    pub seeds: Option<IntList>,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Roundtrip(a) => commands::roundtrip(&a),
        Command::Simulate(a) => commands::simulate(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
