//! Command-line front end. Every subcommand builds a table (or the verify
//! report) through the harness layer and writes it to stdout or a file.
//! Exit codes: 0 success, 1 verification or I/O failure, 2 usage error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rspsim::harness::{
    ChannelChoice, ShotConfig, StateChoice, Table, cmd_sweep_noise, cmd_sweep_phi, cmd_table1,
    cmd_verify,
};
use rspsim::noise::NoiseParams;
use rspsim::qmat::TargetPhase;

#[derive(Parser)]
#[command(
    version,
    about = "Simulate and verify coherence-certified remote state preparation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Benchmark table over the eight standard target phases
    Table1(Table1Args),
    /// Sweep the target phase over a uniform equator grid
    SweepPhi(SweepPhiArgs),
    /// Sweep both noise weights over a rectangular grid at a fixed phase
    SweepNoise(SweepNoiseArgs),
    /// Run every invariant suite and emit a JSON report
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateArg {
    PsiMinus,
    RhoP,
}

impl From<StateArg> for StateChoice {
    fn from(value: StateArg) -> Self {
        match value {
            StateArg::PsiMinus => StateChoice::PsiMinus,
            StateArg::RhoP => StateChoice::RhoP,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    UDagger,
    Hadamard,
}

impl From<ChannelArg> for ChannelChoice {
    fn from(value: ChannelArg) -> Self {
        match value {
            ChannelArg::UDagger => ChannelChoice::UDagger,
            ChannelArg::Hadamard => ChannelChoice::Hadamard,
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Args)]
struct SampleArgs {
    /// Photon pairs per measurement setting; omit for exact mode
    #[arg(long)]
    shots: Option<u64>,
    /// Seed for sampled mode
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl SampleArgs {
    fn config(&self) -> Result<Option<ShotConfig>, rspsim::Error> {
        self.shots
            .map(|s| ShotConfig::new(s, self.seed))
            .transpose()
    }
}

#[derive(Args)]
struct Table1Args {
    /// Weight of the |00> noise component
    #[arg(long, default_value_t = 0.1)]
    p1: f64,
    /// Weight of the |11> noise component
    #[arg(long, default_value_t = 0.2)]
    p2: f64,
    #[command(flatten)]
    sample: SampleArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepPhiArgs {
    /// Shared state to run the protocol on
    #[arg(long, value_enum, default_value_t = StateArg::RhoP)]
    state: StateArg,
    /// Weight of the |00> noise component (rho-p only)
    #[arg(long, default_value_t = 0.1)]
    p1: f64,
    /// Weight of the |11> noise component (rho-p only)
    #[arg(long, default_value_t = 0.2)]
    p2: f64,
    /// Number of grid points over the equator
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Verifier channel for the one-sided criteria
    #[arg(long, value_enum, default_value_t = ChannelArg::Hadamard)]
    channel: ChannelArg,
    /// Population index the verifier reads out
    #[arg(long, default_value_t = 0)]
    q: u8,
    #[command(flatten)]
    sample: SampleArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepNoiseArgs {
    /// Grid step for both noise weights
    #[arg(long, default_value_t = 0.05)]
    p_step: f64,
    /// Target phase in degrees
    #[arg(long, default_value_t = 0.0)]
    phi_deg: f64,
    #[command(flatten)]
    sample: SampleArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Seed for the randomized suites
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the report to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn write_out(text: &str, path: Option<&PathBuf>) -> Result<(), rspsim::Error> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit(table: &Table, output: &OutputArgs) -> Result<(), rspsim::Error> {
    let text = match output.format {
        FormatArg::Csv => table.to_csv(),
        FormatArg::Json => table.to_json(),
    };
    write_out(&text, output.out.as_ref())
}

fn run(cli: Cli) -> Result<ExitCode, rspsim::Error> {
    match cli.command {
        Command::Table1(args) => {
            let params = NoiseParams::new(args.p1, args.p2)?;
            let cfg = args.sample.config()?;
            emit(&cmd_table1(params, cfg.as_ref())?, &args.output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SweepPhi(args) => {
            let params = NoiseParams::new(args.p1, args.p2)?;
            let cfg = args.sample.config()?;
            let table = cmd_sweep_phi(
                args.state.into(),
                params,
                args.n,
                args.channel.into(),
                args.q,
                cfg.as_ref(),
            )?;
            emit(&table, &args.output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SweepNoise(args) => {
            let cfg = args.sample.config()?;
            let phi = TargetPhase::from_degrees(args.phi_deg);
            emit(
                &cmd_sweep_noise(args.p_step, phi, cfg.as_ref())?,
                &args.output,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let report = cmd_verify(args.seed)?;
            write_out(&report.to_json(), args.out.as_ref())?;
            if report.pass {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                // a failed write is a runtime failure, everything else that
                // can surface here is a bad flag value
                rspsim::Error::Io(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
