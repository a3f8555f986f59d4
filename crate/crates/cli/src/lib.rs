//! Command-line front end for `ebcert-core`.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 precondition
//! failure, 4 counterexample or bug. Default tolerances can be set with
//! `EBCERT_PSD_TOL`, `EBCERT_RANK_TOL` and `EBCERT_EQUALITY_TOL`; `--tol`
//! overrides them.

pub mod commands;
pub mod error;
pub mod files;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ebcert_core::{GeneratorKind, GeneratorSpec};

pub use commands::{analyze, convert, generate, resolve_tolerances, verify_theorem, Representation, VerifyParams};
pub use error::{exit, CliError};
pub use files::{KrausFile, MatrixData, MatrixFile, ReportFile, Role};

#[derive(Debug, Parser)]
#[command(
    name = "ebcert",
    version,
    about = "Certify entanglement-breaking and PPT properties of quantum channels",
    after_help = "Exit codes: 0 ok, 2 parse error, 3 precondition failure, 4 counterexample or bug.\n\
                  Environment: EBCERT_PSD_TOL, EBCERT_RANK_TOL, EBCERT_EQUALITY_TOL set default tolerances."
)]
pub struct Cli {
    /// Tolerance override, e.g. `--tol psd=1e-10`. Keys: psd, rank, equality.
    #[arg(long = "tol", value_name = "KEY=VALUE", global = true)]
    pub tol: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the predicate suite on a Choi matrix, state or Stinespring operator.
    Analyze {
        input: PathBuf,
        /// Interpret the input with this role instead of the one in the file.
        #[arg(long = "as", value_enum)]
        role: Option<Role>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the complementary-pair equivalence check on random Stinespring operators.
    VerifyTheorem(VerifyArgs),
    /// Write a generated channel, state or Stinespring operator.
    Generate(GenerateArgs),
    /// Convert between Choi, Kraus and Stinespring representations.
    Convert {
        #[arg(long, value_enum)]
        from: Representation,
        #[arg(long, value_enum)]
        to: Representation,
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Dimensions d_A,d_B,d_C.
    #[arg(long, value_delimiter = ',', default_values_t = [2, 2, 2])]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Re-run a single sample from the per-sample seed recorded in a report.
    #[arg(long, value_name = "SAMPLE_SEED")]
    pub replay: Option<u64>,
    /// Include every sample in the report, not only failures.
    #[arg(long)]
    pub per_sample: bool,
    /// Rescale Stinespring columns to unit norm.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub kind: GeneratorKind,
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub params: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub normalize: bool,
    /// Emit a Stinespring dilation instead of a Choi matrix or state.
    #[arg(long)]
    pub dilate: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Executes a parsed command line. Map errors to exit codes with [`CliError::exit_code`].
pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve_tolerances(|k| std::env::var(k).ok(), &cli.tol)?;
    match cli.command {
        Command::Analyze { input, role, output } => {
            let bytes = files::read_bytes(&input)?;
            let report = analyze(&bytes, role, &cfg)?;
            files::write_output(output.as_deref(), &files::to_json_bytes(&report))
        }
        Command::VerifyTheorem(args) => {
            let dims: [usize; 3] = args
                .dims
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Parse(format!("--dims expects three values, got {:?}", args.dims)))?;
            let params = VerifyParams {
                dims,
                trials: args.trials,
                seed: args.seed,
                replay: args.replay,
                per_sample: args.per_sample,
                normalize: args.normalize,
            };
            let (report, passed) = verify_theorem(&params, &cfg)?;
            files::write_output(args.output.as_deref(), &files::to_json_bytes(&report))?;
            if passed {
                Ok(())
            } else {
                let summary = report.aggregate.as_ref().expect("harness reports carry an aggregate");
                let seeds: Vec<u64> = summary.failures.iter().map(|f| f.seed).collect();
                Err(CliError::CounterexampleOrBug(format!(
                    "{} of {} samples failed; replay with --replay <seed>, seeds {seeds:?}",
                    summary.counterexamples, summary.trials
                )))
            }
        }
        Command::Generate(args) => {
            let spec = GeneratorSpec {
                kind: args.kind,
                dims: args.dims,
                params: args.params,
                seed: args.seed,
                normalize: args.normalize,
            };
            let file = generate(&spec, args.dilate, &cfg)?;
            files::write_output(args.output.as_deref(), &files::to_json_bytes(&file))
        }
        Command::Convert { from, to, input, output } => {
            let bytes = files::read_bytes(&input)?;
            files::write_output(output.as_deref(), &convert(&bytes, from, to, &cfg)?)
        }
    }
}
