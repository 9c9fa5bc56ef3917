use std::path::PathBuf;
use std::process::ExitCode;

use bisimso_core::mso::{Guards, MAX_ELEMENTS};
use clap::{Parser, Subcommand, ValueEnum};

mod commands;

use commands::{CliError, Output};

/// Bisimulation and MSO-type analysis of finite transition systems.
///
/// Every flag can also be set through an environment variable with the
/// `BISIMSO_` prefix, e.g. `BISIMSO_RANK=2`.
#[derive(Parser, Debug)]
#[command(name = "bisimso", version, about)]
struct Cli {
    /// Quantifier rank m.
    #[arg(long, global = true, default_value_t = 1, env = "BISIMSO_RANK")]
    rank: usize,

    /// Largest structure (in elements) a type computation may touch, at
    /// every rank. Defaults to 64 at ranks 0-1, 14 at rank 2, 8 at rank 3.
    #[arg(long, global = true, env = "BISIMSO_GUARD_STATES")]
    guard_states: Option<usize>,

    /// Longest representative path the path algebra may build.
    #[arg(long, global = true, default_value_t = 12, env = "BISIMSO_GUARD_PATH_LEN")]
    guard_path_len: usize,

    /// Seed for sampling commands.
    #[arg(long, global = true, default_value_t = 0, env = "BISIMSO_SEED")]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text, env = "BISIMSO_FORMAT")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Bisim,
    Mso,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// SCCs, lasso recognition, Cantor-Bendixson rank and quotient of a system.
    Analyze { system: PathBuf },
    /// Compare two systems up to bisimilarity or rank-m MSO equivalence.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Bisim)]
        mode: Mode,
    },
    /// Weak types of two lassos and, if equal, a verified witness chain.
    ///
    /// Inputs are lasso files (`{"tail":..,"loop":..}`) or systems that
    /// are lassos.
    Chain { a: PathBuf, b: PathBuf },
    /// Dump the path algebra of a signature file (`{"actions":[..],"colors":[..]}`).
    Algebra { signature: PathBuf },
    /// Encode a tree extension: strip the finite parts and label the skeleton.
    Encode { system: PathBuf },
    /// Rebuild a system from an encoding produced by `encode --format json`.
    Decode { encoding: PathBuf },
    /// Run the property suites at reduced sample counts.
    Selftest {
        /// Fraction of the full sample counts.
        #[arg(long, default_value_t = 0.05)]
        fraction: f64,
    },
}

impl Cli {
    fn guards(&self) -> Result<Guards, CliError> {
        let mut g = Guards { max_path_len: self.guard_path_len, ..Guards::default() };
        if let Some(n) = self.guard_states {
            if n == 0 || n > MAX_ELEMENTS {
                return Err(CliError::usage(format!("--guard-states must be in 1..={MAX_ELEMENTS}")));
            }
            g.max_size = n;
            g.max_size_rank2 = n;
            g.max_size_rank3 = n;
        }
        if self.guard_path_len == 0 {
            return Err(CliError::usage("--guard-path-len must be positive"));
        }
        Ok(g)
    }

    fn run(&self) -> Result<Output, CliError> {
        let guards = self.guards()?;
        let m = self.rank;
        match &self.command {
            Command::Analyze { system } => commands::analyze(&commands::read_system(system)?, &guards),
            Command::Equiv { a, b, mode } => {
                commands::equiv(&commands::read_system(a)?, &commands::read_system(b)?, *mode, m, &guards)
            }
            Command::Chain { a, b } => commands::chain(&commands::read_lasso(a)?, &commands::read_lasso(b)?, m, &guards),
            Command::Algebra { signature } => commands::algebra(&commands::read_signature(signature)?, m, &guards),
            Command::Encode { system } => commands::encode(&commands::read_system(system)?, m, &guards),
            Command::Decode { encoding } => commands::decode(encoding),
            Command::Selftest { fraction } => commands::selftest(self.seed, *fraction),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.run() {
        Ok(out) => {
            match cli.format {
                Format::Text => print!("{}", out.text),
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).expect("json output")),
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
