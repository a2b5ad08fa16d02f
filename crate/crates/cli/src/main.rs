//! `hermitia`: classification, counting, construction and stabilizer
//! searches for tetranomial curves on Hermitian surfaces.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hermitia::orbit::CaseId;
use hermitia::Error;

#[derive(Parser, Debug)]
#[command(name = "hermitia", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for the parallel scans.
    #[arg(long, global = true, env = "HERMITIA_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    C1,
    C2,
    C3,
}

impl From<CaseArg> for CaseId {
    fn from(c: CaseArg) -> CaseId {
        match c {
            CaseArg::C1 => CaseId::C1,
            CaseArg::C2 => CaseId::C2,
            CaseArg::C3 => CaseId::C3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Diagonal,
    Full,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate admissible signatures up to a degree bound.
    Classify {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        max_d: Option<u64>,
    },
    /// Orbit counts per case, from the formulas and from stabilizer scans.
    Count {
        #[arg(long)]
        q: u64,
        /// Skip the stabilizer scans.
        #[arg(long)]
        no_search: bool,
    },
    /// Build a curve of the given case on a surface and verify it.
    Build {
        #[arg(long)]
        q: u64,
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long, conflicts_with = "surface")]
        fermat: bool,
        /// Surface JSON (`{"q": .., "gram": ..}`).
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        max_ext: u32,
        /// Parameters are scanned over GF(q^k).
        #[arg(long, default_value_t = 4)]
        scan_degree: u32,
    },
    /// Projective stabilizer of the case representative.
    Stabilizer {
        #[arg(long)]
        q: u64,
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Diagonal)]
        mode: ModeArg,
        /// Random non-diagonal elements tested against the stabilizer equation.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Pairwise equivalence of the q = 2 case-I representatives.
    RepsQ2 {
        /// JSON array of λ values in GF(4); defaults to all of GF(4).
        #[arg(long, conflicts_with = "scan")]
        lambdas: Option<PathBuf>,
        #[arg(long)]
        scan: bool,
        /// Equivalences are searched in GL2(GF(2^k)).
        #[arg(long, default_value_t = 4)]
        search_degree: u32,
    },
}

/// A finished report: JSON value, TSV rendering and whether it agrees with
/// the published predictions.
pub struct Outcome {
    pub json: serde_json::Value,
    pub tsv: Vec<Vec<String>>,
    pub consistent: bool,
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Input(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(s) => f.write_str(s),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 3,
            CliError::Core(e) => match e {
                Error::SearchExhausted(_) | Error::SearchTooLarge(_) => 4,
                Error::DivisionByZero | Error::Invalid(_) => 1,
                _ => 3,
            },
        }
    }
}

fn render(outcome: &Outcome, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&outcome.json).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Tsv => outcome.tsv.iter().map(|r| r.join("\t") + "\n").collect(),
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Classify { q, max_d } => commands::classify(*q, *max_d),
        Command::Count { q, no_search } => commands::count(*q, !no_search),
        Command::Build {
            q,
            case,
            fermat,
            surface,
            max_ext,
            scan_degree,
        } => {
            if !fermat && surface.is_none() {
                return Err(CliError::Input("build needs --fermat or --surface".into()));
            }
            commands::build(
                *q,
                (*case).into(),
                surface.as_deref(),
                *max_ext,
                *scan_degree,
            )
        }
        Command::Stabilizer {
            q,
            case,
            mode,
            samples,
        } => commands::stabilizer(*q, (*case).into(), *mode, *samples, cli.seed),
        Command::RepsQ2 {
            lambdas,
            search_degree,
            ..
        } => commands::reps_q2(lambdas.as_deref(), *search_degree),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let text = render(&outcome, cli.format);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(3);
            }
        }
        None => print!("{text}"),
    }
    if outcome.consistent {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
