use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ehcsim::analysis::{
    analyze, compare, events_csv, run_policy, run_report, AnalysisError, AnalyzeKind, RunConfig, DEFAULT_SEED,
};
use ehcsim::cache::{CacheGeometry, SimError, SimOptions};
use ehcsim::oracle::OracleError;
use ehcsim::trace::{gen_synthetic, interleave, read_trace, write_trace, GeneratorKind, GeneratorSpec, Trace};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "ehcsim", version, about = "Trace-driven LLC replacement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic trace.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        blocks: u64,
        #[arg(long)]
        length: u64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
        #[arg(short = 'o')]
        output: PathBuf,
    },
    /// Simulate one policy.
    Run {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        policy: String,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Simulate several policies and compare them against LRU.
    Compare {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        policies: Vec<String>,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Produce one of the analysis reports.
    Analyze {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum)]
        report: ReportKind,
        #[arg(long)]
        policy: Option<String>,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Merge per-core traces into one multi-core trace.
    Interleave {
        #[arg(short = 'o')]
        output: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, default_value_t = 2048)]
    sets: usize,
    #[arg(long, default_value_t = 16)]
    ways: usize,
    #[arg(long, default_value_t = 6)]
    block_bits: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    ehc_fixed_init: Option<u8>,
    #[arg(long)]
    no_aging: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Stream,
    Loop,
    Zipf,
    Region,
    Mixed,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ReportKind {
    NoAverse,
    HitcountBlock,
    HitcountRegion,
    VictimQuality,
    MinGap,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::UnknownPolicy(_) => Failure::Usage(e.to_string()),
            AnalysisError::ZeroInstructions => Failure::Data(e.to_string()),
            AnalysisError::Sim(_) | AnalysisError::Oracle(OracleError::Sim(_)) => Failure::Internal(e.to_string()),
            AnalysisError::Oracle(_) => Failure::Internal(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure::Internal(e.to_string())
    }
}

impl SimArgs {
    fn config(&self) -> Result<RunConfig, Failure> {
        let geometry =
            CacheGeometry::new(self.sets, self.ways, self.block_bits).map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(RunConfig {
            geometry,
            seed: self.seed,
            ehc_fixed_init: self.ehc_fixed_init,
            aging: !self.no_aging,
        })
    }
}

fn load(path: &Path) -> Result<Trace, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    read_trace(&bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn save(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen {
            kind,
            blocks,
            length,
            alpha,
            seed,
            output,
        } => {
            let kind = match kind {
                Kind::Stream => GeneratorKind::Stream,
                Kind::Loop => GeneratorKind::Loop,
                Kind::Zipf => GeneratorKind::Zipf,
                Kind::Region => GeneratorKind::RegionCorrelated,
                Kind::Mixed => GeneratorKind::Mixed,
            };
            let spec = GeneratorSpec::new(kind, blocks, length, seed).with_alpha(alpha);
            let trace = gen_synthetic(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
            save(&output, &write_trace(&trace))
        }
        Command::Run {
            trace,
            policy,
            sim,
            events,
            csv,
        } => {
            let cfg = sim.config()?;
            let trace = load(&trace)?;
            let opts = SimOptions {
                events: events.is_some(),
                ..Default::default()
            };
            let run = run_policy(&trace, &policy, &cfg, opts)?;
            if let (Some(path), Some(log)) = (&events, &run.events) {
                save(path, events_csv(log).as_bytes())?;
            }
            let report = run_report(&trace, &run, &cfg)?;
            save(&csv, report.to_csv().as_bytes())
        }
        Command::Compare {
            trace,
            policies,
            sim,
            csv,
        } => {
            let cfg = sim.config()?;
            let trace = load(&trace)?;
            let names: Vec<&str> = policies.iter().map(String::as_str).collect();
            let report = compare(&trace, &names, &cfg, false)?;
            save(&csv, report.to_csv().as_bytes())
        }
        Command::Analyze {
            trace,
            report,
            policy,
            sim,
            csv,
        } => {
            let cfg = sim.config()?;
            let trace = load(&trace)?;
            let kind = match report {
                ReportKind::NoAverse => AnalyzeKind::NoAverse,
                ReportKind::HitcountBlock => AnalyzeKind::HitcountBlock,
                ReportKind::HitcountRegion => AnalyzeKind::HitcountRegion,
                ReportKind::VictimQuality => AnalyzeKind::VictimQuality,
                ReportKind::MinGap => AnalyzeKind::MinGap,
            };
            let report = analyze(&trace, kind, policy.as_deref(), &cfg)?;
            save(&csv, report.to_csv().as_bytes())
        }
        Command::Interleave { output, inputs } => {
            let traces = inputs.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
            let merged = interleave(&traces).map_err(|e| Failure::Usage(e.to_string()))?;
            save(&output, &write_trace(&merged))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
