use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use plurinorm_cli::{run, CliError, Command, Format, Overrides};

/// Pluricanonical pseudonorm integrals, expansion fits and singularity invariants.
#[derive(Parser)]
#[command(name = "plurinorm", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Sweep Ψ(t) − Ψ(0) over a geometric grid (local-psi, global-cover)
    PsiSweep(Common),
    /// Fit c·t^α·(ln 1/t)^p to a sweep (local-psi, global-cover)
    Fit(Common),
    /// Log canonical thresholds and multiplicities (resolution, local-psi, global-cover)
    Lct(Common),
    /// Characteristic index and indicatrix (resolution)
    Indicatrix(Common),
    /// Pseudonorms and distances of declared sections (global-cover)
    Pseudonorm(Common),
    /// Effective constants (bounds)
    Bounds(Common),
    /// Surface semigroup table (semigroup)
    Semigroup(Common),
    /// Seeded property checks (property-suite)
    Suite(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML)
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for output files; without it the result goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and chart sums
    #[arg(long)]
    threads: Option<usize>,
    /// Replaces the scenario's quadrature rel_tol
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Replaces the scenario's quadrature max_depth
    #[arg(long)]
    max_depth: Option<u32>,
    /// Output format; with --out and no --format both are written
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Sub {
    fn split(self) -> (Command, Common) {
        match self {
            Sub::PsiSweep(c) => (Command::PsiSweep, c),
            Sub::Fit(c) => (Command::Fit, c),
            Sub::Lct(c) => (Command::Lct, c),
            Sub::Indicatrix(c) => (Command::Indicatrix, c),
            Sub::Pseudonorm(c) => (Command::Pseudonorm, c),
            Sub::Bounds(c) => (Command::Bounds, c),
            Sub::Semigroup(c) => (Command::Semigroup, c),
            Sub::Suite(c) => (Command::Suite, c),
        }
    }
}

fn output_path(dir: &Path, scenario: &Path, command: Command, format: Format) -> PathBuf {
    let stem = scenario.file_stem().map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned());
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    dir.join(format!("{stem}.{}.{ext}", command.as_str()))
}

fn execute(command: Command, args: &Common) -> Result<u8, CliError> {
    if let Some(k) = args.threads {
        if k == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--threads: {e}")))?;
    }
    let text = fs::read_to_string(&args.scenario)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", args.scenario.display())))?;
    let overrides = Overrides { rel_tol: args.rel_tol, max_depth: args.max_depth };
    let report = run(command, &text, &overrides)?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let formats = match args.format {
                Some(f) => vec![f],
                None => vec![Format::Json, Format::Csv],
            };
            for f in formats {
                let path = output_path(dir, &args.scenario, command, f);
                fs::write(&path, report.render(f))?;
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            let f = args.format.unwrap_or(command.default_format());
            io::stdout().write_all(report.render(f).as_bytes())?;
        }
    }
    match report.status.exit_code() {
        0 => {}
        3 => eprintln!("warning: a quadrature budget was exhausted; results are flagged"),
        _ => eprintln!("error: an invariant check failed; see the report"),
    }
    Ok(report.status.exit_code())
}

fn main() -> ExitCode {
    let (command, args) = Cli::parse().command.split();
    match execute(command, &args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
