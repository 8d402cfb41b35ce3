use std::fs::File;
use std::io::{BufWriter, ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crossing_cli::{exit, output, parse_config, run, CliError, Mode};

#[derive(Parser)]
#[command(
    name = "crossing-kit",
    version,
    about = "Transfer matrices at finite-order crossings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Leading-order transfer matrix from the crossing data
    Predict(Common),
    /// Numerical transfer matrix of the reduced model at one h
    SolveModel(Common),
    /// Numerical transfer matrix of the Schrodinger system at one h
    SolveSchrodinger(Common),
    /// Sweep over h, fit power laws, report verdicts
    Sweep(Common),
    /// Like sweep, but exit 1 when any verdict fails
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// CSV output path, overriding `output.csv`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for randomized property checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn execute(mode: Mode, args: &Common) -> Result<i32, CliError> {
    if let Some(n) = args.jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let cfg = parse_config(&args.config)?;
    let started = std::time::Instant::now();
    let out = run(mode, &cfg, args.seed)?;
    log::info!("{mode} finished in {:.2} s", started.elapsed().as_secs_f64());

    if let Some(path) = args.out.as_ref().or(cfg.output.csv.as_ref()) {
        let f = File::create(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        output::write_csv(BufWriter::new(f), &out.rows)?;
    }
    let text = serde_json::to_string_pretty(&out.summary).map_err(|e| CliError::Output(e.to_string()))?;
    // a closed pipe (e.g. `| head`) is not an error
    if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
        if e.kind() != ErrorKind::BrokenPipe {
            return Err(CliError::Output(e.to_string()));
        }
    }
    if let Some(path) = &cfg.output.summary {
        std::fs::write(path, format!("{text}\n")).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    }

    Ok(if out.row_failures {
        exit::NUMERICAL
    } else if out.passed == Some(false) {
        exit::VERDICT_FAILED
    } else {
        exit::PASS
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CROSSING_KIT_LOG", "warn")).init();
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Predict(a) => (Mode::Predict, a),
        Command::SolveModel(a) => (Mode::SolveModel, a),
        Command::SolveSchrodinger(a) => (Mode::SolveSchrodinger, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Verify(a) => (Mode::Verify, a),
    };
    let code = match execute(mode, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("crossing-kit: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
