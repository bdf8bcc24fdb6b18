use std::fs;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bichromatic::config::{parse_config, RunConfig};
use bichromatic::export::{self, Format};
use bichromatic::floquet::FloquetConfig;
use bichromatic::run::{run_floquet, run_phonon_rate, run_spectrum, run_sweep};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

/// Resonance fluorescence of a bichromatically driven two-level emitter.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Incoherent spectrum for a single parameter set.
    Spectrum(Args),
    /// One spectrum per point of the configured sweep axis.
    Sweep(Args),
    /// Floquet transition frequencies only.
    Floquet(Args),
    /// Phonon pure-dephasing estimate.
    PhononRate(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Configuration file (`key = value` lines or a JSON object).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; data goes to standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Floquet harmonic order for transition overlays.
    #[arg(long)]
    overlay_order: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

enum Failure {
    Config(String),
    Numerical(String),
}

fn load(args: &Args) -> Result<(RunConfig, String), Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Config(format!("{}: {e}", args.config.display())))?;
    let mut cfg =
        parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", args.config.display())))?;
    if let Some(order) = args.overlay_order {
        cfg.floquet =
            Some(FloquetConfig::new(order).map_err(|e| Failure::Config(e.to_string()))?);
    }
    Ok((cfg, text))
}

fn io_failure(e: io::Error) -> Failure {
    Failure::Numerical(format!("output: {e}"))
}

fn report(paths: Vec<PathBuf>) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn execute(command: &Command) -> Result<u8, Failure> {
    match command {
        Command::Spectrum(args) => {
            let (cfg, text) = load(args)?;
            if cfg.sweep.is_some() {
                return Err(Failure::Config(
                    "configuration has a sweep axis; use the `sweep` subcommand".into(),
                ));
            }
            let run = run_spectrum(&cfg, &text, args.threads)
                .map_err(|e| Failure::Numerical(e.to_string()))?;
            match &args.out {
                Some(dir) => report(export::export_spectrum(&run, args.format.into(), dir).map_err(io_failure)?),
                None => match args.format {
                    OutFormat::Csv => export::write_trace_csv(io::stdout().lock(), &run.trace),
                    OutFormat::Json => export::write_json(io::stdout().lock(), &run),
                }
                .map_err(io_failure)?,
            }
            Ok(0)
        }
        Command::Sweep(args) => {
            let (cfg, text) = load(args)?;
            if cfg.sweep.is_none() {
                return Err(Failure::Config("configuration has no sweep axis".into()));
            }
            let result = run_sweep(&cfg, &text, args.threads)
                .map_err(|e| Failure::Numerical(e.to_string()))?;
            for p in result.points.iter().filter(|p| p.error.is_some()) {
                eprintln!(
                    "point {} = {} failed: {}",
                    result.parameter.name(),
                    p.axis_value,
                    p.error.as_deref().unwrap_or_default()
                );
            }
            match &args.out {
                Some(dir) => report(export::export_sweep(&result, args.format.into(), dir).map_err(io_failure)?),
                None => match args.format {
                    OutFormat::Csv => export::write_sweep_csv(io::stdout().lock(), &result),
                    OutFormat::Json => export::write_json(io::stdout().lock(), &result),
                }
                .map_err(io_failure)?,
            }
            let failed = result.failures();
            Ok(if failed == 0 {
                0
            } else if failed == result.points.len() {
                EXIT_NUMERICAL
            } else {
                EXIT_PARTIAL
            })
        }
        Command::Floquet(args) => {
            let (cfg, _) = load(args)?;
            let order = cfg.floquet.unwrap_or(FloquetConfig { order: 3 });
            let sets = run_floquet(&cfg, order).map_err(|e| Failure::Numerical(e.to_string()))?;
            let write = |w: &mut dyn io::Write| match args.format {
                OutFormat::Csv => export::write_transitions_csv(w, &sets),
                OutFormat::Json => export::write_json(w, &sets),
            };
            match &args.out {
                Some(dir) => {
                    fs::create_dir_all(dir).map_err(io_failure)?;
                    let ext = match args.format {
                        OutFormat::Csv => "csv",
                        OutFormat::Json => "json",
                    };
                    let path = dir.join(format!("transitions.{ext}"));
                    let mut file = io::BufWriter::new(fs::File::create(&path).map_err(io_failure)?);
                    write(&mut file).and_then(|_| io::Write::flush(&mut file)).map_err(io_failure)?;
                    report(vec![path]);
                }
                None => write(&mut io::stdout().lock()).map_err(io_failure)?,
            }
            Ok(0)
        }
        Command::PhononRate(args) => {
            let (cfg, _) = load(args)?;
            let est = run_phonon_rate(&cfg).map_err(|e| Failure::Config(e.to_string()))?;
            let mut out = io::stdout().lock();
            match args.format {
                OutFormat::Csv => io::Write::write_fmt(
                    &mut out,
                    format_args!(
                        "omega_rabi_ueV,gamma_prime_ph_ueV\n{},{}\n",
                        est.omega_rabi, est.gamma_prime_ph
                    ),
                ),
                OutFormat::Json => export::write_json(&mut out, &est),
            }
            .map_err(io_failure)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
