use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sea_cli::{commands, CommandError, Context, Outcome};
use sea_core::find_spec;

/// Series elastic actuator simulation and analysis.
#[derive(Debug, Parser)]
#[command(name = "sea", version)]
struct Cli {
    /// Run configuration (`section.key = value [unit]` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Noise seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write CSV artifacts (default).
    #[arg(long, global = true, overrides_with = "no_csv")]
    csv: bool,
    /// Skip CSV artifacts.
    #[arg(long = "no-csv", global = true, overrides_with = "csv")]
    no_csv: bool,
    /// Catalog actuator whose preset seeds the configuration.
    #[arg(long, global = true, default_value = "SEA-23-23")]
    catalog: String,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Sub {
    /// Built-in datasheet entries and their consistency checks.
    Catalog,
    /// One closed-loop episode; writes trajectory.csv.
    Simulate,
    /// Force-tracking frequency sweep; writes bode.csv.
    Bode,
    /// Output impedance sweep; writes impedance.csv.
    Impedance,
    /// Smallest resolvable force step.
    Resolve,
    /// Contact chatter at nominal and stiffened sensor.
    Chatter,
    /// Impact peak force, elastic vs stiff.
    Shock,
    /// Energy accounting over a harmonic episode.
    Energy,
    /// Stance force distribution; writes stance.csv.
    Stance,
    /// Full measured-vs-datasheet comparison.
    Report,
}

fn run(cli: &Cli) -> Result<Outcome, Box<dyn std::error::Error>> {
    if let Sub::Catalog = cli.command {
        return Ok(commands::catalog()?);
    }
    let spec = find_spec(&cli.catalog)?;
    let text = cli
        .config
        .as_ref()
        .map(|p| fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display())))
        .transpose()?;
    let ctx = Context::new(spec, text.as_deref(), cli.seed)?;
    let outcome: Result<Outcome, CommandError> = match cli.command {
        Sub::Catalog => unreachable!(),
        Sub::Simulate => commands::simulate(&ctx),
        Sub::Bode => commands::bode(&ctx),
        Sub::Impedance => commands::impedance(&ctx),
        Sub::Resolve => commands::resolve(&ctx),
        Sub::Chatter => commands::chatter(&ctx),
        Sub::Shock => commands::shock(&ctx),
        Sub::Energy => commands::energy(&ctx),
        Sub::Stance => commands::stance(&ctx),
        Sub::Report => commands::report(&ctx),
    };
    Ok(outcome?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    print!("{}", outcome.text);
    if !cli.no_csv && !outcome.files.is_empty() {
        if let Err(e) = fs::create_dir_all(&cli.out) {
            eprintln!("error: {}: {e}", cli.out.display());
            return ExitCode::from(2);
        }
        for (name, bytes) in &outcome.files {
            let path = cli.out.join(name);
            if let Err(e) = fs::write(&path, bytes) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
            eprintln!("wrote {}", path.display());
        }
    }
    ExitCode::from(outcome.exit_code as u8)
}
