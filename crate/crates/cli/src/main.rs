use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coevo::scenario::{parse_config, preset, preset_names, preset_text, run_scenario, write_rows, ScenarioConfig};
use coevo::Error;

const EXIT_IO: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_BLOW_UP: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

#[derive(Parser)]
#[command(name = "coevo", version, about = "Coupled density and edge-weight dynamics on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write `<name>.csv` and `<name>.summary.txt`.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in preset.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the scenario file of a preset, as a starting point.
    Scaffold { name: String },
    /// Run a scenario and print its invariant checks without writing files.
    Verify { config: PathBuf },
    /// List the presets.
    List,
}

fn load(path: &Path) -> Result<ScenarioConfig, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_IO
    })?;
    parse_config(&text).map_err(|errors| {
        for e in &errors.0 {
            eprintln!("{}: {e}", path.display());
        }
        EXIT_PARSE
    })
}

fn failure_code(error: &Error) -> u8 {
    match error {
        Error::BlowUp { .. } => EXIT_BLOW_UP,
        Error::ContractViolation(_) | Error::HorizonTooLong { .. } => EXIT_INVARIANT,
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } => EXIT_PARSE,
        Error::TooLarge(_) => EXIT_IO,
    }
}

fn execute(config: ScenarioConfig, out: Option<PathBuf>, write: bool) -> u8 {
    let dir = out.unwrap_or_else(|| config.output.dir.clone());
    let outcome = match run_scenario(&config) {
        Ok(o) => o,
        Err(failure) => {
            eprintln!("error: {}", failure.error);
            if write && !failure.partial.is_empty() {
                let path = dir.join(format!("{}.partial.csv", config.output.name));
                let saved = std::fs::create_dir_all(&dir)
                    .and_then(|_| std::fs::File::create(&path))
                    .and_then(|f| write_rows(&failure.partial, std::io::BufWriter::new(f)));
                match saved {
                    Ok(()) => eprintln!(
                        "partial trajectory ({} rows) written to {}",
                        failure.partial.len(),
                        path.display()
                    ),
                    Err(e) => eprintln!("error: cannot write {}: {e}", path.display()),
                }
            }
            return failure_code(&failure.error);
        }
    };
    if write {
        match outcome.write_outputs(&dir) {
            Ok((csv, summary)) => println!("wrote {} and {}", csv.display(), summary.display()),
            Err(e) => {
                eprintln!("error: cannot write outputs to {}: {e}", dir.display());
                return EXIT_IO;
            }
        }
    }
    print!("{}", outcome.verification_table());
    if outcome.all_passed() {
        0
    } else {
        EXIT_INVARIANT
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out } => match load(&config) {
            Ok(c) => execute(c, out, true),
            Err(code) => code,
        },
        Command::Preset { name, out } => match preset(&name) {
            Ok(c) => execute(c, out, true),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_PARSE
            }
        },
        Command::Scaffold { name } => match preset_text(&name) {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_PARSE
            }
        },
        Command::Verify { config } => match load(&config) {
            Ok(c) => execute(c, None, false),
            Err(code) => code,
        },
        Command::List => {
            for name in preset_names() {
                println!("{name}");
            }
            0
        }
    };
    ExitCode::from(code)
}
