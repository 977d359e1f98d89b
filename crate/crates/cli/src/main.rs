use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use drivetune::commands::{self, ProfileAction};
use drivetune::config::AppConfig;
use drivetune::error::{AppError, AppResult};
use drivetune::store::{validate_user_id, Store};
use tracing_subscriber::EnvFilter;

const DEFAULT_DATA_DIR: &str = "./drivetune-data";

#[derive(Parser)]
#[command(name = "drivetune", version, about = "Mood-aware music recommendation for drivers")]
struct Cli {
    /// Data directory (catalog, labels, profiles, feedback log)
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Config file of `key = value` lines
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set driver.noise=0.05`
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Catalog management
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Inspect or edit a user profile
    Profile {
        user: String,
        #[command(subcommand)]
        action: ProfileCmd,
    },
    /// Run a closed-loop simulated drive
    Simulate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a recorded trace
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        user: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Import a JSON-lines catalog file
    Ingest { file: PathBuf },
    /// Label every track with a tag lexicon
    Classify {
        #[arg(long)]
        lexicon: PathBuf,
    },
}

#[derive(Subcommand)]
enum ProfileCmd {
    Like { track_id: String },
    Reset,
    Show,
}

fn run(cli: Cli) -> AppResult<String> {
    let mut config = match &cli.config {
        Some(p) => AppConfig::load(p)?,
        None => AppConfig::default(),
    };
    config.apply_overrides(&cli.overrides)?;
    let root = cli
        .data_dir
        .clone()
        .or_else(|| config.data_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR));
    let store = Store::new(root);

    match cli.command {
        Command::Catalog(CatalogCmd::Ingest { file }) => commands::catalog_ingest(&store, &file),
        Command::Catalog(CatalogCmd::Classify { lexicon }) => commands::catalog_classify(&store, &lexicon),
        Command::Profile { user, action } => {
            validate_user_id(&user)?;
            let action = match &action {
                ProfileCmd::Like { track_id } => ProfileAction::Like(track_id),
                ProfileCmd::Reset => ProfileAction::Reset,
                ProfileCmd::Show => ProfileAction::Show,
            };
            commands::profile(&store, &user, action)
        }
        Command::Simulate { seed, out } => commands::simulate(&store, &config, seed, &out),
        Command::Replay { trace, user, out } => {
            validate_user_id(&user)?;
            commands::replay(&store, &config, &trace, &user, &out)
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &AppError) -> u8 {
    e.exit_code() as u8
}
