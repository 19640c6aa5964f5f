mod commands;
mod exit;
mod ui;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::exit::Failure;
use crate::ui::Ui;

/// Checksummed ML pipelines, lifecycle provenance and verifiable AI model passports.
#[derive(Parser)]
#[command(name = "aimp", version, about)]
struct Cli {
    /// Run as if started in DIR.
    #[arg(short = 'C', value_name = "DIR", global = true)]
    directory: Option<PathBuf>,
    /// Print one canonical JSON document on stdout; human output goes to stderr.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create the object store and template files. Never overwrites.
    Init,
    /// Execute stale stages and update the lock file.
    Run(RunArgs),
    /// Report which stages are stale and why.
    Status,
    /// Fetch dataset descriptors from a FAIR Data Point.
    Harvest(HarvestArgs),
    /// Build or verify model passports.
    #[command(subcommand)]
    Passport(PassportCommand),
    /// Render a passport as HTML or Markdown.
    Report(ReportArgs),
    /// Upload local objects to a remote.
    Push(RemoteArgs),
    /// Download the objects named in the lock file from a remote.
    Pull(PullArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Re-execute stages even when cached.
    #[arg(long)]
    force: bool,
    /// Run only this stage and its ancestors.
    #[arg(long, value_name = "NAME")]
    stage: Option<String>,
    /// Number of stages to run concurrently.
    #[arg(long, short = 'j', default_value_t = 1, value_name = "N")]
    jobs: usize,
}

#[derive(Args)]
struct HarvestArgs {
    /// Catalog or dataset URL.
    url: String,
    /// Output file for the harvested descriptors.
    #[arg(long, default_value = commands::DATASETS_FILE)]
    out: PathBuf,
    /// Retries on network errors and 5xx responses.
    #[arg(long, default_value_t = 0)]
    retries: u32,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 30)]
    timeout: u64,
}

#[derive(Subcommand)]
enum PassportCommand {
    /// Assemble the passport of the last successful run.
    Build(BuildArgs),
    /// Check a passport against itself and, optionally, the model and workspace.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Manual metadata file.
    #[arg(long, default_value = aimp_core::passport::MANUAL_FILE)]
    manual: PathBuf,
    /// Harvested descriptors to embed (defaults to the harvest output when present).
    #[arg(long)]
    datasets: Option<PathBuf>,
    /// Directory the passport files are written to.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Passport JSON file.
    file: PathBuf,
    /// Model file to check against the recorded model artifact.
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Workspace whose lock-recorded files are checked.
    #[arg(long, value_name = "DIR")]
    workspace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Html,
    Markdown,
}

#[derive(Args)]
struct ReportArgs {
    /// Passport JSON file.
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Html)]
    format: Format,
    /// Output path (default: next to the passport).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave out the pipeline drawing.
    #[arg(long)]
    no_graph: bool,
}

#[derive(Args)]
struct RemoteArgs {
    /// Remote base URL.
    #[arg(long)]
    remote: String,
    /// Name of the environment variable holding the session token.
    #[arg(long, value_name = "VAR")]
    token_env: String,
}

#[derive(Args)]
struct PullArgs {
    #[command(flatten)]
    remote: RemoteArgs,
    /// Also restore missing workspace files from the store.
    #[arg(long)]
    checkout: bool,
}

fn dispatch(cli: Cli, ui: &Ui) -> Result<u8, Failure> {
    if let Some(dir) = &cli.directory {
        std::env::set_current_dir(dir)
            .map_err(|e| Failure::config(format!("cannot enter {}: {e}", dir.display())))?;
    }
    match cli.command {
        Command::Init => commands::init(ui),
        Command::Run(a) => commands::run(ui, a.force, a.stage, a.jobs),
        Command::Status => commands::status(ui),
        Command::Harvest(a) => commands::harvest(ui, &a.url, &a.out, a.retries, a.timeout),
        Command::Passport(PassportCommand::Build(a)) => {
            commands::passport_build(ui, &a.manual, a.datasets.as_deref(), a.out.as_deref())
        }
        Command::Passport(PassportCommand::Verify(a)) => {
            commands::passport_verify(ui, &a.file, a.model.as_deref(), a.workspace.as_deref())
        }
        Command::Report(a) => {
            let format = match a.format {
                Format::Html => aimp_core::report::RenderFormat::Html,
                Format::Markdown => aimp_core::report::RenderFormat::Markdown,
            };
            commands::report(ui, &a.file, format, a.out.as_deref(), !a.no_graph)
        }
        Command::Push(a) => commands::push(ui, &a.remote, &a.token_env),
        Command::Pull(a) => commands::pull(ui, &a.remote.remote, &a.remote.token_env, a.checkout),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::CONFIG
            } else {
                exit::OK
            });
        }
    };
    let ui = Ui::new(cli.json);
    match dispatch(cli, &ui) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            ui.error(&f.message);
            ExitCode::from(f.code)
        }
    }
}
