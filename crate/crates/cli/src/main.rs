mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Accessibility audits for Jupyter notebooks.
#[derive(Debug, Parser)]
#[command(name = "nbaudit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full pipeline over notebooks and directories.
    Audit(AuditArgs),
    /// Render notebooks to themed HTML.
    Export(ExportArgs),
    /// Scan HTML files with the accessibility rules.
    Scan(ScanArgs),
    /// Extract imports and calls from notebook code cells.
    Analyze(AnalyzeArgs),
    /// Read or write alt text stored inside PNG files.
    #[command(subcommand)]
    Alt(AltCommand),
    /// Re-aggregate `notebooks.jsonl` files from earlier audits.
    Report(ReportArgs),
    /// Write a synthetic corpus with a ground-truth ledger.
    #[command(hide = true)]
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Directory for output files.
    #[arg(long, default_value = "nbaudit-out")]
    out: PathBuf,
    /// Write the primary machine-readable result to stdout as well.
    #[arg(long)]
    stdout: bool,
}

#[derive(Debug, Args)]
struct AuditArgs {
    /// Notebook files or directories searched recursively for *.ipynb.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Comma-separated theme names.
    #[arg(long, value_delimiter = ',', default_value = "light,dark,solarized,darcula,horizon,material-darker")]
    themes: Vec<String>,
    /// Kernel language to keep; `all` keeps every language.
    #[arg(long, default_value = "python")]
    language: String,
    /// Rule codes or `axe` / `htmlcs`, comma-separated.
    #[arg(long, default_value = "axe,htmlcs")]
    rules: String,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Audit a random subset of this many notebooks.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = nbaudit_core::audit::DEFAULT_SEED)]
    seed: u64,
    /// `DEGRADED,CRASH` byte counts or a TOML/JSON file with those keys.
    #[arg(long)]
    size_thresholds: Option<String>,
    /// Also write every decoded image to `<out>/images/<sha1>.<ext>`.
    #[arg(long)]
    dump_images: bool,
    /// Report formats, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "json,csv,html")]
    formats: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(required = true)]
    notebooks: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "light")]
    themes: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(required = true)]
    html: Vec<PathBuf>,
    /// Theme whose page colours apply where the document sets none.
    #[arg(long, default_value = "light")]
    theme: String,
    #[arg(long, default_value = "axe,htmlcs")]
    rules: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(required = true)]
    notebooks: Vec<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Subcommand)]
enum AltCommand {
    /// Store a description in a PNG.
    Embed {
        input: PathBuf,
        #[arg(long)]
        text: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the description stored in a PNG.
    Show { input: PathBuf },
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// `notebooks.jsonl` files written by `audit`.
    #[arg(required = true)]
    records: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "json,csv,html")]
    formats: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Audit(a) => commands::audit(a),
        Command::Export(a) => commands::export(a),
        Command::Scan(a) => commands::scan(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Alt(a) => commands::alt(a),
        Command::Report(a) => commands::report(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
