mod error;
mod manifest;
mod provenance;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliResult;
use crate::manifest::Manifest;
use crate::stages::{Ctx, Source};

/// Build, validate and analyze multilingual adjective-noun pair ontologies.
#[derive(Debug, Parser)]
#[command(name = "anpkit", version)]
struct Cli {
    /// Run manifest (TOML).
    #[arg(long, global = true, default_value = "anpkit.toml")]
    manifest: PathBuf,
    /// Restrict to one configured language.
    #[arg(long, global = true)]
    lang: Option<String>,
    /// Override the stage's configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the manifest's output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SourceArg {
    /// Read the crowd-validated ontology instead of the pre-crowd one.
    #[arg(long)]
    post_crowd: bool,
}

impl SourceArg {
    fn source(&self) -> Source {
        if self.post_crowd {
            Source::PostCrowd
        } else {
            Source::PreCrowd
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pull emotion slices from the corpus and collect candidate pairs.
    Discover,
    /// Run the filter cascade over discovered candidates.
    Filter,
    /// Emotion heatmap, sentiment distribution and ontology sizes.
    Analyze(SourceArg),
    /// Cross-lingual noun and phrase clustering with alignment matrices.
    Cluster(SourceArg),
    /// Per-language sentiment classifiers and the cross-language accuracy matrix.
    Predict(SourceArg),
    /// Overlap of two ontologies over frequency thresholds.
    Compare {
        /// Defaults to the pre-crowd ontology of --lang.
        #[arg(long)]
        a: Option<PathBuf>,
        /// Reference ontology; defaults to the post-crowd ontology of --lang.
        #[arg(long)]
        b: Option<PathBuf>,
        /// Output name under compare/.
        #[arg(long)]
        name: Option<String>,
    },
    /// Start the crowd validation service and the annotation UI.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Built UI directory served at /ui.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
    /// Load offline judgments (worker,adj,noun,verdict,is_test,timestamp).
    ImportJudgments {
        #[arg(long)]
        csv: PathBuf,
    },
    /// Write the post-crowd ontology and agreement report.
    Export,
}

fn run(cli: Cli) -> CliResult<()> {
    let manifest = Manifest::load(&cli.manifest)?;
    let ctx = Ctx::new(manifest, cli.out, cli.lang, cli.seed)?;
    match cli.command {
        Command::Discover => stages::discover(&ctx),
        Command::Filter => stages::filter(&ctx),
        Command::Analyze(s) => stages::analyze(&ctx, s.source()),
        Command::Cluster(s) => stages::cluster(&ctx, s.source()),
        Command::Predict(s) => stages::predict(&ctx, s.source()),
        Command::Compare { a, b, name } => stages::compare(&ctx, a.as_deref(), b.as_deref(), name.as_deref()),
        Command::Serve { addr, ui } => stages::serve(&ctx, &addr, ui.as_deref()),
        Command::ImportJudgments { csv } => stages::import_judgments(&ctx, &csv),
        Command::Export => stages::export(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
