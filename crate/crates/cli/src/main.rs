mod commands;
mod config;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};
use lexiprofile_core::{ScoreField, ScoreKind};

use config::{CommonArgs, RunConfig};

#[derive(Parser)]
#[command(name = "lexiprofile", version)]
#[command(about = "Lexicon-based likeability, emotion and BIG5 profiles of persons from word embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every roster person under each model.
    Profile {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Correlate lexicon scores of norms words with their human ratings.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// Scores to validate.
        #[arg(long, value_delimiter = ',', default_value = "likeability,valence")]
        kind: Vec<ScoreKind>,
    },
    /// Correlate scores across models and between fields of one model.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Read profiles.json from an earlier `profile` run instead of scoring.
        #[arg(long)]
        profiles: Option<PathBuf>,
        /// Fields compared across models (default: all).
        #[arg(long, value_delimiter = ',')]
        fields: Vec<ScoreField>,
        /// Field pair X:Y correlated within each model.
        #[arg(long, value_name = "X:Y", default_value = "likeability:valence")]
        within: Vec<String>,
    },
    /// BIG5 differences between the arts, politics and science domains.
    Groups {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        profiles: Option<PathBuf>,
        /// Model label to analyse, or "averaged".
        #[arg(long)]
        model: Option<String>,
        /// Persons written to radar.csv.
        #[arg(long, value_delimiter = ',')]
        persons: Vec<String>,
    },
    /// Write every token the other commands look up, one per line.
    ExportAllowlist {
        #[command(flatten)]
        common: CommonArgs,
        /// Output file (default: <out>/allowlist.txt).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn field_pair(s: &str) -> Result<(ScoreField, ScoreField)> {
    let (x, y) = s.split_once(':').ok_or_else(|| anyhow!("--within: expected X:Y, got {s:?}"))?;
    let parse = |f: &str| f.parse::<ScoreField>().map_err(|e| anyhow!("--within: {e}"));
    Ok((parse(x)?, parse(y)?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Profile { common } => commands::profile(&RunConfig::resolve(common)?),
        Command::Validate { common, kind } => commands::validate(&RunConfig::resolve(common)?, &kind),
        Command::Compare {
            common,
            profiles,
            fields,
            within,
        } => {
            let fields = if fields.is_empty() { ScoreField::ALL.to_vec() } else { fields };
            let within = within.iter().map(|s| field_pair(s)).collect::<Result<Vec<_>>>()?;
            commands::compare(&RunConfig::resolve(common)?, profiles.as_deref(), &fields, &within)
        }
        Command::Groups {
            common,
            profiles,
            model,
            persons,
        } => commands::groups(&RunConfig::resolve(common)?, profiles.as_deref(), model.as_deref(), &persons),
        Command::ExportAllowlist { common, output } => {
            commands::export_allowlist(&RunConfig::resolve(common)?, output)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
