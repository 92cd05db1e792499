use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use lexiprofile_core::{CaseMode, Ddof, EpInputs, EpOrder, NormsFormat, OovPolicy, ScoringOptions};
use serde::{Deserialize, Serialize};

pub const DATA_DIR_ENV: &str = "LEXIPROFILE_DATA_DIR";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// config file, then to the data directory, then to the bundled data.
#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Embedding table as LABEL=PATH. Repeat for several models.
    #[arg(long = "embeddings", value_name = "LABEL=PATH")]
    pub embeddings: Vec<String>,
    /// TOML file with default settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Person roster CSV (name,domain).
    #[arg(long)]
    pub roster: Option<PathBuf>,
    /// Directory holding <name>.lex files.
    #[arg(long)]
    pub lexicon_dir: Option<PathBuf>,
    #[arg(long)]
    pub valence_lexicon: Option<PathBuf>,
    #[arg(long)]
    pub arousal_lexicon: Option<PathBuf>,
    /// Human rating norms CSV.
    #[arg(long)]
    pub norms: Option<PathBuf>,
    #[arg(long)]
    pub norms_word_column: Option<String>,
    #[arg(long)]
    pub norms_value_column: Option<String>,
    #[arg(long)]
    pub norms_scale_min: Option<f64>,
    #[arg(long)]
    pub norms_scale_max: Option<f64>,
    /// exact | fold-fallback
    #[arg(long)]
    pub case_mode: Option<String>,
    /// error | skip
    #[arg(long)]
    pub oov: Option<String>,
    /// 0 | 1
    #[arg(long)]
    pub ddof: Option<String>,
    /// transform-then-standardize | standardize-then-transform
    #[arg(long)]
    pub ep_order: Option<String>,
    /// raw | standardized
    #[arg(long)]
    pub ep_inputs: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// The `--config` file. Keys match the long flag names with underscores.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub embeddings: Vec<String>,
    pub roster: Option<PathBuf>,
    pub lexicon_dir: Option<PathBuf>,
    pub valence_lexicon: Option<PathBuf>,
    pub arousal_lexicon: Option<PathBuf>,
    pub norms: Option<PathBuf>,
    pub norms_word_column: Option<String>,
    pub norms_value_column: Option<String>,
    pub norms_scale_min: Option<f64>,
    pub norms_scale_max: Option<f64>,
    pub case_mode: Option<String>,
    pub oov: Option<String>,
    pub ddof: Option<u8>,
    pub ep_order: Option<String>,
    pub ep_inputs: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelSpec {
    pub label: String,
    pub path: PathBuf,
}

impl FromStr for ModelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (label, path) = s
            .split_once('=')
            .ok_or_else(|| format!("expected LABEL=PATH, got {s:?}"))?;
        if label.is_empty() || path.is_empty() {
            return Err(format!("expected LABEL=PATH, got {s:?}"));
        }
        if !label.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) {
            return Err(format!("label {label:?} may only contain ASCII letters, digits, '_', '-' and '.'"));
        }
        if label == "averaged" {
            return Err("the label \"averaged\" is reserved".into());
        }
        Ok(ModelSpec {
            label: label.to_owned(),
            path: PathBuf::from(path),
        })
    }
}

/// Fully resolved settings, echoed into every output.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub embeddings: Vec<ModelSpec>,
    /// `None` means the bundled roster.
    pub roster: Option<PathBuf>,
    pub lexicon_dir: Option<PathBuf>,
    pub valence_lexicon: Option<PathBuf>,
    pub arousal_lexicon: Option<PathBuf>,
    pub norms: Option<PathBuf>,
    pub norms_format: NormsFormat,
    pub case_mode: CaseMode,
    pub scoring: ScoringOptions,
    pub out: PathBuf,
    pub format: Format,
}

fn parse_opt<T: FromStr<Err = String>>(flag: &str, value: Option<String>) -> Result<Option<T>> {
    value
        .map(|v| v.parse::<T>())
        .transpose()
        .map_err(|e| anyhow::anyhow!("--{flag}: {e}"))
}

fn existing(dir: &Path, name: &str) -> Option<PathBuf> {
    let p = dir.join(name);
    p.exists().then_some(p)
}

impl RunConfig {
    pub fn resolve(args: CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config '{}'", path.display()))?;
                toml::from_str::<FileConfig>(&text)
                    .with_context(|| format!("invalid config '{}'", path.display()))?
            }
            None => FileConfig::default(),
        };
        let data_dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);

        let embeddings = if args.embeddings.is_empty() { file.embeddings } else { args.embeddings };
        let embeddings = embeddings
            .iter()
            .map(|s| s.parse::<ModelSpec>().map_err(|e| anyhow::anyhow!("--embeddings: {e}")))
            .collect::<Result<Vec<_>>>()?;
        let mut labels: Vec<&str> = embeddings.iter().map(|m| m.label.as_str()).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            bail!("--embeddings: label {:?} given twice", w[0]);
        }

        let roster = args
            .roster
            .or(file.roster)
            .or_else(|| data_dir.as_deref().and_then(|d| existing(d, "roster.csv")));
        let lexicon_dir = args
            .lexicon_dir
            .or(file.lexicon_dir)
            .or_else(|| data_dir.as_deref().and_then(|d| existing(d, "lexicons")));
        let norms = args
            .norms
            .or(file.norms)
            .or_else(|| data_dir.as_deref().and_then(|d| existing(d, "norms.csv")));

        let defaults = NormsFormat::default();
        let norms_format = NormsFormat {
            word_column: args.norms_word_column.or(file.norms_word_column).unwrap_or(defaults.word_column),
            value_column: args.norms_value_column.or(file.norms_value_column).unwrap_or(defaults.value_column),
            scale_min: args.norms_scale_min.or(file.norms_scale_min).unwrap_or(defaults.scale_min),
            scale_max: args.norms_scale_max.or(file.norms_scale_max).unwrap_or(defaults.scale_max),
        };

        let scoring = ScoringOptions {
            oov: parse_opt::<OovPolicy>("oov", args.oov.or(file.oov))?.unwrap_or_default(),
            ddof: parse_opt::<Ddof>("ddof", args.ddof.or(file.ddof.map(|d| d.to_string())))?.unwrap_or_default(),
            ep_order: parse_opt::<EpOrder>("ep-order", args.ep_order.or(file.ep_order))?.unwrap_or_default(),
            ep_inputs: parse_opt::<EpInputs>("ep-inputs", args.ep_inputs.or(file.ep_inputs))?.unwrap_or_default(),
        };

        let config = RunConfig {
            embeddings,
            roster,
            lexicon_dir,
            valence_lexicon: args.valence_lexicon.or(file.valence_lexicon),
            arousal_lexicon: args.arousal_lexicon.or(file.arousal_lexicon),
            norms,
            norms_format,
            case_mode: parse_opt::<CaseMode>("case-mode", args.case_mode.or(file.case_mode))?.unwrap_or_default(),
            scoring,
            out: args.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            format: args.format.or(file.format).unwrap_or_default(),
        };
        config.check_files()?;
        Ok(config)
    }

    fn check_files(&self) -> Result<()> {
        let mut paths: Vec<(&str, &Path)> = self.embeddings.iter().map(|m| ("embeddings", m.path.as_path())).collect();
        let optional = [
            ("roster", &self.roster),
            ("lexicon-dir", &self.lexicon_dir),
            ("valence-lexicon", &self.valence_lexicon),
            ("arousal-lexicon", &self.arousal_lexicon),
            ("norms", &self.norms),
        ];
        paths.extend(optional.iter().filter_map(|(f, p)| p.as_deref().map(|p| (*f, p))));
        for (flag, path) in paths {
            if !path.exists() {
                bail!("--{flag}: '{}' does not exist", path.display());
            }
        }
        Ok(())
    }

    pub fn require_embeddings(&self) -> Result<()> {
        if self.embeddings.is_empty() {
            bail!("at least one --embeddings LABEL=PATH is required");
        }
        Ok(())
    }
}
