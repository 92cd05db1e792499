use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lexiprofile_core::{
    average_batches, batch_profiles, cross_model_correlation, domain_group_study,
    intra_profile_correlation, validate_against_norms, Big5Dimension, Domain, GroupStudyResult,
    ProfileBatch, ProfileRecord, ScoreField, ScoreKind,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::inputs::{Inputs, ModelReport};
use crate::output::{num, Envelope, Metadata, Staged, SCHEMA_VERSION, TOOL};

pub const AVERAGED: &str = "averaged";

fn envelope<'a, T: Serialize>(
    command: &'static str,
    config: &'a RunConfig,
    inputs: &'a Inputs,
    models: &'a [ModelReport],
    profiles_input: Option<&'a Path>,
    mut warnings: Vec<String>,
    result: T,
) -> Envelope<'a, T> {
    let mut all = inputs.warnings();
    all.append(&mut warnings);
    for m in models {
        if m.parse.count_mismatch() {
            all.push(format!(
                "{}: header announces {} rows, file has {}",
                m.label, m.parse.header_count, m.parse.lines_total
            ));
        }
        if m.parse.lines_skipped > 0 {
            all.push(format!("{}: {} malformed rows skipped", m.label, m.parse.lines_skipped));
        }
    }
    Envelope {
        schema_version: SCHEMA_VERSION,
        tool: &TOOL,
        metadata: Metadata {
            command,
            config,
            profiles_input,
            lexicons: &inputs.lexicon_sources,
            models,
            warnings: all,
        },
        result,
    }
}

fn finish(staged: Staged) -> Result<()> {
    for p in staged.commit()? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

/// Profiles for every model, plus their average when exactly two are given.
#[derive(Serialize, Deserialize)]
pub struct Profiles {
    pub batches: Vec<ProfileBatch>,
    pub averaged: Option<ProfileBatch>,
}

impl Profiles {
    fn all(&self) -> impl Iterator<Item = &ProfileBatch> {
        self.batches.iter().chain(&self.averaged)
    }

    fn find(&self, label: &str) -> Option<&ProfileBatch> {
        self.all().find(|b| b.model_source == label)
    }
}

/// The parts of a profile output that later commands read back.
#[derive(Deserialize)]
struct ProfileFile {
    schema_version: String,
    #[serde(flatten)]
    profiles: Profiles,
}

fn read_profiles(path: &Path) -> Result<Profiles> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read '{}'", path.display()))?;
    let file: ProfileFile =
        serde_json::from_str(&text).with_context(|| format!("'{}' is not a profile output", path.display()))?;
    if file.schema_version != SCHEMA_VERSION {
        bail!(
            "'{}' has schema version {}, expected {SCHEMA_VERSION}",
            path.display(),
            file.schema_version
        );
    }
    Ok(file.profiles)
}

fn score_models(config: &RunConfig, inputs: &Inputs) -> Result<(Profiles, Vec<ModelReport>, Vec<String>)> {
    config.require_embeddings()?;
    let (models, reports) = inputs.load_models(config)?;
    let mut batches = Vec::new();
    for m in &models {
        let batch = batch_profiles(&inputs.roster, &m.table, &inputs.lexicons, &config.scoring)
            .with_context(|| format!("scoring model {:?}", m.label))?;
        batches.push(batch);
    }
    let mut warnings = Vec::new();
    let averaged = match batches.as_slice() {
        [a, b] => Some(average_batches(a, b).context("averaging models")?),
        [_] => None,
        _ => {
            warnings.push(format!("{} models given; averaged records need exactly two", batches.len()));
            None
        }
    };
    for b in &batches {
        if !b.failures.is_empty() {
            warnings.push(format!("{}: {} persons could not be scored", b.model_source, b.failures.len()));
        }
    }
    Ok((Profiles { batches, averaged }, reports, warnings))
}

fn profiles_from(
    config: &RunConfig,
    inputs: &Inputs,
    path: Option<&Path>,
) -> Result<(Profiles, Vec<ModelReport>, Vec<String>)> {
    match path {
        Some(p) => Ok((read_profiles(p)?, Vec::new(), Vec::new())),
        None => score_models(config, inputs),
    }
}

const PROFILE_COLUMNS: [&str; 22] = [
    "model_source",
    "person",
    "domain",
    "likeability",
    "valence",
    "arousal",
    "ep",
    "ep_transformed",
    "openness",
    "conscientiousness",
    "extraversion",
    "agreeableness",
    "neuroticism",
    "z_likeability",
    "z_valence",
    "z_arousal",
    "z_ep",
    "z_openness",
    "z_conscientiousness",
    "z_extraversion",
    "z_agreeableness",
    "z_neuroticism",
];

fn profile_row(r: &ProfileRecord) -> Vec<String> {
    let mut row = vec![r.model_source.clone(), r.person.clone(), r.domain.to_string()];
    row.extend(ScoreField::ALL.iter().map(|f| num(f.get(r))));
    match &r.z {
        Some(z) => row.extend(
            [
                z.likeability,
                z.valence,
                z.arousal,
                z.ep,
                z.openness,
                z.conscientiousness,
                z.extraversion,
                z.agreeableness,
                z.neuroticism,
            ]
            .map(num),
        ),
        None => row.extend(std::iter::repeat_n(String::new(), 9)),
    }
    row
}

pub fn profile(config: &RunConfig) -> Result<()> {
    let inputs = Inputs::load(config)?;
    let (profiles, reports, warnings) = score_models(config, &inputs)?;
    let mut staged = Staged::new(&config.out)?;
    if config.format.json() {
        let env = envelope("profile", config, &inputs, &reports, None, warnings, &profiles);
        staged.json("profiles.json", &env)?;
    }
    if config.format.csv() {
        let rows = profiles.all().flat_map(|b| b.records.iter().map(profile_row));
        staged.csv("profiles.csv", &PROFILE_COLUMNS, rows)?;
    }
    finish(staged)
}

#[derive(Serialize)]
struct ValidationSummary {
    model: String,
    score_kind: ScoreKind,
    r: f64,
    n_words_used: usize,
    n_words_missing: usize,
    points_csv: String,
}

#[derive(Serialize)]
struct Validations {
    validations: Vec<ValidationSummary>,
}

pub fn validate(config: &RunConfig, kinds: &[ScoreKind]) -> Result<()> {
    let inputs = Inputs::load(config)?;
    let Some(norms) = &inputs.norms else {
        bail!("validate needs --norms");
    };
    config.require_embeddings()?;
    let (models, reports) = inputs.load_models(config)?;
    let mut staged = Staged::new(&config.out)?;
    let mut summaries = Vec::new();
    for m in &models {
        for &kind in kinds {
            let lexicon = match kind {
                ScoreKind::Likeability => &inputs.lexicons.likeability,
                ScoreKind::Valence => &inputs.lexicons.valence,
            };
            let res = validate_against_norms(&m.table, norms, lexicon, kind, config.scoring.oov)
                .with_context(|| format!("validating {kind} on {:?}", m.label))?;
            let points_csv = format!("validation_{}_{kind}.csv", m.label);
            if config.format.csv() {
                let rows = res.points.iter().map(|p| vec![num(p.score), num(p.rating)]);
                staged.csv(&points_csv, &["score", "rating"], rows)?;
            }
            summaries.push(ValidationSummary {
                model: m.label.clone(),
                score_kind: kind,
                r: res.r,
                n_words_used: res.n_words_used,
                n_words_missing: res.n_words_missing,
                points_csv,
            });
        }
    }
    if config.format.json() {
        let result = Validations { validations: summaries };
        let env = envelope("validate", config, &inputs, &reports, None, Vec::new(), result);
        staged.json("validation.json", &env)?;
    }
    finish(staged)
}

#[derive(Serialize)]
struct CrossModel {
    a: String,
    b: String,
    field: ScoreField,
    r: f64,
    n: usize,
}

#[derive(Serialize)]
struct WithinModel {
    model: String,
    x: ScoreField,
    y: ScoreField,
    r: f64,
    n: usize,
}

#[derive(Serialize)]
struct Comparisons {
    cross_model: Vec<CrossModel>,
    within_model: Vec<WithinModel>,
}

pub fn compare(
    config: &RunConfig,
    profiles_path: Option<&Path>,
    fields: &[ScoreField],
    within: &[(ScoreField, ScoreField)],
) -> Result<()> {
    let inputs = Inputs::load(config)?;
    let (profiles, reports, warnings) = profiles_from(config, &inputs, profiles_path)?;
    let mut cross_model = Vec::new();
    for (i, a) in profiles.batches.iter().enumerate() {
        for b in &profiles.batches[i + 1..] {
            for &field in fields {
                let c = cross_model_correlation(a, b, field)
                    .with_context(|| format!("{field}: {} vs {}", a.model_source, b.model_source))?;
                cross_model.push(CrossModel {
                    a: a.model_source.clone(),
                    b: b.model_source.clone(),
                    field,
                    r: c.r,
                    n: c.n,
                });
            }
        }
    }
    let mut within_model = Vec::new();
    for batch in profiles.all() {
        for &(x, y) in within {
            let c = intra_profile_correlation(batch, x, y)
                .with_context(|| format!("{x} vs {y} in {}", batch.model_source))?;
            within_model.push(WithinModel {
                model: batch.model_source.clone(),
                x,
                y,
                r: c.r,
                n: c.n,
            });
        }
    }
    let mut staged = Staged::new(&config.out)?;
    if config.format.json() {
        let result = Comparisons { cross_model, within_model };
        let env = envelope("compare", config, &inputs, &reports, profiles_path, warnings, result);
        staged.json("comparison.json", &env)?;
    } else {
        let rows = cross_model
            .iter()
            .map(|c| vec![c.a.clone(), c.b.clone(), c.field.to_string(), num(c.r), c.n.to_string()])
            .chain(within_model.iter().map(|w| {
                vec![w.model.clone(), w.model.clone(), format!("{}:{}", w.x, w.y), num(w.r), w.n.to_string()]
            }));
        staged.csv("comparison.csv", &["a", "b", "field", "r", "n"], rows)?;
    }
    finish(staged)
}

#[derive(Serialize)]
struct Groups<'a> {
    source: &'a str,
    studies: Vec<GroupStudyResult>,
}

pub fn groups(config: &RunConfig, profiles_path: Option<&Path>, model: Option<&str>, persons: &[String]) -> Result<()> {
    let inputs = Inputs::load(config)?;
    let (profiles, reports, warnings) = profiles_from(config, &inputs, profiles_path)?;
    let source = match model {
        Some(m) => m.to_owned(),
        None if profiles.averaged.is_some() => AVERAGED.to_owned(),
        None => match profiles.batches.as_slice() {
            [only] => only.model_source.clone(),
            _ => bail!("several models and no averaged records; choose one with --model"),
        },
    };
    let batch = profiles
        .find(&source)
        .with_context(|| format!("no profiles for model {source:?}"))?;
    let studies = domain_group_study(batch, &inputs.roster).context("group study")?;
    let chosen: Vec<&ProfileRecord> = persons
        .iter()
        .map(|p| batch.get(p).with_context(|| format!("person {p:?} has no profile in {source:?}")))
        .collect::<Result<_>>()?;

    let mut staged = Staged::new(&config.out)?;
    if config.format.json() {
        let result = Groups { source: &source, studies };
        let env = envelope("groups", config, &inputs, &reports, profiles_path, warnings, result);
        staged.json("groups.json", &env)?;
    }
    if config.format.csv() {
        let long = batch
            .records
            .iter()
            .filter_map(|r| {
                let d = inputs.roster.domain_of(&r.person)?;
                Domain::ANALYZED.contains(&d).then_some((r, d))
            })
            .flat_map(|(r, d)| {
                Big5Dimension::ALL
                    .iter()
                    .map(move |dim| vec![r.person.clone(), d.to_string(), dim.to_string(), num(r.big5.get(*dim))])
            });
        staged.csv("groups_long.csv", &["person", "domain", "dimension", "score"], long)?;
        if !chosen.is_empty() {
            let radar = chosen.iter().flat_map(|r| {
                let z = r.z.expect("batches are standardized");
                let zs = [z.openness, z.conscientiousness, z.extraversion, z.agreeableness, z.neuroticism];
                Big5Dimension::ALL
                    .iter()
                    .zip(zs)
                    .map(|(dim, z)| vec![r.person.clone(), dim.to_string(), num(r.big5.get(*dim)), num(z)])
            });
            staged.csv("radar.csv", &["person", "dimension", "score", "z"], radar)?;
        }
    }
    finish(staged)
}

pub fn export_allowlist(config: &RunConfig, path: Option<PathBuf>) -> Result<()> {
    let inputs = Inputs::load(config)?;
    let mut text = inputs.allow_tokens().join("\n");
    text.push('\n');
    let (dir, name) = match &path {
        Some(p) => (
            p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_owned(),
            p.file_name().context("allow-list path has no file name")?.to_string_lossy().into_owned(),
        ),
        None => (config.out.clone(), "allowlist.txt".to_owned()),
    };
    let mut staged = Staged::new(&dir)?;
    staged.text(&name, &text)?;
    finish(staged)
}
