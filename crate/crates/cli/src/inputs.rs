use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lexiprofile_core::{
    bundled, coverage_check, load_lexicon, load_norms, load_roster, parse_vec_file, AllowList,
    Big5Lexicons, CoverageReport, EmbeddingTable, Lexicon, LexiconSet, NormsTable, ParseReport,
    PersonRoster,
};
use serde::Serialize;

use crate::config::RunConfig;

/// Where a lexicon came from.
#[derive(Clone, Debug, Serialize)]
pub struct LexiconSource {
    pub name: String,
    pub path: Option<PathBuf>,
    pub placeholder: bool,
}

pub struct Inputs {
    pub roster: PersonRoster,
    pub lexicons: LexiconSet,
    pub lexicon_sources: Vec<LexiconSource>,
    pub norms: Option<NormsTable>,
}

pub struct Model {
    pub label: String,
    pub table: EmbeddingTable,
}

/// Per-model load diagnostics written into output metadata.
#[derive(Clone, Debug, Serialize)]
pub struct ModelReport {
    pub label: String,
    pub path: PathBuf,
    pub case_mode: lexiprofile_core::CaseMode,
    pub parse: ParseReport,
    pub coverage: Vec<CoverageReport>,
}

fn lexicon_from(
    name: &str,
    explicit: Option<&Path>,
    dir: Option<&Path>,
    fallback: Lexicon,
    fallback_is_placeholder: bool,
) -> Result<(Lexicon, LexiconSource)> {
    let path = explicit
        .map(Path::to_path_buf)
        .or_else(|| dir.map(|d| d.join(format!("{name}.lex"))).filter(|p| p.exists()));
    Ok(match path {
        Some(p) => {
            let lex = load_lexicon(&p, name).with_context(|| format!("lexicon {name}"))?;
            (lex, LexiconSource { name: name.into(), path: Some(p), placeholder: false })
        }
        None => (
            fallback,
            LexiconSource { name: name.into(), path: None, placeholder: fallback_is_placeholder },
        ),
    })
}

impl Inputs {
    pub fn load(config: &RunConfig) -> Result<Self> {
        let roster = match &config.roster {
            Some(p) => load_roster(p).with_context(|| format!("roster '{}'", p.display()))?,
            None => bundled::roster(),
        };

        let dir = config.lexicon_dir.as_deref();
        let mut sources = Vec::new();
        let mut load = |name, explicit: Option<&Path>, fallback, placeholder| -> Result<Lexicon> {
            let (lex, source) = lexicon_from(name, explicit, dir, fallback, placeholder)?;
            sources.push(source);
            Ok(lex)
        };
        let b = bundled::big5();
        let lexicons = LexiconSet {
            likeability: load("anderson", None, bundled::anderson(), false)?,
            big5: Big5Lexicons {
                openness: load("openness", None, b.openness, false)?,
                conscientiousness: load("conscientiousness", None, b.conscientiousness, false)?,
                extraversion: load("extraversion", None, b.extraversion, false)?,
                agreeableness: load("agreeableness", None, b.agreeableness, false)?,
                neuroticism: load("neuroticism", None, b.neuroticism, false)?,
            },
            valence: load("valence", config.valence_lexicon.as_deref(), bundled::valence_placeholder(), true)?,
            arousal: load("arousal", config.arousal_lexicon.as_deref(), bundled::arousal_placeholder(), true)?,
        };

        let norms = match &config.norms {
            Some(p) => Some(
                load_norms(p, &config.norms_format).with_context(|| format!("norms '{}'", p.display()))?,
            ),
            None => None,
        };

        Ok(Inputs {
            roster,
            lexicons,
            lexicon_sources: sources,
            norms,
        })
    }

    /// Every token any command may look up, sorted and deduplicated.
    pub fn allow_tokens(&self) -> Vec<String> {
        let mut tokens: BTreeSet<String> = self.roster.names().map(String::from).collect();
        tokens.extend(self.lexicons.iter().flat_map(|l| l.tokens().map(String::from)));
        if let Some(n) = &self.norms {
            tokens.extend(n.iter().map(|(w, _)| w.to_owned()));
        }
        tokens.into_iter().collect()
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .lexicon_sources
            .iter()
            .filter(|s| s.placeholder)
            .map(|s| {
                format!(
                    "{} lexicon is the bundled non-canonical placeholder; pass --{}-lexicon for real scores",
                    s.name, s.name
                )
            })
            .collect();
        if let Some(n) = &self.norms {
            out.extend(n.warnings.iter().map(|w| format!("norms: {w}")));
        }
        out
    }

    pub fn load_models(&self, config: &RunConfig) -> Result<(Vec<Model>, Vec<ModelReport>)> {
        let allow = AllowList::new(self.allow_tokens());
        let mut models = Vec::new();
        let mut reports = Vec::new();
        for spec in &config.embeddings {
            let (table, report) = parse_vec_file(&spec.path, &spec.label, config.case_mode, Some(&allow))
                .with_context(|| format!("embeddings {:?}", spec.label))?;
            reports.push(ModelReport {
                label: spec.label.clone(),
                path: spec.path.clone(),
                case_mode: config.case_mode,
                parse: report,
                coverage: self.lexicons.iter().map(|l| coverage_check(l, &table)).collect(),
            });
            models.push(Model {
                label: spec.label.clone(),
                table,
            });
        }
        Ok((models, reports))
    }
}
