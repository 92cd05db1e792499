//! Studies over profile batches: validation against human norms, agreement
//! between models, correlations inside a profile and domain-group ANOVA.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding_io::EmbeddingTable;
use crate::lexicons::{Domain, Lexicon, NormsTable, PersonRoster};
use crate::numerics::{one_way_anova, pearson, AnovaResult, GroupSample, NumericsError};
use crate::scoring::{Big5Dimension, OovPolicy, PreparedLexicon, ProfileBatch, ScoreField, ScoringError};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum AnalysisError {
    #[error("need at least 3 norms words with vectors, got {0}")]
    TooFewWords(usize),
    #[error("need at least 3 persons common to both batches, got {0}")]
    TooFewCommon(usize),
    #[error("domain {domain} has {got} scored persons, need at least 2")]
    TooFewInDomain { domain: Domain, got: usize },
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Which lexicon scored the norms words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Valence,
    Likeability,
}

impl ScoreKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::Valence => "valence",
            ScoreKind::Likeability => "likeability",
        }
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "valence" => Ok(ScoreKind::Valence),
            "likeability" => Ok(ScoreKind::Likeability),
            other => Err(format!("unknown score kind {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub word: String,
    pub score: f64,
    pub rating: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub score_kind: ScoreKind,
    pub r: f64,
    pub n_words_used: usize,
    pub n_words_missing: usize,
    /// Scored words in norms order.
    pub points: Vec<ValidationPoint>,
}

/// Score every norms word that has a vector with `lexicon`, treating the
/// word like a person, and correlate the scores with the human ratings.
/// Words without a vector are counted and dropped.
pub fn validate_against_norms(
    table: &EmbeddingTable,
    norms: &NormsTable,
    lexicon: &Lexicon,
    score_kind: ScoreKind,
    oov: OovPolicy,
) -> Result<ValidationResult, AnalysisError> {
    let prepared = PreparedLexicon::new(lexicon, table, oov)?;
    let words: Vec<(&str, f64)> = norms.iter().collect();
    let scored: Vec<Option<Result<ValidationPoint, ScoringError>>> = words
        .par_iter()
        .map(|&(word, rating)| {
            table.lookup(word).map(|v| {
                prepared.score_vector(word, v).map(|s| ValidationPoint {
                    word: word.to_owned(),
                    score: s.raw,
                    rating,
                })
            })
        })
        .collect();

    let mut points = Vec::new();
    let mut missing = 0;
    for outcome in scored {
        match outcome {
            Some(point) => points.push(point?),
            None => missing += 1,
        }
    }
    if points.len() < 3 {
        return Err(AnalysisError::TooFewWords(points.len()));
    }
    let scores: Vec<f64> = points.iter().map(|p| p.score).collect();
    let ratings: Vec<f64> = points.iter().map(|p| p.rating).collect();
    Ok(ValidationResult {
        score_kind,
        r: pearson(&scores, &ratings)?,
        n_words_used: points.len(),
        n_words_missing: missing,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub n: usize,
}

/// Pearson correlation of `field` between two batches over the persons they
/// share.
pub fn cross_model_correlation(
    a: &ProfileBatch,
    b: &ProfileBatch,
    field: ScoreField,
) -> Result<Correlation, AnalysisError> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = a
        .records
        .iter()
        .filter_map(|ra| b.get(&ra.person).map(|rb| (field.get(ra), field.get(rb))))
        .unzip();
    if xs.len() < 3 {
        return Err(AnalysisError::TooFewCommon(xs.len()));
    }
    Ok(Correlation {
        r: pearson(&xs, &ys)?,
        n: xs.len(),
    })
}

/// Pearson correlation between two fields of the same batch.
pub fn intra_profile_correlation(
    batch: &ProfileBatch,
    x: ScoreField,
    y: ScoreField,
) -> Result<Correlation, AnalysisError> {
    let xs = batch.column(x);
    Ok(Correlation {
        r: pearson(&xs, &batch.column(y))?,
        n: xs.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStudyResult {
    pub dimension: Big5Dimension,
    pub anova: AnovaResult,
    /// Domains from highest to lowest mean.
    pub ordering: Vec<Domain>,
}

/// Per-person BIG5 scores grouped by the roster's domain. Persons missing
/// from the roster or unclassified are left out.
pub fn domain_samples(
    batch: &ProfileBatch,
    roster: &PersonRoster,
    dimension: Big5Dimension,
) -> Vec<(Domain, Vec<f64>)> {
    Domain::ANALYZED
        .iter()
        .map(|&d| {
            let values = batch
                .records
                .iter()
                .filter(|r| roster.domain_of(&r.person) == Some(d))
                .map(|r| r.big5.get(dimension))
                .collect();
            (d, values)
        })
        .collect()
}

/// One-way ANOVA across the three analysis domains for each BIG5 dimension.
pub fn domain_group_study(
    batch: &ProfileBatch,
    roster: &PersonRoster,
) -> Result<Vec<GroupStudyResult>, AnalysisError> {
    Big5Dimension::ALL
        .iter()
        .map(|&dimension| {
            let samples = domain_samples(batch, roster, dimension);
            if let Some((domain, v)) = samples.iter().find(|(_, v)| v.len() < 2) {
                return Err(AnalysisError::TooFewInDomain {
                    domain: *domain,
                    got: v.len(),
                });
            }
            let groups: Vec<GroupSample> = samples
                .iter()
                .map(|(d, v)| GroupSample::new(d.as_str(), v.clone()))
                .collect();
            let anova = one_way_anova(&groups)?;
            let mut ordering: Vec<(Domain, f64)> = samples
                .iter()
                .map(|(d, _)| (*d, anova.group_means[d.as_str()]))
                .collect();
            ordering.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            Ok(GroupStudyResult {
                dimension,
                anova,
                ordering: ordering.into_iter().map(|(d, _)| d).collect(),
            })
        })
        .collect()
}
