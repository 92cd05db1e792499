//! Bipolar lexicon scoring and the person profiles built from it.
//!
//! A bipolar score is the mean cosine similarity between an entity's vector
//! and the positive pole of a lexicon, minus the mean similarity to the
//! negative pole. Likeability, valence, arousal and each BIG5 dimension are
//! all bipolar scores over different lexicons.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding_io::EmbeddingTable;
use crate::lexicons::{bundled, Big5Lexicons, Domain, Lexicon, LexiconSet, PersonRoster, Pole};
use crate::numerics::{self, signed_log1p, zscore, Ddof, NumericsError};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ScoringError {
    #[error("person {0:?} is not in the embedding table")]
    PersonOov(String),
    #[error("{lexicon}: token {token:?} is not in the embedding table")]
    TokenOov { lexicon: String, token: String },
    #[error("{lexicon}: no token of the {pole} pole is in the embedding table")]
    EmptyUsablePole { lexicon: String, pole: Pole },
    #[error("vector for {0:?} has zero norm")]
    ZeroVector(String),
    #[error("cannot average profiles of different persons ({0:?} and {1:?})")]
    PersonMismatch(String, String),
    #[error("need at least 2 scorable persons, got {0}")]
    TooFewPersons(usize),
    #[error("cannot standardize {field}: {source}")]
    Standardize {
        field: ScoreField,
        source: NumericsError,
    },
}

/// Handling of lexicon tokens that have no vector. A person without a
/// vector is always an error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OovPolicy {
    Error,
    #[default]
    Skip,
}

impl FromStr for OovPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error" => Ok(OovPolicy::Error),
            "skip" => Ok(OovPolicy::Skip),
            other => Err(format!("unknown OOV policy {other:?} (expected 'error' or 'skip')")),
        }
    }
}

/// Order of the log transform and batch standardization for emotion
/// potential.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpOrder {
    #[default]
    TransformThenStandardize,
    StandardizeThenTransform,
}

impl FromStr for EpOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "transform-then-standardize" | "log-z" => Ok(EpOrder::TransformThenStandardize),
            "standardize-then-transform" | "z-log" => Ok(EpOrder::StandardizeThenTransform),
            other => Err(format!(
                "unknown EP order {other:?} (expected 'transform-then-standardize' or 'standardize-then-transform')"
            )),
        }
    }
}

/// Which valence and arousal values enter `|valence| * arousal`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpInputs {
    /// The per-person bipolar scores.
    #[default]
    Raw,
    /// The batch z-scores of valence and arousal.
    Standardized,
}

impl FromStr for EpInputs {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(EpInputs::Raw),
            "standardized" | "z" => Ok(EpInputs::Standardized),
            other => Err(format!("unknown EP inputs {other:?} (expected 'raw' or 'standardized')")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringOptions {
    pub oov: OovPolicy,
    pub ddof: Ddof,
    pub ep_order: EpOrder,
    pub ep_inputs: EpInputs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipolarScore {
    pub raw: f64,
    pub n_positive_used: usize,
    pub n_negative_used: usize,
    pub missing_tokens: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
struct PoleVector<'a> {
    vector: &'a [f64],
    norm: f64,
}

/// A lexicon resolved against one table: token vectors and norms are looked
/// up once and reused for every entity scored.
#[derive(Clone, Debug)]
pub struct PreparedLexicon<'a> {
    name: String,
    positive: Vec<PoleVector<'a>>,
    negative: Vec<PoleVector<'a>>,
    missing: Vec<String>,
}

impl<'a> PreparedLexicon<'a> {
    pub fn new(
        lexicon: &Lexicon,
        table: &'a EmbeddingTable,
        oov: OovPolicy,
    ) -> Result<Self, ScoringError> {
        let mut missing = Vec::new();
        let mut resolve = |pole: Pole| -> Result<Vec<PoleVector<'a>>, ScoringError> {
            let mut out = Vec::new();
            for token in lexicon.pole(pole) {
                match table.lookup(token) {
                    Some(vector) => {
                        let norm = numerics::norm(vector);
                        if norm == 0.0 {
                            return Err(ScoringError::ZeroVector(token.clone()));
                        }
                        out.push(PoleVector { vector, norm });
                    }
                    None if oov == OovPolicy::Error => {
                        return Err(ScoringError::TokenOov {
                            lexicon: lexicon.name().to_owned(),
                            token: token.clone(),
                        });
                    }
                    None => missing.push(token.clone()),
                }
            }
            if out.is_empty() {
                return Err(ScoringError::EmptyUsablePole {
                    lexicon: lexicon.name().to_owned(),
                    pole,
                });
            }
            Ok(out)
        };
        let positive = resolve(Pole::Positive)?;
        let negative = resolve(Pole::Negative)?;
        Ok(PreparedLexicon {
            name: lexicon.name().to_owned(),
            positive,
            negative,
            missing,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn missing(&self) -> &[String] {
        &self.missing
    }

    /// Score an arbitrary vector; `label` names it in errors.
    pub fn score_vector(&self, label: &str, vector: &[f64]) -> Result<BipolarScore, ScoringError> {
        let norm = numerics::norm(vector);
        if norm == 0.0 {
            return Err(ScoringError::ZeroVector(label.to_owned()));
        }
        let pole_mean = |pole: &[PoleVector]| {
            pole.iter()
                .map(|t| (numerics::dot(vector, t.vector) / (norm * t.norm)).clamp(-1.0, 1.0))
                .sum::<f64>()
                / pole.len() as f64
        };
        Ok(BipolarScore {
            raw: pole_mean(&self.positive) - pole_mean(&self.negative),
            n_positive_used: self.positive.len(),
            n_negative_used: self.negative.len(),
            missing_tokens: self.missing.clone(),
        })
    }

    pub fn score(&self, person: &str, table: &EmbeddingTable) -> Result<BipolarScore, ScoringError> {
        let vector = table
            .lookup(person)
            .ok_or_else(|| ScoringError::PersonOov(person.to_owned()))?;
        self.score_vector(person, vector)
    }
}

/// Mean similarity of `person` to the positive pole minus the mean
/// similarity to the negative pole.
pub fn bipolar_score(
    person: &str,
    lexicon: &Lexicon,
    table: &EmbeddingTable,
    oov: OovPolicy,
) -> Result<BipolarScore, ScoringError> {
    // a missing person is reported before any lexicon problem
    if !table.contains(person) {
        return Err(ScoringError::PersonOov(person.to_owned()));
    }
    PreparedLexicon::new(lexicon, table, oov)?.score(person, table)
}

fn bundled_anderson() -> &'static Lexicon {
    static ANDERSON: OnceLock<Lexicon> = OnceLock::new();
    ANDERSON.get_or_init(bundled::anderson)
}

/// Bipolar score over the bundled Anderson likeability lexicon.
pub fn likeability(person: &str, table: &EmbeddingTable) -> Result<BipolarScore, ScoringError> {
    bipolar_score(person, bundled_anderson(), table, OovPolicy::default())
}

/// Valence, arousal and emotion potential of one entity.
///
/// Under [`EpInputs::Raw`], `ep_raw == valence.abs() * arousal` and
/// `ep_transformed == signed_log1p(ep_raw)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfpRecord {
    pub valence: f64,
    pub arousal: f64,
    pub ep_raw: f64,
    pub ep_transformed: f64,
}

impl EfpRecord {
    pub fn from_components(valence: f64, arousal: f64) -> Self {
        let ep_raw = emotion_potential(valence, arousal);
        EfpRecord {
            valence,
            arousal,
            ep_raw,
            ep_transformed: signed_log1p(ep_raw),
        }
    }
}

/// `|valence| * arousal`.
pub fn emotion_potential(valence: f64, arousal: f64) -> f64 {
    valence.abs() * arousal
}

pub fn efp(
    person: &str,
    table: &EmbeddingTable,
    valence: &Lexicon,
    arousal: &Lexicon,
    oov: OovPolicy,
) -> Result<EfpRecord, ScoringError> {
    let v = bipolar_score(person, valence, table, oov)?;
    let a = bipolar_score(person, arousal, table, oov)?;
    Ok(EfpRecord::from_components(v.raw, a.raw))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Big5Record {
    pub openness: f64,
    pub conscientiousness: f64,
    pub extraversion: f64,
    pub agreeableness: f64,
    pub neuroticism: f64,
}

impl Big5Record {
    pub fn get(&self, dim: Big5Dimension) -> f64 {
        match dim {
            Big5Dimension::Openness => self.openness,
            Big5Dimension::Conscientiousness => self.conscientiousness,
            Big5Dimension::Extraversion => self.extraversion,
            Big5Dimension::Agreeableness => self.agreeableness,
            Big5Dimension::Neuroticism => self.neuroticism,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Big5Dimension {
    Openness,
    Conscientiousness,
    Extraversion,
    Agreeableness,
    Neuroticism,
}

impl Big5Dimension {
    pub const ALL: [Big5Dimension; 5] = [
        Big5Dimension::Openness,
        Big5Dimension::Conscientiousness,
        Big5Dimension::Extraversion,
        Big5Dimension::Agreeableness,
        Big5Dimension::Neuroticism,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Big5Dimension::Openness => "openness",
            Big5Dimension::Conscientiousness => "conscientiousness",
            Big5Dimension::Extraversion => "extraversion",
            Big5Dimension::Agreeableness => "agreeableness",
            Big5Dimension::Neuroticism => "neuroticism",
        }
    }

    pub fn lexicon(self, lexicons: &Big5Lexicons) -> &Lexicon {
        match self {
            Big5Dimension::Openness => &lexicons.openness,
            Big5Dimension::Conscientiousness => &lexicons.conscientiousness,
            Big5Dimension::Extraversion => &lexicons.extraversion,
            Big5Dimension::Agreeableness => &lexicons.agreeableness,
            Big5Dimension::Neuroticism => &lexicons.neuroticism,
        }
    }

    pub fn field(self) -> ScoreField {
        match self {
            Big5Dimension::Openness => ScoreField::Openness,
            Big5Dimension::Conscientiousness => ScoreField::Conscientiousness,
            Big5Dimension::Extraversion => ScoreField::Extraversion,
            Big5Dimension::Agreeableness => ScoreField::Agreeableness,
            Big5Dimension::Neuroticism => ScoreField::Neuroticism,
        }
    }
}

impl fmt::Display for Big5Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn big5(
    person: &str,
    table: &EmbeddingTable,
    lexicons: &Big5Lexicons,
    oov: OovPolicy,
) -> Result<Big5Record, ScoringError> {
    let score = |dim: Big5Dimension| {
        bipolar_score(person, dim.lexicon(lexicons), table, oov).map(|s| s.raw)
    };
    Ok(Big5Record {
        openness: score(Big5Dimension::Openness)?,
        conscientiousness: score(Big5Dimension::Conscientiousness)?,
        extraversion: score(Big5Dimension::Extraversion)?,
        agreeableness: score(Big5Dimension::Agreeableness)?,
        neuroticism: score(Big5Dimension::Neuroticism)?,
    })
}

/// A scalar column of a profile batch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreField {
    Likeability,
    Valence,
    Arousal,
    Ep,
    EpTransformed,
    Openness,
    Conscientiousness,
    Extraversion,
    Agreeableness,
    Neuroticism,
}

impl ScoreField {
    pub const ALL: [ScoreField; 10] = [
        ScoreField::Likeability,
        ScoreField::Valence,
        ScoreField::Arousal,
        ScoreField::Ep,
        ScoreField::EpTransformed,
        ScoreField::Openness,
        ScoreField::Conscientiousness,
        ScoreField::Extraversion,
        ScoreField::Agreeableness,
        ScoreField::Neuroticism,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreField::Likeability => "likeability",
            ScoreField::Valence => "valence",
            ScoreField::Arousal => "arousal",
            ScoreField::Ep => "ep",
            ScoreField::EpTransformed => "ep_transformed",
            ScoreField::Openness => "openness",
            ScoreField::Conscientiousness => "conscientiousness",
            ScoreField::Extraversion => "extraversion",
            ScoreField::Agreeableness => "agreeableness",
            ScoreField::Neuroticism => "neuroticism",
        }
    }

    /// The raw (unstandardized) value of this field.
    pub fn get(self, record: &ProfileRecord) -> f64 {
        match self {
            ScoreField::Likeability => record.likeability.raw,
            ScoreField::Valence => record.efp.valence,
            ScoreField::Arousal => record.efp.arousal,
            ScoreField::Ep => record.efp.ep_raw,
            ScoreField::EpTransformed => record.efp.ep_transformed,
            ScoreField::Openness => record.big5.openness,
            ScoreField::Conscientiousness => record.big5.conscientiousness,
            ScoreField::Extraversion => record.big5.extraversion,
            ScoreField::Agreeableness => record.big5.agreeableness,
            ScoreField::Neuroticism => record.big5.neuroticism,
        }
    }
}

impl fmt::Display for ScoreField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScoreField::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ScoreField::ALL.iter().map(|f| f.as_str()).collect();
                format!("unknown field {s:?} (expected one of {})", names.join(", "))
            })
    }
}

/// Within-batch z-scores. `ep` is the figure-ready emotion potential,
/// following [`EpOrder`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZScores {
    pub likeability: f64,
    pub valence: f64,
    pub arousal: f64,
    pub ep: f64,
    pub openness: f64,
    pub conscientiousness: f64,
    pub extraversion: f64,
    pub agreeableness: f64,
    pub neuroticism: f64,
}

/// One person's scores under one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub person: String,
    pub domain: Domain,
    pub model_source: String,
    pub likeability: BipolarScore,
    pub efp: EfpRecord,
    pub big5: Big5Record,
    /// Filled in at batch level.
    pub z: Option<ZScores>,
}

pub const AVERAGED_SOURCE: &str = "averaged";

fn average_bipolar(a: &BipolarScore, b: &BipolarScore) -> BipolarScore {
    let mut missing: Vec<String> = a.missing_tokens.iter().chain(&b.missing_tokens).cloned().collect();
    missing.sort();
    missing.dedup();
    BipolarScore {
        raw: (a.raw + b.raw) / 2.0,
        n_positive_used: a.n_positive_used.min(b.n_positive_used),
        n_negative_used: a.n_negative_used.min(b.n_negative_used),
        missing_tokens: missing,
    }
}

/// Fieldwise mean of two profiles of the same person. Emotion potential is
/// averaged like every other score, not recomputed from the averaged
/// components. Token counts keep the smaller of the two.
pub fn average_models(a: &ProfileRecord, b: &ProfileRecord) -> Result<ProfileRecord, ScoringError> {
    if a.person != b.person {
        return Err(ScoringError::PersonMismatch(a.person.clone(), b.person.clone()));
    }
    let mid = |x: f64, y: f64| (x + y) / 2.0;
    Ok(ProfileRecord {
        person: a.person.clone(),
        domain: a.domain,
        model_source: AVERAGED_SOURCE.to_owned(),
        likeability: average_bipolar(&a.likeability, &b.likeability),
        efp: EfpRecord {
            valence: mid(a.efp.valence, b.efp.valence),
            arousal: mid(a.efp.arousal, b.efp.arousal),
            ep_raw: mid(a.efp.ep_raw, b.efp.ep_raw),
            ep_transformed: mid(a.efp.ep_transformed, b.efp.ep_transformed),
        },
        big5: Big5Record {
            openness: mid(a.big5.openness, b.big5.openness),
            conscientiousness: mid(a.big5.conscientiousness, b.big5.conscientiousness),
            extraversion: mid(a.big5.extraversion, b.big5.extraversion),
            agreeableness: mid(a.big5.agreeableness, b.big5.agreeableness),
            neuroticism: mid(a.big5.neuroticism, b.big5.neuroticism),
        },
        z: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoringFailure {
    pub person: String,
    pub reason: String,
}

/// Profiles for every scorable person under one model, standardized within
/// the batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileBatch {
    pub model_source: String,
    pub options: ScoringOptions,
    pub records: Vec<ProfileRecord>,
    pub failures: Vec<ScoringFailure>,
}

impl ProfileBatch {
    pub fn column(&self, field: ScoreField) -> Vec<f64> {
        self.records.iter().map(|r| field.get(r)).collect()
    }

    pub fn get(&self, person: &str) -> Option<&ProfileRecord> {
        self.records.iter().find(|r| r.person == person)
    }
}

struct PreparedSet<'a> {
    likeability: PreparedLexicon<'a>,
    valence: PreparedLexicon<'a>,
    arousal: PreparedLexicon<'a>,
    big5: [PreparedLexicon<'a>; 5],
}

impl<'a> PreparedSet<'a> {
    fn new(lexicons: &LexiconSet, table: &'a EmbeddingTable, oov: OovPolicy) -> Result<Self, ScoringError> {
        let prep = |l: &Lexicon| PreparedLexicon::new(l, table, oov);
        let b = &lexicons.big5;
        Ok(PreparedSet {
            likeability: prep(&lexicons.likeability)?,
            valence: prep(&lexicons.valence)?,
            arousal: prep(&lexicons.arousal)?,
            big5: [
                prep(&b.openness)?,
                prep(&b.conscientiousness)?,
                prep(&b.extraversion)?,
                prep(&b.agreeableness)?,
                prep(&b.neuroticism)?,
            ],
        })
    }

    fn profile(
        &self,
        person: &str,
        domain: Domain,
        table: &EmbeddingTable,
    ) -> Result<ProfileRecord, ScoringError> {
        let vector = table
            .lookup(person)
            .ok_or_else(|| ScoringError::PersonOov(person.to_owned()))?;
        let score = |lex: &PreparedLexicon| lex.score_vector(person, vector);
        let likeability = score(&self.likeability)?;
        let valence = score(&self.valence)?.raw;
        let arousal = score(&self.arousal)?.raw;
        let b: Vec<f64> = self
            .big5
            .iter()
            .map(|l| score(l).map(|s| s.raw))
            .collect::<Result<_, _>>()?;
        Ok(ProfileRecord {
            person: person.to_owned(),
            domain,
            model_source: table.source_label().to_owned(),
            likeability,
            efp: EfpRecord::from_components(valence, arousal),
            big5: Big5Record {
                openness: b[0],
                conscientiousness: b[1],
                extraversion: b[2],
                agreeableness: b[3],
                neuroticism: b[4],
            },
            z: None,
        })
    }
}

/// Score every roster person against `table`. Persons that cannot be scored
/// are listed in `failures`; lexicon problems abort the whole batch.
pub fn batch_profiles(
    roster: &PersonRoster,
    table: &EmbeddingTable,
    lexicons: &LexiconSet,
    options: &ScoringOptions,
) -> Result<ProfileBatch, ScoringError> {
    let prepared = PreparedSet::new(lexicons, table, options.oov)?;
    let outcomes: Vec<Result<ProfileRecord, ScoringError>> = roster
        .entries()
        .par_iter()
        .map(|e| prepared.profile(&e.name, e.domain, table))
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (entry, outcome) in roster.entries().iter().zip(outcomes) {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push(ScoringFailure {
                person: entry.name.clone(),
                reason: e.to_string(),
            }),
        }
    }

    let mut batch = ProfileBatch {
        model_source: table.source_label().to_owned(),
        options: *options,
        records,
        failures,
    };
    if batch.records.len() < 2 {
        return Err(ScoringError::TooFewPersons(batch.records.len()));
    }
    if options.ep_inputs == EpInputs::Standardized {
        let zv = standardize_field(&batch, ScoreField::Valence)?;
        let za = standardize_field(&batch, ScoreField::Arousal)?;
        for ((r, v), a) in batch.records.iter_mut().zip(zv).zip(za) {
            r.efp.ep_raw = emotion_potential(v, a);
            r.efp.ep_transformed = signed_log1p(r.efp.ep_raw);
        }
    }
    standardize(&mut batch)?;
    Ok(batch)
}

/// Average two model batches person by person (in the order of `a`) and
/// standardize the result. Persons scored by only one model are reported as
/// failures.
pub fn average_batches(a: &ProfileBatch, b: &ProfileBatch) -> Result<ProfileBatch, ScoringError> {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for ra in &a.records {
        match b.get(&ra.person) {
            Some(rb) => records.push(average_models(ra, rb)?),
            None => failures.push(ScoringFailure {
                person: ra.person.clone(),
                reason: format!("not scored by model {:?}", b.model_source),
            }),
        }
    }
    for rb in &b.records {
        if a.get(&rb.person).is_none() {
            failures.push(ScoringFailure {
                person: rb.person.clone(),
                reason: format!("not scored by model {:?}", a.model_source),
            });
        }
    }
    let mut batch = ProfileBatch {
        model_source: AVERAGED_SOURCE.to_owned(),
        options: a.options,
        records,
        failures,
    };
    if batch.records.len() < 2 {
        return Err(ScoringError::TooFewPersons(batch.records.len()));
    }
    standardize(&mut batch)?;
    Ok(batch)
}

fn standardize_field(batch: &ProfileBatch, field: ScoreField) -> Result<Vec<f64>, ScoringError> {
    zscore(&batch.column(field), batch.options.ddof)
        .map_err(|source| ScoringError::Standardize { field, source })
}

/// Fill in within-batch z-scores for every record.
pub fn standardize(batch: &mut ProfileBatch) -> Result<(), ScoringError> {
    let z = |field| standardize_field(batch, field);
    let likeability = z(ScoreField::Likeability)?;
    let valence = z(ScoreField::Valence)?;
    let arousal = z(ScoreField::Arousal)?;
    let ep = match batch.options.ep_order {
        EpOrder::TransformThenStandardize => z(ScoreField::EpTransformed)?,
        EpOrder::StandardizeThenTransform => {
            z(ScoreField::Ep)?.into_iter().map(signed_log1p).collect()
        }
    };
    let big5: Vec<Vec<f64>> = Big5Dimension::ALL
        .iter()
        .map(|d| z(d.field()))
        .collect::<Result<_, _>>()?;
    for (i, r) in batch.records.iter_mut().enumerate() {
        r.z = Some(ZScores {
            likeability: likeability[i],
            valence: valence[i],
            arousal: arousal[i],
            ep: ep[i],
            openness: big5[0][i],
            conscientiousness: big5[1][i],
            extraversion: big5[2][i],
            agreeableness: big5[3][i],
            neuroticism: big5[4][i],
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding_io::CaseMode;
    use crate::lexicons::RosterEntry;
    use approx::assert_abs_diff_eq;

    fn lex(name: &str, pos: &[&str], neg: &[&str]) -> Lexicon {
        let v = |s: &[&str]| s.iter().map(|t| t.to_string()).collect();
        Lexicon::new(name, v(pos), v(neg), vec![]).unwrap()
    }

    fn toy_table() -> EmbeddingTable {
        EmbeddingTable::from_entries(
            "toy",
            2,
            CaseMode::FoldFallback,
            [
                ("p", vec![1.0, 0.0]),
                ("a", vec![1.0, 0.0]),
                ("b", vec![0.0, 1.0]),
                ("c", vec![-1.0, 0.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn hand_computed_bipolar_score() {
        let table = toy_table();
        let l = lex("t", &["a", "b"], &["c"]);
        let s = bipolar_score("p", &l, &table, OovPolicy::Error).unwrap();
        assert_abs_diff_eq!(s.raw, 1.5, epsilon = 1e-15);
        assert_eq!((s.n_positive_used, s.n_negative_used), (2, 1));
        let swapped = bipolar_score("p", &l.swapped(), &table, OovPolicy::Error).unwrap();
        assert_eq!(swapped.raw, -s.raw);
    }

    #[test]
    fn oov_handling() {
        let table = toy_table();
        let l = lex("t", &["a", "zz"], &["c"]);
        assert_eq!(
            bipolar_score("zzqx", &l, &table, OovPolicy::Skip),
            Err(ScoringError::PersonOov("zzqx".into()))
        );
        assert!(matches!(
            bipolar_score("p", &l, &table, OovPolicy::Error),
            Err(ScoringError::TokenOov { .. })
        ));
        let s = bipolar_score("p", &l, &table, OovPolicy::Skip).unwrap();
        assert_eq!(s.missing_tokens, vec!["zz".to_string()]);
        assert_abs_diff_eq!(s.raw, 2.0, epsilon = 1e-15);
        let empty = lex("t", &["zz"], &["c"]);
        assert!(matches!(
            bipolar_score("p", &empty, &table, OovPolicy::Skip),
            Err(ScoringError::EmptyUsablePole { pole: Pole::Positive, .. })
        ));
    }

    #[test]
    fn zero_vectors_are_rejected() {
        let table = EmbeddingTable::from_entries(
            "z",
            2,
            CaseMode::Exact,
            [("p", vec![0.0, 0.0]), ("a", vec![1.0, 0.0]), ("b", vec![0.0, 0.0])],
        )
        .unwrap();
        assert_eq!(
            bipolar_score("a", &lex("t", &["a"], &["b"]), &table, OovPolicy::Skip),
            Err(ScoringError::ZeroVector("b".into()))
        );
        let table = EmbeddingTable::from_entries(
            "z",
            2,
            CaseMode::Exact,
            [("p", vec![0.0, 0.0]), ("a", vec![1.0, 0.0]), ("c", vec![0.0, 1.0])],
        )
        .unwrap();
        assert_eq!(
            bipolar_score("p", &lex("t", &["a"], &["c"]), &table, OovPolicy::Skip),
            Err(ScoringError::ZeroVector("p".into()))
        );
    }

    #[test]
    fn emotion_potential_formula() {
        assert_eq!(emotion_potential(-2.0, 0.5), 1.0);
        assert_eq!(emotion_potential(0.0, 123.0), 0.0);
        let r = EfpRecord::from_components(0.3, -0.2);
        assert!(r.ep_raw < 0.0);
        assert_eq!(r.ep_transformed, signed_log1p(r.ep_raw));
    }

    #[test]
    fn efp_from_lexicons() {
        let table = toy_table();
        let v = lex("v", &["a"], &["c"]);
        let a = lex("a", &["b"], &["c"]);
        let r = efp("p", &table, &v, &a, OovPolicy::Error).unwrap();
        assert_abs_diff_eq!(r.valence, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.arousal, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.ep_raw, 2.0, epsilon = 1e-15);
    }

    fn record(person: &str, source: &str, like: f64) -> ProfileRecord {
        ProfileRecord {
            person: person.into(),
            domain: Domain::Arts,
            model_source: source.into(),
            likeability: BipolarScore {
                raw: like,
                n_positive_used: 100,
                n_negative_used: 99,
                missing_tokens: vec!["nosey".into()],
            },
            efp: EfpRecord::from_components(like - 0.1, 0.05),
            big5: Big5Record {
                openness: like,
                conscientiousness: 0.1,
                extraversion: -0.2,
                agreeableness: 0.3,
                neuroticism: like * 2.0,
            },
            z: None,
        }
    }

    #[test]
    fn averaging() {
        let a = record("x", "static", 0.2);
        let b = record("x", "contextual", 0.4);
        let m = average_models(&a, &b).unwrap();
        assert_abs_diff_eq!(m.likeability.raw, 0.3, epsilon = 1e-15);
        assert_eq!(m.model_source, AVERAGED_SOURCE);
        assert_eq!(m, average_models(&b, &a).unwrap());
        assert_abs_diff_eq!(m.efp.ep_raw, (a.efp.ep_raw + b.efp.ep_raw) / 2.0, epsilon = 1e-15);

        let same = average_models(&a, &a).unwrap();
        assert_eq!(same.likeability, a.likeability);
        assert_eq!(same.efp, a.efp);
        assert_eq!(same.big5, a.big5);

        assert!(matches!(
            average_models(&a, &record("y", "s", 0.1)),
            Err(ScoringError::PersonMismatch(..))
        ));
    }

    fn batch_fixture() -> (PersonRoster, EmbeddingTable, LexiconSet) {
        let roster = PersonRoster::new(
            ["p1", "p2", "p3", "ghost"]
                .iter()
                .map(|n| RosterEntry { name: n.to_string(), domain: Domain::Science })
                .collect(),
        )
        .unwrap();
        let table = EmbeddingTable::from_entries(
            "toy",
            3,
            CaseMode::Exact,
            [
                ("p1", vec![1.0, 0.2, 0.1]),
                ("p2", vec![0.1, 1.0, 0.3]),
                ("p3", vec![-0.5, 0.2, 1.0]),
                ("a", vec![1.0, 0.0, 0.0]),
                ("b", vec![0.0, 1.0, 0.0]),
                ("c", vec![0.0, 0.0, 1.0]),
                ("d", vec![1.0, 1.0, -1.0]),
            ],
        )
        .unwrap();
        let l = |n: &str, p: &str, q: &str| lex(n, &[p], &[q]);
        let set = LexiconSet {
            likeability: l("like", "a", "b"),
            big5: Big5Lexicons {
                openness: l("o", "a", "c"),
                conscientiousness: l("c", "b", "c"),
                extraversion: l("e", "d", "a"),
                agreeableness: l("ag", "c", "d"),
                neuroticism: l("n", "b", "d"),
            },
            valence: l("v", "a", "d"),
            arousal: l("ar", "c", "b"),
        };
        (roster, table, set)
    }

    #[test]
    fn batch_reports_failures_and_standardizes() {
        let (roster, table, set) = batch_fixture();
        let batch = batch_profiles(&roster, &table, &set, &ScoringOptions::default()).unwrap();
        assert_eq!(batch.records.len(), 3);
        assert_eq!(batch.failures.len(), 1);
        assert_eq!(batch.failures[0].person, "ghost");
        let z: Vec<f64> = batch.records.iter().map(|r| r.z.unwrap().likeability).collect();
        assert_abs_diff_eq!(numerics::mean(&z), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(numerics::std_dev(&z, Ddof::Population), 1.0, epsilon = 1e-9);
        for r in &batch.records {
            assert_eq!(r.model_source, "toy");
            assert_eq!(
                r.likeability,
                bipolar_score(&r.person, &set.likeability, &table, OovPolicy::Skip).unwrap()
            );
        }
    }

    #[test]
    fn ep_options() {
        let (roster, table, set) = batch_fixture();
        let base = batch_profiles(&roster, &table, &set, &ScoringOptions::default()).unwrap();
        let opts = ScoringOptions { ep_order: EpOrder::StandardizeThenTransform, ..Default::default() };
        let alt = batch_profiles(&roster, &table, &set, &opts).unwrap();
        let raw_ep = zscore(&base.column(ScoreField::Ep), Ddof::Population).unwrap();
        for (r, z) in alt.records.iter().zip(raw_ep) {
            assert_abs_diff_eq!(r.z.unwrap().ep, signed_log1p(z), epsilon = 1e-12);
        }
        let opts = ScoringOptions { ep_inputs: EpInputs::Standardized, ..Default::default() };
        let std_in = batch_profiles(&roster, &table, &set, &opts).unwrap();
        for (r, b) in std_in.records.iter().zip(&base.records) {
            let bz = b.z.unwrap();
            assert_abs_diff_eq!(r.efp.ep_raw, bz.valence.abs() * bz.arousal, epsilon = 1e-12);
        }
    }

    #[test]
    fn too_few_persons() {
        let (_, table, set) = batch_fixture();
        let roster = PersonRoster::new(vec![RosterEntry { name: "p1".into(), domain: Domain::Arts }]).unwrap();
        assert_eq!(
            batch_profiles(&roster, &table, &set, &ScoringOptions::default()),
            Err(ScoringError::TooFewPersons(1))
        );
    }

    #[test]
    fn averaged_batch() {
        let (roster, table, set) = batch_fixture();
        let a = batch_profiles(&roster, &table, &set, &ScoringOptions::default()).unwrap();
        let scaled = table.map_vectors(|_, v| v.iter().map(|x| x * 3.0).collect()).with_source_label("other");
        let b = batch_profiles(&roster, &scaled, &set, &ScoringOptions::default()).unwrap();
        let avg = average_batches(&a, &b).unwrap();
        assert_eq!(avg.model_source, AVERAGED_SOURCE);
        for (x, y) in avg.records.iter().zip(&a.records) {
            assert_abs_diff_eq!(x.likeability.raw, y.likeability.raw, epsilon = 1e-12);
            assert!(x.z.is_some());
        }
    }

    #[test]
    fn field_names_round_trip() {
        for f in ScoreField::ALL {
            assert_eq!(f.as_str().parse::<ScoreField>(), Ok(f));
        }
        assert!("bogus".parse::<ScoreField>().is_err());
    }
}
