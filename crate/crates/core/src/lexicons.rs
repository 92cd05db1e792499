//! Bipolar word lists, the person roster and human rating norms.
//!
//! Lexicon files have two mandatory sections and one optional one:
//!
//! ```text
//! # comment
//! [positive]
//! unworried
//! unenvious
//!
//! [negative]
//! anxious   # inline comments are allowed too
//!
//! [substitutions]
//! unenvious -> resilient | reason text
//! ```
//!
//! Each substitution replaces a token listed in a pole, in place, and is kept
//! on the resulting [`Lexicon`] for reporting.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding_io::EmbeddingTable;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read '{path}': {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{name}: line {line}: {message}")]
    Syntax {
        name: String,
        line: usize,
        message: String,
    },
    #[error("{name}: the {pole} pole is empty")]
    EmptyPole { name: String, pole: Pole },
    #[error("{name}: token {token:?} appears in both poles")]
    SharedToken { name: String, token: String },
    #[error("{name}: token {token:?} appears twice in the {pole} pole")]
    DuplicateToken {
        name: String,
        pole: Pole,
        token: String,
    },
    #[error("{name}: substitution source {token:?} is not listed in either pole")]
    DanglingSubstitution { name: String, token: String },
    #[error("roster: {0}")]
    Roster(String),
    #[error("norms: {0}")]
    Norms(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pole {
    Positive,
    Negative,
}

impl fmt::Display for Pole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pole::Positive => "positive",
            Pole::Negative => "negative",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub original: String,
    pub replacement: String,
    pub reason: String,
}

/// A named bipolar word list. Poles are non-empty, duplicate-free and
/// disjoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    name: String,
    positive: Vec<String>,
    negative: Vec<String>,
    substitutions: Vec<Substitution>,
}

impl Lexicon {
    /// Build and validate a lexicon from already-substituted poles.
    pub fn new(
        name: impl Into<String>,
        positive: Vec<String>,
        negative: Vec<String>,
        substitutions: Vec<Substitution>,
    ) -> Result<Self, LexiconError> {
        let lexicon = Lexicon {
            name: name.into(),
            positive,
            negative,
            substitutions,
        };
        lexicon.validate()?;
        Ok(lexicon)
    }

    fn validate(&self) -> Result<(), LexiconError> {
        let mut seen = [HashSet::new(), HashSet::new()];
        for (i, (pole, tokens)) in [(Pole::Positive, &self.positive), (Pole::Negative, &self.negative)]
            .into_iter()
            .enumerate()
        {
            if tokens.is_empty() {
                return Err(LexiconError::EmptyPole {
                    name: self.name.clone(),
                    pole,
                });
            }
            for token in tokens {
                if !seen[i].insert(token.as_str()) {
                    return Err(LexiconError::DuplicateToken {
                        name: self.name.clone(),
                        pole,
                        token: token.clone(),
                    });
                }
            }
        }
        if let Some(shared) = self.positive.iter().find(|t| seen[1].contains(t.as_str())) {
            return Err(LexiconError::SharedToken {
                name: self.name.clone(),
                token: shared.clone(),
            });
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn positive(&self) -> &[String] {
        &self.positive
    }

    pub fn negative(&self) -> &[String] {
        &self.negative
    }

    pub fn pole(&self, pole: Pole) -> &[String] {
        match pole {
            Pole::Positive => &self.positive,
            Pole::Negative => &self.negative,
        }
    }

    pub fn substitutions(&self) -> &[Substitution] {
        &self.substitutions
    }

    /// The same lexicon with its poles exchanged.
    pub fn swapped(&self) -> Lexicon {
        Lexicon {
            name: self.name.clone(),
            positive: self.negative.clone(),
            negative: self.positive.clone(),
            substitutions: self.substitutions.clone(),
        }
    }

    /// All tokens, positive pole first.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.positive.iter().chain(&self.negative).map(String::as_str)
    }
}

/// Parse lexicon text. `name` labels the lexicon and its error messages.
pub fn parse_lexicon(text: &str, name: &str) -> Result<Lexicon, LexiconError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Pole(Pole),
        Substitutions,
    }

    let syntax = |line: usize, message: String| LexiconError::Syntax {
        name: name.to_owned(),
        line,
        message,
    };

    let mut section = Section::None;
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    let mut substitutions = Vec::new();
    let mut sections_seen = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or_default().trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match header.trim() {
                "positive" => Section::Pole(Pole::Positive),
                "negative" => Section::Pole(Pole::Negative),
                "substitutions" => Section::Substitutions,
                other => return Err(syntax(line_no, format!("unknown section [{other}]"))),
            };
            if !sections_seen.insert(header.trim().to_owned()) {
                return Err(syntax(line_no, format!("section [{}] repeated", header.trim())));
            }
            continue;
        }
        match section {
            Section::None => {
                return Err(syntax(line_no, "token outside of any section".into()));
            }
            Section::Pole(pole) => {
                if content.chars().any(char::is_whitespace) {
                    return Err(syntax(line_no, format!("{content:?} is not a single token")));
                }
                match pole {
                    Pole::Positive => positive.push(content.to_owned()),
                    Pole::Negative => negative.push(content.to_owned()),
                }
            }
            Section::Substitutions => {
                let (mapping, reason) = match content.split_once('|') {
                    Some((m, r)) => (m, r.trim()),
                    None => (content, ""),
                };
                let Some((original, replacement)) = mapping.split_once("->") else {
                    return Err(syntax(
                        line_no,
                        "substitution must read 'original -> replacement | reason'".into(),
                    ));
                };
                let (original, replacement) = (original.trim(), replacement.trim());
                let single = |t: &str| !t.is_empty() && !t.chars().any(char::is_whitespace);
                if !single(original) || !single(replacement) {
                    return Err(syntax(line_no, "substitution tokens must be single words".into()));
                }
                substitutions.push(Substitution {
                    original: original.to_owned(),
                    replacement: replacement.to_owned(),
                    reason: reason.to_owned(),
                });
            }
        }
    }

    for sub in &substitutions {
        let mut applied = false;
        for token in positive.iter_mut().chain(negative.iter_mut()) {
            if *token == sub.original {
                *token = sub.replacement.clone();
                applied = true;
            }
        }
        if !applied {
            return Err(LexiconError::DanglingSubstitution {
                name: name.to_owned(),
                token: sub.original.clone(),
            });
        }
    }

    Lexicon::new(name, positive, negative, substitutions)
}

pub fn load_lexicon(path: impl AsRef<Path>, name: &str) -> Result<Lexicon, LexiconError> {
    let text = read_text(path.as_ref())?;
    parse_lexicon(&text, name)
}

fn read_text(path: &Path) -> Result<String, LexiconError> {
    fs::read_to_string(path).map_err(|source| LexiconError::Read {
        path: path.to_owned(),
        source,
    })
}

/// Tokens of `lexicon` with and without a vector in `table`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub lexicon: String,
    pub positive_found: Vec<String>,
    pub positive_missing: Vec<String>,
    pub negative_found: Vec<String>,
    pub negative_missing: Vec<String>,
}

impl CoverageReport {
    pub fn is_complete(&self) -> bool {
        self.positive_missing.is_empty() && self.negative_missing.is_empty()
    }
}

/// Which lexicon tokens resolve in `table` under its case mode.
pub fn coverage_check(lexicon: &Lexicon, table: &EmbeddingTable) -> CoverageReport {
    let split = |tokens: &[String]| -> (Vec<String>, Vec<String>) {
        tokens.iter().cloned().partition(|t| table.contains(t))
    };
    let (positive_found, positive_missing) = split(lexicon.positive());
    let (negative_found, negative_missing) = split(lexicon.negative());
    CoverageReport {
        lexicon: lexicon.name().to_owned(),
        positive_found,
        positive_missing,
        negative_found,
        negative_missing,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Arts,
    Politics,
    Science,
    Unclassified,
}

impl Domain {
    /// The domains that take part in group comparisons.
    pub const ANALYZED: [Domain; 3] = [Domain::Arts, Domain::Politics, Domain::Science];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Arts => "arts",
            Domain::Politics => "politics",
            Domain::Science => "science",
            Domain::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "arts" => Ok(Domain::Arts),
            "politics" => Ok(Domain::Politics),
            "science" => Ok(Domain::Science),
            "unclassified" => Ok(Domain::Unclassified),
            other => Err(format!("unknown domain label {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub name: String,
    pub domain: Domain,
}

/// Persons to profile, in file order, with unique names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonRoster {
    entries: Vec<RosterEntry>,
}

impl PersonRoster {
    pub fn new(entries: Vec<RosterEntry>) -> Result<Self, LexiconError> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.name.as_str()) {
                return Err(LexiconError::Roster(format!("duplicate name {:?}", e.name)));
            }
        }
        Ok(PersonRoster { entries })
    }

    pub fn entries(&self) -> &[RosterEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn domain_of(&self, name: &str) -> Option<Domain> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.domain)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    /// Entries taking part in group analysis.
    pub fn classified(&self) -> impl Iterator<Item = &RosterEntry> {
        self.entries.iter().filter(|e| e.domain != Domain::Unclassified)
    }

    pub fn count(&self, domain: Domain) -> usize {
        self.entries.iter().filter(|e| e.domain == domain).count()
    }
}

#[derive(Deserialize)]
struct RosterRow {
    name: String,
    domain: String,
}

pub fn parse_roster<R: Read>(reader: R) -> Result<PersonRoster, LexiconError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut entries = Vec::new();
    for (i, row) in csv.deserialize::<RosterRow>().enumerate() {
        let row = row.map_err(|e| LexiconError::Roster(e.to_string()))?;
        let domain = row
            .domain
            .parse()
            .map_err(|e| LexiconError::Roster(format!("row {}: {e}", i + 2)))?;
        if row.name.is_empty() {
            return Err(LexiconError::Roster(format!("row {}: empty name", i + 2)));
        }
        entries.push(RosterEntry {
            name: row.name,
            domain,
        });
    }
    PersonRoster::new(entries)
}

pub fn load_roster(path: impl AsRef<Path>) -> Result<PersonRoster, LexiconError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| LexiconError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_roster(file)
}

/// Human valence ratings keyed by word, in file order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormsTable {
    entries: IndexMap<String, f64>,
    scale_min: f64,
    scale_max: f64,
    /// Rows that were dropped while loading.
    pub warnings: Vec<String>,
}

impl NormsTable {
    pub fn new(
        entries: IndexMap<String, f64>,
        scale_min: f64,
        scale_max: f64,
    ) -> Result<Self, LexiconError> {
        if !scale_min.is_finite() || !scale_max.is_finite() || scale_min >= scale_max {
            return Err(LexiconError::Norms(format!(
                "invalid scale [{scale_min}, {scale_max}]"
            )));
        }
        if let Some((w, v)) = entries.iter().find(|(_, v)| !(scale_min..=scale_max).contains(*v)) {
            return Err(LexiconError::Norms(format!(
                "rating {v} for {w:?} outside [{scale_min}, {scale_max}]"
            )));
        }
        Ok(NormsTable {
            entries,
            scale_min,
            scale_max,
            warnings: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.entries.get(word).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(w, v)| (w.as_str(), *v))
    }

    pub fn scale(&self) -> (f64, f64) {
        (self.scale_min, self.scale_max)
    }
}

/// Column names and rating scale for a norms CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormsFormat {
    pub word_column: String,
    pub value_column: String,
    pub scale_min: f64,
    pub scale_max: f64,
}

impl Default for NormsFormat {
    fn default() -> Self {
        NormsFormat {
            word_column: "Word".into(),
            value_column: "V.Mean.Sum".into(),
            scale_min: 1.0,
            scale_max: 9.0,
        }
    }
}

/// Read a norms CSV. Unparseable, out-of-scale and duplicate rows are
/// dropped with a warning; the first occurrence of a word wins.
pub fn parse_norms<R: Read>(reader: R, format: &NormsFormat) -> Result<NormsTable, LexiconError> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| LexiconError::Norms(e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LexiconError::Norms(format!("missing column {name:?}")))
    };
    let word_idx = column(&format.word_column)?;
    let value_idx = column(&format.value_column)?;
    let range = format.scale_min..=format.scale_max;

    let mut entries = IndexMap::new();
    let mut warnings = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                warnings.push(format!("row {row}: {e}"));
                continue;
            }
        };
        let word = record.get(word_idx).unwrap_or_default();
        let value = record.get(value_idx).and_then(|v| v.parse::<f64>().ok());
        match value {
            _ if word.is_empty() => warnings.push(format!("row {row}: empty word")),
            None => warnings.push(format!("row {row}: unparseable rating for {word:?}")),
            Some(v) if !range.contains(&v) => {
                warnings.push(format!("row {row}: rating {v} for {word:?} outside scale"))
            }
            Some(_) if entries.contains_key(word) => {
                warnings.push(format!("row {row}: duplicate word {word:?}, first kept"))
            }
            Some(v) => {
                entries.insert(word.to_owned(), v);
            }
        }
    }
    if entries.is_empty() {
        return Err(LexiconError::Norms("no usable rows".into()));
    }
    let mut norms = NormsTable::new(entries, format.scale_min, format.scale_max)?;
    norms.warnings = warnings;
    Ok(norms)
}

pub fn load_norms(path: impl AsRef<Path>, format: &NormsFormat) -> Result<NormsTable, LexiconError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| LexiconError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_norms(file, format)
}

/// The five mini-marker lexicons, keyed by dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Big5Lexicons {
    pub openness: Lexicon,
    pub conscientiousness: Lexicon,
    pub extraversion: Lexicon,
    pub agreeableness: Lexicon,
    pub neuroticism: Lexicon,
}

impl Big5Lexicons {
    pub fn iter(&self) -> impl Iterator<Item = &Lexicon> {
        [
            &self.openness,
            &self.conscientiousness,
            &self.extraversion,
            &self.agreeableness,
            &self.neuroticism,
        ]
        .into_iter()
    }
}

/// Every lexicon a full profile needs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconSet {
    pub likeability: Lexicon,
    pub big5: Big5Lexicons,
    pub valence: Lexicon,
    pub arousal: Lexicon,
}

impl LexiconSet {
    pub fn iter(&self) -> impl Iterator<Item = &Lexicon> {
        std::iter::once(&self.likeability)
            .chain(self.big5.iter())
            .chain([&self.valence, &self.arousal])
    }

    /// Load `<name>.lex` for every lexicon from `dir`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let dir = dir.as_ref();
        let load = |name: &str| load_lexicon(dir.join(format!("{name}.lex")), name);
        Ok(LexiconSet {
            likeability: load("anderson")?,
            big5: Big5Lexicons {
                openness: load("openness")?,
                conscientiousness: load("conscientiousness")?,
                extraversion: load("extraversion")?,
                agreeableness: load("agreeableness")?,
                neuroticism: load("neuroticism")?,
            },
            valence: load("valence")?,
            arousal: load("arousal")?,
        })
    }
}

/// Data files compiled into the library.
pub mod bundled {
    use super::*;

    pub const ANDERSON: &str = include_str!("../data/lexicons/anderson.lex");
    pub const OPENNESS: &str = include_str!("../data/lexicons/openness.lex");
    pub const CONSCIENTIOUSNESS: &str = include_str!("../data/lexicons/conscientiousness.lex");
    pub const EXTRAVERSION: &str = include_str!("../data/lexicons/extraversion.lex");
    pub const AGREEABLENESS: &str = include_str!("../data/lexicons/agreeableness.lex");
    pub const NEUROTICISM: &str = include_str!("../data/lexicons/neuroticism.lex");
    /// Smoke-test placeholder, not the published emotion-label list.
    pub const VALENCE_PLACEHOLDER: &str = include_str!("../data/lexicons/valence.lex");
    /// Smoke-test placeholder, not the published emotion-label list.
    pub const AROUSAL_PLACEHOLDER: &str = include_str!("../data/lexicons/arousal.lex");
    pub const ROSTER: &str = include_str!("../data/roster.csv");

    fn parse(text: &str, name: &str) -> Lexicon {
        parse_lexicon(text, name).expect("bundled lexicon is valid")
    }

    pub fn anderson() -> Lexicon {
        parse(ANDERSON, "anderson")
    }

    pub fn big5() -> Big5Lexicons {
        Big5Lexicons {
            openness: parse(OPENNESS, "openness"),
            conscientiousness: parse(CONSCIENTIOUSNESS, "conscientiousness"),
            extraversion: parse(EXTRAVERSION, "extraversion"),
            agreeableness: parse(AGREEABLENESS, "agreeableness"),
            neuroticism: parse(NEUROTICISM, "neuroticism"),
        }
    }

    pub fn valence_placeholder() -> Lexicon {
        parse(VALENCE_PLACEHOLDER, "valence")
    }

    pub fn arousal_placeholder() -> Lexicon {
        parse(AROUSAL_PLACEHOLDER, "arousal")
    }

    pub fn lexicon_set() -> LexiconSet {
        LexiconSet {
            likeability: anderson(),
            big5: big5(),
            valence: valence_placeholder(),
            arousal: arousal_placeholder(),
        }
    }

    pub fn roster() -> PersonRoster {
        parse_roster(ROSTER.as_bytes()).expect("bundled roster is valid")
    }
}
