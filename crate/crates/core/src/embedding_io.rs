//! Reading and writing word vectors in the textual `vec` format.
//!
//! The format starts with a header line holding the number of rows and the
//! dimensionality, followed by one row per token:
//!
//! ```text
//! 2 3
//! apple 1 0 0
//! pear 0 1 0
//! ```
//!
//! Parsing is tolerant: rows that cannot be used (wrong field count,
//! non-finite numbers, invalid UTF-8, duplicate tokens) are skipped and
//! recorded in a [`ParseReport`]. Only an unreadable file or a bad header is
//! fatal. The same format is used as the interchange format for vectors
//! produced by external encoders, see [`write_interchange`].

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How tokens are matched against the table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseMode {
    /// Only exact matches.
    Exact,
    /// Exact match first, then a case-folded match.
    #[default]
    FoldFallback,
}

impl FromStr for CaseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(CaseMode::Exact),
            "fold-fallback" | "fold" => Ok(CaseMode::FoldFallback),
            other => Err(format!(
                "unknown case mode '{other}' (expected 'exact' or 'fold-fallback')"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read '{path}': {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write '{path}': {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("malformed header: {0}")]
    Header(String),
    #[error("vector dimensionality must be positive")]
    ZeroDim,
    #[error("cannot write an empty table")]
    EmptyTable,
    #[error("token {0:?} cannot be written: tokens must be non-empty and contain no whitespace")]
    InvalidToken(String),
    #[error("vector for {token:?} has length {got}, table dimensionality is {dim}")]
    DimMismatch { token: String, dim: usize, got: usize },
    #[error("duplicate token {0:?}")]
    DuplicateToken(String),
}

/// Why a row was not loaded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    WrongFieldCount { expected: usize, got: usize },
    NonFiniteNumber,
    InvalidUtf8,
    DuplicateToken,
    EmptyLine,
}

impl std::fmt::Display for SkipReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SkipReason::WrongFieldCount { expected, got } => {
                write!(f, "wrong field count (expected {expected}, got {got})")
            }
            SkipReason::NonFiniteNumber => f.write_str("non-finite or unparseable number"),
            SkipReason::InvalidUtf8 => f.write_str("undecodable bytes"),
            SkipReason::DuplicateToken => f.write_str("duplicate token"),
            SkipReason::EmptyLine => f.write_str("empty line"),
        }
    }
}

/// Line accounting for one parse. Line numbers are 1-based and count the
/// header as line 1.
///
/// `lines_kept + lines_skipped + lines_filtered == lines_total`, where
/// `lines_total` excludes the header.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    pub header_count: usize,
    pub header_dim: usize,
    pub lines_total: usize,
    pub lines_kept: usize,
    pub lines_skipped: usize,
    /// Rows dropped because their token is not in the allow-list.
    pub lines_filtered: usize,
    pub skip_reasons: Vec<(usize, SkipReason)>,
}

impl ParseReport {
    /// The header row count disagrees with the rows actually present.
    pub fn count_mismatch(&self) -> bool {
        self.header_count != self.lines_total
    }
}

/// Restricts which rows are loaded from a table.
#[derive(Clone, Debug, Default)]
pub struct AllowList {
    exact: HashSet<String>,
    folded: HashSet<String>,
}

impl AllowList {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let exact: HashSet<String> = tokens.into_iter().map(Into::into).collect();
        let folded = exact.iter().map(|t| t.to_lowercase()).collect();
        AllowList { exact, folded }
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }

    fn admits(&self, token: &str, mode: CaseMode) -> bool {
        self.exact.contains(token)
            || (mode == CaseMode::FoldFallback && self.folded.contains(&token.to_lowercase()))
    }
}

/// Immutable token to vector index with a fixed dimensionality.
///
/// Vectors are stored contiguously in insertion order.
#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    dim: usize,
    source_label: String,
    case_mode: CaseMode,
    tokens: Vec<String>,
    data: Vec<f64>,
    index: HashMap<String, usize>,
    // folded token -> first row whose token folds to it
    folded: HashMap<String, usize>,
}

impl EmbeddingTable {
    /// Build a table from `(token, vector)` pairs. Unlike the file parser,
    /// this is strict: duplicates and wrong lengths are errors.
    pub fn from_entries<I, S>(
        source_label: impl Into<String>,
        dim: usize,
        case_mode: CaseMode,
        entries: I,
    ) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        let mut builder = TableBuilder::new(source_label.into(), dim, case_mode);
        for (token, vector) in entries {
            let token = token.into();
            if vector.len() != dim {
                return Err(EmbeddingError::DimMismatch {
                    token,
                    dim,
                    got: vector.len(),
                });
            }
            if builder.contains(&token) {
                return Err(EmbeddingError::DuplicateToken(token));
            }
            builder.push(token, &vector);
        }
        Ok(builder.finish())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn case_mode(&self) -> CaseMode {
        self.case_mode
    }

    /// Tokens in load order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    /// Same table under a different matching rule.
    pub fn with_case_mode(mut self, case_mode: CaseMode) -> Self {
        self.case_mode = case_mode;
        self
    }

    /// Same vectors under a different source label.
    pub fn with_source_label(mut self, label: impl Into<String>) -> Self {
        self.source_label = label.into();
        self
    }

    /// Look up a token: exact match first, then (under
    /// [`CaseMode::FoldFallback`]) the first row whose token case-folds to
    /// the same string. `None` means the token is out of vocabulary.
    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.resolve(token).map(|row| self.row(row))
    }

    /// The stored token that `token` resolves to, if any.
    pub fn resolve_token(&self, token: &str) -> Option<&str> {
        self.resolve(token).map(|row| self.tokens[row].as_str())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.resolve(token).is_some()
    }

    fn resolve(&self, token: &str) -> Option<usize> {
        if let Some(&row) = self.index.get(token) {
            return Some(row);
        }
        match self.case_mode {
            CaseMode::Exact => None,
            CaseMode::FoldFallback => self.folded.get(&token.to_lowercase()).copied(),
        }
    }

    fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    /// Apply `f` to every vector, keeping tokens and settings.
    pub fn map_vectors(&self, mut f: impl FnMut(&str, &[f64]) -> Vec<f64>) -> Self {
        let mut builder = TableBuilder::new(self.source_label.clone(), self.dim, self.case_mode);
        for (row, token) in self.tokens.iter().enumerate() {
            let vector = f(token, self.row(row));
            assert_eq!(vector.len(), self.dim, "map_vectors changed dimensionality");
            builder.push(token.clone(), &vector);
        }
        builder.finish()
    }

    /// Iterate `(token, vector)` in load order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(row, t)| (t.as_str(), self.row(row)))
    }
}

struct TableBuilder {
    table: EmbeddingTable,
}

impl TableBuilder {
    fn new(source_label: String, dim: usize, case_mode: CaseMode) -> Self {
        TableBuilder {
            table: EmbeddingTable {
                dim,
                source_label,
                case_mode,
                tokens: Vec::new(),
                data: Vec::new(),
                index: HashMap::new(),
                folded: HashMap::new(),
            },
        }
    }

    fn contains(&self, token: &str) -> bool {
        self.table.index.contains_key(token)
    }

    fn push(&mut self, token: String, vector: &[f64]) {
        let t = &mut self.table;
        let row = t.tokens.len();
        t.data.extend_from_slice(vector);
        t.folded.entry(token.to_lowercase()).or_insert(row);
        t.index.insert(token.clone(), row);
        t.tokens.push(token);
    }

    fn finish(self) -> EmbeddingTable {
        self.table
    }
}

/// Parse a `vec` file from disk. See [`parse_vec_reader`].
pub fn parse_vec_file(
    path: impl AsRef<Path>,
    source_label: &str,
    case_mode: CaseMode,
    allow: Option<&AllowList>,
) -> Result<(EmbeddingTable, ParseReport), EmbeddingError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| EmbeddingError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_vec_reader(BufReader::with_capacity(1 << 20, file), source_label, case_mode, allow)
        .map_err(|e| match e {
            EmbeddingError::Read { source, .. } => EmbeddingError::Read {
                path: path.to_owned(),
                source,
            },
            other => other,
        })
}

/// Parse `vec` text from any buffered reader.
///
/// With an allow-list, rows whose token is not admitted are counted in
/// [`ParseReport::lines_filtered`] without their numbers being parsed.
pub fn parse_vec_reader<R: BufRead>(
    mut reader: R,
    source_label: &str,
    case_mode: CaseMode,
    allow: Option<&AllowList>,
) -> Result<(EmbeddingTable, ParseReport), EmbeddingError> {
    let read_err = |source| EmbeddingError::Read {
        path: PathBuf::new(),
        source,
    };
    let mut buf = Vec::new();
    if reader.read_until(b'\n', &mut buf).map_err(read_err)? == 0 {
        return Err(EmbeddingError::Header("empty input".into()));
    }
    let (header_count, dim) = parse_header(&buf)?;

    let mut report = ParseReport {
        header_count,
        header_dim: dim,
        ..ParseReport::default()
    };
    let mut builder = TableBuilder::new(source_label.to_owned(), dim, case_mode);
    let mut vector = Vec::with_capacity(dim);
    let mut line_no = 1;

    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf).map_err(read_err)? == 0 {
            break;
        }
        line_no += 1;
        report.lines_total += 1;

        let skip = |report: &mut ParseReport, reason| {
            report.lines_skipped += 1;
            report.skip_reasons.push((line_no, reason));
        };

        let Ok(line) = std::str::from_utf8(&buf) else {
            skip(&mut report, SkipReason::InvalidUtf8);
            continue;
        };
        let line = line.trim_end_matches(['\n', '\r', ' ', '\t']);
        if line.is_empty() {
            skip(&mut report, SkipReason::EmptyLine);
            continue;
        }

        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let token = fields.next().unwrap_or_default();
        if let Some(allow) = allow {
            if !allow.admits(token, case_mode) {
                report.lines_filtered += 1;
                continue;
            }
        }

        vector.clear();
        let mut got = 0;
        let mut finite = true;
        for field in fields {
            got += 1;
            if got > dim {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => vector.push(v),
                _ => finite = false,
            }
        }
        if got != dim {
            skip(
                &mut report,
                SkipReason::WrongFieldCount {
                    expected: dim + 1,
                    got: got + 1,
                },
            );
            continue;
        }
        if !finite {
            skip(&mut report, SkipReason::NonFiniteNumber);
            continue;
        }
        if builder.contains(token) {
            skip(&mut report, SkipReason::DuplicateToken);
            continue;
        }
        builder.push(token.to_owned(), &vector);
        report.lines_kept += 1;
    }

    Ok((builder.finish(), report))
}

fn parse_header(raw: &[u8]) -> Result<(usize, usize), EmbeddingError> {
    let text = std::str::from_utf8(raw)
        .map_err(|_| EmbeddingError::Header("header is not valid UTF-8".into()))?;
    let text = text.trim_end_matches(['\n', '\r', ' ', '\t']);
    let fields: Vec<&str> = text.split(' ').filter(|f| !f.is_empty()).collect();
    let [count, dim] = fields.as_slice() else {
        return Err(EmbeddingError::Header(format!(
            "expected '<count> <dim>', found {text:?}"
        )));
    };
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| EmbeddingError::Header(format!("{s:?} is not a non-negative integer")))
    };
    let (count, dim) = (parse(count)?, parse(dim)?);
    if dim == 0 {
        return Err(EmbeddingError::ZeroDim);
    }
    Ok((count, dim))
}

/// Write `table` in the `vec` format, tokens in lexicographic order.
///
/// Numbers use the shortest representation that parses back to the same
/// `f64`. The file is written to a temporary sibling and renamed into
/// place, so a failed write leaves nothing behind.
pub fn write_interchange(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    if table.is_empty() {
        return Err(EmbeddingError::EmptyTable);
    }
    if let Some(bad) = table
        .tokens()
        .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
    {
        return Err(EmbeddingError::InvalidToken(bad.to_owned()));
    }
    let write_err = |source| EmbeddingError::Write {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if path.file_name().is_none() {
        return Err(write_err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "path has no file name",
        )));
    }
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(write_err)?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        write_vec(table, &mut out).map_err(write_err)?;
        out.flush().map_err(write_err)?;
    }
    tmp.persist(path).map_err(|e| write_err(e.error))?;
    Ok(())
}

/// Serialize `table` to any writer, in the same layout as [`write_interchange`].
pub fn write_vec<W: Write>(table: &EmbeddingTable, out: &mut W) -> io::Result<()> {
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| table.tokens[a].cmp(&table.tokens[b]));
    writeln!(out, "{} {}", table.len(), table.dim())?;
    for row in order {
        out.write_all(table.tokens[row].as_bytes())?;
        for v in table.row(row) {
            write!(out, " {v}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}
