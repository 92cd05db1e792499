use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::config::RunConfig;
use crate::inputs::{LexiconSource, ModelReport};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool {
    name: "lexiprofile",
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Serialize)]
pub struct Metadata<'a> {
    pub command: &'static str,
    pub config: &'a RunConfig,
    /// Earlier profile output used instead of embeddings.
    pub profiles_input: Option<&'a Path>,
    pub lexicons: &'a [LexiconSource],
    pub models: &'a [ModelReport],
    pub warnings: Vec<String>,
}

/// Top-level layout shared by every JSON output.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: &'static str,
    pub tool: &'static Tool,
    pub metadata: Metadata<'a>,
    #[serde(flatten)]
    pub result: T,
}

/// Output files written to temporaries next to their targets and moved into
/// place together by [`Staged::commit`].
pub struct Staged {
    dir: PathBuf,
    files: Vec<(PathBuf, NamedTempFile)>,
}

impl Staged {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create '{}'", dir.display()))?;
        Ok(Staged {
            dir: dir.to_owned(),
            files: Vec::new(),
        })
    }

    fn stage(&mut self, name: &str, fill: impl FnOnce(&mut BufWriter<&std::fs::File>) -> Result<()>) -> Result<()> {
        let target = self.dir.join(name);
        let tmp = NamedTempFile::new_in(&self.dir).with_context(|| format!("cannot write '{}'", target.display()))?;
        {
            let mut out = BufWriter::new(tmp.as_file());
            fill(&mut out).with_context(|| format!("cannot write '{}'", target.display()))?;
            out.flush()?;
        }
        self.files.push((target, tmp));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.stage(name, |out| {
            serde_json::to_writer_pretty(&mut *out, value)?;
            out.write_all(b"\n")?;
            Ok(())
        })
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        self.stage(name, |out| {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header)?;
            for row in rows {
                w.write_record(&row)?;
            }
            w.flush()?;
            Ok(())
        })
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<()> {
        self.stage(name, |out| Ok(out.write_all(text.as_bytes())?))
    }

    /// Move every staged file into place. If any rename fails the files
    /// already moved are removed again.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut done = Vec::new();
        for (target, tmp) in self.files {
            if let Err(e) = tmp.persist(&target) {
                for p in &done {
                    let _ = std::fs::remove_file(p);
                }
                return Err(e.error).with_context(|| format!("cannot write '{}'", target.display()));
            }
            done.push(target);
        }
        Ok(done)
    }
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else {
        String::new()
    }
}
