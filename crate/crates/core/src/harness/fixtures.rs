//! Fixture corpus: `.cfj` programs whose leading `//` comments state the
//! expected outcome.
//!
//! ```text
//! // expect: accept People        (main's static type)
//! // result: new Text()           (rendered final value, optional)
//! // expect: reject T-LayerSW     (rule cited by the first type error)
//! // unchecked: stuck 3           (with checking off, stuck after N steps)
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ast::Program;
use crate::syntax::{parse_program, LoadError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    Accept { ty: String, result: Option<String> },
    Reject { rule: String },
    /// No `expect:` header.
    Unspecified,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub id: String,
    pub path: Option<PathBuf>,
    pub source: String,
    pub expect: Expectation,
    /// With typechecking bypassed, evaluation gets stuck after exactly this many steps.
    pub unchecked_stuck: Option<usize>,
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{id}: bad header `{line}`")]
    Header { id: String, line: String },
}

impl Fixture {
    pub fn from_source(id: impl Into<String>, source: impl Into<String>) -> Result<Fixture, FixtureError> {
        let id = id.into();
        let source = source.into();
        let mut expect = Expectation::Unspecified;
        let mut result = None;
        let mut unchecked_stuck = None;
        let bad = |line: &str| FixtureError::Header { id: id.clone(), line: line.to_owned() };
        for line in source.lines().map(str::trim).take_while(|l| l.starts_with("//") || l.is_empty()) {
            let body = line.trim_start_matches('/').trim();
            if let Some(rest) = body.strip_prefix("expect:") {
                let mut words = rest.split_whitespace();
                expect = match (words.next(), words.next(), words.next()) {
                    (Some("accept"), Some(ty), None) => Expectation::Accept { ty: ty.to_owned(), result: None },
                    (Some("reject"), Some(rule), None) => Expectation::Reject { rule: rule.to_owned() },
                    _ => return Err(bad(line)),
                };
            } else if let Some(rest) = body.strip_prefix("result:") {
                result = Some(rest.trim().to_owned());
            } else if let Some(rest) = body.strip_prefix("unchecked:") {
                let mut words = rest.split_whitespace();
                unchecked_stuck = match (words.next(), words.next().map(str::parse::<usize>)) {
                    (Some("stuck"), Some(Ok(n))) => Some(n),
                    _ => return Err(bad(line)),
                };
            }
        }
        if let Expectation::Accept { result: r, .. } = &mut expect {
            *r = result;
        } else if result.is_some() {
            return Err(bad("result: without expect: accept"));
        }
        Ok(Fixture { id, path: None, source, expect, unchecked_stuck })
    }

    pub fn load(path: &Path) -> Result<Fixture, FixtureError> {
        let source = fs::read_to_string(path).map_err(|source| FixtureError::Io { path: path.to_owned(), source })?;
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut f = Fixture::from_source(id, source)?;
        f.path = Some(path.to_owned());
        Ok(f)
    }

    pub fn program(&self) -> Result<Program, LoadError> {
        parse_program(&self.source)
    }
}

/// Every `*.cfj` file directly inside `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<Fixture>, FixtureError> {
    let io_err = |source| FixtureError::Io { path: dir.to_owned(), source };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfj"))
        .collect();
    paths.sort();
    paths.iter().map(|p| Fixture::load(p)).collect()
}

/// The corpus shipped with this crate.
pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn corpus() -> Result<Vec<Fixture>, FixtureError> {
    load_dir(&corpus_dir())
}

/// A corpus fixture by id; panics if missing, for tests.
pub fn fixture(id: &str) -> Fixture {
    Fixture::load(&corpus_dir().join(format!("{id}.cfj"))).unwrap_or_else(|e| panic!("fixture {id}: {e}"))
}
