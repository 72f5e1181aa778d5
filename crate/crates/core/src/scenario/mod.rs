//! JSON scenario documents: parse, validate, run, and write artifacts with a
//! hashed manifest.
//!
//! ```json
//! {
//!   "schema": "decolab/scenario/v1",
//!   "kind": "chain",
//!   "params": { "links": 3, "overlap": 0.5 },
//!   "out": "out/chain",
//!   "seed": 7
//! }
//! ```
//!
//! Exit codes: 0 success, 2 schema or parameter error, 3 invariant violation
//! during a run, 4 I/O failure.

mod kinds;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::output::to_json_bytes;

pub use kinds::Kind;

pub const SCENARIO_SCHEMA: &str = "decolab/scenario/v1";
pub const MANIFEST_SCHEMA: &str = "decolab/manifest/v1";
pub const DEFAULT_OUT: &str = "decolab-out";

/// One problem found in a scenario document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Schema(Vec<Diagnostic>),
    Invariant(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => 2,
            RunError::Invariant(_) => 3,
            RunError::Io(_) => 4,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Schema(diags) => {
                write!(f, "scenario rejected ({} problem(s))", diags.len())?;
                for d in diags {
                    write!(f, "\n  {d}")?;
                }
                Ok(())
            }
            RunError::Invariant(msg) => write!(f, "invariant violated: {msg}"),
            RunError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<crate::Error> for RunError {
    fn from(e: crate::Error) -> Self {
        RunError::Invariant(e.to_string())
    }
}

/// A named output file held in memory until the run has finished.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: &str, bytes: Vec<u8>) -> Self {
        Self { name: name.to_string(), bytes }
    }

    pub fn json<T: Serialize + ?Sized>(name: &str, value: &T) -> Result<Self, RunError> {
        let bytes = to_json_bytes(value).map_err(|e| RunError::Invariant(format!("serializing {name}: {e}")))?;
        Ok(Self::new(name, bytes))
    }
}

/// A parsed scenario whose parameters have not been checked yet.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: Kind,
    pub params: Value,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Scenario {
    /// Parses the envelope, collecting every problem instead of stopping at the first.
    pub fn from_json(text: &str) -> Result<Self, Vec<Diagnostic>> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| vec![Diagnostic::new("document", format!("invalid JSON: {e}"))])?;
        let Value::Object(mut obj) = value else {
            return Err(vec![Diagnostic::new("document", "expected a JSON object")]);
        };
        let mut diags = Vec::new();
        match obj.remove("schema") {
            Some(Value::String(s)) if s == SCENARIO_SCHEMA => {}
            Some(other) => diags.push(Diagnostic::new("schema", format!("expected {SCENARIO_SCHEMA:?}, found {other}"))),
            None => diags.push(Diagnostic::new("schema", format!("missing; expected {SCENARIO_SCHEMA:?}"))),
        }
        let kind = match obj.remove("kind") {
            Some(Value::String(s)) => match s.parse::<Kind>() {
                Ok(k) => Some(k),
                Err(()) => {
                    let names: Vec<&str> = Kind::ALL.iter().map(|k| k.name()).collect();
                    diags.push(Diagnostic::new("kind", format!("unknown kind {s:?}; expected one of {}", names.join(", "))));
                    None
                }
            },
            Some(other) => {
                diags.push(Diagnostic::new("kind", format!("expected a string, found {other}")));
                None
            }
            None => {
                diags.push(Diagnostic::new("kind", "missing"));
                None
            }
        };
        let params = match obj.remove("params") {
            Some(v @ Value::Object(_)) => v,
            None => Value::Object(Map::new()),
            Some(other) => {
                diags.push(Diagnostic::new("params", format!("expected an object, found {other}")));
                Value::Null
            }
        };
        let out = match obj.remove("out") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
            Some(other) => {
                diags.push(Diagnostic::new("out", format!("expected a nonempty path string, found {other}")));
                None
            }
        };
        let seed = match obj.remove("seed") {
            None | Some(Value::Null) => 0,
            Some(v) => v.as_u64().unwrap_or_else(|| {
                diags.push(Diagnostic::new("seed", format!("expected a nonnegative integer, found {v}")));
                0
            }),
        };
        for key in obj.keys() {
            diags.push(Diagnostic::new(key.clone(), "unknown top-level field"));
        }
        match kind {
            Some(kind) if diags.is_empty() => Ok(Self { kind, params, out, seed }),
            _ => Err(diags),
        }
    }

    /// Parameter diagnostics; empty means the scenario can run.
    pub fn check(&self) -> Vec<Diagnostic> {
        match kinds::prepare(self.kind, &self.params) {
            Ok(_) => Vec::new(),
            Err(diags) => diags,
        }
    }

    /// Runs the experiment and returns its artifacts without touching the disk.
    pub fn execute(&self) -> Result<Vec<Artifact>, RunError> {
        let job = kinds::prepare(self.kind, &self.params).map_err(RunError::Schema)?;
        job.run(self.seed)
    }
}

fn read(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

/// All diagnostics for the scenario at `path`; only I/O failures are errors.
pub fn validate_file(path: &Path) -> Result<Vec<Diagnostic>, RunError> {
    let text = read(path)?;
    Ok(match Scenario::from_json(&text) {
        Ok(s) => s.check(),
        Err(diags) => diags,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema: &'static str,
    pub version: &'static str,
    pub kind: &'static str,
    pub seed: u64,
    pub scenario_sha256: String,
    pub files: Vec<ManifestEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs the scenario at `path` and writes its artifacts and manifest.
///
/// `out` and `seed` override the document's values. Nothing is written when
/// the run fails.
pub fn run_file(path: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<Manifest, RunError> {
    let text = read(path)?;
    let mut scenario = Scenario::from_json(&text).map_err(RunError::Schema)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let out_dir = out.map(Path::to_path_buf).or_else(|| scenario.out.clone()).unwrap_or_else(|| DEFAULT_OUT.into());
    let artifacts = scenario.execute()?;

    let io = |p: &Path, e: std::io::Error| RunError::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(&out_dir).map_err(|e| io(&out_dir, e))?;
    let mut files = Vec::with_capacity(artifacts.len());
    for a in &artifacts {
        let target = out_dir.join(&a.name);
        fs::write(&target, &a.bytes).map_err(|e| io(&target, e))?;
        files.push(ManifestEntry { path: a.name.clone(), bytes: a.bytes.len(), sha256: sha256_hex(&a.bytes) });
    }
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        kind: scenario.kind.name(),
        seed: scenario.seed,
        scenario_sha256: sha256_hex(text.as_bytes()),
        files,
    };
    let bytes = to_json_bytes(&manifest).map_err(|e| RunError::Io(e.to_string()))?;
    let target = out_dir.join(MANIFEST_NAME);
    fs::write(&target, bytes).map_err(|e| io(&target, e))?;
    Ok(manifest)
}
