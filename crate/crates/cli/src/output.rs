use std::fmt;
use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::{Format, Out};

#[derive(Debug)]
pub enum CliError {
    Core(mncf::Error),
    /// Bad arguments or unreadable input.
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(mncf::Error::Capacity { .. }) => 3,
            CliError::Core(_) | CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<mncf::Error> for CliError {
    fn from(e: mncf::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(mncf::io::parse_json(&text)?)
}

/// Adds the `"schema": 1` version field in front of a JSON object.
pub fn versioned(body: Value) -> Value {
    let mut out = serde_json::Map::new();
    out.insert("schema".into(), Value::from(1));
    if let Value::Object(m) = body {
        out.extend(m);
    }
    Value::Object(out)
}

/// Writes `text` to stdout or, via a temporary file renamed into place, to `--output`.
pub fn emit(out: &Out, text: &str) -> CliResult {
    match &out.output {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("cannot write stdout: {e}")))
        }
        Some(path) => {
            let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let io = |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(text.as_bytes()).map_err(io)?;
            tmp.persist(path).map_err(|e| io(e.error))?;
            Ok(())
        }
    }
}

pub fn emit_json(out: &Out, body: Value) -> CliResult {
    let mut text = serde_json::to_string_pretty(&versioned(body)).expect("JSON values serialize");
    text.push('\n');
    emit(out, &text)
}

pub fn json_only(out: &Out, what: &str) -> CliResult {
    match out.format {
        Some(Format::Csv) => Err(usage(format!("{what} has no CSV form; use --format json"))),
        _ => Ok(()),
    }
}

pub fn opt_f64(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
