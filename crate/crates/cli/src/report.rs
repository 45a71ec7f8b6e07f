//! Error classification, exit codes and artifact writing.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Core(betalab::Error),
    Parse(String),
    Io(String),
    /// Validation of the input failed; the payload goes into the report.
    Validation { message: String, detail: Value },
    /// An invariant of the check suite failed.
    CheckFailed { message: String, detail: Value },
}

impl From<betalab::Error> for CliError {
    fn from(e: betalab::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    /// 1 for bad input, 2 for numerical budget problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::CheckFailed { .. } => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(betalab::Error::Parse(_)) | CliError::Parse(_) => "parse",
            CliError::Core(betalab::Error::Violation { .. }) | CliError::Validation { .. } => "validation",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(_) => "domain",
            CliError::Io(_) => "io",
            CliError::CheckFailed { .. } => "check",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Parse(m) => format!("parse error: {m}"),
            CliError::Io(m) => format!("i/o error: {m}"),
            CliError::Validation { message, .. } | CliError::CheckFailed { message, .. } => message.clone(),
        }
    }

    fn detail(&self) -> Option<&Value> {
        match self {
            CliError::Validation { detail, .. } | CliError::CheckFailed { detail, .. } => Some(detail),
            _ => None,
        }
    }
}

pub struct Output {
    pub dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    pub fn csv<R: Serialize>(&self, name: &str, rows: &[R]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(path)
    }

    /// Plain numeric table with an explicit header.
    pub fn table(&self, name: &str, header: &[String], rows: &[Vec<f64>]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(path)
    }

    fn json(&self, command: &str, value: &Value) -> Result<PathBuf, CliError> {
        let path = self.dir.join(format!("{command}.json"));
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

/// Report for a finished run, printed and written as `<command>.json`.
pub fn finish(out: Option<&Output>, cfg: &RunConfig, outcome: &Result<Value, CliError>) -> i32 {
    let command = cfg.command.clone().unwrap_or_default();
    let (report, code) = match outcome {
        Ok(result) => (json!({ "command": command, "status": "ok", "config": cfg, "result": result }), 0),
        Err(e) => {
            let mut error = json!({ "kind": e.kind(), "message": e.message() });
            if let Some(d) = e.detail() {
                error["detail"] = d.clone();
            }
            (json!({ "command": command, "status": "error", "config": cfg, "error": error }), e.exit_code())
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
    if let Err(e) = outcome {
        eprintln!("betalab: {}", e.message());
    }
    if let Some(out) = out {
        if let Err(e) = out.json(&command, &report) {
            eprintln!("betalab: {}", e.message());
            return code.max(1);
        }
    }
    code
}
