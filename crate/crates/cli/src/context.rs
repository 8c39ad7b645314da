use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// A failed job: exit 1 for bad input or a computation that could not run,
/// exit 2 when the data fail a check.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            kind: "input",
            message: message.into(),
        }
    }

    pub fn computation(e: impl std::fmt::Display) -> Self {
        CliError {
            kind: "computation",
            message: e.to_string(),
        }
    }

    pub fn verification(e: impl std::fmt::Display) -> Self {
        CliError {
            kind: "verification",
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.kind == "verification" {
            2
        } else {
            1
        }
    }
}

#[derive(Serialize)]
pub struct InputRecord {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Collects what a job read and which settings it resolved.
#[derive(Default)]
pub struct Context {
    pub inputs: Vec<InputRecord>,
    pub params: Map<String, Value>,
    pub seed: u64,
}

impl Context {
    pub fn new(seed: u64) -> Self {
        Context {
            seed,
            ..Context::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("parameters serialize");
        self.params.insert(key.to_string(), v);
    }

    /// Reads a JSON file, accepting either a bare object or a report whose
    /// `result` holds it.
    pub fn load<T: DeserializeOwned>(&mut self, role: &str, path: &Path) -> Result<T, CliError> {
        let value = self.load_value(role, path)?;
        serde_json::from_value(value).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    pub fn load_value(&mut self, role: &str, path: &Path) -> Result<Value, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputRecord {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        let text = std::str::from_utf8(&bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let mut value: Value =
            serde_json::from_str(text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        if let Value::Object(map) = &mut value {
            if map.contains_key("provenance") {
                if let Some(result) = map.remove("result") {
                    return Ok(result);
                }
            }
        }
        Ok(value)
    }
}

pub fn write_text(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
