use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::context::CliError;

/// A job file: one command with its input files and parameters.
///
/// ```json
/// {"command": "verify", "check": "shock",
///  "inputs": {"traces": "t.json"}, "params": {"tol": 1e-6},
///  "output": "shock.json"}
/// ```
///
/// Relative paths are resolved against the job file's directory. Parameter
/// names are the command-line flags without dashes; `true` sets a switch
/// and arrays are joined with commas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<String>,
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

const COMMANDS: [&str; 5] = ["trace", "radon", "reconstruct", "verify", "extend"];

fn flag(key: &str) -> String {
    format!("--{}", key.replace('_', "-"))
}

fn scalar(key: &str, v: &Value) -> Result<String, CliError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(CliError::input(format!(
            "parameter {key:?} must be a string, number, boolean or array"
        ))),
    }
}

impl JobSpec {
    /// Command-line arguments equivalent to this job.
    pub fn to_args(&self, base: &Path) -> Result<Vec<OsString>, CliError> {
        if !COMMANDS.contains(&self.command.as_str()) {
            return Err(CliError::input(format!(
                "unknown job command {:?}; expected one of {}",
                self.command,
                COMMANDS.join(", ")
            )));
        }
        let mut args: Vec<OsString> = vec!["abel-radon".into(), self.command.clone().into()];
        match (&self.check, self.command.as_str()) {
            (Some(check), "verify") => args.push(check.into()),
            (None, "verify") => return Err(CliError::input("a verify job needs \"check\"")),
            (Some(_), _) => return Err(CliError::input("\"check\" only applies to verify jobs")),
            (None, _) => {}
        }
        for (key, path) in &self.inputs {
            let resolved = base.join(path);
            if !resolved.is_file() {
                return Err(CliError::input(format!(
                    "input {key:?}: {} does not exist",
                    resolved.display()
                )));
            }
            args.push(flag(key).into());
            args.push(resolved.into());
        }
        for (key, value) in &self.params {
            match value {
                Value::Bool(true) => args.push(flag(key).into()),
                Value::Bool(false) | Value::Null => {}
                Value::Array(items) => {
                    let parts = items.iter().map(|v| scalar(key, v)).collect::<Result<Vec<_>, _>>()?;
                    args.push(format!("{}={}", flag(key), parts.join(",")).into());
                }
                v => args.push(format!("{}={}", flag(key), scalar(key, v)?).into()),
            }
        }
        for (name, path) in [("--output", &self.output), ("--report", &self.report)] {
            if let Some(p) = path {
                args.push(name.into());
                args.push(base.join(p).into());
            }
        }
        Ok(args)
    }
}
