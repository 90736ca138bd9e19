use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const CSV_PREFIX: &str = "# manifest: ";

/// Everything needed to re-run a report: the subcommand, its parameters
/// (positional file included, under `file`) and the seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    pub fn csv_line(&self) -> String {
        format!("{CSV_PREFIX}{}\n", self.to_json())
    }

    /// Command-line arguments that reproduce the run.
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec![self.command.clone()];
        if let Some(file) = self.parameters.get("file") {
            args.push(file.clone());
        }
        for (key, value) in &self.parameters {
            if key != "file" {
                args.push(format!("--{key}"));
                args.push(value.clone());
            }
        }
        args.push("--seed".into());
        args.push(self.seed.to_string());
        args
    }

    /// Recovers the manifest from a CSV report (comment header) or a JSON
    /// report (`manifest` field).
    pub fn from_report(report: &str) -> Option<Self> {
        if let Some(line) = report.lines().find_map(|l| l.strip_prefix(CSV_PREFIX)) {
            return serde_json::from_str(line).ok();
        }
        let value: serde_json::Value = serde_json::from_str(report).ok()?;
        serde_json::from_value(value.get("manifest")?.clone()).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_csv_and_json() {
        let m = RunManifest::new("bertrand", 42).param("trials", 1000).param("format", "csv");
        let csv = format!("{}method,estimate\n", m.csv_line());
        assert_eq!(RunManifest::from_report(&csv), Some(m.clone()));
        let json = format!("{{\"manifest\":{},\"rows\":[]}}", m.to_json());
        assert_eq!(RunManifest::from_report(&json), Some(m.clone()));
        assert_eq!(
            m.to_args(),
            ["bertrand", "--format", "csv", "--trials", "1000", "--seed", "42"]
        );
    }

    #[test]
    fn file_parameter_is_positional() {
        let m = RunManifest::new("simulate", 1)
            .param("file", "builtin:dice")
            .param("group", "faces");
        assert_eq!(
            m.to_args(),
            ["simulate", "builtin:dice", "--group", "faces", "--seed", "1"]
        );
    }
}
