use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Environment variable naming an alternate defaults file.
pub const TASK_DEFAULTS_ENV: &str = "AWE_TASK_DEFAULTS";

/// Error budgets per task, used when a task name is given instead of a value.
///
/// Units follow the state space: meters plus radians for EE tasks, radians of
/// joint-vector L2 for joint tasks.
const BUILTIN: [(&str, f64); 8] = [
    ("lift", 0.005),
    ("can", 0.005),
    ("square", 0.005),
    ("cube-transfer", 0.01),
    ("bimanual-insertion", 0.01),
    ("screwdriver-handover", 0.01),
    ("wiping-table", 0.01),
    ("coffee-making", 0.008),
];

#[derive(Debug, Clone, PartialEq)]
pub struct TaskDefaults {
    etas: BTreeMap<String, f64>,
}

/// Lowercases and maps `_` and spaces to `-`, so `Coffee_Making` finds `coffee-making`.
pub fn normalize_task_name(name: &str) -> String {
    name.trim()
        .chars()
        .map(|c| match c {
            '_' | ' ' => '-',
            c => c.to_ascii_lowercase(),
        })
        .collect()
}

impl TaskDefaults {
    pub fn builtin() -> Self {
        TaskDefaults {
            etas: BUILTIN.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    /// Reads a JSON object of task name to budget.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: BTreeMap<String, f64> = serde_json::from_str(&text).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if let Some((k, v)) = raw.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Validation {
                path: path.to_path_buf(),
                message: format!("task `{k}` has non-positive budget {v}"),
            });
        }
        Ok(TaskDefaults {
            etas: raw
                .into_iter()
                .map(|(k, v)| (normalize_task_name(&k), v))
                .collect(),
        })
    }

    /// The table named by [`TASK_DEFAULTS_ENV`] if set, the builtin one otherwise.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(TASK_DEFAULTS_ENV) {
            Some(p) if !p.is_empty() => Self::load(p),
            _ => Ok(Self::builtin()),
        }
    }

    pub fn eta(&self, task: &str) -> Option<f64> {
        self.etas.get(&normalize_task_name(task)).copied()
    }

    pub fn tasks(&self) -> impl Iterator<Item = (&str, f64)> {
        self.etas.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table() {
        let d = TaskDefaults::builtin();
        assert_eq!(d.tasks().count(), 8);
        assert_eq!(d.eta("lift"), Some(0.005));
        assert_eq!(d.eta("Coffee_Making"), Some(0.008));
        assert_eq!(d.eta("cube transfer"), Some(0.01));
        assert_eq!(d.eta("stack"), None);
    }

    #[test]
    fn alternate_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.json");
        fs::write(&p, r#"{"Stack_Blocks": 0.02}"#).unwrap();
        let d = TaskDefaults::load(&p).unwrap();
        assert_eq!(d.eta("stack-blocks"), Some(0.02));
        fs::write(&p, r#"{"bad": 0}"#).unwrap();
        assert!(matches!(TaskDefaults::load(&p), Err(Error::Validation { .. })));
    }
}
