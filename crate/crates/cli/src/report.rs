//! Check records and the per-run bundle.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Version of the bundle layout and of every CSV header this tool writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Info,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Stable identifier of the property being tested.
    pub anchor: String,
    pub margins: Value,
    pub fixtures: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Check {
    pub fn new(name: &str, anchor: &str, status: Status) -> Self {
        Self {
            name: name.into(),
            status,
            anchor: anchor.into(),
            margins: Value::Null,
            fixtures: Value::Null,
            message: None,
        }
    }

    pub fn pass_if(name: &str, anchor: &str, ok: bool) -> Self {
        Self::new(name, anchor, if ok { Status::Pass } else { Status::Fail })
    }

    pub fn info(name: &str, anchor: &str) -> Self {
        Self::new(name, anchor, Status::Info)
    }

    pub fn margins(mut self, v: Value) -> Self {
        self.margins = v;
        self
    }

    pub fn fixtures(mut self, v: Value) -> Self {
        self.fixtures = v;
        self
    }

    pub fn message(mut self, m: impl Into<String>) -> Self {
        self.message = Some(m.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub command: String,
    pub config_hash: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub version: String,
    pub config: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub metadata: RunMetadata,
    pub checks: Vec<Check>,
    /// Paths relative to the run directory.
    pub artifacts: Vec<String>,
}

impl ReportBundle {
    pub fn worst(&self) -> Status {
        self.checks
            .iter()
            .map(|c| c.status)
            .max()
            .unwrap_or(Status::Pass)
    }

    pub fn exit_code(&self) -> i32 {
        match self.worst() {
            Status::Fail => 1,
            _ => 0,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Orders `checks` by the declared list and makes sure each declared name
/// appears exactly once. Declared checks that never ran are recorded as
/// failures carrying `error`, or a generic message.
pub fn complete(
    declared: &[(&str, &str)],
    mut checks: Vec<Check>,
    error: Option<String>,
) -> Vec<Check> {
    let mut out = Vec::with_capacity(declared.len());
    for (name, anchor) in declared {
        match checks.iter().position(|c| c.name == *name) {
            Some(k) => out.push(checks.remove(k)),
            None => out.push(
                Check::new(name, anchor, Status::Fail).message(
                    error
                        .clone()
                        .unwrap_or_else(|| "check was not evaluated".into()),
                ),
            ),
        }
    }
    // undeclared extras keep their order after the declared ones
    out.extend(checks);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_checks_fail() {
        let declared = [("a", "x.a"), ("b", "x.b")];
        let done = vec![Check::pass_if("b", "x.b", true)];
        let out = complete(&declared, done, Some("boom".into()));
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].status, Status::Fail);
        assert_eq!(out[0].message.as_deref(), Some("boom"));
        assert_eq!(out[1].status, Status::Pass);
    }

    #[test]
    fn status_order_and_exit_code() {
        assert!(Status::Fail > Status::Info && Status::Info > Status::Pass);
        let mut b = ReportBundle {
            schema_version: SCHEMA_VERSION,
            metadata: RunMetadata {
                command: "x".into(),
                config_hash: String::new(),
                timestamp: 0,
                tol_abs: 1e-10,
                tol_rel: 1e-10,
                version: String::new(),
                config: Value::Null,
            },
            checks: vec![Check::info("i", "x.i"), Check::pass_if("p", "x.p", true)],
            artifacts: vec![],
        };
        assert_eq!(b.exit_code(), 0);
        b.checks.push(Check::pass_if("f", "x.f", false));
        assert_eq!(b.exit_code(), 1);
        let json = serde_json::to_value(&b).unwrap();
        assert_eq!(json["checks"][2]["status"], "FAIL");
    }
}
