//! Identity reports and the aggregate run report.
//!
//! Serialization order is fixed by struct field order and `Vec`s everywhere,
//! so identical configurations produce byte-identical JSON.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Outcome category for one identity entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    /// Residual within tolerance.
    Pass,
    /// Residual exceeded tolerance.
    Fail,
    /// Identity quantified over an empty set (e.g. D⊥ = {0}); reported as a
    /// pass so if-and-only-if bookkeeping stays honest, but counted apart.
    Vacuous,
    /// Hypothesis of the identity did not hold, so no claim is made.
    NotApplicable,
    /// Measured quantity with no asserted truth value.
    Measured,
}

impl EntryStatus {
    /// Whether this entry can make the run fail.
    pub fn gates(self) -> bool {
        matches!(self, EntryStatus::Pass | EntryStatus::Fail)
    }
}

/// One verified identity: max residual over the sample set vs tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityEntry {
    pub id: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub status: EntryStatus,
    pub samples_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl IdentityEntry {
    pub fn checked(id: &str, max_residual: f64, tolerance: f64, samples_used: usize) -> Self {
        let pass = max_residual <= tolerance;
        IdentityEntry {
            id: id.to_string(),
            max_residual,
            tolerance,
            pass,
            status: if pass {
                EntryStatus::Pass
            } else {
                EntryStatus::Fail
            },
            samples_used,
            note: None,
        }
    }

    pub fn vacuous(id: &str, tolerance: f64) -> Self {
        IdentityEntry {
            id: id.to_string(),
            max_residual: 0.0,
            tolerance,
            pass: true,
            status: EntryStatus::Vacuous,
            samples_used: 0,
            note: None,
        }
    }

    pub fn not_applicable(id: &str, tolerance: f64, note: &str) -> Self {
        IdentityEntry {
            id: id.to_string(),
            max_residual: 0.0,
            tolerance,
            pass: true,
            status: EntryStatus::NotApplicable,
            samples_used: 0,
            note: Some(note.to_string()),
        }
    }

    pub fn measured(id: &str, value: f64, samples_used: usize) -> Self {
        IdentityEntry {
            id: id.to_string(),
            max_residual: value,
            tolerance: f64::INFINITY,
            pass: true,
            status: EntryStatus::Measured,
            samples_used,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Named suite of identity checks with sampling provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    pub suite: String,
    pub seed: u64,
    pub entries: Vec<IdentityEntry>,
}

impl IdentityReport {
    pub fn new(suite: &str, seed: u64) -> Self {
        IdentityReport {
            suite: suite.to_string(),
            seed,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, entry: IdentityEntry) {
        self.entries.push(entry);
    }

    pub fn all_gating_pass(&self) -> bool {
        self.entries
            .iter()
            .all(|e| !e.status.gates() || e.status == EntryStatus::Pass)
    }

    pub fn entry(&self, id: &str) -> Option<&IdentityEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

/// Typo/ambiguity annotation raised by a verification module.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Flag {
    pub id: String,
    pub message: String,
}

/// Report for one (α, β) grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridPointReport {
    pub alpha: f64,
    pub beta: f64,
    pub suites: Vec<IdentityReport>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub vacuous: usize,
    pub not_applicable: usize,
    pub measured: usize,
}

/// Echo of the configuration that produced a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub manifest: String,
    pub suites: Vec<String>,
    pub alpha_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub seed: u64,
    pub sample_count: usize,
    pub tolerance_overrides: Vec<(String, f64)>,
}

/// Full run report. `schema` is bumped on any breaking layout change.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool_version: String,
    pub config: ConfigEcho,
    pub grid: Vec<GridPointReport>,
    pub summary: Summary,
    pub flags: Vec<Flag>,
}

impl Report {
    pub const SCHEMA_VERSION: u32 = 1;

    pub fn finalize(&mut self) {
        let mut summary = Summary::default();
        for gp in &self.grid {
            for suite in &gp.suites {
                for e in &suite.entries {
                    match e.status {
                        EntryStatus::Pass => summary.pass += 1,
                        EntryStatus::Fail => summary.fail += 1,
                        EntryStatus::Vacuous => summary.vacuous += 1,
                        EntryStatus::NotApplicable => summary.not_applicable += 1,
                        EntryStatus::Measured => summary.measured += 1,
                    }
                }
            }
        }
        self.summary = summary;
        self.flags.sort_by(|a, b| a.id.cmp(&b.id));
        self.flags.dedup();
    }

    pub fn all_passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn to_json(&self) -> String {
        // serde_json writes struct fields in declaration order and uses the
        // shortest round-trip float form, both stable across runs.
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "lpsmc {} report (schema {})", self.tool_version, self.schema);
        let _ = writeln!(
            out,
            "manifest: {}  seed: {}  samples: {}",
            self.config.manifest, self.config.seed, self.config.sample_count
        );
        for gp in &self.grid {
            let _ = writeln!(out, "\n(alpha, beta) = ({}, {})", gp.alpha, gp.beta);
            let _ = writeln!(
                out,
                "  {:<18} {:<28} {:>12} {:>10} {:>8}",
                "suite", "identity", "max residual", "tol", "status"
            );
            for suite in &gp.suites {
                for e in &suite.entries {
                    let status = match e.status {
                        EntryStatus::Pass => "PASS",
                        EntryStatus::Fail => "FAIL",
                        EntryStatus::Vacuous => "VACUOUS",
                        EntryStatus::NotApplicable => "N/A",
                        EntryStatus::Measured => "MEASURED",
                    };
                    let tol = if e.tolerance.is_finite() {
                        format!("{:.1e}", e.tolerance)
                    } else {
                        "-".to_string()
                    };
                    let _ = writeln!(
                        out,
                        "  {:<18} {:<28} {:>12.3e} {:>10} {:>8}",
                        suite.suite, e.id, e.max_residual, tol, status
                    );
                }
            }
        }
        let _ = writeln!(
            out,
            "\nsummary: {} pass, {} fail, {} vacuous, {} n/a, {} measured",
            self.summary.pass,
            self.summary.fail,
            self.summary.vacuous,
            self.summary.not_applicable,
            self.summary.measured
        );
        if !self.flags.is_empty() {
            let _ = writeln!(out, "\nflags:");
            for flag in &self.flags {
                let _ = writeln!(out, "  [{}] {}", flag.id, flag.message);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_pass_matches_tolerance() {
        let e = IdentityEntry::checked("x", 1e-10, 1e-9, 4);
        assert!(e.pass);
        let e = IdentityEntry::checked("x", 1e-8, 1e-9, 4);
        assert!(!e.pass);
        assert_eq!(e.status, EntryStatus::Fail);
    }

    #[test]
    fn summary_counts_statuses() {
        let mut report = Report {
            schema: Report::SCHEMA_VERSION,
            tool_version: "test".into(),
            config: ConfigEcho {
                manifest: "example3".into(),
                suites: vec![],
                alpha_values: vec![],
                beta_values: vec![],
                seed: 0,
                sample_count: 8,
                tolerance_overrides: vec![],
            },
            grid: vec![GridPointReport {
                alpha: 0.0,
                beta: 0.0,
                suites: vec![IdentityReport {
                    suite: "s".into(),
                    seed: 0,
                    entries: vec![
                        IdentityEntry::checked("a", 0.0, 1e-9, 1),
                        IdentityEntry::vacuous("b", 1e-9),
                        IdentityEntry::measured("c", 0.5, 1),
                    ],
                }],
            }],
            summary: Summary::default(),
            flags: vec![],
        };
        report.finalize();
        assert_eq!(report.summary.pass, 1);
        assert_eq!(report.summary.vacuous, 1);
        assert_eq!(report.summary.measured, 1);
        assert!(report.all_passed());
    }

    #[test]
    fn json_is_stable() {
        let mut report = Report {
            schema: Report::SCHEMA_VERSION,
            tool_version: "test".into(),
            config: ConfigEcho {
                manifest: "example3".into(),
                suites: vec!["axioms".into()],
                alpha_values: vec![1.0],
                beta_values: vec![0.0],
                seed: 7,
                sample_count: 16,
                tolerance_overrides: vec![],
            },
            grid: vec![],
            summary: Summary::default(),
            flags: vec![],
        };
        report.finalize();
        assert_eq!(report.to_json(), report.to_json());
    }
}
