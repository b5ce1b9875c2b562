//! Named residual entries with pass/fail status, serialized for CI.

use serde::Serialize;

use crate::error::Error;
use crate::model::{Grid, SpacetimePoint};

/// How an entry affects the overall verdict. Only `Check` entries can fail
/// a report; warnings and findings are recorded but informational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Check,
    Warning,
    Finding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointMeta {
    pub t: f64,
    pub x: f64,
    pub xplus: f64,
    pub xminus: f64,
}

impl From<SpacetimePoint> for PointMeta {
    fn from(p: SpacetimePoint) -> Self {
        Self {
            t: p.t(),
            x: p.x(),
            xplus: p.xplus,
            xminus: p.xminus,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EntryContext {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Where the reported (worst) value was attained.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<PointMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportEntry {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub severity: Severity,
    pub context: EntryContext,
}

impl ReportEntry {
    /// `pass` iff `value <= tolerance`. Non-finite values fail and are stored
    /// as `f64::MAX` so the JSON stays numeric.
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let finite = value.is_finite();
        let value = if finite { value.max(0.0) } else { f64::MAX };
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: finite && value <= tolerance,
            severity: Severity::Check,
            context: EntryContext::default(),
        }
    }

    /// Entry recording a construction error in place of a value.
    pub fn failure(name: impl Into<String>, tolerance: f64, err: &Error) -> Self {
        Self::new(name, f64::INFINITY, tolerance).detail(err.to_string())
    }

    pub fn severity(mut self, severity: Severity) -> Self {
        self.severity = severity;
        self
    }

    pub fn grid(mut self, grid: &Grid) -> Self {
        self.context.h = Some(grid.h);
        self.context.grid = Some(grid.clone());
        self
    }

    pub fn h(mut self, h: f64) -> Self {
        self.context.h = Some(h);
        self
    }

    pub fn at(mut self, point: SpacetimePoint) -> Self {
        self.context.at = Some(point.into());
        self
    }

    pub fn detail(mut self, detail: impl Into<String>) -> Self {
        self.context.detail = Some(detail.into());
        self
    }

    /// Whether this entry counts against the overall verdict.
    pub fn blocking_failure(&self) -> bool {
        self.severity == Severity::Check && !self.pass
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResidualReport {
    pub entries: Vec<ReportEntry>,
}

impl ResidualReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: ReportEntry) {
        self.entries.push(entry);
    }

    /// Appends `other`, prefixing each name with `prefix.`.
    pub fn extend_prefixed(&mut self, prefix: &str, other: ResidualReport) {
        for mut e in other.entries {
            e.name = format!("{prefix}.{}", e.name);
            self.entries.push(e);
        }
    }

    pub fn get(&self, name: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Largest value among entries; zero for an empty report.
    pub fn max_value(&self) -> f64 {
        self.entries.iter().map(|e| e.value).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        !self.entries.iter().any(ReportEntry::blocking_failure)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| e.blocking_failure())
    }

    pub fn sort_by_name(&mut self) {
        self.entries.sort_by(|a, b| a.name.cmp(&b.name));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_within_tolerance() {
        assert!(ReportEntry::new("a", 1e-12, 1e-10).pass);
        assert!(ReportEntry::new("a", 1e-10, 1e-10).pass);
        assert!(!ReportEntry::new("a", 2e-10, 1e-10).pass);
        assert!(ReportEntry::new("a", 0.0, 0.0).pass);
        let inf = ReportEntry::new("a", f64::NAN, 1.0);
        assert!(!inf.pass);
        assert_eq!(inf.value, f64::MAX);
    }

    #[test]
    fn warnings_do_not_fail_report() {
        let mut r = ResidualReport::new();
        r.push(ReportEntry::new("ok", 0.0, 1.0));
        r.push(ReportEntry::new("cond", 1e9, 1e6).severity(Severity::Warning));
        r.push(ReportEntry::new("printed", 1.0, 1e-9).severity(Severity::Finding));
        assert!(r.passed());
        r.push(ReportEntry::new("bad", 1.0, 0.5));
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn prefixing_and_sorting() {
        let mut inner = ResidualReport::new();
        inner.push(ReportEntry::new("b", 0.0, 1.0));
        inner.push(ReportEntry::new("a", 0.0, 1.0));
        let mut outer = ResidualReport::new();
        outer.extend_prefixed("seed", inner);
        outer.sort_by_name();
        let names: Vec<_> = outer.entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["seed.a", "seed.b"]);
    }
}
