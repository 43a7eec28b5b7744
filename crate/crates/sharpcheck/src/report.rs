//! Report rows shared by the checks and the command-line front end.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a reference value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefSource {
    /// An exact formula or identity.
    ClosedForm,
    /// A pinned value from the fixtures file.
    Fixture,
    /// The limit of a sequence.
    AnalyticLimit,
}

impl fmt::Display for RefSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RefSource::ClosedForm => "closed-form",
            RefSource::Fixture => "fixture",
            RefSource::AnalyticLimit => "analytic-limit",
        })
    }
}

/// How `value` is compared with `reference`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    /// `|value - reference| <= tol`
    Absolute,
    /// `|value - reference| <= tol·|reference|`
    Relative,
    /// `value >= reference - tol`
    AtLeast,
    /// `value <= reference + tol`
    AtMost,
}

impl Comparison {
    pub fn passes(self, value: f64, reference: f64, tol: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        match self {
            Comparison::Absolute => (value - reference).abs() <= tol,
            Comparison::Relative => (value - reference).abs() <= tol * reference.abs(),
            Comparison::AtLeast => value >= reference - tol,
            Comparison::AtMost => value <= reference + tol,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::Absolute => "abs",
            Comparison::Relative => "rel",
            Comparison::AtLeast => ">=",
            Comparison::AtMost => "<=",
        }
    }
}

/// One line of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub check_id: String,
    pub value: f64,
    pub reference: f64,
    pub ref_source: RefSource,
    pub tol: f64,
    pub pass: bool,
    pub quad_error: Option<f64>,
    pub seconds: Option<f64>,
}

impl fmt::Display for ReportRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: value {:e}, reference {:e} ({}), tol {:e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.check_id,
            self.value,
            self.reference,
            self.ref_source,
            self.tol
        )?;
        if let Some(e) = self.quad_error {
            write!(f, ", quad error {e:e}")?;
        }
        Ok(())
    }
}

/// Builder for a row.
#[derive(Clone, Debug)]
pub struct Check {
    id: String,
    value: f64,
    reference: f64,
    source: RefSource,
    tol: f64,
    comparison: Comparison,
    quad_error: Option<f64>,
}

impl Check {
    pub fn new(id: impl Into<String>, value: f64, reference: f64, source: RefSource, tol: f64, comparison: Comparison) -> Self {
        Self { id: id.into(), value, reference, source, tol, comparison, quad_error: None }
    }

    pub fn absolute(id: impl Into<String>, value: f64, reference: f64, source: RefSource, tol: f64) -> Self {
        Self::new(id, value, reference, source, tol, Comparison::Absolute)
    }

    pub fn relative(id: impl Into<String>, value: f64, reference: f64, source: RefSource, tol: f64) -> Self {
        Self::new(id, value, reference, source, tol, Comparison::Relative)
    }

    pub fn at_least(id: impl Into<String>, value: f64, lower: f64, source: RefSource, tol: f64) -> Self {
        Self::new(id, value, lower, source, tol, Comparison::AtLeast)
    }

    pub fn at_most(id: impl Into<String>, value: f64, upper: f64, source: RefSource, tol: f64) -> Self {
        Self::new(id, value, upper, source, tol, Comparison::AtMost)
    }

    /// A boolean property, reported as value 1/0 against reference 1.
    pub fn holds(id: impl Into<String>, ok: bool) -> Self {
        Self::new(id, if ok { 1.0 } else { 0.0 }, 1.0, RefSource::ClosedForm, 0.0, Comparison::Absolute)
    }

    pub fn quad_error(mut self, e: f64) -> Self {
        self.quad_error = Some(e);
        self
    }

    pub fn comparison(&self) -> Comparison {
        self.comparison
    }

    pub fn finish(self, seconds: Option<f64>) -> ReportRow {
        let pass = self.comparison.passes(self.value, self.reference, self.tol);
        let id = match self.comparison {
            Comparison::Absolute | Comparison::Relative => self.id,
            c => format!("{} ({})", self.id, c.symbol()),
        };
        ReportRow {
            check_id: id,
            value: self.value,
            reference: self.reference,
            ref_source: self.source,
            tol: self.tol,
            pass,
            quad_error: self.quad_error,
            seconds,
        }
    }
}

/// An ordered list of rows.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    #[serde(skip)]
    timing: bool,
}

impl Report {
    pub fn new(timing: bool) -> Self {
        Self { rows: Vec::new(), timing }
    }

    pub fn push(&mut self, check: Check, started: Instant) {
        let seconds = self.timing.then(|| started.elapsed().as_secs_f64());
        self.rows.push(check.finish(seconds));
    }

    /// Runs `f`, timing it, and appends every check it returns.
    pub fn run<F>(&mut self, f: F) -> Result<()>
    where
        F: FnOnce() -> Result<Vec<Check>>,
    {
        let start = Instant::now();
        let checks = f()?;
        let seconds = self.timing.then(|| start.elapsed().as_secs_f64());
        self.rows.extend(checks.into_iter().map(|c| c.finish(seconds)));
        Ok(())
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.rows).map_err(|e| Error::Domain(format!("json: {e}")))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Domain(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Domain(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Comparison::Absolute.passes(1.0, 1.0 + 1e-9, 1e-8));
        assert!(!Comparison::Relative.passes(1.1, 1.0, 1e-2));
        assert!(Comparison::AtLeast.passes(-1e-9, 0.0, 1e-8));
        assert!(!Comparison::AtLeast.passes(-1e-7, 0.0, 1e-8));
        assert!(!Comparison::Absolute.passes(f64::NAN, 0.0, 1.0));
    }

    #[test]
    fn json_and_csv_share_columns() {
        let mut r = Report::new(false);
        r.push(Check::absolute("a", 1.0, 1.0, RefSource::ClosedForm, 1e-12).quad_error(1e-14), Instant::now());
        r.push(Check::at_least("b", -1.0, 0.0, RefSource::Fixture, 1e-8), Instant::now());
        assert!(!r.all_pass());
        let json = r.to_json().unwrap();
        assert!(json.contains("\"ref_source\": \"closed-form\"") && json.contains("\"seconds\": null"));
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().next().unwrap(), "check_id,value,reference,ref_source,tol,pass,quad_error,seconds");
        assert_eq!(r.failures().count(), 1);
        assert!(r.failures().next().unwrap().to_string().starts_with("[FAIL] b (>=)"));
    }
}
