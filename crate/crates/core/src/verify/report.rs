use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;

/// Worst slack observed for one family of inequalities.
///
/// Margins are signed: a check passes iff `worst_margin ≥ −tolerance`. An empty check
/// has margin `+∞` and passes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    #[serde(
        serialize_with = "finite_or_null",
        deserialize_with = "null_as_infinity"
    )]
    pub worst_margin: f64,
    pub tolerance: f64,
    pub count: usize,
    pub location: Option<String>,
    pub passed: bool,
}

fn finite_or_null<S: Serializer>(x: &f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        ser.serialize_some(x)
    } else {
        ser.serialize_none()
    }
}

fn null_as_infinity<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(de)?.unwrap_or(f64::INFINITY))
}

impl CheckResult {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            worst_margin: f64::INFINITY,
            tolerance,
            count: 0,
            location: None,
            passed: true,
        }
    }

    /// Records one margin. The location is rendered only when it becomes the new worst,
    /// and ties keep the earlier location, so sequential folds are deterministic.
    pub fn observe(&mut self, margin: f64, location: impl FnOnce() -> String) {
        self.count += 1;
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
            self.location = Some(location());
        }
        self.passed = self.worst_margin >= -self.tolerance;
    }

    /// Folds `other` into `self`; on ties the existing location wins.
    pub fn absorb(&mut self, other: &CheckResult) {
        self.count += other.count;
        if other.worst_margin < self.worst_margin {
            self.worst_margin = other.worst_margin;
            self.location = other.location.clone();
        }
        self.tolerance = self.tolerance.max(other.tolerance);
        self.passed = self.worst_margin >= -self.tolerance;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub grid: serde_json::Value,
    pub checks: Vec<CheckResult>,
    /// Largest truncation tail mass that entered any margin.
    pub tail_bound: f64,
    pub runtime_secs: f64,
    pub passed: bool,
}

impl VerificationReport {
    pub(crate) fn finish(
        suite: &str,
        grid: serde_json::Value,
        checks: Vec<CheckResult>,
        tail_bound: f64,
        start: Instant,
    ) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        VerificationReport {
            suite: suite.to_string(),
            grid,
            checks,
            tail_bound,
            runtime_secs: start.elapsed().as_secs_f64(),
            passed,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn worst_margin(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.worst_margin)
            .fold(f64::INFINITY, f64::min)
    }

    /// Re-judges every check against `tol`.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        for c in &mut self.checks {
            c.tolerance = tol;
            c.passed = c.worst_margin >= -tol;
        }
        self.passed = self.checks.iter().all(|c| c.passed);
        self
    }

    /// Merges checks of the same name from `other` and appends the rest.
    pub fn absorb(&mut self, other: &VerificationReport) {
        for c in &other.checks {
            match self.checks.iter_mut().find(|x| x.name == c.name) {
                Some(x) => x.absorb(c),
                None => self.checks.push(c.clone()),
            }
        }
        self.tail_bound = self.tail_bound.max(other.tail_bound);
        self.runtime_secs += other.runtime_secs;
        self.passed = self.checks.iter().all(|c| c.passed);
    }

    /// One row per check: `suite,check,worst_margin,tolerance,count,passed,location`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "suite",
            "check",
            "worst_margin",
            "tolerance",
            "count",
            "passed",
            "location",
        ])
        .map_err(csv_error)?;
        for c in &self.checks {
            w.write_record([
                self.suite.as_str(),
                c.name.as_str(),
                &format!("{:e}", c.worst_margin),
                &format!("{:e}", c.tolerance),
                &c.count.to_string(),
                &c.passed.to_string(),
                c.location.as_deref().unwrap_or(""),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Human-readable multi-line summary.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{}: {} (tail bound {:e}, {:.3} s)\n",
            self.suite,
            if self.passed { "PASS" } else { "FAIL" },
            self.tail_bound,
            self.runtime_secs
        );
        for c in &self.checks {
            out.push_str(&format!(
                "  {:<32} worst {:>12.4e}  tol {:.0e}  n={:<7} {}{}\n",
                c.name,
                c.worst_margin,
                c.tolerance,
                c.count,
                if c.passed { "ok" } else { "FAIL" },
                c.location
                    .as_ref()
                    .map(|l| format!("  at {l}"))
                    .unwrap_or_default()
            ));
        }
        out
    }
}

fn csv_error(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observe_keeps_first_worst() {
        let mut c = CheckResult::new("x", 1e-10);
        c.observe(0.5, || "a".into());
        c.observe(-1e-11, || "b".into());
        c.observe(-1e-11, || "c".into());
        assert_eq!(c.count, 3);
        assert_eq!(c.location.as_deref(), Some("b"));
        assert!(c.passed);
        c.observe(-1e-9, || "d".into());
        assert!(!c.passed);
    }

    #[test]
    fn json_round_trip_with_empty_check() {
        let start = Instant::now();
        let r = VerificationReport::finish(
            "t",
            serde_json::json!({"eta": 0.5}),
            vec![CheckResult::new("empty", 1e-10)],
            0.0,
            start,
        );
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"worst_margin\":null"));
        let back: VerificationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let mut a = CheckResult::new("a", 1e-10);
        a.observe(1.0, || "p".into());
        let r = VerificationReport::finish(
            "s",
            serde_json::Value::Null,
            vec![a, CheckResult::new("b", 1.0)],
            0.0,
            Instant::now(),
        );
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
