use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::Suite;
use crate::bound::BoundCheck;
use crate::{Error, Result};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Inputs, computed quantities and bound checks of one suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub suite: Suite,
    pub inputs: BTreeMap<String, Value>,
    pub quantities: BTreeMap<String, Value>,
    pub checks: Vec<BoundCheck>,
    /// Module errors; a failing computation does not stop the other suites.
    pub errors: Vec<String>,
    pub notes: Vec<String>,
}

impl SuiteRecord {
    pub fn new(suite: Suite) -> Self {
        SuiteRecord {
            suite,
            inputs: BTreeMap::new(),
            quantities: BTreeMap::new(),
            checks: Vec::new(),
            errors: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn quantity(&mut self, key: &str, value: impl Serialize) {
        self.quantities.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn check(&mut self, c: BoundCheck) {
        self.checks.push(c);
    }

    pub fn error(&mut self, context: &str, e: impl std::fmt::Display) {
        self.errors.push(format!("{context}: {e}"));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub surface: String,
    pub alpha: f64,
    pub seed: u64,
    pub suites: Vec<SuiteRecord>,
    /// Approximations every result in this report rests on.
    pub approximations: Vec<String>,
    pub all_satisfied: bool,
}

impl Report {
    pub fn new(surface: String, alpha: f64, seed: u64, suites: Vec<SuiteRecord>, approximations: Vec<String>) -> Self {
        let all_satisfied = suites.iter().all(SuiteRecord::satisfied);
        Report { schema_version: SCHEMA_VERSION, surface, alpha, seed, suites, approximations, all_satisfied }
    }

    pub fn failed_checks(&self) -> Vec<(Suite, &BoundCheck)> {
        self.suites.iter().flat_map(|s| s.checks.iter().filter(|c| !c.satisfied).map(move |c| (s.suite, c))).collect()
    }

    pub fn suite(&self, suite: Suite) -> Option<&SuiteRecord> {
        self.suites.iter().find(|s| s.suite == suite)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// Parses a report, rejecting other schema versions.
    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Json(format!("unsupported schema version {}", r.schema_version)));
        }
        Ok(r)
    }

    /// One row per check: `suite,name,lhs,rhs,relation,tolerance,abs_slack,satisfied`.
    pub fn checks_csv(&self) -> String {
        let mut s = String::from("suite,name,lhs,rhs,relation,tolerance,abs_slack,satisfied\n");
        for rec in &self.suites {
            for c in &rec.checks {
                s.push_str(&format!(
                    "{},{},{},{},{:?},{},{},{}\n",
                    rec.suite, c.name, c.lhs, c.rhs, c.relation, c.tolerance, c.abs_slack, c.satisfied
                ));
            }
        }
        s
    }
}

/// One differing number between two reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffEntry {
    pub suite: Suite,
    pub path: String,
    pub a: f64,
    pub b: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportDiff {
    pub entries: Vec<DiffEntry>,
    pub max_relative: f64,
}

impl ReportDiff {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn numbers(prefix: &str, v: &Value, out: &mut BTreeMap<String, f64>) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                out.insert(prefix.to_string(), x);
            }
        }
        Value::Array(items) => {
            for (k, item) in items.iter().enumerate() {
                numbers(&format!("{prefix}[{k}]"), item, out);
            }
        }
        Value::Object(map) => {
            for (k, item) in map {
                numbers(&format!("{prefix}.{k}"), item, out);
            }
        }
        _ => {}
    }
}

fn record_numbers(rec: &SuiteRecord) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (k, v) in &rec.quantities {
        numbers(k, v, &mut out);
    }
    for c in &rec.checks {
        out.insert(format!("check.{}.lhs", c.name), c.lhs);
        out.insert(format!("check.{}.rhs", c.name), c.rhs);
    }
    out
}

/// Relative differences of every quantity and check side present in both reports.
pub fn compare_reports(a: &Report, b: &Report) -> Result<ReportDiff> {
    if a.surface != b.surface {
        return Err(Error::MismatchedReports(format!("surfaces {} and {}", a.surface, b.surface)));
    }
    let suites_a: Vec<Suite> = a.suites.iter().map(|s| s.suite).collect();
    let suites_b: Vec<Suite> = b.suites.iter().map(|s| s.suite).collect();
    if suites_a != suites_b {
        return Err(Error::MismatchedReports(format!("suites {suites_a:?} and {suites_b:?}")));
    }
    let mut diff = ReportDiff::default();
    for (ra, rb) in a.suites.iter().zip(&b.suites) {
        let (na, nb) = (record_numbers(ra), record_numbers(rb));
        for (path, &x) in &na {
            let Some(&y) = nb.get(path) else { continue };
            if x == y || (x.is_nan() && y.is_nan()) {
                continue;
            }
            let scale = x.abs().max(y.abs());
            let relative = if scale > 0.0 { (x - y).abs() / scale } else { 0.0 };
            diff.max_relative = diff.max_relative.max(relative);
            diff.entries.push(DiffEntry { suite: ra.suite, path: path.clone(), a: x, b: y, relative });
        }
    }
    Ok(diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::Relation;

    fn sample(v2: f64) -> Report {
        let mut rec = SuiteRecord::new(Suite::ProjectiveVolume);
        rec.input("radius", 1000.0);
        rec.quantity("v2", v2);
        rec.quantity("slopes", vec![1.0, 2.0]);
        rec.check(BoundCheck::new("agree", v2, 2.0, Relation::Approx, 0.05));
        Report::new("catenoid".into(), 2.0, 0, vec![rec], vec![])
    }

    #[test]
    fn json_round_trip_and_identity() {
        let r = sample(2.01);
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(compare_reports(&r, &back).unwrap().is_empty());
    }

    #[test]
    fn differences_and_mismatch() {
        let d = compare_reports(&sample(2.0), &sample(2.02)).unwrap();
        assert_eq!(d.entries.len(), 2);
        assert!((d.max_relative - 0.02 / 2.02).abs() < 1e-12);
        let mut other = sample(2.0);
        other.surface = "plane".into();
        assert!(matches!(compare_reports(&sample(2.0), &other), Err(Error::MismatchedReports(_))));
    }

    #[test]
    fn non_finite_values_survive() {
        let mut r = sample(2.0);
        r.suites[0].checks.push(BoundCheck::new("inf", f64::INFINITY, 1.0, Relation::Le, 0.0));
        let r = Report::new(r.surface, r.alpha, r.seed, r.suites, r.approximations);
        let back = Report::from_json(&r.to_json()).unwrap();
        assert!(back.suites[0].checks[1].lhs.is_nan());
        assert!(!back.all_satisfied);
    }
}
