//! Check records and the JSON report. Records are sorted by name before
//! serialization so report assembly is order-independent; identical seeds
//! and configs produce byte-identical reports apart from the trailing
//! wall-time field.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub provenance: String,
}

/// A record passing iff residual <= tol (and finite).
pub fn record(name: &str, residual: f64, tol: f64, provenance: &str) -> CheckRecord {
    CheckRecord {
        name: name.to_string(),
        residual,
        tol,
        pass: residual.is_finite() && residual <= tol,
        provenance: provenance.to_string(),
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn new(suite: &str, seed: u64, mut checks: Vec<CheckRecord>, wall_time_ms: f64) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let pass = checks.iter().all(|c| c.pass);
        Self { suite: suite.to_string(), seed, checks, pass, wall_time_ms }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the wall-time line removed, for byte-identity comparisons.
    pub fn to_json_without_walltime(&self) -> String {
        strip_walltime(&self.to_json())
    }
}

/// Drop the wall_time_ms line from a rendered report.
pub fn strip_walltime(json: &str) -> String {
    json.lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_time_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_sorted_and_pass_aggregated() {
        let r = Report::new(
            "demo",
            1,
            vec![record("b_check", 0.5, 1.0, "x"), record("a_check", 2.0, 1.0, "y")],
            12.0,
        );
        assert_eq!(r.checks[0].name, "a_check");
        assert!(!r.pass);
        let stripped = r.to_json_without_walltime();
        assert!(!stripped.contains("wall_time_ms"));
        assert!(stripped.contains("\"suite\": \"demo\""));
    }

    #[test]
    fn nan_residual_fails() {
        assert!(!record("x", f64::NAN, 1.0, "p").pass);
    }
}
