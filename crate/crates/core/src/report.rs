//! Shared report type for every bound check, with its JSON and CSV forms.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

/// One measured-versus-bound comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub inputs: BTreeMap<String, f64>,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Case {
    pub fn new(inputs: &[(&str, f64)], measured: f64, bound: f64) -> Self {
        let ratio = if bound > 0.0 {
            measured / bound
        } else if measured == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Case {
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            measured,
            bound,
            ratio,
            label: None,
        }
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

/// Structured outcome of one check.
///
/// `pass` holds iff the fitted constant is finite, every ratio is within
/// `fitted_constant * (1 + ratio_tolerance)` and no extra requirement failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub config_hash: String,
    pub cases: Vec<Case>,
    pub fitted_constant: f64,
    pub pass: bool,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

impl EstimateReport {
    /// Builds a report whose fitted constant is the largest observed ratio.
    pub fn fitted(name: impl Into<String>, cases: Vec<Case>) -> Self {
        let fitted = cases.iter().map(|c| c.ratio).fold(0.0_f64, |a, r| {
            if r.is_nan() || a.is_nan() {
                f64::NAN
            } else {
                a.max(r)
            }
        });
        Self::with_constant(name, cases, fitted)
    }

    /// Builds a report against a prescribed constant.
    pub fn with_constant(name: impl Into<String>, cases: Vec<Case>, constant: f64) -> Self {
        let mut report = EstimateReport {
            name: name.into(),
            config_hash: String::new(),
            cases,
            fitted_constant: constant,
            pass: true,
            tolerances: BTreeMap::new(),
            diagnostics: Vec::new(),
        };
        report.tolerances.insert("ratio".into(), 0.0);
        report.reevaluate();
        report
    }

    pub fn tolerance(mut self, key: &str, value: f64) -> Self {
        self.tolerances.insert(key.to_string(), value);
        self.reevaluate();
        self
    }

    /// Records an extra requirement; a failed one flips `pass` to false.
    pub fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.diagnostics.push(format!("failed: {}", what.into()));
            self.pass = false;
        }
    }

    pub fn note(&mut self, what: impl Into<String>) {
        self.diagnostics.push(what.into());
    }

    pub fn max_ratio(&self) -> f64 {
        self.cases.iter().map(|c| c.ratio).fold(0.0, f64::max)
    }

    fn reevaluate(&mut self) {
        let tol = self.tolerances.get("ratio").copied().unwrap_or(0.0);
        let limit = self.fitted_constant * (1.0 + tol);
        let ratios_ok = self.fitted_constant.is_finite()
            && self.cases.iter().all(|c| c.ratio.is_finite() && c.ratio <= limit);
        let extra_ok = !self.diagnostics.iter().any(|d| d.starts_with("failed:"));
        self.pass = ratios_ok && extra_ok;
    }

    /// Canonical JSON: UTF-8 with object keys sorted.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
        out.push('\n');
        out
    }

    /// CSV with one row per case; input columns are the sorted union of input keys.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut keys: Vec<&String> = self.cases.iter().flat_map(|c| c.inputs.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut header: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
        header.extend(["measured", "bound", "ratio", "label"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for c in &self.cases {
            let mut row: Vec<String> = keys
                .iter()
                .map(|k| c.inputs.get(*k).map(|v| fmt_num(*v)).unwrap_or_default())
                .collect();
            row.push(fmt_num(c.measured));
            row.push(fmt_num(c.bound));
            row.push(fmt_num(c.ratio));
            row.push(c.label.clone().unwrap_or_default());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Shortest round-trip representation, stable across platforms.
pub fn fmt_num(v: f64) -> String {
    format!("{v:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_constant_is_max_ratio() {
        let cases = vec![Case::new(&[("j", 1.0)], 1.0, 2.0), Case::new(&[("j", 2.0)], 3.0, 2.0)];
        let r = EstimateReport::fitted("demo", cases);
        assert_eq!(r.fitted_constant, 1.5);
        assert!(r.pass);
    }

    #[test]
    fn nan_ratio_fails() {
        let r = EstimateReport::fitted("demo", vec![Case::new(&[], f64::NAN, 1.0)]);
        assert!(!r.pass);
    }

    #[test]
    fn prescribed_constant_can_fail() {
        let r = EstimateReport::with_constant("demo", vec![Case::new(&[], 2.0, 1.0)], 1.0);
        assert!(!r.pass);
        let r = r.tolerance("ratio", 1.5);
        assert!(r.pass);
    }

    #[test]
    fn json_keys_sorted() {
        let r = EstimateReport::fitted("demo", vec![Case::new(&[("z", 1.0), ("a", 2.0)], 1.0, 1.0)]);
        let json = r.to_json();
        let cases = json.find("\"cases\"").unwrap();
        let name = json.find("\"name\"").unwrap();
        let config = json.find("\"config_hash\"").unwrap();
        assert!(cases < config && config < name);
        assert!(json.find("\"a\"").unwrap() < json.find("\"z\"").unwrap());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = EstimateReport::fitted("demo", vec![Case::new(&[("j", 1.0)], 0.5, 1.0)]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "j,measured,bound,ratio,label");
        assert_eq!(lines.next().unwrap(), "1e0,5e-1,1e0,5e-1,");
    }
}
