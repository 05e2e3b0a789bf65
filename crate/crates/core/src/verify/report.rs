use std::fmt::Write as _;

use super::stats::{ComparisonResult, Verdict};

/// A set of comparison rows with free-form header fields and notes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub fields: Vec<(String, String)>,
    pub rows: Vec<ComparisonResult>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            ..Self::default()
        }
    }

    pub fn field(&mut self, key: impl Into<String>, value: impl ToString) {
        self.fields.push((key.into(), value.to_string()));
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = ComparisonResult>) {
        self.rows.extend(rows);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.rows.iter().filter(|r| r.verdict == verdict).count()
    }

    pub fn any_failed(&self) -> bool {
        self.count(Verdict::Fail) > 0
    }

    /// Human-readable report: header fields, one line per row, notes, tally.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.title);
        for (k, v) in &self.fields {
            let _ = writeln!(out, "{k} {v}");
        }
        for r in &self.rows {
            let _ = writeln!(
                out,
                "[{}] {}: observed {:.6e} ± {:.2e} (n={}), oracle {:.6e}, z {:.3}, halfwidth {:.2e}",
                r.verdict,
                r.name,
                r.observed.mean,
                r.observed.std_error,
                r.observed.replicas,
                r.expected,
                r.z_score,
                r.truncation_halfwidth
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let _ = writeln!(
            out,
            "summary pass={} inconclusive={} fail={}",
            self.count(Verdict::Pass),
            self.count(Verdict::Inconclusive),
            self.count(Verdict::Fail)
        );
        out
    }

    /// Machine-readable table, one row per check.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,observed,se,oracle,z,halfwidth,verdict\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.name.replace(',', ";"),
                r.observed.mean,
                r.observed.std_error,
                r.expected,
                r.z_score,
                r.truncation_halfwidth,
                r.verdict
            );
        }
        out
    }
}
