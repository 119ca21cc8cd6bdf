//! Report documents. Field order is fixed by the struct layout and every
//! real number is written with 17 significant digits, so identical runs
//! produce identical bytes.

use serde::ser::{Error as _, SerializeMap};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use super::document::{InstanceDocument, Kind};
use crate::certify::{CertificateReport, CheckOutcome, Violation};
use crate::model::{Element, ProblemInstance};
use crate::solve::{SolveResult, StartOutcome, UniquenessReport};

/// How the solver decides that a point is the fixed point.
pub const ACCEPTANCE_RULE: &str =
    "interval: p(x_(n+1), x_n), p(x_n, x_n) and p(x_n, f x_n) all within tol; finite: x_(n+1) = x_n";

/// Rows kept at each end of the trace.
pub const TRACE_EDGE_ROWS: usize = 10;

pub fn format_num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format_num(self.0)).map_err(S::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_str(&self.0.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point(pub Element);

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Element::Index(i) => s.serialize_u64(i as u64),
            Element::Scalar(v) => Num(v).serialize(s),
        }
    }
}

/// Ordered key/value pairs written as a JSON object.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Values(pub Vec<(String, f64)>);

impl Serialize for Values {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, &Num(*v))?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceEcho {
    pub label: String,
    pub kind: Kind,
    pub seed: u64,
    pub samples: usize,
    pub tol: Num,
    pub max_iter: usize,
}

impl InstanceEcho {
    pub fn new(instance: &ProblemInstance) -> Self {
        Self {
            label: instance.label.clone(),
            kind: InstanceDocument::from_instance(instance).kind,
            seed: instance.seed,
            samples: instance.sample_count,
            tol: Num(instance.tol),
            max_iter: instance.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationSection {
    pub check: String,
    pub witness: Vec<Point>,
    pub values: Values,
    pub message: String,
}

impl From<&Violation> for ViolationSection {
    fn from(v: &Violation) -> Self {
        Self {
            check: v.check.clone(),
            witness: v.witness.iter().copied().map(Point).collect(),
            values: Values(v.values.clone()),
            message: v.message.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSection {
    pub name: String,
    pub role: &'static str,
    pub status: &'static str,
    pub coverage: &'static str,
    pub samples_used: usize,
    pub skipped: usize,
    pub violation_count: usize,
    pub details: Values,
    pub notes: Vec<String>,
    pub violations: Vec<ViolationSection>,
}

impl From<&CheckOutcome> for CheckSection {
    fn from(c: &CheckOutcome) -> Self {
        Self {
            name: c.name.clone(),
            role: c.role.as_str(),
            status: c.status.as_str(),
            coverage: c.coverage.as_str(),
            samples_used: c.cases,
            skipped: c.skipped,
            violation_count: c.violation_count,
            details: Values(c.details.clone()),
            notes: c.notes.clone(),
            violations: c.violations.iter().map(ViolationSection::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateSection {
    pub hypotheses_hold: bool,
    pub all_pass: bool,
    pub checks: Vec<CheckSection>,
    pub notes: Vec<String>,
}

impl From<&CertificateReport> for CertificateSection {
    fn from(r: &CertificateReport) -> Self {
        Self {
            hypotheses_hold: r.hypotheses_hold(),
            all_pass: r.all_pass(),
            checks: r.checks.iter().map(CheckSection::from).collect(),
            notes: r.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub x: Point,
    /// `p(x_{n+1}, x_n)`, absent for the last point.
    pub rho: Option<Num>,
    pub self_distance: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSection {
    pub points: usize,
    pub omitted: usize,
    pub rows: Vec<TraceRow>,
}

impl TraceSection {
    pub fn new(res: &SolveResult) -> Self {
        let t = &res.trace;
        let total = t.points.len();
        let row = |n: usize| TraceRow {
            n,
            x: Point(t.points[n]),
            rho: t.rho.get(n).copied().map(Num),
            self_distance: Num(t.self_dists[n]),
        };
        let rows: Vec<TraceRow> = if total <= 2 * TRACE_EDGE_ROWS {
            (0..total).map(row).collect()
        } else {
            (0..TRACE_EDGE_ROWS)
                .chain(total - TRACE_EDGE_ROWS..total)
                .map(row)
                .collect()
        };
        Self {
            points: total,
            omitted: total - rows.len(),
            rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartSection {
    pub start: Point,
    pub fixed_point: Option<Point>,
    pub status: Option<&'static str>,
    pub note: Option<String>,
}

impl From<&StartOutcome> for StartSection {
    fn from(s: &StartOutcome) -> Self {
        Self {
            start: Point(s.start),
            fixed_point: s.fixed_point.map(Point),
            status: s.status.map(|st| st.as_str()),
            note: s.note.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessSection {
    pub check: CheckSection,
    pub starts: Vec<StartSection>,
}

impl From<&UniquenessReport> for UniquenessSection {
    fn from(u: &UniquenessReport) -> Self {
        Self {
            check: CheckSection::from(&u.check),
            starts: u.starts.iter().map(StartSection::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSection {
    pub status: &'static str,
    pub acceptance: &'static str,
    pub iterations: usize,
    pub u: Option<Point>,
    pub candidate: Point,
    pub residual: Num,
    pub self_distance: Num,
    pub descent_flag: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceSection>,
    pub diagnostics: Vec<CheckSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessSection>,
}

impl SolveSection {
    pub fn new(
        res: &SolveResult,
        diagnostics: &[CheckOutcome],
        uniqueness: Option<&UniquenessReport>,
        quiet: bool,
    ) -> Self {
        Self {
            status: res.trace.status.as_str(),
            acceptance: ACCEPTANCE_RULE,
            iterations: res.trace.iterations_used,
            u: res.fixed_point.map(Point),
            candidate: Point(res.candidate()),
            residual: Num(res.residual),
            self_distance: Num(res.self_distance_at_u),
            descent_flag: res.descent_flag,
            trace: (!quiet).then(|| TraceSection::new(res)),
            diagnostics: diagnostics.iter().map(CheckSection::from).collect(),
            uniqueness: uniqueness.map(UniquenessSection::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GallerySection {
    pub name: String,
    pub notes: String,
    pub expected: Option<Point>,
    pub matched: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub command: &'static str,
    pub instance: InstanceEcho,
    pub certificate: CertificateSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gallery: Option<GallerySection>,
    pub verdict: String,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_significant_digits() {
        assert_eq!(format_num(0.5f64.powi(30)), "9.3132257461547852e-10");
        assert_eq!(format_num(0.0), "0.0000000000000000e0");
        assert_eq!(format_num(1000.0), "1.0000000000000000e3");
        for v in [0.1, 1.0 / 3.0, 123.4, 1e-300, f64::MAX] {
            assert_eq!(format_num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn numbers_serialize_verbatim() {
        let v = Values(vec![("b".into(), 0.25), ("a".into(), f64::INFINITY)]);
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"b":2.5000000000000000e-1,"a":"inf"}"#
        );
        let p = [Point(Element::Index(3)), Point(Element::Scalar(-2.0))];
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            "[3,-2.0000000000000000e0]"
        );
    }
}
