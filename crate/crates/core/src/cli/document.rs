//! The JSON instance file format.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expr;
use crate::model::{
    Carrier, ControlFunction, Element, MapKind, ModelError, OrderKind, PartialMetricSpace,
    PartialOrder, ProblemInstance, Relation, SelfMap, DEFAULT_EPS_AX, DEFAULT_GROWTH_BOUND,
    DEFAULT_GROWTH_THRESHOLD, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_CONFINEMENT_EPS: f64 = 0.1;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("field `{field}`: {message}")]
    Field {
        field: &'static str,
        message: String,
    },
}

fn field(field: &'static str, message: impl ToString) -> DocumentError {
    DocumentError::Field {
        field,
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Finite,
    Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderSpec {
    pub lhs: String,
    pub rel: Relation,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_table: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_table: Option<Vec<Vec<bool>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_table: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_growth_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_growth_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub banach_c: Option<f64>,
    pub x0: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eps_ax")]
    pub eps_ax: f64,
    #[serde(default = "default_confinement_eps")]
    pub confinement_eps: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_eps_ax() -> f64 {
    DEFAULT_EPS_AX
}
fn default_confinement_eps() -> f64 {
    DEFAULT_CONFINEMENT_EPS
}

fn parse_expr(name: &'static str, text: &Option<String>) -> Result<Expr, DocumentError> {
    let text = text.as_deref().ok_or_else(|| field(name, "missing"))?;
    Expr::parse(text).map_err(|e| field(name, e))
}

fn forbid<T>(name: &'static str, value: &Option<T>, kind: &str) -> Result<(), DocumentError> {
    match value {
        Some(_) => Err(field(name, format!("not allowed for kind {kind}"))),
        None => Ok(()),
    }
}

/// Parses a start value: an index for finite carriers, a number otherwise.
pub fn element_from_number(space: &PartialMetricSpace, v: f64) -> Result<Element, ModelError> {
    let e = if space.is_finite() {
        if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
            return Err(ModelError::KindMismatch);
        }
        Element::Index(v as usize)
    } else {
        Element::Scalar(v)
    };
    space.ensure(&e)?;
    Ok(e)
}

impl InstanceDocument {
    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    /// Builds and validates the problem instance.
    pub fn to_instance(&self) -> Result<ProblemInstance, DocumentError> {
        let (space, order, map) = match self.kind {
            Kind::Finite => {
                for (name, present) in [
                    ("domain", self.domain.is_some()),
                    ("p_expr", self.p_expr.is_some()),
                    ("order", self.order.is_some()),
                    ("f_expr", self.f_expr.is_some()),
                ] {
                    if present {
                        return Err(field(name, "not allowed for kind finite"));
                    }
                }
                let table = self
                    .p_table
                    .clone()
                    .ok_or_else(|| field("p_table", "missing"))?;
                let space = PartialMetricSpace::finite(table, self.label.clone())
                    .map_err(|e| field("p_table", e))?;
                let order_table = self
                    .order_table
                    .clone()
                    .ok_or_else(|| field("order_table", "missing"))?;
                let n = space.size().unwrap_or(0);
                if order_table.len() != n || order_table.iter().any(|r| r.len() != n) {
                    return Err(field(
                        "order_table",
                        format!("expected a {n}x{n} boolean matrix"),
                    ));
                }
                let order = PartialOrder::finite(order_table, "order table")
                    .map_err(|e| field("order_table", e))?;
                let map_table = self
                    .map_table
                    .clone()
                    .ok_or_else(|| field("map_table", "missing"))?;
                if map_table.len() != n {
                    return Err(field(
                        "map_table",
                        format!("expected {n} entries, got {}", map_table.len()),
                    ));
                }
                let map =
                    SelfMap::finite(map_table, "map table").map_err(|e| field("map_table", e))?;
                (space, order, map)
            }
            Kind::Interval => {
                forbid("p_table", &self.p_table, "interval")?;
                forbid("order_table", &self.order_table, "interval")?;
                forbid("map_table", &self.map_table, "interval")?;
                let domain = self
                    .domain
                    .as_ref()
                    .ok_or_else(|| field("domain", "missing"))?;
                let p = parse_expr("p_expr", &self.p_expr)?;
                let space =
                    PartialMetricSpace::interval(domain.min, domain.max, p, self.label.clone())
                        .map_err(|e| match e {
                            ModelError::BadInterval { .. } => field("domain", e),
                            other => field("p_expr", other),
                        })?;
                let spec = self
                    .order
                    .as_ref()
                    .ok_or_else(|| field("order", "missing"))?;
                let lhs =
                    Expr::parse(&spec.lhs).map_err(|e| field("order", format!("lhs: {e}")))?;
                let rhs =
                    Expr::parse(&spec.rhs).map_err(|e| field("order", format!("rhs: {e}")))?;
                let label = format!("{} {} {}", spec.lhs, spec.rel.as_str(), spec.rhs);
                let order = PartialOrder::predicate(lhs, spec.rel, rhs, label)
                    .map_err(|e| field("order", e))?;
                let f = parse_expr("f_expr", &self.f_expr)?;
                let map = SelfMap::scalar(f, "f_expr").map_err(|e| field("f_expr", e))?;
                (space, order, map)
            }
        };

        let psi = match &self.psi_expr {
            None => {
                forbid(
                    "psi_growth_bound",
                    &self.psi_growth_bound,
                    "a document without psi_expr",
                )?;
                forbid(
                    "psi_growth_threshold",
                    &self.psi_growth_threshold,
                    "a document without psi_expr",
                )?;
                None
            }
            Some(_) => {
                let e = parse_expr("psi_expr", &self.psi_expr)?;
                let bound = self.psi_growth_bound.unwrap_or(DEFAULT_GROWTH_BOUND);
                let threshold = self
                    .psi_growth_threshold
                    .unwrap_or(DEFAULT_GROWTH_THRESHOLD);
                Some(
                    ControlFunction::with_growth(e, bound, threshold)
                        .map_err(|e| field("psi_expr", e))?,
                )
            }
        };
        if psi.is_none() && self.banach_c.is_none() {
            return Err(field("psi_expr", "one of psi_expr or banach_c is required"));
        }
        let x0 = element_from_number(&space, self.x0).map_err(|e| field("x0", e))?;
        let instance = ProblemInstance {
            label: self.label.clone(),
            space,
            order,
            map,
            psi,
            banach_c: self.banach_c,
            x0,
            tol: self.tol,
            max_iter: self.max_iter,
            sample_count: self.samples,
            seed: self.seed,
            eps_ax: self.eps_ax,
            confinement_eps: self.confinement_eps,
        };
        instance.validate().map_err(|e| {
            let name = match &e {
                ModelError::BadBanachConstant(_) => "banach_c",
                ModelError::NonPositive("tol") => "tol",
                ModelError::NonPositive("max_iter") => "max_iter",
                ModelError::NonPositive("samples") => "samples",
                ModelError::NonPositive("eps_ax") => "eps_ax",
                ModelError::NonPositive("confinement_eps") => "confinement_eps",
                ModelError::OutsideCarrier(_) => "x0",
                _ => "kind",
            };
            field(name, e)
        })?;
        Ok(instance)
    }

    /// The document describing `instance`.
    pub fn from_instance(instance: &ProblemInstance) -> Self {
        let mut doc = InstanceDocument {
            kind: Kind::Interval,
            label: instance.label.clone(),
            p_table: None,
            order_table: None,
            map_table: None,
            domain: None,
            p_expr: None,
            order: None,
            f_expr: None,
            psi_expr: None,
            psi_growth_bound: None,
            psi_growth_threshold: None,
            banach_c: instance.banach_c,
            x0: match instance.x0 {
                Element::Index(i) => i as f64,
                Element::Scalar(v) => v,
            },
            tol: instance.tol,
            max_iter: instance.max_iter,
            samples: instance.sample_count,
            seed: instance.seed,
            eps_ax: instance.eps_ax,
            confinement_eps: instance.confinement_eps,
        };
        match instance.space.carrier() {
            Carrier::Finite { table } => {
                doc.kind = Kind::Finite;
                doc.p_table = Some(table.clone());
            }
            Carrier::Interval { lower, upper, p } => {
                doc.domain = Some(Domain {
                    min: *lower,
                    max: *upper,
                });
                doc.p_expr = Some(p.to_string());
            }
        }
        match instance.order.kind() {
            OrderKind::Finite(t) => doc.order_table = Some(t.clone()),
            OrderKind::Predicate { lhs, rel, rhs } => {
                doc.order = Some(OrderSpec {
                    lhs: lhs.to_string(),
                    rel: *rel,
                    rhs: rhs.to_string(),
                })
            }
        }
        match instance.map.kind() {
            MapKind::Finite(t) => doc.map_table = Some(t.clone()),
            MapKind::Scalar(e) => doc.f_expr = Some(e.to_string()),
        }
        if let Some(psi) = &instance.psi {
            doc.psi_expr = Some(psi.expr().to_string());
            if psi.growth_bound() != DEFAULT_GROWTH_BOUND {
                doc.psi_growth_bound = Some(psi.growth_bound());
            }
            if psi.growth_threshold() != DEFAULT_GROWTH_THRESHOLD {
                doc.psi_growth_threshold = Some(psi.growth_threshold());
            }
        }
        doc
    }
}

/// Reads, parses and validates an instance file.
pub fn load_instance(path: &Path) -> Result<ProblemInstance, DocumentError> {
    let text = std::fs::read_to_string(path).map_err(|source| DocumentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    InstanceDocument::from_json(&text)?.to_instance()
}
