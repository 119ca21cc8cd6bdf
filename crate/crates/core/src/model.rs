//! Ordered partial metric spaces, self-maps, control functions and the
//! problem instances that bundle them.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Env, Expr, ExprError, Var};

pub const DEFAULT_EPS_AX: f64 = 1e-9;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
pub const DEFAULT_UPPER: f64 = 1e3;
pub const DEFAULT_GROWTH_BOUND: f64 = 1e6;
pub const DEFAULT_GROWTH_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("element {0} is outside the carrier")]
    OutsideCarrier(Element),
    #[error("{0}")]
    Expr(#[from] ExprError),
    #[error("distance table is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("distance table is empty")]
    Empty,
    #[error("distance p({i},{j}) = {value} is negative or not finite")]
    BadDistance { i: usize, j: usize, value: f64 },
    #[error("distance table is not symmetric at ({i},{j})")]
    Asymmetric { i: usize, j: usize },
    #[error("self-distance exceeds cross distance at ({i},{j}): p({i},{i}) > p({i},{j})")]
    SelfDistanceExceeds { i: usize, j: usize },
    #[error("order table is not reflexive at {0}")]
    NotReflexive(usize),
    #[error("{what} table has size {got}, carrier has {expected}")]
    SizeMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("map table sends {from} to {to}, outside 0..{n}")]
    MapOutOfRange { from: usize, to: usize, n: usize },
    #[error("interval [{lower}, {upper}] is invalid")]
    BadInterval { lower: f64, upper: f64 },
    #[error("{what} uses variable `{var}`, which is not allowed there")]
    ForbiddenVariable { what: &'static str, var: Var },
    #[error("control function has psi(0) = {0}, expected 0")]
    PsiNotZeroAtZero(f64),
    #[error("contraction constant c = {0} is outside [0, 1)")]
    BadBanachConstant(f64),
    #[error("instance needs a control function, a contraction constant, or both")]
    MissingContraction,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("element kind does not match the carrier")]
    KindMismatch,
}

/// A point of the carrier: an index into a finite table or a real number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    Index(usize),
    Scalar(f64),
}

impl Element {
    pub fn as_index(&self) -> Option<usize> {
        match self {
            Element::Index(i) => Some(*i),
            Element::Scalar(_) => None,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Element::Scalar(v) => Some(*v),
            Element::Index(_) => None,
        }
    }

    /// Numeric identity rule: equal indices, or scalars within `eps`.
    pub fn same(&self, other: &Element, eps: f64) -> bool {
        match (self, other) {
            (Element::Index(a), Element::Index(b)) => a == b,
            (Element::Scalar(a), Element::Scalar(b)) => (a - b).abs() <= eps,
            _ => false,
        }
    }

    /// Exact equality; scalars compare bit-for-bit up to signed zero.
    pub fn identical(&self, other: &Element) -> bool {
        match (self, other) {
            (Element::Index(a), Element::Index(b)) => a == b,
            (Element::Scalar(a), Element::Scalar(b)) => a == b,
            _ => false,
        }
    }

    /// Total order used to sort witnesses deterministically.
    pub fn total_cmp(&self, other: &Element) -> Ordering {
        match (self, other) {
            (Element::Index(a), Element::Index(b)) => a.cmp(b),
            (Element::Scalar(a), Element::Scalar(b)) => a.total_cmp(b),
            (Element::Index(_), Element::Scalar(_)) => Ordering::Less,
            (Element::Scalar(_), Element::Index(_)) => Ordering::Greater,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Index(i) => write!(f, "#{i}"),
            Element::Scalar(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Carrier {
    Finite { table: Vec<Vec<f64>> },
    Interval { lower: f64, upper: f64, p: Expr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialMetricSpace {
    carrier: Carrier,
    label: String,
}

fn check_vars(e: &Expr, allowed: &[Var], what: &'static str) -> Result<(), ModelError> {
    match e
        .free_variables()
        .into_iter()
        .find(|v| !allowed.contains(v))
    {
        Some(var) => Err(ModelError::ForbiddenVariable { what, var }),
        None => Ok(()),
    }
}

fn check_square<T>(table: &[Vec<T>], expected: usize) -> Result<(), ModelError> {
    for (row, r) in table.iter().enumerate() {
        if r.len() != expected {
            return Err(ModelError::NotSquare {
                row,
                len: r.len(),
                expected,
            });
        }
    }
    Ok(())
}

impl PartialMetricSpace {
    /// Builds a finite space, rejecting tables that break symmetry or
    /// small self-distances.
    pub fn finite(table: Vec<Vec<f64>>, label: impl Into<String>) -> Result<Self, ModelError> {
        let n = table.len();
        if n == 0 {
            return Err(ModelError::Empty);
        }
        check_square(&table, n)?;
        for i in 0..n {
            for j in 0..n {
                let v = table[i][j];
                if !v.is_finite() || v < 0.0 {
                    return Err(ModelError::BadDistance { i, j, value: v });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if table[i][j] != table[j][i] {
                    return Err(ModelError::Asymmetric {
                        i: i.min(j),
                        j: i.max(j),
                    });
                }
                if table[i][i] > table[i][j] {
                    return Err(ModelError::SelfDistanceExceeds { i, j });
                }
            }
        }
        Ok(Self {
            carrier: Carrier::Finite { table },
            label: label.into(),
        })
    }

    /// Builds a real-interval space `[lower, upper]` with distance `p(x, y)`.
    pub fn interval(
        lower: f64,
        upper: f64,
        p: Expr,
        label: impl Into<String>,
    ) -> Result<Self, ModelError> {
        if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
            return Err(ModelError::BadInterval { lower, upper });
        }
        check_vars(&p, &[Var::X, Var::Y], "distance expression")?;
        Ok(Self {
            carrier: Carrier::Interval { lower, upper, p },
            label: label.into(),
        })
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.carrier, Carrier::Finite { .. })
    }

    /// Number of points for finite carriers.
    pub fn size(&self) -> Option<usize> {
        match &self.carrier {
            Carrier::Finite { table } => Some(table.len()),
            Carrier::Interval { .. } => None,
        }
    }

    pub fn contains(&self, a: &Element) -> bool {
        match (&self.carrier, a) {
            (Carrier::Finite { table }, Element::Index(i)) => *i < table.len(),
            (Carrier::Interval { lower, upper, .. }, Element::Scalar(v)) => {
                *lower <= *v && *v <= *upper
            }
            _ => false,
        }
    }

    pub fn ensure(&self, a: &Element) -> Result<(), ModelError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(ModelError::OutsideCarrier(*a))
        }
    }

    pub fn distance(&self, a: &Element, b: &Element) -> Result<f64, ModelError> {
        self.ensure(a)?;
        self.ensure(b)?;
        match (&self.carrier, a, b) {
            (Carrier::Finite { table }, Element::Index(i), Element::Index(j)) => Ok(table[*i][*j]),
            (Carrier::Interval { p, .. }, Element::Scalar(x), Element::Scalar(y)) => {
                Ok(p.evaluate(&Env::pair(*x, *y))?)
            }
            _ => unreachable!("containment checked above"),
        }
    }

    pub fn self_distance(&self, a: &Element) -> Result<f64, ModelError> {
        self.distance(a, a)
    }

    /// The metric `2 p(a,b) - p(a,a) - p(b,b)`.
    pub fn induced_distance(&self, a: &Element, b: &Element) -> Result<f64, ModelError> {
        Ok(2.0 * self.distance(a, b)? - self.self_distance(a)? - self.self_distance(b)?)
    }

    /// Deterministic sample of carrier points.
    ///
    /// Finite carriers: distinct indices, every index when `k >= n`.
    /// Intervals: both endpoints, `0` when it lies inside, then uniform draws.
    pub fn sample_elements(&self, k: usize, seed: u64) -> Vec<Element> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match &self.carrier {
            Carrier::Finite { table } => {
                let n = table.len();
                let mut all: Vec<usize> = (0..n).collect();
                all.shuffle(&mut rng);
                let mut out: Vec<Element> = all.into_iter().take(k).map(Element::Index).collect();
                while out.len() < k {
                    out.push(Element::Index(rng.gen_range(0..n)));
                }
                out
            }
            Carrier::Interval { lower, upper, .. } => {
                let mut out = vec![Element::Scalar(*lower)];
                if upper > lower {
                    out.push(Element::Scalar(*upper));
                }
                if *lower < 0.0 && 0.0 < *upper {
                    out.push(Element::Scalar(0.0));
                }
                out.truncate(k);
                while out.len() < k {
                    let v = if upper > lower {
                        rng.gen_range(*lower..=*upper)
                    } else {
                        *lower
                    };
                    out.push(Element::Scalar(v));
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Leq,
    Geq,
    Eq,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Leq => "leq",
            Relation::Geq => "geq",
            Relation::Eq => "eq",
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::Leq => lhs <= rhs,
            Relation::Geq => lhs >= rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrderKind {
    Finite(Vec<Vec<bool>>),
    Predicate { lhs: Expr, rel: Relation, rhs: Expr },
}

/// The relation `a <=_X b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialOrder {
    kind: OrderKind,
    label: String,
}

impl PartialOrder {
    pub fn finite(table: Vec<Vec<bool>>, label: impl Into<String>) -> Result<Self, ModelError> {
        let n = table.len();
        if n == 0 {
            return Err(ModelError::Empty);
        }
        check_square(&table, n)?;
        if let Some(i) = (0..n).find(|&i| !table[i][i]) {
            return Err(ModelError::NotReflexive(i));
        }
        Ok(Self {
            kind: OrderKind::Finite(table),
            label: label.into(),
        })
    }

    /// Finite order from a list of related pairs; the diagonal is added.
    pub fn from_pairs(
        n: usize,
        pairs: &[(usize, usize)],
        label: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let mut table = vec![vec![false; n]; n];
        for (i, row) in table.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(ModelError::SizeMismatch {
                    what: "order",
                    got: a.max(b) + 1,
                    expected: n,
                });
            }
            table[a][b] = true;
        }
        Self::finite(table, label)
    }

    pub fn predicate(
        lhs: Expr,
        rel: Relation,
        rhs: Expr,
        label: impl Into<String>,
    ) -> Result<Self, ModelError> {
        check_vars(&lhs, &[Var::X, Var::Y], "order predicate")?;
        check_vars(&rhs, &[Var::X, Var::Y], "order predicate")?;
        Ok(Self {
            kind: OrderKind::Predicate { lhs, rel, rhs },
            label: label.into(),
        })
    }

    pub fn kind(&self) -> &OrderKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn leq(&self, a: &Element, b: &Element) -> Result<bool, ModelError> {
        match (&self.kind, a, b) {
            (OrderKind::Finite(table), Element::Index(i), Element::Index(j)) => {
                let n = table.len();
                if *i >= n {
                    return Err(ModelError::OutsideCarrier(*a));
                }
                if *j >= n {
                    return Err(ModelError::OutsideCarrier(*b));
                }
                Ok(table[*i][*j])
            }
            (OrderKind::Predicate { lhs, rel, rhs }, Element::Scalar(x), Element::Scalar(y)) => {
                let env = Env::pair(*x, *y);
                Ok(rel.holds(lhs.evaluate(&env)?, rhs.evaluate(&env)?))
            }
            _ => Err(ModelError::KindMismatch),
        }
    }

    pub fn comparable(&self, a: &Element, b: &Element) -> Result<bool, ModelError> {
        Ok(self.leq(a, b)? || self.leq(b, a)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Finite(Vec<usize>),
    Scalar(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfMap {
    kind: MapKind,
    label: String,
}

impl SelfMap {
    pub fn finite(table: Vec<usize>, label: impl Into<String>) -> Result<Self, ModelError> {
        let n = table.len();
        if let Some((from, &to)) = table.iter().enumerate().find(|(_, &to)| to >= n) {
            return Err(ModelError::MapOutOfRange { from, to, n });
        }
        Ok(Self {
            kind: MapKind::Finite(table),
            label: label.into(),
        })
    }

    /// A map `f(t)`; the argument is bound to both `t` and `x`.
    pub fn scalar(f: Expr, label: impl Into<String>) -> Result<Self, ModelError> {
        check_vars(&f, &[Var::X, Var::T], "map expression")?;
        Ok(Self {
            kind: MapKind::Scalar(f),
            label: label.into(),
        })
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Image of `a`; does not check that it lands in any particular carrier.
    pub fn apply(&self, a: &Element) -> Result<Element, ModelError> {
        match (&self.kind, a) {
            (MapKind::Finite(table), Element::Index(i)) => table
                .get(*i)
                .map(|&j| Element::Index(j))
                .ok_or(ModelError::OutsideCarrier(*a)),
            (MapKind::Scalar(f), Element::Scalar(v)) => {
                Ok(Element::Scalar(f.evaluate(&Env::unary(*v))?))
            }
            _ => Err(ModelError::KindMismatch),
        }
    }
}

/// The control function `psi` of the weak contraction condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlFunction {
    expr: Expr,
    growth_bound: f64,
    growth_threshold: f64,
}

impl ControlFunction {
    pub fn new(expr: Expr) -> Result<Self, ModelError> {
        Self::with_growth(expr, DEFAULT_GROWTH_BOUND, DEFAULT_GROWTH_THRESHOLD)
    }

    pub fn with_growth(
        expr: Expr,
        growth_bound: f64,
        growth_threshold: f64,
    ) -> Result<Self, ModelError> {
        check_vars(&expr, &[Var::X, Var::T], "control function")?;
        if !(growth_bound.is_finite() && growth_bound > 0.0) {
            return Err(ModelError::NonPositive("growth bound"));
        }
        let at_zero = expr.evaluate(&Env::unary(0.0))?;
        if at_zero != 0.0 {
            return Err(ModelError::PsiNotZeroAtZero(at_zero));
        }
        Ok(Self {
            expr,
            growth_bound,
            growth_threshold,
        })
    }

    /// `t -> (1 - c) t`, the control function of a Banach-type contraction.
    pub fn from_banach(c: f64) -> Result<Self, ModelError> {
        if !(0.0..1.0).contains(&c) {
            return Err(ModelError::BadBanachConstant(c));
        }
        Self::new(Expr::binary(
            crate::expr::BinOp::Mul,
            Expr::num(1.0 - c),
            Expr::var(Var::T),
        ))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn growth_bound(&self) -> f64 {
        self.growth_bound
    }

    pub fn growth_threshold(&self) -> f64 {
        self.growth_threshold
    }

    pub fn eval(&self, t: f64) -> Result<f64, ModelError> {
        Ok(self.expr.evaluate(&Env::unary(t))?)
    }
}

/// Everything needed to certify and solve one fixed-point problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub label: String,
    pub space: PartialMetricSpace,
    pub order: PartialOrder,
    pub map: SelfMap,
    pub psi: Option<ControlFunction>,
    pub banach_c: Option<f64>,
    pub x0: Element,
    pub tol: f64,
    pub max_iter: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub eps_ax: f64,
    pub confinement_eps: f64,
}

impl ProblemInstance {
    /// Checks the cross-field invariants.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.psi.is_none() && self.banach_c.is_none() {
            return Err(ModelError::MissingContraction);
        }
        if let Some(c) = self.banach_c {
            if !(0.0..1.0).contains(&c) {
                return Err(ModelError::BadBanachConstant(c));
            }
        }
        if let Some(n) = self.space.size() {
            match self.order.kind() {
                OrderKind::Finite(t) if t.len() == n => {}
                OrderKind::Finite(t) => {
                    return Err(ModelError::SizeMismatch {
                        what: "order",
                        got: t.len(),
                        expected: n,
                    })
                }
                OrderKind::Predicate { .. } => return Err(ModelError::KindMismatch),
            }
            match self.map.kind() {
                MapKind::Finite(t) if t.len() == n => {}
                MapKind::Finite(t) => {
                    return Err(ModelError::SizeMismatch {
                        what: "map",
                        got: t.len(),
                        expected: n,
                    })
                }
                MapKind::Scalar(_) => return Err(ModelError::KindMismatch),
            }
        } else if matches!(self.order.kind(), OrderKind::Finite(_))
            || matches!(self.map.kind(), MapKind::Finite(_))
        {
            return Err(ModelError::KindMismatch);
        }
        self.space.ensure(&self.x0)?;
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(ModelError::NonPositive("tol"));
        }
        if self.max_iter == 0 {
            return Err(ModelError::NonPositive("max_iter"));
        }
        if self.sample_count == 0 {
            return Err(ModelError::NonPositive("samples"));
        }
        if self.eps_ax.is_nan() || self.eps_ax < 0.0 {
            return Err(ModelError::NonPositive("eps_ax"));
        }
        if self.confinement_eps.is_nan() || self.confinement_eps <= 0.0 {
            return Err(ModelError::NonPositive("confinement_eps"));
        }
        Ok(())
    }

    /// Image of `a`, which must stay inside the carrier.
    pub fn apply(&self, a: &Element) -> Result<Element, ModelError> {
        self.space.ensure(a)?;
        let fa = self.map.apply(a)?;
        self.space.ensure(&fa)?;
        Ok(fa)
    }

    /// The control function used for weak-contraction style diagnostics:
    /// the declared one, or the one derived from the contraction constant.
    pub fn effective_psi(&self) -> Result<ControlFunction, ModelError> {
        match (&self.psi, self.banach_c) {
            (Some(psi), _) => Ok(psi.clone()),
            (None, Some(c)) => ControlFunction::from_banach(c),
            (None, None) => Err(ModelError::MissingContraction),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_space() -> PartialMetricSpace {
        PartialMetricSpace::interval(0.0, 1e3, Expr::parse("max(x,y)").unwrap(), "max").unwrap()
    }

    fn max_order() -> PartialOrder {
        PartialOrder::predicate(
            Expr::parse("x").unwrap(),
            Relation::Eq,
            Expr::parse("max(x,y)").unwrap(),
            "max",
        )
        .unwrap()
    }

    fn table3() -> PartialMetricSpace {
        PartialMetricSpace::finite(
            vec![
                vec![0.0, 2.0, 3.0],
                vec![2.0, 1.0, 4.0],
                vec![3.0, 4.0, 2.0],
            ],
            "t3",
        )
        .unwrap()
    }

    fn s(v: f64) -> Element {
        Element::Scalar(v)
    }

    #[test]
    fn distances_on_max_metric() {
        let sp = max_space();
        assert_eq!(sp.distance(&s(3.0), &s(5.0)).unwrap(), 5.0);
        assert_eq!(sp.distance(&s(4.0), &s(4.0)).unwrap(), 4.0);
        assert_eq!(sp.induced_distance(&s(3.0), &s(5.0)).unwrap(), 2.0);
        assert_eq!(sp.induced_distance(&s(7.5), &s(7.5)).unwrap(), 0.0);
        assert_eq!(sp.self_distance(&s(0.0)).unwrap(), 0.0);
        assert_eq!(sp.self_distance(&s(7.0)).unwrap(), 7.0);
        assert!(matches!(
            sp.distance(&s(-1.0), &s(1.0)),
            Err(ModelError::OutsideCarrier(_))
        ));
        assert!(matches!(
            sp.distance(&Element::Index(0), &s(1.0)),
            Err(ModelError::OutsideCarrier(_))
        ));
    }

    #[test]
    fn distances_on_table() {
        let sp = table3();
        assert_eq!(
            sp.distance(&Element::Index(1), &Element::Index(2)).unwrap(),
            4.0
        );
        assert_eq!(
            sp.induced_distance(&Element::Index(0), &Element::Index(1))
                .unwrap(),
            3.0
        );
        assert_eq!(sp.self_distance(&Element::Index(2)).unwrap(), 2.0);
        assert!(sp.distance(&Element::Index(3), &Element::Index(0)).is_err());
    }

    #[test]
    fn finite_constructor_rejects_bad_tables() {
        let asym = PartialMetricSpace::finite(vec![vec![0.0, 1.0], vec![2.0, 0.0]], "");
        assert_eq!(asym, Err(ModelError::Asymmetric { i: 0, j: 1 }));
        let p2 = PartialMetricSpace::finite(vec![vec![5.0, 2.0], vec![2.0, 0.0]], "");
        assert_eq!(p2, Err(ModelError::SelfDistanceExceeds { i: 0, j: 1 }));
        let ragged = PartialMetricSpace::finite(vec![vec![0.0, 1.0], vec![1.0]], "");
        assert!(matches!(ragged, Err(ModelError::NotSquare { row: 1, .. })));
        let neg = PartialMetricSpace::finite(vec![vec![-1.0]], "");
        assert!(matches!(neg, Err(ModelError::BadDistance { .. })));
    }

    #[test]
    fn max_order_semantics() {
        let o = max_order();
        assert!(o.leq(&s(5.0), &s(3.0)).unwrap());
        assert!(!o.leq(&s(3.0), &s(5.0)).unwrap());
        assert!(o.leq(&s(2.5), &s(2.5)).unwrap());
        assert!(o.comparable(&s(1.0), &s(900.0)).unwrap());
    }

    #[test]
    fn finite_order_semantics() {
        let o = PartialOrder::from_pairs(2, &[(0, 1)], "").unwrap();
        assert!(o.leq(&Element::Index(0), &Element::Index(1)).unwrap());
        assert!(!o.leq(&Element::Index(1), &Element::Index(0)).unwrap());
        assert!(o.leq(&Element::Index(1), &Element::Index(1)).unwrap());
        let anti = PartialOrder::from_pairs(2, &[], "").unwrap();
        assert!(!anti
            .comparable(&Element::Index(0), &Element::Index(1))
            .unwrap());
        assert!(anti
            .comparable(&Element::Index(0), &Element::Index(0))
            .unwrap());
        assert_eq!(
            PartialOrder::finite(vec![vec![true, false], vec![false, false]], ""),
            Err(ModelError::NotReflexive(1))
        );
    }

    #[test]
    fn finite_sampling_covers_all_indices() {
        let sp = table3();
        for seed in 0..10 {
            let mut got: Vec<usize> = sp
                .sample_elements(3, seed)
                .iter()
                .map(|e| e.as_index().unwrap())
                .collect();
            got.sort();
            assert_eq!(got, vec![0, 1, 2]);
        }
        assert_eq!(sp.sample_elements(7, 1).len(), 7);
    }

    #[test]
    fn interval_sampling_includes_endpoints_and_is_deterministic() {
        let sp =
            PartialMetricSpace::interval(0.0, 100.0, Expr::parse("max(x,y)").unwrap(), "").unwrap();
        let a = sp.sample_elements(5, 42);
        assert_eq!(a.len(), 5);
        assert!(a.iter().all(|e| sp.contains(e)));
        assert!(a.contains(&s(0.0)) && a.contains(&s(100.0)));
        assert_eq!(a, sp.sample_elements(5, 42));
        assert_ne!(a, sp.sample_elements(5, 43));

        let around =
            PartialMetricSpace::interval(-1.0, 1.0, Expr::parse("abs(x-y)").unwrap(), "").unwrap();
        assert!(around.sample_elements(4, 0).contains(&s(0.0)));
    }

    #[test]
    fn control_function_requires_zero_at_origin() {
        assert!(ControlFunction::new(Expr::parse("t/4").unwrap()).is_ok());
        assert_eq!(
            ControlFunction::new(Expr::parse("t + 1").unwrap()),
            Err(ModelError::PsiNotZeroAtZero(1.0))
        );
        assert!(matches!(
            ControlFunction::new(Expr::parse("y").unwrap()),
            Err(ModelError::ForbiddenVariable { .. })
        ));
    }

    #[test]
    fn banach_control_function() {
        let psi = ControlFunction::from_banach(0.5).unwrap();
        assert_eq!(psi.eval(2.0).unwrap(), 1.0);
        let id = ControlFunction::from_banach(0.0).unwrap();
        assert_eq!(id.eval(3.5).unwrap(), 3.5);
        assert_eq!(
            ControlFunction::from_banach(1.0),
            Err(ModelError::BadBanachConstant(1.0))
        );
        assert!(ControlFunction::from_banach(-0.1).is_err());
    }

    #[test]
    fn maps() {
        let f = SelfMap::scalar(Expr::parse("t/2").unwrap(), "").unwrap();
        assert_eq!(f.apply(&s(3.0)).unwrap(), s(1.5));
        let g = SelfMap::finite(vec![1, 0], "").unwrap();
        assert_eq!(g.apply(&Element::Index(0)).unwrap(), Element::Index(1));
        assert_eq!(
            SelfMap::finite(vec![2, 0], ""),
            Err(ModelError::MapOutOfRange {
                from: 0,
                to: 2,
                n: 2
            })
        );
        assert!(SelfMap::scalar(Expr::parse("y").unwrap(), "").is_err());
    }

    #[test]
    fn identity_rule() {
        assert!(s(1.0).same(&s(1.0 + 1e-10), 1e-9));
        assert!(!s(1.0).same(&s(1.0 + 1e-8), 1e-9));
        assert!(!Element::Index(0).same(&s(0.0), 1.0));
        assert!(Element::Index(2).same(&Element::Index(2), 0.0));
    }
}
