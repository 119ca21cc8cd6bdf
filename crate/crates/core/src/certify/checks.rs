//! Single-case evaluation of every certified property.
//!
//! Certifiers loop over cases; replay evaluates one case from a witness.
//! Both paths go through [`Check::evaluate`].

use std::fmt;
use std::str::FromStr;

use crate::model::{
    ControlFunction, Element, ModelError, PartialMetricSpace, PartialOrder, SelfMap,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    Nonnegative,
    P1Identity,
    P2SelfDistance,
    P3Symmetry,
    P4Triangle,
    InducedNonnegative,
    InducedZeroSelf,
    InducedSymmetry,
    InducedTriangle,
    InducedIdentity,
    OrderReflexive,
    OrderAntisymmetric,
    OrderTransitive,
    PsiZero,
    PsiPositive,
    PsiMonotone,
    PsiGrowth,
    MapInCarrier,
    Monotone,
    WeakContraction,
    Banach,
    InitialBelowImage,
    ContinuityPlain,
    ContinuityProper,
    Comparability,
    Descent,
    StrictDescent,
    OrbitConfinement,
    OrbitNondecreasing,
    OrbitBelowLimit,
    Uniqueness,
}

pub const ALL_CHECKS: [Check; 31] = [
    Check::Nonnegative,
    Check::P1Identity,
    Check::P2SelfDistance,
    Check::P3Symmetry,
    Check::P4Triangle,
    Check::InducedNonnegative,
    Check::InducedZeroSelf,
    Check::InducedSymmetry,
    Check::InducedTriangle,
    Check::InducedIdentity,
    Check::OrderReflexive,
    Check::OrderAntisymmetric,
    Check::OrderTransitive,
    Check::PsiZero,
    Check::PsiPositive,
    Check::PsiMonotone,
    Check::PsiGrowth,
    Check::MapInCarrier,
    Check::Monotone,
    Check::WeakContraction,
    Check::Banach,
    Check::InitialBelowImage,
    Check::ContinuityPlain,
    Check::ContinuityProper,
    Check::Comparability,
    Check::Descent,
    Check::StrictDescent,
    Check::OrbitConfinement,
    Check::OrbitNondecreasing,
    Check::OrbitBelowLimit,
    Check::Uniqueness,
];

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Nonnegative => "nonnegative",
            Check::P1Identity => "p1_identity",
            Check::P2SelfDistance => "p2_small_self_distance",
            Check::P3Symmetry => "p3_symmetry",
            Check::P4Triangle => "p4_triangle",
            Check::InducedNonnegative => "induced_nonnegative",
            Check::InducedZeroSelf => "induced_zero_self_distance",
            Check::InducedSymmetry => "induced_symmetry",
            Check::InducedTriangle => "induced_triangle",
            Check::InducedIdentity => "induced_identity",
            Check::OrderReflexive => "order_reflexive",
            Check::OrderAntisymmetric => "order_antisymmetric",
            Check::OrderTransitive => "order_transitive",
            Check::PsiZero => "psi_zero",
            Check::PsiPositive => "psi_positive",
            Check::PsiMonotone => "psi_monotone",
            Check::PsiGrowth => "psi_growth_probe",
            Check::MapInCarrier => "map_in_carrier",
            Check::Monotone => "map_monotone",
            Check::WeakContraction => "weak_contraction",
            Check::Banach => "banach_contraction",
            Check::InitialBelowImage => "x0_below_image",
            Check::ContinuityPlain => "continuity_probe_plain",
            Check::ContinuityProper => "continuity_probe_proper",
            Check::Comparability => "comparability",
            Check::Descent => "descent",
            Check::StrictDescent => "strict_descent",
            Check::OrbitConfinement => "orbit_confinement",
            Check::OrbitNondecreasing => "orbit_nondecreasing",
            Check::OrbitBelowLimit => "orbit_below_limit",
            Check::Uniqueness => "uniqueness",
        }
    }

    /// Number of witness elements a case takes.
    pub fn arity(self) -> usize {
        match self {
            Check::InducedZeroSelf
            | Check::OrderReflexive
            | Check::PsiZero
            | Check::PsiPositive
            | Check::PsiGrowth
            | Check::MapInCarrier
            | Check::InitialBelowImage => 1,
            Check::P4Triangle
            | Check::InducedTriangle
            | Check::OrderTransitive
            | Check::Descent
            | Check::StrictDescent => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_CHECKS
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| s.to_string())
    }
}

/// Everything a case may need. Unused parts stay `None`.
#[derive(Debug, Clone, Copy)]
pub struct CheckContext<'a> {
    pub space: &'a PartialMetricSpace,
    pub order: Option<&'a PartialOrder>,
    pub map: Option<&'a SelfMap>,
    pub psi: Option<&'a ControlFunction>,
    pub banach_c: Option<f64>,
    pub eps_ax: f64,
    /// Bound used by the probes and orbit diagnostics (continuity tail
    /// tolerance, confinement radius, uniqueness tolerance).
    pub tol: f64,
}

impl<'a> CheckContext<'a> {
    pub fn new(space: &'a PartialMetricSpace, eps_ax: f64) -> Self {
        Self {
            space,
            order: None,
            map: None,
            psi: None,
            banach_c: None,
            eps_ax,
            tol: 1e-6,
        }
    }

    pub fn with_order(mut self, order: &'a PartialOrder) -> Self {
        self.order = Some(order);
        self
    }

    pub fn with_map(mut self, map: &'a SelfMap) -> Self {
        self.map = Some(map);
        self
    }

    pub fn with_psi(mut self, psi: &'a ControlFunction) -> Self {
        self.psi = Some(psi);
        self
    }

    pub fn with_banach(mut self, c: f64) -> Self {
        self.banach_c = Some(c);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Tolerance for equalities between distances: exact on tables.
    fn eq_tol(&self) -> f64 {
        if self.space.is_finite() {
            0.0
        } else {
            self.eps_ax
        }
    }

    fn same(&self, a: &Element, b: &Element) -> bool {
        a.same(b, self.eps_ax)
    }

    fn p(&self, a: &Element, b: &Element) -> Result<f64, ModelError> {
        self.space.distance(a, b)
    }

    fn ps(&self, a: &Element, b: &Element) -> Result<f64, ModelError> {
        self.space.induced_distance(a, b)
    }

    fn order(&self) -> Result<&'a PartialOrder, ModelError> {
        self.order.ok_or(ModelError::KindMismatch)
    }

    fn psi(&self) -> Result<&'a ControlFunction, ModelError> {
        self.psi.ok_or(ModelError::MissingContraction)
    }

    fn image(&self, a: &Element) -> Result<Element, ModelError> {
        let map = self.map.ok_or(ModelError::KindMismatch)?;
        let fa = map.apply(a)?;
        self.space.ensure(&fa)?;
        Ok(fa)
    }

    fn leq(&self, a: &Element, b: &Element) -> Result<bool, ModelError> {
        self.order()?.leq(a, b)
    }
}

/// Outcome of one case.
#[derive(Debug, Clone, PartialEq)]
pub enum Case {
    Pass,
    /// The case lies outside the check's domain (e.g. an incomparable pair).
    Skip,
    Fail {
        values: Vec<(&'static str, f64)>,
        message: String,
    },
}

fn fail(values: Vec<(&'static str, f64)>, message: impl Into<String>) -> Case {
    Case::Fail {
        values,
        message: message.into(),
    }
}

fn pass_if(ok: bool, values: Vec<(&'static str, f64)>, message: impl FnOnce() -> String) -> Case {
    if ok {
        Case::Pass
    } else {
        fail(values, message())
    }
}

fn gap(t: f64) -> f64 {
    t.abs()
}

impl Check {
    /// Evaluates one case. `w` must hold [`Check::arity`] elements;
    /// `candidates` is only read by [`Check::Comparability`].
    pub fn evaluate(
        self,
        ctx: &CheckContext<'_>,
        w: &[Element],
        candidates: &[Element],
    ) -> Result<Case, ModelError> {
        let eps = ctx.eps_ax;
        let a = &w[0];
        Ok(match self {
            Check::Nonnegative => {
                let pab = ctx.p(a, &w[1])?;
                pass_if(pab >= -eps, vec![("p_ab", pab)], || {
                    "distance is negative".into()
                })
            }
            Check::P1Identity => {
                let b = &w[1];
                let (paa, pab, pbb) = (ctx.p(a, a)?, ctx.p(a, b)?, ctx.p(b, b)?);
                let tol = ctx.eq_tol();
                let indistinct = gap(paa - pab) <= tol && gap(pbb - pab) <= tol;
                let same = ctx.same(a, b);
                pass_if(
                    indistinct == same,
                    vec![("p_aa", paa), ("p_ab", pab), ("p_bb", pbb)],
                    || {
                        if same {
                            "identical points have differing self/cross distances".into()
                        } else {
                            "distinct points are not separated by the partial metric".into()
                        }
                    },
                )
            }
            Check::P2SelfDistance => {
                let (paa, pab) = (ctx.p(a, a)?, ctx.p(a, &w[1])?);
                pass_if(paa <= pab + eps, vec![("p_aa", paa), ("p_ab", pab)], || {
                    "self-distance exceeds cross distance".into()
                })
            }
            Check::P3Symmetry => {
                let (pab, pba) = (ctx.p(a, &w[1])?, ctx.p(&w[1], a)?);
                pass_if(
                    gap(pab - pba) <= eps,
                    vec![("p_ab", pab), ("p_ba", pba)],
                    || "distance is not symmetric".into(),
                )
            }
            Check::P4Triangle => {
                let (b, z) = (&w[1], &w[2]);
                let lhs = ctx.p(a, b)?;
                let rhs = ctx.p(a, z)? + ctx.p(z, b)? - ctx.p(z, z)?;
                pass_if(lhs <= rhs + eps, vec![("lhs", lhs), ("rhs", rhs)], || {
                    "p(x,y) > p(x,z) + p(z,y) - p(z,z)".into()
                })
            }
            Check::InducedNonnegative => {
                let d = ctx.ps(a, &w[1])?;
                pass_if(d >= -2.0 * eps, vec![("ps_ab", d)], || {
                    "induced distance is negative".into()
                })
            }
            Check::InducedZeroSelf => {
                let d = ctx.ps(a, a)?;
                pass_if(gap(d) <= eps, vec![("ps_aa", d)], || {
                    "induced self-distance is not zero".into()
                })
            }
            Check::InducedSymmetry => {
                let (ab, ba) = (ctx.ps(a, &w[1])?, ctx.ps(&w[1], a)?);
                pass_if(
                    gap(ab - ba) <= 2.0 * eps,
                    vec![("ps_ab", ab), ("ps_ba", ba)],
                    || "induced distance is not symmetric".into(),
                )
            }
            Check::InducedTriangle => {
                let (b, z) = (&w[1], &w[2]);
                let lhs = ctx.ps(a, b)?;
                let rhs = ctx.ps(a, z)? + ctx.ps(z, b)?;
                pass_if(
                    lhs <= rhs + 2.0 * eps,
                    vec![("lhs", lhs), ("rhs", rhs)],
                    || "induced triangle inequality fails".into(),
                )
            }
            Check::InducedIdentity => {
                let b = &w[1];
                let d = ctx.ps(a, b)?;
                if d <= ctx.eq_tol() && !ctx.same(a, b) {
                    fail(
                        vec![("ps_ab", d)],
                        "distinct points at induced distance zero",
                    )
                } else {
                    Case::Pass
                }
            }
            Check::OrderReflexive => {
                pass_if(ctx.leq(a, a)?, vec![], || "a is not below itself".into())
            }
            Check::OrderAntisymmetric => {
                let b = &w[1];
                if ctx.leq(a, b)? && ctx.leq(b, a)? && !ctx.same(a, b) {
                    fail(vec![], "distinct points below each other")
                } else {
                    Case::Pass
                }
            }
            Check::OrderTransitive => {
                let (b, c) = (&w[1], &w[2]);
                if ctx.leq(a, b)? && ctx.leq(b, c)? && !ctx.leq(a, c)? {
                    fail(vec![], "a <= b and b <= c but not a <= c")
                } else {
                    Case::Pass
                }
            }
            Check::PsiZero => {
                let v = ctx.psi()?.eval(0.0)?;
                pass_if(gap(v) <= eps, vec![("psi_0", v)], || {
                    "psi(0) is not zero".into()
                })
            }
            Check::PsiPositive => {
                let t = a.as_scalar().ok_or(ModelError::KindMismatch)?;
                let v = ctx.psi()?.eval(t)?;
                if t > 0.0 && v <= 0.0 {
                    fail(vec![("t", t), ("psi_t", v)], "psi is not positive at t > 0")
                } else {
                    Case::Pass
                }
            }
            Check::PsiMonotone => {
                let s = a.as_scalar().ok_or(ModelError::KindMismatch)?;
                let t = w[1].as_scalar().ok_or(ModelError::KindMismatch)?;
                let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
                let psi = ctx.psi()?;
                let (vl, vh) = (psi.eval(lo)?, psi.eval(hi)?);
                pass_if(
                    vl <= vh + eps,
                    vec![("s", lo), ("t", hi), ("psi_s", vl), ("psi_t", vh)],
                    || "psi decreases".into(),
                )
            }
            Check::PsiGrowth => {
                let g = a.as_scalar().ok_or(ModelError::KindMismatch)?;
                let psi = ctx.psi()?;
                let v = psi.eval(g)?;
                pass_if(
                    v >= psi.growth_threshold(),
                    vec![
                        ("t", g),
                        ("psi_t", v),
                        ("threshold", psi.growth_threshold()),
                    ],
                    || "psi stays below the growth threshold".into(),
                )
            }
            Check::MapInCarrier => match ctx.image(a) {
                Ok(_) => Case::Pass,
                Err(e) => fail(vec![], format!("map leaves the carrier: {e}")),
            },
            Check::Monotone => {
                let b = &w[1];
                if !ctx.leq(a, b)? {
                    Case::Pass
                } else {
                    let (fa, fb) = (ctx.image(a)?, ctx.image(b)?);
                    pass_if(ctx.leq(&fa, &fb)?, vec![], || {
                        format!("a <= b but f(a) = {fa} is not below f(b) = {fb}")
                    })
                }
            }
            Check::WeakContraction => {
                let b = &w[1];
                if !ctx.order()?.comparable(a, b)? {
                    Case::Skip
                } else {
                    let lhs = ctx.p(&ctx.image(a)?, &ctx.image(b)?)?;
                    let pab = ctx.p(a, b)?;
                    let rhs = pab - ctx.psi()?.eval(pab)?;
                    pass_if(
                        lhs <= rhs + eps,
                        vec![("p_fafb", lhs), ("p_ab", pab), ("rhs", rhs)],
                        || "p(fa,fb) > p(a,b) - psi(p(a,b))".into(),
                    )
                }
            }
            Check::Banach => {
                let b = &w[1];
                let c = ctx.banach_c.ok_or(ModelError::MissingContraction)?;
                if !ctx.order()?.comparable(a, b)? {
                    Case::Skip
                } else {
                    let lhs = ctx.p(&ctx.image(a)?, &ctx.image(b)?)?;
                    let pab = ctx.p(a, b)?;
                    let rhs = c * pab;
                    pass_if(
                        lhs <= rhs + eps,
                        vec![("p_fafb", lhs), ("p_ab", pab), ("rhs", rhs)],
                        || "p(fa,fb) > c p(a,b)".into(),
                    )
                }
            }
            Check::InitialBelowImage => {
                let fa = ctx.image(a)?;
                pass_if(ctx.leq(a, &fa)?, vec![], || {
                    format!("x0 is not below f(x0) = {fa}")
                })
            }
            Check::ContinuityPlain | Check::ContinuityProper => {
                // w = [limit, term]
                let (lim, term) = (a, &w[1]);
                let tol = ctx.tol;
                let (flim, fterm) = (ctx.image(lim)?, ctx.image(term)?);
                let (gap_in, gap_out) = if self == Check::ContinuityPlain {
                    (
                        gap(ctx.p(term, lim)? - ctx.p(lim, lim)?),
                        gap(ctx.p(&fterm, &flim)? - ctx.p(&flim, &flim)?),
                    )
                } else {
                    (ctx.ps(term, lim)?, ctx.ps(&fterm, &flim)?)
                };
                if gap_in > tol {
                    Case::Skip
                } else {
                    pass_if(
                        gap_out <= tol,
                        vec![("gap_in", gap_in), ("gap_out", gap_out), ("tol", tol)],
                        || "sequence term is close to its limit but its image is not".into(),
                    )
                }
            }
            Check::Comparability => {
                let order = ctx.order()?;
                let b = &w[1];
                let mut found = false;
                for z in [a, b].into_iter().chain(candidates.iter()) {
                    if order.comparable(z, a)? && order.comparable(z, b)? {
                        found = true;
                        break;
                    }
                }
                pass_if(found, vec![], || {
                    "no sampled point is comparable with both".into()
                })
            }
            Check::Descent => {
                // w = [x_{n-1}, x_n, x_{n+1}]
                let (b, c) = (&w[1], &w[2]);
                let prev = ctx.p(b, a)?;
                let rho = ctx.p(c, b)?;
                let bound = prev - ctx.psi()?.eval(prev)?;
                let ok = rho <= bound + eps && rho <= prev + eps;
                pass_if(
                    ok,
                    vec![("rho_prev", prev), ("rho", rho), ("bound", bound)],
                    || "rho_n > rho_{n-1} - psi(rho_{n-1})".into(),
                )
            }
            Check::StrictDescent => {
                // Any positive psi forces rho_n < rho_{n-1} while rho_{n-1} > 0.
                let (b, c) = (&w[1], &w[2]);
                let prev = ctx.p(b, a)?;
                let rho = ctx.p(c, b)?;
                pass_if(
                    prev <= 0.0 || rho < prev,
                    vec![("rho_prev", prev), ("rho", rho)],
                    || "step distance does not shrink".into(),
                )
            }
            Check::OrbitConfinement => {
                // w = [x_{n0}, x_n]
                let d = ctx.p(&w[1], a)?;
                pass_if(d <= ctx.tol + eps, vec![("p", d), ("tol", ctx.tol)], || {
                    "orbit leaves the confinement radius around x_{n0}".into()
                })
            }
            Check::OrbitNondecreasing => {
                let b = &w[1];
                pass_if(ctx.leq(a, b)?, vec![], || {
                    format!("orbit step {a} -> {b} is not nondecreasing")
                })
            }
            Check::OrbitBelowLimit => {
                let u = &w[1];
                pass_if(ctx.same(a, u) || ctx.leq(a, u)?, vec![], || {
                    format!("orbit point {a} is not below the limit {u}")
                })
            }
            Check::Uniqueness => {
                let b = &w[1];
                let d = ctx.p(a, b)?;
                pass_if(
                    ctx.same(a, b) && d <= ctx.tol,
                    vec![("p", d), ("tol", ctx.tol)],
                    || "fixed points differ".into(),
                )
            }
        })
    }
}
