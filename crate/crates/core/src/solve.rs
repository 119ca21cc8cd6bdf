//! Picard iteration `x_{n+1} = f(x_n)` with orbit diagnostics and a
//! multi-start uniqueness cross-check.

use thiserror::Error;

use crate::certify::{
    certify_comparability_hypothesis, run_cases, Case, CertifyError, Check, CheckContext,
    CheckOutcome, CheckRole, CheckStatus, Coverage, SampleSet,
};
use crate::model::{
    ControlFunction, Element, ModelError, PartialMetricSpace, PartialOrder, ProblemInstance,
    SelfMap,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("start {x0} is not below its image {fx0}")]
    NotBelowImage { x0: Element, fx0: Element },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// `rho_n`, `p(x_n, x_n)` and `p(x_n, f x_n)` all dropped below `tol`.
    Converged,
    MaxIterExceeded,
    /// The orbit repeated a point exactly with zero step distance.
    FixedPointHit,
    /// The orbit repeated a point whose self-distance is positive, so
    /// `rho` stays constant and cannot decrease as the contraction demands.
    DescentViolation,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterExceeded => "max_iter_exceeded",
            SolveStatus::FixedPointHit => "fixed_point_hit",
            SolveStatus::DescentViolation => "descent_violation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub points: Vec<Element>,
    /// `rho[n] = p(x_{n+1}, x_n)`.
    pub rho: Vec<f64>,
    pub self_dists: Vec<f64>,
    pub status: SolveStatus,
    pub iterations_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub trace: IterationTrace,
    pub fixed_point: Option<Element>,
    /// Position in the trace of the accepted point, or of the last point.
    pub candidate_index: usize,
    pub residual: f64,
    pub self_distance_at_u: f64,
    /// First step where `rho_n > rho_{n-1} - psi(rho_{n-1}) + eps_ax`.
    pub descent_flag: Option<usize>,
}

impl SolveResult {
    pub fn candidate(&self) -> Element {
        self.trace.points[self.candidate_index]
    }

    pub fn converged(&self) -> bool {
        self.fixed_point.is_some()
    }
}

/// Returns `(p(u, f u), p(u, u))`.
pub fn verify_fixed_point(
    space: &PartialMetricSpace,
    map: &SelfMap,
    u: &Element,
) -> Result<(f64, f64), ModelError> {
    space.ensure(u)?;
    let fu = map.apply(u)?;
    space.ensure(&fu)?;
    Ok((space.distance(u, &fu)?, space.self_distance(u)?))
}

/// Iterates from `instance.x0`, which must satisfy `x0 <= f(x0)`.
///
/// Stops on the first `n` with `rho_n`, `p(x_n,x_n)` and `p(x_n, f x_n)`
/// all within `tol` (scalar carriers only), when `x_{n+1} = x_n` exactly,
/// or after `max_iter` steps.
pub fn picard_solve(instance: &ProblemInstance) -> Result<SolveResult, SolveError> {
    let space = &instance.space;
    let tol = instance.tol;
    let finite = space.is_finite();
    let psi = instance.effective_psi().ok();

    let x0 = instance.x0;
    let fx0 = instance.apply(&x0)?;
    if !instance.order.leq(&x0, &fx0)? {
        return Err(SolveError::NotBelowImage { x0, fx0 });
    }

    let mut points = vec![x0];
    let mut self_dists = vec![space.self_distance(&x0)?];
    let mut rho: Vec<f64> = Vec::new();
    let mut descent_flag = None;
    let mut status = SolveStatus::MaxIterExceeded;
    let mut accepted = None;
    let mut next = Some(fx0);

    for n in 0..instance.max_iter {
        let x = points[n];
        let fx = match next.take() {
            Some(fx) => fx,
            None => instance.apply(&x)?,
        };
        let r = space.distance(&fx, &x)?;
        if let (Some(psi), Some(&prev)) = (&psi, rho.last()) {
            if descent_flag.is_none() && r > prev - psi.eval(prev)? + instance.eps_ax {
                descent_flag = Some(n);
            }
        }
        rho.push(r);
        points.push(fx);
        self_dists.push(space.self_distance(&fx)?);

        if fx.identical(&x) {
            let zero = if finite { r == 0.0 } else { r <= tol };
            if zero {
                status = SolveStatus::FixedPointHit;
                accepted = Some(n);
            } else {
                // Record one more (identical) step so the constant rho shows
                // up in the trace.
                if n + 1 < instance.max_iter {
                    rho.push(r);
                    points.push(fx);
                    self_dists.push(self_dists[n + 1]);
                    if descent_flag.is_none() {
                        descent_flag = Some(n + 1);
                    }
                }
                status = SolveStatus::DescentViolation;
            }
            break;
        }
        if !finite && r <= tol && self_dists[n] <= tol {
            let residual = space.distance(&x, &fx)?;
            if residual <= tol {
                status = SolveStatus::Converged;
                accepted = Some(n);
                break;
            }
        }
    }

    let iterations_used = rho.len();
    let candidate_index = accepted.unwrap_or(points.len() - 1);
    let (residual, self_distance_at_u) =
        verify_fixed_point(space, &instance.map, &points[candidate_index])?;
    let fixed_point = accepted
        .filter(|_| residual <= tol && self_distance_at_u <= tol)
        .map(|i| points[i]);
    Ok(SolveResult {
        trace: IterationTrace {
            points,
            rho,
            self_dists,
            status,
            iterations_used,
        },
        fixed_point,
        candidate_index,
        residual,
        self_distance_at_u,
        descent_flag,
    })
}

fn diagnostic<W: AsRef<[Element]>>(
    check: Check,
    ctx: &CheckContext<'_>,
    cases: impl IntoIterator<Item = W>,
) -> CheckOutcome {
    run_cases(
        check,
        CheckRole::Diagnostic,
        Coverage::Exhaustive,
        ctx,
        cases,
        &[],
    )
}

/// `rho_n <= rho_{n-1} - psi(rho_{n-1}) + eps` and `rho_n <= rho_{n-1} + eps`
/// along the whole trace.
pub fn descent_check(
    space: &PartialMetricSpace,
    trace: &IterationTrace,
    psi: &ControlFunction,
    eps: f64,
) -> CheckOutcome {
    let ctx = CheckContext::new(space, eps).with_psi(psi);
    let p = &trace.points;
    let cases: Vec<[Element; 3]> = (1..trace.rho.len())
        .map(|n| [p[n - 1], p[n], p[n + 1]])
        .collect();
    let mut out = diagnostic(Check::Descent, &ctx, &cases);
    for v in &mut out.violations {
        v.values.push(("slack".to_string(), eps));
    }
    let first = cases.iter().position(|w| {
        !matches!(
            Check::Descent.evaluate(&ctx, w, &[]),
            Ok(Case::Pass | Case::Skip)
        )
    });
    if let Some(i) = first {
        out.details
            .push(("first_violation_step".to_string(), (i + 1) as f64));
    }
    out
}

/// Locates the first `n0` with `rho_{n0} <= min(eps/2, psi(eps/2))` and
/// checks `p(x_n, x_{n0}) <= eps` for every recorded `n >= n0`.
pub fn orbit_confinement_check(
    space: &PartialMetricSpace,
    trace: &IterationTrace,
    psi: &ControlFunction,
    eps: f64,
    eps_ax: f64,
) -> Result<CheckOutcome, ModelError> {
    let name = Check::OrbitConfinement.name();
    let half = eps / 2.0;
    let threshold = half.min(psi.eval(half)?);
    let Some(n0) = trace.rho.iter().position(|&r| r <= threshold) else {
        let mut out = CheckOutcome::skipped(
            name,
            CheckRole::Diagnostic,
            "no step reaches the confinement threshold",
        );
        out.details.push(("threshold".to_string(), threshold));
        return Ok(out);
    };
    if trace.points.len() < 2 {
        return Ok(CheckOutcome::skipped(
            name,
            CheckRole::Diagnostic,
            "trace too short",
        ));
    }
    let ctx = CheckContext::new(space, eps_ax).with_tol(eps);
    let anchor = trace.points[n0];
    let mut out = diagnostic(
        Check::OrbitConfinement,
        &ctx,
        trace.points[n0..].iter().map(|x| [anchor, *x]),
    );
    let max_dist = trace.points[n0..]
        .iter()
        .map(|x| space.distance(x, &anchor))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.details.push(("eps".to_string(), eps));
    out.details.push(("threshold".to_string(), threshold));
    out.details.push(("n0".to_string(), n0 as f64));
    out.details.push(("max_distance".to_string(), max_dist));
    Ok(out)
}

/// The orbit is nondecreasing and every point lies below `u` (points
/// identical to `u` under the identity rule count as below it).
pub fn order_limit_check(
    space: &PartialMetricSpace,
    trace: &IterationTrace,
    order: &PartialOrder,
    u: &Element,
    eps_ax: f64,
) -> Vec<CheckOutcome> {
    let ctx = CheckContext::new(space, eps_ax).with_order(order);
    let steps = trace.points.windows(2).map(|w| [w[0], w[1]]);
    let below = trace.points.iter().map(|x| [*x, *u]);
    vec![
        diagnostic(Check::OrbitNondecreasing, &ctx, steps),
        diagnostic(Check::OrbitBelowLimit, &ctx, below),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub start: Element,
    pub fixed_point: Option<Element>,
    pub status: Option<SolveStatus>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub check: CheckOutcome,
    pub starts: Vec<StartOutcome>,
}

impl UniquenessReport {
    /// Fixed points found, deduplicated under the identity rule.
    pub fn distinct_fixed_points(&self, eps: f64) -> Vec<Element> {
        let mut out: Vec<Element> = Vec::new();
        for u in self.starts.iter().filter_map(|s| s.fixed_point) {
            if !out.iter().any(|v| v.same(&u, eps)) {
                out.push(u);
            }
        }
        out
    }
}

/// Solves from each start and checks that all fixed points coincide.
///
/// Reported as skipped (not applicable) when the comparability hypothesis
/// fails on the instance's samples; the fixed points are still listed.
pub fn uniqueness_cross_check(
    instance: &ProblemInstance,
    starts: &[Element],
) -> Result<UniquenessReport, CertifyError> {
    let mut outcomes = Vec::with_capacity(starts.len());
    for &start in starts {
        let mut local = instance.clone();
        local.x0 = start;
        match picard_solve(&local) {
            Ok(res) => outcomes.push(StartOutcome {
                start,
                fixed_point: res.fixed_point,
                status: Some(res.trace.status),
                note: None,
            }),
            Err(SolveError::NotBelowImage { .. }) => outcomes.push(StartOutcome {
                start,
                fixed_point: None,
                status: None,
                note: Some("skipped: start is not below its image".to_string()),
            }),
            Err(e) => return Err(e.into()),
        }
    }

    let samples = SampleSet::build(&instance.space, instance.sample_count, instance.seed);
    let comparability = certify_comparability_hypothesis(
        &instance.space,
        &instance.order,
        &samples,
        instance.eps_ax,
    )?;
    let applicable = comparability
        .checks
        .iter()
        .all(|c| c.status != CheckStatus::Fail);

    let name = Check::Uniqueness.name();
    let found: Vec<Element> = outcomes.iter().filter_map(|o| o.fixed_point).collect();
    let mut check = if !applicable {
        CheckOutcome::skipped(
            name,
            CheckRole::Uniqueness,
            "not applicable: comparability hypothesis fails",
        )
    } else {
        let ctx = CheckContext::new(&instance.space, instance.eps_ax).with_tol(instance.tol);
        let pairs: Vec<[Element; 2]> = (0..found.len())
            .flat_map(|i| (i + 1..found.len()).map(move |j| (i, j)))
            .map(|(i, j)| [found[i], found[j]])
            .collect();
        let mut out = run_cases(
            Check::Uniqueness,
            CheckRole::Uniqueness,
            Coverage::Exhaustive,
            &ctx,
            pairs,
            &[],
        );
        for v in &mut out.violations {
            if !v.values.iter().any(|(k, _)| k == "tol") {
                v.values.push(("tol".to_string(), instance.tol));
            }
        }
        out
    };
    let max_p = (0..found.len())
        .flat_map(|i| (i + 1..found.len()).map(move |j| (i, j)))
        .map(|(i, j)| instance.space.distance(&found[i], &found[j]))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    check
        .details
        .push(("starts".to_string(), starts.len() as f64));
    check
        .details
        .push(("fixed_points_found".to_string(), found.len() as f64));
    check.details.push(("max_pairwise_p".to_string(), max_p));
    Ok(UniquenessReport {
        check,
        starts: outcomes,
    })
}
