//! Sampling-based certificates for the hypotheses of the fixed-point
//! theorem, with replayable violation witnesses.
//!
//! A passing certificate means "no violation on the cases tried". Finite
//! carriers with at most [`EXHAUSTIVE_LIMIT`] points are checked on every
//! pair and triple, and the report says so.

mod checks;
mod search;

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use checks::{Case, Check, CheckContext, ALL_CHECKS};
pub use search::{search_counterexample, Mutation};

use crate::model::{
    Carrier, ControlFunction, Element, ModelError, PartialMetricSpace, PartialOrder,
    ProblemInstance, SelfMap,
};
use crate::solve::SolveError;

pub const EXHAUSTIVE_LIMIT: usize = 64;
/// Violations kept per check after sorting; the total is still counted.
pub const MAX_WITNESSES: usize = 8;
/// Below this fraction of comparable pairs the contraction check warns.
pub const LOW_COVERAGE: f64 = 0.10;
const COMPARABILITY_CANDIDATES: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Solve(#[from] SolveError),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("unknown mutation `{0}`")]
    UnknownMutation(String),
    #[error("test sequence {0} is empty")]
    EmptySequence(usize),
    #[error("sample set is empty")]
    NoSamples,
    #[error("search budget must be at least 1")]
    ZeroBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive,
    Sampled,
    /// Evidence, not a certificate (continuity, growth).
    Probe,
}

impl Coverage {
    pub fn as_str(self) -> &'static str {
        match self {
            Coverage::Exhaustive => "exhaustive",
            Coverage::Sampled => "sampled",
            Coverage::Probe => "probe",
        }
    }
}

/// Whether a failed check invalidates the existence theorem, only the
/// uniqueness add-on, or is a run diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckRole {
    Hypothesis,
    Uniqueness,
    Diagnostic,
}

impl CheckRole {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckRole::Hypothesis => "hypothesis",
            CheckRole::Uniqueness => "uniqueness",
            CheckRole::Diagnostic => "diagnostic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: String,
    pub witness: Vec<Element>,
    pub values: Vec<(String, f64)>,
    pub message: String,
}

impl Violation {
    fn cmp_witness(&self, other: &Violation) -> Ordering {
        self.check.cmp(&other.check).then_with(|| {
            for (a, b) in self.witness.iter().zip(&other.witness) {
                match a.total_cmp(b) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            self.witness.len().cmp(&other.witness.len())
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub role: CheckRole,
    pub status: CheckStatus,
    pub coverage: Coverage,
    /// Cases evaluated, including skipped ones.
    pub cases: usize,
    pub skipped: usize,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    pub details: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, role: CheckRole, coverage: Coverage) -> Self {
        Self {
            name: name.into(),
            role,
            status: CheckStatus::Pass,
            coverage,
            cases: 0,
            skipped: 0,
            violation_count: 0,
            violations: Vec::new(),
            details: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn skipped(name: impl Into<String>, role: CheckRole, note: impl Into<String>) -> Self {
        let mut out = Self::new(name, role, Coverage::Probe);
        out.status = CheckStatus::Skipped;
        out.notes.push(note.into());
        out
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn detail(&self, key: &str) -> Option<f64> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// Records violations, keeping the smallest witnesses; sets `Fail`.
    pub fn record(&mut self, mut violations: Vec<Violation>) {
        if violations.is_empty() {
            return;
        }
        violations.sort_by(Violation::cmp_witness);
        violations.dedup_by(|a, b| a.cmp_witness(b) == Ordering::Equal);
        self.violation_count += violations.len();
        self.violations.extend(violations);
        self.violations.sort_by(Violation::cmp_witness);
        self.violations.truncate(MAX_WITNESSES);
        self.status = CheckStatus::Fail;
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CertificateReport {
    pub seed: u64,
    pub sample_count: usize,
    pub checks: Vec<CheckOutcome>,
    pub notes: Vec<String>,
}

impl CertificateReport {
    pub fn new(seed: u64, sample_count: usize) -> Self {
        Self {
            seed,
            sample_count,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn extend(&mut self, other: CertificateReport) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Violation> {
        self.checks.iter().flat_map(|c| c.violations.iter())
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    /// True when no check that the existence theorem depends on failed.
    pub fn hypotheses_hold(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.role != CheckRole::Hypothesis || c.status != CheckStatus::Fail)
    }
}

/// Points plus the ordered pairs and triples the certifiers run over.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub elements: Vec<Element>,
    pub pairs: Vec<(usize, usize)>,
    pub triples: Vec<(usize, usize, usize)>,
    pub exhaustive: bool,
    pub seed: u64,
}

impl SampleSet {
    /// Exhaustive for finite carriers up to [`EXHAUSTIVE_LIMIT`] points,
    /// `k` seeded samples otherwise.
    pub fn build(space: &PartialMetricSpace, k: usize, seed: u64) -> Self {
        match space.size() {
            Some(n) if n <= EXHAUSTIVE_LIMIT => {
                Self::exhaustive((0..n).map(Element::Index).collect(), seed)
            }
            _ => Self::sampled(space.sample_elements(k.max(1), seed), seed),
        }
    }

    pub fn exhaustive(elements: Vec<Element>, seed: u64) -> Self {
        let n = elements.len();
        let pairs = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        let triples = (0..n)
            .flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |l| (i, j, l))))
            .collect();
        Self {
            elements,
            pairs,
            triples,
            exhaustive: true,
            seed,
        }
    }

    /// Every element appears in at least one pair (both orientations) and
    /// one triple; partners are drawn from the seed.
    pub fn sampled(elements: Vec<Element>, seed: u64) -> Self {
        let n = elements.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a3d_1e5c_0ffe);
        let mut pairs = Vec::with_capacity(2 * n);
        let mut triples = Vec::with_capacity(n);
        if n > 0 {
            for i in 0..n {
                let j = rng.gen_range(0..n);
                pairs.push((i, j));
                pairs.push((j, i));
            }
            for i in 0..n {
                triples.push((i, rng.gen_range(0..n), rng.gen_range(0..n)));
            }
        }
        Self {
            elements,
            pairs,
            triples,
            exhaustive: false,
            seed,
        }
    }

    pub fn coverage(&self) -> Coverage {
        if self.exhaustive {
            Coverage::Exhaustive
        } else {
            Coverage::Sampled
        }
    }

    fn singles(&self) -> impl Iterator<Item = [Element; 1]> + '_ {
        self.elements.iter().map(|e| [*e])
    }

    fn pair_cases(&self) -> impl Iterator<Item = [Element; 2]> + '_ {
        self.pairs
            .iter()
            .map(|&(i, j)| [self.elements[i], self.elements[j]])
    }

    fn triple_cases(&self) -> impl Iterator<Item = [Element; 3]> + '_ {
        self.triples
            .iter()
            .map(|&(i, j, l)| [self.elements[i], self.elements[j], self.elements[l]])
    }

    fn report(&self) -> CertificateReport {
        CertificateReport::new(self.seed, self.elements.len())
    }
}

pub(crate) fn run_cases<W: AsRef<[Element]>>(
    check: Check,
    role: CheckRole,
    coverage: Coverage,
    ctx: &CheckContext<'_>,
    cases: impl IntoIterator<Item = W>,
    candidates: &[Element],
) -> CheckOutcome {
    let mut out = CheckOutcome::new(check.name(), role, coverage);
    let mut violations = Vec::new();
    for w in cases {
        let w = w.as_ref();
        out.cases += 1;
        match check.evaluate(ctx, w, candidates) {
            Ok(Case::Pass) => {}
            Ok(Case::Skip) => out.skipped += 1,
            Ok(Case::Fail { values, message }) => violations.push(Violation {
                check: check.name().to_string(),
                witness: w.to_vec(),
                values: values
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect(),
                message,
            }),
            Err(e) => violations.push(Violation {
                check: check.name().to_string(),
                witness: w.to_vec(),
                values: Vec::new(),
                message: format!("evaluation failed: {e}"),
            }),
        }
    }
    out.record(violations);
    out
}

fn require_samples(samples: &SampleSet) -> Result<(), CertifyError> {
    if samples.elements.is_empty() {
        Err(CertifyError::NoSamples)
    } else {
        Ok(())
    }
}

/// Non-negativity and axioms (p1)-(p4) of a partial metric.
pub fn certify_partial_metric(
    space: &PartialMetricSpace,
    samples: &SampleSet,
    eps_ax: f64,
) -> Result<CertificateReport, CertifyError> {
    require_samples(samples)?;
    let ctx = CheckContext::new(space, eps_ax);
    let cov = samples.coverage();
    let role = CheckRole::Hypothesis;
    let mut report = samples.report();
    report.checks.push(run_cases(
        Check::Nonnegative,
        role,
        cov,
        &ctx,
        samples.pair_cases(),
        &[],
    ));
    report.checks.push(run_cases(
        Check::P1Identity,
        role,
        cov,
        &ctx,
        samples.pair_cases(),
        &[],
    ));
    report.checks.push(run_cases(
        Check::P2SelfDistance,
        role,
        cov,
        &ctx,
        samples.pair_cases(),
        &[],
    ));
    report.checks.push(run_cases(
        Check::P3Symmetry,
        role,
        cov,
        &ctx,
        samples.pair_cases(),
        &[],
    ));
    report.checks.push(run_cases(
        Check::P4Triangle,
        role,
        cov,
        &ctx,
        samples.triple_cases(),
        &[],
    ));
    Ok(report)
}

/// Metric axioms for `2 p(a,b) - p(a,a) - p(b,b)`.
pub fn certify_induced_metric(
    space: &PartialMetricSpace,
    samples: &SampleSet,
    eps_ax: f64,
) -> Result<CertificateReport, CertifyError> {
    require_samples(samples)?;
    let ctx = CheckContext::new(space, eps_ax);
    let cov = samples.coverage();
    let role = CheckRole::Hypothesis;
    let mut report = samples.report();
    report.checks.push(run_cases(
        Check::InducedNonnegative,
        role,
        cov,
        &ctx,
        samples.pair_cases(),
        &[],
    ));
    report.checks.push(run_cases(
        Check::InducedZeroSelf,
        role,
        cov,
        &ctx,
        samples.singles(),
        &[],
    ));
    report.checks.push(run_cases(
        Check::InducedSymmetry,
        role,
        cov,
        &ctx,
        samples.pair_cases(),
        &[],
    ));
    report.checks.push(run_cases(
        Check::InducedTriangle,
        role,
        cov,
        &ctx,
        samples.triple_cases(),
        &[],
    ));
    report.checks.push(run_cases(
        Check::InducedIdentity,
        role,
        cov,
        &ctx,
        samples.pair_cases(),
        &[],
    ));
    Ok(report)
}

/// Reflexivity, antisymmetry and transitivity. Adds the note
/// `order is total on samples` when every sampled pair is comparable.
pub fn certify_order(
    space: &PartialMetricSpace,
    order: &PartialOrder,
    samples: &SampleSet,
    eps_ax: f64,
) -> Result<CertificateReport, CertifyError> {
    require_samples(samples)?;
    let ctx = CheckContext::new(space, eps_ax).with_order(order);
    let cov = samples.coverage();
    let role = CheckRole::Hypothesis;
    let mut report = samples.report();
    report.checks.push(run_cases(
        Check::OrderReflexive,
        role,
        cov,
        &ctx,
        samples.singles(),
        &[],
    ));
    report.checks.push(run_cases(
        Check::OrderAntisymmetric,
        role,
        cov,
        &ctx,
        samples.pair_cases(),
        &[],
    ));
    report.checks.push(run_cases(
        Check::OrderTransitive,
        role,
        cov,
        &ctx,
        samples.triple_cases(),
        &[],
    ));
    let mut total = true;
    for [a, b] in samples.pair_cases() {
        if !order.comparable(&a, &b).unwrap_or(false) {
            total = false;
            break;
        }
    }
    if total {
        report.notes.push(TOTAL_ORDER_NOTE.to_string());
    }
    Ok(report)
}

pub const TOTAL_ORDER_NOTE: &str = "order is total on samples";

/// `0`, a ladder `{1, 2, 5} x 10^k` from `1e-12` up to `bound`, and `bound`.
pub fn control_grid(bound: f64) -> Vec<f64> {
    let mut grid = vec![0.0];
    'outer: for k in -12..=308 {
        let decade = 10f64.powi(k);
        for m in [1.0, 2.0, 5.0] {
            let t = m * decade;
            if t >= bound {
                break 'outer;
            }
            grid.push(t);
        }
    }
    grid.push(bound);
    grid
}

/// Probes on `psi`: zero at the origin, positive, nondecreasing on the
/// sorted grid, and large at the growth bound. Continuity is assumed.
pub fn certify_control_function(
    space: &PartialMetricSpace,
    psi: &ControlFunction,
    grid: &[f64],
    eps_ax: f64,
) -> Result<CertificateReport, CertifyError> {
    if grid.is_empty() {
        return Err(CertifyError::NoSamples);
    }
    let ctx = CheckContext::new(space, eps_ax).with_psi(psi);
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let role = CheckRole::Hypothesis;
    let mut report = CertificateReport::new(0, sorted.len());
    report.checks.push(run_cases(
        Check::PsiZero,
        role,
        Coverage::Sampled,
        &ctx,
        [[Element::Scalar(0.0)]],
        &[],
    ));
    report.checks.push(run_cases(
        Check::PsiPositive,
        role,
        Coverage::Sampled,
        &ctx,
        sorted.iter().map(|&t| [Element::Scalar(t)]),
        &[],
    ));
    report.checks.push(run_cases(
        Check::PsiMonotone,
        role,
        Coverage::Sampled,
        &ctx,
        sorted
            .windows(2)
            .map(|w| [Element::Scalar(w[0]), Element::Scalar(w[1])]),
        &[],
    ));
    report.checks.push(run_cases(
        Check::PsiGrowth,
        role,
        Coverage::Probe,
        &ctx,
        [[Element::Scalar(psi.growth_bound())]],
        &[],
    ));
    report
        .notes
        .push("psi continuity is assumed, not certified".to_string());
    Ok(report)
}

/// The map stays in the carrier and preserves the order.
pub fn certify_monotone(
    space: &PartialMetricSpace,
    map: &SelfMap,
    order: &PartialOrder,
    samples: &SampleSet,
    eps_ax: f64,
) -> Result<CertificateReport, CertifyError> {
    require_samples(samples)?;
    let ctx = CheckContext::new(space, eps_ax)
        .with_order(order)
        .with_map(map);
    let cov = samples.coverage();
    let role = CheckRole::Hypothesis;
    let mut report = samples.report();
    report.checks.push(run_cases(
        Check::MapInCarrier,
        role,
        cov,
        &ctx,
        samples.singles(),
        &[],
    ));
    report.checks.push(run_cases(
        Check::Monotone,
        role,
        cov,
        &ctx,
        samples.pair_cases(),
        &[],
    ));
    Ok(report)
}

fn annotate_comparable_fraction(outcome: &mut CheckOutcome) {
    let considered = outcome.cases;
    let comparable = considered - outcome.skipped;
    let fraction = if considered == 0 {
        0.0
    } else {
        comparable as f64 / considered as f64
    };
    outcome
        .details
        .push(("comparable_fraction".to_string(), fraction));
    if fraction < LOW_COVERAGE {
        outcome.notes.push(format!(
            "low coverage: only {comparable} of {considered} sampled pairs are comparable"
        ));
    }
}

/// `p(fa,fb) <= p(a,b) - psi(p(a,b))` on comparable sampled pairs.
pub fn certify_weak_contraction(
    space: &PartialMetricSpace,
    order: &PartialOrder,
    map: &SelfMap,
    psi: &ControlFunction,
    samples: &SampleSet,
    eps_ax: f64,
) -> Result<CertificateReport, CertifyError> {
    require_samples(samples)?;
    let ctx = CheckContext::new(space, eps_ax)
        .with_order(order)
        .with_map(map)
        .with_psi(psi);
    let mut outcome = run_cases(
        Check::WeakContraction,
        CheckRole::Hypothesis,
        samples.coverage(),
        &ctx,
        samples.pair_cases(),
        &[],
    );
    annotate_comparable_fraction(&mut outcome);
    let mut report = samples.report();
    report.checks.push(outcome);
    Ok(report)
}

/// `p(fa,fb) <= c p(a,b)` on comparable sampled pairs.
pub fn certify_banach(
    space: &PartialMetricSpace,
    order: &PartialOrder,
    map: &SelfMap,
    c: f64,
    samples: &SampleSet,
    eps_ax: f64,
) -> Result<CertificateReport, CertifyError> {
    if !(0.0..1.0).contains(&c) {
        return Err(ModelError::BadBanachConstant(c).into());
    }
    require_samples(samples)?;
    let ctx = CheckContext::new(space, eps_ax)
        .with_order(order)
        .with_map(map)
        .with_banach(c);
    let mut outcome = run_cases(
        Check::Banach,
        CheckRole::Hypothesis,
        samples.coverage(),
        &ctx,
        samples.pair_cases(),
        &[],
    );
    annotate_comparable_fraction(&mut outcome);
    let mut report = samples.report();
    report.checks.push(outcome);
    Ok(report)
}

/// The control function `t -> (1 - c) t`.
pub fn psi_from_c(c: f64) -> Result<ControlFunction, CertifyError> {
    Ok(ControlFunction::from_banach(c)?)
}

fn comparability_candidates(space: &PartialMetricSpace, samples: &SampleSet) -> Vec<Element> {
    match space.size() {
        Some(n) if samples.exhaustive => (0..n).map(Element::Index).collect(),
        _ => samples
            .elements
            .iter()
            .take(COMPARABILITY_CANDIDATES)
            .copied()
            .collect(),
    }
}

/// For each sampled pair, some sampled point comparable with both.
pub fn certify_comparability_hypothesis(
    space: &PartialMetricSpace,
    order: &PartialOrder,
    samples: &SampleSet,
    eps_ax: f64,
) -> Result<CertificateReport, CertifyError> {
    require_samples(samples)?;
    let ctx = CheckContext::new(space, eps_ax).with_order(order);
    let candidates = comparability_candidates(space, samples);
    let mut report = samples.report();
    report.checks.push(run_cases(
        Check::Comparability,
        CheckRole::Uniqueness,
        samples.coverage(),
        &ctx,
        samples.pair_cases(),
        &candidates,
    ));
    Ok(report)
}

/// Hypothesis `x0 <= f(x0)`.
pub fn certify_initial_point(
    space: &PartialMetricSpace,
    order: &PartialOrder,
    map: &SelfMap,
    x0: &Element,
    eps_ax: f64,
) -> CertificateReport {
    let ctx = CheckContext::new(space, eps_ax)
        .with_order(order)
        .with_map(map);
    let mut report = CertificateReport::new(0, 1);
    report.checks.push(run_cases(
        Check::InitialBelowImage,
        CheckRole::Hypothesis,
        Coverage::Exhaustive,
        &ctx,
        [[*x0]],
        &[],
    ));
    report
}

/// A finite prefix of a sequence with its declared limit.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSequence {
    pub limit: Element,
    pub terms: Vec<Element>,
}

impl TestSequence {
    /// The last tenth of the terms, at least one.
    pub fn tail(&self) -> &[Element] {
        let k = self.terms.len();
        let len = k.div_ceil(10).max(1).min(k);
        &self.terms[k - len..]
    }
}

/// Sequences converging to sampled points: geometric approach from inside
/// an interval, or eventually constant on a finite carrier.
pub fn default_test_sequences(
    space: &PartialMetricSpace,
    samples: &SampleSet,
    seed: u64,
) -> Vec<TestSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x000c_0471_a0e5);
    let limits: Vec<Element> = samples.elements.iter().take(8).copied().collect();
    match space.carrier() {
        Carrier::Finite { table } => {
            let n = table.len();
            limits
                .into_iter()
                .map(|limit| {
                    let mut terms: Vec<Element> = (0..12)
                        .map(|_| Element::Index(rng.gen_range(0..n)))
                        .collect();
                    terms.extend(std::iter::repeat_n(limit, 4));
                    TestSequence { limit, terms }
                })
                .collect()
        }
        Carrier::Interval { lower, upper, .. } => limits
            .into_iter()
            .map(|limit| {
                let x = limit.as_scalar().unwrap_or(*lower);
                let up_room = upper - x;
                let down_room = x - lower;
                let (dir, room) = if up_room >= down_room {
                    (1.0, up_room)
                } else {
                    (-1.0, down_room)
                };
                let delta = room.min(1.0);
                let terms = (1..=64)
                    .map(|n| Element::Scalar(x + dir * delta * 0.5f64.powi(n)))
                    .collect();
                TestSequence { limit, terms }
            })
            .collect(),
    }
}

/// Sequential continuity probes: when tail terms approach the limit
/// (plainly, or properly in the induced metric), their images must
/// approach the image of the limit within `tol`.
pub fn probe_sequential_continuity(
    space: &PartialMetricSpace,
    map: &SelfMap,
    sequences: &[TestSequence],
    tol: f64,
    eps_ax: f64,
) -> Result<CertificateReport, CertifyError> {
    if let Some(i) = sequences.iter().position(|s| s.terms.is_empty()) {
        return Err(CertifyError::EmptySequence(i));
    }
    let ctx = CheckContext::new(space, eps_ax).with_map(map).with_tol(tol);
    let cases: Vec<[Element; 2]> = sequences
        .iter()
        .flat_map(|s| s.tail().iter().map(move |t| [s.limit, *t]))
        .collect();
    let mut report = CertificateReport::new(0, sequences.len());
    for check in [Check::ContinuityPlain, Check::ContinuityProper] {
        let mut outcome = run_cases(
            check,
            CheckRole::Hypothesis,
            Coverage::Probe,
            &ctx,
            cases.iter(),
            &[],
        );
        outcome.details.push(("tol".to_string(), tol));
        report.checks.push(outcome);
    }
    Ok(report)
}

pub const DEFAULT_PROBE_TOL: f64 = 1e-6;

/// Runs every certifier that applies to `instance`.
pub fn certify_instance(instance: &ProblemInstance) -> Result<CertificateReport, CertifyError> {
    let eps = instance.eps_ax;
    let samples = SampleSet::build(&instance.space, instance.sample_count, instance.seed);
    let mut report = CertificateReport::new(instance.seed, instance.sample_count);
    report.extend(certify_partial_metric(&instance.space, &samples, eps)?);
    report.extend(certify_induced_metric(&instance.space, &samples, eps)?);
    report.extend(certify_order(
        &instance.space,
        &instance.order,
        &samples,
        eps,
    )?);
    if let Some(psi) = &instance.psi {
        report.extend(certify_control_function(
            &instance.space,
            psi,
            &control_grid(psi.growth_bound()),
            eps,
        )?);
    }
    report.extend(certify_monotone(
        &instance.space,
        &instance.map,
        &instance.order,
        &samples,
        eps,
    )?);
    if let Some(psi) = &instance.psi {
        report.extend(certify_weak_contraction(
            &instance.space,
            &instance.order,
            &instance.map,
            psi,
            &samples,
            eps,
        )?);
    }
    if let Some(c) = instance.banach_c {
        report.extend(certify_banach(
            &instance.space,
            &instance.order,
            &instance.map,
            c,
            &samples,
            eps,
        )?);
    }
    report.extend(certify_initial_point(
        &instance.space,
        &instance.order,
        &instance.map,
        &instance.x0,
        eps,
    ));
    let sequences = default_test_sequences(&instance.space, &samples, instance.seed);
    report.extend(probe_sequential_continuity(
        &instance.space,
        &instance.map,
        &sequences,
        DEFAULT_PROBE_TOL,
        eps,
    )?);
    report.extend(certify_comparability_hypothesis(
        &instance.space,
        &instance.order,
        &samples,
        eps,
    )?);
    if samples.exhaustive {
        report.notes.push(format!(
            "finite carrier with {} points checked exhaustively",
            samples.elements.len()
        ));
    } else {
        report.notes.push(format!(
            "no violation claims cover {} seeded samples only",
            samples.elements.len()
        ));
    }
    Ok(report)
}

/// Re-evaluates a violation's check at its witness alone. Returns `true`
/// when the case still fails (or cannot be evaluated).
pub fn replay(violation: &Violation, instance: &ProblemInstance) -> Result<bool, CertifyError> {
    let check: Check = violation
        .check
        .parse()
        .map_err(CertifyError::UnknownCheck)?;
    if violation.witness.len() != check.arity() {
        return Err(CertifyError::UnknownCheck(format!(
            "{} expects {} witness elements, got {}",
            violation.check,
            check.arity(),
            violation.witness.len()
        )));
    }
    let derived_psi;
    let eps = violation
        .values
        .iter()
        .find(|(k, _)| k == "slack")
        .map_or(instance.eps_ax, |(_, v)| *v);
    let mut ctx = CheckContext::new(&instance.space, eps)
        .with_order(&instance.order)
        .with_map(&instance.map);
    if let Some(psi) = &instance.psi {
        ctx = ctx.with_psi(psi);
    } else if let Some(c) = instance.banach_c {
        derived_psi = ControlFunction::from_banach(c)?;
        ctx = ctx.with_psi(&derived_psi);
    }
    if let Some(c) = instance.banach_c {
        ctx = ctx.with_banach(c);
    }
    if let Some(tol) = violation
        .values
        .iter()
        .find(|(k, _)| k == "tol")
        .map(|(_, v)| *v)
    {
        ctx = ctx.with_tol(tol);
    }
    let candidates: Vec<Element> = match instance.space.size() {
        Some(n) if n <= EXHAUSTIVE_LIMIT => (0..n).map(Element::Index).collect(),
        _ => Vec::new(),
    };
    Ok(
        match check.evaluate(&ctx, &violation.witness, &candidates) {
            Ok(Case::Fail { .. }) | Err(_) => true,
            Ok(Case::Pass) | Ok(Case::Skip) => false,
        },
    )
}
