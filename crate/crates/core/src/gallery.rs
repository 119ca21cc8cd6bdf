//! Built-in instances: the max-metric example, a metric-space
//! specialization, small finite chains and a seeded finite generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::certify::{certify_partial_metric, SampleSet};
use crate::expr::{Env, Expr};
use crate::model::{
    ControlFunction, Element, ModelError, PartialMetricSpace, PartialOrder, ProblemInstance,
    Relation, SelfMap, DEFAULT_EPS_AX, DEFAULT_MAX_ITER, DEFAULT_TOL, DEFAULT_UPPER,
};

pub const MAX_RANDOM_SIZE: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalleryError {
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("metric has nonzero self-distance {value} at {at}")]
    NonzeroDiagonal { at: Element, value: f64 },
    #[error("random instance size {0} is outside 1..={MAX_RANDOM_SIZE}")]
    BadSize(usize),
    #[error("generated table failed its exhaustive check: {0}")]
    Generator(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expected {
    pub fixed_point: Element,
    pub self_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryEntry {
    pub name: String,
    pub instance: ProblemInstance,
    pub expected: Option<Expected>,
    pub notes: String,
}

fn parse(text: &str) -> Expr {
    Expr::parse(text).expect("built-in expression parses")
}

fn base_instance(
    label: &str,
    space: PartialMetricSpace,
    order: PartialOrder,
    map: SelfMap,
    x0: Element,
) -> ProblemInstance {
    ProblemInstance {
        label: label.to_string(),
        space,
        order,
        map,
        psi: None,
        banach_c: None,
        x0,
        tol: DEFAULT_TOL,
        max_iter: DEFAULT_MAX_ITER,
        sample_count: 1000,
        seed: 1,
        eps_ax: DEFAULT_EPS_AX,
        confinement_eps: 0.1,
    }
}

/// `X = [0, 1000]`, `p(x,y) = max(x,y)`, `x <=_X y` iff `x = max(x,y)`,
/// `f(t) = t/2`, `psi(t) = t/4`, start at 1. The unique fixed point is 0.
pub fn max_half() -> GalleryEntry {
    let space =
        PartialMetricSpace::interval(0.0, DEFAULT_UPPER, parse("max(x, y)"), "max partial metric")
            .unwrap();
    let order = PartialOrder::predicate(
        parse("x"),
        Relation::Eq,
        parse("max(x, y)"),
        "x = max(x, y)",
    )
    .unwrap();
    let map = SelfMap::scalar(parse("t / 2"), "halving").unwrap();
    let mut instance = base_instance("max_half", space, order, map, Element::Scalar(1.0));
    instance.psi = Some(ControlFunction::new(parse("t / 4")).unwrap());
    instance.sample_count = 10_000;
    GalleryEntry {
        name: "max_half".to_string(),
        instance,
        expected: Some(Expected {
            fixed_point: Element::Scalar(0.0),
            self_distance: 0.0,
        }),
        notes: "max partial metric on [0, 1000] with the halving map; unique fixed point 0"
            .to_string(),
    }
}

/// An ordinary metric to wrap as a partial metric with zero self-distances.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricDescription {
    Table(Vec<Vec<f64>>),
    Expression { lower: f64, upper: f64, d: Expr },
}

/// Wraps a metric `d` as the partial metric `p = d`; then `p^s = 2d`.
pub fn metric_embedding(
    desc: MetricDescription,
    label: &str,
) -> Result<PartialMetricSpace, GalleryError> {
    match desc {
        MetricDescription::Table(table) => {
            for (i, row) in table.iter().enumerate() {
                if let Some(&v) = row.get(i) {
                    if v != 0.0 {
                        return Err(GalleryError::NonzeroDiagonal {
                            at: Element::Index(i),
                            value: v,
                        });
                    }
                }
            }
            Ok(PartialMetricSpace::finite(table, label)?)
        }
        MetricDescription::Expression { lower, upper, d } => {
            let space = PartialMetricSpace::interval(lower, upper, d.clone(), label)?;
            for probe in space.sample_elements(32, 0) {
                let x = probe.as_scalar().unwrap_or(lower);
                let v = d.evaluate(&Env::pair(x, x)).map_err(ModelError::from)?;
                if v != 0.0 {
                    return Err(GalleryError::NonzeroDiagonal {
                        at: probe,
                        value: v,
                    });
                }
            }
            Ok(space)
        }
    }
}

/// `d(x,y) = |x - y|` on `[0, 1000]` with the reversed order, halving map
/// and contraction constant 1/2.
pub fn metric_half() -> GalleryEntry {
    let space = metric_embedding(
        MetricDescription::Expression {
            lower: 0.0,
            upper: DEFAULT_UPPER,
            d: parse("abs(x - y)"),
        },
        "absolute-value metric",
    )
    .unwrap();
    let order = PartialOrder::predicate(parse("x"), Relation::Geq, parse("y"), "x >= y").unwrap();
    let map = SelfMap::scalar(parse("t / 2"), "halving").unwrap();
    let mut instance = base_instance("metric_half", space, order, map, Element::Scalar(1.0));
    instance.banach_c = Some(0.5);
    GalleryEntry {
        name: "metric_half".to_string(),
        instance,
        expected: Some(Expected {
            fixed_point: Element::Scalar(0.0),
            self_distance: 0.0,
        }),
        notes: "zero self-distance case: ordinary metric |x - y|, Banach constant 1/2".to_string(),
    }
}

/// Two points with `1 <= 0`, `p = [[0,1],[1,1]]`, constant map to 0,
/// `psi(t) = t/2`, start at 1. The orbit is 1, 0, 0.
pub fn two_point_chain() -> GalleryEntry {
    let space = PartialMetricSpace::finite(vec![vec![0.0, 1.0], vec![1.0, 1.0]], "two-point chain")
        .unwrap();
    let order = PartialOrder::from_pairs(2, &[(1, 0)], "1 <= 0").unwrap();
    let map = SelfMap::finite(vec![0, 0], "constant 0").unwrap();
    let mut instance = base_instance("two_point_chain", space, order, map, Element::Index(1));
    instance.psi = Some(ControlFunction::new(parse("t / 2")).unwrap());
    GalleryEntry {
        name: "two_point_chain".to_string(),
        instance,
        expected: Some(Expected {
            fixed_point: Element::Index(0),
            self_distance: 0.0,
        }),
        notes: "finite chain with a positive self-distance at the start point".to_string(),
    }
}

/// The one-point metric space; every map fixes its point.
pub fn single_point() -> GalleryEntry {
    let space =
        metric_embedding(MetricDescription::Table(vec![vec![0.0]]), "single point").unwrap();
    let order = PartialOrder::from_pairs(1, &[], "trivial").unwrap();
    let map = SelfMap::finite(vec![0], "identity").unwrap();
    let mut instance = base_instance("single_point", space, order, map, Element::Index(0));
    instance.psi = Some(ControlFunction::new(parse("t / 2")).unwrap());
    GalleryEntry {
        name: "single_point".to_string(),
        instance,
        expected: Some(Expected {
            fixed_point: Element::Index(0),
            self_distance: 0.0,
        }),
        notes: "trivial metric space".to_string(),
    }
}

/// Identity map on the max metric with `psi(t) = t/4`: violates the weak
/// contraction at every comparable pair with positive distance.
pub fn identity_quarter() -> GalleryEntry {
    let mut entry = max_half();
    entry.name = "identity_quarter".to_string();
    entry.instance.label = "identity_quarter".to_string();
    entry.instance.map = SelfMap::scalar(parse("t"), "identity").unwrap();
    entry.expected = None;
    entry.notes = "negative example: identity is not a weak contraction".to_string();
    entry
}

/// Identity map on a two-point antichain: two fixed points, no point
/// comparable with both.
pub fn antichain_identity() -> GalleryEntry {
    let space =
        PartialMetricSpace::finite(vec![vec![0.0, 1.0], vec![1.0, 0.0]], "two-point antichain")
            .unwrap();
    let order = PartialOrder::from_pairs(2, &[], "antichain").unwrap();
    let map = SelfMap::finite(vec![0, 1], "identity").unwrap();
    let mut instance = base_instance("antichain_identity", space, order, map, Element::Index(0));
    instance.psi = Some(ControlFunction::new(parse("t / 4")).unwrap());
    GalleryEntry {
        name: "antichain_identity".to_string(),
        instance,
        expected: None,
        notes: "negative example: fixed points 0 and 1 without the comparability hypothesis"
            .to_string(),
    }
}

/// Identity map on the max metric with `psi = 0`.
pub fn psi_zero_identity() -> GalleryEntry {
    let mut entry = identity_quarter();
    entry.name = "psi_zero_identity".to_string();
    entry.instance.label = "psi_zero_identity".to_string();
    entry.instance.psi = Some(ControlFunction::new(parse("t - t")).unwrap());
    entry.notes = "negative example: psi is not positive".to_string();
    entry
}

/// Names accepted by [`by_name`] besides `random-<n>-<seed>`.
pub fn names() -> Vec<&'static str> {
    vec![
        "max_half",
        "metric_half",
        "two_point_chain",
        "single_point",
        "identity_quarter",
        "antichain_identity",
        "psi_zero_identity",
    ]
}

pub fn by_name(name: &str) -> Option<GalleryEntry> {
    match name {
        "max_half" => Some(max_half()),
        "metric_half" => Some(metric_half()),
        "two_point_chain" => Some(two_point_chain()),
        "single_point" => Some(single_point()),
        "identity_quarter" => Some(identity_quarter()),
        "antichain_identity" => Some(antichain_identity()),
        "psi_zero_identity" => Some(psi_zero_identity()),
        _ => {
            let rest = name.strip_prefix("random-")?;
            let (n, seed) = rest.split_once('-')?;
            random_finite_instance(n.parse().ok()?, seed.parse().ok()?).ok()
        }
    }
}

/// Follows the map table from `x0` until a point repeats. Returns the
/// fixed point if the orbit settles on one, `None` on a longer cycle.
pub fn orbit_fixed_point(map: &[usize], x0: usize) -> Option<usize> {
    let mut seen = vec![false; map.len()];
    let mut x = x0;
    loop {
        let next = map[x];
        if next == x {
            return Some(x);
        }
        if seen[x] {
            return None;
        }
        seen[x] = true;
        x = next;
    }
}

/// Seeded finite instance with `n <= 16` points.
///
/// The order is the transitive closure of random forward edges plus a
/// bottom `0` and top `n - 1`, so index order is a linear extension. The
/// map is built monotone in that order and `x0` is drawn from the points
/// below their image. Distances are `max(r_i, r_j) + d(i, j)` with `d` a
/// random integer table clamped to a metric by shortest paths and
/// `r_i = 0` at fixed points of the map.
pub fn random_finite_instance(n: usize, seed: u64) -> Result<GalleryEntry, GalleryError> {
    if n == 0 || n > MAX_RANDOM_SIZE {
        return Err(GalleryError::BadSize(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut le = vec![vec![false; n]; n];
    for i in 0..n {
        le[i][i] = true;
        le[0][i] = true;
        le[i][n - 1] = true;
        for j in i + 1..n {
            if rng.gen_bool(0.35) {
                le[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if le[i][k] {
                for j in 0..n {
                    if le[k][j] {
                        le[i][j] = true;
                    }
                }
            }
        }
    }

    let mut map = vec![0usize; n];
    for j in 0..n {
        let candidates: Vec<usize> = (0..n)
            .filter(|&v| (0..j).all(|i| !le[i][j] || le[map[i]][v]))
            .collect();
        map[j] = *candidates
            .choose(&mut rng)
            .expect("top element is always a candidate");
    }

    let starts: Vec<usize> = (0..n).filter(|&x| le[x][map[x]]).collect();
    let x0 = *starts
        .choose(&mut rng)
        .expect("bottom element is below its image");

    let mut d = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(1..=4) as f64;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let r: Vec<f64> = (0..n)
        .map(|i| {
            if map[i] == i {
                0.0
            } else {
                rng.gen_range(0..=3) as f64
            }
        })
        .collect();
    let table: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        r[i]
                    } else {
                        r[i].max(r[j]) + d[i][j]
                    }
                })
                .collect()
        })
        .collect();

    let label = format!("random-{n}-{seed}");
    let space = PartialMetricSpace::finite(table, label.clone())?;
    let check = certify_partial_metric(&space, &SampleSet::build(&space, n, seed), DEFAULT_EPS_AX)
        .map_err(|e| GalleryError::Generator(e.to_string()))?;
    if let Some(v) = check.violations().next() {
        return Err(GalleryError::Generator(format!(
            "{} at {:?}",
            v.check, v.witness
        )));
    }
    let order = PartialOrder::finite(le, "random extension of a chain")?;
    let self_map = SelfMap::finite(map.clone(), "random monotone map")?;
    let mut instance = base_instance(&label, space, order, self_map, Element::Index(x0));
    instance.psi = Some(ControlFunction::new(parse("t / 2"))?);
    instance.sample_count = n;
    instance.seed = seed;

    let expected = orbit_fixed_point(&map, x0).map(|u| Expected {
        fixed_point: Element::Index(u),
        self_distance: 0.0,
    });
    Ok(GalleryEntry {
        name: label,
        instance,
        expected,
        notes: "seeded finite instance; expected value from orbit enumeration".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_embedding_rejects_nonzero_diagonal() {
        let err = metric_embedding(MetricDescription::Table(vec![vec![1.0]]), "").unwrap_err();
        assert_eq!(
            err,
            GalleryError::NonzeroDiagonal {
                at: Element::Index(0),
                value: 1.0
            }
        );
        let err = metric_embedding(
            MetricDescription::Expression {
                lower: 0.0,
                upper: 10.0,
                d: parse("max(x, y)"),
            },
            "",
        )
        .unwrap_err();
        assert!(matches!(err, GalleryError::NonzeroDiagonal { .. }));
    }

    #[test]
    fn embedded_metric_doubles_in_induced_form() {
        let sp = metric_embedding(
            MetricDescription::Expression {
                lower: 0.0,
                upper: 10.0,
                d: parse("abs(x - y)"),
            },
            "",
        )
        .unwrap();
        let (a, b) = (Element::Scalar(2.0), Element::Scalar(7.5));
        assert_eq!(
            sp.induced_distance(&a, &b).unwrap(),
            2.0 * sp.distance(&a, &b).unwrap()
        );
    }

    #[test]
    fn random_sizes_are_bounded() {
        assert_eq!(
            random_finite_instance(0, 1).unwrap_err(),
            GalleryError::BadSize(0)
        );
        assert_eq!(
            random_finite_instance(17, 1).unwrap_err(),
            GalleryError::BadSize(17)
        );
    }

    #[test]
    fn single_point_random_instance() {
        let e = random_finite_instance(1, 9).unwrap();
        assert_eq!(e.instance.x0, Element::Index(0));
        assert_eq!(e.expected.unwrap().fixed_point, Element::Index(0));
    }

    #[test]
    fn random_instance_is_deterministic() {
        assert_eq!(
            random_finite_instance(4, 7).unwrap(),
            random_finite_instance(4, 7).unwrap()
        );
        assert_ne!(
            random_finite_instance(8, 7).unwrap(),
            random_finite_instance(8, 8).unwrap()
        );
    }

    #[test]
    fn orbit_oracle() {
        assert_eq!(orbit_fixed_point(&[1, 2, 2], 0), Some(2));
        assert_eq!(orbit_fixed_point(&[1, 0], 0), None);
        assert_eq!(orbit_fixed_point(&[0], 0), Some(0));
    }

    #[test]
    fn lookup_by_name() {
        for name in names() {
            assert_eq!(by_name(name).unwrap().name, name);
        }
        assert_eq!(
            by_name("random-4-7").unwrap(),
            random_finite_instance(4, 7).unwrap()
        );
        assert!(by_name("nope").is_none());
        assert!(by_name("random-40-1").is_none());
    }
}
