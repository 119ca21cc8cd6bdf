use pmfix::certify::{certify_banach, certify_instance, CheckStatus, Coverage, SampleSet};
use pmfix::gallery::{self, random_finite_instance};
use pmfix::model::{Carrier, Element, MapKind};
use pmfix::solve::picard_solve;

const POSITIVE: [&str; 4] = ["max_half", "metric_half", "two_point_chain", "single_point"];

/// Follows the table from `x0`; `None` if the orbit closes into a cycle
/// of length two or more.
fn orbit_oracle(map: &[usize], x0: usize) -> Option<usize> {
    let mut x = x0;
    for _ in 0..=map.len() {
        if map[x] == x {
            return Some(x);
        }
        x = map[x];
    }
    None
}

#[test]
fn shipped_entries_pass_their_certificates() {
    for name in POSITIVE {
        let entry = gallery::by_name(name).unwrap();
        let report = certify_instance(&entry.instance).unwrap();
        assert!(
            report.all_pass(),
            "{name}: {:?}",
            report.violations().collect::<Vec<_>>()
        );
        if entry.instance.space.is_finite() {
            // psi lives on the real line and is always checked on a grid
            let carrier_checks = report
                .checks
                .iter()
                .filter(|c| c.coverage != Coverage::Probe && !c.name.starts_with("psi_"));
            for c in carrier_checks {
                assert_eq!(c.coverage, Coverage::Exhaustive, "{name}: {}", c.name);
            }
        }
    }
}

#[test]
fn negative_entries_fail_where_expected() {
    let r = certify_instance(&gallery::identity_quarter().instance).unwrap();
    assert_eq!(
        r.check("weak_contraction").unwrap().status,
        CheckStatus::Fail
    );
    let r = certify_instance(&gallery::antichain_identity().instance).unwrap();
    assert_eq!(r.check("comparability").unwrap().status, CheckStatus::Fail);
    assert!(r.hypotheses_hold());
    let r = certify_instance(&gallery::psi_zero_identity().instance).unwrap();
    assert_eq!(r.check("psi_positive").unwrap().status, CheckStatus::Fail);
}

#[test]
fn expected_fixed_points_are_reproduced() {
    for name in POSITIVE {
        let entry = gallery::by_name(name).unwrap();
        let expected = entry.expected.unwrap();
        let res = picard_solve(&entry.instance).unwrap();
        let u = res
            .fixed_point
            .unwrap_or_else(|| panic!("{name} did not converge"));
        let tol = entry.instance.tol;
        assert!(
            res.residual <= tol && res.self_distance_at_u <= tol,
            "{name}"
        );
        match (u, expected.fixed_point) {
            (Element::Index(a), Element::Index(b)) => assert_eq!(a, b, "{name}"),
            (Element::Scalar(a), Element::Scalar(b)) => {
                assert!((a - b).abs() <= 2.0 * tol, "{name}: {a}")
            }
            _ => panic!("{name}: kind mismatch"),
        }
        if let (MapKind::Finite(table), Element::Index(x0)) =
            (entry.instance.map.kind(), entry.instance.x0)
        {
            assert_eq!(orbit_oracle(table, x0), u.as_index(), "{name}");
        }
    }
}

#[test]
fn induced_metric_of_the_max_example_is_the_usual_metric() {
    let entry = gallery::max_half();
    let sp = &entry.instance.space;
    for e in sp.sample_elements(500, 17).windows(2) {
        let (x, y) = (e[0].as_scalar().unwrap(), e[1].as_scalar().unwrap());
        let d = sp.induced_distance(&e[0], &e[1]).unwrap();
        assert!((d - (x - y).abs()).abs() <= 1e-12 * x.max(y), "{x} {y} {d}");
    }
}

#[test]
fn metric_half_satisfies_the_banach_condition() {
    let entry = gallery::metric_half();
    let i = &entry.instance;
    let samples = SampleSet::build(&i.space, 2000, 3);
    let r = certify_banach(&i.space, &i.order, &i.map, 0.5, &samples, i.eps_ax).unwrap();
    assert!(r.all_pass());
    let res = picard_solve(i).unwrap();
    assert!(res.fixed_point.unwrap().as_scalar().unwrap() < 1e-8);
}

#[test]
fn random_entry_four_seven_is_a_partial_metric() {
    let entry = random_finite_instance(4, 7).unwrap();
    let Carrier::Finite { table } = entry.instance.space.carrier() else {
        panic!()
    };
    let n = table.len();
    assert_eq!(n, 4);
    let p = |i: usize, j: usize| table[i][j];
    for x in 0..n {
        for y in 0..n {
            assert!(p(x, x) <= p(x, y));
            assert_eq!(p(x, y), p(y, x));
            if x != y {
                assert!(!(p(x, x) == p(x, y) && p(x, y) == p(y, y)));
            }
            for z in 0..n {
                assert!(p(x, z) <= p(x, y) + p(y, z) - p(y, y));
            }
        }
    }
    assert_eq!(entry, random_finite_instance(4, 7).unwrap());
}

#[test]
fn random_entries_agree_with_the_orbit_oracle() {
    for seed in 0..40 {
        let n = 1 + (seed as usize % 16);
        let entry = random_finite_instance(n, seed).unwrap();
        let MapKind::Finite(table) = entry.instance.map.kind() else {
            panic!()
        };
        let x0 = entry.instance.x0.as_index().unwrap();
        let oracle = orbit_oracle(table, x0);
        assert_eq!(
            entry.expected.map(|e| e.fixed_point.as_index().unwrap()),
            oracle
        );
        let res = picard_solve(&entry.instance).unwrap();
        if let Some(u) = oracle {
            assert_eq!(res.fixed_point, Some(Element::Index(u)), "seed {seed}");
        }
    }
}
