use pmfix::certify::{
    certify_banach, certify_instance, certify_weak_contraction, psi_from_c, SampleSet,
};
use pmfix::expr::{Env, Expr};
use pmfix::gallery::random_finite_instance;
use pmfix::model::{
    Carrier, ControlFunction, Element, PartialMetricSpace, PartialOrder, ProblemInstance, Relation,
    SelfMap,
};
use pmfix::solve::{descent_check, picard_solve};
use proptest::prelude::*;

fn ex(s: &str) -> Expr {
    Expr::parse(s).unwrap()
}

fn max_instance(a: f64, x0: f64) -> ProblemInstance {
    ProblemInstance {
        label: "affine".into(),
        space: PartialMetricSpace::interval(0.0, 1000.0, ex("max(x, y)"), "").unwrap(),
        order: PartialOrder::predicate(ex("x"), Relation::Eq, ex("max(x, y)"), "").unwrap(),
        map: SelfMap::scalar(Expr::parse(&format!("{a:?} * t")).unwrap(), "").unwrap(),
        psi: Some(
            ControlFunction::new(Expr::parse(&format!("{:?} * t", 1.0 - a)).unwrap()).unwrap(),
        ),
        banach_c: None,
        x0: Element::Scalar(x0),
        tol: 1e-9,
        max_iter: 100_000,
        sample_count: 200,
        seed: 3,
        eps_ax: 1e-9,
        confinement_eps: 0.1,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_tables_are_partial_metrics_with_metric_induced_forms(n in 1usize..=16, seed in any::<u64>()) {
        let entry = random_finite_instance(n, seed).unwrap();
        let Carrier::Finite { table } = entry.instance.space.carrier() else { unreachable!() };
        let ps = |i: usize, j: usize| 2.0 * table[i][j] - table[i][i] - table[j][j];
        for x in 0..n {
            prop_assert_eq!(ps(x, x), 0.0);
            for y in 0..n {
                prop_assert!(ps(x, y) >= 0.0);
                prop_assert_eq!(ps(x, y), ps(y, x));
                for z in 0..n {
                    prop_assert!(ps(x, z) <= ps(x, y) + ps(y, z));
                }
            }
        }
    }

    #[test]
    fn random_maps_are_monotone_and_start_below_their_image(n in 1usize..=16, seed in any::<u64>()) {
        let entry = random_finite_instance(n, seed).unwrap();
        let i = &entry.instance;
        for a in 0..n {
            for b in 0..n {
                let (a, b) = (Element::Index(a), Element::Index(b));
                if i.order.leq(&a, &b).unwrap() {
                    prop_assert!(i.order.leq(&i.map.apply(&a).unwrap(), &i.map.apply(&b).unwrap()).unwrap());
                }
            }
        }
        prop_assert!(i.order.leq(&i.x0, &i.map.apply(&i.x0).unwrap()).unwrap());
    }

    #[test]
    fn affine_contractions_converge_to_zero(a in 0.0f64..0.95, x0 in 0.0f64..1000.0) {
        let inst = max_instance(a, x0);
        let res = picard_solve(&inst).unwrap();
        let u = res.fixed_point.unwrap().as_scalar().unwrap();
        prop_assert!(u <= 1e-9);
        let d = descent_check(&inst.space, &res.trace, inst.psi.as_ref().unwrap(), 1e-12);
        prop_assert!(d.passed());
    }

    #[test]
    fn banach_and_derived_psi_agree(c in 0.05f64..0.95, a in 0.0f64..1.0, seed in any::<u64>()) {
        let inst = max_instance(a, 1.0);
        let samples = SampleSet::build(&inst.space, 100, seed);
        let b = certify_banach(&inst.space, &inst.order, &inst.map, c, &samples, 1e-9).unwrap();
        let psi = psi_from_c(c).unwrap();
        let w = certify_weak_contraction(&inst.space, &inst.order, &inst.map, &psi, &samples, 1e-9).unwrap();
        prop_assert_eq!(b.checks[0].status, w.checks[0].status);
        prop_assert_eq!(b.checks[0].violation_count, w.checks[0].violation_count);
    }

    #[test]
    fn certificates_are_seed_stable(seed in any::<u64>()) {
        let mut inst = max_instance(0.5, 1.0);
        inst.seed = seed;
        prop_assert_eq!(certify_instance(&inst).unwrap(), certify_instance(&inst).unwrap());
    }

    #[test]
    fn expressions_round_trip_through_display(a in 0.0f64..1e6, b in 1e-3f64..1e3, x in -10.0f64..10.0) {
        let text = format!("max(x, {a:?}) * (t - {b:?}) / {b:?} + abs(x - y)");
        let e = Expr::parse(&text).unwrap();
        let again = Expr::parse(&e.to_string()).unwrap();
        prop_assert_eq!(&again, &e);
        let env = Env::new().with(pmfix::expr::Var::X, x).with(pmfix::expr::Var::Y, -x).with(pmfix::expr::Var::T, x);
        prop_assert_eq!(again.evaluate(&env).unwrap(), e.evaluate(&env).unwrap());
    }
}
