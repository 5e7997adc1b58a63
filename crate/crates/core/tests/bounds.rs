mod common;

use common::{brute_force_lp, case_instance, corridor_json, CASE_FORMULA, TABLE_FORMULA};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tlswitch::harness::{Instance, TaskSource};
use tlswitch::model::GridConfig;
use tlswitch::reachability::{
    closed_form_lb, solve_worst_case_lp, walk_oracle, BoundError, BoundKind, BoundTable,
};

const EPS_GRID: [f64; 4] = [0.05, 0.1, 0.2, 0.3];

#[test]
fn closed_form_matches_walk_oracle_on_grid() {
    let mut cases = 0;
    for d in 1..=6 {
        for k in 1..=30 {
            for eps in EPS_GRID {
                for dm in 1..=3 {
                    let got = closed_form_lb(d, k, eps, dm).unwrap();
                    let want = walk_oracle(d, k, eps, dm);
                    assert!(
                        (got - want).abs() <= 1e-9,
                        "d={d} k={k} eps={eps} dm={dm}: {got} vs {want}"
                    );
                    cases += 1;
                }
            }
        }
    }
    assert_eq!(cases, 2160);
}

#[test]
fn lp_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut infeasible = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=4);
        let n_likely = rng.gen_range(0..=n);
        let values: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let eps_units = rng.gen_range(0..=600i64);
        let eps = eps_units as f64 / 1000.0;
        let (likely, other) = values.split_at(n_likely);
        let brute = brute_force_lp(likely, other, 1000 - eps_units, 1000);
        match (solve_worst_case_lp(likely, other, eps), brute) {
            (Ok(v), Some(b)) => assert!((v - b).abs() <= 1e-3, "{likely:?} {other:?} {eps}: {v} vs {b}"),
            (Err(BoundError::InfeasibleLp { .. }), None) => infeasible += 1,
            (got, want) => panic!("{likely:?} {other:?} {eps}: {got:?} vs {want:?}"),
        }
    }
    assert!(infeasible > 0 && infeasible < 500);
}

fn check_table(t: &BoundTable, accepting: impl Fn(usize) -> bool) {
    for p in 0..t.num_states() {
        let mut prev = 0.0;
        for k in 0..=t.horizon() {
            let v = t.get(k, p);
            assert!((0.0..=1.0).contains(&v), "lb({k},{p}) = {v}");
            assert!(v + 1e-12 >= prev, "lb not monotone in k at p={p}, k={k}");
            prev = v;
        }
        if accepting(p) {
            assert_eq!(t.get(0, p), 1.0);
        }
    }
}

#[test]
fn case_study_tables_are_monotone_probabilities() {
    for eps in [0.1, 0.2] {
        let inst = case_instance(CASE_FORMULA, eps);
        assert!(inst.analysis.delta_max.assumption_holds());
        for kind in [BoundKind::Closed, BoundKind::Recursive] {
            let t = inst.bounds(kind).unwrap();
            assert_eq!(t.horizon(), 62);
            check_table(&t, |p| inst.product.is_accepting(p));
        }
    }
}

#[test]
fn table1_recursive_dominates_closed() {
    let inst = case_instance(TABLE_FORMULA, 0.2);
    let closed = inst.bounds(BoundKind::Closed).unwrap();
    let rec = inst.bounds(BoundKind::Recursive).unwrap();
    for prop in ["Base", "P"] {
        let s = inst.world.labeled_state(prop).unwrap();
        let p = inst.product.initial_for(s);
        assert!(rec.get(17, p) >= closed.get(17, p) + 0.05, "{prop}");
    }
}

fn corridor(len: i32, forward: f64, eps: f64, formula: &str) -> Instance {
    let grid = GridConfig::from_json(&corridor_json(len, forward)).unwrap();
    Instance::build(&grid, &TaskSource::Formula(formula.into()), Some(eps)).unwrap()
}

#[test]
fn corridor_closed_form_is_a_walk() {
    // Goal three cells away; from the start the distance is 3 and drifting
    // never increases it by more than one.
    let inst = corridor(4, 0.9, 0.1, "[H^0 A]^[0,10]");
    let p0 = inst.start_p0();
    assert_eq!(inst.analysis.distances.get(p0), Some(3));
    let closed = inst.bounds(BoundKind::Closed).unwrap();
    let dm = inst.analysis.delta_max.effective();
    for k in 0..=10 {
        let want = walk_oracle(3, k, 0.1, dm);
        assert!((closed.get(k, p0) - want).abs() < 1e-12);
    }
    assert_eq!(closed.get(2, p0), 0.0);
}

#[test]
fn long_hold_raises_delta_max() {
    // Leaving the goal cell mid-hold resets the hold, so the distance can
    // jump by the whole hold length in one step.
    let inst = corridor(3, 0.9, 0.1, "[H^3 A]^[0,10]");
    assert!(inst.analysis.delta_max.value >= 3, "{:?}", inst.analysis.delta_max);
}

#[test]
fn uncertainty_below_slip_breaks_nothing_in_recursion() {
    // eps smaller than the true slip still yields a table; only validity
    // against simulation is lost, which the acceptance test covers.
    let inst = corridor(4, 0.9, 0.01, "[H^0 A]^[0,10]");
    let rec = inst.bounds(BoundKind::Recursive).unwrap();
    check_table(&rec, |p| inst.product.is_accepting(p));
}

proptest! {
    #[test]
    fn closed_form_matches_oracle(d in 1u64..12, k in 0u64..60, eps in 0.0f64..0.6, dm in 1u64..5) {
        let got = closed_form_lb(d, k, eps, dm).unwrap();
        prop_assert!((got - walk_oracle(d, k, eps, dm)).abs() <= 1e-9);
    }

    #[test]
    fn closed_form_monotone(d in 1u64..10, k in 0u64..40, eps in 0.0f64..0.5, dm in 1u64..4) {
        let a = closed_form_lb(d, k, eps, dm).unwrap();
        let b = closed_form_lb(d, k + 1, eps, dm).unwrap();
        let c = closed_form_lb(d + 1, k, eps, dm).unwrap();
        prop_assert!(b + 1e-12 >= a);
        prop_assert!(a + 1e-12 >= c);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn lp_value_between_min_and_max(
        values in prop::collection::vec(0.0f64..1.0, 1..6),
        split in 0usize..6,
        eps in 0.0f64..0.9,
    ) {
        let split = split.min(values.len());
        let (likely, other) = values.split_at(split);
        if let Ok(v) = solve_worst_case_lp(likely, other, eps) {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(0.0, f64::max);
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        } else {
            prop_assert!(split as f64 * (1.0 - eps) > 1.0);
        }
    }
}
