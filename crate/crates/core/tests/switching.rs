mod common;

use std::collections::BTreeMap;

use common::{case_grid, case_instance, CASE_FORMULA};
use proptest::prelude::*;
use tlswitch::harness::{Instance, TaskSource};
use tlswitch::model::RewardCell;
use tlswitch::reachability::BoundKind;
use tlswitch::switching::{
    train, wilson_bounds, Mode, SwitchStats, TrainConfig, TrainError, TrainOutput,
};

fn run(inst: &Instance, pr_des: f64, episodes: u64, seed: u64, tweak: impl FnOnce(&mut TrainConfig)) -> Result<TrainOutput, TrainError> {
    let rec = inst.bounds(BoundKind::Recursive).unwrap();
    let mut cfg = TrainConfig::new(pr_des, episodes, inst.horizon, inst.world.start_state(), seed);
    tweak(&mut cfg);
    train(&inst.mdp, &inst.product, &inst.analysis.policy, Some(&rec), &cfg)
}

#[test]
fn wilson_reference_value() {
    let (low, up) = wilson_bounds(10, 0, 2.58);
    assert!((low - 0.60037).abs() < 1e-5, "{low}");
    assert_eq!(up, 1.0);
}

#[test]
fn training_is_reproducible() {
    let inst = case_instance(CASE_FORMULA, 0.2);
    let a = run(&inst, 0.7, 150, 5, |_| {}).unwrap();
    let b = run(&inst, 0.7, 150, 5, |_| {}).unwrap();
    let c = run(&inst, 0.7, 150, 6, |_| {}).unwrap();
    assert_eq!(a.episodes, b.episodes);
    assert_eq!(a.qtable.values(), b.qtable.values());
    assert_ne!(a.episodes, c.episodes);
}

#[test]
fn switching_rules_hold_on_a_run() {
    let inst = case_instance(CASE_FORMULA, 0.2);
    let out = run(&inst, 0.7, 400, 1, |_| {}).unwrap();

    // every initial state is sampled with the go policy first
    let mut seen: BTreeMap<usize, u64> = BTreeMap::new();
    for e in &out.episodes {
        let n = seen.entry(e.p0).or_default();
        if *n < out.stats.n_sample {
            assert_eq!(e.mode, Mode::Go, "episode {}", e.episode);
        }
        if e.mode == Mode::Go {
            *n += 1;
        }
    }
    assert!(out.episodes.iter().any(|e| e.mode == Mode::Rl));

    // statistics come from go episodes only
    let mut replay = SwitchStats::new(out.stats.z, out.stats.pr_des, out.stats.n_sample);
    for e in out.episodes.iter().filter(|e| e.mode == Mode::Go) {
        replay.update(e.p0, e.satisfied);
    }
    assert_eq!(replay, out.stats);

    for w in out.episodes.windows(2) {
        assert!(w[1].explore_rate <= w[0].explore_rate);
    }
    for e in &out.episodes {
        assert_eq!(e.satisfied, e.steps_to_accept.is_some());
        if let Some(t) = e.steps_to_accept {
            assert!(t <= inst.horizon);
        }
    }
}

#[test]
fn counting_rl_episodes_changes_the_statistics() {
    let inst = case_instance(CASE_FORMULA, 0.2);
    let out = run(&inst, 0.7, 300, 1, |c| c.count_rl_episodes = true).unwrap();
    let total: u64 = out.stats.states.values().map(|s| s.n).sum();
    assert_eq!(total, 300);
}

#[test]
fn full_target_always_goes() {
    let inst = case_instance(CASE_FORMULA, 0.2);
    let out = run(&inst, 1.0, 120, 3, |c| c.force = true).unwrap();
    assert!(out.episodes.iter().all(|e| e.mode == Mode::Go));
}

#[test]
fn uncertified_target_is_refused() {
    let inst = case_instance(CASE_FORMULA, 0.2);
    let closed = inst.bounds(BoundKind::Closed).unwrap();
    let cfg = TrainConfig::new(0.9999, 10, inst.horizon, inst.world.start_state(), 3);
    match train(&inst.mdp, &inst.product, &inst.analysis.policy, Some(&closed), &cfg) {
        Err(TrainError::NotCertified { failures, .. }) => assert!(!failures.is_empty()),
        other => panic!("{other:?}"),
    }
    let cfg = TrainConfig::new(0.7, 10, inst.horizon, inst.world.start_state(), 0);
    let err = train(&inst.mdp, &inst.product, &inst.analysis.policy, None, &cfg).unwrap_err();
    assert!(matches!(err, TrainError::NoCertificate));
}

#[test]
fn overflowing_q_values_are_reported() {
    let mut grid = case_grid();
    grid.rewards = (0..8)
        .flat_map(|x| (0..8).map(move |y| (x, y)))
        .filter(|&(x, y)| !grid.obstacles.contains(&tlswitch::model::Cell(x, y)))
        .map(|(x, y)| RewardCell {
            cell: tlswitch::model::Cell(x, y),
            value: 1e308,
        })
        .collect();
    let inst = Instance::build(&grid, &TaskSource::Formula(CASE_FORMULA.into()), Some(0.2)).unwrap();
    let err = run(&inst, 0.7, 50, 0, |c| {
        c.force = true;
        c.alpha = 1.0;
        c.gamma = 1.0;
        c.n_sample = 0;
    })
    .unwrap_err();
    assert!(matches!(err, TrainError::NonFiniteQ { .. }), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn wilson_brackets_the_rate(ns in 0u64..500, nf in 0u64..500, z in 0.1f64..4.0) {
        prop_assume!(ns + nf > 0);
        let (low, up) = wilson_bounds(ns, nf, z);
        let rate = ns as f64 / (ns + nf) as f64;
        prop_assert!(0.0 <= low && low <= rate && rate <= up && up <= 1.0);
    }

    #[test]
    fn stats_invariants(outcomes in prop::collection::vec(any::<bool>(), 0..80), pr_des in 0.05f64..1.0) {
        let mut s = SwitchStats::new(2.58, pr_des, 30);
        for &o in &outcomes {
            s.update(0, o);
        }
        let st = s.get(0);
        prop_assert_eq!(st.n, outcomes.len() as u64);
        prop_assert_eq!(st.n, st.n_s + st.n_f);
        prop_assert!(st.pr_low <= st.pr_up);
        prop_assert!(st.pr_switch > 0.0 && st.pr_switch <= 1.0);
        if st.n < 30 {
            prop_assert_eq!(st.pr_switch, 1.0);
            prop_assert!(s.needs_samples(0));
        } else if st.pr_low > 0.0 {
            prop_assert!((st.pr_switch - (pr_des / st.pr_low).min(1.0)).abs() < 1e-15);
        }
    }
}
