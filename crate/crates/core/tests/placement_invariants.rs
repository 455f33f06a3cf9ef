use ballast_core::analysis::{
    check_claim1, default_epsilon_grid, exact_placement_probs, forbidden_set, placement_probs_f64, reachable_states,
    sweep_claim1, SweepConfig,
};
use ballast_core::experiment::{build_policy, PolicyKind, PolicyParams};
use ballast_core::policies::toy::{ToyPolicy, ToyRule};
use ballast_core::policies::{ClusterConfig, ClusteredPolicy, GreedyTwoChoice, OneChoice, Policy, Rational};
use ballast_core::sim::{simulate_run, SimConfig};
use proptest::prelude::*;

fn r(a: i64, b: i64) -> Rational {
    Rational::new(a, b)
}

fn fresh(mut p: impl Policy + 'static, n: usize) -> Box<dyn Policy> {
    p.reset(n, n as u64);
    Box::new(p)
}

// Hand-enumerated over the n² ordered pairs.
#[test]
fn hand_computed_distributions() {
    let one = exact_placement_probs(fresh(OneChoice::new(), 5).as_ref(), 5).unwrap();
    assert!(one.probs.iter().all(|&p| p == r(1, 5)));

    let g = GreedyTwoChoice::with_loads(vec![0, 1], 1);
    assert_eq!(exact_placement_probs(&g, 2).unwrap().probs, vec![r(3, 4), r(1, 4)]);

    // loads 0,0,1: bin 2 only wins the pair (2,2)
    let g = GreedyTwoChoice::with_loads(vec![0, 0, 1], 1);
    assert_eq!(
        exact_placement_probs(&g, 3).unwrap().probs,
        vec![r(4, 9), r(4, 9), r(1, 9)]
    );

    let mx = fresh(ToyPolicy::new(ToyRule::MaxIndex), 3);
    assert_eq!(
        exact_placement_probs(mx.as_ref(), 3).unwrap().probs,
        vec![r(1, 9), r(3, 9), r(5, 9)]
    );

    let bf = fresh(ToyPolicy::new(ToyRule::BiasedFirst), 2);
    assert_eq!(
        exact_placement_probs(bf.as_ref(), 2).unwrap().probs,
        vec![r(1, 2), r(1, 2)]
    );
}

#[test]
fn two_bin_max_index_examples() {
    let mx = fresh(ToyPolicy::new(ToyRule::MaxIndex), 2);
    let p = exact_placement_probs(mx.as_ref(), 2).unwrap();
    assert_eq!(p.probs, vec![r(1, 4), r(3, 4)]);
    assert!(forbidden_set(&p, r(2, 5)).unwrap().is_empty());
    assert_eq!(forbidden_set(&p, r(3, 5)).unwrap().members, vec![0]);
    let rep = check_claim1(&p, r(3, 5), &[0]).unwrap();
    assert_eq!((rep.lhs, rep.rhs), (0.25, 0.0));
    assert!(rep.part1_ok && rep.part2_ok);
    assert!((rep.epsilon_n - 1.2).abs() < 1e-15);
}

/// Every toy rule, n <= 8, epsilon in tenths, all 2^n subsets.
#[test]
fn toy_rules_brute_force() {
    let tenths: Vec<Rational> = (1..10).map(|k| r(k, 10)).collect();
    for rule in [ToyRule::MaxIndex, ToyRule::MinIndex, ToyRule::BiasedFirst] {
        for n in 1..=8usize {
            let p = fresh(ToyPolicy::new(rule), n);
            let probs = exact_placement_probs(p.as_ref(), n).unwrap();
            for &e in &tenths {
                for mask in 0u32..(1 << n) {
                    let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                    let rep = check_claim1(&probs, e, &s).unwrap();
                    assert!(rep.part1_ok && rep.part2_ok, "{rule:?} n={n} eps={e} S={s:?}");
                }
            }
        }
    }
}

#[test]
fn forbidden_threshold_is_strict() {
    let mx = fresh(ToyPolicy::new(ToyRule::MaxIndex), 3);
    let p = exact_placement_probs(mx.as_ref(), 3).unwrap();
    // p_0 = 1/9 sits exactly on the threshold at epsilon = 1/3
    assert!(forbidden_set(&p, r(1, 3)).unwrap().is_empty());
    assert_eq!(forbidden_set(&p, r(1, 2)).unwrap().members, vec![0]);
    assert!(forbidden_set(&p, r(0, 1)).is_err());
    assert!(forbidden_set(&p, r(1, 1)).is_err());
}

#[test]
fn claim_report_on_max_index() {
    let n = 4;
    let mx = fresh(ToyPolicy::new(ToyRule::MaxIndex), n);
    let p = exact_placement_probs(mx.as_ref(), n).unwrap();
    // p = 1/16, 3/16, 5/16, 7/16; epsilon 3/4 forbids bin 0 only
    let rep = check_claim1(&p, r(3, 4), &[0, 1]).unwrap();
    assert_eq!(rep.forbidden, 1);
    assert!(rep.part1_ok && rep.part2_ok);
    assert!((rep.lhs - 0.25).abs() < 1e-15);
    assert!((rep.rhs - 0.1875).abs() < 1e-15);
}

fn sample_states(n: usize) -> Vec<Box<dyn Policy>> {
    let mut out: Vec<Box<dyn Policy>> = Vec::new();
    for kind in PolicyKind::ALL {
        if kind == PolicyKind::IllegalZero {
            continue;
        }
        let params = PolicyParams {
            advice_threshold: Some(2),
            ..Default::default()
        };
        for balls in [0u64, n as u64 / 2, 2 * n as u64] {
            let mut p = build_policy(kind, n, 0.5, &params).unwrap();
            if balls == 0 {
                p.reset(n, n as u64);
            } else {
                simulate_run(&SimConfig::new(n, balls ^ n as u64).with_balls(balls), p.as_mut()).unwrap();
            }
            out.push(p);
        }
    }
    out
}

#[test]
fn sums_and_offer_bound_up_to_64() {
    for n in 1..=64 {
        for p in sample_states(n) {
            let probs = exact_placement_probs(p.as_ref(), n).unwrap();
            assert_eq!(probs.sum(), r(1, 1), "{} n={n}", p.name());
            let bound = probs.offer_bound();
            assert!(probs.probs.iter().all(|&x| x <= bound), "{} n={n}", p.name());

            let fast = placement_probs_f64(p.as_ref(), n).unwrap();
            for (a, b) in fast.probs.iter().zip(probs.to_f64()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn claim_holds_on_sampled_states() {
    let cfg = SweepConfig::default();
    for n in [3usize, 8, 17, 40, 64] {
        for p in sample_states(n) {
            let probs = exact_placement_probs(p.as_ref(), n).unwrap();
            let v = sweep_claim1(&probs, &cfg).unwrap();
            assert!(v.claim_ok(), "{} n={n}: {v:?}", p.name());
        }
    }
}

#[test]
fn claim_holds_on_large_n_slow_path() {
    let n = 200;
    let mut g: Box<dyn Policy> = Box::new(GreedyTwoChoice::new());
    simulate_run(&SimConfig::new(n, 3), g.as_mut()).unwrap();
    let probs = exact_placement_probs(g.as_ref(), n).unwrap();
    let cfg = SweepConfig {
        epsilons: vec![r(1, 4), r(3, 4)],
        subsets: 50,
        seed: 1,
    };
    assert!(sweep_claim1(&probs, &cfg).unwrap().claim_ok());
}

#[test]
fn illegal_fixture_breaks_the_claim() {
    let n = 8;
    let p = fresh(ToyPolicy::new(ToyRule::IllegalZero), n);
    let probs = exact_placement_probs(p.as_ref(), n).unwrap();
    assert_eq!(probs.probs[0], r(1, 1));
    let v = sweep_claim1(&probs, &SweepConfig::default()).unwrap();
    assert!(v.part2_violations > 0);
    assert!(!v.offer_bound_ok);
}

#[test]
fn reachable_clustered_states_all_pass() {
    let n = 10;
    let start = fresh(ClusteredPolicy::new(ClusterConfig::new(3, 2).unwrap()), n);
    let states = reachable_states(start.as_ref(), n, 5, 10_000).unwrap();
    assert!(states.len() > 10);
    let cfg = SweepConfig {
        epsilons: default_epsilon_grid(),
        ..Default::default()
    };
    for s in states {
        let probs = exact_placement_probs(s.policy.as_ref(), n).unwrap();
        assert!(sweep_claim1(&probs, &cfg).unwrap().claim_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn greedy_any_loads(loads in prop::collection::vec(0u32..6, 1..40)) {
        let n = loads.len();
        let balls = loads.iter().map(|&l| l as u64).sum::<u64>().max(1);
        let g = GreedyTwoChoice::with_loads(loads, balls);
        let p = exact_placement_probs(&g, n).unwrap();
        prop_assert_eq!(p.sum(), r(1, 1));
        let bound = p.offer_bound();
        prop_assert!(p.probs.iter().all(|&x| x <= bound));
        for e in default_epsilon_grid() {
            let f = forbidden_set(&p, e).unwrap();
            prop_assert!(Rational::from_integer(f.len() as i64) <= e * n as i64);
        }
    }

    #[test]
    fn clustered_any_counters(c in 1usize..5, cap in 1u32..6, counters in prop::collection::vec(0u32..6, 1..12)) {
        let n = counters.len() * c;
        let counters: Vec<u32> = counters.into_iter().map(|x| x.min(cap)).collect();
        let cfg = ClusterConfig::new(c, cap).unwrap();
        let p = ClusteredPolicy::with_counters(cfg, n, counters).unwrap();
        let probs = exact_placement_probs(&p, n).unwrap();
        prop_assert_eq!(probs.sum(), r(1, 1));
        let v = sweep_claim1(&probs, &SweepConfig { subsets: 200, ..Default::default() }).unwrap();
        prop_assert!(v.claim_ok());
    }
}
