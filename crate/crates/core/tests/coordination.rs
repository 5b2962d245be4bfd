mod common;

use common::{as_option, enumeration_optimum, grid_maxmin, min, oracle_rates, sample};
use proptest::prelude::*;

use udn_core::channel::ChannelParams;
use udn_core::coordination::{evaluate, evaluate_baseline, evaluate_policy1, evaluate_policy2, CoordProblem, PolicyId, RbUse};
use udn_core::pointprocess::{Point, Window};
use udn_core::rng::StreamFactory;

#[test]
fn library_rates_match_first_principles() {
    for seed in 0..20 {
        let p = sample(300.0, 4, 7, 2, seed);
        for a in evaluate(&p, &PolicyId::ALL).unwrap() {
            let mw: Vec<f64> = a.power_dbm.iter().map(|d| 10f64.powf(d / 10.0)).collect();
            let want = oracle_rates(&p, &as_option(&a.rb_of), &mw);
            for (x, y) in a.rates.iter().zip(&want) {
                assert!((x - y).abs() <= 1e-9 * y.abs().max(1e-12), "seed {seed} {}: {x} vs {y}", a.policy);
            }
        }
    }
}

#[test]
fn policy1_is_near_the_enumeration_optimum() {
    let mut worst: f64 = 1.0;
    let mut total = 0.0;
    for seed in 0..100u64 {
        let n_ues = 2 + (seed % 4) as usize;
        let n_ans = 2 + (seed / 4 % 3) as usize;
        let p = sample(200.0, n_ans, n_ues, 2, 1000 + seed);
        let opt = enumeration_optimum(&p);
        let got = evaluate_policy1(&p).min_rate;
        assert!(got <= opt * (1.0 + 1e-9), "seed {seed}: greedy {got} beats optimum {opt}");
        let ratio = got / opt;
        worst = worst.min(ratio);
        total += ratio;
        assert!(ratio >= 0.9, "seed {seed}: greedy {got} < 0.9 x optimum {opt}");
    }
    eprintln!("policy I / optimum: worst {worst:.4}, mean {:.4}", total / 100.0);
}

#[test]
fn four_links_beat_the_all_same_rb_assignment() {
    let mut checked = 0;
    for seed in 0..300u64 {
        let p = sample(200.0, 4, 4, 2, seed);
        if p.snapshot.loads != vec![1, 1, 1, 1] {
            continue;
        }
        let same = min(&oracle_rates(&p, &[Some(0); 4], &[p.cap_mw(); 4]));
        let got = evaluate_policy1(&p).min_rate;
        assert!(got >= same * (1.0 - 1e-12), "seed {seed}: {got} < {same}");
        assert!(got >= enumeration_optimum(&p) * 0.9, "seed {seed}");
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} instances");
}

#[test]
fn policy2_matches_power_grid_search() {
    let mut checked = 0;
    for seed in 0..400u64 {
        let p = sample(150.0, 2, 2, 1, seed);
        if p.snapshot.loads != vec![1, 1] {
            continue;
        }
        let a = evaluate_policy2(&p);
        let grid = grid_maxmin(&p, &as_option(&a.rb_of));
        let rel = (a.min_rate - grid).abs() / grid;
        assert!(rel < 0.01, "seed {seed}: bisection {} vs grid {grid}", a.min_rate);
        assert!(a.min_rate >= grid * (1.0 - 1e-6), "seed {seed}: grid beats bisection");
        checked += 1;
        if checked == 50 {
            break;
        }
    }
    assert_eq!(checked, 50);
}

#[test]
fn policy1_beats_random_rbs_in_most_seeds() {
    let w = Window::square(Point::ORIGIN, 1000.0).unwrap();
    let params = ChannelParams::finite_area();
    for n_ans in [25usize, 50, 250] {
        let streams = StreamFactory::new(77);
        let wins = (0..100u64)
            .filter(|&r| {
                let p = CoordProblem::sample(&w, n_ans, 50, &params, 4, &streams, r).unwrap();
                evaluate_policy1(&p).min_rate >= evaluate_baseline(&p).min_rate
            })
            .count();
        assert!(wins >= 95, "{n_ans} ANs: policy I won {wins}/100");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn allocations_are_feasible(seed in 0u64..10_000, n_ans in 1usize..8, n_ues in 1usize..12, n_rb in 1usize..5) {
        let p = sample(400.0, n_ans, n_ues, n_rb, seed);
        let all = evaluate(&p, &PolicyId::ALL).unwrap();
        for a in &all {
            prop_assert!(a.is_orthogonal());
            prop_assert!(a.power_dbm.iter().all(|&d| d <= p.params.tx_power_dbm + 1e-9));
            prop_assert!(a.rates.iter().all(|&r| r >= 0.0 && r.is_finite()));
            prop_assert_eq!(a.min_rate, min(&a.rates));
            for (u, r) in a.rb_of.iter().enumerate() {
                let saturated = p.snapshot.loads[p.snapshot.assoc[u]] > n_rb;
                prop_assert_eq!(saturated, *r == RbUse::Shared);
            }
        }
        prop_assert!(all[2].min_rate >= all[1].min_rate);
        prop_assert_eq!(&all[1].rb_of, &all[2].rb_of);
    }
}
