use udn_core::analytic::{activity, coverage_probability, median_rate_semianalytic};
use udn_core::channel::{db_to_linear, ChannelParams};
use udn_core::montecarlo::{coverage_curve, simulate_trials, simulate_typical_rate, ActivityModel, SimSpec};

#[test]
fn full_activity_coverage_matches_closed_form() {
    let spec = SimSpec::new(50.0, 50.0, ChannelParams::default(), 20_000, 17).with_activity(ActivityModel::Full);
    let thetas = [-6.0, 0.0, 6.0];
    for c in coverage_curve(&spec, &thetas).unwrap() {
        let exact = coverage_probability(db_to_linear(c.theta_db), 4.0, 1.0).unwrap();
        assert!((c.prob - exact).abs() < 3.0 * c.stderr, "{}: {} vs {exact}", c.theta_db, c.prob);
    }
}

#[test]
fn coverage_grows_with_the_path_loss_exponent() {
    let base = ChannelParams::default();
    let spec = |alpha| {
        SimSpec::new(50.0, 50.0, ChannelParams { alpha, ..base }, 20_000, 18).with_activity(ActivityModel::Full)
    };
    let p3 = coverage_curve(&spec(3.0), &[0.0]).unwrap()[0];
    let p5 = coverage_curve(&spec(5.0), &[0.0]).unwrap()[0];
    for (alpha, c) in [(3.0, p3), (5.0, p5)] {
        let exact = coverage_probability(1.0, alpha, 1.0).unwrap();
        assert!((c.prob - exact).abs() < 3.0 * c.stderr, "alpha {alpha}: {} vs {exact}", c.prob);
    }
    assert!(p5.prob > p3.prob);
}

#[test]
fn load_driven_activity_thins_interference() {
    // At large tau most ANs are idle, so the typical UE sees fewer
    // interferers than under full activity.
    let params = ChannelParams::default();
    let spec = SimSpec::new(200.0, 50.0, params, 20_000, 19);
    let thinned = coverage_curve(&spec, &[0.0]).unwrap()[0];
    let full = coverage_curve(&spec.clone().with_activity(ActivityModel::Full), &[0.0]).unwrap()[0];
    assert!(thinned.prob > full.prob + 3.0 * thinned.stderr);
    let a = activity(4.0, params.n_subchannels).unwrap();
    let approx = coverage_probability(1.0, 4.0, a).unwrap();
    assert!((thinned.prob - approx).abs() < 0.05, "{} vs {approx}", thinned.prob);
}

#[test]
fn semianalytic_median_tracks_simulation() {
    let params = ChannelParams::default();
    for (tau, seed) in [(0.1, 21), (0.5, 22), (2.0, 23)] {
        let mc = simulate_typical_rate(&SimSpec::new(100.0 * tau, 100.0, params, 20_000, seed)).unwrap().median().unwrap();
        let sa = median_rate_semianalytic(tau, &params).unwrap();
        assert!((mc - sa).abs() < 0.1 * mc, "tau {tau}: MC {mc} vs semianalytic {sa}");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let spec = SimSpec::new(30.0, 300.0, ChannelParams::default(), 3_000, 23);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| simulate_trials(&spec)).unwrap();
    let b = four.install(|| simulate_trials(&spec)).unwrap();
    assert_eq!(a, b);
}
