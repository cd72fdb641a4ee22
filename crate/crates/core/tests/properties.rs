use std::f64::consts::LN_2;

use anytime_ppm::channel::DmcSpec;
use anytime_ppm::montecarlo::{
    fit_exponent, run_anytime_curve, run_block_baseline, run_feedback_bandwidth, run_genie_curve,
};
use anytime_ppm::theory::{converse_exponent, exponent_eb, exponent_rate, ChannelSpec};
use anytime_ppm::unitcost::{run_cost_curve, threshold_eb_cost};

fn spec(eb: f64) -> ChannelSpec {
    ChannelSpec::from_eb(eb).unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let s = spec(2.0 * LN_2);
    let toy = DmcSpec::new(vec![vec![0.95, 0.05], vec![0.1, 0.9]], vec![0.0, 1.0]).unwrap();
    let run = || {
        (
            run_genie_curve(&s, &[0, 3, 6], 3000, 5).unwrap(),
            run_anytime_curve(&s, 2, &[0, 3], 3000, 5).unwrap(),
            run_block_baseline(8, &s, 3000, 5).unwrap(),
            run_feedback_bandwidth(&s, 8, 500, 5).unwrap(),
            run_cost_curve(&toy, 0.6, 2, &[0, 2, 4], 500, 5).unwrap(),
        )
    };
    let one = in_pool(1, run);
    assert_eq!(one, in_pool(3, run));
    assert_eq!(one, in_pool(8, run));
}

#[test]
fn genie_is_never_worse_than_anytime() {
    let s = spec(2.0 * LN_2);
    let delays = [0, 1, 2, 4, 6, 8];
    let genie = run_genie_curve(&s, &delays, 20_000, 21).unwrap();
    let anytime = run_anytime_curve(&s, 1, &delays, 20_000, 22).unwrap();
    for (g, a) in genie.points.iter().zip(&anytime.points) {
        let sigma = (g.std_error().powi(2) + a.std_error().powi(2)).sqrt();
        assert!(g.p_hat <= a.p_hat + 3.0 * sigma, "d = {}: {g:?} vs {a:?}", g.d);
    }
}

#[test]
#[ignore = "finite-delay transient: fitted slope at d <= 10 exceeds the asymptotic converse"]
fn fitted_genie_slope_respects_converse() {
    // high rate: rate fraction 0.75, where the converse is tight
    let s = ChannelSpec::from_rate_fraction(0.75).unwrap();
    let curve = run_genie_curve(&s, &(0..=10).collect::<Vec<_>>(), 40_000, 3).unwrap();
    let fit = fit_exponent(&curve).unwrap();
    let per_bit = converse_exponent(0.75, 1.0).unwrap().nats() / 0.75;
    assert!(fit.slope <= per_bit + 3.0 * fit.stderr, "{fit:?} vs {per_bit}");
}

#[test]
fn eb_exponent_is_rate_exponent_per_bit() {
    for i in 1..200 {
        let r = i as f64 / 200.0;
        let eb = LN_2 / r;
        let lhs = exponent_eb(eb).unwrap().nats();
        let rhs = exponent_rate(r, 1.0).unwrap().nats() / r;
        assert!((lhs - rhs).abs() < 1e-12, "r = {r}");
    }
}

#[test]
fn cost_curve_is_flat_below_threshold() {
    let toy = DmcSpec::new(vec![vec![0.95, 0.05], vec![0.1, 0.9]], vec![0.0, 1.0]).unwrap();
    let thr = threshold_eb_cost(&toy).unwrap();
    let c = run_cost_curve(&toy, 0.8 * thr, 5, &[0, 5, 10], 3000, 4).unwrap();
    assert!(c.points.iter().all(|p| p.p_hat > 0.6), "{c:?}");
}
