use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thzlab::sim::{ks_distance, ks_two_sample};
use thzlab::*;

fn lateral_only() -> (MobilityParams, Boundaries) {
    (
        MobilityParams::new(0.1, 0.0, 0.0, 0.0).unwrap(),
        Boundaries {
            linear_m: 0.089_014,
            angular_rad: 0.053_407,
        },
    )
}

fn spec(dt: f64, n: usize, seed: u64) -> SimSpec {
    SimSpec {
        dt: Some(dt),
        n_trials: n,
        horizon: 50.0,
        seed,
        ..SimSpec::default()
    }
}

#[test]
fn single_axis_mean_and_shape() {
    let (mob, b) = lateral_only();
    let s = simulate_fpt(&mob, &b, &spec(1.6e-3, 100_000, 11)).unwrap();
    let mean = b.linear_m.powi(2) / 0.01;
    let m = s.mean().unwrap();
    assert!(((m - mean) / mean).abs() < 0.01, "{m} vs {mean}");
    let exact = FptDistribution::exact(b.linear_m, 0.005, SeriesSpec::default()).unwrap();
    let d = ks_distance(&s, &exact);
    assert!(d <= 0.01, "KS {d}");
}

#[test]
fn empirical_law_is_scale_free() {
    let (mob, b) = lateral_only();
    let a = simulate_fpt(&mob, &b, &spec(1.6e-3, 20_000, 1)).unwrap();
    let doubled_mob = MobilityParams::new(0.2, 0.0, 0.0, 0.0).unwrap();
    let doubled_b = Boundaries {
        linear_m: 2.0 * b.linear_m,
        angular_rad: b.angular_rad,
    };
    let c = simulate_fpt(&doubled_mob, &doubled_b, &spec(1.6e-3, 20_000, 2)).unwrap();
    // two-sample KS critical value at α = 0.01 for n = m = 20000
    let crit = 1.628 * (2.0f64 / 20_000.0).sqrt();
    assert!(ks_two_sample(&a.times, &c.times) < crit);
}

#[test]
fn long_horizon_censors_little() {
    let cfg = SystemConfig::default();
    let mob = MobilityParams::symmetric(0.1, 3.0);
    let b = misalignment_boundaries(&cfg);
    let dist = aggregate_distribution(&mob, &b, &FptOptions::default()).unwrap();
    let horizon = 20.0 * dist.mean().unwrap();
    let s = simulate_fpt(
        &mob,
        &b,
        &SimSpec {
            dt: Some(1e-3),
            n_trials: 5_000,
            horizon,
            ..SimSpec::default()
        },
    )
    .unwrap();
    assert!(s.censored_fraction() < 0.01);
}

#[test]
fn on_demand_error_shrinks_with_trials() {
    let cfg = SystemConfig::default();
    let mob = MobilityParams::symmetric(0.1, 3.0);
    let dist = aggregate_distribution(&mob, &misalignment_boundaries(&cfg), &FptOptions::default())
        .unwrap();
    let p = outage_scheme1(&dist, alignment_duration(&cfg)).unwrap();
    let rms: Vec<f64> = [500usize, 5_000, 50_000]
        .iter()
        .map(|&n| {
            let sq: f64 = (0..4)
                .map(|seed| {
                    let tr = simulate_scheme(Scheme::OnDemand, &cfg, &mob, &spec(1e-3, n, seed))
                        .unwrap();
                    (tr.outage_fraction - p).powi(2)
                })
                .sum();
            (sq / 4.0).sqrt()
        })
        .collect();
    assert!(rms[2] < rms[1] && rms[1] < rms[0], "{rms:?}");
    assert!(rms[2] / p < 0.03);
}

#[test]
fn periodic_outage_ignores_horizon_phase() {
    let cfg = SystemConfig::default();
    let mob = MobilityParams::symmetric(0.01, 3.0);
    let t_u = 0.05;
    let cycle = t_u + alignment_duration(&cfg);
    let run = |horizon: f64| {
        let s = SimSpec {
            dt: Some(5e-4),
            n_trials: 4_000,
            horizon,
            seed: 9,
            ..SimSpec::default()
        };
        simulate_scheme(
            Scheme::Periodic {
                update_period_s: t_u,
            },
            &cfg,
            &mob,
            &s,
        )
        .unwrap()
        .outage_fraction
    };
    let a = run(100.0 * cycle);
    let b = run(100.5 * cycle);
    let c = run(137.3 * cycle);
    assert!(
        ((a - b) / a).abs() < 0.01 && ((a - c) / a).abs() < 0.01,
        "{a} {b} {c}"
    );
}

#[test]
fn continuing_mobility_during_realignment_increases_outage() {
    let cfg = SystemConfig::default();
    let mob = MobilityParams::symmetric(0.1, 3.0);
    let frozen = simulate_scheme(Scheme::OnDemand, &cfg, &mob, &spec(1e-3, 20_000, 3)).unwrap();
    let moving = simulate_scheme(
        Scheme::OnDemand,
        &cfg,
        &mob,
        &SimSpec {
            during_realignment: RealignmentMobility::Continuing,
            ..spec(1e-3, 20_000, 3)
        },
    )
    .unwrap();
    assert!(moving.outage_fraction > frozen.outage_fraction);
}

#[test]
fn chi_square_null_calibration() {
    let dist = aggregate_distribution(
        &MobilityParams::symmetric(0.1, 3.0),
        &misalignment_boundaries(&SystemConfig::default()),
        &FptOptions::default(),
    )
    .unwrap();
    let runs = 60;
    let mut accepted = 0;
    for r in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + r);
        let s: Vec<f64> = (0..2_000).map(|_| dist.sample(&mut rng)).collect();
        if chi_square_gof(&s, &dist, 20, 0.05).unwrap().accept {
            accepted += 1;
        }
    }
    assert!(accepted as f64 >= 0.9 * runs as f64, "{accepted}/{runs}");
}

#[test]
fn chi_square_rejects_double_sigma() {
    let m = 0.089_014;
    let exact = FptDistribution::exact(m, 0.005, SeriesSpec::default()).unwrap();
    let p = lognormal_surrogate(m, 0.1, MuConvention::MomentMatched).unwrap();
    let wide = FptDistribution::lognormal(LognormalParams::new(p.mu, 2.0 * p.sigma).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let s: Vec<f64> = (0..10_000).map(|_| exact.sample(&mut rng)).collect();
    assert!(!chi_square_gof(&s, &wide, 20, 0.05).unwrap().accept);
}
