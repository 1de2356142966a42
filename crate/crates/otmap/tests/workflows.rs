//! Cross-module integration tests: estimator workflows at realistic sizes
//! and the local-alternative power growth of the independence test.

use rand::Rng;
use rayon::prelude::*;

use otmap::apps::{indep_test, IndepConfig};
use otmap::experiments::{run_rate_experiment, EstimatorKind, RunParams};
use otmap::numeric::{median, normal_cdf, normal_quantile};
use otmap::seeding::{derive, rng};
use otmap::synthetic::presets;

#[test]
fn wavelet_rate_report_is_deterministic_and_decreasing() {
    let p = presets::diag_linear(2);
    let kind = EstimatorKind::WaveletSmoothed { s: 1, m_cap: Some(512) };
    let grid = [32, 64, 128, 256];
    let a = run_rate_experiment(&kind, &p, &grid, 10, 42, &RunParams::default()).unwrap();
    let b = run_rate_experiment(&kind, &p, &grid, 10, 42, &RunParams::default()).unwrap();
    assert_eq!(a.rows, b.rows);
    // medians decrease across the grid, allowing one inversion at the
    // smallest gap
    let meds: Vec<f64> = a.per_size.iter().map(|s| s.map_median).collect();
    let inversions = meds.windows(2).filter(|w| w[1] >= w[0]).count();
    assert!(inversions <= 1, "medians {meds:?}");
}

#[test]
fn kernel_estimator_rate_report_runs_end_to_end() {
    let p = presets::sine_separable(2, 0.4);
    let kind = EstimatorKind::KernelSmoothed { s: 0, m_cap: Some(400) };
    let rep =
        run_rate_experiment(&kind, &p, &[24, 48, 96, 192], 10, 7, &RunParams::default()).unwrap();
    assert_eq!(rep.rows.len(), 40);
    assert!(rep.theoretical_exponent.is_some());
    assert!(rep.rows.iter().all(|r| r.map_error >= 0.0 && r.w2_error >= 0.0));
}

#[test]
fn semi_discrete_beats_nothing_but_runs_in_2d() {
    // dense-reference proxy sanity at modest size
    let p = presets::diag_linear(2);
    let kind = EstimatorKind::SemiDiscrete { reference_factor: 30 };
    let mut errs = Vec::new();
    for rep in 0..10u64 {
        let (e, _) = otmap::experiments::run_estimator(
            &kind,
            &p,
            64,
            64,
            derive(11, rep),
            &RunParams::default(),
        )
        .unwrap();
        errs.push(e);
    }
    // with a 30x denser source the map error should be well below the
    // plain discrete-discrete error at the same n
    let mut plain = Vec::new();
    for rep in 0..10u64 {
        let (e, _) = otmap::experiments::run_estimator(
            &EstimatorKind::DiscreteDiscrete,
            &p,
            64,
            64,
            derive(11, rep),
            &RunParams::default(),
        )
        .unwrap();
        plain.push(e);
    }
    assert!(median(&errs) < median(&plain), "{} vs {}", median(&errs), median(&plain));
}

/// Local alternatives with dependence shrinking slower than the detection
/// threshold: Gaussian copula with rho_n = 0.4 n^{-1/8} (the threshold rate
/// for d1 = d2 = 1 is n^{-1/4}). Power must grow along n.
#[test]
fn indep_test_power_grows_under_slowly_shrinking_alternatives() {
    let cache = std::env::temp_dir().join(format!("otmap-localpow-{}", std::process::id()));
    let cfg = IndepConfig {
        alpha: 0.05,
        null_draws: 1500,
        null_seed: 2_024,
        cache_dir: Some(cache.clone()),
    };
    let trials = 200u64;
    let mut powers = Vec::new();
    for (ni, &n) in [64usize, 256, 1024].iter().enumerate() {
        let rho = 0.4 * (n as f64).powf(-1.0 / 8.0);
        let hits: usize = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut r = rng(3_000 + ni as u64, trial);
                let mut xs = Vec::with_capacity(n);
                let mut ys = Vec::with_capacity(n);
                for _ in 0..n {
                    let z1 = normal_quantile(r.gen_range(1e-12..1.0));
                    let z2 =
                        rho * z1 + (1.0 - rho * rho).sqrt() * normal_quantile(r.gen_range(1e-12..1.0));
                    xs.push(vec![normal_cdf(z1)]);
                    ys.push(vec![normal_cdf(z2)]);
                }
                usize::from(indep_test(&xs, &ys, &cfg, derive(3_100 + ni as u64, trial)).unwrap().reject)
            })
            .sum();
        powers.push(hits as f64 / trials as f64);
    }
    let _ = std::fs::remove_dir_all(&cache);
    assert!(
        powers[0] < powers[1] && powers[1] < powers[2],
        "local-alternative power not increasing: {powers:?}"
    );
    assert!(powers[2] > 0.5, "power should be substantial at n=1024: {powers:?}");
}
