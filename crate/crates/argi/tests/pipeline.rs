//! End-to-end library pipeline: simulate -> realized series -> tuning -> fit
//! -> forecast, plus cross-module consistency checks.

use argi::estimate::{fit, FitOptions, Method};
use argi::filter::{filter_path, forecast_next};
use argi::model::{structural_to_garch, unconditional_h, GarchParams, ParamSpace, StructuralParams};
use argi::realized::{build_daily_series, DailySeries, PrvConfig};
use argi::simulate::{simulate, thin_ticks, true_h_path, SimConfig};

use proptest::prelude::*;

fn desk_sim(n_days: usize, seed: u64) -> argi::simulate::SimOutput {
    let cfg = SimConfig {
        n_days,
        m_all: 780,
        m_obs: 390,
        seed,
        params: StructuralParams::section4(),
    };
    simulate(&cfg).unwrap()
}

#[test]
fn filter_on_true_innovations_reproduces_true_h_path() {
    let out = desk_sim(40, 3);
    let theta = structural_to_garch(&StructuralParams::section4()).unwrap();
    let h_path = true_h_path(&out, &theta).unwrap();

    let series = DailySeries {
        v_hat: out
            .true_iv
            .iter()
            .zip(&out.true_jv)
            .map(|(iv, jv)| iv + jv)
            .collect(),
        rv: out.true_iv.clone(),
        ret: out
            .true_x
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect(),
        negative_days: vec![],
    };
    let h1 = unconditional_h(&theta).unwrap();
    let filtered = filter_path(&theta, &series, h1).unwrap();
    assert_eq!(filtered.floor_events, 0);
    // same recursion, same float operation order: exact agreement
    for d in 1..40 {
        assert_eq!(filtered.states[d].h, h_path[d - 1], "day {d}");
    }
    let forecast_unfloored = {
        let last = filtered.states.last().unwrap();
        theta.omega_g + theta.gamma * last.h + theta.beta_g * series.rv[39]
            - theta.alpha_g * series.ret[39]
    };
    assert_eq!(forecast_unfloored, *h_path.last().unwrap());
    assert_eq!(
        forecast_next(&theta, &series, h1).unwrap(),
        forecast_unfloored.max(1e-5)
    );
}

#[test]
fn full_estimation_pipeline_runs_and_is_sane() {
    let out = desk_sim(125, 11);
    let series = build_daily_series(&out.ticks, &PrvConfig::default(), false).unwrap();
    assert_eq!(series.n_days(), 125);

    let space = ParamSpace::default();
    let opts = FitOptions::default();
    let theta0 = structural_to_garch(&StructuralParams::section4()).unwrap();
    for method in [Method::Ols, Method::Huber, Method::AdjHuber, Method::Qmle] {
        let res = fit(method, &series, &space, &opts).unwrap();
        assert!(res.converged, "{method:?}");
        assert!(space.contains(&res.theta_hat), "{method:?}");
        // estimates land in a plausible neighborhood of the truth
        let err: f64 = res
            .theta_hat
            .as_array()
            .iter()
            .zip(theta0.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1.0, "{method:?} max-norm error {err}");
        let f = forecast_next(&res.theta_hat, &series, res.h1).unwrap();
        assert!(f > 0.0 && f < 50.0);
        if matches!(method, Method::Huber | Method::AdjHuber) {
            let t = res.tuning.expect("huber family records tuning");
            assert!((1.1..=2.0).contains(&t.b_hat));
            assert!(t.tau_n > 0.0);
        }
    }
}

#[test]
fn subsampling_grids_share_the_true_path() {
    let cfg = SimConfig {
        n_days: 6,
        m_all: 1560,
        m_obs: 1560,
        seed: 9,
        params: StructuralParams::section4(),
    };
    let fine = simulate(&cfg).unwrap();
    for m in [390, 780] {
        let thinned = thin_ticks(&fine.ticks, m).unwrap();
        assert_eq!(thinned.opens, fine.ticks.opens);
        assert_eq!(thinned.days[0].n_increments(), m);
        let series = build_daily_series(&thinned, &PrvConfig::default(), false).unwrap();
        // realized totals track the true total variation at coarse accuracy
        for d in 0..6 {
            let truth = fine.true_iv[d] + fine.true_jv[d];
            assert!(
                (series.v_hat[d] - truth).abs() < 2.0,
                "m={m} day {d}: {} vs {truth}",
                series.v_hat[d]
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // theta -> recursion -> zero-residual refit is the identity on theta
    #[test]
    fn zero_residual_round_trip(
        omega in 0.2f64..1.5,
        gamma in 0.05f64..0.6,
        alpha in 0.0f64..0.4,
        beta_frac in 0.05f64..0.9,
    ) {
        let beta = beta_frac * (1.0 - gamma - 1e-3);
        let theta = GarchParams { omega_g: omega, gamma, alpha_g: alpha, beta_g: beta };
        let n = 120usize;
        let mut state = 42u64;
        let mut unif = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        let rv: Vec<f64> = (0..n).map(|_| 0.5 + unif()).collect();
        let ret: Vec<f64> = (0..n).map(|_| unif() - 0.5).collect();
        let h1 = 1.0;
        let mut h = h1;
        let mut v_hat = vec![h1; n];
        for i in 1..n {
            h = theta.omega_g + theta.gamma * h + theta.beta_g * rv[i-1] - theta.alpha_g * ret[i-1];
            v_hat[i] = h;
        }
        let series = DailySeries { v_hat, rv, ret, negative_days: vec![] };
        let opts = FitOptions { h1: Some(1.0), ..FitOptions::default() };
        let res = fit(Method::Ols, &series, &ParamSpace::default(), &opts).unwrap();
        for (a, b) in res.theta_hat.as_array().iter().zip(theta.as_array()) {
            prop_assert!((a - b).abs() < 1e-5, "{} vs {}", a, b);
        }
    }

    // simulation stays finite and consistent across parameter draws
    #[test]
    fn simulation_invariants_hold(
        seed in 0u64..500,
        lambda in 0.0f64..30.0,
        noise in 0.0f64..0.02,
    ) {
        let params = StructuralParams {
            jump: argi::model::JumpLaw { intensity: lambda, c_j: 0.04, df: 6.0 },
            noise_sd: noise,
            ..StructuralParams::section4()
        };
        let cfg = SimConfig { n_days: 3, m_all: 200, m_obs: 50, seed, params };
        let out = simulate(&cfg).unwrap();
        prop_assert!(out.true_iv.iter().all(|v| v.is_finite() && *v >= 0.0));
        prop_assert!(out.true_jv.iter().all(|v| v.is_finite() && *v >= 0.0));
        prop_assert!(out.true_h_next.is_finite());
        out.ticks.validate().unwrap();
        if lambda == 0.0 {
            prop_assert!(out.true_jv.iter().all(|v| *v == 0.0));
        }
    }
}
