use std::f64::consts::PI;

use proptest::prelude::*;
use wpe_core::analysis::{
    average_speed, classify, classify_detailed, lyapunov_estimate, oscillation_frequency,
    Classification,
};
use wpe_core::model::{free_walking_state, FullSystem};
use wpe_core::stability::omega_onset;
use wpe_core::{
    simulate, BehaviorClass, ClassifierConfig, Error, IntegratorConfig, Params, State4, Trajectory,
};

fn params(sigma: f64, r: f64, a: f64, b: f64) -> Params {
    Params::new(sigma, r, a, b).unwrap()
}

fn trough_run(p: &Params) -> Trajectory<4> {
    simulate(p, State4::at_rest(PI / p.b()).unwrap(), &IntegratorConfig::default()).unwrap()
}

fn detailed(tr: &Trajectory<4>) -> Classification {
    classify_detailed::<FullSystem, 4>(tr, &ClassifierConfig::default()).unwrap()
}

const EXEMPLARS: [((f64, f64, f64, f64), BehaviorClass); 4] = [
    ((8.0, 15.0, 1.0, 5.0), BehaviorClass::BackAndForth),
    ((20.0, 15.0, 1.0, 5.0), BehaviorClass::Runaway),
    ((4.5, 19.5, 1.0, 5.0), BehaviorClass::Irregular),
    ((10.0, 2.0, 1.0, 5.0), BehaviorClass::Stationary),
];

#[test]
fn exemplar_runs() {
    for ((sigma, r, a, b), class) in EXEMPLARS {
        let tr = trough_run(&params(sigma, r, a, b));
        assert_eq!(classify(&tr, &ClassifierConfig::default()).unwrap(), class, "σ={sigma} r={r}");
    }
}

#[test]
fn back_and_forth_has_no_drift() {
    let tr = trough_run(&params(8.0, 15.0, 1.0, 5.0));
    assert!(average_speed(&tr, 0.5) < 0.01);
}

#[test]
fn classes_survive_mirror_and_translation() {
    let cfg = ClassifierConfig::default();
    for ((sigma, r, a, b), class) in EXEMPLARS {
        let p = params(sigma, r, a, b);
        let tr = trough_run(&p);
        assert_eq!(classify(&tr.mirrored(), &cfg).unwrap(), class);
        assert_eq!(classify(&tr.translated(2.0 * PI / b), &cfg).unwrap(), class);
        assert_eq!(classify(&tr.translated(-6.0 * PI / b), &cfg).unwrap(), class);
    }
}

#[test]
fn class_observables_are_consistent() {
    let cfg = ClassifierConfig::default();
    let starts = |b: f64| {
        [
            State4::at_rest(PI / b).unwrap(),
            State4::new(PI / b, 2.0, 2.0, 4.0).unwrap(),
            State4::new(0.3, -1.0, -1.0, 1.0).unwrap(),
        ]
    };
    for &(sigma, r, a, b) in &[
        (8.0, 15.0, 1.0, 5.0),
        (20.0, 15.0, 1.0, 5.0),
        (10.0, 2.0, 1.0, 5.0),
        (10.0, 10.0, 1.0, 0.75),
        (10.0, 10.0, 1.0, 1.5),
        (35.0, 35.0, 2.0, 0.5),
        (5.0, 0.5, 1.0, 2.0),
    ] {
        let p = params(sigma, r, a, b);
        for s0 in starts(b) {
            let c = detailed(&simulate(&p, s0, &IntegratorConfig::default()).unwrap());
            match c.class {
                BehaviorClass::Stationary => assert!(c.average_speed < cfg.v_stationary),
                BehaviorClass::Runaway => assert!(c.average_speed >= cfg.drift_threshold(&p)),
                _ => {}
            }
        }
    }
}

#[test]
fn lyapunov_exponents() {
    let t_end = 500.0;
    let free = params(10.0, 10.0, 0.0, 1.0);
    let lle = lyapunov_estimate(&free, free_walking_state(&free, 1.0, 0.0).unwrap(), t_end, 1.0).unwrap();
    assert!(lle <= 0.005, "free walking {lle}");

    for (p, chaotic) in [(params(4.5, 19.5, 1.0, 5.0), true), (params(8.0, 15.0, 1.0, 5.0), false)] {
        let s = State4::from_array(*trough_run(&p).last()).unwrap();
        let lle = lyapunov_estimate(&p, s, t_end, 1.0).unwrap();
        assert_eq!(lle > 0.005, chaotic, "{p:?}: {lle}");
    }
    assert!(lyapunov_estimate(&free, State4::at_rest(0.0).unwrap(), 100.0, 1.0).is_err());
}

#[test]
fn frequency_of_synthetic_and_stationary_signals() {
    let p = params(1.0, 1.0, 0.0, 1.0);
    let times: Vec<f64> = (0..4000).map(|i| i as f64 * 0.01).collect();
    let states = times.iter().map(|t| [0.0, (2.0 * t).sin()]).collect();
    let tr = Trajectory::<2>::new(times, states, p).unwrap();
    assert!((oscillation_frequency(&tr, 1.0).unwrap() - 2.0).abs() < 1e-3);

    let still = trough_run(&params(10.0, 2.0, 1.0, 5.0));
    let flat: Vec<[f64; 4]> = still.states().iter().map(|s| [s[0], 0.0, 0.0, 0.0]).collect();
    let still = Trajectory::new(still.times().to_vec(), flat, *still.params()).unwrap();
    assert!(matches!(oscillation_frequency(&still, 0.5), Err(Error::NotOscillatory { .. })));
}

/// Prefix of `tr` before `|X|` first exceeds `limit`.
fn small_amplitude_prefix(tr: &Trajectory<4>, limit: f64) -> Trajectory<4> {
    let n = tr.states().iter().position(|s| s[1].abs() > limit).unwrap_or(tr.len());
    Trajectory::new(tr.times()[..n].to_vec(), tr.states()[..n].to_vec(), *tr.params()).unwrap()
}

#[test]
fn small_oscillations_near_onset() {
    let p0 = params(10.0, 1.0, 1.0, 5.0);
    let rc = wpe_core::stability::r_critical(&p0);
    let p = p0.with_r(1.02 * rc).unwrap();
    let tr = simulate(&p, State4::at_rest(PI / 5.0 + 1e-4).unwrap(), &IntegratorConfig::default()).unwrap();
    let linear = small_amplitude_prefix(&tr, 0.05);
    assert!(linear.t_end() > 50.0);
    let w = oscillation_frequency(&linear, 0.5).unwrap();
    let expected = omega_onset(&p);
    assert!((w / expected - 1.0).abs() < 0.05, "ω = {w}, expected {expected}");
}

#[test]
fn short_runs_are_rejected() {
    let p = params(4.5, 19.5, 1.0, 5.0);
    let tr = simulate(&p, State4::at_rest(PI / 5.0 + 0.1).unwrap(), &IntegratorConfig::default().with_t_end(5.0)).unwrap();
    assert!(matches!(
        classify(&tr, &ClassifierConfig::default()),
        Err(Error::TrajectoryTooShort(_))
    ));
}

proptest! {
    #[test]
    fn average_speed_reversal_invariance(
        v in prop::collection::vec(-5.0f64..5.0, 20..200),
        fraction in 0.1f64..1.0,
    ) {
        let p = params(1.0, 1.0, 0.0, 1.0);
        let times: Vec<f64> = (0..v.len()).map(|i| i as f64 * 0.05).collect();
        let fwd: Vec<[f64; 2]> = v.iter().map(|&x| [0.0, x]).collect();
        let tr = Trajectory::new(times.clone(), fwd, p).unwrap();
        let w0 = tr.window_start(fraction);
        // Reverse the window in time and negate velocities, keeping the prefix.
        let mut rev: Vec<[f64; 2]> = v[..w0].iter().map(|&x| [0.0, x]).collect();
        rev.extend(v[w0..].iter().rev().map(|&x| [0.0, -x]));
        let tr_rev = Trajectory::new(times, rev, p).unwrap();
        let a = average_speed(&tr, fraction);
        let b = average_speed(&tr_rev, fraction);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn constant_velocity_speed(c in -10.0f64..10.0, n in 10usize..100) {
        let p = params(1.0, 1.0, 0.0, 1.0);
        let times: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let states = times.iter().map(|&t| [c * t, c]).collect();
        let tr = Trajectory::<2>::new(times, states, p).unwrap();
        prop_assert!((average_speed(&tr, 0.5) - c.abs()).abs() <= 1e-12 * (1.0 + c.abs()));
    }
}

/// Benettin on the adaptive integrator, renormalizing every time unit.
fn adaptive_benettin(p: &Params, s0: [f64; 4], intervals: usize) -> f64 {
    let cfg = IntegratorConfig::default().with_t_end(1.0).with_tolerances(1e-11, 1e-13);
    let d0 = 1e-8;
    let mut a = *simulate(p, State4::from_array(s0).unwrap(), &cfg.with_t_end(100.0)).unwrap().last();
    let mut b = a.map(|v| v + 0.5 * d0);
    let mut sum = 0.0;
    for _ in 0..intervals {
        a = *simulate(p, State4::from_array(a).unwrap(), &cfg).unwrap().last();
        let bb = *simulate(p, State4::from_array(b).unwrap(), &cfg).unwrap().last();
        let d = (0..4).map(|k| (bb[k] - a[k]).powi(2)).sum::<f64>().sqrt();
        sum += (d / d0).ln();
        b = std::array::from_fn(|k| a[k] + (bb[k] - a[k]) * d0 / d);
    }
    sum / intervals as f64
}

#[test]
fn lle_from_exact_rest_measures_the_attractor() {
    let p = params(4.5, 19.5, 1.0, 5.0);
    let ours = lyapunov_estimate(&p, State4::at_rest(PI / 5.0).unwrap(), 2000.0, 1.0).unwrap();
    let oracle = adaptive_benettin(&p, [PI / 5.0, 1e-8, 0.0, 0.0], 1000);
    // The trough's own growth rate is far larger; the estimate must not
    // report it.
    let local = wpe_core::stability::stability_report(&p, 1).max_real_part();
    assert!(local > 3.0 * ours, "local {local}, LLE {ours}");
    assert!((ours / oracle - 1.0).abs() < 0.25, "LLE {ours}, oracle {oracle}");
}
