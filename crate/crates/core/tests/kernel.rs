use std::f64::consts::PI;

use wpe_core::analysis::oscillation_frequency;
use wpe_core::kernel::{
    integrate_memory, memory_force, MemoryHistory, MemoryStart, PreHistory, DEFAULT_KERNEL_CUTOFF,
};
use wpe_core::model::free_walking_state;
use wpe_core::{simulate, IntegratorConfig, Params, State4, Trajectory};

#[test]
fn matches_ode_system_near_trough() {
    let p = Params::new(10.0, 2.0, 1.0, 5.0).unwrap();
    let x0 = PI / 5.0 + 0.1;
    let cfg = IntegratorConfig::default().with_t_end(50.0).with_tolerances(1e-10, 1e-12);
    let ode = simulate(&p, State4::at_rest(x0).unwrap(), &cfg).unwrap();
    let start = MemoryStart::from_state(&State4::at_rest(x0).unwrap(), &p).unwrap();
    let mem = integrate_memory(start, &p, &cfg, 0.005).unwrap();
    assert_eq!(mem.times.len(), ode.len());
    let sup = ode
        .states()
        .iter()
        .zip(&mem.states)
        .map(|(a, b)| (a[0] - b[0]).abs())
        .fold(0.0, f64::max);
    assert!(sup < 1e-3, "sup-norm {sup}");
}

#[test]
fn matches_ode_system_on_back_and_forth_orbit() {
    let p = Params::new(8.0, 15.0, 1.0, 5.0).unwrap();
    let x0 = PI / 5.0 + 0.1;
    let cfg = IntegratorConfig::default().with_t_end(50.0).with_tolerances(1e-10, 1e-12);
    let ode = simulate(&p, State4::at_rest(x0).unwrap(), &cfg).unwrap();
    let mem = integrate_memory(MemoryStart::at_rest(x0), &p, &cfg, 0.001).unwrap();
    let sup = ode
        .states()
        .iter()
        .zip(&mem.states)
        .map(|(a, b)| (a[0] - b[0]).abs())
        .fold(0.0, f64::max);
    assert!(sup < 1e-3, "sup-norm {sup}");
}

#[test]
fn warm_started_walker_keeps_speed() {
    let p = Params::new(10.0, 10.0, 0.0, 1.0).unwrap();
    let start = MemoryStart::from_state(&free_walking_state(&p, 1.0, 0.0).unwrap(), &p).unwrap();
    assert_eq!(start.pre, PreHistory::Walking { x: 0.0, u: 3.0 });
    let cfg = IntegratorConfig::default().with_t_end(20.0);
    let ts = integrate_memory(start, &p, &cfg, 0.01).unwrap();
    for (t, s) in ts.times.iter().zip(&ts.states).skip(1) {
        assert!((s[0] / t - 3.0).abs() < 0.03, "t = {t}: x = {}", s[0]);
        assert!((s[1] - 3.0).abs() < 0.03);
    }
}

#[test]
fn back_and_forth_period_matches_ode_system() {
    let p = Params::new(8.0, 15.0, 1.0, 5.0).unwrap();
    let x0 = PI / 5.0 + 0.1;
    let cfg = IntegratorConfig::default().with_t_end(300.0);
    let ode = simulate(&p, State4::at_rest(x0).unwrap(), &cfg).unwrap();
    let mem = integrate_memory(MemoryStart::at_rest(x0), &p, &cfg, 0.01).unwrap();
    let mem = Trajectory::from_series(mem, p).unwrap();
    let w_ode = oscillation_frequency(&ode, 0.5).unwrap();
    let w_mem = oscillation_frequency(&mem, 0.5).unwrap();
    assert!((w_mem / w_ode - 1.0).abs() < 0.02, "ODE {w_ode}, kernel {w_mem}");
}

fn walking_history(u: f64, dt: f64) -> MemoryHistory {
    MemoryHistory::from_path(|t| u * t, 0.0, 40.0, dt, 1e-30).unwrap()
}

#[test]
fn steady_walking_force_and_quadrature_order() {
    let p = Params::new(10.0, 10.0, 0.0, 1.0).unwrap();
    let u = 3.0;
    let exact = p.r() * u / (1.0 + u * u);
    assert_eq!(exact, 3.0);
    let errs: Vec<f64> = [0.04, 0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| (memory_force(&walking_history(u, dt), 0.0, &p).unwrap() - exact).abs())
        .collect();
    assert!(errs[2] < 1e-3, "{errs:?}");
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}, errors {errs:?}");
    }
}

#[test]
fn constant_offset_history_normalization() {
    let p = Params::new(1.0, 2.0, 0.0, 1.0).unwrap();
    let c = PI / 2.0;
    for span in [5.0, 10.0, 20.0] {
        let h = MemoryHistory::from_path(|_| -c, 0.0, span, 1e-3, 1e-30).unwrap();
        let f = memory_force(&h, 0.0, &p).unwrap();
        let expected = 2.0 * (1.0 - (-span).exp());
        assert!((f - expected).abs() < 1e-6, "span {span}: {f} vs {expected}");
    }
    let h = MemoryHistory::from_path(|_| -c, 0.0, 27.7, 1e-3, DEFAULT_KERNEL_CUTOFF).unwrap();
    assert!((memory_force(&h, 0.0, &p).unwrap() - 2.0).abs() < 1e-6);
}
