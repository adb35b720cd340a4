use wpe_core::stability::r_critical;
use wpe_core::sweep::{
    run_lowmem_sweep, run_sweep, velocity_vs_b, Axis, InitRule, InitSpec, Plane, SweepSpec,
};
use wpe_core::{BehaviorClass, ClassifierConfig, IntegratorConfig, Params};

fn params(sigma: f64, r: f64, a: f64, b: f64) -> Params {
    Params::new(sigma, r, a, b).unwrap()
}

fn class_of(spec: &SweepSpec, i: usize, j: usize) -> BehaviorClass {
    run_sweep(spec, 1).unwrap().cell(i, j).outcome.as_ref().unwrap().class
}

#[test]
fn sigma_r_plane_cells() {
    let trough = InitSpec::rule(InitRule::TroughRest);
    // Two σ values by two r values; cell (σ=4, r=2) sits below r_c = 5.
    let spec = SweepSpec::new(Plane::SigmaR, params(1.0, 1.0, 1.0, 5.0), Axis::new(4.0, 20.0, 2), Axis::new(2.0, 15.0, 2), trough);
    let res = run_sweep(&spec, 1).unwrap();
    assert_eq!(res.cell(0, 0).outcome.as_ref().unwrap().class, BehaviorClass::Stationary);
    assert_eq!(res.cell(1, 1).outcome.as_ref().unwrap().class, BehaviorClass::Runaway);
    assert_eq!((res.cell(1, 1).axis1, res.cell(1, 1).axis2), (20.0, 15.0));
}

#[test]
fn ab_plane_free_walking_cell() {
    let spec = SweepSpec::new(
        Plane::AB,
        params(10.0, 10.0, 1.0, 1.0),
        Axis::new(1.0, 2.0, 2),
        Axis::new(5.0, 6.0, 2),
        InitSpec::rule(InitRule::FreeWalking),
    );
    assert_eq!(class_of(&spec, 0, 0), BehaviorClass::Runaway);
}

#[test]
fn boundary_consistency() {
    let fixed = params(1.0, 1.0, 1.0, 5.0);
    let mut spec = SweepSpec::new(Plane::SigmaR, fixed, Axis::new(1.0, 20.0, 8), Axis::new(1.0, 10.0, 10), InitSpec::rule(InitRule::TroughRest));
    spec.integrator.t_end = 500.0;
    let res = run_sweep(&spec, 2).unwrap();
    let eps = spec.axis2.step();
    assert_eq!(res.failed(), 0);
    for cell in &res.cells {
        let rc = r_critical(&fixed.with_sigma(cell.axis1).unwrap());
        let class = cell.outcome.as_ref().unwrap().class;
        if class == BehaviorClass::Stationary {
            assert!(cell.axis2 < rc + eps, "{cell:?} r_c {rc}");
        } else {
            assert!(cell.axis2 > rc - eps, "{cell:?} r_c {rc}");
        }
    }
    assert!(res.count(BehaviorClass::Stationary) > 0);
}

#[test]
fn worker_count_does_not_change_results() {
    let mut spec = SweepSpec::new(
        Plane::X0V0,
        params(35.0, 35.0, 2.0, 0.5),
        Axis::new(0.0, 6.0, 5),
        Axis::new(-6.0, 6.0, 5),
        InitSpec::rule(InitRule::VelocitySeeded),
    );
    spec.integrator.t_end = 300.0;
    spec.compute_lle = true;
    let a = run_sweep(&spec, 1).unwrap();
    let b = run_sweep(&spec, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, run_sweep(&spec, 1).unwrap());
    assert!(a.cells.iter().all(|c| c.outcome.as_ref().unwrap().lle.is_some()));
}

#[test]
fn lowmem_above_threshold_never_rests_or_wanders() {
    let mut spec = SweepSpec::new(
        Plane::AB,
        params(5.0, 5.0, 1.0, 1.0),
        Axis::new(0.1, 2.0, 6),
        Axis::new(0.1, 10.0, 6),
        InitSpec::rule(InitRule::TroughRest),
    );
    // At the default rel_tol of 1e-3 the discrete flow is not faithful enough
    // and a few cells look aperiodic.
    spec.integrator = spec.integrator.with_t_end(500.0).with_tolerances(1e-6, 1e-9);
    let res = run_lowmem_sweep(&spec, 1).unwrap();
    assert_eq!(res.failed(), 0);
    assert_eq!(res.count(BehaviorClass::Stationary), 0);
    assert_eq!(res.count(BehaviorClass::Irregular), 0);
    assert_eq!(res.provenance.system, "low-memory");

    spec.fixed = params(5.0, 2.0, 1.0, 1.0);
    let res = run_lowmem_sweep(&spec, 1).unwrap();
    assert_eq!(res.count(BehaviorClass::Stationary), res.cells.len());
}

#[test]
fn velocity_curve_dips() {
    let fixed = params(10.0, 10.0, 1.0, 1.0);
    let integ = IntegratorConfig::default();
    let cls = ClassifierConfig::default();
    let norm = |lo: f64, hi: f64, n: usize| {
        velocity_vs_b(&fixed, &Axis::new(lo, hi, n), &[3.0], &integ, &cls, 1).unwrap()
    };
    let first = norm(1.4, 1.6, 5);
    let min = first.iter().filter_map(|r| r.avg_speed_normalized).fold(f64::INFINITY, f64::min);
    assert!(min < 0.05, "first dip {min}");
    assert!(first.iter().any(|r| r.class == Ok(BehaviorClass::BackAndForth)));

    let far = norm(0.75, 0.8, 2);
    assert!(far[0].avg_speed_normalized.unwrap() > 0.2);
    assert_eq!(far[0].class, Ok(BehaviorClass::Runaway));

    let second = norm(2.4, 3.2, 17);
    let min2 = second.iter().filter_map(|r| r.avg_speed_normalized).fold(f64::INFINITY, f64::min);
    assert!(min2 > 0.2 && min2 < 0.9, "second dip {min2}");
    assert!(second.iter().all(|r| r.class == Ok(BehaviorClass::Runaway)));
}
