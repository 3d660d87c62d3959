mod common;

use std::f64::consts::PI;

use common::*;
use weakwave::analysis::*;
use weakwave::engine::*;
use weakwave::scenario::*;
use weakwave::state::GridSpec;
use weakwave::Complex64;

fn scan(s: &weakwave::state::GridState, k0: f64) -> WeakValueProfile {
    scan_weak_values(s, 20f64.to_radians(), &PostSelection::point(k0), 1.0).unwrap()
}

#[test]
fn displaced_slit_is_equivalent_to_a_phase_gradient() {
    let spec = reference_grid();
    let optics = OpticalParams {
        slit_offset_um: 20.0,
        ..OpticalParams::default()
    };
    let m = optics.phase_gradient();
    let flat = prepare(&Scenario::truncated_gaussian(optics), &spec).unwrap();
    let tilted = prepare(&Scenario::new(ScenarioKind::PhaseGradient, optics), &spec).unwrap();
    // a tilt is undone by following it in momentum
    let a = scan(&tilted, m);
    let b = scan(&flat, 0.0);
    // and selecting -m on the flat beam reads the same profile as the tilt at 0
    let c = scan(&flat, -m);
    let d = scan(&tilted, 0.0);
    for i in 0..spec.n_points() {
        assert!((a.values[i] - b.values[i]).norm() < 1e-10);
        assert!((c.values[i] - d.values[i]).norm() < 1e-10);
    }
}

#[test]
fn linear_fits_hold_over_a_decade_of_gradients() {
    let spec = reference_grid();
    for off in [4.0, 12.0, 40.0] {
        let optics = OpticalParams {
            slit_offset_um: off,
            ..OpticalParams::default()
        };
        let s = prepare(&Scenario::new(ScenarioKind::PhaseGradient, optics), &spec).unwrap();
        let fit = fit_linear_phase(&extract_phase(&scan(&s, 0.0)).unwrap()).unwrap();
        let m = optics.phase_gradient();
        assert!((fit.coefficient / m - 1.0).abs() < 1e-2, "{off}: {} vs {m}", fit.coefficient);
        assert!(fit.residual_rms.is_finite());
    }
}

#[test]
fn quadratic_fits_hold_over_a_decade_of_curvatures() {
    let spec = reference_grid();
    for dz in [80.0, 250.0, 800.0] {
        let optics = OpticalParams {
            lens_shift_um: dz,
            ..OpticalParams::default()
        };
        let s = prepare(&Scenario::new(ScenarioKind::PhaseCurvature, optics), &spec).unwrap();
        let fit = fit_quadratic_phase(&extract_phase(&scan(&s, 0.0)).unwrap()).unwrap();
        let r = optics.phase_curvature();
        assert!((fit.coefficient / r - 1.0).abs() < 2e-2, "{dz}: {} vs {r}", fit.coefficient);
    }
}

#[test]
fn flat_beam_fits_to_zero() {
    let s = reference_gaussian();
    let pp = extract_phase(&scan(&s, 0.0)).unwrap();
    assert!(fit_linear_phase(&pp).unwrap().coefficient.abs() < 1e-6);
    assert!(fit_quadratic_phase(&pp).unwrap().coefficient.abs() < 1e-6);
}

#[test]
fn global_phase_shifts_phase_but_not_fits() {
    let optics = OpticalParams {
        lens_shift_um: 400.0,
        ..OpticalParams::default()
    };
    let s = prepare(&Scenario::new(ScenarioKind::PhaseCurvature, optics), &reference_grid()).unwrap();
    let p = scan(&s, 0.0);
    let mut q = p.clone();
    let theta = 2.3;
    for v in &mut q.values {
        *v *= Complex64::from_polar(1.0, theta);
    }
    let (a, b) = (extract_phase(&p).unwrap(), extract_phase(&q).unwrap());
    for (u, v) in a.phase.iter().zip(&b.phase) {
        let turns = (v - u - theta) / (2.0 * PI);
        assert!((turns - turns.round()).abs() < 1e-9);
    }
    let (fa, fb) = (fit_quadratic_phase(&a).unwrap(), fit_quadratic_phase(&b).unwrap());
    assert!((fa.coefficient - fb.coefficient).abs() < 1e-9);
}

#[test]
fn magnitude_floor_only_drops_faint_bins() {
    let s = reference_gaussian();
    let p = scan(&s, 0.0);
    let pp = extract_phase(&p).unwrap();
    let peak = s.amplitudes().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    for i in 0..s.len() {
        if !pp.bins.contains(&i) {
            assert!(s.amplitudes()[i].norm_sqr() < 1e-4 * peak);
        }
    }
}

#[test]
fn bullseye_dip_is_recovered() {
    let spec = reference_grid();
    let s = prepare(&Scenario::new(ScenarioKind::Bullseye, OpticalParams::default()), &spec).unwrap();
    let rep = compare_probability(&scan(&s, 0.0), &probability_scan(&s)).unwrap();
    assert!(rep.l1 <= 0.02, "{rep:?}");
    // the center really is darker than the shoulders of the plain beam
    let plain = reference_gaussian();
    let mid = spec.n_points() / 2;
    assert!(s.amplitudes()[mid].norm() < 0.5 * plain.amplitudes()[mid].norm());
}

#[test]
fn glass_step_over_bullseye() {
    let spec = reference_grid();
    let mut sc = Scenario::new(ScenarioKind::GlassStep, OpticalParams::default());
    sc.step_over_bullseye = true;
    sc.step_phase_rad = 1.0;
    let plate = scan(&prepare(&sc, &spec).unwrap(), 0.0);
    let bare = scan(&prepare(&sc.without_phase(), &spec).unwrap(), 0.0);
    let diff = phase_difference(&plate, &bare, DEFAULT_MAGNITUDE_FLOOR).unwrap();
    assert!((diff.step_across(0.0).unwrap() - 1.0).abs() <= 0.02);
}

#[test]
fn five_degree_probability_matches() {
    let s = reference_gaussian();
    let p = scan_weak_values(&s, 5f64.to_radians(), &PostSelection::point(0.0), 1.0).unwrap();
    assert!(compare_probability(&p, &probability_scan(&s)).unwrap().l1 <= 0.01);
}

#[test]
fn coarse_and_narrow_grids_are_refused() {
    let sc = Scenario::truncated_gaussian(OpticalParams::default());
    assert!(prepare(&sc, &GridSpec::centered(256, 32.0).unwrap()).is_err());
    assert!(prepare(&sc, &GridSpec::centered(1024, 16.0).unwrap()).is_err());
}
