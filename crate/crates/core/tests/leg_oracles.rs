//! Leg transmission checks against closed-form solutions of the rotation
//! model, computed independently of the numerical calibration path.

use std::sync::OnceLock;

use approx::assert_relative_eq;
use morphquad::transmission::{extent_of, signed_area_xz};
use morphquad::{ActuatorParams, AxisDynamics, LegRanges, TransmissionGeometry};
use proptest::prelude::*;

struct ClosedForm {
    theta0: f64,
    eta_l: f64,
    eta_s: f64,
}

/// Endpoint form of the lift sweep: with phi = theta0 +/- A the ranges are
/// dy = 2 sin A (l_oz cos theta0 - l_oy sin theta0) and
/// dz = 2 sin A (l_oy cos theta0 + l_oz sin theta0); their ratio fixes theta0.
fn closed_form(g: &TransmissionGeometry<f64>, target: LegRanges<f64>, stroke_um: f64) -> ClosedForm {
    let r = target.dy / target.dz;
    let theta0 = ((g.l_oz - r * g.l_oy) / (g.l_oy + r * g.l_oz)).atan();
    let (s, c) = theta0.sin_cos();
    let radial = g.l_oy * c + g.l_oz * s;
    let lift_amp = (target.dz / (2.0 * radial)).asin();
    let swing_amp = (target.dx / (2.0 * radial)).asin();
    ClosedForm {
        theta0,
        eta_l: lift_amp / (stroke_um / g.l_i),
        eta_s: swing_amp / (stroke_um / g.s_i),
    }
}

fn calibrated() -> TransmissionGeometry<f64> {
    static CAL: OnceLock<TransmissionGeometry<f64>> = OnceLock::new();
    *CAL.get_or_init(|| {
        TransmissionGeometry::default()
            .calibrate(&ActuatorParams::default(), LegRanges::measured(), 225.0)
            .unwrap()
    })
}

#[test]
fn calibration_matches_closed_form() {
    let ideal = TransmissionGeometry::<f64>::default();
    let cal = calibrated();
    let oracle = closed_form(&ideal, LegRanges::measured(), 360.0);
    assert_relative_eq!(cal.theta0, oracle.theta0, max_relative = 1e-8);
    assert_relative_eq!(cal.eta_l, oracle.eta_l, max_relative = 1e-8);
    assert_relative_eq!(cal.eta_s, oracle.eta_s, max_relative = 1e-8);
    // ~13 deg lift offset, within a degree
    assert!((cal.theta0.to_degrees() - 13.0).abs() < 1.0, "{}", cal.theta0.to_degrees());
    assert!(cal.eta_s > 0.0 && cal.eta_s <= 1.0);
    assert!(cal.eta_l > 0.0 && cal.eta_l <= 1.0);
    cal.validate().unwrap();
}

#[test]
fn calibration_round_trip() {
    let a = ActuatorParams::default();
    let cal = calibrated();
    let r = cal.workspace(&a, 225.0).unwrap();
    assert!((r.dx - 2.85).abs() / 2.85 < 0.01);
    assert!((r.dy - 2.05).abs() / 2.05 < 0.02);
    assert!((r.dz - 2.3).abs() / 2.3 < 0.02);

    // a different target is reproduced just as well
    let target = LegRanges { dx: 3.4, dy: 1.5, dz: 2.9 };
    let g = TransmissionGeometry::default().calibrate(&a, target, 200.0).unwrap();
    let r = g.workspace(&a, 200.0).unwrap();
    assert_relative_eq!(r.dx, 3.4, max_relative = 1e-6);
    assert_relative_eq!(r.dy, 1.5, max_relative = 1e-6);
    assert_relative_eq!(r.dz, 2.9, max_relative = 1e-6);
}

#[test]
fn ideal_reach_calibrates_to_unit_efficiency() {
    let a = ActuatorParams::default();
    let probe = TransmissionGeometry::<f64> {
        theta0: 0.2,
        ..Default::default()
    };
    let reach = probe.workspace(&a, 225.0).unwrap();
    let g = TransmissionGeometry::default().calibrate(&a, reach, 225.0).unwrap();
    assert_relative_eq!(g.eta_s, 1.0, max_relative = 1e-9);
    assert_relative_eq!(g.eta_l, 1.0, max_relative = 1e-9);
    assert_relative_eq!(g.theta0, 0.2, max_relative = 1e-8);
}

#[test]
fn lift_sweep_reaches_measured_ranges() {
    let cal = calibrated();
    let a = ActuatorParams::default();
    let (lift_amp, _) = cal.angles_from_actuation(&a, 360.0, 0.0).unwrap();
    // about +/-0.148 rad of lift about the offset
    assert!((lift_amp - 0.148).abs() < 0.002, "{lift_amp}");
    let pts: Vec<_> = (0..=400)
        .map(|k| cal.tip_position(lift_amp * (-1.0 + 2.0 * k as f64 / 400.0), 0.0))
        .collect();
    assert!((extent_of(pts.iter().copied(), 2) - 2.3).abs() / 2.3 < 0.02);
    assert!((extent_of(pts.iter().copied(), 1) - 2.05).abs() / 2.05 < 0.02);
}

#[test]
fn trajectory_shapes() {
    let g = calibrated();
    let a = ActuatorParams::default();
    let d = AxisDynamics::default();

    let flat = g.tip_trajectory(&a, &d, 225.0, 1.0, 0.0, 721).unwrap();
    let loop_area = signed_area_xz(&g.tip_trajectory(&a, &d, 225.0, 1.0, 90.0, 721).unwrap());
    assert!(signed_area_xz(&flat).abs() < 1e-9 * loop_area.abs());

    let fwd = g.tip_trajectory(&a, &d, 225.0, 1.0, 90.0, 721).unwrap();
    let rev = g.tip_trajectory(&a, &d, 225.0, 1.0, 270.0, 721).unwrap();
    let first = fwd[0];
    let last = fwd[fwd.len() - 1];
    for k in 0..3 {
        assert!((first[k] - last[k]).abs() < 1e-12);
    }
    assert_relative_eq!(signed_area_xz(&fwd), -signed_area_xz(&rev), max_relative = 1e-6);
    // same point set: each point of one loop lies on the other
    for p in rev.iter().step_by(7) {
        let nearest = fwd
            .iter()
            .map(|q| (0..3).map(|k| (p[k] - q[k]).powi(2)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest.sqrt() < 1e-9);
    }

    // quasi-static gain ~1.0006 at 1 Hz; x extent within the 1 % calibration band
    let dx = extent_of(fwd.iter().copied(), 0);
    let dz = extent_of(fwd.iter().copied(), 2);
    assert!((dx - 2.85).abs() / 2.85 < 0.01, "{dx}");
    assert!((dz - 2.3).abs() / 2.3 < 0.02, "{dz}");
}

#[test]
fn single_precision_calibration() {
    let g = TransmissionGeometry::<f32>::default()
        .calibrate(&ActuatorParams::default(), LegRanges::measured(), 225.0)
        .unwrap();
    let r = g.workspace(&ActuatorParams::default(), 225.0).unwrap();
    assert!((r.dx - 2.85).abs() / 2.85 < 0.01);
}

proptest! {
    #[test]
    fn tip_norm_is_leg_length(tl in -1.5f64..1.5, ts in -1.5f64..1.5, th0 in -0.5f64..0.5) {
        let g = TransmissionGeometry { theta0: th0, ..TransmissionGeometry::<f64>::default() };
        let p = g.tip_position(tl, ts);
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        prop_assert!((n - 10.4).abs() <= 1e-9 * 10.4);
    }

    #[test]
    fn swing_never_changes_height(tl in -0.3f64..0.3, ts in -1.0f64..1.0) {
        let g = calibrated();
        prop_assert_eq!(g.tip_position(tl, ts)[2], g.tip_position(tl, 0.0)[2]);
    }

    #[test]
    fn lift_stays_in_yz_plane(tl in -0.3f64..0.3) {
        let g = calibrated();
        prop_assert_eq!(g.tip_position(tl, 0.0)[0], 0.0);
    }
}
