//! Spherical five-bar leg transmission.
//!
//! The linkage is reduced to a rigid leg vector rotated first about the
//! module's fore-aft axis (lift) and then about the vertical axis (swing).
//! Leg-module frame: `x` points along the retraction direction of the swing
//! stroke, `y` outward from the body, `z` up. Each crank-slider is treated as
//! a small-angle crank, with a lumped efficiency per axis that absorbs flexure
//! and ground losses.

use crate::actuator::ActuatorParams;
use crate::error::{Error, Result};
use crate::response::{Axis, AxisDynamics};
use crate::scalar::{lit, Real};
use crate::solve::bisect;

/// Samples per cycle used when sweeping the workspace. Divisible by four so
/// the sinusoid peaks are hit exactly.
const SWEEP_SAMPLES: usize = 1440;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionGeometry<T> {
    /// Lift crank offset, µm.
    pub l_i: T,
    /// Swing crank offset, µm.
    pub s_i: T,
    /// Overall leg length, mm.
    pub l_o: T,
    /// Swing output radius, mm.
    pub l_oy: T,
    /// Lift output radius, mm.
    pub l_oz: T,
    pub t_l: T,
    pub t_s: T,
    pub eta_s: T,
    pub eta_l: T,
    /// Nominal lift-axis offset, rad.
    pub theta0: T,
    /// Effective force transmission ratio (actuator force / leg force).
    pub t_f: T,
}

/// Peak-to-peak leg tip ranges of motion, mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegRanges<T> {
    /// Protraction-retraction.
    pub dx: T,
    /// Abduction-adduction.
    pub dy: T,
    /// Elevation-depression.
    pub dz: T,
}

impl<T: Real> LegRanges<T> {
    /// Bench-measured ranges at 225 V.
    pub fn measured() -> Self {
        Self {
            dx: lit(2.85),
            dy: lit(2.05),
            dz: lit(2.3),
        }
    }
}

impl<T: Real> Default for TransmissionGeometry<T> {
    /// Ideal (lossless, zero offset) geometry. The lift output radius is
    /// derived from the overall length and the swing radius so that the leg
    /// vector has exactly the overall length.
    fn default() -> Self {
        let l_o = lit::<T>(10.4);
        let l_oy = lit::<T>(6.0);
        let l_i = lit::<T>(375.0);
        let s_i = lit::<T>(375.0);
        let um_per_mm = lit::<T>(1000.0);
        Self {
            l_i,
            s_i,
            l_o,
            l_oy,
            l_oz: (l_o * l_o - l_oy * l_oy).sqrt(),
            t_l: l_oy * um_per_mm / l_i,
            t_s: l_oy * um_per_mm / s_i,
            eta_s: T::one(),
            eta_l: T::one(),
            theta0: T::zero(),
            t_f: lit(24.5),
        }
    }
}

fn rel_close<T: Real>(a: T, b: T, tol: f64) -> bool {
    (a - b).abs() <= lit::<T>(tol) * a.abs().max(b.abs())
}

impl<T: Real> TransmissionGeometry<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l_i", self.l_i),
            ("s_i", self.s_i),
            ("l_o", self.l_o),
            ("l_oy", self.l_oy),
            ("l_oz", self.l_oz),
            ("t_f", self.t_f),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::Domain(format!("transmission {name} must be positive, got {v}")));
            }
        }
        let norm = (self.l_oy * self.l_oy + self.l_oz * self.l_oz).sqrt();
        if !rel_close(norm, self.l_o, 1e-6) {
            return Err(Error::Domain(format!(
                "leg radii ({}, {}) do not close to overall length {} (|r| = {norm})",
                self.l_oy, self.l_oz, self.l_o
            )));
        }
        let um_per_mm = lit::<T>(1000.0);
        if !rel_close(self.t_l, self.l_oy * um_per_mm / self.l_i, 1e-6)
            || !rel_close(self.t_s, self.l_oy * um_per_mm / self.s_i, 1e-6)
        {
            return Err(Error::Domain(format!(
                "transmission ratios ({}, {}) inconsistent with l_oy / crank offsets",
                self.t_l, self.t_s
            )));
        }
        for (name, eta) in [("eta_s", self.eta_s), ("eta_l", self.eta_l)] {
            if !(eta > T::zero() && eta <= T::one()) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1], got {eta}")));
            }
        }
        Ok(())
    }

    /// Crank angles (lift, swing) in radians for signed actuator strokes in µm.
    pub fn angles_from_actuation(
        &self,
        actuator: &ActuatorParams<T>,
        delta_l: T,
        delta_s: T,
    ) -> Result<(T, T)> {
        let limit = actuator.k_delta * actuator.v_max / lit(2.0);
        for (name, d) in [("lift stroke", delta_l), ("swing stroke", delta_s)] {
            if !(d.abs() <= limit) {
                return Err(Error::OutOfRange {
                    quantity: name,
                    value: d.as_f64(),
                    min: -limit.as_f64(),
                    max: limit.as_f64(),
                });
            }
        }
        Ok(self.crank_angles(delta_l, delta_s))
    }

    pub(crate) fn crank_angles(&self, delta_l: T, delta_s: T) -> (T, T) {
        (self.eta_l * delta_l / self.l_i, self.eta_s * delta_s / self.s_i)
    }

    /// Distance of the tip from the swing (vertical) axis at lift angle `theta_l`.
    pub fn swing_radius(&self, theta_l: T) -> T {
        let phi = self.theta0 + theta_l;
        self.l_oy * phi.cos() + self.l_oz * phi.sin()
    }

    /// Leg tip position in mm for crank angles in radians.
    pub fn tip_position(&self, theta_l: T, theta_s: T) -> [T; 3] {
        let phi = self.theta0 + theta_l;
        let (s, c) = phi.sin_cos();
        let radial = self.l_oy * c + self.l_oz * s;
        let z = self.l_oy * s - self.l_oz * c;
        let (ss, cs) = theta_s.sin_cos();
        [-radial * ss, radial * cs, z]
    }

    /// Vertical blocked force at the leg tip, mN.
    pub fn leg_blocked_force(&self, actuator: &ActuatorParams<T>, v: T) -> Result<T> {
        Ok(actuator.blocked_force_amp(v)? / self.t_f)
    }

    /// Ranges of motion under independent full-amplitude swing and lift
    /// sweeps at drive amplitude `v`. Swing is swept at zero lift and lift at
    /// zero swing.
    pub fn workspace(&self, actuator: &ActuatorParams<T>, v: T) -> Result<LegRanges<T>> {
        let stroke = actuator.free_deflection_pp(v)? / lit(2.0);
        let (lift_amp, swing_amp) = self.crank_angles(stroke, stroke);
        let (dy, dz) = self.lift_sweep_extents(lift_amp);
        Ok(LegRanges {
            dx: self.swing_sweep_extent(swing_amp),
            dy,
            dz,
        })
    }

    fn swing_sweep_extent(&self, amp: T) -> T {
        let pts = sweep(amp).map(|a| self.tip_position(T::zero(), a));
        extent_of(pts, 0)
    }

    fn lift_sweep_extents(&self, amp: T) -> (T, T) {
        let pts: Vec<_> = sweep(amp).map(|a| self.tip_position(a, T::zero())).collect();
        (extent_of(pts.iter().copied(), 1), extent_of(pts.iter().copied(), 2))
    }

    /// Fits `eta_s`, `eta_l` and `theta0` so that independent swing and lift
    /// sweeps at `v_ref` reproduce the target ranges of motion.
    pub fn calibrate(
        &self,
        actuator: &ActuatorParams<T>,
        target: LegRanges<T>,
        v_ref: T,
    ) -> Result<Self> {
        if !(target.dx > T::zero() && target.dy > T::zero() && target.dz > T::zero()) {
            return Err(Error::Domain(format!(
                "target ranges must be positive, got ({}, {}, {})",
                target.dx, target.dy, target.dz
            )));
        }
        if !(v_ref > T::zero()) {
            return Err(Error::Domain(format!("reference voltage must be positive, got {v_ref}")));
        }
        let stroke = actuator.free_deflection_pp(v_ref)? / lit(2.0);
        let tol = T::epsilon() * lit(64.0);
        let max_iter = 200;

        let mut g = *self;
        g.eta_s = T::one();
        g.eta_l = T::one();
        let (lift_max, swing_max) = g.crank_angles(stroke, stroke);

        let fail = |reason: &str, g: &Self| {
            let reach = g.workspace(actuator, v_ref).ok();
            let residuals = match reach {
                Some(r) => [
                    (target.dx - r.dx).as_f64(),
                    (target.dy - r.dy).as_f64(),
                    (target.dz - r.dz).as_f64(),
                ],
                None => [f64::NAN; 3],
            };
            Error::Calibration {
                reason: reason.to_string(),
                residuals,
            }
        };

        // Lift amplitude that yields the target elevation range at a given offset.
        let lift_amp_for = |g: &Self, theta0: T| -> Option<T> {
            let mut h = *g;
            h.theta0 = theta0;
            solve_reach(|a| h.lift_sweep_extents(a).1, target.dz, lift_max, tol, max_iter)
        };

        let target_ratio = target.dy / target.dz;
        let ratio_residual = |theta0: T| -> T {
            // the ratio barely depends on amplitude, so a saturated stroke
            // still ranks offsets correctly when the target is at full reach
            let a = lift_amp_for(&g, theta0).unwrap_or(lift_max);
            let mut h = g;
            h.theta0 = theta0;
            let (dy, dz) = h.lift_sweep_extents(a);
            dy / dz - target_ratio
        };
        let theta0 = bisect(ratio_residual, lit(-0.5), lit(0.9), tol, max_iter)
            .filter(|t| t.is_finite())
            .ok_or_else(|| fail("no lift offset reproduces the abduction/elevation ratio", &g))?;
        g.theta0 = theta0;
        let lift_amp = lift_amp_for(&g, theta0)
            .ok_or_else(|| fail("elevation range unreachable with eta_l <= 1", &g))?;
        g.eta_l = lift_amp / lift_max;

        let swing_amp = solve_reach(|a| g.swing_sweep_extent(a), target.dx, swing_max, tol, max_iter)
        .ok_or_else(|| fail("protraction range unreachable with eta_s <= 1", &g))?;
        g.eta_s = swing_amp / swing_max;

        if !(g.eta_s > T::zero() && g.eta_s <= T::one() && g.eta_l > T::zero() && g.eta_l <= T::one()) {
            return Err(fail("efficiency outside (0, 1]", &g));
        }
        Ok(g)
    }

    /// One closed cycle of tip positions under sinusoidal lift and swing
    /// strokes at amplitude `v`, lift leading swing by `phase_offset_deg`.
    /// Stroke amplitudes are scaled by the per-axis gain at frequency `f`.
    /// The first and last samples coincide.
    pub fn tip_trajectory(
        &self,
        actuator: &ActuatorParams<T>,
        dynamics: &AxisDynamics<T>,
        v: T,
        f: T,
        phase_offset_deg: T,
        n: usize,
    ) -> Result<Vec<[T; 3]>> {
        if n < 8 {
            return Err(Error::Domain(format!("trajectory needs at least 8 samples, got {n}")));
        }
        let full = lit::<T>(360.0);
        if !(phase_offset_deg >= T::zero() && phase_offset_deg < full) {
            return Err(Error::OutOfRange {
                quantity: "phase offset (deg)",
                value: phase_offset_deg.as_f64(),
                min: 0.0,
                max: 360.0,
            });
        }
        if !(f >= T::zero()) {
            return Err(Error::Domain(format!("frequency must be non-negative, got {f}")));
        }
        let stroke = actuator.free_deflection_pp(v)? / lit(2.0);
        let (g_lift, _) = dynamics.frequency_gain(Axis::Lift, f);
        let (g_swing, _) = dynamics.frequency_gain(Axis::Swing, f);
        let offset = phase_offset_deg.to_radians();
        let tau = T::TAU();
        let last = T::from_usize(n - 1).expect("sample count");
        Ok((0..n)
            .map(|k| {
                let th = tau * T::from_usize(k).expect("sample index") / last;
                let dl = stroke * g_lift * (th + offset).sin();
                let ds = stroke * g_swing * th.sin();
                let (al, as_) = self.crank_angles(dl, ds);
                self.tip_position(al, as_)
            })
            .collect())
    }
}

fn sweep<T: Real>(amp: T) -> impl Iterator<Item = T> {
    let n = T::from_usize(SWEEP_SAMPLES).expect("sample count");
    (0..SWEEP_SAMPLES).map(move |k| amp * (T::TAU() * T::from_usize(k).expect("index") / n).sin())
}

/// Peak-to-peak extent of a point set along coordinate `axis`.
pub fn extent_of<T: Real>(points: impl IntoIterator<Item = [T; 3]>, axis: usize) -> T {
    let (lo, hi) = points
        .into_iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| (lo.min(p[axis]), hi.max(p[axis])));
    if lo > hi {
        T::zero()
    } else {
        hi - lo
    }
}

/// Signed area enclosed by the x-z projection of a closed polyline
/// (shoelace formula; counter-clockwise in the x-z plane is positive).
pub fn signed_area_xz<T: Real>(points: &[[T; 3]]) -> T {
    let n = points.len();
    if n < 3 {
        return T::zero();
    }
    let twice: T = (0..n)
        .map(|i| {
            let a = points[i];
            let b = points[(i + 1) % n];
            a[0] * b[2] - b[0] * a[2]
        })
        .fold(T::zero(), |acc, v| acc + v);
    twice / lit(2.0)
}

/// Amplitude in `[0, max]` at which the monotone `extent` equals `target`.
/// A target within rounding of the full-stroke extent maps to `max`.
fn solve_reach<T: Real, F: Fn(T) -> T>(extent: F, target: T, max: T, tol: T, max_iter: usize) -> Option<T> {
    let full = extent(max);
    if full < target && target - full <= target * lit(1e-9) {
        return Some(max);
    }
    bisect(|a| extent(a) - target, T::zero(), max, tol, max_iter)
}
