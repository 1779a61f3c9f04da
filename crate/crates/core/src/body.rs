//! Rhomboid closed-chain body.
//!
//! Four leg modules form the sides of a rhombus hinged at the corners. The
//! shape has one degree of freedom, the half-angle `alpha` between the body's
//! long axis and a side: `L = 2a cos(alpha)`, `W = 2a sin(alpha)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gait::LEG_COUNT;
use crate::scalar::{lit, Real};

/// Number of intermodule flexure joints.
pub const JOINT_COUNT: usize = 4;

/// The three fixed shape classes used in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeClass {
    Long,
    Square,
    Wide,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 3] = [ShapeClass::Long, ShapeClass::Square, ShapeClass::Wide];

    pub fn aspect_ratio<T: Real>(self) -> T {
        match self {
            ShapeClass::Long => lit(2.1),
            ShapeClass::Square => T::one(),
            ShapeClass::Wide => lit(0.48),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ShapeClass::Long => "long",
            ShapeClass::Square => "square",
            ShapeClass::Wide => "wide",
        }
    }
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShapeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShapeClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown body shape `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BodyMode<T> {
    /// Shape locked at the given half-angle, degrees.
    Fixed(T),
    Compliant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyGeometry<T> {
    /// Rhombus side length, mm.
    pub side_a: T,
    /// Rest half-angle, degrees.
    pub alpha0: T,
    /// Torsional stiffness per joint, mN·mm/rad.
    pub k_joint: T,
    /// Torsional damping per joint, mN·mm·s/rad.
    pub c_joint: T,
    pub mode: BodyMode<T>,
    /// Mass per leg module, mg.
    pub module_mass: T,
    /// Narrowest admissible half-angle (longest shape), degrees.
    pub alpha_min: T,
    /// Widest admissible half-angle, degrees.
    pub alpha_max: T,
    /// Lumped torsional stiffness, mN·mm/rad, that the stance legs push
    /// against. A compliant body delivers `k / (k + k_load)` of the leg
    /// stroke to the body; the rest is absorbed by joint deflection.
    pub k_load: T,
}

/// Joint stiffness at which a compliant body reaches 95 % of the speed of a
/// rigid body of the same rest shape (see `sweep::tune_joint_stiffness`).
pub const TUNED_K_JOINT: f64 = 190.0;
pub const DEFAULT_K_LOAD: f64 = 10.0;
pub const DEFAULT_C_JOINT: f64 = 2.0;
/// Rest aspect ratio of the compliant body.
pub const COMPLIANT_REST_AR: f64 = 1.2;

impl<T: Real> Default for BodyGeometry<T> {
    fn default() -> Self {
        Self {
            side_a: lit(24.0),
            alpha0: alpha_from_ar_unchecked(lit(COMPLIANT_REST_AR)),
            k_joint: lit(TUNED_K_JOINT),
            c_joint: lit(DEFAULT_C_JOINT),
            mode: BodyMode::Compliant,
            module_mass: lit(648.0),
            alpha_min: alpha_from_ar_unchecked(ShapeClass::Long.aspect_ratio()),
            alpha_max: alpha_from_ar_unchecked(ShapeClass::Wide.aspect_ratio()),
            k_load: lit(DEFAULT_K_LOAD),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyShape<T> {
    /// Half-angle, degrees.
    pub alpha: T,
    pub length: T,
    pub width: T,
    pub aspect_ratio: T,
}

fn alpha_from_ar_unchecked<T: Real>(ar: T) -> T {
    ar.recip().atan().to_degrees()
}

/// Half-angle in degrees giving body aspect ratio `ar`.
pub fn alpha_from_aspect_ratio<T: Real>(ar: T) -> Result<T> {
    if !(ar > T::zero() && ar.is_finite()) {
        return Err(Error::Domain(format!("aspect ratio must be positive, got {ar}")));
    }
    Ok(alpha_from_ar_unchecked(ar))
}

impl<T: Real> BodyGeometry<T> {
    /// Rigid body locked in one of the shape classes.
    pub fn fixed(class: ShapeClass) -> Self {
        let alpha = alpha_from_ar_unchecked(class.aspect_ratio());
        Self {
            alpha0: alpha,
            mode: BodyMode::Fixed(alpha),
            ..Self::default()
        }
    }

    /// Compliant body resting at aspect ratio `rest_ar` with joint stiffness `k_joint`.
    pub fn compliant(rest_ar: T, k_joint: T) -> Result<Self> {
        let g = Self {
            alpha0: alpha_from_aspect_ratio(rest_ar)?,
            k_joint,
            mode: BodyMode::Compliant,
            ..Self::default()
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ninety = lit::<T>(90.0);
        if !(self.side_a > T::zero()) {
            return Err(Error::Domain(format!("side length must be positive, got {}", self.side_a)));
        }
        let in_open = |a: T| a > T::zero() && a < ninety;
        if !in_open(self.alpha0) {
            return Err(Error::Domain(format!("rest half-angle {} outside (0, 90) deg", self.alpha0)));
        }
        if !(in_open(self.alpha_min) && in_open(self.alpha_max) && self.alpha_min <= self.alpha_max) {
            return Err(Error::Domain(format!(
                "half-angle limits [{}, {}] deg invalid",
                self.alpha_min, self.alpha_max
            )));
        }
        if let BodyMode::Fixed(a) = self.mode {
            if !in_open(a) {
                return Err(Error::Domain(format!("fixed half-angle {a} outside (0, 90) deg")));
            }
        }
        if !(self.k_joint >= T::zero() && self.c_joint >= T::zero() && self.k_load >= T::zero()) {
            return Err(Error::Domain("joint stiffness and damping must be non-negative".to_string()));
        }
        if !(self.module_mass > T::zero()) {
            return Err(Error::Domain(format!("module mass must be positive, got {}", self.module_mass)));
        }
        Ok(())
    }

    pub fn total_mass(&self) -> T {
        self.module_mass * lit(LEG_COUNT as f64)
    }

    pub fn is_compliant(&self) -> bool {
        matches!(self.mode, BodyMode::Compliant)
    }

    /// Half-angle the body sits at without external load, degrees.
    pub fn rest_alpha(&self) -> T {
        match self.mode {
            BodyMode::Fixed(a) => a,
            BodyMode::Compliant => self.alpha0,
        }
    }

    pub fn shape_from_alpha(&self, alpha_deg: T) -> Result<BodyShape<T>> {
        if !(alpha_deg > T::zero() && alpha_deg < lit(90.0)) {
            return Err(Error::Domain(format!("half-angle {alpha_deg} deg outside (0, 90)")));
        }
        let (s, c) = alpha_deg.to_radians().sin_cos();
        let two_a = lit::<T>(2.0) * self.side_a;
        Ok(BodyShape {
            alpha: alpha_deg,
            length: two_a * c,
            width: two_a * s,
            aspect_ratio: c / s,
        })
    }

    pub fn rest_shape(&self) -> BodyShape<T> {
        self.shape_from_alpha(self.rest_alpha()).expect("validated rest half-angle")
    }

    pub fn width_at(&self, alpha_deg: T) -> T {
        lit::<T>(2.0) * self.side_a * alpha_deg.to_radians().sin()
    }

    /// Narrowest body width reachable within the half-angle limits, mm.
    pub fn min_width(&self) -> T {
        self.width_at(self.alpha_min)
    }

    /// Largest half-angle whose width fits in `w_max`, degrees. Errors when
    /// even the narrowest admissible shape is too wide.
    pub fn alpha_limit_for_width(&self, w_max: T) -> Result<T> {
        let min_width = self.min_width();
        if !(w_max >= min_width) {
            return Err(Error::InfeasibleGap {
                width: w_max.as_f64(),
                min_width: min_width.as_f64(),
            });
        }
        let ratio = (w_max / (lit::<T>(2.0) * self.side_a)).min(T::one());
        Ok(ratio.asin().to_degrees())
    }

    /// Static shape of the compliant body between rigid frictionless walls
    /// `w_max` apart.
    pub fn equilibrium_under_width_limit(&self, w_max: T) -> Result<BodyShape<T>> {
        if !self.is_compliant() {
            return Err(Error::Domain("width equilibrium requires a compliant body".to_string()));
        }
        if !(w_max > T::zero()) {
            return Err(Error::Domain(format!("wall spacing must be positive, got {w_max}")));
        }
        let rest = self.rest_shape();
        if rest.width <= w_max {
            return Ok(rest);
        }
        let alpha = self.alpha_limit_for_width(w_max)?;
        let mut shape = self.shape_from_alpha(alpha)?;
        // asin/sin round trip can land an ulp above the wall
        shape.width = w_max;
        Ok(shape)
    }

    /// Generalized torque on the half-angle from the four lumped joints,
    /// mN·mm. `alpha` in rad, `alpha_rate` in rad/s.
    pub fn restoring_torque(&self, alpha: T, alpha_rate: T) -> T {
        let joints = lit::<T>(JOINT_COUNT as f64);
        -joints * self.k_joint * (alpha - self.alpha0.to_radians()) - joints * self.c_joint * alpha_rate
    }

    /// Fraction of the stance stroke that moves the body.
    pub fn propulsion_efficiency(&self) -> T {
        match self.mode {
            BodyMode::Fixed(_) => T::one(),
            BodyMode::Compliant => {
                let denom = self.k_joint + self.k_load;
                if denom > T::zero() {
                    self.k_joint / denom
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Propulsion directions of the four modules (unit vectors, world frame).
/// Each module pushes along its rhombus side: front-left and rear-right at
/// `heading - alpha`, front-right and rear-left at `heading + alpha`.
pub fn module_headings<T: Real>(shape: &BodyShape<T>, body_heading_deg: T) -> [[T; 2]; LEG_COUNT] {
    let a = shape.alpha;
    let h = body_heading_deg;
    [h - a, h + a, h + a, h - a].map(|deg| {
        let (s, c) = deg.to_radians().sin_cos();
        [c, s]
    })
}

/// Module centres (rhombus side midpoints) in the body frame, mm.
pub fn module_centers<T: Real>(side_a: T, alpha_deg: T) -> [[T; 2]; LEG_COUNT] {
    let (s, c) = alpha_deg.to_radians().sin_cos();
    let half = side_a * lit(0.5);
    let (x, y) = (half * c, half * s);
    [[x, y], [x, -y], [-x, y], [-x, -y]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geom() -> BodyGeometry<f64> {
        BodyGeometry::default()
    }

    #[test]
    fn square_shape() {
        let s = geom().shape_from_alpha(45.0).unwrap();
        assert_relative_eq!(s.length, 48.0 * 45f64.to_radians().cos(), max_relative = 1e-12);
        assert_relative_eq!(s.length, s.width, max_relative = 1e-12);
        assert_relative_eq!(s.aspect_ratio, 1.0, max_relative = 1e-12);
        assert!((s.length - 34.0).abs() / 34.0 < 0.004);
    }

    #[test]
    fn long_and_wide_extremes() {
        let g = geom();
        let long = g.shape_from_alpha(alpha_from_aspect_ratio(2.1).unwrap()).unwrap();
        assert_relative_eq!(long.alpha, 25.463_345_061_871_89, max_relative = 1e-9);
        assert_relative_eq!(long.aspect_ratio, 2.1, max_relative = 1e-12);
        assert!((long.length - 43.33).abs() < 0.01, "{}", long.length);
        assert!((long.width - 20.63).abs() < 0.01, "{}", long.width);
        let wide = g.shape_from_alpha(90.0 - long.alpha).unwrap();
        assert_relative_eq!(wide.aspect_ratio, 1.0 / 2.1, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_angles_rejected() {
        assert!(geom().shape_from_alpha(0.0).is_err());
        assert!(geom().shape_from_alpha(90.0).is_err());
        assert!(alpha_from_aspect_ratio(0.0f64).is_err());
        assert!(alpha_from_aspect_ratio(-1.0f64).is_err());
    }

    #[test]
    fn default_mass() {
        assert_eq!(geom().total_mass(), 2592.0);
    }

    #[test]
    fn gap_equilibrium() {
        let g = BodyGeometry::<f64>::compliant(1.2, 190.0).unwrap();
        let rest = g.rest_shape();
        assert!((rest.width - 30.73).abs() < 0.01);
        let s = g.equilibrium_under_width_limit(22.0).unwrap();
        assert_eq!(s.width, 22.0);
        // sin(alpha) = 11/24
        let expected_ar = (11f64 / 24.0).asin().tan().recip();
        assert_relative_eq!(s.aspect_ratio, expected_ar, max_relative = 1e-9);
        assert!((s.aspect_ratio - 1.94).abs() < 0.01);
        let compression = (rest.width - 22.0) / rest.width;
        assert!((compression - 0.283).abs() < 0.002);
    }

    #[test]
    fn inactive_constraint() {
        let g = BodyGeometry::<f64>::compliant(1.2, 190.0).unwrap();
        assert_eq!(g.equilibrium_under_width_limit(40.0).unwrap(), g.rest_shape());
    }

    #[test]
    fn infeasible_gap() {
        let g = BodyGeometry::<f64>::compliant(1.2, 190.0).unwrap();
        match g.equilibrium_under_width_limit(15.0) {
            Err(Error::InfeasibleGap { min_width, .. }) => assert!((min_width - 20.63).abs() < 0.01),
            other => panic!("{other:?}"),
        }
        assert!(BodyGeometry::<f64>::fixed(ShapeClass::Square)
            .equilibrium_under_width_limit(22.0)
            .is_err());
    }

    #[test]
    fn headings() {
        let g = geom();
        let sq = g.shape_from_alpha(45.0).unwrap();
        for h in module_headings(&sq, 0.0) {
            assert_relative_eq!(h[0], std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-12);
        }
        let long = g.shape_from_alpha(alpha_from_aspect_ratio(2.1).unwrap()).unwrap();
        assert!((module_headings(&long, 0.0)[0][0] - 0.903).abs() < 5e-4);
        let wide = g.shape_from_alpha(alpha_from_aspect_ratio(0.48).unwrap()).unwrap();
        assert!((module_headings(&wide, 0.0)[0][0] - 0.4327).abs() < 5e-4);
    }

    #[test]
    fn torque() {
        let mut g = geom();
        let a0 = g.alpha0.to_radians();
        assert_eq!(g.restoring_torque(a0, 0.0), 0.0);
        g.k_joint = 50.0;
        assert_relative_eq!(g.restoring_torque(a0 + 0.1, 0.0), -20.0, max_relative = 1e-9);
        g.k_joint = 0.0;
        assert_eq!(g.restoring_torque(a0 + 0.3, 0.0), 0.0);
    }

    #[test]
    fn efficiency() {
        assert_eq!(BodyGeometry::<f64>::fixed(ShapeClass::Wide).propulsion_efficiency(), 1.0);
        assert_eq!(BodyGeometry::compliant(1.2, 0.0).unwrap().propulsion_efficiency(), 0.0);
        assert_relative_eq!(
            BodyGeometry::compliant(1.2, 190.0).unwrap().propulsion_efficiency(),
            0.95,
            max_relative = 1e-12
        );
    }

    proptest::proptest! {
        #[test]
        fn closure_and_complementarity(alpha in 0.01f64..89.99) {
            let g = geom();
            let s = g.shape_from_alpha(alpha).unwrap();
            let four_a2 = 4.0 * g.side_a * g.side_a;
            proptest::prop_assert!((s.length.powi(2) + s.width.powi(2) - four_a2).abs() <= 1e-9 * four_a2);
            let c = g.shape_from_alpha(90.0 - alpha).unwrap();
            proptest::prop_assert!((s.aspect_ratio * c.aspect_ratio - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn aspect_ratio_round_trip(ar in 0.05f64..20.0) {
            let s = geom().shape_from_alpha(alpha_from_aspect_ratio(ar).unwrap()).unwrap();
            proptest::prop_assert!((s.aspect_ratio - ar).abs() <= 1e-9 * ar);
        }

        #[test]
        fn constrained_width_is_min(w in 20.7f64..45.0) {
            let g = BodyGeometry::<f64>::compliant(1.2, 190.0).unwrap();
            let s = g.equilibrium_under_width_limit(w).unwrap();
            proptest::prop_assert_eq!(s.width, g.rest_shape().width.min(w));
        }

        #[test]
        fn lateral_components_cancel(alpha in 1.0f64..89.0, heading in -180.0f64..180.0) {
            let s = geom().shape_from_alpha(alpha).unwrap();
            let hs = module_headings(&s, heading);
            // lateral axis of the body
            let (sn, cs) = heading.to_radians().sin_cos();
            let lateral: f64 = hs.iter().map(|h| -sn * h[0] + cs * h[1]).sum();
            proptest::prop_assert!(lateral.abs() <= 1e-9);
        }
    }
}
