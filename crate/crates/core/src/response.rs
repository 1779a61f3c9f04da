//! Per-axis second-order frequency response of the leg transmission.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Swing,
    /// Lift and the coupled expansion (abduction) motion share one resonance.
    Lift,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisDynamics<T> {
    /// Swing natural frequency, Hz.
    pub f_n_swing: T,
    /// Lift natural frequency, Hz.
    pub f_n_lift: T,
    /// Damping ratio shared by both axes.
    pub zeta: T,
}

impl<T: Real> Default for AxisDynamics<T> {
    fn default() -> Self {
        Self {
            f_n_swing: lit(40.0),
            f_n_lift: lit(41.5),
            // light enough that the gain peak stays within half a hertz of
            // the natural frequency
            zeta: lit(0.1),
        }
    }
}

impl<T: Real> AxisDynamics<T> {
    pub fn new(f_n_swing: T, f_n_lift: T, zeta: T) -> Result<Self> {
        let d = Self {
            f_n_swing,
            f_n_lift,
            zeta,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_n_swing > T::zero() && self.f_n_lift > T::zero()) {
            return Err(Error::Domain(format!(
                "natural frequencies must be positive (swing {}, lift {})",
                self.f_n_swing, self.f_n_lift
            )));
        }
        if !(self.zeta > T::zero() && self.zeta < T::one()) {
            return Err(Error::Domain(format!(
                "damping ratio must lie in (0, 1) for an underdamped axis, got {}",
                self.zeta
            )));
        }
        Ok(())
    }

    pub fn natural_frequency(&self, axis: Axis) -> T {
        match axis {
            Axis::Swing => self.f_n_swing,
            Axis::Lift => self.f_n_lift,
        }
    }

    /// Magnitude and phase (degrees) of the unit-DC-gain second-order
    /// response of `axis` at drive frequency `f` Hz.
    pub fn frequency_gain(&self, axis: Axis, f: T) -> (T, T) {
        let r = f / self.natural_frequency(axis);
        let two = lit::<T>(2.0);
        let re = T::one() - r * r;
        let im = two * self.zeta * r;
        let gain = (re * re + im * im).sqrt().recip();
        let phase = -im.atan2(re).to_degrees();
        (gain, phase)
    }

    /// Frequency of the magnitude peak, `f_n * sqrt(1 - 2 zeta^2)`.
    pub fn peak_frequency(&self, axis: Axis) -> T {
        let two = lit::<T>(2.0);
        self.natural_frequency(axis) * (T::one() - two * self.zeta * self.zeta).max(T::zero()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dc_limit() {
        let d = AxisDynamics::<f64>::default();
        for axis in [Axis::Swing, Axis::Lift] {
            let (g, p) = d.frequency_gain(axis, 0.0);
            assert_eq!(g, 1.0);
            assert_eq!(p, 0.0);
        }
    }

    #[test]
    fn resonance_gain_is_inverse_twice_zeta() {
        let d = AxisDynamics::<f64>::new(40.0, 41.5, 0.2).unwrap();
        let (g, p) = d.frequency_gain(Axis::Swing, 40.0);
        assert_relative_eq!(g, 2.5, max_relative = 1e-12);
        let (g, _) = AxisDynamics::<f64>::default().frequency_gain(Axis::Lift, 41.5);
        assert_relative_eq!(g, 5.0, max_relative = 1e-12);
        assert_relative_eq!(p, -90.0, max_relative = 1e-12);
    }

    #[test]
    fn high_frequency_rolloff() {
        let d = AxisDynamics::<f64>::default();
        let (g, p) = d.frequency_gain(Axis::Lift, 415.0);
        assert!(g < 0.011, "gain {g}");
        assert!(p < -170.0);
    }

    #[test]
    fn peak_by_dense_sampling() {
        let d = AxisDynamics::<f64>::default();
        for axis in [Axis::Swing, Axis::Lift] {
            let (mut best_f, mut best_g) = (0.0, 0.0);
            for i in 0..=200_000 {
                let f = i as f64 * 1e-3;
                let (g, _) = d.frequency_gain(axis, f);
                if g > best_g {
                    best_g = g;
                    best_f = f;
                }
            }
            assert!((best_f - d.peak_frequency(axis)).abs() <= 1e-3);
            assert!(best_g >= 1.0);
        }
    }

    #[test]
    fn rejects_overdamped() {
        assert!(AxisDynamics::new(40.0, 41.5, 1.2).is_err());
        assert!(AxisDynamics::new(0.0, 41.5, 0.2).is_err());
    }
}
