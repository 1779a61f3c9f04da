//! Linear voltage model of a piezoelectric bimorph bender.
//!
//! Deflection is reported peak-to-peak (the quantity measured on a bench
//! sweep) while force is reported as an amplitude, matching how the two are
//! usually quoted for these actuators.

use crate::error::{check_range, Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorParams<T> {
    /// Free deflection, µm peak-to-peak per volt.
    pub k_delta: T,
    /// Blocked force, mN amplitude per volt.
    pub k_force: T,
    /// Maximum drive voltage, V.
    pub v_max: T,
    /// Actuator mass, mg.
    pub mass: T,
}

impl<T: Real> Default for ActuatorParams<T> {
    /// Linear fit through the 225 V bench point: 720 µm p-p and 235 mN.
    fn default() -> Self {
        Self {
            k_delta: lit::<T>(720.0) / lit(225.0),
            k_force: lit::<T>(235.0) / lit(225.0),
            v_max: lit(225.0),
            mass: lit(124.0),
        }
    }
}

impl<T: Real> ActuatorParams<T> {
    pub fn new(k_delta: T, k_force: T, v_max: T, mass: T) -> Result<Self> {
        let p = Self {
            k_delta,
            k_force,
            v_max,
            mass,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("actuator {name} must be positive, got {v}")))
            }
        };
        positive("k_delta", self.k_delta)?;
        positive("k_force", self.k_force)?;
        positive("v_max", self.v_max)?;
        positive("mass", self.mass)
    }

    pub fn check_voltage(&self, v: T) -> Result<()> {
        check_range("drive voltage", v.as_f64(), 0.0, self.v_max.as_f64())
    }

    /// Free tip deflection in µm peak-to-peak at drive amplitude `v`.
    pub fn free_deflection_pp(&self, v: T) -> Result<T> {
        self.check_voltage(v)?;
        Ok(self.k_delta * v)
    }

    /// Blocked tip force in mN (amplitude) at drive amplitude `v`.
    pub fn blocked_force_amp(&self, v: T) -> Result<T> {
        self.check_voltage(v)?;
        Ok(self.k_force * v)
    }

    /// Force available at tip deflection `delta` (µm, amplitude) along the
    /// linear load line between blocked and free conditions.
    pub fn load_line_force(&self, v: T, delta: T) -> Result<T> {
        let blocked = self.blocked_force_amp(v)?;
        let free_amp = self.free_deflection_pp(v)? / lit(2.0);
        if delta < T::zero() || delta > free_amp || delta.is_nan() {
            return Err(Error::Domain(format!(
                "deflection {delta} µm is outside the free stroke [0, {free_amp}] µm at {v} V"
            )));
        }
        if free_amp == T::zero() {
            return Ok(T::zero());
        }
        Ok(blocked * (T::one() - delta / free_amp))
    }
}
