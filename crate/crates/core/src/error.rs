use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{quantity} = {value} is outside the allowed range [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("calibration failed: {reason} (residuals dx={:.4} dy={:.4} dz={:.4} mm)", residuals[0], residuals[1], residuals[2])]
    Calibration { reason: String, residuals: [f64; 3] },

    #[error("unknown gait `{0}` (expected trot, walk, pronk, bound or pace)")]
    UnknownGait(String),

    #[error("infeasible gap: width {width} mm is below the narrowest admissible body width {min_width} mm")]
    InfeasibleGap { width: f64, min_width: f64 },

    #[error("numerical instability at t = {t} s: shape angle changed by {delta_deg} deg in one step (limit 5 deg)")]
    Instability { t: f64, delta_deg: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(quantity: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if value.is_nan() || value < min || value > max {
        Err(Error::OutOfRange {
            quantity,
            value,
            min,
            max,
        })
    } else {
        Ok(())
    }
}
