//! Gait programs and the unipolar drive waveforms they produce.
//!
//! Legs are indexed 0..4 as front-left, front-right, rear-left, rear-right.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub const LEG_COUNT: usize = 4;
pub const LEFT_LEGS: [usize; 2] = [0, 2];
pub const RIGHT_LEGS: [usize; 2] = [1, 3];

/// Leg relabeling under a left-right mirror.
pub const MIRROR: [usize; LEG_COUNT] = [1, 0, 3, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GaitName {
    Trot,
    Walk,
    Pronk,
    Bound,
    Pace,
}

impl GaitName {
    pub const ALL: [GaitName; 5] = [
        GaitName::Trot,
        GaitName::Walk,
        GaitName::Pronk,
        GaitName::Bound,
        GaitName::Pace,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GaitName::Trot => "trot",
            GaitName::Walk => "walk",
            GaitName::Pronk => "pronk",
            GaitName::Bound => "bound",
            GaitName::Pace => "pace",
        }
    }
}

impl fmt::Display for GaitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GaitName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GaitName::ALL
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownGait(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitSpec<T> {
    pub name: GaitName,
    /// Per-leg cycle phase, degrees in [0, 360).
    pub leg_phase: [T; LEG_COUNT],
    /// Stance fraction of the cycle, (0, 1].
    pub duty: T,
    /// Phase by which lift leads swing within a leg, degrees.
    pub intra_leg_offset: T,
    /// Stride frequency, Hz.
    pub frequency: T,
    /// Drive amplitude, V.
    pub amplitude: T,
}

impl<T: Real> GaitSpec<T> {
    /// Default phase table and duty for a named gait at the given stride
    /// frequency and drive amplitude.
    pub fn table(name: GaitName, frequency: T, amplitude: T) -> Self {
        let (phase, duty) = match name {
            GaitName::Trot => ([0.0, 180.0, 180.0, 0.0], 0.5),
            GaitName::Walk => ([0.0, 180.0, 270.0, 90.0], 0.75),
            GaitName::Pronk => ([0.0, 0.0, 0.0, 0.0], 0.5),
            GaitName::Bound => ([0.0, 0.0, 180.0, 180.0], 0.5),
            GaitName::Pace => ([0.0, 180.0, 0.0, 180.0], 0.5),
        };
        Self {
            name,
            leg_phase: phase.map(lit),
            duty: lit(duty),
            intra_leg_offset: lit(90.0),
            frequency,
            amplitude,
        }
    }

    pub fn validate(&self, v_max: T) -> Result<()> {
        let full = lit::<T>(360.0);
        for (i, &p) in self.leg_phase.iter().enumerate() {
            if !(p >= T::zero() && p < full) {
                return Err(Error::Domain(format!("leg {} phase {p} deg outside [0, 360)", i + 1)));
            }
        }
        if !(self.duty > T::zero() && self.duty <= T::one()) {
            return Err(Error::Domain(format!("duty {} outside (0, 1]", self.duty)));
        }
        if !(self.frequency > T::zero() && self.frequency.is_finite()) {
            return Err(Error::Domain(format!("stride frequency must be positive, got {}", self.frequency)));
        }
        if !(self.amplitude >= T::zero() && self.amplitude <= v_max) {
            return Err(Error::OutOfRange {
                quantity: "drive amplitude",
                value: self.amplitude.as_f64(),
                min: 0.0,
                max: v_max.as_f64(),
            });
        }
        if self.name == GaitName::Trot {
            let p = &self.leg_phase;
            let diff = (p[1] - p[0]).abs();
            if p[0] != p[3] || p[1] != p[2] || diff != lit(180.0) {
                return Err(Error::Domain(
                    "trot requires diagonal pairs (1,4) and (2,3) in antiphase".to_string(),
                ));
            }
        }
        Ok(())
    }

    /// The same gait with legs relabeled under a left-right mirror.
    pub fn mirrored(&self) -> Self {
        let mut m = *self;
        for (i, &j) in MIRROR.iter().enumerate() {
            m.leg_phase[i] = self.leg_phase[j];
        }
        m
    }

    pub fn period(&self) -> T {
        self.frequency.recip()
    }

    /// Cycle position of leg `leg` at time `t`, in [0, 1).
    pub fn cycle_position(&self, leg: usize, t: T) -> T {
        frac(self.frequency * t + self.leg_phase[leg] / lit(360.0))
    }

    /// Stance flags. Each leg's stance window spans `duty` of the cycle and
    /// is centred on the minimum of its lift sinusoid, so at duty 0.5 a leg
    /// is in stance exactly while its lift drive is below the midpoint.
    pub fn stance_mask(&self, t: T) -> [bool; LEG_COUNT] {
        let half = lit::<T>(0.5);
        let lift_low = frac((lit::<T>(270.0) - self.intra_leg_offset) / lit(360.0));
        std::array::from_fn(|i| {
            let since_onset = frac(self.cycle_position(i, t) - lift_low + self.duty * half);
            since_onset < self.duty
        })
    }
}

fn frac<T: Real>(x: T) -> T {
    let f = x - x.floor();
    // x - floor(x) can round up to exactly 1 for tiny negative x
    if f >= T::one() {
        T::zero()
    } else {
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TurnSide {
    None,
    Left,
    Right,
}

impl FromStr for TurnSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "" => Ok(TurnSide::None),
            "left" => Ok(TurnSide::Left),
            "right" => Ok(TurnSide::Right),
            other => Err(Error::Config(format!("unknown turn side `{other}`"))),
        }
    }
}

/// Steering by attenuating the swing drive of the legs on the inside of the
/// turn. `phase_shift_deg` is an optional hook that advances the inner legs'
/// phase instead; it is zero unless configured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnBias<T> {
    pub side: TurnSide,
    pub gain: T,
    pub phase_shift_deg: T,
}

impl<T: Real> Default for TurnBias<T> {
    fn default() -> Self {
        Self::straight()
    }
}

impl<T: Real> TurnBias<T> {
    pub fn straight() -> Self {
        Self {
            side: TurnSide::None,
            gain: T::one(),
            phase_shift_deg: T::zero(),
        }
    }

    pub fn new(side: TurnSide, gain: T) -> Result<Self> {
        let b = Self {
            side,
            gain,
            phase_shift_deg: T::zero(),
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain > T::zero() && self.gain <= T::one()) {
            return Err(Error::Domain(format!("turn gain {} outside (0, 1]", self.gain)));
        }
        Ok(())
    }

    pub fn mirrored(&self) -> Self {
        let side = match self.side {
            TurnSide::None => TurnSide::None,
            TurnSide::Left => TurnSide::Right,
            TurnSide::Right => TurnSide::Left,
        };
        Self { side, ..*self }
    }

    pub fn is_inner(&self, leg: usize) -> bool {
        match self.side {
            TurnSide::None => false,
            TurnSide::Left => LEFT_LEGS.contains(&leg),
            TurnSide::Right => RIGHT_LEGS.contains(&leg),
        }
    }

    fn swing_scale(&self, leg: usize) -> T {
        if self.is_inner(leg) {
            self.gain
        } else {
            T::one()
        }
    }

    fn phase_shift(&self, leg: usize) -> T {
        if self.is_inner(leg) {
            self.phase_shift_deg
        } else {
            T::zero()
        }
    }
}

/// Instantaneous drive voltages for the eight actuators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegDrive<T> {
    pub lift: [T; LEG_COUNT],
    pub swing: [T; LEG_COUNT],
}

impl<T: Real> LegDrive<T> {
    pub fn mirrored(&self) -> Self {
        Self {
            lift: MIRROR.map(|j| self.lift[j]),
            swing: MIRROR.map(|j| self.swing[j]),
        }
    }
}

/// Unipolar sinusoidal drive voltages at time `t`.
pub fn leg_waveforms<T: Real>(spec: &GaitSpec<T>, bias: &TurnBias<T>, t: T) -> LegDrive<T> {
    let half = lit::<T>(0.5);
    let wt = T::TAU() * spec.frequency * t;
    let offset = spec.intra_leg_offset.to_radians();
    let mut drive = LegDrive {
        lift: [T::zero(); LEG_COUNT],
        swing: [T::zero(); LEG_COUNT],
    };
    for i in 0..LEG_COUNT {
        let phi = (spec.leg_phase[i] + bias.phase_shift(i)).to_radians();
        let a_swing = spec.amplitude * bias.swing_scale(i);
        drive.swing[i] = a_swing * half * (T::one() + (wt + phi).sin());
        drive.lift[i] = spec.amplitude * half * (T::one() + (wt + phi + offset).sin());
    }
    drive
}

/// DC bias of each swing channel (the midpoint of its unipolar swing).
pub fn swing_bias<T: Real>(spec: &GaitSpec<T>, bias: &TurnBias<T>) -> [T; LEG_COUNT] {
    std::array::from_fn(|i| spec.amplitude * bias.swing_scale(i) * lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(name: GaitName) -> GaitSpec<f64> {
        GaitSpec::table(name, 10.0, 200.0)
    }

    #[test]
    fn tables_validate() {
        for name in GaitName::ALL {
            spec(name).validate(225.0).unwrap();
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("Trot".parse::<GaitName>().unwrap(), GaitName::Trot);
        assert!(matches!("gallop".parse::<GaitName>(), Err(Error::UnknownGait(_))));
    }

    #[test]
    fn trot_diagonals_in_antiphase() {
        let s = spec(GaitName::Trot);
        assert_eq!(s.leg_phase[0], s.leg_phase[3]);
        assert_eq!(s.leg_phase[1], s.leg_phase[2]);
        assert_eq!((s.leg_phase[1] - s.leg_phase[0]).abs(), 180.0);
        let mut bad = s;
        bad.leg_phase[3] = 90.0;
        assert!(bad.validate(225.0).is_err());
    }

    #[test]
    fn trot_pairs_swap_after_half_period() {
        let s = spec(GaitName::Trot);
        let b = TurnBias::straight();
        let a = leg_waveforms(&s, &b, 0.013);
        let h = leg_waveforms(&s, &b, 0.013 + 0.5 / s.frequency);
        for (i, j) in [(0, 1), (3, 2), (1, 0), (2, 3)] {
            assert!((a.swing[i] - h.swing[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn walk_keeps_two_legs_down() {
        let s = spec(GaitName::Walk);
        let mut distinct = s.leg_phase.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        assert_eq!(distinct, vec![0.0, 90.0, 180.0, 270.0]);
        for deg in 0..360 {
            let t = deg as f64 / 360.0 / s.frequency;
            let down = s.stance_mask(t).iter().filter(|&&b| b).count();
            assert!(down >= 2, "only {down} legs in stance at {deg} deg");
        }
    }

    #[test]
    fn trot_stance_alternates() {
        let s = spec(GaitName::Trot);
        for deg in 0..360 {
            let t = (deg as f64 + 0.5) / 360.0 / s.frequency;
            let m = s.stance_mask(t);
            assert_eq!(m[0], m[3]);
            assert_eq!(m[1], m[2]);
            assert_ne!(m[0], m[1]);
        }
    }

    #[test]
    fn pronk_masks_identical() {
        let s = spec(GaitName::Pronk);
        for k in 0..100 {
            let m = s.stance_mask(k as f64 * 0.00137);
            assert!(m.iter().all(|&b| b == m[0]));
        }
    }

    #[test]
    fn stance_is_lift_below_midpoint_at_half_duty() {
        let s = spec(GaitName::Bound);
        let b = TurnBias::straight();
        for k in 0..997 {
            let t = k as f64 * 1.0e-4 + 3.3e-6;
            let d = leg_waveforms(&s, &b, t);
            let m = s.stance_mask(t);
            for (i, (&lift, &stance)) in d.lift.iter().zip(&m).enumerate() {
                let low = lift < s.amplitude / 2.0;
                if (lift - s.amplitude / 2.0).abs() > 1e-6 {
                    assert_eq!(stance, low, "leg {i} at t {t}");
                }
            }
        }
    }

    #[test]
    fn right_bias_halves_right_swing() {
        let s = spec(GaitName::Trot);
        let straight = TurnBias::straight();
        let right = TurnBias::new(TurnSide::Right, 0.5).unwrap();
        let mut max_s = [0.0f64; 4];
        let mut max_b = [0.0f64; 4];
        for k in 0..1000 {
            let t = k as f64 * 1e-4;
            let a = leg_waveforms(&s, &straight, t);
            let b = leg_waveforms(&s, &right, t);
            for i in 0..4 {
                max_s[i] = max_s[i].max(a.swing[i]);
                max_b[i] = max_b[i].max(b.swing[i]);
                assert_eq!(a.lift[i], b.lift[i]);
            }
        }
        for i in LEFT_LEGS {
            assert_eq!(max_s[i], max_b[i]);
        }
        for i in RIGHT_LEGS {
            assert!((max_b[i] - 0.5 * max_s[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_turn_gain() {
        assert!(TurnBias::new(TurnSide::Left, 0.0).is_err());
        assert!(TurnBias::new(TurnSide::Left, 1.2).is_err());
    }

    proptest::proptest! {
        #[test]
        fn periodic_and_unipolar(t in 0.0f64..5.0, g in 0usize..5, gain in 0.05f64..1.0, side in 0usize..3) {
            let s = GaitSpec::table(GaitName::ALL[g], 7.0, 180.0);
            let side = [TurnSide::None, TurnSide::Left, TurnSide::Right][side];
            let b = TurnBias::new(side, gain).unwrap();
            let a = leg_waveforms(&s, &b, t);
            let p = leg_waveforms(&s, &b, t + 1.0 / s.frequency);
            for i in 0..4 {
                proptest::prop_assert!((a.lift[i] - p.lift[i]).abs() < 1e-9);
                proptest::prop_assert!((a.swing[i] - p.swing[i]).abs() < 1e-9);
                for v in [a.lift[i], a.swing[i]] {
                    proptest::prop_assert!((0.0..=s.amplitude).contains(&v));
                }
            }
        }

        #[test]
        fn mirrored_bias_mirrors_channels(t in 0.0f64..2.0, g in 0usize..5, gain in 0.05f64..1.0) {
            let s = GaitSpec::table(GaitName::ALL[g], 5.0, 200.0);
            let left = TurnBias::new(TurnSide::Left, gain).unwrap();
            let right = TurnBias::new(TurnSide::Right, gain).unwrap();
            let l = leg_waveforms(&s, &left, t).mirrored();
            let r = leg_waveforms(&s.mirrored(), &right, t);
            proptest::prop_assert_eq!(l, r);
            // gaits that are themselves mirror symmetric need no relabeled spec
            if matches!(s.name, GaitName::Pronk | GaitName::Bound) {
                proptest::prop_assert_eq!(l, leg_waveforms(&s, &right, t));
            }
        }
    }
}
