//! Flat `key = value` configuration.
//!
//! Every key has a default; files and command-line overrides may only set
//! keys listed in [`KEYS`]. Unknown keys are an error.

use std::path::PathBuf;

use crate::actuator::ActuatorParams;
use crate::body::{BodyGeometry, BodyMode};
use crate::error::{Error, Result};
use crate::gait::{GaitName, GaitSpec, TurnBias, TurnSide};
use crate::response::AxisDynamics;
use crate::sim::{LegModel, SimConfig};
use crate::sweep::{BodyVariant, SweepSettings, DEFAULT_SEED};
use crate::terrain::CorridorProfile;
use crate::transmission::{LegRanges, TransmissionGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSetting {
    Compliant,
    /// Rigid at `body.alpha0_deg`.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub actuator: ActuatorParams<f64>,
    pub transmission: TransmissionGeometry<f64>,
    pub calibrate: bool,
    pub calib_target: LegRanges<f64>,
    pub calib_v_ref: f64,
    pub dynamics: AxisDynamics<f64>,
    pub body: BodyGeometry<f64>,
    pub body_mode: ModeSetting,
    pub gait: GaitName,
    pub freq_hz: f64,
    pub volts: f64,
    pub duty: Option<f64>,
    pub intra_leg_offset_deg: f64,
    pub turn: TurnBias<f64>,
    pub dt_s: f64,
    pub cycles: f64,
    pub slip: f64,
    pub dynamic_gain: bool,
    pub repeats: usize,
    pub seed: u64,
    pub gap_outer_mm: f64,
    pub gap_throat_mm: f64,
    pub gap_approach_mm: f64,
    pub gap_taper_mm: f64,
    pub gap_throat_len_mm: f64,
    pub gap_cycles: f64,
    pub gap_profile: Option<PathBuf>,
    pub sweep_bodies: Vec<BodyVariant>,
    pub sweep_gaits: Vec<GaitName>,
    pub sweep_freqs_hz: Vec<f64>,
    pub leg_phase_offsets_deg: Vec<f64>,
    pub leg_samples: usize,
    /// Drive amplitude of the leg characterization, V.
    pub leg_volts: f64,
    /// Drive frequency of the leg characterization, Hz.
    pub leg_freq_hz: f64,
    pub actuator_volts: Vec<f64>,
    pub bode_f_min_hz: f64,
    pub bode_f_max_hz: f64,
    pub bode_points: usize,
}

/// Recognized configuration keys.
pub const KEYS: &[&str] = &[
    "actuator.k_delta_um_per_v",
    "actuator.k_force_mn_per_v",
    "actuator.v_max",
    "actuator.mass_mg",
    "actuator.volts",
    "transmission.l_i_um",
    "transmission.s_i_um",
    "transmission.l_o_mm",
    "transmission.l_oy_mm",
    "transmission.l_oz_mm",
    "transmission.t_l",
    "transmission.t_s",
    "transmission.eta_s",
    "transmission.eta_l",
    "transmission.theta0_rad",
    "transmission.t_f",
    "transmission.calibrate",
    "transmission.target_dx_mm",
    "transmission.target_dy_mm",
    "transmission.target_dz_mm",
    "transmission.v_ref",
    "dynamics.f_n_swing_hz",
    "dynamics.f_n_lift_hz",
    "dynamics.zeta",
    "body.side_a_mm",
    "body.alpha0_deg",
    "body.k_joint",
    "body.c_joint",
    "body.k_load",
    "body.mode",
    "body.module_mass_mg",
    "body.alpha_min_deg",
    "body.alpha_max_deg",
    "gait.name",
    "gait.freq_hz",
    "gait.volts",
    "gait.duty",
    "gait.intra_leg_offset_deg",
    "turn.side",
    "turn.gain",
    "turn.phase_shift_deg",
    "sim.dt_s",
    "sim.cycles",
    "sim.slip",
    "sim.dynamic_gain",
    "sim.repeats",
    "sim.seed",
    "gap.outer_mm",
    "gap.throat_mm",
    "gap.approach_mm",
    "gap.taper_mm",
    "gap.throat_len_mm",
    "gap.cycles",
    "gap.profile",
    "sweep.shapes",
    "sweep.gaits",
    "sweep.freqs_hz",
    "leg.phase_offsets_deg",
    "leg.samples",
    "leg.volts",
    "leg.freq_hz",
    "bode.f_min_hz",
    "bode.f_max_hz",
    "bode.points",
];

impl Default for Settings {
    fn default() -> Self {
        Self {
            actuator: ActuatorParams::default(),
            transmission: TransmissionGeometry::default(),
            calibrate: true,
            calib_target: LegRanges::measured(),
            calib_v_ref: 225.0,
            dynamics: AxisDynamics::default(),
            body: BodyGeometry::default(),
            body_mode: ModeSetting::Compliant,
            gait: GaitName::Trot,
            freq_hz: 10.0,
            volts: 200.0,
            duty: None,
            intra_leg_offset_deg: 90.0,
            turn: TurnBias::straight(),
            dt_s: crate::sim::DEFAULT_DT,
            cycles: 10.0,
            slip: 0.0,
            dynamic_gain: true,
            repeats: 5,
            seed: DEFAULT_SEED,
            gap_outer_mm: 40.0,
            gap_throat_mm: 22.0,
            gap_approach_mm: 10.0,
            gap_taper_mm: 15.0,
            gap_throat_len_mm: 20.0,
            gap_cycles: 60.0,
            gap_profile: None,
            sweep_bodies: vec![
                BodyVariant::Fixed(crate::body::ShapeClass::Long),
                BodyVariant::Fixed(crate::body::ShapeClass::Square),
                BodyVariant::Fixed(crate::body::ShapeClass::Wide),
            ],
            sweep_gaits: vec![GaitName::Trot, GaitName::Walk],
            sweep_freqs_hz: vec![1.0, 5.0, 10.0],
            leg_phase_offsets_deg: vec![0.0, 90.0, 180.0, 270.0],
            leg_samples: 361,
            leg_volts: 225.0,
            leg_freq_hz: 1.0,
            actuator_volts: vec![125.0, 150.0, 175.0, 200.0, 225.0],
            bode_f_min_hz: 1.0,
            bode_f_max_hz: 100.0,
            bode_points: 200,
        }
    }
}

fn num(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("{key}: `{v}` is not a number ({e})")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Config(format!("{key}: value must be finite")))
    }
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|e| Error::Config(format!("{key}: `{v}` is not a non-negative integer ({e})")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("{key}: `{other}` is not a boolean"))),
    }
}

fn list<X>(v: &str, mut item: impl FnMut(&str) -> Result<X>) -> Result<Vec<X>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(&mut item).collect()
}

impl Settings {
    /// Parses `key = value` lines on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::default();
        s.apply_text(text)?;
        Ok(s)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{kv}` is not `key=value`")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "actuator.k_delta_um_per_v" => self.actuator.k_delta = num(key, v)?,
            "actuator.k_force_mn_per_v" => self.actuator.k_force = num(key, v)?,
            "actuator.v_max" => self.actuator.v_max = num(key, v)?,
            "actuator.mass_mg" => self.actuator.mass = num(key, v)?,
            "actuator.volts" => self.actuator_volts = list(v, |x| num(key, x))?,
            "transmission.l_i_um" => self.transmission.l_i = num(key, v)?,
            "transmission.s_i_um" => self.transmission.s_i = num(key, v)?,
            "transmission.l_o_mm" => self.transmission.l_o = num(key, v)?,
            "transmission.l_oy_mm" => self.transmission.l_oy = num(key, v)?,
            "transmission.l_oz_mm" => self.transmission.l_oz = num(key, v)?,
            "transmission.t_l" => self.transmission.t_l = num(key, v)?,
            "transmission.t_s" => self.transmission.t_s = num(key, v)?,
            "transmission.eta_s" => self.transmission.eta_s = num(key, v)?,
            "transmission.eta_l" => self.transmission.eta_l = num(key, v)?,
            "transmission.theta0_rad" => self.transmission.theta0 = num(key, v)?,
            "transmission.t_f" => self.transmission.t_f = num(key, v)?,
            "transmission.calibrate" => self.calibrate = flag(key, v)?,
            "transmission.target_dx_mm" => self.calib_target.dx = num(key, v)?,
            "transmission.target_dy_mm" => self.calib_target.dy = num(key, v)?,
            "transmission.target_dz_mm" => self.calib_target.dz = num(key, v)?,
            "transmission.v_ref" => self.calib_v_ref = num(key, v)?,
            "dynamics.f_n_swing_hz" => self.dynamics.f_n_swing = num(key, v)?,
            "dynamics.f_n_lift_hz" => self.dynamics.f_n_lift = num(key, v)?,
            "dynamics.zeta" => self.dynamics.zeta = num(key, v)?,
            "body.side_a_mm" => self.body.side_a = num(key, v)?,
            "body.alpha0_deg" => self.body.alpha0 = num(key, v)?,
            "body.k_joint" => self.body.k_joint = num(key, v)?,
            "body.c_joint" => self.body.c_joint = num(key, v)?,
            "body.k_load" => self.body.k_load = num(key, v)?,
            "body.mode" => {
                self.body_mode = match v.to_ascii_lowercase().as_str() {
                    "compliant" => ModeSetting::Compliant,
                    "fixed" => ModeSetting::Fixed,
                    other => return Err(Error::Config(format!("{key}: unknown mode `{other}`"))),
                }
            }
            "body.module_mass_mg" => self.body.module_mass = num(key, v)?,
            "body.alpha_min_deg" => self.body.alpha_min = num(key, v)?,
            "body.alpha_max_deg" => self.body.alpha_max = num(key, v)?,
            "gait.name" => self.gait = v.parse()?,
            "gait.freq_hz" => self.freq_hz = num(key, v)?,
            "gait.volts" => self.volts = num(key, v)?,
            "gait.duty" => self.duty = Some(num(key, v)?),
            "gait.intra_leg_offset_deg" => self.intra_leg_offset_deg = num(key, v)?,
            "turn.side" => self.turn.side = v.parse::<TurnSide>()?,
            "turn.gain" => self.turn.gain = num(key, v)?,
            "turn.phase_shift_deg" => self.turn.phase_shift_deg = num(key, v)?,
            "sim.dt_s" => self.dt_s = num(key, v)?,
            "sim.cycles" => self.cycles = num(key, v)?,
            "sim.slip" => self.slip = num(key, v)?,
            "sim.dynamic_gain" => self.dynamic_gain = flag(key, v)?,
            "sim.repeats" => self.repeats = count(key, v)?,
            "sim.seed" => {
                self.seed = v
                    .parse()
                    .map_err(|e| Error::Config(format!("{key}: `{v}` ({e})")))?
            }
            "gap.outer_mm" => self.gap_outer_mm = num(key, v)?,
            "gap.throat_mm" => self.gap_throat_mm = num(key, v)?,
            "gap.approach_mm" => self.gap_approach_mm = num(key, v)?,
            "gap.taper_mm" => self.gap_taper_mm = num(key, v)?,
            "gap.throat_len_mm" => self.gap_throat_len_mm = num(key, v)?,
            "gap.cycles" => self.gap_cycles = num(key, v)?,
            "gap.profile" => self.gap_profile = Some(PathBuf::from(v)),
            "sweep.shapes" => self.sweep_bodies = list(v, |x| x.parse())?,
            "sweep.gaits" => self.sweep_gaits = list(v, |x| x.parse())?,
            "sweep.freqs_hz" => self.sweep_freqs_hz = list(v, |x| num(key, x))?,
            "leg.phase_offsets_deg" => self.leg_phase_offsets_deg = list(v, |x| num(key, x))?,
            "leg.samples" => self.leg_samples = count(key, v)?,
            "leg.volts" => self.leg_volts = num(key, v)?,
            "leg.freq_hz" => self.leg_freq_hz = num(key, v)?,
            "bode.f_min_hz" => self.bode_f_min_hz = num(key, v)?,
            "bode.f_max_hz" => self.bode_f_max_hz = num(key, v)?,
            "bode.points" => self.bode_points = count(key, v)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Leg model, calibrating the transmission when enabled.
    pub fn leg_model(&self) -> Result<LegModel<f64>> {
        let transmission = if self.calibrate {
            self.transmission.validate()?;
            self.transmission
                .calibrate(&self.actuator, self.calib_target, self.calib_v_ref)?
        } else {
            self.transmission
        };
        LegModel::new(self.actuator, transmission, self.dynamics)
    }

    pub fn body_geometry(&self) -> BodyGeometry<f64> {
        let mode = match self.body_mode {
            ModeSetting::Compliant => BodyMode::Compliant,
            ModeSetting::Fixed => BodyMode::Fixed(self.body.alpha0),
        };
        BodyGeometry { mode, ..self.body }
    }

    pub fn gait_spec(&self) -> GaitSpec<f64> {
        let mut g = GaitSpec::table(self.gait, self.freq_hz, self.volts);
        if let Some(d) = self.duty {
            g.duty = d;
        }
        g.intra_leg_offset = self.intra_leg_offset_deg;
        g
    }

    pub fn sim_config(&self) -> Result<SimConfig<f64>> {
        let mut c = SimConfig::new(self.leg_model()?, self.body_geometry(), self.gait_spec());
        c.dt = self.dt_s;
        c.duration = self.cycles / self.freq_hz;
        c.slip = self.slip;
        c.dynamic_gain = self.dynamic_gain;
        c.bias = self.turn;
        c.validate()?;
        Ok(c)
    }

    pub fn sweep_settings(&self) -> Result<SweepSettings<f64>> {
        let template = self.sim_config()?;
        Ok(SweepSettings {
            template,
            cycles: self.cycles,
            repeats: self.repeats,
            seed: self.seed,
        })
    }

    /// Synthetic throat corridor from the `gap.*` keys.
    pub fn throat_corridor(&self) -> Result<CorridorProfile<f64>> {
        CorridorProfile::throat(
            self.gap_outer_mm,
            self.gap_throat_mm,
            self.gap_approach_mm,
            self.gap_taper_mm,
            self.gap_throat_len_mm,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_key_is_settable() {
        let samples = [
            ("body.mode", "fixed"),
            ("gait.name", "walk"),
            ("turn.side", "left"),
            ("transmission.calibrate", "false"),
            ("sim.dynamic_gain", "off"),
            ("sim.repeats", "4"),
            ("sim.seed", "11"),
            ("leg.samples", "100"),
            ("bode.points", "50"),
            ("gap.profile", "corridor.csv"),
            ("sweep.shapes", "long,compliant"),
            ("sweep.gaits", "trot"),
        ];
        for key in KEYS {
            let value = samples.iter().find(|(k, _)| k == key).map_or("1.5", |(_, v)| *v);
            let mut s = Settings::default();
            s.set(key, value).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(Settings::parse("body.width = 3"), Err(Error::Config(_))));
        assert!(Settings::parse("gait.freq_hz 5").is_err());
        assert!(Settings::parse("gait.freq_hz = fast").is_err());
    }

    #[test]
    fn parses_file_and_overrides() {
        let mut s = Settings::parse("# demo\ngait.name = walk\nsim.slip = 0.1 # lossy\n\n").unwrap();
        assert_eq!(s.gait, GaitName::Walk);
        assert_eq!(s.slip, 0.1);
        s.apply_override("gait.freq_hz=5").unwrap();
        assert_eq!(s.freq_hz, 5.0);
        assert_eq!(s.gait_spec().duty, 0.75);
    }

    #[test]
    fn default_sim_config_is_valid() {
        let c = Settings::default().sim_config().unwrap();
        assert!(c.body.is_compliant());
        assert!(c.leg.transmission.eta_s < 1.0);
    }
}
