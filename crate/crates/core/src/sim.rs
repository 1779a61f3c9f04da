//! Quasi-static locomotion integrator.
//!
//! Every step the stance legs impose their tip displacement (projected on the
//! module's propulsion direction) on the body. The body twist is the
//! least-squares rigid motion matching the per-module demands, with swing
//! modules demanding zero, so translation is the mean over all four modules.
//! The shape half-angle of a compliant body follows a first-order
//! spring-damper driven by the lateral stance reactions, and is projected onto
//! corridor walls.

use crate::actuator::ActuatorParams;
use crate::body::{module_centers, module_headings, BodyGeometry, BodyMode};
use crate::error::{Error, Result};
use crate::gait::{leg_waveforms, swing_bias, GaitSpec, TurnBias, LEFT_LEGS, LEG_COUNT};
use crate::response::{Axis, AxisDynamics};
use crate::scalar::{lit, Real};
use crate::terrain::{CorridorProfile, Terrain};
use crate::transmission::{LegRanges, TransmissionGeometry};

/// Largest shape-angle change allowed in one step, degrees.
pub const MAX_ALPHA_STEP_DEG: f64 = 5.0;
pub const DEFAULT_DT: f64 = 5e-4;

/// Actuator, transmission and transmission dynamics shared by all four legs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegModel<T> {
    pub actuator: ActuatorParams<T>,
    pub transmission: TransmissionGeometry<T>,
    pub dynamics: AxisDynamics<T>,
}

impl<T: Real> LegModel<T> {
    pub fn new(
        actuator: ActuatorParams<T>,
        transmission: TransmissionGeometry<T>,
        dynamics: AxisDynamics<T>,
    ) -> Result<Self> {
        actuator.validate()?;
        transmission.validate()?;
        dynamics.validate()?;
        Ok(Self {
            actuator,
            transmission,
            dynamics,
        })
    }

    /// Default leg with the transmission fitted to the bench ranges at 225 V.
    pub fn calibrated() -> Result<Self> {
        let actuator = ActuatorParams::default();
        let transmission = TransmissionGeometry::default().calibrate(&actuator, LegRanges::measured(), lit(225.0))?;
        Self::new(actuator, transmission, AxisDynamics::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<T> {
    pub dt: T,
    pub duration: T,
    /// Fraction of commanded stance displacement lost to the ground, [0, 1).
    pub slip: T,
    pub gait: GaitSpec<T>,
    pub bias: TurnBias<T>,
    pub body: BodyGeometry<T>,
    /// Scale stroke amplitudes by the transmission frequency response.
    pub dynamic_gain: bool,
    /// Time at which the gait clock starts, s. Shifts the starting phase.
    pub start_time: T,
    pub leg: LegModel<T>,
}

impl<T: Real> SimConfig<T> {
    /// Ten stride cycles at the default step, no slip, dynamic gain on.
    pub fn new(leg: LegModel<T>, body: BodyGeometry<T>, gait: GaitSpec<T>) -> Self {
        Self {
            dt: lit(DEFAULT_DT),
            duration: lit::<T>(10.0) / gait.frequency,
            slip: T::zero(),
            gait,
            bias: TurnBias::straight(),
            body,
            dynamic_gain: true,
            start_time: T::zero(),
            leg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gait.validate(self.leg.actuator.v_max)?;
        self.bias.validate()?;
        self.body.validate()?;
        let f = self.gait.frequency;
        // a little slack so dt = 1 / (50 f) computed in floating point passes
        let slack = T::one() + lit(1e-9);
        if !(self.dt > T::zero() && self.dt <= slack / (lit::<T>(50.0) * f)) {
            return Err(Error::Domain(format!(
                "time step {} s must be positive and resolve at least 50 samples per {} Hz cycle",
                self.dt, f
            )));
        }
        if !(self.duration * slack >= lit::<T>(2.0) / f) {
            return Err(Error::Domain(format!(
                "duration {} s must cover at least two stride cycles",
                self.duration
            )));
        }
        if !(self.slip >= T::zero() && self.slip < T::one()) {
            return Err(Error::Domain(format!("slip {} outside [0, 1)", self.slip)));
        }
        if !(self.start_time >= T::zero()) {
            return Err(Error::Domain(format!("start time must be non-negative, got {}", self.start_time)));
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        (self.duration / self.dt).round().to_usize().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState<T> {
    pub step: usize,
    pub t: T,
    pub x: T,
    pub y: T,
    /// Degrees, counter-clockwise from the world x axis.
    pub heading: T,
    /// Shape half-angle, degrees.
    pub alpha: T,
    /// Degrees per second.
    pub alpha_rate: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub x: T,
    pub y: T,
    pub heading: T,
    pub alpha: T,
    pub width: T,
    /// Corridor width at the body centre, if any.
    pub corridor_width: Option<T>,
    /// Leg tip positions in the world frame, mm.
    pub tips: [[T; 3]; LEG_COUNT],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSummary<T> {
    /// Net displacement along the initial heading over the duration, mm/s.
    pub mean_speed: T,
    /// Net displacement over path length; zero when the body never moved.
    pub straightness: T,
    pub traversal_success: bool,
    pub min_corridor_width: Option<T>,
    pub peak_aspect_ratio: T,
    pub final_heading: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult<T> {
    pub samples: Vec<Sample<T>>,
    pub summary: SimSummary<T>,
}

impl<T: Real> SimResult<T> {
    pub fn net_lateral(&self) -> T {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.y - a.y,
            _ => T::zero(),
        }
    }
}

/// Stepper with the per-run constants resolved.
#[derive(Debug, Clone)]
pub struct Simulator<T> {
    config: SimConfig<T>,
    terrain: Terrain<T>,
    gain_swing: T,
    gain_lift: T,
    swing_center: [T; LEG_COUNT],
    /// Push each stance leg applies to the body, mN.
    leg_push: [T; LEG_COUNT],
}

impl<T: Real> Simulator<T> {
    pub fn new(config: SimConfig<T>, terrain: Terrain<T>) -> Result<Self> {
        config.validate()?;
        let f = config.gait.frequency;
        let (gain_swing, gain_lift) = if config.dynamic_gain {
            (
                config.leg.dynamics.frequency_gain(Axis::Swing, f).0,
                config.leg.dynamics.frequency_gain(Axis::Lift, f).0,
            )
        } else {
            (T::one(), T::one())
        };
        let swing_center = swing_bias(&config.gait, &config.bias);
        let two = lit::<T>(2.0);
        let leg_push = swing_center.map(|c| config.leg.actuator.k_force * c * two / config.leg.transmission.t_f);
        Ok(Self {
            config,
            terrain,
            gain_swing,
            gain_lift,
            swing_center,
            leg_push,
        })
    }

    pub fn config(&self) -> &SimConfig<T> {
        &self.config
    }

    pub fn initial_state(&self) -> Result<SimState<T>> {
        let mut alpha = self.config.body.rest_alpha();
        if let Some(w) = self.terrain.width_at(T::zero()) {
            if self.config.body.is_compliant() {
                alpha = alpha.min(self.config.body.alpha_limit_for_width(w)?);
            }
        }
        Ok(SimState {
            step: 0,
            t: self.config.start_time,
            x: T::zero(),
            y: T::zero(),
            heading: T::zero(),
            alpha,
            alpha_rate: T::zero(),
        })
    }

    fn time_of(&self, step: usize) -> T {
        self.config.start_time + self.config.dt * T::from_usize(step).expect("step index")
    }

    /// Leg tip positions in each module frame at time `t`.
    pub fn module_tips(&self, t: T) -> [[T; 3]; LEG_COUNT] {
        let cfg = &self.config;
        let drive = leg_waveforms(&cfg.gait, &cfg.bias, t);
        let k = cfg.leg.actuator.k_delta;
        let lift_center = cfg.gait.amplitude * lit(0.5);
        std::array::from_fn(|i| {
            let ds = k * (drive.swing[i] - self.swing_center[i]) * self.gain_swing;
            let dl = k * (drive.lift[i] - lift_center) * self.gain_lift;
            let (al, as_) = cfg.leg.transmission.crank_angles(dl, ds);
            cfg.leg.transmission.tip_position(al, as_)
        })
    }

    fn world_tips(&self, state: &SimState<T>, module: &[[T; 3]; LEG_COUNT]) -> [[T; 3]; LEG_COUNT] {
        let body = &self.config.body;
        let shape = body.shape_from_alpha(state.alpha).expect("valid half-angle");
        let heads = module_headings(&shape, T::zero());
        let centers = module_centers(body.side_a, state.alpha);
        let (sh, ch) = state.heading.to_radians().sin_cos();
        std::array::from_fn(|i| {
            let h = heads[i];
            let r = centers[i];
            let mut n = [-h[1], h[0]];
            if n[0] * r[0] + n[1] * r[1] < T::zero() {
                n = [-n[0], -n[1]];
            }
            let p = module[i];
            let bx = r[0] - h[0] * p[0] + n[0] * p[1];
            let by = r[1] - h[1] * p[0] + n[1] * p[1];
            [state.x + ch * bx - sh * by, state.y + sh * bx + ch * by, p[2]]
        })
    }

    fn sample(&self, state: &SimState<T>) -> Sample<T> {
        let module = self.module_tips(state.t);
        Sample {
            t: state.t,
            x: state.x,
            y: state.y,
            heading: state.heading,
            alpha: state.alpha,
            width: self.config.body.width_at(state.alpha),
            corridor_width: self.terrain.width_at(state.x),
            tips: self.world_tips(state, &module),
        }
    }

    /// Advances one time step.
    pub fn step(&self, state: &SimState<T>) -> Result<SimState<T>> {
        let cfg = &self.config;
        let body = &cfg.body;
        let half = lit::<T>(0.5);
        let t0 = state.t;
        let t1 = self.time_of(state.step + 1);
        let dt = t1 - t0;
        let stance = cfg.gait.stance_mask(t0 + dt * half);
        let before = self.module_tips(t0);
        let after = self.module_tips(t1);

        let shape = body.shape_from_alpha(state.alpha)?;
        let heads = module_headings(&shape, T::zero());
        let centers = module_centers(body.side_a, state.alpha);

        // body-frame motion demanded by each module
        let mut vx = T::zero();
        let mut vy = T::zero();
        let mut moment = T::zero();
        let mut inertia = T::zero();
        let mut shape_force = T::zero();
        for i in 0..LEG_COUNT {
            let r = centers[i];
            inertia = inertia + r[0] * r[0] + r[1] * r[1];
            if !stance[i] {
                continue;
            }
            let stroke = after[i][0] - before[i][0];
            let d = [heads[i][0] * stroke, heads[i][1] * stroke];
            vx = vx + d[0];
            vy = vy + d[1];
            moment = moment + r[0] * d[1] - r[1] * d[0];
            // outward lateral component of the push, positive widens the body
            let outward = if LEFT_LEGS.contains(&i) { heads[i][1] } else { -heads[i][1] };
            shape_force = shape_force + self.leg_push[i] * outward;
        }
        let scale = (T::one() - cfg.slip) * body.propulsion_efficiency();
        let n = lit::<T>(LEG_COUNT as f64);
        let dx_body = vx / n * scale;
        let dy_body = vy / n * scale;
        let dtheta = if inertia > T::zero() { moment / inertia * scale } else { T::zero() };

        let (sh, ch) = state.heading.to_radians().sin_cos();
        let x = state.x + ch * dx_body - sh * dy_body;
        let y = state.y + sh * dx_body + ch * dy_body;
        let heading = state.heading + dtheta.to_degrees();

        let mut alpha = state.alpha;
        if let BodyMode::Compliant = body.mode {
            let joints = lit::<T>(crate::body::JOINT_COUNT as f64);
            let stiff = joints * body.k_joint;
            let damp = joints * body.c_joint;
            let lever = body.side_a * half;
            let forcing = lever * shape_force;
            let a_now = state.alpha.to_radians();
            let a_rest = body.alpha0.to_radians();
            let denom = damp + dt * stiff;
            let a_next = if denom > T::zero() {
                (damp * a_now + dt * (forcing + stiff * a_rest)) / denom
            } else if forcing == T::zero() {
                a_now
            } else {
                T::infinity()
            };
            let delta = (a_next - a_now).to_degrees();
            if !(delta.abs() <= lit(MAX_ALPHA_STEP_DEG)) {
                return Err(Error::Instability {
                    t: t1.as_f64(),
                    delta_deg: delta.as_f64(),
                });
            }
            alpha = a_next.to_degrees().max(body.alpha_min).min(body.alpha_max);
            if let Some(w) = self.terrain.width_at(x) {
                alpha = alpha.min(body.alpha_limit_for_width(w)?);
            }
        }
        let alpha_rate = (alpha - state.alpha) / dt;

        Ok(SimState {
            step: state.step + 1,
            t: t1,
            x,
            y,
            heading,
            alpha,
            alpha_rate,
        })
    }

    pub fn run(&self) -> Result<SimResult<T>> {
        let steps = self.config.step_count();
        let mut state = self.initial_state()?;
        let mut samples = Vec::with_capacity(steps + 1);
        samples.push(self.sample(&state));
        let mut path = T::zero();
        for _ in 0..steps {
            let next = self.step(&state)?;
            path = path + ((next.x - state.x).powi(2) + (next.y - state.y).powi(2)).sqrt();
            state = next;
            samples.push(self.sample(&state));
        }
        let first = samples[0];
        let last = samples[samples.len() - 1];
        let net = ((last.x - first.x).powi(2) + (last.y - first.y).powi(2)).sqrt();
        let peak_alpha_min = samples.iter().map(|s| s.alpha).fold(T::infinity(), |a, b| a.min(b));
        let traversal_success = match &self.terrain {
            Terrain::Open => true,
            Terrain::Corridor(c) => last.x > c.exit_x,
        };
        let min_corridor_width = samples
            .iter()
            .filter_map(|s| s.corridor_width)
            .fold(None, |acc: Option<T>, w| Some(acc.map_or(w, |a| a.min(w))));
        let summary = SimSummary {
            mean_speed: (last.x - first.x) / self.config.duration,
            straightness: if path > T::zero() { net / path } else { T::zero() },
            traversal_success,
            min_corridor_width,
            peak_aspect_ratio: peak_alpha_min.to_radians().tan().recip(),
            final_heading: last.heading,
        };
        Ok(SimResult { samples, summary })
    }
}

/// Runs `config` on open ground.
pub fn run<T: Real>(config: &SimConfig<T>) -> Result<SimResult<T>> {
    Simulator::new(*config, Terrain::Open)?.run()
}

/// Runs a compliant body through a corridor.
pub fn gap_traverse<T: Real>(config: &SimConfig<T>, corridor: &CorridorProfile<T>) -> Result<SimResult<T>> {
    if !config.body.is_compliant() {
        return Err(Error::Domain("gap traversal requires a compliant body".to_string()));
    }
    // fails with InfeasibleGap before any stepping
    config.body.equilibrium_under_width_limit(corridor.min_width())?;
    Simulator::new(*config, Terrain::Corridor(corridor.clone()))?.run()
}

/// Closed-form stride-kinematics speed of a straight-driven rigid or
/// compliant body on open ground with dynamic gain off, mm/s.
///
/// Every leg retracts once per cycle during a stance window of width `duty`
/// centred on its lift minimum; the retraction is the tip travel between the
/// window edges, evaluated directly on the leg kinematics. Each module
/// passes a quarter of its projected retraction to the body, so the four
/// legs together advance it by one retraction per cycle.
pub fn quasi_static_speed<T: Real>(config: &SimConfig<T>) -> Result<T> {
    let g = &config.gait;
    let leg = &config.leg;
    leg.actuator.check_voltage(g.amplitude)?;
    let half = lit::<T>(0.5);
    let centre = g.amplitude * half;
    let tip_x = |u: T| -> T {
        let w = T::PI() * lit(2.0) * u;
        let swing = centre * (T::one() + w.sin());
        let lift = centre * (T::one() + (w + g.intra_leg_offset.to_radians()).sin());
        let k = leg.actuator.k_delta;
        let (al, as_) = leg.transmission.crank_angles(k * (lift - centre), k * (swing - centre));
        leg.transmission.tip_position(al, as_)[0]
    };
    let low = lit::<T>(0.75) - g.intra_leg_offset / lit(360.0);
    let retraction = tip_x(low + g.duty * half) - tip_x(low - g.duty * half);
    let alpha = config.body.rest_alpha().to_radians();
    Ok(retraction * g.frequency * alpha.cos() * (T::one() - config.slip) * config.body.propulsion_efficiency())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::ShapeClass;
    use crate::gait::GaitName;

    fn config(shape: ShapeClass, gait: GaitName, f: f64) -> SimConfig<f64> {
        let leg = LegModel::calibrated().unwrap();
        let mut c = SimConfig::new(leg, BodyGeometry::fixed(shape), GaitSpec::table(gait, f, 200.0));
        c.dynamic_gain = false;
        c
    }

    #[test]
    fn rejects_coarse_step_and_short_runs() {
        let mut c = config(ShapeClass::Long, GaitName::Trot, 10.0);
        c.dt = 0.003;
        assert!(c.validate().is_err());
        let mut c = config(ShapeClass::Long, GaitName::Trot, 10.0);
        c.duration = 0.1;
        assert!(c.validate().is_err());
        let mut c = config(ShapeClass::Long, GaitName::Trot, 10.0);
        c.slip = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn pronk_has_no_lateral_drift() {
        let mut c = config(ShapeClass::Square, GaitName::Pronk, 10.0);
        c.duration = 1.0;
        let r = run(&c).unwrap();
        assert!(r.net_lateral().abs() < 1e-6);
        assert!(r.samples.iter().all(|s| s.heading.abs() < 1e-9));
    }

    #[test]
    fn trot_heading_stays_straight() {
        let mut c = config(ShapeClass::Long, GaitName::Trot, 5.0);
        c.duration = 2.0;
        let r = run(&c).unwrap();
        assert!(r.summary.final_heading.abs() < 1e-9);
        assert!(r.summary.straightness > 0.9);
    }

    #[test]
    fn right_bias_turns_right() {
        let mut c = config(ShapeClass::Square, GaitName::Trot, 5.0);
        c.duration = 2.0;
        c.bias = TurnBias::new(crate::gait::TurnSide::Right, 0.5).unwrap();
        let r = run(&c).unwrap();
        assert!(r.summary.final_heading < -1.0, "{}", r.summary.final_heading);
    }

    #[test]
    fn instability_guard() {
        let mut body = BodyGeometry::compliant(1.2, 5000.0).unwrap();
        body.c_joint = 1e-6;
        let leg = LegModel::calibrated().unwrap();
        let c = SimConfig::new(leg, body, GaitSpec::table(GaitName::Trot, 10.0, 200.0));
        let sim = Simulator::new(c, Terrain::Open).unwrap();
        let mut s = sim.initial_state().unwrap();
        s.alpha += 20.0;
        assert!(matches!(sim.step(&s), Err(Error::Instability { .. })));
    }

    #[test]
    fn fixed_shape_keeps_alpha() {
        let mut c = config(ShapeClass::Wide, GaitName::Bound, 5.0);
        c.duration = 1.0;
        let r = run(&c).unwrap();
        let a0 = r.samples[0].alpha;
        assert!(r.samples.iter().all(|s| s.alpha == a0));
    }
}
