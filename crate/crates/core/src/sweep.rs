//! Speed tables over body configuration, gait and stride frequency.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::body::{BodyGeometry, BodyMode, ShapeClass};
use crate::error::{Error, Result};
use crate::gait::{GaitName, GaitSpec};
use crate::scalar::{lit, Real};
use crate::sim::{run, SimConfig};
use crate::solve::bisect;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_230_412;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BodyVariant {
    Fixed(ShapeClass),
    Compliant,
}

impl BodyVariant {
    pub const ALL: [BodyVariant; 4] = [
        BodyVariant::Fixed(ShapeClass::Long),
        BodyVariant::Fixed(ShapeClass::Square),
        BodyVariant::Fixed(ShapeClass::Wide),
        BodyVariant::Compliant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BodyVariant::Fixed(c) => c.as_str(),
            BodyVariant::Compliant => "compliant",
        }
    }

    /// Applies this variant to a template body: fixed variants lock the
    /// shape class, the compliant variant keeps the template's compliant
    /// parameters.
    pub fn body<T: Real>(self, template: &BodyGeometry<T>) -> BodyGeometry<T> {
        match self {
            BodyVariant::Fixed(class) => {
                let fixed = BodyGeometry::fixed(class);
                BodyGeometry {
                    alpha0: fixed.alpha0,
                    mode: fixed.mode,
                    ..*template
                }
            }
            BodyVariant::Compliant => BodyGeometry {
                mode: BodyMode::Compliant,
                ..*template
            },
        }
    }
}

impl fmt::Display for BodyVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BodyVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("compliant") {
            Ok(BodyVariant::Compliant)
        } else {
            s.parse().map(BodyVariant::Fixed)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell<T> {
    pub body: BodyVariant,
    pub gait: GaitName,
    pub frequency: T,
}

impl<T: Real> SweepCell<T> {
    pub fn config_id(&self) -> String {
        format!("{}-{}-{}hz", self.body, self.gait, self.frequency)
    }
}

/// Cartesian product in body, gait, frequency order.
pub fn cartesian<T: Real>(bodies: &[BodyVariant], gaits: &[GaitName], freqs: &[T]) -> Vec<SweepCell<T>> {
    let mut cells = Vec::with_capacity(bodies.len() * gaits.len() * freqs.len());
    for &body in bodies {
        for &gait in gaits {
            for &frequency in freqs {
                cells.push(SweepCell { body, gait, frequency });
            }
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedRow<T> {
    pub config_id: String,
    pub cell: SweepCell<T>,
    pub speed_mean: T,
    /// Sample standard deviation over repeats.
    pub speed_sd: T,
    pub straightness: T,
    pub success: bool,
}

/// Settings shared by every cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings<T> {
    /// Template supplying leg model, body parameters, drive amplitude,
    /// slip, time step and dynamic gain. Its gait and duration are replaced
    /// per cell.
    pub template: SimConfig<T>,
    /// Stride cycles simulated per repeat.
    pub cycles: T,
    pub repeats: usize,
    pub seed: u64,
}

// FNV-1a, stable across platforms and toolchains
fn stable_hash(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3))
}

fn cell_config<T: Real>(settings: &SweepSettings<T>, cell: &SweepCell<T>) -> SimConfig<T> {
    let tpl = &settings.template;
    let mut gait = GaitSpec::table(cell.gait, cell.frequency, tpl.gait.amplitude);
    gait.intra_leg_offset = tpl.gait.intra_leg_offset;
    let mut cfg = SimConfig {
        gait,
        body: cell.body.body(&tpl.body),
        duration: settings.cycles / cell.frequency,
        ..*tpl
    };
    let max_dt = (lit::<T>(50.0) * cell.frequency).recip();
    if cfg.dt > max_dt {
        cfg.dt = max_dt;
    }
    cfg
}

fn run_cell<T: Real>(settings: &SweepSettings<T>, cell: &SweepCell<T>) -> Result<SpeedRow<T>> {
    let id = cell.config_id();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ stable_hash(&id));
    let base = cell_config(settings, cell);
    let mut speeds = Vec::with_capacity(settings.repeats);
    let mut straight = T::zero();
    let mut success = true;
    for _ in 0..settings.repeats {
        let start_phase: f64 = rng.gen_range(0.0..1.0);
        let cfg = SimConfig {
            start_time: lit::<T>(start_phase) / cell.frequency,
            ..base
        };
        let r = run(&cfg)?;
        speeds.push(r.summary.mean_speed);
        straight = straight + r.summary.straightness;
        success &= r.summary.traversal_success;
    }
    let n = T::from_usize(speeds.len()).expect("repeat count");
    let mean = speeds.iter().fold(T::zero(), |a, &b| a + b) / n;
    let var = speeds.iter().fold(T::zero(), |a, &b| a + (b - mean).powi(2)) / (n - T::one());
    Ok(SpeedRow {
        config_id: id,
        cell: *cell,
        speed_mean: mean,
        speed_sd: var.sqrt(),
        straightness: straight / n,
        success,
    })
}

/// Mean and spread of forward speed per cell over `repeats` runs whose gait
/// clocks start at seeded random phases. Cells run in parallel; rows come
/// back sorted by config id.
pub fn speed_table<T: Real>(settings: &SweepSettings<T>, cells: &[SweepCell<T>]) -> Result<Vec<SpeedRow<T>>> {
    if settings.repeats < 3 {
        return Err(Error::Domain(format!("speed table needs at least 3 repeats, got {}", settings.repeats)));
    }
    let mut rows = cells
        .par_iter()
        .map(|cell| run_cell(settings, cell))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.config_id.cmp(&b.config_id));
    Ok(rows)
}

/// Sequential reference for [`speed_table`].
pub fn speed_table_sequential<T: Real>(settings: &SweepSettings<T>, cells: &[SweepCell<T>]) -> Result<Vec<SpeedRow<T>>> {
    if settings.repeats < 3 {
        return Err(Error::Domain(format!("speed table needs at least 3 repeats, got {}", settings.repeats)));
    }
    let mut rows = cells.iter().map(|c| run_cell(settings, c)).collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.config_id.cmp(&b.config_id));
    Ok(rows)
}

/// Smallest joint stiffness for which the compliant body in `template`
/// reaches `fraction` of the speed of a rigid body locked at the same rest
/// shape (trot at the template's stride frequency).
pub fn tune_joint_stiffness<T: Real>(template: &SimConfig<T>, fraction: T, k_max: T) -> Result<T> {
    let mut base = *template;
    base.gait = GaitSpec::table(GaitName::Trot, template.gait.frequency, template.gait.amplitude);
    base.body.mode = BodyMode::Compliant;
    let rigid = SimConfig {
        body: BodyGeometry {
            mode: BodyMode::Fixed(base.body.alpha0),
            ..base.body
        },
        ..base
    };
    let target = run(&rigid)?.summary.mean_speed * fraction;
    let speed_at = |k: T| -> T {
        let mut c = base;
        c.body.k_joint = k;
        run(&c).map(|r| r.summary.mean_speed).unwrap_or_else(|_| T::nan())
    };
    let tol = k_max * lit(1e-9);
    bisect(|k| speed_at(k) - target, T::zero(), k_max, tol, 200).ok_or_else(|| {
        Error::Domain(format!(
            "no joint stiffness up to {k_max} reaches {} of the rigid speed",
            fraction
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::LegModel;

    fn settings() -> SweepSettings<f64> {
        let leg = LegModel::calibrated().unwrap();
        let template = SimConfig::new(leg, BodyGeometry::default(), GaitSpec::table(GaitName::Trot, 10.0, 200.0));
        SweepSettings {
            template,
            cycles: 4.0,
            repeats: 3,
            seed: DEFAULT_SEED,
        }
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("compliant".parse::<BodyVariant>().unwrap(), BodyVariant::Compliant);
        assert_eq!("wide".parse::<BodyVariant>().unwrap(), BodyVariant::Fixed(ShapeClass::Wide));
        assert!("round".parse::<BodyVariant>().is_err());
    }

    #[test]
    fn product_size() {
        let cells = cartesian(&BodyVariant::ALL[..3], &[GaitName::Trot, GaitName::Walk], &[1.0, 5.0, 10.0]);
        assert_eq!(cells.len(), 18);
    }

    #[test]
    fn too_few_repeats() {
        let mut s = settings();
        s.repeats = 2;
        assert!(speed_table(&s, &[]).is_err());
    }

    #[test]
    fn parallel_matches_sequential() {
        let s = settings();
        let cells = cartesian(&BodyVariant::ALL, &[GaitName::Trot, GaitName::Walk], &[5.0, 10.0]);
        let a = speed_table(&s, &cells).unwrap();
        let b = speed_table_sequential(&s, &cells).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.speed_sd >= 0.0));
    }

    #[test]
    fn seed_changes_start_phases_only() {
        let mut s = settings();
        let cells = cartesian(&[BodyVariant::Fixed(ShapeClass::Long)], &[GaitName::Walk], &[5.0]);
        let a = speed_table(&s, &cells).unwrap();
        s.seed = 7;
        let b = speed_table(&s, &cells).unwrap();
        // whole-cycle runs: start phase only moves stance edges within a step
        assert!((a[0].speed_mean - b[0].speed_mean).abs() < 1e-3 * a[0].speed_mean);
    }
}
