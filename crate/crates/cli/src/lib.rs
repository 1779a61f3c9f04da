//! Command-line harness for the morphquad simulator.
//!
//! Every subcommand loads the flat configuration (defaults, then an optional
//! file, then `--set key=value` overrides, then the dedicated flags), runs
//! one experiment and writes CSV tables into the output directory. Output is
//! a pure function of the configuration and seed.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use morphquad::body::ShapeClass;
use morphquad::config::ModeSetting;
use morphquad::sim::{gap_traverse, run, SimResult, SimSummary};
use morphquad::sweep::{cartesian, speed_table};
use morphquad::transmission::{extent_of, signed_area_xz};
use morphquad::{alpha_from_aspect_ratio, leg_waveforms, Axis, CorridorProfile, GaitName, Settings};

pub const ACTUATOR_HEADER: [&str; 3] = ["v_volts", "deflection_pp_um", "blocked_force_mn"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["sample", "x_mm", "y_mm", "z_mm"];
pub const LEG_SUMMARY_HEADER: [&str; 5] = ["phase_offset_deg", "dx_mm", "dy_mm", "dz_mm", "area_xz_mm2"];
pub const WAVEFORM_HEADER: [&str; 9] = [
    "t_s", "lift1", "lift2", "lift3", "lift4", "swing1", "swing2", "swing3", "swing4",
];
pub const BODE_HEADER: [&str; 5] = ["f_hz", "gain_swing", "phase_swing", "gain_lift", "phase_lift"];
pub const RUN_HEADER: [&str; 6] = ["t_s", "x_mm", "y_mm", "heading_deg", "alpha_deg", "width_mm"];
pub const SUMMARY_HEADER: [&str; 8] = [
    "config_id",
    "shape",
    "gait",
    "freq_hz",
    "speed_mm_s",
    "speed_sd",
    "straightness",
    "success",
];
pub const GAP_HEADER: [&str; 6] = [
    "throat_mm",
    "rest_width_mm",
    "compression_pct",
    "peak_aspect_ratio",
    "final_alpha_deg",
    "success",
];
pub const CALIBRATION_HEADER: [&str; 10] = [
    "theta0_deg",
    "eta_s",
    "eta_l",
    "dx_mm",
    "dy_mm",
    "dz_mm",
    "target_dx_mm",
    "target_dy_mm",
    "target_dz_mm",
    "v_ref_volts",
];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] morphquad::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{failed} of {total} rows failed; first: {first}")]
    Rows {
        failed: usize,
        total: usize,
        first: morphquad::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Process exit status for an error: 2 for configuration and usage
/// problems, 3 for a corridor narrower than the body can fold to, 4 for a
/// numerical-instability abort, 1 for I/O failures.
pub fn exit_code(err: &CliError) -> u8 {
    use morphquad::Error as E;
    match err {
        CliError::Model(E::InfeasibleGap { .. }) => 3,
        CliError::Model(E::Instability { .. }) => 4,
        CliError::Model(_) | CliError::Usage(_) | CliError::Rows { .. } => 2,
        CliError::Io { .. } | CliError::Csv(_) => 1,
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Long,
    Square,
    Wide,
    Compliant,
}

#[derive(Debug, Parser)]
#[command(name = "morphquad", version, about = "Desk-scale experiments on a compliant-body piezo quadruped")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Configuration override, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Gait: trot, walk, pronk, bound or pace.
    #[arg(long, global = true)]
    pub gait: Option<GaitName>,
    /// Stride frequency, Hz.
    #[arg(long, global = true)]
    pub freq: Option<f64>,
    /// Drive amplitude, V.
    #[arg(long, global = true)]
    pub volts: Option<f64>,
    /// Body: one of the rigid shape classes or the compliant body.
    #[arg(long, global = true, value_enum)]
    pub shape: Option<ShapeArg>,
    /// Seed for randomized start phases.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Free deflection and blocked force over a voltage list.
    Actuator {
        /// Comma-separated voltages (overrides actuator.volts).
        #[arg(long)]
        voltages: Option<String>,
    },
    /// Fit the transmission efficiencies and lift offset to the target ranges.
    Calibrate,
    /// Leg tip loops for several lift/swing phase offsets.
    Leg {
        /// Comma-separated phase offsets in degrees (overrides leg.phase_offsets_deg).
        #[arg(long)]
        offsets: Option<String>,
    },
    /// Frequency response of both leg axes on a log-spaced grid.
    Bode,
    /// Drive waveforms of all four legs over the configured run.
    Waveform,
    /// One locomotion run on open ground.
    Run,
    /// Speed table over body, gait and stride frequency.
    Sweep,
    /// Compliant body traversing a corridor.
    Gap {
        /// Corridor profile file (`x_mm,width_mm`); overrides gap.profile.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
}

/// Files written by a command plus a one-paragraph report for the terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub report: String,
}

/// Shortest round-trip decimal form, identical on every platform.
fn num(x: f64) -> String {
    format!("{x}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_file(dir: &Path, name: &str, text: &str, files: &mut Vec<PathBuf>) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(io_err(&path))?;
    files.push(path);
    Ok(())
}

/// Resolves the configuration for a command line.
pub fn load_settings(common: &Common) -> CliResult<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        s.apply_text(&text)?;
    }
    for kv in &common.set {
        s.apply_override(kv)?;
    }
    if let Some(g) = common.gait {
        s.gait = g;
    }
    if let Some(f) = common.freq {
        s.freq_hz = f;
    }
    if let Some(v) = common.volts {
        s.volts = v;
    }
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    if let Some(shape) = common.shape {
        apply_shape(&mut s, shape)?;
    }
    Ok(s)
}

/// Locks the body to a rigid shape class or selects the compliant body with
/// its configured rest shape.
pub fn apply_shape(s: &mut Settings, shape: ShapeArg) -> CliResult<()> {
    let class = match shape {
        ShapeArg::Long => ShapeClass::Long,
        ShapeArg::Square => ShapeClass::Square,
        ShapeArg::Wide => ShapeClass::Wide,
        ShapeArg::Compliant => {
            s.body_mode = ModeSetting::Compliant;
            return Ok(());
        }
    };
    s.body_mode = ModeSetting::Fixed;
    s.body.alpha0 = alpha_from_aspect_ratio(class.aspect_ratio::<f64>())?;
    Ok(())
}

/// Shape label used in summary tables.
pub fn shape_label(s: &Settings) -> String {
    match s.body_mode {
        ModeSetting::Compliant => "compliant".to_string(),
        ModeSetting::Fixed => ShapeClass::ALL
            .iter()
            .find(|c| {
                alpha_from_aspect_ratio(c.aspect_ratio::<f64>()).is_ok_and(|a| (a - s.body.alpha0).abs() < 1e-9)
            })
            .map_or_else(|| format!("fixed{}", num(s.body.alpha0)), |c| c.as_str().to_string()),
    }
}

fn config_id(s: &Settings) -> String {
    format!("{}-{}-{}hz", shape_label(s), s.gait, num(s.freq_hz))
}

/// Actuator table. Rows for valid voltages are always produced; invalid
/// voltages are collected as per-row errors.
pub fn actuator_csv(s: &Settings) -> CliResult<(String, Vec<morphquad::Error>)> {
    s.actuator.validate()?;
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for &v in &s.actuator_volts {
        match (s.actuator.free_deflection_pp(v), s.actuator.blocked_force_amp(v)) {
            (Ok(d), Ok(f)) => rows.push(vec![num(v), num(d), num(f)]),
            (Err(e), _) | (_, Err(e)) => errors.push(e),
        }
    }
    Ok((csv_text(&ACTUATOR_HEADER, &rows)?, errors))
}

pub fn calibration_csv(s: &Settings) -> CliResult<String> {
    let g = s
        .transmission
        .calibrate(&s.actuator, s.calib_target, s.calib_v_ref)?;
    let r = g.workspace(&s.actuator, s.calib_v_ref)?;
    let t = s.calib_target;
    let row = vec![
        num(g.theta0.to_degrees()),
        num(g.eta_s),
        num(g.eta_l),
        num(r.dx),
        num(r.dy),
        num(r.dz),
        num(t.dx),
        num(t.dy),
        num(t.dz),
        num(s.calib_v_ref),
    ];
    csv_text(&CALIBRATION_HEADER, &[row])
}

/// Per-offset tip loops and a summary table of their extents.
pub struct LegTables {
    pub loops: Vec<(f64, String)>,
    pub summary: String,
}

pub fn leg_tables(s: &Settings) -> CliResult<LegTables> {
    let leg = s.leg_model()?;
    let mut loops = Vec::new();
    let mut summary = Vec::new();
    for &offset in &s.leg_phase_offsets_deg {
        let pts = leg.transmission.tip_trajectory(
            &leg.actuator,
            &leg.dynamics,
            s.leg_volts,
            s.leg_freq_hz,
            offset,
            s.leg_samples,
        )?;
        let rows: Vec<Vec<String>> = pts
            .iter()
            .enumerate()
            .map(|(k, p)| vec![k.to_string(), num(p[0]), num(p[1]), num(p[2])])
            .collect();
        loops.push((offset, csv_text(&TRAJECTORY_HEADER, &rows)?));
        let e = |axis| extent_of(pts.iter().copied(), axis);
        summary.push(vec![num(offset), num(e(0)), num(e(1)), num(e(2)), num(signed_area_xz(&pts))]);
    }
    Ok(LegTables {
        loops,
        summary: csv_text(&LEG_SUMMARY_HEADER, &summary)?,
    })
}

/// Log-spaced frequency grid from `f_min` to `f_max` inclusive.
pub fn log_grid(f_min: f64, f_max: f64, points: usize) -> CliResult<Vec<f64>> {
    if !(f_min > 0.0 && f_max > f_min && f_max.is_finite()) || points < 2 {
        return Err(CliError::Usage(format!(
            "bode range needs 0 < f_min < f_max and at least 2 points (got {f_min}, {f_max}, {points})"
        )));
    }
    let (a, b) = (f_min.ln(), f_max.ln());
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|k| match k {
            0 => f_min,
            k if k == points - 1 => f_max,
            k => (a + (b - a) * k as f64 / last).exp(),
        })
        .collect())
}

pub fn bode_csv(s: &Settings) -> CliResult<String> {
    s.dynamics.validate()?;
    let grid = log_grid(s.bode_f_min_hz, s.bode_f_max_hz, s.bode_points)?;
    let rows: Vec<Vec<String>> = grid
        .iter()
        .map(|&f| {
            let (gs, ps) = s.dynamics.frequency_gain(Axis::Swing, f);
            let (gl, pl) = s.dynamics.frequency_gain(Axis::Lift, f);
            vec![num(f), num(gs), num(ps), num(gl), num(pl)]
        })
        .collect();
    csv_text(&BODE_HEADER, &rows)
}

pub fn waveform_csv(s: &Settings) -> CliResult<String> {
    let cfg = s.sim_config()?;
    let rows: Vec<Vec<String>> = (0..=cfg.step_count())
        .map(|k| {
            let t = cfg.start_time + cfg.dt * k as f64;
            let d = leg_waveforms(&cfg.gait, &cfg.bias, t);
            std::iter::once(num(t))
                .chain(d.lift.iter().chain(d.swing.iter()).map(|&x| num(x)))
                .collect()
        })
        .collect();
    csv_text(&WAVEFORM_HEADER, &rows)
}

fn trajectory_csv(r: &SimResult<f64>) -> CliResult<String> {
    let rows: Vec<Vec<String>> = r
        .samples
        .iter()
        .map(|p| vec![num(p.t), num(p.x), num(p.y), num(p.heading), num(p.alpha), num(p.width)])
        .collect();
    csv_text(&RUN_HEADER, &rows)
}

fn summary_row(s: &Settings, sum: &SimSummary<f64>) -> Vec<String> {
    vec![
        config_id(s),
        shape_label(s),
        s.gait.to_string(),
        num(s.freq_hz),
        num(sum.mean_speed),
        num(0.0),
        num(sum.straightness),
        sum.traversal_success.to_string(),
    ]
}

/// Trajectory and one-row summary of a single open-ground run.
pub fn run_tables(s: &Settings) -> CliResult<(String, String, SimSummary<f64>)> {
    let cfg = s.sim_config()?;
    let r = run(&cfg)?;
    let summary = csv_text(&SUMMARY_HEADER, &[summary_row(s, &r.summary)])?;
    Ok((trajectory_csv(&r)?, summary, r.summary))
}

/// Speed table over the configured bodies, gaits and frequencies, sorted by
/// config id.
pub fn sweep_csv(s: &Settings) -> CliResult<String> {
    let mut base = s.clone();
    // cells supply their own body; the template keeps the compliant parameters
    base.body_mode = ModeSetting::Compliant;
    let settings = base.sweep_settings()?;
    let cells = cartesian(&s.sweep_bodies, &s.sweep_gaits, &s.sweep_freqs_hz);
    let rows: Vec<Vec<String>> = speed_table(&settings, &cells)?
        .into_iter()
        .map(|r| {
            vec![
                r.config_id,
                r.cell.body.to_string(),
                r.cell.gait.to_string(),
                num(r.cell.frequency),
                num(r.speed_mean),
                num(r.speed_sd),
                num(r.straightness),
                r.success.to_string(),
            ]
        })
        .collect();
    csv_text(&SUMMARY_HEADER, &rows)
}

pub struct GapTables {
    pub trajectory: String,
    pub summary: String,
    pub metrics: String,
    pub result: SimResult<f64>,
}

pub fn corridor(s: &Settings) -> CliResult<CorridorProfile<f64>> {
    match &s.gap_profile {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            Ok(CorridorProfile::parse(&text)?)
        }
        None => Ok(s.throat_corridor()?),
    }
}

pub fn gap_tables(s: &Settings) -> CliResult<GapTables> {
    let mut s = s.clone();
    s.cycles = s.gap_cycles;
    let cfg = s.sim_config()?;
    let profile = corridor(&s)?;
    let r = gap_traverse(&cfg, &profile)?;
    let throat = profile.min_width();
    let rest = cfg.body.rest_shape().width;
    let compression = (rest - throat).max(0.0) / rest * 100.0;
    let last = r.samples.last().expect("runs record the initial state");
    let metrics = csv_text(
        &GAP_HEADER,
        &[vec![
            num(throat),
            num(rest),
            num(compression),
            num(r.summary.peak_aspect_ratio),
            num(last.alpha),
            r.summary.traversal_success.to_string(),
        ]],
    )?;
    Ok(GapTables {
        trajectory: trajectory_csv(&r)?,
        summary: csv_text(&SUMMARY_HEADER, &[summary_row(&s, &r.summary)])?,
        metrics,
        result: r,
    })
}

/// Runs a parsed command line, writing its tables into the output directory.
pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let mut s = load_settings(&cli.common)?;
    let out = &cli.common.out;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut files = Vec::new();
    let report = match &cli.command {
        Command::Actuator { voltages } => {
            if let Some(v) = voltages {
                s.set("actuator.volts", v)?;
            }
            let (text, errors) = actuator_csv(&s)?;
            write_file(out, "actuator.csv", &text, &mut files)?;
            if let Some(first) = errors.first() {
                return Err(CliError::Rows {
                    failed: errors.len(),
                    total: s.actuator_volts.len(),
                    first: first.clone(),
                });
            }
            format!("{} actuator rows", s.actuator_volts.len())
        }
        Command::Calibrate => {
            let text = calibration_csv(&s)?;
            write_file(out, "calibration.csv", &text, &mut files)?;
            "transmission calibrated".to_string()
        }
        Command::Leg { offsets } => {
            if let Some(o) = offsets {
                s.set("leg.phase_offsets_deg", o)?;
            }
            let t = leg_tables(&s)?;
            for (offset, text) in &t.loops {
                write_file(out, &format!("leg_offset_{}.csv", num(*offset)), text, &mut files)?;
            }
            write_file(out, "leg_summary.csv", &t.summary, &mut files)?;
            format!("{} leg loops", t.loops.len())
        }
        Command::Bode => {
            let text = bode_csv(&s)?;
            write_file(out, "bode.csv", &text, &mut files)?;
            format!(
                "peaks: swing {:.2} Hz, lift {:.2} Hz",
                s.dynamics.peak_frequency(Axis::Swing),
                s.dynamics.peak_frequency(Axis::Lift)
            )
        }
        Command::Waveform => {
            let text = waveform_csv(&s)?;
            write_file(out, "waveform.csv", &text, &mut files)?;
            format!("{} waveform", s.gait)
        }
        Command::Run => {
            let (traj, summary, sum) = run_tables(&s)?;
            write_file(out, "trajectory.csv", &traj, &mut files)?;
            write_file(out, "summary.csv", &summary, &mut files)?;
            format!(
                "{}: {:.3} mm/s, straightness {:.3}, final heading {:.2} deg",
                config_id(&s),
                sum.mean_speed,
                sum.straightness,
                sum.final_heading
            )
        }
        Command::Sweep => {
            let text = sweep_csv(&s)?;
            write_file(out, "sweep.csv", &text, &mut files)?;
            format!("{} cells", text.lines().count() - 1)
        }
        Command::Gap { profile } => {
            if let Some(p) = profile {
                s.gap_profile = Some(p.clone());
            }
            if s.body_mode != ModeSetting::Compliant {
                return Err(CliError::Usage("gap traversal needs the compliant body".to_string()));
            }
            let t = gap_tables(&s)?;
            write_file(out, "gap_trajectory.csv", &t.trajectory, &mut files)?;
            write_file(out, "gap_summary.csv", &t.summary, &mut files)?;
            write_file(out, "gap_metrics.csv", &t.metrics, &mut files)?;
            format!(
                "success {}, peak aspect ratio {:.3}",
                t.result.summary.traversal_success, t.result.summary.peak_aspect_ratio
            )
        }
    };
    Ok(Outcome { files, report })
}
