//! Command-line sweeps: presets, argument parsing, CSV output and summaries.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, ValueEnum};

use crate::channel::{dbm_to_watts, dbw_to_watts, watts_to_dbm, SystemParams};
use crate::error::{Error, Result};
use crate::montecarlo::{run_scenario_with, CalibrationMode, PolicyRun, ScenarioResult};

pub const CSV_HEADER: &str = "preset,sweep_axis,sweep_value,policy,lambda,avg_rate_bps_hz,\
p_he_dbm,outage_fraction,epsilon,gamma_th_dbm,pt_dbw,mu_x,mu_y,mu_g,mu_z,m_slots,m_train,seed";

pub const TRACE_HEADER: &str =
    "curve,sweep_value,policy,slot,x,y,g,z,alpha,outage,rate_bps_hz,tx_power_w";

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SLOTS: usize = 10_000;
pub const NOISE_DBM: f64 = -90.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepAxis {
    MuG,
    MuZ,
    Epsilon,
    GammaThDbm,
    MuX,
    MuY,
    PtDbw,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::MuG => "mu_g",
            SweepAxis::MuZ => "mu_z",
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::GammaThDbm => "gamma_th_dbm",
            SweepAxis::MuX => "mu_x",
            SweepAxis::MuY => "mu_y",
            SweepAxis::PtDbw => "pt_dbw",
        }
    }

    /// Channel means are swept on a log scale, everything else linearly.
    fn is_logarithmic(self) -> bool {
        matches!(
            self,
            SweepAxis::MuG | SweepAxis::MuZ | SweepAxis::MuX | SweepAxis::MuY
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    Optimal,
    Fixed,
    Unconstrained,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [
        PolicyKind::Optimal,
        PolicyKind::Fixed,
        PolicyKind::Unconstrained,
    ];

    fn select(self, result: &ScenarioResult) -> &PolicyRun {
        match self {
            PolicyKind::Optimal => &result.optimal,
            PolicyKind::Fixed => &result.fixed,
            PolicyKind::Unconstrained => &result.unconstrained,
        }
    }
}

/// Mean gains of the four links; one per plotted curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMeans {
    pub mu_x: f64,
    pub mu_y: f64,
    pub mu_g: f64,
    pub mu_z: f64,
}

/// One fully resolved scenario of a plan, with its dB-valued inputs kept for output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanPoint {
    pub curve: usize,
    pub sweep_value: f64,
    pub gamma_th_dbm: f64,
    pub pt_dbw: f64,
    pub params: SystemParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub preset: Option<Preset>,
    /// Scenario before sweeping; channel means are those of the first curve.
    pub base: SystemParams,
    pub gamma_th_dbm: f64,
    pub pt_dbw: f64,
    pub curves: Vec<ChannelMeans>,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    pub output_path: PathBuf,
    pub trace: usize,
    pub calibration: CalibrationMode,
}

impl ExperimentPlan {
    pub fn preset_name(&self) -> &'static str {
        self.preset.map_or("custom", Preset::name)
    }

    pub fn points(&self) -> Vec<PlanPoint> {
        let mut out = Vec::with_capacity(self.curves.len() * self.sweep_values.len());
        for (curve, means) in self.curves.iter().enumerate() {
            for &value in &self.sweep_values {
                let mut point = PlanPoint {
                    curve,
                    sweep_value: value,
                    gamma_th_dbm: self.gamma_th_dbm,
                    pt_dbw: self.pt_dbw,
                    params: SystemParams {
                        mu_x: means.mu_x,
                        mu_y: means.mu_y,
                        mu_g: means.mu_g,
                        mu_z: means.mu_z,
                        ..self.base
                    },
                };
                match self.sweep_axis {
                    SweepAxis::MuG => point.params.mu_g = value,
                    SweepAxis::MuZ => point.params.mu_z = value,
                    SweepAxis::MuX => point.params.mu_x = value,
                    SweepAxis::MuY => point.params.mu_y = value,
                    SweepAxis::Epsilon => point.params.epsilon = value,
                    SweepAxis::GammaThDbm => {
                        point.gamma_th_dbm = value;
                        point.params.gamma_th = dbm_to_watts(value);
                    }
                    SweepAxis::PtDbw => {
                        point.pt_dbw = value;
                        point.params.pt = dbw_to_watts(value);
                    }
                }
                out.push(point);
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if self.sweep_values.is_empty() {
            return Err(Error::Usage("--sweep: no sweep values".into()));
        }
        let increasing = self.sweep_values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = self.sweep_values.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::Usage(
                "--sweep: values must be strictly ordered".into(),
            ));
        }
        for point in self.points() {
            point.params.validate().map_err(|e| match e {
                Error::InvalidParameter { name, reason } => {
                    Error::Usage(format!("--{}: {reason}", flag_for(name)))
                }
                other => other,
            })?;
        }
        Ok(())
    }
}

fn flag_for(param: &str) -> &'static str {
    match param {
        "epsilon" => "epsilon",
        "pt" => "pt-dbw",
        "gamma_th" => "gamma-th-dbm",
        "mu_x" => "mu-x",
        "mu_y" => "mu-y",
        "mu_g" => "mu-g",
        "mu_z" => "mu-z",
        "m_slots" => "slots",
        "m_train" => "train-slots",
        _ => "sweep",
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cr-timeshare",
    version,
    about = "Optimal harvest/transmit time sharing for an RF-powered underlay cognitive radio link"
)]
struct Cli {
    /// Named experiment; pins every parameter, the curves and the swept axis.
    #[arg(long, value_enum)]
    preset: Option<Preset>,

    /// `AXIS START STOP POINTS` (log spacing for mu_* axes) or `AXIS V1,V2,...`.
    #[arg(long, num_args = 2..=4, allow_negative_numbers = true,
          value_names = ["AXIS", "START|LIST", "STOP", "POINTS"])]
    sweep: Option<Vec<String>>,

    /// Mean gain of the secondary link; repeat to plot several curves.
    #[arg(long = "mu-x", action = ArgAction::Append)]
    mu_x: Vec<f64>,
    /// Mean gain from the primary transmitter to the secondary receiver; repeatable.
    #[arg(long = "mu-y", action = ArgAction::Append)]
    mu_y: Vec<f64>,
    /// Mean gain from the primary transmitter to the harvester; repeatable.
    #[arg(long = "mu-g", action = ArgAction::Append)]
    mu_g: Vec<f64>,
    /// Mean gain from the secondary transmitter to the primary receiver; repeatable.
    #[arg(long = "mu-z", action = ArgAction::Append)]
    mu_z: Vec<f64>,

    /// Interference cap at the primary receiver, dBm.
    #[arg(long, allow_negative_numbers = true)]
    gamma_th_dbm: Option<f64>,
    /// Tolerated primary outage fraction, in (0, 1).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Primary transmit power, dBW.
    #[arg(long, allow_negative_numbers = true)]
    pt_dbw: Option<f64>,

    /// Evaluation slots per scenario.
    #[arg(long)]
    slots: Option<usize>,
    /// Training slots for the penalty calibration (defaults to --slots).
    #[arg(long)]
    train_slots: Option<usize>,
    /// Seed of the fading streams (default 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Calibrate on the evaluation slots instead of a separate training set.
    #[arg(long)]
    in_sample: bool,

    /// Comma-separated policies to report (default: all three).
    #[arg(long, value_enum, value_delimiter = ',')]
    policies: Vec<PolicyKind>,
    /// CSV destination (default: `<preset>.csv`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the first N slots of every run to `<out>.trace.csv`.
    #[arg(long, default_value_t = 0)]
    trace: usize,
}

/// Everything a preset fixes before command-line overrides.
struct PresetSpec {
    gamma_th_dbm: f64,
    epsilon: f64,
    pt_dbw: f64,
    curves: Vec<ChannelMeans>,
    sweep_axis: SweepAxis,
    sweep_values: Vec<f64>,
}

fn means(mu_x: f64, mu_y: f64, mu_g: f64, mu_z: f64) -> ChannelMeans {
    ChannelMeans {
        mu_x,
        mu_y,
        mu_g,
        mu_z,
    }
}

pub fn log_space(start: f64, stop: f64, points: usize) -> Vec<f64> {
    let (a, b) = (start.log10(), stop.log10());
    linear_space(a, b, points)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect()
}

pub fn linear_space(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n)
            .map(|i| {
                if i == n - 1 {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

fn preset_spec(preset: Preset) -> PresetSpec {
    match preset {
        // Rate against average harvested power: sweeping mu_g moves along the
        // P_HE axis. Curves: a weakly interfered link, a link under strong
        // primary interference, a link that strongly interferes with the
        // primary receiver.
        Preset::Fig3 => PresetSpec {
            gamma_th_dbm: -90.0,
            epsilon: 0.01,
            pt_dbw: 30.0,
            curves: vec![
                means(1e-3, 1e-9, 1e-4, 1e-9),
                means(1e-3, 1e-7, 1e-4, 1e-9),
                means(1e-3, 1e-9, 1e-4, 1e-7),
            ],
            sweep_axis: SweepAxis::MuG,
            sweep_values: log_space(1e-8, 1e-2, 13),
        },
        // At 0 dBW the weak-interference curves sit at the unconstrained
        // bound over the whole sweep, while mu_z = 1e-6 loses rate.
        Preset::Fig4 => PresetSpec {
            gamma_th_dbm: -90.0,
            epsilon: 0.01,
            pt_dbw: 0.0,
            curves: vec![
                means(1e-3, 1e-7, 1e-7, 1e-6),
                means(1e-3, 1e-7, 1e-7, 1e-7),
                means(1e-3, 1e-7, 1e-7, 1e-8),
                means(1e-3, 1e-7, 1e-7, 1e-9),
            ],
            sweep_axis: SweepAxis::MuG,
            sweep_values: log_space(1e-9, 1e-6, 7),
        },
        Preset::Fig5 => PresetSpec {
            gamma_th_dbm: -90.0,
            epsilon: 0.01,
            pt_dbw: 30.0,
            curves: vec![
                means(1e-5, 1e-7, 1e-5, 1e-6),
                means(1e-5, 1e-7, 1e-4, 1e-6),
                means(1e-5, 1e-7, 1e-3, 1e-6),
            ],
            sweep_axis: SweepAxis::Epsilon,
            sweep_values: vec![
                0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99,
            ],
        },
        Preset::Fig6 => PresetSpec {
            gamma_th_dbm: -90.0,
            epsilon: 0.01,
            pt_dbw: 30.0,
            curves: vec![
                means(1e-5, 1e-7, 1e-7, 1e-6),
                means(1e-5, 1e-7, 1e-6, 1e-6),
                means(1e-5, 1e-7, 1e-5, 1e-6),
            ],
            sweep_axis: SweepAxis::GammaThDbm,
            sweep_values: linear_space(-90.0, -30.0, 13),
        },
    }
}

fn custom_spec() -> PresetSpec {
    let d = SystemParams::default();
    PresetSpec {
        gamma_th_dbm: -90.0,
        epsilon: d.epsilon,
        pt_dbw: 30.0,
        curves: vec![means(d.mu_x, d.mu_y, d.mu_g, d.mu_z)],
        sweep_axis: SweepAxis::Epsilon,
        sweep_values: vec![d.epsilon],
    }
}

fn parse_number(flag: &str, raw: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Usage(format!("{flag}: `{raw}` is not a finite number")))
}

fn parse_sweep(raw: &[String]) -> Result<(SweepAxis, Vec<f64>)> {
    let axis = SweepAxis::from_str(&raw[0], false).map_err(|_| {
        let names: Vec<_> = SweepAxis::value_variants()
            .iter()
            .map(|a| a.name())
            .collect();
        Error::Usage(format!(
            "--sweep: unknown axis `{}` (expected one of {})",
            raw[0],
            names.join(", ")
        ))
    })?;
    let values = match raw.len() {
        2 => raw[1]
            .split(',')
            .map(|v| parse_number("--sweep", v))
            .collect::<Result<Vec<_>>>()?,
        4 => {
            let start = parse_number("--sweep", &raw[1])?;
            let stop = parse_number("--sweep", &raw[2])?;
            let points: usize = raw[3]
                .parse()
                .map_err(|_| Error::Usage(format!("--sweep: `{}` is not a point count", raw[3])))?;
            if points == 0 {
                return Err(Error::Usage("--sweep: point count must be positive".into()));
            }
            if axis.is_logarithmic() {
                if !(start > 0.0 && stop > 0.0) {
                    return Err(Error::Usage(format!(
                        "--sweep: {} bounds must be positive",
                        axis.name()
                    )));
                }
                log_space(start, stop, points)
            } else {
                linear_space(start, stop, points)
            }
        }
        _ => {
            return Err(Error::Usage(
                "--sweep expects `AXIS START STOP POINTS` or `AXIS V1,V2,...`".into(),
            ))
        }
    };
    Ok((axis, values))
}

/// Broadcasts per-link overrides over the preset's curves. Each list has
/// length 1 (applies to every curve) or a common length N (N curves).
fn apply_mean_overrides(curves: &mut Vec<ChannelMeans>, cli: &Cli) -> Result<()> {
    let lists: [(&str, &Vec<f64>); 4] = [
        ("--mu-x", &cli.mu_x),
        ("--mu-y", &cli.mu_y),
        ("--mu-g", &cli.mu_g),
        ("--mu-z", &cli.mu_z),
    ];
    let n = lists.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    if n == 0 {
        return Ok(());
    }
    for (flag, values) in &lists {
        if values.len() > 1 && values.len() != n {
            return Err(Error::Usage(format!(
                "{flag}: given {} times, expected 1 or {n}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Usage(format!(
                "{flag}: {v} is not a positive mean gain"
            )));
        }
    }
    if n > 1 && curves.len() != 1 && curves.len() != n {
        // The override defines a new set of curves; the preset's first curve
        // supplies any link that is not overridden.
        curves.truncate(1);
    }
    if curves.len() == 1 && n > 1 {
        let first = curves[0];
        curves.resize(n, first);
    }
    for (i, curve) in curves.iter_mut().enumerate() {
        let pick = |values: &Vec<f64>, current: f64| match values.len() {
            0 => current,
            1 => values[0],
            _ => values[i],
        };
        curve.mu_x = pick(&cli.mu_x, curve.mu_x);
        curve.mu_y = pick(&cli.mu_y, curve.mu_y);
        curve.mu_g = pick(&cli.mu_g, curve.mu_g);
        curve.mu_z = pick(&cli.mu_z, curve.mu_z);
    }
    Ok(())
}

/// Parses a full argument vector (program name first) into a validated plan.
pub fn parse_args<I, T>(argv: I) -> Result<ExperimentPlan>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            Error::Help(e.to_string())
        }
        _ => Error::Usage(e.to_string().trim_end().to_string()),
    })?;

    let mut spec = cli.preset.map_or_else(custom_spec, preset_spec);
    if let Some(raw) = &cli.sweep {
        let (axis, values) = parse_sweep(raw)?;
        spec.sweep_axis = axis;
        spec.sweep_values = values;
    }
    apply_mean_overrides(&mut spec.curves, &cli)?;

    if let Some(eps) = cli.epsilon {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Usage(format!("--epsilon: {eps} is not in (0, 1)")));
        }
        spec.epsilon = eps;
        if cli.preset.is_none() && cli.sweep.is_none() {
            spec.sweep_values = vec![eps];
        }
    }
    if let Some(v) = cli.gamma_th_dbm {
        if !v.is_finite() {
            return Err(Error::Usage(format!("--gamma-th-dbm: {v} is not finite")));
        }
        spec.gamma_th_dbm = v;
    }
    if let Some(v) = cli.pt_dbw {
        if !v.is_finite() {
            return Err(Error::Usage(format!("--pt-dbw: {v} is not finite")));
        }
        spec.pt_dbw = v;
    }
    let m_slots = cli.slots.unwrap_or(DEFAULT_SLOTS);
    if m_slots == 0 {
        return Err(Error::Usage("--slots: must be at least 1".into()));
    }
    let m_train = cli.train_slots.unwrap_or(m_slots);
    if m_train == 0 {
        return Err(Error::Usage("--train-slots: must be at least 1".into()));
    }

    let first = spec.curves[0];
    let base = SystemParams {
        pt: dbw_to_watts(spec.pt_dbw),
        noise: dbm_to_watts(NOISE_DBM),
        gamma_th: dbm_to_watts(spec.gamma_th_dbm),
        epsilon: spec.epsilon,
        mu_x: first.mu_x,
        mu_y: first.mu_y,
        mu_g: first.mu_g,
        mu_z: first.mu_z,
        m_slots,
        m_train,
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
    };
    let mut policies = if cli.policies.is_empty() {
        PolicyKind::ALL.to_vec()
    } else {
        cli.policies.clone()
    };
    policies.dedup();

    let preset_name = cli.preset.map_or("custom", Preset::name);
    let plan = ExperimentPlan {
        preset: cli.preset,
        base,
        gamma_th_dbm: spec.gamma_th_dbm,
        pt_dbw: spec.pt_dbw,
        curves: spec.curves,
        sweep_axis: spec.sweep_axis,
        sweep_values: spec.sweep_values,
        policies,
        output_path: cli
            .out
            .unwrap_or_else(|| PathBuf::from(format!("{preset_name}.csv"))),
        trace: cli.trace,
        calibration: if cli.in_sample {
            CalibrationMode::InSample
        } else {
            CalibrationMode::OutOfSample
        },
    };
    plan.validate()?;
    Ok(plan)
}

/// One output line of a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub preset: &'static str,
    pub sweep_axis: SweepAxis,
    pub point: PlanPoint,
    pub policy: PolicyKind,
    /// Penalty in force for the row's policy; `None` for the fixed split.
    pub lambda: Option<f64>,
    pub avg_rate: f64,
    pub p_he_dbm: f64,
    pub outage_fraction: f64,
}

fn axis_label(axis: SweepAxis, v: f64) -> String {
    if axis.is_logarithmic() {
        format!("{v:.4e}")
    } else {
        format!("{v}")
    }
}

fn axis_value(axis: SweepAxis, v: f64) -> String {
    if axis.is_logarithmic() {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

impl CsvRow {
    pub fn to_csv_line(&self) -> String {
        let p = &self.point.params;
        let policy = self
            .policy
            .to_possible_value()
            .expect("no skipped variants");
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:e},{:e},{:e},{:e},{},{},{}",
            self.preset,
            self.sweep_axis.name(),
            axis_value(self.sweep_axis, self.point.sweep_value),
            policy.get_name(),
            self.lambda.map(|l| l.to_string()).unwrap_or_default(),
            self.avg_rate,
            self.p_he_dbm,
            self.outage_fraction,
            p.epsilon,
            self.point.gamma_th_dbm,
            self.point.pt_dbw,
            p.mu_x,
            p.mu_y,
            p.mu_g,
            p.mu_z,
            p.m_slots,
            p.m_train,
            p.seed,
        )
    }
}

/// Output of a plan: CSV rows in plan order plus the raw scenario results.
#[derive(Debug, Clone)]
pub struct PlanOutput {
    pub rows: Vec<CsvRow>,
    pub scenarios: Vec<(PlanPoint, ScenarioResult)>,
}

impl PlanOutput {
    pub fn csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv_line());
            out.push('\n');
        }
        out
    }

    pub fn trace_csv(&self, sweep_axis: SweepAxis, policies: &[PolicyKind]) -> String {
        let mut out = String::new();
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for (point, result) in &self.scenarios {
            for &kind in policies {
                let run = kind.select(result);
                for rec in &run.trace {
                    let d = &rec.draw;
                    let dec = &rec.decision;
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{:e},{:e},{:e},{:e},{},{},{},{:e}",
                        point.curve,
                        axis_value(sweep_axis, point.sweep_value),
                        run.policy.name(),
                        rec.slot_index,
                        d.x,
                        d.y,
                        d.g,
                        d.z,
                        dec.alpha,
                        u8::from(dec.outage),
                        dec.rate,
                        dec.tx_power,
                    );
                }
            }
        }
        out
    }
}

/// Runs every (curve, sweep value) point of the plan. The penalty is
/// recalibrated at every point.
pub fn evaluate_plan(plan: &ExperimentPlan) -> Result<PlanOutput> {
    let preset = plan.preset_name();
    let mut rows = Vec::new();
    let mut scenarios = Vec::new();
    for point in plan.points() {
        let result = run_scenario_with(&point.params, plan.calibration, plan.trace)?;
        for &kind in &plan.policies {
            let run = kind.select(&result);
            rows.push(CsvRow {
                preset,
                sweep_axis: plan.sweep_axis,
                point,
                policy: kind,
                lambda: match kind {
                    PolicyKind::Optimal => Some(result.calibration.lambda),
                    PolicyKind::Unconstrained => Some(0.0),
                    PolicyKind::Fixed => None,
                },
                avg_rate: run.metrics.avg_rate,
                p_he_dbm: watts_to_dbm(run.metrics.p_he),
                outage_fraction: run.metrics.outage_fraction,
            });
        }
        scenarios.push((point, result));
    }
    Ok(PlanOutput { rows, scenarios })
}

pub fn trace_path(output: &Path) -> PathBuf {
    let mut name = output
        .file_stem()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".trace.csv");
    output.with_file_name(name)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

pub fn write_summary<W: Write>(
    plan: &ExperimentPlan,
    output: &PlanOutput,
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(
        w,
        "preset {} | sweep {} | {} slots ({} training), seed {}",
        plan.preset_name(),
        plan.sweep_axis.name(),
        plan.base.m_slots,
        plan.base.m_train,
        plan.base.seed
    )?;
    let mut last_curve = None;
    for row in &output.rows {
        let p = &row.point.params;
        if last_curve != Some(row.point.curve) {
            last_curve = Some(row.point.curve);
            writeln!(
                w,
                "\ncurve {}: mu_x={:e} mu_y={:e} mu_g={:e} mu_z={:e}",
                row.point.curve, p.mu_x, p.mu_y, p.mu_g, p.mu_z
            )?;
            writeln!(
                w,
                "{:>14} {:>14} {:>12} {:>14} {:>12} {:>10}",
                plan.sweep_axis.name(),
                "policy",
                "lambda",
                "rate[b/s/Hz]",
                "P_HE[dBm]",
                "outage"
            )?;
        }
        let policy = row.policy.to_possible_value().expect("no skipped variants");
        writeln!(
            w,
            "{:>14} {:>14} {:>12} {:>14.6e} {:>12.3} {:>10.4}",
            axis_label(plan.sweep_axis, row.point.sweep_value),
            policy.get_name(),
            row.lambda
                .map_or_else(|| "-".to_string(), |l| format!("{l:.4e}")),
            row.avg_rate,
            row.p_he_dbm,
            row.outage_fraction
        )?;
    }
    Ok(())
}

/// Evaluates the plan, writes the CSV (and trace when requested) and prints
/// a summary to `summary`.
pub fn run_plan<W: Write>(plan: &ExperimentPlan, summary: &mut W) -> Result<PlanOutput> {
    let output = evaluate_plan(plan)?;
    write_file(&plan.output_path, &output.csv())?;
    if plan.trace > 0 {
        write_file(
            &trace_path(&plan.output_path),
            &output.trace_csv(plan.sweep_axis, &plan.policies),
        )?;
    }
    let stdout_err = |source| Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    write_summary(plan, &output, summary).map_err(stdout_err)?;
    writeln!(summary, "\nwrote {}", plan.output_path.display()).map_err(stdout_err)?;
    Ok(output)
}
