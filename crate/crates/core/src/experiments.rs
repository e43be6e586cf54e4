//! Named, config-driven numerical studies. Each study writes CSV tables,
//! field snapshots and a `manifest.txt` into its output directory.
//!
//! Every study has a complete default parameter set; [`ExperimentSpec::set`]
//! overrides single keys. Independent legs (one ground state or one
//! evolution each) fan out through [`Execution`]; files are written after the
//! legs are collected, in a fixed order, so reruns are byte-identical.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use crate::diagnostics::{self, StabilityReference, TimeSeriesRecord};
use crate::dynamics::{evolve_with, EvolveConfig, ModelParams};
use crate::error::{Error, Result};
use crate::field::{ComplexField, RealField};
use crate::grid::Grid;
use crate::groundstate::{ngf_minimize, Constraint, GroundStateResult, NgfConfig};
use crate::io::{self, fmt_sig17, Manifest, SnapshotMeta};
use crate::parallel::Execution;
use crate::potential::Potential;
use crate::spectral::Spectral;

pub const GROUNDSTATE_HEADER: &str =
    "s,sigma,c,omega,lambda,energy_J,linf,sigma_norm,l2_dist_ref,iterations,converged";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentId {
    GroundStateBasic,
    SSweep,
    L2DistanceToRef,
    EnergyVsS,
    LambdaVsC,
    NonSymmetricPotential,
    PerturbationStability,
    StabilityVsS,
    CriticalCase,
    PhaseModulation,
    BlowUp,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 11] = [
        ExperimentId::GroundStateBasic,
        ExperimentId::SSweep,
        ExperimentId::L2DistanceToRef,
        ExperimentId::EnergyVsS,
        ExperimentId::LambdaVsC,
        ExperimentId::NonSymmetricPotential,
        ExperimentId::PerturbationStability,
        ExperimentId::StabilityVsS,
        ExperimentId::CriticalCase,
        ExperimentId::PhaseModulation,
        ExperimentId::BlowUp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::GroundStateBasic => "GroundStateBasic",
            ExperimentId::SSweep => "SSweep",
            ExperimentId::L2DistanceToRef => "L2DistanceToRef",
            ExperimentId::EnergyVsS => "EnergyVsS",
            ExperimentId::LambdaVsC => "LambdaVsC",
            ExperimentId::NonSymmetricPotential => "NonSymmetricPotential",
            ExperimentId::PerturbationStability => "PerturbationStability",
            ExperimentId::StabilityVsS => "StabilityVsS",
            ExperimentId::CriticalCase => "CriticalCase",
            ExperimentId::PhaseModulation => "PhaseModulation",
            ExperimentId::BlowUp => "BlowUp",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .iter()
            .copied()
            .find(|id| id.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<_> = ExperimentId::ALL.iter().map(|i| i.name()).collect();
                Error::invalid(format!("unknown experiment {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Scalar(f64),
    List(Vec<f64>),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Scalar(v) => write!(f, "{v}"),
            ParamValue::List(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

impl FromStr for ParamValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("not a number: {t:?}")))
        };
        let trimmed = s.trim().trim_start_matches('[').trim_end_matches(']');
        if trimmed.contains(',') {
            Ok(ParamValue::List(trimmed.split(',').map(parse).collect::<Result<_>>()?))
        } else {
            Ok(ParamValue::Scalar(parse(trimmed)?))
        }
    }
}

fn arange(start: f64, step: f64, count: usize) -> Vec<f64> {
    // round to 1e-12 so list entries print cleanly
    (0..count)
        .map(|i| ((start + step * i as f64) * 1e12).round() / 1e12)
        .collect()
}

/// A study plus its parameters and output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub params: BTreeMap<String, ParamValue>,
    pub out_dir: PathBuf,
    pub execution: Execution,
}

impl ExperimentSpec {
    /// Spec with the full default parameter set for `id`.
    pub fn new(id: ExperimentId, out_dir: impl Into<PathBuf>) -> Self {
        use ParamValue::{List, Scalar};
        let mut p: BTreeMap<String, ParamValue> = BTreeMap::new();
        let mut put = |k: &str, v: ParamValue| {
            p.insert(k.to_string(), v);
        };
        put("L", Scalar(10.0));
        put("J", Scalar(1024.0));
        put("tau", Scalar(1e-3));
        put("ngf_tau", Scalar(0.01));
        put("tol", Scalar(1e-8));
        put("max_iters", Scalar(1e5));
        put("sigma", Scalar(1.0));
        put("c", Scalar(1.0));
        put("a", Scalar(0.0));
        put("checkpoint_every", Scalar(100.0));
        put("blowup_growth", Scalar(4.0));

        let s_grid = arange(0.55, 0.05, 10);
        match id {
            ExperimentId::GroundStateBasic => {
                put("s", Scalar(0.8));
                put("t_end", Scalar(10.0));
                put("probe_every", Scalar(10.0));
                put("snapshot_every", Scalar(1000.0));
            }
            ExperimentId::SSweep | ExperimentId::L2DistanceToRef | ExperimentId::EnergyVsS => {
                put("s", List(s_grid));
                put("ref_s", Scalar(1.0));
                put("sigma_norm_order", Scalar(1.0));
            }
            ExperimentId::LambdaVsC => {
                put("s", Scalar(0.8));
                put("sigma", List(vec![0.6, 1.0]));
                put("c", List(vec![1.0, 0.5, 0.2, 0.1, 0.05]));
                put("sigma_norm_order", Scalar(1.0));
            }
            ExperimentId::NonSymmetricPotential => {
                put("s", Scalar(0.8));
                put("a", List(vec![1.0, 5.0]));
                put("sigma_norm_order", Scalar(1.0));
            }
            ExperimentId::PerturbationStability => {
                put("s", Scalar(0.8));
                put("e", List(vec![0.05, 0.2, -0.1]));
                put("t_end", Scalar(20.0));
                put("snapshot_every", Scalar(1000.0));
            }
            ExperimentId::StabilityVsS => {
                put("s", List(vec![0.6, 0.8]));
                put("perturb", Scalar(0.9));
                put("t_end", Scalar(10.0));
                put("d_s", List(arange(0.51, 0.0, 1).into_iter().chain(arange(0.55, 0.05, 10)).collect()));
                put("d_time", Scalar(1.0));
            }
            ExperimentId::CriticalCase => {
                put("s", Scalar(0.5));
                put("omega", Scalar(-0.5));
                put("t_end", Scalar(10.0));
                put("blowup_scale", Scalar(2.0));
                put("probe_every", Scalar(10.0));
                put("snapshot_every", Scalar(1000.0));
            }
            ExperimentId::PhaseModulation => {
                put("s", Scalar(0.8));
                put("k", List(vec![1.0, 20.0]));
                put("t_end", Scalar(10.0));
                put("probe_every", Scalar(10.0));
                put("snapshot_every", Scalar(500.0));
            }
            ExperimentId::BlowUp => {
                put("s", Scalar(0.5));
                put("omega", Scalar(-0.5));
                put("t_end", Scalar(10.0));
                put("blowup_scale", Scalar(2.0));
                put("snapshot_every", Scalar(250.0));
            }
        }
        ExperimentSpec {
            id,
            params: p,
            out_dir: out_dir.into(),
            execution: Execution::default(),
        }
    }

    /// Switches to the published resolution (`J = 5000`).
    pub fn paper_scale(mut self) -> Self {
        self.params.insert("J".into(), ParamValue::Scalar(5000.0));
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// Overrides a known parameter.
    pub fn set(&mut self, key: &str, value: ParamValue) -> Result<()> {
        match self.params.get_mut(key) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => {
                let keys: Vec<_> = self.params.keys().cloned().collect();
                Err(Error::invalid(format!(
                    "{} has no parameter {key:?}; known: {}",
                    self.id,
                    keys.join(", ")
                )))
            }
        }
    }

    pub fn scalar(&self, key: &str) -> Result<f64> {
        match self.params.get(key) {
            Some(ParamValue::Scalar(v)) => Ok(*v),
            Some(ParamValue::List(vs)) if vs.len() == 1 => Ok(vs[0]),
            Some(ParamValue::List(_)) => Err(Error::invalid(format!("{key} must be a single value"))),
            None => Err(Error::invalid(format!("missing parameter {key}"))),
        }
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        match self.params.get(key) {
            Some(ParamValue::Scalar(v)) => Ok(vec![*v]),
            Some(ParamValue::List(vs)) if !vs.is_empty() => Ok(vs.clone()),
            Some(ParamValue::List(_)) => Err(Error::invalid(format!("{key} is an empty list"))),
            None => Err(Error::invalid(format!("missing parameter {key}"))),
        }
    }

    fn count(&self, key: &str) -> Result<usize> {
        let v = self.scalar(key)?;
        if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
            return Err(Error::invalid(format!("{key} must be a nonnegative integer, got {v}")));
        }
        Ok(v as usize)
    }

    fn grid(&self) -> Result<Grid> {
        Grid::new(self.scalar("L")?, self.count("J")?)
    }

    fn ngf(&self, constraint: Constraint) -> Result<NgfConfig> {
        let mut cfg = NgfConfig::new(constraint);
        cfg.tau = self.scalar("ngf_tau")?;
        cfg.tol = self.scalar("tol")?;
        cfg.max_iters = self.count("max_iters")?;
        Ok(cfg)
    }

    fn evolve_cfg(&self) -> Result<EvolveConfig> {
        let growth = self.scalar("blowup_growth")?;
        Ok(EvolveConfig {
            tau: self.scalar("tau")?,
            t_end: self.scalar("t_end")?,
            checkpoint_every: self.count("checkpoint_every")?,
            blowup_growth: if growth > 0.0 { Some(growth) } else { None },
            ..EvolveConfig::default()
        })
    }

    fn potential(&self, a: f64) -> Potential {
        if a == 0.0 {
            Potential::Harmonic
        } else {
            Potential::HarmonicPlusSine { amplitude: a }
        }
    }

    fn manifest(&self) -> Manifest {
        let mut m = Manifest::new();
        m.push("experiment", self.id);
        m.push("execution", if self.execution.is_parallel() { "parallel" } else { "sequential" });
        for (k, v) in &self.params {
            m.push(k.clone(), v);
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Manifest,
    Table,
    TimeSeries,
    Snapshot,
    Sidecar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub path: PathBuf,
    pub kind: OutputKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LegStatus {
    Ok,
    NotConverged,
    SolverStalled(String),
    NonpositiveMultiplier(f64),
    BlowUp { t: f64 },
    Failed(String),
}

impl fmt::Display for LegStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LegStatus::Ok => f.write_str("ok"),
            LegStatus::NotConverged => f.write_str("not_converged"),
            LegStatus::SolverStalled(r) => write!(f, "solver_stalled ({r})"),
            LegStatus::NonpositiveMultiplier(l) => write!(f, "nonpositive_multiplier ({l})"),
            LegStatus::BlowUp { t } => write!(f, "blowup t={t}"),
            LegStatus::Failed(r) => write!(f, "failed ({r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegReport {
    pub name: String,
    /// Parameter tuple of the leg, rendered `key=value` pairs.
    pub params: String,
    pub status: LegStatus,
}

/// One row of the ground-state table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateRow {
    pub s: f64,
    pub sigma: f64,
    pub c: f64,
    pub omega: Option<f64>,
    pub lambda: f64,
    pub energy_j: f64,
    pub linf: f64,
    pub sigma_norm: f64,
    pub l2_dist_ref: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl GroundStateRow {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_sig17).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.s,
            self.sigma,
            self.c,
            self.omega.map(|o| o.to_string()).unwrap_or_default(),
            fmt_sig17(self.lambda),
            fmt_sig17(self.energy_j),
            fmt_sig17(self.linf),
            fmt_sig17(self.sigma_norm),
            opt(self.l2_dist_ref),
            self.iterations,
            self.converged
        )
    }
}

/// A completed evolution leg.
#[derive(Debug, Clone)]
pub struct EvolutionLeg {
    pub name: String,
    pub records: Vec<TimeSeriesRecord>,
    pub status: LegStatus,
    /// `(t, psi(0, t))` samples every `probe_every` steps.
    pub origin: Vec<(f64, Complex64)>,
    /// `(t, x of max |psi|, max |psi|)` samples every `probe_every` steps.
    pub peak: Vec<(f64, f64, f64)>,
    pub snapshots: Vec<(f64, ComplexField)>,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub outputs: Vec<OutputFile>,
    pub ground_states: Vec<GroundStateRow>,
    pub legs: Vec<LegReport>,
    pub evolutions: Vec<EvolutionLeg>,
    /// Extra scalar tables keyed by file stem (for example `d_at_t`).
    pub tables: BTreeMap<String, Vec<Vec<f64>>>,
}

/// A ground state and the standing wave built from it.
#[derive(Debug, Clone)]
pub struct StandingWave {
    pub result: GroundStateResult,
    /// Profile `u` of the standing wave `e^{-i lambda t} u`.
    pub profile: RealField,
    pub frequency: f64,
}

impl StandingWave {
    pub fn reference(&self) -> StabilityReference {
        StabilityReference::new(self.profile.clone(), self.frequency)
    }
}

/// Picks the constraint the way the studies do: mass for `sigma < 2s`,
/// otherwise the Lp problem at `omega`.
pub fn default_constraint(params: &ModelParams, c: f64, omega: f64) -> Constraint {
    if params.is_mass_subcritical() {
        Constraint::MassL2 { c }
    } else {
        Constraint::LpNorm { c, omega }
    }
}

/// Runs the flow and rescales Lp minimizers into standing waves.
pub fn standing_wave(grid: &Grid, params: &ModelParams, cfg: &NgfConfig) -> Result<StandingWave> {
    let result = ngf_minimize(grid, params, cfg)?;
    let profile = result.standing_wave()?;
    let frequency = result.standing_wave_frequency();
    Ok(StandingWave {
        result,
        profile,
        frequency,
    })
}

fn status_of(err: &Error) -> LegStatus {
    match err {
        Error::NotConverged { .. } => LegStatus::NotConverged,
        Error::SolverStalled { reason, .. } => LegStatus::SolverStalled(reason.clone()),
        Error::NonpositiveMultiplier(l) => LegStatus::NonpositiveMultiplier(*l),
        Error::BlowUpDetected(b) => LegStatus::BlowUp { t: b.t },
        other => LegStatus::Failed(other.to_string()),
    }
}

/// Ground state leg that survives non-convergence with its best iterate.
fn ground_state_leg(grid: &Grid, params: &ModelParams, cfg: &NgfConfig) -> (Option<StandingWave>, LegStatus) {
    match standing_wave(grid, params, cfg) {
        Ok(w) => (Some(w), LegStatus::Ok),
        Err(Error::NotConverged { best }) => {
            let best = *best;
            match best.standing_wave() {
                Ok(profile) => {
                    let frequency = best.standing_wave_frequency();
                    (
                        Some(StandingWave {
                            result: best,
                            profile,
                            frequency,
                        }),
                        LegStatus::NotConverged,
                    )
                }
                Err(e) => (None, status_of(&e)),
            }
        }
        Err(e) => {
            let status = status_of(&e);
            (None, status)
        }
    }
}

fn row_for(
    spectral: &Spectral,
    wave: &StandingWave,
    c: f64,
    norm_order: f64,
    reference: Option<&RealField>,
) -> Result<GroundStateRow> {
    let r = &wave.result;
    let l2_dist_ref = reference.map(|u_ref| diagnostics::discrete_mass(&r.u.sub(u_ref)));
    Ok(GroundStateRow {
        s: r.params.s,
        sigma: r.params.sigma,
        c,
        omega: r.constraint.omega(),
        lambda: r.lambda,
        energy_j: r.energy_j,
        linf: r.u.linf(),
        sigma_norm: diagnostics::sigma_norm(spectral, &r.u, norm_order)?,
        l2_dist_ref,
        iterations: r.iterations,
        converged: r.converged,
    })
}

struct EvolutionPlan {
    name: String,
    params: ModelParams,
    psi0: ComplexField,
    cfg: EvolveConfig,
    reference: Option<StabilityReference>,
    probe_every: usize,
    snapshot_every: usize,
}

fn run_evolution(plan: &EvolutionPlan) -> EvolutionLeg {
    let grid = *plan.psi0.grid();
    let origin_node = grid.nearest_node(0.0);
    let mut origin = Vec::new();
    let mut peak = Vec::new();
    let mut snapshots = Vec::new();
    let outcome = evolve_with(&plan.psi0, &plan.params, &plan.cfg, plan.reference.as_ref(), |n, t, psi| {
        if plan.probe_every > 0 && n % plan.probe_every == 0 {
            origin.push((t, psi.values()[origin_node]));
            let (j, m) = psi
                .values()
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (j, z)| if z.norm() > acc.1 { (j, z.norm()) } else { acc });
            peak.push((t, grid.node(j), m));
        }
        if plan.snapshot_every > 0 && n % plan.snapshot_every == 0 {
            snapshots.push((t, psi.clone()));
        }
    });
    let (records, status) = match outcome {
        Ok(ev) => (ev.records, LegStatus::Ok),
        Err(Error::BlowUpDetected(b)) => {
            snapshots.push((b.t, b.last.clone()));
            let t = b.t;
            (b.records, LegStatus::BlowUp { t })
        }
        Err(e) => (Vec::new(), status_of(&e)),
    };
    EvolutionLeg {
        name: plan.name.clone(),
        records,
        status,
        origin,
        peak,
        snapshots,
    }
}

struct Writer<'a> {
    dir: &'a Path,
    outputs: Vec<OutputFile>,
}

impl<'a> Writer<'a> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn table(&mut self, name: &str, header: &str, rows: &[String]) -> Result<()> {
        let path = self.path(name);
        io::write_csv(&path, header, rows)?;
        self.outputs.push(OutputFile { path, kind: OutputKind::Table });
        Ok(())
    }

    fn ground_states(&mut self, name: &str, rows: &[GroundStateRow]) -> Result<()> {
        let lines: Vec<String> = rows.iter().map(|r| r.to_csv()).collect();
        self.table(name, GROUNDSTATE_HEADER, &lines)
    }

    fn profile(&mut self, stem: &str, wave: &StandingWave) -> Result<()> {
        let meta = SnapshotMeta {
            s: wave.result.params.s,
            sigma: wave.result.params.sigma,
            t: 0.0,
        };
        let path = self.path(&format!("{stem}.txt"));
        io::write_snapshot(&path, &wave.profile.to_complex(), &meta)?;
        self.outputs.push(OutputFile { path, kind: OutputKind::Snapshot });
        let path = self.path(&format!("{stem}.sidecar.csv"));
        io::write_sidecar(&path, &wave.result)?;
        self.outputs.push(OutputFile { path, kind: OutputKind::Sidecar });
        Ok(())
    }

    fn evolution(&mut self, leg: &EvolutionLeg, params: &ModelParams) -> Result<()> {
        let path = self.path(&format!("{}.timeseries.csv", leg.name));
        io::write_timeseries(&path, &leg.records)?;
        self.outputs.push(OutputFile { path, kind: OutputKind::TimeSeries });
        if !leg.origin.is_empty() {
            let rows: Vec<String> = leg
                .origin
                .iter()
                .map(|(t, z)| format!("{},{},{},{}", fmt_sig17(*t), fmt_sig17(z.re), fmt_sig17(z.im), fmt_sig17(z.norm())))
                .collect();
            self.table(&format!("{}.origin.csv", leg.name), "t,re,im,abs", &rows)?;
            let rows: Vec<String> = leg
                .peak
                .iter()
                .map(|(t, x, m)| format!("{},{},{}", fmt_sig17(*t), fmt_sig17(*x), fmt_sig17(*m)))
                .collect();
            self.table(&format!("{}.peak.csv", leg.name), "t,x_peak,linf", &rows)?;
        }
        for (i, (t, psi)) in leg.snapshots.iter().enumerate() {
            let meta = SnapshotMeta { s: params.s, sigma: params.sigma, t: *t };
            let path = self.path(&format!("{}.snap{:04}.txt", leg.name, i));
            io::write_snapshot(&path, psi, &meta)?;
            self.outputs.push(OutputFile { path, kind: OutputKind::Snapshot });
        }
        Ok(())
    }
}

fn fmt_tag(v: f64) -> String {
    format!("{v}")
}

/// Runs one study and writes its outputs under `spec.out_dir`.
///
/// Failed legs are reported in [`ExperimentReport::legs`] and the manifest;
/// they never abort the rest of the sweep.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    std::fs::create_dir_all(&spec.out_dir)?;
    let manifest_path = spec.out_dir.join("manifest.txt");
    let mut manifest = spec.manifest();
    manifest.write(&manifest_path)?;

    let mut report = ExperimentReport::default();
    let mut writer = Writer {
        dir: &spec.out_dir,
        outputs: vec![OutputFile {
            path: manifest_path.clone(),
            kind: OutputKind::Manifest,
        }],
    };

    match spec.id {
        ExperimentId::GroundStateBasic => ground_state_basic(spec, &mut writer, &mut report)?,
        ExperimentId::SSweep | ExperimentId::L2DistanceToRef | ExperimentId::EnergyVsS => {
            s_sweep(spec, &mut writer, &mut report)?
        }
        ExperimentId::LambdaVsC => lambda_vs_c(spec, &mut writer, &mut report)?,
        ExperimentId::NonSymmetricPotential => non_symmetric(spec, &mut writer, &mut report)?,
        ExperimentId::PerturbationStability => perturbation(spec, &mut writer, &mut report)?,
        ExperimentId::StabilityVsS => stability_vs_s(spec, &mut writer, &mut report)?,
        ExperimentId::CriticalCase => critical(spec, &mut writer, &mut report, true)?,
        ExperimentId::BlowUp => critical(spec, &mut writer, &mut report, false)?,
        ExperimentId::PhaseModulation => phase_modulation(spec, &mut writer, &mut report)?,
    }

    for leg in &report.legs {
        manifest.push(format!("leg.{}", leg.name), format!("{} [{}]", leg.status, leg.params));
    }
    manifest.write(&manifest_path)?;
    report.outputs = writer.outputs;
    Ok(report)
}

fn leg_params(params: &ModelParams, c: f64, omega: Option<f64>, grid: &Grid, tau: f64) -> String {
    format!(
        "s={} sigma={} c={} omega={} a={} L={} J={} tau={}",
        params.s,
        params.sigma,
        c,
        omega.map(|o| o.to_string()).unwrap_or_else(|| "-".into()),
        params.potential.amplitude(),
        grid.half_width(),
        grid.len(),
        tau
    )
}

fn ground_state_basic(spec: &ExperimentSpec, w: &mut Writer, report: &mut ExperimentReport) -> Result<()> {
    let grid = spec.grid()?;
    let spectral = Spectral::new(&grid);
    let c = spec.scalar("c")?;
    let params = ModelParams::new(spec.scalar("s")?, spec.scalar("sigma")?, spec.potential(spec.scalar("a")?))?;
    let ngf = spec.ngf(default_constraint(&params, c, -0.5))?;
    let (wave, status) = ground_state_leg(&grid, &params, &ngf);
    report.legs.push(LegReport {
        name: "groundstate".into(),
        params: leg_params(&params, c, ngf.constraint.omega(), &grid, ngf.tau),
        status,
    });
    let Some(wave) = wave else { return Ok(()) };
    let row = row_for(&spectral, &wave, c, 1.0, None)?;
    w.ground_states("groundstate.csv", &[row])?;
    w.profile("u0", &wave)?;
    report.ground_states.push(row);

    let plan = EvolutionPlan {
        name: "standing".into(),
        params,
        psi0: wave.profile.to_complex(),
        cfg: spec.evolve_cfg()?,
        reference: Some(wave.reference()),
        probe_every: spec.count("probe_every")?,
        snapshot_every: spec.count("snapshot_every")?,
    };
    let leg = run_evolution(&plan);
    w.evolution(&leg, &params)?;
    report.legs.push(LegReport {
        name: leg.name.clone(),
        params: leg_params(&params, c, None, &grid, plan.cfg.tau),
        status: leg.status.clone(),
    });
    report.evolutions.push(leg);
    Ok(())
}

fn s_sweep(spec: &ExperimentSpec, w: &mut Writer, report: &mut ExperimentReport) -> Result<()> {
    let grid = spec.grid()?;
    let spectral = Spectral::new(&grid);
    let c = spec.scalar("c")?;
    let sigma = spec.scalar("sigma")?;
    let potential = spec.potential(spec.scalar("a")?);
    let ref_s = spec.scalar("ref_s")?;
    let norm_order = spec.scalar("sigma_norm_order")?;
    let mut orders = spec.list("s")?;
    let has_ref = orders.contains(&ref_s);
    if !has_ref {
        orders.push(ref_s);
    }
    let legs = spec.execution.map(&orders, |&s| -> Result<_> {
        let params = ModelParams::new(s, sigma, potential)?;
        let ngf = spec.ngf(Constraint::MassL2 { c })?;
        let (wave, status) = ground_state_leg(&grid, &params, &ngf);
        Ok((params, ngf.tau, wave, status))
    });
    let legs: Vec<_> = legs.into_iter().collect::<Result<_>>()?;
    let reference = legs
        .iter()
        .find(|(p, ..)| p.s == ref_s)
        .and_then(|(_, _, wave, _)| wave.as_ref().map(|w| w.result.u.clone()));

    let mut rows = Vec::new();
    let mut energy_rows = Vec::new();
    for (params, tau, wave, status) in &legs {
        report.legs.push(LegReport {
            name: format!("s={}", params.s),
            params: leg_params(params, c, None, &grid, *tau),
            status: status.clone(),
        });
        let Some(wave) = wave else { continue };
        if !has_ref && params.s == ref_s {
            continue;
        }
        let row = row_for(&spectral, wave, c, norm_order, reference.as_ref())?;
        w.profile(&format!("profile_s{}", fmt_tag(params.s)), wave)?;
        energy_rows.push(format!("{},{},{},{}", params.s, sigma, c, fmt_sig17(2.0 * row.energy_j)));
        rows.push(row);
    }
    w.ground_states("groundstate.csv", &rows)?;
    if spec.id == ExperimentId::EnergyVsS {
        w.table("energy_vs_s.csv", "s,sigma,c,E", &energy_rows)?;
    }
    report.ground_states = rows;
    Ok(())
}

fn lambda_vs_c(spec: &ExperimentSpec, w: &mut Writer, report: &mut ExperimentReport) -> Result<()> {
    let grid = spec.grid()?;
    let spectral = Spectral::new(&grid);
    let s = spec.scalar("s")?;
    let potential = spec.potential(spec.scalar("a")?);
    let norm_order = spec.scalar("sigma_norm_order")?;
    let points: Vec<(f64, f64)> = spec
        .list("sigma")?
        .into_iter()
        .flat_map(|sig| spec.list("c").unwrap_or_default().into_iter().map(move |c| (sig, c)))
        .collect();
    let legs = spec.execution.map(&points, |&(sigma, c)| -> Result<_> {
        let params = ModelParams::new(s, sigma, potential)?;
        let ngf = spec.ngf(Constraint::MassL2 { c })?;
        let (wave, status) = ground_state_leg(&grid, &params, &ngf);
        Ok((params, c, ngf.tau, wave, status))
    });
    let mut rows = Vec::new();
    for leg in legs {
        let (params, c, tau, wave, status) = leg?;
        report.legs.push(LegReport {
            name: format!("sigma={},c={}", params.sigma, c),
            params: leg_params(&params, c, None, &grid, tau),
            status,
        });
        if let Some(wave) = wave {
            rows.push(row_for(&spectral, &wave, c, norm_order, None)?);
        }
    }
    w.ground_states("groundstate.csv", &rows)?;
    report.ground_states = rows;
    Ok(())
}

fn non_symmetric(spec: &ExperimentSpec, w: &mut Writer, report: &mut ExperimentReport) -> Result<()> {
    let grid = spec.grid()?;
    let spectral = Spectral::new(&grid);
    let s = spec.scalar("s")?;
    let sigma = spec.scalar("sigma")?;
    let c = spec.scalar("c")?;
    let norm_order = spec.scalar("sigma_norm_order")?;
    let amplitudes = spec.list("a")?;
    let legs = spec.execution.map(&amplitudes, |&a| -> Result<_> {
        let params = ModelParams::new(s, sigma, spec.potential(a))?;
        let ngf = spec.ngf(Constraint::MassL2 { c })?;
        let (wave, status) = ground_state_leg(&grid, &params, &ngf);
        Ok((a, params, ngf.tau, wave, status))
    });
    let mut rows = Vec::new();
    for leg in legs {
        let (a, params, tau, wave, status) = leg?;
        report.legs.push(LegReport {
            name: format!("a={a}"),
            params: leg_params(&params, c, None, &grid, tau),
            status,
        });
        if let Some(wave) = wave {
            w.profile(&format!("profile_a{}", fmt_tag(a)), &wave)?;
            rows.push(row_for(&spectral, &wave, c, norm_order, None)?);
        }
    }
    w.ground_states("groundstate.csv", &rows)?;
    report.ground_states = rows;
    Ok(())
}

/// Ground state for the evolution studies, written as `u0` plus a table row.
fn base_state(
    spec: &ExperimentSpec,
    s: f64,
    w: &mut Writer,
    report: &mut ExperimentReport,
    stem: &str,
) -> Result<Option<(ModelParams, StandingWave)>> {
    let grid = spec.grid()?;
    let c = spec.scalar("c")?;
    let omega = spec.scalar("omega").unwrap_or(-0.5);
    let params = ModelParams::new(s, spec.scalar("sigma")?, spec.potential(spec.scalar("a")?))?;
    let ngf = spec.ngf(default_constraint(&params, c, omega))?;
    let (wave, status) = ground_state_leg(&grid, &params, &ngf);
    report.legs.push(LegReport {
        name: stem.to_string(),
        params: leg_params(&params, c, ngf.constraint.omega(), &grid, ngf.tau),
        status,
    });
    let Some(wave) = wave else { return Ok(None) };
    let row = row_for(&Spectral::new(&grid), &wave, c, 1.0, None)?;
    report.ground_states.push(row);
    w.profile(stem, &wave)?;
    Ok(Some((params, wave)))
}

fn run_plans(spec: &ExperimentSpec, plans: Vec<EvolutionPlan>, w: &mut Writer, report: &mut ExperimentReport, c: f64) -> Result<()> {
    let legs = spec.execution.map(&plans, run_evolution);
    for (plan, leg) in plans.iter().zip(legs) {
        w.evolution(&leg, &plan.params)?;
        report.legs.push(LegReport {
            name: leg.name.clone(),
            params: leg_params(&plan.params, c, None, plan.psi0.grid(), plan.cfg.tau),
            status: leg.status.clone(),
        });
        report.evolutions.push(leg);
    }
    Ok(())
}

fn perturbation(spec: &ExperimentSpec, w: &mut Writer, report: &mut ExperimentReport) -> Result<()> {
    let Some((params, wave)) = base_state(spec, spec.scalar("s")?, w, report, "u0")? else {
        return Ok(());
    };
    w.ground_states("groundstate.csv", &report.ground_states.clone())?;
    let cfg = spec.evolve_cfg()?;
    let snapshot_every = spec.count("snapshot_every")?;
    let plans = spec
        .list("e")?
        .into_iter()
        .map(|e| EvolutionPlan {
            name: format!("e{}", fmt_tag(e)),
            params,
            psi0: wave.profile.scale(1.0 + e).to_complex(),
            cfg,
            reference: Some(wave.reference()),
            probe_every: 0,
            snapshot_every,
        })
        .collect();
    run_plans(spec, plans, w, report, spec.scalar("c")?)
}

fn stability_vs_s(spec: &ExperimentSpec, w: &mut Writer, report: &mut ExperimentReport) -> Result<()> {
    let grid = spec.grid()?;
    let c = spec.scalar("c")?;
    let sigma = spec.scalar("sigma")?;
    let potential = spec.potential(spec.scalar("a")?);
    let perturb = spec.scalar("perturb")?;
    let d_time = spec.scalar("d_time")?;
    let curve_s = spec.list("s")?;
    let mut all_s = curve_s.clone();
    for s in spec.list("d_s")? {
        if !all_s.contains(&s) {
            all_s.push(s);
        }
    }
    let base_cfg = spec.evolve_cfg()?;

    // one leg per s: ground state, then evolution to t_end (curves) or d_time
    let legs = spec.execution.map(&all_s, |&s| -> Result<_> {
        let params = ModelParams::new(s, sigma, potential)?;
        let ngf = spec.ngf(Constraint::MassL2 { c })?;
        let (wave, status) = ground_state_leg(&grid, &params, &ngf);
        let Some(wave) = wave else { return Ok((params, ngf.tau, status, None)) };
        let t_end = if curve_s.contains(&s) { base_cfg.t_end.max(d_time) } else { d_time };
        let plan = EvolutionPlan {
            name: format!("s{}", fmt_tag(s)),
            params,
            psi0: wave.profile.scale(perturb).to_complex(),
            cfg: EvolveConfig { t_end, ..base_cfg },
            reference: Some(wave.reference()),
            probe_every: 0,
            snapshot_every: 0,
        };
        let leg = run_evolution(&plan);
        let spectral = Spectral::new(&grid);
        let row = row_for(&spectral, &wave, c, 1.0, None)?;
        Ok((params, ngf.tau, status, Some((leg, row))))
    });

    let mut d_rows = Vec::new();
    let mut d_table = Vec::new();
    let mut gs_rows = Vec::new();
    for leg in legs {
        let (params, tau, status, evo) = leg?;
        report.legs.push(LegReport {
            name: format!("groundstate s={}", params.s),
            params: leg_params(&params, c, None, &grid, tau),
            status,
        });
        let Some((leg, row)) = evo else { continue };
        gs_rows.push(row);
        report.legs.push(LegReport {
            name: leg.name.clone(),
            params: leg_params(&params, c, None, &grid, base_cfg.tau),
            status: leg.status.clone(),
        });
        if let Some(rec) = leg.records.iter().find(|r| (r.t - d_time).abs() < 0.5 * base_cfg.tau) {
            let d = rec.stability_d.unwrap_or(f64::NAN);
            d_rows.push(format!("{},{},{},{},{}", params.s, sigma, c, fmt_sig17(rec.t), fmt_sig17(d)));
            d_table.push(vec![params.s, rec.t, d]);
        }
        if curve_s.contains(&params.s) {
            w.evolution(&leg, &params)?;
            report.evolutions.push(leg);
        }
    }
    w.ground_states("groundstate.csv", &gs_rows)?;
    w.table("d_at_t.csv", "s,sigma,c,t,D", &d_rows)?;
    report.ground_states = gs_rows;
    report.tables.insert("d_at_t".into(), d_table);
    Ok(())
}

fn critical(spec: &ExperimentSpec, w: &mut Writer, report: &mut ExperimentReport, standing_leg: bool) -> Result<()> {
    let Some((params, wave)) = base_state(spec, spec.scalar("s")?, w, report, "u0")? else {
        return Ok(());
    };
    w.ground_states("groundstate.csv", &report.ground_states.clone())?;
    let cfg = spec.evolve_cfg()?;
    let probe_every = spec.count("probe_every").unwrap_or(0);
    let snapshot_every = spec.count("snapshot_every")?;
    let mut plans = Vec::new();
    if standing_leg {
        plans.push(EvolutionPlan {
            name: "standing".into(),
            params,
            psi0: wave.profile.to_complex(),
            cfg,
            reference: Some(wave.reference()),
            probe_every,
            snapshot_every,
        });
    }
    let scale = spec.scalar("blowup_scale")?;
    plans.push(EvolutionPlan {
        name: "blowup".into(),
        params,
        psi0: wave.profile.scale(scale).to_complex(),
        cfg,
        reference: None,
        probe_every,
        snapshot_every,
    });
    run_plans(spec, plans, w, report, spec.scalar("c")?)
}

fn phase_modulation(spec: &ExperimentSpec, w: &mut Writer, report: &mut ExperimentReport) -> Result<()> {
    let Some((params, wave)) = base_state(spec, spec.scalar("s")?, w, report, "u0")? else {
        return Ok(());
    };
    w.ground_states("groundstate.csv", &report.ground_states.clone())?;
    let cfg = spec.evolve_cfg()?;
    let probe_every = spec.count("probe_every")?;
    let snapshot_every = spec.count("snapshot_every")?;
    let plans = spec
        .list("k")?
        .into_iter()
        .map(|k| EvolutionPlan {
            name: format!("k{}", fmt_tag(k)),
            params,
            psi0: phase_modulated(&wave.profile, k),
            cfg,
            reference: None,
            probe_every,
            snapshot_every,
        })
        .collect();
    run_plans(spec, plans, w, report, spec.scalar("c")?)
}

/// `u(x) e^{i k x}`
pub fn phase_modulated(u: &RealField, k: f64) -> ComplexField {
    let g = *u.grid();
    ComplexField::new(
        g,
        u.values()
            .iter()
            .enumerate()
            .map(|(j, &a)| Complex64::from_polar(a, k * g.node(j)))
            .collect(),
    )
    .expect("same grid")
}
