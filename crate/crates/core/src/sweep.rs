//! Declarative parameter sweeps and the tables built from them.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adm::FullModel;
use crate::analytic::{co_closed_form, Branch};
use crate::basis::{Sector, Truncation};
use crate::effective::{EffectiveHamiltonian, EffectiveModel};
use crate::error::{Error, Result};
use crate::model::ParametricHamiltonian;
use crate::params::{ModelParams, Param, SpinLength};
use crate::qgeom::{ground_state_qgt, Convention, GroundStateGeometry, Method, QgtOptions};

/// Versioned first line of every CSV file.
pub const CSV_VERSION_LINE: &str = "# dicke-qgt sweep csv v1";

pub const CSV_COLUMNS: [&str; 18] = [
    "index",
    "g",
    "gamma",
    "eta",
    "j",
    "n_max",
    "model",
    "method",
    "branch",
    "G_omega_omega",
    "G_theta_theta",
    "ReQ_theta_omega",
    "F_theta_omega",
    "I_omega_omega",
    "energy",
    "gap",
    "converged",
    "note",
];

/// Default width of the window around `g = 1` dropped from finite-difference sweeps.
pub const FD_EXCLUSION: f64 = 5e-3;

/// Ground-state weight on the top two Fock levels above which a row is unconverged.
pub const TAIL_FLAG: f64 = 1e-8;

/// Relative change of `I_omega_omega` between cutoffs counted as converged.
pub const CONVERGENCE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelKind {
    Full,
    Effective(EffectiveModel),
    AutoCs,
    AutoCo,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::Effective(m) => m.label(),
            ModelKind::AutoCs => "auto_cs",
            ModelKind::AutoCo => "auto_co",
        }
    }

    /// Concrete effective model at coupling `g` (`None` for the full model).
    pub fn resolve(self, g: f64) -> Option<EffectiveModel> {
        match self {
            ModelKind::Full => None,
            ModelKind::Effective(m) => Some(m),
            ModelKind::AutoCs if g <= 1.0 => Some(EffectiveModel::CsNormal),
            ModelKind::AutoCs => Some(EffectiveModel::CsSuperradiant),
            ModelKind::AutoCo if g <= 1.0 => Some(EffectiveModel::CoNormal),
            ModelKind::AutoCo => Some(EffectiveModel::CoSuperradiant),
        }
    }

    pub fn is_two_mode(self) -> bool {
        matches!(self, ModelKind::AutoCs | ModelKind::Effective(EffectiveModel::CsNormal | EffectiveModel::CsSuperradiant))
    }

    pub fn is_one_mode(self) -> bool {
        !self.is_two_mode() && self != ModelKind::Full
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ModelKind::Full),
            "auto_cs" => Ok(ModelKind::AutoCs),
            "auto_co" => Ok(ModelKind::AutoCo),
            other => other.parse().map(ModelKind::Effective).map_err(|_| Error::InvalidSpec(format!("unknown model `{s}`"))),
        }
    }
}

impl TryFrom<String> for ModelKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModelKind> for String {
    fn from(m: ModelKind) -> String {
        m.label().to_string()
    }
}

/// Coordinate varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "g")]
    G,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "theta")]
    Theta,
    #[serde(rename = "omega")]
    Omega,
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g" => Ok(SweepParam::G),
            "gamma" => Ok(SweepParam::Gamma),
            "eta" => Ok(SweepParam::Eta),
            "theta" => Ok(SweepParam::Theta),
            "omega" => Ok(SweepParam::Omega),
            _ => Err(Error::InvalidSpec(format!("cannot sweep `{s}` (use g, gamma, eta, theta or omega)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Spacing {
    #[default]
    #[serde(rename = "linear")]
    Linear,
    #[serde(rename = "log")]
    Log,
}

impl FromStr for Spacing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            _ => Err(Error::InvalidSpec(format!("unknown spacing `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Grid {
    Range { start: f64, stop: f64, count: usize, spacing: Spacing },
    Values(Vec<f64>),
}

impl Grid {
    pub fn linear(start: f64, stop: f64, count: usize) -> Self {
        Grid::Range { start, stop, count, spacing: Spacing::Linear }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Grid::Range { start, stop, count, spacing } => {
                if *count < 2 {
                    return Err(Error::InvalidSpec(format!("grid needs at least 2 points, got {count}")));
                }
                if !start.is_finite() || !stop.is_finite() {
                    return Err(Error::InvalidSpec("grid bounds must be finite".into()));
                }
                if *spacing == Spacing::Log && (*start <= 0.0 || *stop <= 0.0) {
                    return Err(Error::InvalidSpec("log spacing needs positive bounds".into()));
                }
                Ok(())
            }
            Grid::Values(v) if v.is_empty() => Err(Error::InvalidSpec("empty value list".into())),
            Grid::Values(v) if v.iter().any(|x| x.is_nan()) => Err(Error::InvalidSpec("NaN in value list".into())),
            Grid::Values(_) => Ok(()),
        }
    }

    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range { start, stop, count, spacing } => {
                let n = *count;
                (0..n)
                    .map(|i| {
                        let t = i as f64 / (n - 1) as f64;
                        if i == n - 1 {
                            return *stop;
                        }
                        match spacing {
                            Spacing::Linear => start + t * (stop - start),
                            Spacing::Log => (start.ln() + t * (stop.ln() - start.ln())).exp(),
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Base point in dimensionless coordinates; the swept coordinate overrides one of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    pub g: f64,
    pub gamma: f64,
    pub eta: f64,
    pub omega: f64,
    pub theta: f64,
    pub j: f64,
}

impl Default for BasePoint {
    fn default() -> Self {
        BasePoint { g: 0.5, gamma: 2.0, eta: 1.0, omega: 1.0, theta: 0.0, j: 10.0 }
    }
}

impl BasePoint {
    pub fn with(mut self, which: SweepParam, value: f64) -> Self {
        match which {
            SweepParam::G => self.g = value,
            SweepParam::Gamma => self.gamma = value,
            SweepParam::Eta => self.eta = value,
            SweepParam::Theta => self.theta = value,
            SweepParam::Omega => self.omega = value,
        }
        self
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::from_dimensionless(self.g, self.gamma, self.eta, self.omega, self.theta, SpinLength::new(self.j)?)
    }
}

/// Fock cutoffs; `None` picks the per-model default (full 60, two-mode 40 x 40, one-mode 200).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub n_max: Option<usize>,
    pub n_b: Option<usize>,
    #[serde(default)]
    pub sector: Sector,
}

impl TruncationSpec {
    pub fn with_n_max(n_max: usize) -> Self {
        TruncationSpec { n_max: Some(n_max), ..Default::default() }
    }

    pub fn resolve(&self, kind: ModelKind, spin: SpinLength) -> Truncation {
        if kind == ModelKind::Full {
            Truncation::full_model(self.n_max.unwrap_or(60), spin, self.sector)
        } else if kind.is_two_mode() {
            let n_a = self.n_max.unwrap_or(40);
            Truncation::two_mode(n_a, self.n_b.unwrap_or(n_a), self.sector)
        } else {
            Truncation::one_mode(self.n_max.unwrap_or(200), self.sector)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub model: ModelKind,
    pub method: Method,
    pub param: SweepParam,
    pub grid: Grid,
    pub base: BasePoint,
    pub truncation: TruncationSpec,
    /// Ordered parameter subset of the tensor; must contain `omega` and `theta`.
    pub tensor: Vec<Param>,
    pub convention: Convention,
    /// Half-width of the window around `g = 1` skipped by the sweep.
    pub exclusion: f64,
    pub workers: usize,
}

impl SweepSpec {
    pub fn new(model: ModelKind, method: Method, param: SweepParam, grid: Grid, base: BasePoint) -> Self {
        let exclusion = if method == Method::FiniteDifference { FD_EXCLUSION } else { 0.0 };
        SweepSpec {
            model,
            method,
            param,
            grid,
            base,
            truncation: TruncationSpec::default(),
            tensor: vec![Param::Omega, Param::Theta],
            convention: Convention::FixedCouplings,
            exclusion,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !self.tensor.contains(&Param::Omega) || !self.tensor.contains(&Param::Theta) {
            return Err(Error::InvalidSpec("the tensor subset must contain omega and theta".into()));
        }
        let mut seen = self.tensor.clone();
        seen.sort_by_key(|p| p.label());
        seen.dedup();
        if seen.len() != self.tensor.len() {
            return Err(Error::InvalidSpec("repeated label in the tensor subset".into()));
        }
        if self.method == Method::Analytic && !self.model.is_one_mode() {
            return Err(Error::InvalidSpec(format!("method analytic is only available for one-mode models, not {}", self.model)));
        }
        if self.workers == 0 {
            return Err(Error::InvalidSpec("workers must be at least 1".into()));
        }
        if !(self.exclusion >= 0.0) {
            return Err(Error::InvalidSpec("exclusion must be non-negative".into()));
        }
        let stitched = matches!(self.model, ModelKind::AutoCs | ModelKind::AutoCo);
        if self.method == Method::FiniteDifference && stitched && self.exclusion == 0.0 {
            return Err(Error::InvalidSpec("finite differences on a stitched model need an exclusion window around g = 1".into()));
        }
        if let Some(first) = self.grid.points().first() {
            self.base.with(self.param, *first).params()?;
        }
        self.truncation.resolve(self.model, SpinLength::new(self.base.j)?).validate()?;
        Ok(())
    }

    /// Grid values that survive the exclusion window, with their grid index.
    pub fn active_points(&self) -> Result<Vec<(usize, BasePoint)>> {
        let mut out = Vec::new();
        for (i, x) in self.grid.points().into_iter().enumerate() {
            let base = self.base.with(self.param, x);
            let g = base.params()?.g();
            if (g - 1.0).abs() < self.exclusion {
                continue;
            }
            out.push((i, base));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub g: f64,
    pub gamma: f64,
    pub eta: f64,
    pub j: f64,
    pub n_max: usize,
    pub model: String,
    pub method: String,
    pub branch: String,
    #[serde(rename = "G_omega_omega")]
    pub g_omega_omega: f64,
    #[serde(rename = "G_theta_theta")]
    pub g_theta_theta: f64,
    #[serde(rename = "ReQ_theta_omega")]
    pub re_q_theta_omega: f64,
    #[serde(rename = "F_theta_omega")]
    pub f_theta_omega: f64,
    #[serde(rename = "I_omega_omega")]
    pub i_omega_omega: f64,
    pub energy: f64,
    pub gap: Option<f64>,
    pub converged: bool,
    pub note: String,
}

impl SweepRow {
    pub fn is_flagged(&self) -> bool {
        !self.converged
    }

    fn from_geometry(index: usize, head: RowHead, geo: Result<GroundStateGeometry>) -> SweepRow {
        let RowHead { p, n_max, model, method, branch } = head;
        let d = p.derived();
        let mut row = SweepRow {
            index,
            g: d.g,
            gamma: d.gamma,
            eta: d.eta,
            j: p.j(),
            n_max,
            model,
            method: method.label().into(),
            branch: branch.label().into(),
            g_omega_omega: f64::NAN,
            g_theta_theta: f64::NAN,
            re_q_theta_omega: f64::NAN,
            f_theta_omega: f64::NAN,
            i_omega_omega: f64::NAN,
            energy: f64::NAN,
            gap: None,
            converged: false,
            note: String::new(),
        };
        let filled = geo.and_then(|geo| {
            let q = &geo.qgt;
            row.g_omega_omega = q.metric_component(Param::Omega, Param::Omega)?;
            row.g_theta_theta = q.metric_component(Param::Theta, Param::Theta)?;
            row.re_q_theta_omega = q.metric_component(Param::Theta, Param::Omega)?;
            row.f_theta_omega = q.berry_component(Param::Theta, Param::Omega)?;
            row.i_omega_omega = 4.0 * row.g_omega_omega;
            row.energy = geo.energy;
            row.gap = geo.gap;
            Ok(geo.tail_weight)
        });
        match filled {
            Ok(tail) if tail < TAIL_FLAG => row.converged = true,
            Ok(tail) => row.note = format!("cutoff tail weight {tail:.3e}"),
            Err(e) => row.note = e.to_string(),
        }
        row
    }
}

struct RowHead {
    p: ModelParams,
    n_max: usize,
    model: String,
    method: Method,
    branch: Branch,
}

/// Geometry at one point for a concrete model choice.
pub fn evaluate(kind: ModelKind, p: &ModelParams, truncation: &TruncationSpec, tensor: &[Param], method: Method, convention: Convention) -> Result<GroundStateGeometry> {
    let t = truncation.resolve(kind, p.spin);
    let opts = QgtOptions::new(method).with_convention(convention);
    match kind.resolve(p.g()) {
        None => ground_state_qgt(&FullModel::new(t)?, p, tensor, opts),
        Some(m) if method == Method::Analytic => co_closed_form(m, p, tensor, convention),
        Some(m) => {
            let fam: Box<dyn ParametricHamiltonian> = Box::new(EffectiveHamiltonian::new(m, t)?);
            ground_state_qgt(fam.as_ref(), p, tensor, opts)
        }
    }
}

fn evaluate_row(spec: &SweepSpec, index: usize, base: BasePoint) -> SweepRow {
    let p = match base.params() {
        Ok(p) => p,
        Err(e) => {
            let fallback = BasePoint { g: 0.0, ..base };
            let p = fallback.params().unwrap_or_else(|_| ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.0, SpinLength::from_twice(1).unwrap()).unwrap());
            let head = RowHead { p, n_max: 0, model: spec.model.label().into(), method: spec.method, branch: Branch::of(base.g) };
            return SweepRow::from_geometry(index, head, Err(e));
        }
    };
    let t = spec.truncation.resolve(spec.model, p.spin);
    let label = spec.model.resolve(p.g()).map_or("full", |m| m.label()).to_string();
    let head = RowHead { p, n_max: t.n_max(), model: label, method: spec.method, branch: Branch::of(p.g()) };
    let geo = evaluate(spec.model, &p, &spec.truncation, &spec.tensor, spec.method, spec.convention);
    SweepRow::from_geometry(index, head, geo)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidSpec(format!("cannot start {workers} workers: {e}")))
}

/// One row per active grid point, ordered by grid index whatever the worker count.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let points = spec.active_points()?;
    let rows = pool(spec.workers)?.install(|| points.par_iter().map(|&(i, base)| evaluate_row(spec, i, base)).collect());
    Ok(rows)
}

/// `I_omega_omega` across `gamma` at fixed `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTable {
    pub rows: Vec<SweepRow>,
}

impl GammaTable {
    pub fn qfi(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.i_omega_omega).collect()
    }

    /// `true` when `I_omega_omega` rises strictly with `gamma` (rows sorted by `gamma`).
    pub fn strictly_increasing(&self) -> bool {
        let mut pairs: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.gamma, r.i_omega_omega)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.windows(2).all(|w| w[1].1 > w[0].1)
    }

    /// Largest `|I(gamma) - I(1/gamma)|` over reciprocal pairs present in the table.
    pub fn reciprocal_defect(&self) -> Option<f64> {
        let mut worst: Option<f64> = None;
        for a in &self.rows {
            for b in &self.rows {
                if a.gamma > 1.0 && (a.gamma * b.gamma - 1.0).abs() < 1e-12 {
                    let d = (a.i_omega_omega - b.i_omega_omega).abs();
                    worst = Some(worst.map_or(d, |w| w.max(d)));
                }
            }
        }
        worst
    }
}

pub fn gamma_comparison(spec: &SweepSpec, g: f64, gammas: &[f64]) -> Result<GammaTable> {
    if (g - 1.0).abs() < f64::EPSILON {
        return Err(Error::InvalidSpec("gamma comparison needs g != 1".into()));
    }
    let spec = SweepSpec { param: SweepParam::Gamma, grid: Grid::Values(gammas.to_vec()), base: BasePoint { g, ..spec.base }, ..spec.clone() };
    Ok(GammaTable { rows: run_sweep(&spec)? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub j: f64,
    pub gamma: f64,
    pub eta: f64,
    pub g: f64,
    pub i_lab: f64,
    pub i_eff: f64,
    pub ratio: f64,
    pub converged: bool,
    pub note: String,
}

/// Inputs of [`ratio_scan`].
#[derive(Debug, Clone)]
pub struct RatioScan {
    pub js: Vec<f64>,
    pub gammas: Vec<f64>,
    pub etas: Vec<f64>,
    pub g: f64,
    pub omega: f64,
    pub lab_truncation: TruncationSpec,
    pub lab_method: Method,
    /// Reference model for `I_eff`; one-mode models use `method` analytic.
    pub reference: ModelKind,
    pub reference_truncation: TruncationSpec,
    pub convention: Convention,
    pub workers: usize,
}

impl RatioScan {
    pub fn new(js: Vec<f64>, gammas: Vec<f64>, etas: Vec<f64>, g: f64) -> Self {
        RatioScan {
            js,
            gammas,
            etas,
            g,
            omega: 1.0,
            lab_truncation: TruncationSpec::with_n_max(100),
            lab_method: Method::LinearSolve,
            reference: ModelKind::AutoCo,
            reference_truncation: TruncationSpec::default(),
            convention: Convention::FixedCouplings,
            workers: 1,
        }
    }
}

/// `I_lab / I_eff` per `(j, gamma, eta)`, ordered `j`-major, then `gamma`, then `eta`.
pub fn ratio_scan(scan: &RatioScan) -> Result<Vec<RatioRow>> {
    if !(scan.g < 1.0) {
        return Err(Error::InvalidSpec("ratio scans are defined for g < 1".into()));
    }
    if scan.js.is_empty() || scan.gammas.is_empty() || scan.etas.is_empty() || scan.workers == 0 {
        return Err(Error::InvalidSpec("empty j, gamma or eta list, or zero workers".into()));
    }
    let triples: Vec<(f64, f64, f64)> =
        scan.js.iter().flat_map(|&j| scan.gammas.iter().flat_map(move |&gm| scan.etas.iter().map(move |&e| (j, gm, e)))).collect();
    for &(j, gamma, eta) in &triples {
        BasePoint { g: scan.g, gamma, eta, omega: scan.omega, theta: 0.0, j }.params()?;
    }
    let tensor = [Param::Omega, Param::Theta];
    let one = |(j, gamma, eta): (f64, f64, f64)| -> RatioRow {
        let p = BasePoint { g: scan.g, gamma, eta, omega: scan.omega, theta: 0.0, j }.params().expect("validated above");
        let lab = evaluate(ModelKind::Full, &p, &scan.lab_truncation, &tensor, scan.lab_method, scan.convention);
        let ref_method = if scan.reference.is_one_mode() { Method::Analytic } else { Method::default_for(scan.reference_truncation.resolve(scan.reference, p.spin).dim()) };
        let eff = evaluate(scan.reference, &p, &scan.reference_truncation, &tensor, ref_method, scan.convention);
        let mut row = RatioRow { j, gamma, eta, g: scan.g, i_lab: f64::NAN, i_eff: f64::NAN, ratio: f64::NAN, converged: false, note: String::new() };
        match (lab, eff) {
            (Ok(l), Ok(e)) => {
                row.i_lab = 4.0 * l.qgt.q[(0, 0)].re;
                row.i_eff = 4.0 * e.qgt.q[(0, 0)].re;
                row.ratio = row.i_lab / row.i_eff;
                row.converged = l.tail_weight < TAIL_FLAG;
                if !row.converged {
                    row.note = format!("cutoff tail weight {:.3e}", l.tail_weight);
                }
            }
            (Err(e), _) | (_, Err(e)) => row.note = e.to_string(),
        }
        row
    };
    Ok(pool(scan.workers)?.install(|| triples.par_iter().map(|&t| one(t)).collect()))
}

/// Vertex of the parabola through the maximum and its two neighbours.
pub fn peak_locate(xs: &[f64], ys: &[f64]) -> Result<f64> {
    assert_eq!(xs.len(), ys.len());
    let (k, _) = ys
        .iter()
        .enumerate()
        .filter(|(_, y)| y.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InvalidSpec("no finite values to locate a peak in".into()))?;
    if k == 0 || k + 1 == ys.len() || !ys[k - 1].is_finite() || !ys[k + 1].is_finite() {
        return Err(Error::PeakAtEdge);
    }
    let (x0, x1, x2) = (xs[k - 1], xs[k], xs[k + 1]);
    let (y0, y1, y2) = (ys[k - 1], ys[k], ys[k + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return Ok(x1);
    }
    Ok(x1 - 0.5 * num / den)
}

/// Peak of `I_omega_omega` against `g`.
pub fn peak_locate_rows(rows: &[SweepRow]) -> Result<f64> {
    let xs: Vec<f64> = rows.iter().map(|r| r.g).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.i_omega_omega).collect();
    peak_locate(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub index: usize,
    pub g: f64,
    pub qfi: Vec<f64>,
    /// `|I(n_{k+1}) - I(n_k)| / |I(n_{k+1})|`.
    pub relative_changes: Vec<f64>,
    pub converged: bool,
    /// Smallest listed cutoff from which every later change stays below tolerance.
    pub required_n_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub cutoffs: Vec<usize>,
    pub points: Vec<ConvergencePoint>,
}

impl ConvergenceReport {
    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }
}

pub fn convergence_scan(spec: &SweepSpec, cutoffs: &[usize]) -> Result<ConvergenceReport> {
    if cutoffs.len() < 2 {
        return Err(Error::InvalidSpec("a convergence scan needs at least two cutoffs".into()));
    }
    let runs: Vec<Vec<SweepRow>> = cutoffs
        .iter()
        .map(|&n| {
            let truncation = TruncationSpec { n_max: Some(n), n_b: spec.truncation.n_b.map(|_| n), ..spec.truncation };
            run_sweep(&SweepSpec { truncation, ..spec.clone() })
        })
        .collect::<Result<_>>()?;
    let points = (0..runs[0].len())
        .map(|i| {
            let qfi: Vec<f64> = runs.iter().map(|r| r[i].i_omega_omega).collect();
            let relative_changes: Vec<f64> = qfi.windows(2).map(|w| relative_change(w[0], w[1])).collect();
            let ok = |c: &f64| *c < CONVERGENCE_TOL;
            let converged = relative_changes.last().is_some_and(ok);
            let required_n_max = (0..relative_changes.len()).find(|&k| relative_changes[k..].iter().all(ok)).map(|k| cutoffs[k]);
            ConvergencePoint { index: runs[0][i].index, g: runs[0][i].g, qfi, relative_changes, converged, required_n_max }
        })
        .collect();
    Ok(ConvergenceReport { cutoffs: cutoffs.to_vec(), points })
}

/// `|b - a| / |b|`, zero when both vanish and infinite for NaN input.
pub fn relative_change(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        return f64::INFINITY;
    }
    let d = (b - a).abs();
    if d == 0.0 {
        0.0
    } else {
        d / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// 17 significant digits in scientific notation; `nan`, `inf`, `-inf` otherwise.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV with the version line, the fixed header and 17 significant digits per float.
pub fn write_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    for r in rows {
        let fields = [
            r.index.to_string(),
            fmt_float(r.g),
            fmt_float(r.gamma),
            fmt_float(r.eta),
            fmt_float(r.j),
            r.n_max.to_string(),
            csv_field(&r.model),
            csv_field(&r.method),
            csv_field(&r.branch),
            fmt_float(r.g_omega_omega),
            fmt_float(r.g_theta_theta),
            fmt_float(r.re_q_theta_omega),
            fmt_float(r.f_theta_omega),
            fmt_float(r.i_omega_omega),
            fmt_float(r.energy),
            r.gap.map(fmt_float).unwrap_or_default(),
            r.converged.to_string(),
            csv_field(&r.note),
        ];
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn to_csv_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn to_json_string(rows: &[SweepRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn co_spec(grid: Grid) -> SweepSpec {
        let mut s = SweepSpec::new(ModelKind::Effective(EffectiveModel::CoNormal), Method::SumOverStates, SweepParam::G, grid, BasePoint { eta: 10.0, ..Default::default() });
        s.truncation = TruncationSpec::with_n_max(80);
        s
    }

    #[test]
    fn grids() {
        assert_eq!(Grid::linear(0.0, 1.0, 3).points(), vec![0.0, 0.5, 1.0]);
        let log = Grid::Range { start: 1e-3, stop: 1e-1, count: 3, spacing: Spacing::Log }.points();
        assert!((log[1] - 1e-2).abs() < 1e-15);
        assert!(Grid::linear(0.0, 1.0, 1).validate().is_err());
        assert!(Grid::Range { start: 0.0, stop: 1.0, count: 4, spacing: Spacing::Log }.validate().is_err());
    }

    #[test]
    fn invalid_specs_fail_before_work() {
        let mut s = co_spec(Grid::linear(0.1, 0.5, 3));
        s.tensor = vec![Param::Omega];
        assert!(matches!(run_sweep(&s), Err(Error::InvalidSpec(_))));
        let mut s = co_spec(Grid::linear(0.1, 0.5, 3));
        s.model = ModelKind::Full;
        s.method = Method::Analytic;
        assert!(matches!(run_sweep(&s), Err(Error::InvalidSpec(_))));
        let s = SweepSpec { workers: 0, ..co_spec(Grid::linear(0.1, 0.5, 3)) };
        assert!(run_sweep(&s).is_err());
    }

    #[test]
    fn rows_satisfy_qfi_identity_and_order() {
        let rows = run_sweep(&SweepSpec { workers: 3, ..co_spec(Grid::linear(0.2, 0.9, 6)) }).unwrap();
        assert_eq!(rows.iter().map(|r| r.index).collect::<Vec<_>>(), (0..6).collect::<Vec<_>>());
        for r in &rows {
            assert!(r.converged, "{}", r.note);
            assert_eq!(r.i_omega_omega, 4.0 * r.g_omega_omega);
        }
    }

    #[test]
    fn decoupled_line_is_flat() {
        let mut s = co_spec(Grid::linear(0.0, 1.0, 4));
        s.param = SweepParam::Theta;
        s.base.g = 0.0;
        for r in run_sweep(&s).unwrap() {
            assert_eq!([r.g_omega_omega, r.g_theta_theta, r.re_q_theta_omega, r.f_theta_omega, r.i_omega_omega], [0.0; 5]);
        }
    }

    #[test]
    fn auto_stitching_and_exclusion() {
        let mut s = SweepSpec::new(ModelKind::AutoCo, Method::FiniteDifference, SweepParam::G, Grid::Values(vec![0.8, 0.998, 1.0, 1.003, 1.2]), BasePoint { eta: 10.0, ..Default::default() });
        s.truncation = TruncationSpec::with_n_max(80);
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.iter().map(|r| r.index).collect::<Vec<_>>(), vec![0, 4]);
        assert_eq!((rows[0].model.as_str(), rows[0].branch.as_str()), ("co_np", "np"));
        assert_eq!((rows[1].model.as_str(), rows[1].branch.as_str()), ("co_sp", "sp"));
        assert!(rows[0].f_theta_omega > 0.0 && rows[1].f_theta_omega < 0.0);
    }

    #[test]
    fn failures_become_flagged_rows() {
        let mut s = co_spec(Grid::Values(vec![1.2, 0.5]));
        s.model = ModelKind::Effective(EffectiveModel::CoSuperradiant);
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(!rows[0].is_flagged());
        assert!(rows[1].is_flagged());
        assert!(rows[1].i_omega_omega.is_nan());
        assert!(!rows[1].note.is_empty());

        let mut s = co_spec(Grid::Values(vec![0.95]));
        s.truncation = TruncationSpec::with_n_max(6);
        let rows = run_sweep(&s).unwrap();
        assert!(rows[0].is_flagged() && rows[0].note.contains("tail"));
    }

    #[test]
    fn csv_layout() {
        let rows = run_sweep(&co_spec(Grid::linear(0.3, 0.6, 2))).unwrap();
        let csv = to_csv_string(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_VERSION_LINE));
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), CSV_COLUMNS.len());
        assert_eq!(first[1], "2.9999999999999999e-1");
        let back: f64 = first[13].parse().unwrap();
        assert_eq!(back, rows[0].i_omega_omega);
        let json: serde_json::Value = serde_json::from_str(&to_json_string(&rows)).unwrap();
        assert!(json[0]["I_omega_omega"].is_number());
    }

    #[test]
    fn co_gamma_table_is_reciprocal_symmetric() {
        let t = gamma_comparison(&co_spec(Grid::Values(vec![1.0])), 0.9, &[0.5, 2.0, 1.0 / 3.0, 3.0]).unwrap();
        assert!(t.reciprocal_defect().unwrap() < 1e-8);
    }

    #[test]
    fn parabola_vertex() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| -(x - 2.3f64).powi(2) + 5.0).collect();
        assert!((peak_locate(&xs, &ys).unwrap() - 2.3).abs() < 1e-12);
        assert!(matches!(peak_locate(&xs, &[5.0, 4.0, 3.0, 2.0, 1.0]), Err(Error::PeakAtEdge)));
    }

    #[test]
    fn decoupled_cutoff_scan_converges_immediately() {
        let mut s = co_spec(Grid::Values(vec![0.0]));
        s.param = SweepParam::G;
        let report = convergence_scan(&s, &[10, 20]).unwrap();
        assert!(report.all_converged());
        assert_eq!(report.points[0].required_n_max, Some(10));
    }

    #[test]
    fn self_ratio_is_one() {
        let mut scan = RatioScan::new(vec![1.0], vec![2.0], vec![5.0], 0.7);
        scan.lab_truncation = TruncationSpec::with_n_max(30);
        scan.lab_method = Method::SumOverStates;
        let rows = ratio_scan(&scan).unwrap();
        assert!(rows[0].converged);
        let mut same = scan.clone();
        same.reference = ModelKind::Full;
        same.reference_truncation = same.lab_truncation;
        let rows = ratio_scan(&same).unwrap();
        assert!((rows[0].ratio - 1.0).abs() < 1e-12);
    }
}
