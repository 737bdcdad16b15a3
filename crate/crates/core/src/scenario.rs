//! Declarative experiments: a JSON config in, tables and summary numbers out.
//!
//! Each scenario builds its Hamiltonian and initial state, evolves, and
//! reduces the trajectory to tables. Writing files is left to the caller.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{bound_state, overlap_p, perturbative_transitions, Branch};
use crate::error::{Error, Result};
use crate::model::{
    build_hamiltonian, build_kicked_hamiltonian, Basis, HubbardU, ModelKind, ModelParams, Sector, SparseOperator,
};
use crate::observables::{
    channel_decomposition, compose_two_excitation, gaussian_packet, p_res_of, photon_density, polariton_witness,
    transmission_reflection, ChannelOptions, DensityHistory, GammaWindow, ObservableSeries, PacketSpec,
    SingleParticleModes, DEFAULT_L0, EDGE_TOL, LOSSY_COMPOSE_TOL,
};
use crate::propagator::{converge_pulse_width, evolve_streaming, EvolveOptions, EvolveStats, KrylovConfig, PulseSpec};
use crate::state::StateVector;

/// Density sums must equal the excitation number to this accuracy.
pub const DENSITY_SUM_TOL: f64 = 1e-10;
const MAX_SAMPLES: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    KickedFig4,
    CollisionFig5,
    GammaScanFig6,
    LongtimeFig7,
    RamanFig8,
    PhotonTrain,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::KickedFig4,
        ScenarioId::CollisionFig5,
        ScenarioId::GammaScanFig6,
        ScenarioId::LongtimeFig7,
        ScenarioId::RamanFig8,
        ScenarioId::PhotonTrain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::KickedFig4 => "kicked_fig4",
            ScenarioId::CollisionFig5 => "collision_fig5",
            ScenarioId::GammaScanFig6 => "gamma_scan_fig6",
            ScenarioId::LongtimeFig7 => "longtime_fig7",
            ScenarioId::RamanFig8 => "raman_fig8",
            ScenarioId::PhotonTrain => "photon_train",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::validation("scenario_id", format!("unknown scenario `{s}`")))
    }

    fn supported(self) -> &'static [Observable] {
        use Observable::*;
        match self {
            ScenarioId::KickedFig4 => &[Density, Convergence, Overlaps],
            ScenarioId::CollisionFig5 => &[Density, PRes, Gamma, Transmission, Channels],
            ScenarioId::GammaScanFig6 => &[Gamma],
            ScenarioId::LongtimeFig7 => &[PRes, Density],
            ScenarioId::RamanFig8 => &[Density, PRes, Witness, Channels],
            ScenarioId::PhotonTrain => &[Density, PRes, Witness, Channels],
        }
    }

    fn default_observables(self) -> Vec<Observable> {
        use Observable::*;
        match self {
            ScenarioId::LongtimeFig7 => vec![PRes],
            ScenarioId::PhotonTrain => vec![Density, PRes, Witness],
            _ => self.supported().to_vec(),
        }
    }
}

impl std::fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Density,
    PRes,
    Gamma,
    Transmission,
    Witness,
    Channels,
    Convergence,
    Overlaps,
}

/// `"INFINITE"` or a number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UValue {
    Number(f64),
    Symbol(InfiniteSymbol),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfiniteSymbol {
    #[serde(rename = "INFINITE", alias = "infinite")]
    Infinite,
}

impl From<UValue> for HubbardU {
    fn from(u: UValue) -> Self {
        match u {
            UValue::Number(x) => HubbardU::Finite(x),
            UValue::Symbol(_) => HubbardU::Infinite,
        }
    }
}

impl From<HubbardU> for UValue {
    fn from(u: HubbardU) -> Self {
        match u {
            HubbardU::Finite(x) => UValue::Number(x),
            HubbardU::Infinite => UValue::Symbol(InfiniteSymbol::Infinite),
        }
    }
}

/// How `chain_length` maps to the half length `N`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthConvention {
    /// `L` counts bonds: `2N + 1 = L + 1` sites.
    #[default]
    Sites,
    /// `L` is the half length itself.
    HalfLength,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub half_length: Option<usize>,
    pub chain_length: Option<usize>,
    pub length_convention: Option<LengthConvention>,
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    pub hubbard_u: Option<UValue>,
}

/// Inclusive, evenly spaced `k0` grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct K0Scan {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl K0Scan {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => vec![],
            1 => vec![self.start],
            n => (0..n).map(|i| self.start + (self.end - self.start) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerance {
    pub krylov_tol: f64,
    pub norm_tol: f64,
    pub energy_rel_tol: f64,
    /// Pulse-width halving stops once densities move less than this.
    pub w_conv_tol: f64,
    pub max_halvings: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { krylov_tol: 1e-9, norm_tol: 1e-8, energy_rel_tol: 1e-8, w_conv_tol: 1e-6, max_halvings: 12 }
    }
}

impl Tolerance {
    fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            krylov: KrylovConfig { tol: self.krylov_tol, ..KrylovConfig::default() },
            check_invariants: true,
            norm_tol: self.norm_tol,
            energy_rel_tol: self.energy_rel_tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// User-facing config. Everything but `scenario_id` is optional and filled in
/// by [`ScenarioConfig::resolve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_id: ScenarioId,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packets: Option<Vec<PacketSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
    /// Spacing of the density table; a multiple of `sample_dt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<Vec<Observable>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0_scan: Option<K0Scan>,
    /// Interaction strengths compared in the collision scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_variants: Option<Vec<UValue>>,
    /// Trailing-average window for the atom-excitation witness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_window: Option<f64>,
    /// Channel decomposition every this many samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Tolerance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

impl ScenarioConfig {
    pub fn new(scenario_id: ScenarioId) -> Self {
        ScenarioConfig {
            scenario_id,
            model: ModelConfig::default(),
            packets: None,
            pulse: None,
            t_max: None,
            sample_dt: None,
            density_dt: None,
            observables: None,
            l0: None,
            k0_scan: None,
            u_variants: None,
            witness_window: None,
            channel_every: None,
            tolerance: None,
            out_dir: None,
            format: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::validation("config", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Fills in scenario defaults and checks every field.
    pub fn resolve(&self) -> Result<ResolvedScenario> {
        resolve(self)
    }
}

/// Fully specified scenario, as echoed into run manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedScenario {
    pub scenario_id: ScenarioId,
    pub params: ModelParams,
    /// How `half_length` was obtained.
    pub length_note: String,
    pub packets: Vec<PacketSpec>,
    pub pulse: Option<PulseSpec>,
    pub t_max: f64,
    pub sample_dt: f64,
    pub density_dt: f64,
    pub observables: Vec<Observable>,
    pub l0: usize,
    pub k0_values: Vec<f64>,
    pub u_variants: Vec<HubbardU>,
    pub witness_window: f64,
    pub channel_every: usize,
    pub tolerance: Tolerance,
    /// End of the emission-probability window, where one is used.
    pub gamma_window_end: Option<f64>,
    pub gamma_window_limit: Option<f64>,
}

impl ResolvedScenario {
    pub fn times(&self) -> Vec<f64> {
        time_grid(self.t_max, self.sample_dt)
    }

    pub fn wants(&self, o: Observable) -> bool {
        self.observables.contains(&o)
    }

    fn density_stride(&self) -> usize {
        ((self.density_dt / self.sample_dt).round() as usize).max(1)
    }
}

/// `0, dt, 2dt, ...` up to `t_max`, ending exactly at `t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt + 1e-9).floor() as usize;
    let mut t: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    if t_max - t[n] > 1e-9 * dt {
        t.push(t_max);
    }
    t
}

fn finite_pos(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::validation(field, format!("must be finite and > 0, got {v}")))
    }
}

fn resolve(cfg: &ScenarioConfig) -> Result<ResolvedScenario> {
    use ScenarioId::*;
    let id = cfg.scenario_id;

    // model
    let m = &cfg.model;
    let (default_n, default_lambda) = match id {
        KickedFig4 => (200, 0.8),
        LongtimeFig7 => (60, 2.0),
        PhotonTrain => (150, 2.0),
        _ => (100, 2.0),
    };
    let (half_length, length_note) = match (m.half_length, m.chain_length) {
        (Some(_), Some(_)) => {
            return Err(Error::validation("model.chain_length", "give either half_length or chain_length, not both"))
        }
        (Some(n), None) => (n, format!("half_length N = {n} given directly")),
        (None, Some(l)) => match m.length_convention.unwrap_or_default() {
            LengthConvention::Sites => {
                if l % 2 != 0 {
                    return Err(Error::validation("model.chain_length", "must be even under the `sites` convention"));
                }
                (l / 2, format!("chain_length L = {l} read as L + 1 = {} sites, N = {}", l + 1, l / 2))
            }
            LengthConvention::HalfLength => (l, format!("chain_length L = {l} read as half length N = {l}")),
        },
        (None, None) => {
            if id == LongtimeFig7 {
                (default_n, format!("default L = 120 read as {} sites, N = {default_n}", 2 * default_n + 1))
            } else {
                (default_n, format!("default N = {default_n}"))
            }
        }
    };
    if m.length_convention.is_some() && m.chain_length.is_none() {
        return Err(Error::validation("model.length_convention", "only meaningful with chain_length"));
    }
    if half_length < 1 {
        return Err(Error::validation("model.half_length", "must be >= 1"));
    }
    let kappa = finite_pos("model.kappa", m.kappa.unwrap_or(1.0))?;
    let lambda = m.lambda.unwrap_or(default_lambda);
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::validation("model.lambda", format!("must be finite and > 0, got {lambda}")));
    }
    let hubbard_u: HubbardU = m.hubbard_u.map(Into::into).unwrap_or(HubbardU::Infinite);
    if let HubbardU::Finite(u) = hubbard_u {
        if !u.is_finite() {
            return Err(Error::validation("model.hubbard_u", "must be finite or \"INFINITE\""));
        }
    }
    let params = ModelParams::new(half_length, kappa, lambda, hubbard_u)
        .map_err(|e| Error::validation("model", e.to_string()))?;

    // packets
    let packets = match &cfg.packets {
        Some(p) => p.clone(),
        None => match id {
            KickedFig4 | GammaScanFig6 => vec![],
            CollisionFig5 => vec![PacketSpec::new(-40, PI / 2.0, 0.3)],
            LongtimeFig7 => vec![PacketSpec::new(-40, PI / 2.0, 0.3), PacketSpec::new(-40, 0.75 * PI, 0.3)],
            RamanFig8 => vec![PacketSpec::new(-40, PI / 3.0, 0.3), PacketSpec::new(40, -PI / 3.0, 0.3)],
            PhotonTrain => vec![PacketSpec::new(-30, PI / 3.0, 0.3), PacketSpec::new(-90, PI / 3.0, 0.3)],
        },
    };
    let packets =
        if id == GammaScanFig6 && cfg.packets.is_none() { vec![PacketSpec::new(-40, 0.73 * PI, 0.3)] } else { packets };
    let n_packets = packets.len();
    match id {
        KickedFig4 if n_packets != 0 => return Err(Error::validation("packets", "kicked_fig4 takes no packets")),
        CollisionFig5 | GammaScanFig6 if n_packets != 1 => {
            return Err(Error::validation("packets", format!("{id} needs exactly one packet, got {n_packets}")))
        }
        LongtimeFig7 if n_packets == 0 => return Err(Error::validation("packets", "needs at least one packet")),
        RamanFig8 if n_packets != 2 => {
            return Err(Error::validation("packets", format!("raman_fig8 needs two packets, got {n_packets}")))
        }
        PhotonTrain if !(1..=2).contains(&n_packets) => {
            return Err(Error::validation(
                "packets",
                format!("photon_train supports one or two packets (two-excitation sector), got {n_packets}"),
            ))
        }
        _ => {}
    }
    let basis1 = Basis::enumerate(half_length, Sector::One, ModelKind::Spin);
    for (i, p) in packets.iter().enumerate() {
        p.validate().map_err(|e| Error::validation(format!("packets[{i}]"), e.to_string()))?;
        if p.center.unsigned_abs() as usize > half_length {
            return Err(Error::validation(format!("packets[{i}].center"), "outside the chain"));
        }
        let pk = gaussian_packet(p, &basis1)?;
        if pk.clipped() {
            return Err(Error::validation(
                format!("packets[{i}].center"),
                format!("packet weight {:.2e} at the chain ends exceeds {EDGE_TOL:.0e}", pk.edge_weight),
            ));
        }
    }

    // pulse
    let pulse = match (id, cfg.pulse) {
        (KickedFig4, Some(p)) => Some(p),
        (KickedFig4, None) => Some(PulseSpec { u0: 2.0, tau: 1.0, width: 0.01 }),
        (_, Some(_)) => return Err(Error::validation("pulse", "only kicked_fig4 takes a pulse")),
        (_, None) => None,
    };
    if let Some(p) = pulse {
        p.validate().map_err(|e| Error::validation("pulse", e.to_string()))?;
    }

    let l0 = cfg.l0.unwrap_or(DEFAULT_L0);
    if l0 >= half_length {
        return Err(Error::validation("l0", format!("must be < half_length {half_length}")));
    }

    // time grid
    let default_dt = match id {
        CollisionFig5 | GammaScanFig6 => 0.1,
        // averages over thousands of time units; finer sampling only costs
        LongtimeFig7 => 1.0,
        _ => 0.5,
    };
    let sample_dt = finite_pos("sample_dt", cfg.sample_dt.unwrap_or(default_dt))?;
    let density_dt = finite_pos("density_dt", cfg.density_dt.unwrap_or(sample_dt.max(0.5)))?;
    let ratio = density_dt / sample_dt;
    if ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-9 {
        return Err(Error::validation("density_dt", "must be a positive multiple of sample_dt"));
    }

    let limit = match id {
        CollisionFig5 | GammaScanFig6 | RamanFig8 | PhotonTrain => Some(
            packets
                .iter()
                .map(|p| GammaWindow::boundary_limit(half_length, p, l0, kappa))
                .fold(f64::INFINITY, f64::min),
        ),
        _ => None,
    };
    let default_t_max = match id {
        KickedFig4 => 60.0,
        CollisionFig5 => 60.0,
        LongtimeFig7 => 10_000.0,
        GammaScanFig6 | RamanFig8 | PhotonTrain => limit.expect("limit set above"),
    };
    let t_max = finite_pos("t_max", cfg.t_max.unwrap_or(default_t_max))?;
    if let Some(p) = pulse {
        if p.end() > t_max {
            return Err(Error::validation("pulse", "pulse must end before t_max"));
        }
    }
    let samples = (t_max / sample_dt).ceil();
    if samples > MAX_SAMPLES as f64 {
        return Err(Error::validation("sample_dt", format!("{samples} samples exceed the cap {MAX_SAMPLES}")));
    }

    // observables
    let observables = match &cfg.observables {
        Some(o) => {
            let mut o = o.clone();
            o.sort();
            o.dedup();
            o
        }
        None => id.default_observables(),
    };
    if let Some(bad) = observables.iter().find(|o| !id.supported().contains(o)) {
        return Err(Error::validation("observables", format!("{bad:?} is not produced by {id}")));
    }

    let (gamma_window_end, gamma_window_limit) = if observables.contains(&Observable::Gamma) {
        let lim = limit.expect("gamma scenarios have a limit");
        let w = GammaWindow { start: 0.0, end: t_max, limit: lim };
        w.validate()?;
        (Some(t_max), Some(lim))
    } else {
        (None, limit)
    };

    let k0_values = if id == GammaScanFig6 {
        let scan = cfg.k0_scan.unwrap_or(K0Scan { start: 0.3 * PI, end: 0.95 * PI, points: 27 });
        if !(scan.start.is_finite() && scan.end.is_finite()) || scan.start.abs() >= PI || scan.end.abs() >= PI {
            return Err(Error::validation("k0_scan", "endpoints must lie in (-pi, pi)"));
        }
        scan.values()
    } else {
        if cfg.k0_scan.is_some() {
            return Err(Error::validation("k0_scan", "only gamma_scan_fig6 takes a k0 scan"));
        }
        vec![]
    };

    let u_variants: Vec<HubbardU> = if id == CollisionFig5 {
        match &cfg.u_variants {
            Some(v) if v.is_empty() => return Err(Error::validation("u_variants", "empty")),
            Some(v) => v.iter().map(|u| (*u).into()).collect(),
            None => vec![HubbardU::Finite(0.0), HubbardU::Finite(10.0), HubbardU::Infinite],
        }
    } else {
        if cfg.u_variants.is_some() {
            return Err(Error::validation("u_variants", "only collision_fig5 compares interaction strengths"));
        }
        vec![]
    };
    for u in &u_variants {
        if let HubbardU::Finite(x) = u {
            if !x.is_finite() {
                return Err(Error::validation("u_variants", "entries must be finite or \"INFINITE\""));
            }
        }
    }

    let witness_window = finite_pos("witness_window", cfg.witness_window.unwrap_or(20.0 / kappa))?;
    let channel_every = cfg.channel_every.unwrap_or(((5.0 / sample_dt).round() as usize).max(1));
    if channel_every == 0 {
        return Err(Error::validation("channel_every", "must be >= 1"));
    }
    let tolerance = cfg.tolerance.unwrap_or_default();
    for (f, v) in [
        ("tolerance.krylov_tol", tolerance.krylov_tol),
        ("tolerance.norm_tol", tolerance.norm_tol),
        ("tolerance.energy_rel_tol", tolerance.energy_rel_tol),
        ("tolerance.w_conv_tol", tolerance.w_conv_tol),
    ] {
        finite_pos(f, v)?;
    }

    Ok(ResolvedScenario {
        scenario_id: id,
        params,
        length_note,
        packets,
        pulse,
        t_max,
        sample_dt,
        density_dt,
        observables,
        l0,
        k0_values,
        u_variants,
        witness_window,
        channel_every,
        tolerance,
        gamma_window_end,
        gamma_window_limit,
    })
}

/// One cell of an output table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(x) => fmt_num(*x, f),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Shortest round-trip form, in exponent notation only for very small or
/// very large magnitudes.
fn fmt_num(x: f64, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        write!(f, "{x}")
    } else {
        write!(f, "{x:e}")
    }
}

/// Long-format table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

/// `(t, l, value)` rows, `l = "e"` for the atom.
pub fn density_table(name: impl Into<String>, history: &DensityHistory, stride: usize) -> Table {
    let mut t = Table::new(name, &["t", "l", "value"]);
    let n = history.half_length as i64;
    for (i, (time, d)) in history.times.iter().zip(&history.values).enumerate() {
        if i % stride != 0 && i + 1 != history.len() {
            continue;
        }
        for (j, v) in d.iter().enumerate() {
            let l = if j + 1 == d.len() { Cell::Text("e".into()) } else { Cell::Int(j as i64 - n) };
            t.push(vec![Cell::Num(*time), l, Cell::Num(*v)]);
        }
    }
    t
}

pub fn series_table(name: impl Into<String>, series: &[&ObservableSeries]) -> Table {
    let mut cols = vec!["t"];
    cols.extend(series.iter().map(|s| s.name.as_str()));
    let mut t = Table::new(name, &cols);
    if let Some(first) = series.first() {
        for (i, time) in first.times.iter().enumerate() {
            let mut row = vec![Cell::Num(*time)];
            row.extend(series.iter().map(|s| Cell::Num(s.values[i])));
            t.push(row);
        }
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl InvariantCheck {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        InvariantCheck { name: name.into(), value, tolerance, passed: value <= tolerance }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        InvariantCheck { name: name.into(), value: if ok { 0.0 } else { 1.0 }, tolerance: 0.0, passed: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutput {
    pub scenario_id: ScenarioId,
    pub resolved: ResolvedScenario,
    pub tables: Vec<Table>,
    pub summary: BTreeMap<String, f64>,
    pub checks: Vec<InvariantCheck>,
}

impl ScenarioOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }

    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutput> {
    let r = config.resolve()?;
    run_resolved(&r)
}

pub fn run_resolved(r: &ResolvedScenario) -> Result<ScenarioOutput> {
    let mut out = ScenarioOutput {
        scenario_id: r.scenario_id,
        resolved: r.clone(),
        tables: vec![],
        summary: BTreeMap::new(),
        checks: vec![],
    };
    match r.scenario_id {
        ScenarioId::KickedFig4 => kicked(r, &mut out)?,
        ScenarioId::CollisionFig5 => collision(r, &mut out)?,
        ScenarioId::GammaScanFig6 => gamma_scan(r, &mut out)?,
        ScenarioId::LongtimeFig7 => longtime(r, &mut out)?,
        ScenarioId::RamanFig8 | ScenarioId::PhotonTrain => two_packets(r, &mut out)?,
    }
    Ok(out)
}

/// Evolution plus the bookkeeping every run shares.
struct Run {
    history: DensityHistory,
    stats: EvolveStats,
    density_sum_error: f64,
    channels: Vec<(f64, f64, f64, f64, f64)>,
}

fn run_static(
    r: &ResolvedScenario,
    h: &SparseOperator,
    basis: &Basis,
    psi0: &StateVector,
    modes: Option<&SingleParticleModes>,
) -> Result<Run> {
    let times = r.times();
    let n_exc = basis.sector().excitations() as f64;
    let mut history = DensityHistory::new(basis.half_length());
    let mut density_sum_error: f64 = 0.0;
    let mut channels = vec![];
    let stats = evolve_streaming(h, psi0, &times, &r.tolerance.evolve_options(), |i, t, psi| {
        let d = photon_density(basis, psi);
        let sum: f64 = d.iter().sum();
        density_sum_error = density_sum_error.max((sum - n_exc * psi.norm_sqr()).abs());
        history.push(t, d);
        if let Some(m) = modes {
            if i % r.channel_every == 0 || i + 1 == times.len() {
                let c = channel_decomposition(m, basis, psi, &ChannelOptions::default())?;
                channels.push((t, c.c1_weight(), c.c2_weight(), c.bound_pair_weight, c.residual_weight));
            }
        }
        Ok(())
    })?;
    Ok(Run { history, stats, density_sum_error, channels })
}

fn push_run_checks(out: &mut ScenarioOutput, prefix: &str, r: &ResolvedScenario, h: &SparseOperator, run: &Run) {
    let tol = &r.tolerance;
    let p = |s: &str| if prefix.is_empty() { s.to_string() } else { format!("{prefix}:{s}") };
    out.checks.push(InvariantCheck::flag(p("hermitian"), h.is_hermitian()));
    out.checks.push(InvariantCheck::at_most(p("norm"), run.stats.max_norm_error, tol.norm_tol));
    out.checks.push(InvariantCheck::at_most(
        p("energy"),
        run.stats.max_energy_drift,
        tol.energy_rel_tol * h.norm_inf().max(1.0),
    ));
    out.checks.push(InvariantCheck::at_most(p("density_sum"), run.density_sum_error, DENSITY_SUM_TOL));
}

fn channels_table(name: &str, rows: &[(f64, f64, f64, f64, f64)]) -> Table {
    let mut t = Table::new(name, &["t", "c1_weight", "c2_weight", "bound_pair_weight", "residual_weight"]);
    for &(time, c1, c2, bp, res) in rows {
        t.push(vec![Cell::Num(time), Cell::Num(c1), Cell::Num(c2), Cell::Num(bp), Cell::Num(res)]);
    }
    t
}

fn p_res_series(history: &DensityHistory, l0: usize) -> (ObservableSeries, ObservableSeries) {
    let mut p = ObservableSeries::new("p_res");
    let mut q = ObservableSeries::new("one_minus_p_res");
    for (t, d) in history.times.iter().zip(&history.values) {
        let v = p_res_of(d, history.half_length, l0);
        p.push(*t, v);
        q.push(*t, 1.0 - v);
    }
    (p, q)
}

fn polariton_with_packet(
    params: &ModelParams,
    packet: &PacketSpec,
    basis2: &Basis,
    out: &mut ScenarioOutput,
    prefix: &str,
) -> Result<StateVector> {
    let basis1 = Basis::enumerate(params.half_length, Sector::One, ModelKind::Spin);
    let phi = bound_state(&params.with_u(HubbardU::Infinite), Branch::Minus, &basis1)?;
    let pk = gaussian_packet(packet, &basis1)?;
    let c = compose_two_excitation(&pk.state, &phi, basis2)?;
    out.checks.push(InvariantCheck::at_most(format!("{prefix}compose_drop_weight"), c.drop_weight, LOSSY_COMPOSE_TOL));
    Ok(c.state)
}

fn label_u(u: HubbardU) -> String {
    match u {
        HubbardU::Infinite => "spin".into(),
        HubbardU::Finite(x) => format!("u_{x}"),
    }
}

fn kicked(r: &ResolvedScenario, out: &mut ScenarioOutput) -> Result<()> {
    let params = r.params.with_u(HubbardU::Infinite);
    let pulse = r.pulse.expect("resolved kicked scenario has a pulse");
    let basis = Basis::enumerate(params.half_length, Sector::One, ModelKind::Spin);
    let kicked = build_kicked_hamiltonian(&params, pulse, &basis)?;
    let phi_m = bound_state(&params, Branch::Minus, &basis)?;
    let phi_p = bound_state(&params, Branch::Plus, &basis)?;
    let times = r.times();
    let conv = converge_pulse_width(
        &kicked,
        &phi_m,
        &times,
        &r.tolerance.evolve_options(),
        r.tolerance.w_conv_tol,
        r.tolerance.max_halvings,
    )?;
    out.checks.push(InvariantCheck::flag("pulse_width_converged", conv.converged));
    if !conv.converged {
        log::warn!("pulse width not converged after {} halvings", r.tolerance.max_halvings);
    }

    let traj = &conv.trajectory;
    let mut history = DensityHistory::new(params.half_length);
    let mut sum_err: f64 = 0.0;
    let mut overlaps = Table::new("overlaps", &["t", "p_minus", "p_plus", "escape"]);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let d = photon_density(&basis, s);
        sum_err = sum_err.max((d.iter().sum::<f64>() - s.norm_sqr()).abs());
        history.push(*t, d);
        let pm = s.inner(&phi_m).norm_sqr();
        let pp = s.inner(&phi_p).norm_sqr();
        overlaps.push(vec![Cell::Num(*t), Cell::Num(pm), Cell::Num(pp), Cell::Num(1.0 - pm - pp)]);
    }
    out.checks.push(InvariantCheck::at_most("norm", traj.max_norm_error(), r.tolerance.norm_tol));
    out.checks.push(InvariantCheck::at_most("density_sum", sum_err, DENSITY_SUM_TOL));
    // the kick preserves parity, so the profile stays mirror symmetric
    let asym = history
        .values
        .iter()
        .map(|d| {
            let n = params.half_length;
            (1..=n).map(|l| (d[n + l] - d[n - l]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    out.checks.push(InvariantCheck::at_most("mirror_symmetry", asym, 1e-10));

    let last = traj.last().expect("non-empty trajectory");
    let pm = last.inner(&phi_m).norm_sqr();
    let pp = last.inner(&phi_p).norm_sqr();
    let p = overlap_p(&params, Branch::Minus, Branch::Minus)?;
    let theory = perturbative_transitions(pulse.u0, p);
    let s = &mut out.summary;
    s.insert("p".into(), p);
    s.insert("u0".into(), pulse.u0);
    s.insert("final_width".into(), conv.final_width());
    s.insert("t_minus_minus".into(), pm);
    s.insert("t_plus_minus".into(), pp);
    s.insert("escape".into(), 1.0 - pm - pp);
    s.insert("theory_t_minus_minus".into(), theory.t_diag);
    s.insert("theory_t_plus_minus".into(), theory.t_plus_minus);
    s.insert("theory_escape".into(), theory.escape);
    s.insert("atom_initial".into(), history.atom(0));
    s.insert("atom_final".into(), history.atom(history.len() - 1));

    if r.wants(Observable::Density) {
        out.tables.push(density_table("density", &history, r.density_stride()));
    }
    if r.wants(Observable::Convergence) {
        let mut t = Table::new("pulse_convergence", &["width", "max_change"]);
        for (w, c) in conv.widths.iter().zip(&conv.max_changes) {
            t.push(vec![Cell::Num(*w), Cell::Num(*c)]);
        }
        out.tables.push(t);
    }
    if r.wants(Observable::Overlaps) {
        out.tables.push(overlaps);
    }
    Ok(())
}

fn collision(r: &ResolvedScenario, out: &mut ScenarioOutput) -> Result<()> {
    let packet = r.packets[0];
    let mut histories: Vec<(String, DensityHistory)> = vec![];
    let modes = if r.wants(Observable::Channels) { Some(SingleParticleModes::new(&r.params)?) } else { None };
    for &u in &r.u_variants {
        let params = r.params.with_u(u);
        let kind = if u == HubbardU::Infinite { ModelKind::Spin } else { ModelKind::Hubbard };
        let basis = Basis::enumerate(params.half_length, Sector::Two, kind);
        let label = label_u(u);
        let psi = polariton_with_packet(&params, &packet, &basis, out, &format!("{label}:"))?;
        let h = build_hamiltonian(&params, &basis)?;
        let run = run_static(r, &h, &basis, &psi, modes.as_ref())?;
        push_run_checks(out, &label, r, &h, &run);

        let (p, q) = p_res_series(&run.history, r.l0);
        if let (Some(end), Some(limit)) = (r.gamma_window_end, r.gamma_window_limit) {
            let w = GammaWindow { start: 0.0, end, limit };
            out.summary.insert(format!("gamma_{label}"), crate::observables::gamma_from_series(&p, &w)?);
        }
        if r.wants(Observable::Transmission) {
            let tr = transmission_reflection(&run.history, r.t_max, r.l0)?;
            out.summary.insert(format!("transmission_right_{label}"), tr.right);
            out.summary.insert(format!("reflection_left_{label}"), tr.left);
            out.summary.insert(format!("center_{label}"), tr.center);
        }
        if let (Some(first), Some(last)) = (run.channels.first(), run.channels.last()) {
            out.summary.insert(format!("c2_initial_{label}"), first.2);
            out.summary.insert(format!("c2_final_{label}"), last.2);
            out.tables.push(channels_table(&format!("channels_{label}"), &run.channels));
        }
        if r.wants(Observable::PRes) {
            out.tables.push(series_table(format!("p_res_{label}"), &[&p, &q]));
        }
        if r.wants(Observable::Density) {
            out.tables.push(density_table(format!("density_{label}"), &run.history, r.density_stride()));
        }
        histories.push((label, run.history));
    }
    if let Some((_, spin)) = histories.iter().find(|(l, _)| l == "spin") {
        for (label, h) in histories.iter().filter(|(l, _)| l != "spin") {
            let diff = h
                .values
                .iter()
                .zip(&spin.values)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            out.summary.insert(format!("max_density_diff_{label}_vs_spin"), diff);
        }
    }
    Ok(())
}

/// `Gamma(k0)` for one packet colliding with the polariton.
pub fn gamma_for_k0(r: &ResolvedScenario, k0: f64) -> Result<(f64, Vec<InvariantCheck>)> {
    let packet = PacketSpec { k0, ..r.packets[0] };
    let params = r.params.with_u(HubbardU::Infinite);
    let basis = Basis::enumerate(params.half_length, Sector::Two, ModelKind::Spin);
    let mut scratch = ScenarioOutput {
        scenario_id: r.scenario_id,
        resolved: r.clone(),
        tables: vec![],
        summary: BTreeMap::new(),
        checks: vec![],
    };
    let prefix = format!("k0_{:.4}pi", k0 / PI);
    let psi = polariton_with_packet(&params, &packet, &basis, &mut scratch, &format!("{prefix}:"))?;
    let h = build_hamiltonian(&params, &basis)?;
    let run = run_static(r, &h, &basis, &psi, None)?;
    push_run_checks(&mut scratch, &prefix, r, &h, &run);
    let w = GammaWindow {
        start: 0.0,
        end: r.gamma_window_end.expect("gamma window resolved"),
        limit: r.gamma_window_limit.expect("gamma window resolved"),
    };
    let (p, _) = p_res_series(&run.history, r.l0);
    Ok((crate::observables::gamma_from_series(&p, &w)?, scratch.checks))
}

fn gamma_scan(r: &ResolvedScenario, out: &mut ScenarioOutput) -> Result<()> {
    let results: Vec<Result<(f64, Vec<InvariantCheck>)>> =
        r.k0_values.par_iter().map(|&k0| gamma_for_k0(r, k0)).collect();
    let mut table = Table::new("gamma_scan", &["k0", "k0_over_pi", "gamma"]);
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for (&k0, res) in r.k0_values.iter().zip(results) {
        let (g, checks) = res?;
        out.checks.extend(checks);
        table.push(vec![Cell::Num(k0), Cell::Num(k0 / PI), Cell::Num(g)]);
        if g > best.0 {
            best = (g, k0);
        }
    }
    out.checks.push(InvariantCheck::at_most(
        "gamma_window",
        r.gamma_window_end.unwrap_or(0.0),
        r.gamma_window_limit.unwrap_or(f64::INFINITY),
    ));
    if !r.k0_values.is_empty() {
        out.summary.insert("peak_gamma".into(), best.0);
        out.summary.insert("peak_k0".into(), best.1);
        out.summary.insert("peak_k0_over_pi".into(), best.1 / PI);
    }
    out.summary.insert("window_end".into(), r.gamma_window_end.unwrap_or(f64::NAN));
    out.tables.push(table);
    Ok(())
}

/// Mean of the series over the last fifth `[0.8 T, T]`, and its relative
/// change against the fifth before it, `[0.6 T, 0.8 T]`.
pub fn trailing_average(series: &ObservableSeries) -> (f64, f64) {
    let t_end = *series.times.last().unwrap_or(&0.0);
    let mean = |a: f64, b: f64| series.mean_in(a, b).unwrap_or(f64::NAN);
    let avg = mean(0.8 * t_end, t_end);
    let before = mean(0.6 * t_end, 0.8 * t_end);
    (avg, (avg - before).abs() / avg.abs())
}

fn longtime(r: &ResolvedScenario, out: &mut ScenarioOutput) -> Result<()> {
    let params = r.params.with_u(HubbardU::Infinite);
    let basis = Basis::enumerate(params.half_length, Sector::Two, ModelKind::Spin);
    let h = build_hamiltonian(&params, &basis)?;
    let runs: Vec<Result<(String, Run, ScenarioOutput)>> = r
        .packets
        .par_iter()
        .map(|packet| {
            let label = format!("k0_{:.4}pi", packet.k0 / PI);
            let mut scratch = ScenarioOutput {
                scenario_id: r.scenario_id,
                resolved: r.clone(),
                tables: vec![],
                summary: BTreeMap::new(),
                checks: vec![],
            };
            let psi = polariton_with_packet(&params, packet, &basis, &mut scratch, &format!("{label}:"))?;
            let run = run_static(r, &h, &basis, &psi, None)?;
            Ok((label, run, scratch))
        })
        .collect();
    for res in runs {
        let (label, run, scratch) = res?;
        out.checks.extend(scratch.checks);
        push_run_checks(out, &label, r, &h, &run);
        let (p, q) = p_res_series(&run.history, r.l0);
        let (avg, drift) = trailing_average(&q);
        out.summary.insert(format!("trailing_avg_{label}"), avg);
        out.summary.insert(format!("trailing_drift_{label}"), drift);
        out.summary.insert(format!("initial_{label}"), q.values[0]);
        if r.wants(Observable::PRes) {
            out.tables.push(series_table(format!("p_res_{label}"), &[&p, &q]));
        }
        if r.wants(Observable::Density) {
            out.tables.push(density_table(format!("density_{label}"), &run.history, r.density_stride()));
        }
    }
    Ok(())
}

/// Raman collision and the one-sided train: photons only, atom in `g`.
fn two_packets(r: &ResolvedScenario, out: &mut ScenarioOutput) -> Result<()> {
    let params = r.params.with_u(HubbardU::Infinite);
    let n = params.half_length;
    let basis1 = Basis::enumerate(n, Sector::One, ModelKind::Spin);
    let packets: Vec<StateVector> =
        r.packets.iter().map(|p| gaussian_packet(p, &basis1).map(|p| p.state)).collect::<Result<_>>()?;
    let (basis, psi) = if packets.len() == 1 {
        (basis1, packets[0].clone())
    } else {
        let b2 = Basis::enumerate(n, Sector::Two, ModelKind::Spin);
        let c = compose_two_excitation(&packets[0], &packets[1], &b2)?;
        out.checks.push(InvariantCheck::at_most("compose_drop_weight", c.drop_weight, LOSSY_COMPOSE_TOL));
        (b2, c.state)
    };
    let h = build_hamiltonian(&params, &basis)?;
    let modes = if r.wants(Observable::Channels) && basis.sector() == Sector::Two {
        Some(SingleParticleModes::new(&params)?)
    } else {
        None
    };
    let run = run_static(r, &h, &basis, &psi, modes.as_ref())?;
    push_run_checks(out, "", r, &h, &run);

    let hist = &run.history;
    let (atom, avg) = polariton_witness(hist, r.witness_window);
    let last = hist.len() - 1;
    let outside = |i: usize| -> f64 {
        let l0 = r.l0;
        let d = &hist.values[i];
        d[..n - l0].iter().sum::<f64>() + d[n + l0 + 1..2 * n + 1].iter().sum::<f64>()
    };
    let s = &mut out.summary;
    s.insert("witness_final".into(), *avg.values.last().expect("samples"));
    s.insert("atom_max".into(), atom.values.iter().copied().fold(0.0, f64::max));
    s.insert("atom_final".into(), hist.atom(last));
    s.insert("photons_outside_initial".into(), outside(0));
    s.insert("photons_outside_final".into(), outside(last));
    s.insert("window_limit".into(), r.gamma_window_limit.unwrap_or(f64::NAN));
    if let (Some(first), Some(lastc)) = (run.channels.first(), run.channels.last()) {
        s.insert("c1_initial".into(), first.1);
        s.insert("c1_final".into(), lastc.1);
        s.insert("c2_final".into(), lastc.2);
        s.insert("residual_final".into(), lastc.4);
    }

    if r.wants(Observable::Witness) {
        out.tables.push(series_table("witness", &[&atom, &avg]));
    }
    if r.wants(Observable::PRes) {
        let (p, q) = p_res_series(hist, r.l0);
        out.tables.push(series_table("p_res", &[&p, &q]));
    }
    if !run.channels.is_empty() {
        out.tables.push(channels_table("channels", &run.channels));
    }
    if r.wants(Observable::Density) {
        out.tables.push(density_table("density", hist, r.density_stride()));
    }
    Ok(())
}

/// Parameters a sweep can vary.
pub const SWEEP_AXES: [&str; 13] = [
    "lambda",
    "kappa",
    "hubbard_u",
    "half_length",
    "k0",
    "alpha",
    "center",
    "u0",
    "tau",
    "width",
    "l0",
    "t_max",
    "sample_dt",
];

/// Copy of `template` with one parameter replaced. `k0` keeps each packet's
/// direction; `center` keeps each packet's side.
pub fn apply_axis(template: &ScenarioConfig, axis: &str, value: f64) -> Result<ScenarioConfig> {
    let mut c = template.clone();
    let as_count = |v: f64| -> Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
            Ok(v as usize)
        } else {
            Err(Error::validation(axis, format!("needs a non-negative integer, got {v}")))
        }
    };
    let packets = |c: &ScenarioConfig| -> Result<Vec<PacketSpec>> {
        c.packets
            .clone()
            .or_else(|| c.resolve().ok().map(|r| r.packets))
            .ok_or_else(|| Error::validation("packets", "template does not resolve; cannot vary a packet parameter"))
    };
    match axis {
        "lambda" => c.model.lambda = Some(value),
        "kappa" => c.model.kappa = Some(value),
        "hubbard_u" => c.model.hubbard_u = Some(UValue::Number(value)),
        "half_length" => {
            c.model.half_length = Some(as_count(value)?);
            c.model.chain_length = None;
            c.model.length_convention = None;
        }
        "k0" => {
            let mut p = packets(&c)?;
            for q in &mut p {
                q.k0 = if q.k0 < 0.0 { -value.abs() } else { value.abs() };
            }
            c.packets = Some(p);
        }
        "alpha" => {
            let mut p = packets(&c)?;
            p.iter_mut().for_each(|q| q.alpha = value);
            c.packets = Some(p);
        }
        "center" => {
            let mag = as_count(value.abs())? as i32;
            let mut p = packets(&c)?;
            p.iter_mut().for_each(|q| q.center = if q.center > 0 { mag } else { -mag });
            c.packets = Some(p);
        }
        "u0" | "tau" | "width" => {
            let mut p = c
                .pulse
                .or_else(|| c.resolve().ok().and_then(|r| r.pulse))
                .ok_or_else(|| Error::validation(axis, "scenario has no pulse"))?;
            match axis {
                "u0" => p.u0 = value,
                "tau" => p.tau = value,
                _ => p.width = value,
            }
            c.pulse = Some(p);
        }
        "l0" => c.l0 = Some(as_count(value)?),
        "t_max" => c.t_max = Some(value),
        "sample_dt" => c.sample_dt = Some(value),
        other => {
            return Err(Error::validation(
                "axis",
                format!("unknown axis `{other}`; expected one of {}", SWEEP_AXES.join(", ")),
            ))
        }
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub config: ScenarioConfig,
    pub output: ScenarioOutput,
}

/// Runs `template` once per value, in parallel. Results come back in input
/// order and do not depend on the number of worker threads.
pub fn sweep(template: &ScenarioConfig, axis: &str, values: &[f64]) -> Result<Vec<SweepPoint>> {
    let configs: Vec<ScenarioConfig> = values.iter().map(|v| apply_axis(template, axis, *v)).collect::<Result<_>>()?;
    let resolved: Vec<ResolvedScenario> = configs.iter().map(|c| c.resolve()).collect::<Result<_>>()?;
    let outputs: Vec<Result<ScenarioOutput>> = resolved.par_iter().map(run_resolved).collect();
    values
        .iter()
        .zip(configs)
        .zip(outputs)
        .map(|((v, config), o)| Ok(SweepPoint { value: *v, config, output: o? }))
        .collect()
}

/// One row per sweep point: the axis value then every summary number.
pub fn merge_sweep(axis: &str, points: &[SweepPoint]) -> Table {
    let mut keys: Vec<&String> = points.iter().flat_map(|p| p.output.summary.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut cols = vec![axis];
    cols.extend(keys.iter().map(|k| k.as_str()));
    let mut t = Table::new("sweep", &cols);
    for p in points {
        let mut row = vec![Cell::Num(p.value)];
        row.extend(keys.iter().map(|k| Cell::Num(p.output.summary.get(*k).copied().unwrap_or(f64::NAN))));
        t.push(row);
    }
    t
}
