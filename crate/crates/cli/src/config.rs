//! Scenario file schema and validation.
//!
//! A scenario is one JSON object. Every section except the top-level scalars
//! is optional; a subcommand fails validation when the section it needs is
//! absent. Field paths in violations use dots, e.g. `budget.antenna.vswr`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use swarmlink::channel::{FadingParams, LinkParams};
use swarmlink::dynamics::UavParams;
use swarmlink::formation::{LeaderPath, MovementGains, RoleGraph};
use swarmlink::linkbudget::{
    default_distance_link, AntennaSpec, BerFormula, BudgetConfig, BudgetLineItem, BudgetMode, PrintedValues,
    DEFAULT_DATA_RATE, DEFAULT_NOISE_POWER_DBM,
};
use swarmlink::network::{ApfParams, ObstacleField, TopologyKind};
use swarmlink::swarm_opt::{GwoConfig, PsoConfig, WpaConfig};
use swarmlink::wind::{TurbulenceSpec, WindShearCoeff};
use swarmlink::Vec3;

use crate::error::CliError;
use crate::output::Artifact;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Required whenever a stochastic section (wind, optimize, channel,
    /// network with generated positions) is present.
    #[serde(default)]
    pub seed: Option<u64>,
    /// s
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// s
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default)]
    pub uavs: Vec<UavEntry>,
    #[serde(default)]
    pub dynamics: Option<DynamicsSection>,
    #[serde(default)]
    pub wind: Option<WindSection>,
    #[serde(default)]
    pub optimize: Option<OptimizeSection>,
    #[serde(default)]
    pub formation: Option<FormationSection>,
    #[serde(default)]
    pub channel: Option<ChannelSection>,
    #[serde(default)]
    pub budget: Option<BudgetSection>,
    #[serde(default)]
    pub berdist: Option<BerDistSection>,
    #[serde(default)]
    pub network: Option<NetworkSection>,
    /// Per-artifact path overrides; relative paths land in the output dir.
    #[serde(default)]
    pub outputs: Vec<OutputEntry>,
}

fn default_dt() -> f64 {
    0.01
}

fn default_duration() -> f64 {
    10.0
}

/// One airframe: physical constants, initial state and an optional hold
/// point for the `dynamics` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavEntry {
    pub id: usize,
    #[serde(default)]
    pub params: UavParams,
    #[serde(default = "Vec3::zeros")]
    pub position: Vec3,
    #[serde(default = "Vec3::zeros")]
    pub velocity: Vec3,
    /// rad
    #[serde(default)]
    pub heading: f64,
    /// Defaults to the initial position (hover in place).
    #[serde(default)]
    pub target: Option<Vec3>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    #[serde(default)]
    pub gains: MovementGains,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindSection {
    pub turbulence: TurbulenceSpec,
    /// m between series samples.
    #[serde(default = "default_spacing")]
    pub sample_spacing: f64,
    /// Power of two.
    #[serde(default = "default_wind_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub psd: PsdGrid,
    #[serde(default)]
    pub shear: Option<ShearSection>,
    #[serde(default)]
    pub drag: Option<DragSection>,
}

fn default_spacing() -> f64 {
    10.0
}

fn default_wind_samples() -> usize {
    4096
}

/// Log-spaced spatial frequencies for the PSD curves, rad/m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsdGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
}

impl Default for PsdGrid {
    fn default() -> Self {
        Self {
            omega_min: 1e-4,
            omega_max: 1.0,
            points: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShearSection {
    pub coeff: WindShearCoeff,
    /// Mean-wind change to split, m/s.
    pub delta_vw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DragSection {
    #[serde(default = "default_air_density")]
    pub air_density: f64,
    pub airflow_speed: f64,
    pub drag_coeff: f64,
    pub windward_area: f64,
}

fn default_air_density() -> f64 {
    1.225
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pso,
    Gwo,
    Wpa,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Pso => "pso",
            Algorithm::Gwo => "gwo",
            Algorithm::Wpa => "wpa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    Sphere,
    Rastrigin,
}

/// Optimizer runs on a benchmark. The `seed` inside each algorithm block is
/// ignored: every algorithm draws from `derive_seed(seed, "<algorithm>")`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    #[serde(default = "all_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_benchmark")]
    pub function: Benchmark,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_lower")]
    pub lower: f64,
    #[serde(default = "default_upper")]
    pub upper: f64,
    #[serde(default)]
    pub pso: PsoConfig,
    #[serde(default)]
    pub gwo: GwoConfig,
    #[serde(default)]
    pub wpa: WpaConfig,
}

fn all_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Pso, Algorithm::Gwo, Algorithm::Wpa]
}

fn default_benchmark() -> Benchmark {
    Benchmark::Sphere
}

fn default_dim() -> usize {
    10
}

fn default_lower() -> f64 {
    -5.0
}

fn default_upper() -> f64 {
    5.0
}

/// Leader-follower flight. A follower with a `uavs` entry of the same id
/// starts from that state; one without starts at rest on its first target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormationSection {
    pub roles: RoleGraph,
    pub leader_path: LeaderPath,
    #[serde(default)]
    pub gains: MovementGains,
    /// Shared by every follower.
    #[serde(default)]
    pub params: UavParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub link: LinkParams,
    #[serde(default)]
    pub sweep: DistanceGrid,
    /// Channels for the constellation and BER outputs. Their `seed` fields
    /// are ignored in favour of seeds derived from the top-level seed.
    #[serde(default = "default_fadings")]
    pub fading: Vec<FadingParams>,
    #[serde(default = "default_ebn0")]
    pub ebn0_db: Vec<f64>,
    #[serde(default = "default_n_bits")]
    pub n_bits: u64,
    #[serde(default)]
    pub constellation: ConstellationSection,
}

fn default_fadings() -> Vec<FadingParams> {
    vec![
        FadingParams::awgn(0),
        FadingParams::rician(10.0, 0),
        FadingParams::rayleigh(0),
    ]
}

fn default_ebn0() -> Vec<f64> {
    vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
}

fn default_n_bits() -> u64 {
    200_000
}

/// Log-spaced distances, m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistanceGrid {
    pub d_min: f64,
    pub d_max: f64,
    pub points: usize,
}

impl Default for DistanceGrid {
    fn default() -> Self {
        Self {
            d_min: 1.0,
            d_max: 10_000.0,
            points: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstellationSection {
    pub ebn0_db: f64,
    pub n_symbols: usize,
}

impl Default for ConstellationSection {
    fn default() -> Self {
        Self {
            ebn0_db: 10.0,
            n_symbols: 1000,
        }
    }
}

/// Link budget. With `reference: true` every omitted part comes from the
/// built-in worked example; otherwise all parts are required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    #[serde(default)]
    pub reference: bool,
    #[serde(default = "default_mode")]
    pub mode: BudgetMode,
    #[serde(default)]
    pub antenna: Option<AntennaSpec>,
    #[serde(default)]
    pub tx_items: Option<Vec<BudgetLineItem>>,
    #[serde(default)]
    pub loss_items: Option<Vec<BudgetLineItem>>,
    #[serde(default)]
    pub rx_items: Option<Vec<BudgetLineItem>>,
    #[serde(default)]
    pub interference_margin_db: Option<f64>,
    #[serde(default)]
    pub noise_bandwidth: Option<f64>,
    #[serde(default)]
    pub rx_threshold_db: Option<f64>,
    #[serde(default)]
    pub printed: Option<PrintedValues>,
}

fn default_mode() -> BudgetMode {
    BudgetMode::PaperLiteral
}

impl BudgetSection {
    /// Resolves the section into a full budget config, listing every missing
    /// part.
    pub fn resolve(&self) -> Result<BudgetConfig, Vec<String>> {
        let base = self.reference.then(BudgetConfig::reference);
        let mut missing = Vec::new();
        macro_rules! take {
            ($field:ident) => {
                match (&self.$field, &base) {
                    (Some(v), _) => Some(v.clone()),
                    (None, Some(b)) => Some(b.$field.clone()),
                    (None, None) => {
                        missing.push(format!(
                            "budget.{}: required unless reference is true",
                            stringify!($field)
                        ));
                        None
                    }
                }
            };
        }
        let antenna = take!(antenna);
        let tx_items = take!(tx_items);
        let loss_items = take!(loss_items);
        let rx_items = take!(rx_items);
        let noise_bandwidth = take!(noise_bandwidth);
        let rx_threshold_db = take!(rx_threshold_db);
        let interference_margin_db = self
            .interference_margin_db
            .or(base.as_ref().map(|b| b.interference_margin_db))
            .unwrap_or(0.0);
        let printed = self
            .printed
            .clone()
            .or(base.as_ref().map(|b| b.printed.clone()))
            .unwrap_or_default();
        if !missing.is_empty() {
            return Err(missing);
        }
        Ok(BudgetConfig {
            antenna: antenna.expect("checked"),
            tx_items: tx_items.expect("checked"),
            loss_items: loss_items.expect("checked"),
            rx_items: rx_items.expect("checked"),
            interference_margin_db,
            noise_bandwidth: noise_bandwidth.expect("checked"),
            rx_threshold_db: rx_threshold_db.expect("checked"),
            printed,
        })
    }
}

/// BER against distance over a free-space link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerDistSection {
    #[serde(default = "default_distance_link")]
    pub link: LinkParams,
    /// bit/s
    #[serde(default = "default_data_rate")]
    pub data_rate: f64,
    #[serde(default = "default_noise_power")]
    pub noise_power_dbm: f64,
    #[serde(default = "default_berdist_grid")]
    pub distances: DistanceGrid,
    #[serde(default = "default_formula")]
    pub formula: BerFormula,
}

fn default_data_rate() -> f64 {
    DEFAULT_DATA_RATE
}

fn default_noise_power() -> f64 {
    DEFAULT_NOISE_POWER_DBM
}

fn default_berdist_grid() -> DistanceGrid {
    DistanceGrid {
        d_min: 100.0,
        d_max: 10_000.0,
        points: 81,
    }
}

fn default_formula() -> BerFormula {
    BerFormula::Standard
}

/// Swarm topology, routing-vs-flooding comparison and an optional APF run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub kind: TopologyKind,
    pub n_uavs: usize,
    #[serde(default = "one")]
    pub n_groups: usize,
    /// m
    pub link_range: f64,
    /// Ground station first. When absent, UAVs are drawn uniformly in a box
    /// of half-width `area` above the ground station.
    #[serde(default)]
    pub positions: Option<Vec<Vec3>>,
    #[serde(default = "default_area")]
    pub area: f64,
    #[serde(default = "one")]
    pub src: usize,
    /// Defaults to the last UAV.
    #[serde(default)]
    pub dst: Option<usize>,
    /// s
    #[serde(default = "default_hop_delay")]
    pub per_hop_delay: f64,
    #[serde(default)]
    pub apf: Option<ApfSection>,
}

fn one() -> usize {
    1
}

fn default_area() -> f64 {
    100.0
}

fn default_hop_delay() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApfSection {
    pub field: ObstacleField,
    pub start: Vec3,
    #[serde(default)]
    pub params: ApfParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputEntry {
    /// Artifact key, e.g. `ber_awgn` or `budget_report`.
    pub what: String,
    pub path: PathBuf,
    pub format: String,
}

/// Sections a subcommand needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    Uavs,
    Wind,
    Optimize,
    Formation,
    Channel,
    Budget,
    BerDist,
    Network,
}

pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn check(v: &mut Vec<String>, field: &str, r: swarmlink::Result<()>) {
    if let Err(e) = r {
        let msg = match e {
            swarmlink::Error::Domain(m) | swarmlink::Error::Structural(m) | swarmlink::Error::Config(m) => m,
            other => other.to_string(),
        };
        v.push(format!("{field}: {msg}"));
    }
}

fn positive(v: &mut Vec<String>, field: &str, x: f64) {
    if !(x > 0.0 && x.is_finite()) {
        v.push(format!("{field}: must be > 0 (got {x})"));
    }
}

fn grid(v: &mut Vec<String>, field: &str, lo: f64, hi: f64, points: usize) {
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        v.push(format!("{field}: 0 < min < max (got {lo}, {hi})"));
    }
    if points < 2 {
        v.push(format!("{field}.points: must be >= 2 (got {points})"));
    }
}

impl ScenarioConfig {
    /// Every violated constraint across the whole file, in schema order.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        positive(&mut v, "dt", self.dt);
        positive(&mut v, "duration", self.duration);

        let stochastic = self.wind.is_some()
            || self.optimize.is_some()
            || self.channel.is_some()
            || self.network.as_ref().is_some_and(|n| n.positions.is_none());
        if stochastic && self.seed.is_none() {
            v.push("seed: required when wind, optimize, channel or generated network positions are configured".into());
        }

        let mut ids = BTreeSet::new();
        for (i, u) in self.uavs.iter().enumerate() {
            if !ids.insert(u.id) {
                v.push(format!("uavs[{i}].id: duplicate id {}", u.id));
            }
            check(&mut v, &format!("uavs[{i}].params"), u.params.validate());
        }
        if let Some(d) = &self.dynamics {
            check(&mut v, "dynamics.gains", d.gains.validate());
        }
        if let Some(w) = &self.wind {
            self.wind_violations(w, &mut v);
        }
        if let Some(o) = &self.optimize {
            optimize_violations(o, &mut v);
        }
        if let Some(f) = &self.formation {
            check(&mut v, "formation.roles", f.roles.validate());
            check(&mut v, "formation.leader_path", f.leader_path.validate());
            check(&mut v, "formation.gains", f.gains.validate());
            check(&mut v, "formation.params", f.params.validate());
        }
        if let Some(c) = &self.channel {
            check(&mut v, "channel.link", c.link.validate());
            if !(c.link.tx_height > 0.0 && c.link.rx_height > 0.0) {
                v.push("channel.link: tx_height > 0 and rx_height > 0 for the two-ray sweep".into());
            }
            grid(&mut v, "channel.sweep", c.sweep.d_min, c.sweep.d_max, c.sweep.points);
            for (i, f) in c.fading.iter().enumerate() {
                check(&mut v, &format!("channel.fading[{i}]"), f.validate());
            }
            let kinds: BTreeSet<_> = c.fading.iter().map(|f| format!("{:?}", f.kind)).collect();
            if kinds.len() != c.fading.len() {
                v.push("channel.fading: each fading kind at most once".into());
            }
            if c.n_bits % 2 != 0 || c.n_bits < swarmlink::channel::MIN_MONTE_CARLO_BITS {
                v.push(format!(
                    "channel.n_bits: even and >= {} (got {})",
                    swarmlink::channel::MIN_MONTE_CARLO_BITS,
                    c.n_bits
                ));
            }
            if c.ebn0_db.iter().any(|x| !x.is_finite()) {
                v.push("channel.ebn0_db: values finite".into());
            }
            if c.constellation.n_symbols == 0 {
                v.push("channel.constellation.n_symbols: must be >= 1".into());
            }
        }
        if let Some(b) = &self.budget {
            match b.resolve() {
                Err(missing) => v.extend(missing),
                Ok(cfg) => {
                    v.extend(
                        cfg.antenna
                            .violations()
                            .into_iter()
                            .map(|m| format!("budget.antenna.{m}")),
                    );
                    let rest: Vec<String> = cfg
                        .violations()
                        .into_iter()
                        .skip(cfg.antenna.violations().len())
                        .collect();
                    v.extend(rest.into_iter().map(|m| format!("budget.{m}")));
                }
            }
        }
        if let Some(b) = &self.berdist {
            check(&mut v, "berdist.link", b.link.validate());
            positive(&mut v, "berdist.data_rate", b.data_rate);
            if !b.noise_power_dbm.is_finite() {
                v.push("berdist.noise_power_dbm: must be finite".into());
            }
            grid(
                &mut v,
                "berdist.distances",
                b.distances.d_min,
                b.distances.d_max,
                b.distances.points,
            );
        }
        if let Some(n) = &self.network {
            network_violations(n, &mut v);
        }
        for (i, o) in self.outputs.iter().enumerate() {
            match Artifact::from_key(&o.what) {
                None => v.push(format!("outputs[{i}].what: unknown artifact '{}'", o.what)),
                Some(a) if a.format() != o.format => v.push(format!(
                    "outputs[{i}].format: {} is written as {} (got {})",
                    o.what,
                    a.format(),
                    o.format
                )),
                Some(_) => {}
            }
        }
        v
    }

    fn wind_violations(&self, w: &WindSection, v: &mut Vec<String>) {
        check(v, "wind.turbulence", w.turbulence.validate());
        positive(v, "wind.sample_spacing", w.sample_spacing);
        if w.n_samples < 2 || !w.n_samples.is_power_of_two() {
            v.push(format!("wind.n_samples: power of two >= 2 (got {})", w.n_samples));
        }
        grid(v, "wind.psd", w.psd.omega_min, w.psd.omega_max, w.psd.points);
        if let Some(s) = &w.shear {
            check(v, "wind.shear.coeff", s.coeff.validate());
            if !s.delta_vw.is_finite() {
                v.push("wind.shear.delta_vw: must be finite".into());
            }
        }
        if let Some(d) = &w.drag {
            for (name, x) in [
                ("air_density", d.air_density),
                ("drag_coeff", d.drag_coeff),
                ("windward_area", d.windward_area),
            ] {
                if !(x >= 0.0 && x.is_finite()) {
                    v.push(format!("wind.drag.{name}: must be >= 0 (got {x})"));
                }
            }
        }
    }

    /// Violations plus the sections `req` needs.
    pub fn violations_for(&self, req: Requirement) -> Vec<String> {
        let mut v = self.violations();
        let missing = match req {
            Requirement::Uavs => self.uavs.is_empty().then_some("uavs: at least one UAV is required"),
            Requirement::Wind => self.wind.is_none().then_some("wind: section is required"),
            Requirement::Optimize => self.optimize.is_none().then_some("optimize: section is required"),
            Requirement::Formation => self.formation.is_none().then_some("formation: section is required"),
            Requirement::Channel => self.channel.is_none().then_some("channel: section is required"),
            Requirement::Budget => self.budget.is_none().then_some("budget: section is required"),
            Requirement::BerDist => self.berdist.is_none().then_some("berdist: section is required"),
            Requirement::Network => self.network.is_none().then_some("network: section is required"),
        };
        v.extend(missing.map(String::from));
        v
    }
}

fn optimize_violations(o: &OptimizeSection, v: &mut Vec<String>) {
    if o.algorithms.is_empty() {
        v.push("optimize.algorithms: at least one algorithm".into());
    }
    if o.dim == 0 {
        v.push("optimize.dim: must be >= 1".into());
    }
    if !(o.lower < o.upper && o.lower.is_finite() && o.upper.is_finite()) {
        v.push(format!("optimize.lower: lower < upper (got {}, {})", o.lower, o.upper));
    }
    check(v, "optimize.pso", o.pso.validate());
    check(v, "optimize.gwo", o.gwo.validate());
    check(v, "optimize.wpa", o.wpa.validate());
}

fn network_violations(n: &NetworkSection, v: &mut Vec<String>) {
    if n.n_uavs == 0 {
        v.push("network.n_uavs: must be >= 1".into());
    }
    if n.n_groups == 0 || n.n_groups > n.n_uavs.max(1) {
        v.push(format!(
            "network.n_groups: 1 <= n_groups <= n_uavs (got {})",
            n.n_groups
        ));
    }
    if matches!(n.kind, TopologyKind::Star | TopologyKind::SingleGroupAdHoc) && n.n_groups != 1 {
        v.push(format!("network.n_groups: {:?} has exactly one group", n.kind));
    }
    positive(v, "network.link_range", n.link_range);
    positive(v, "network.area", n.area);
    positive(v, "network.per_hop_delay", n.per_hop_delay);
    if let Some(p) = &n.positions {
        if p.len() != n.n_uavs + 1 {
            v.push(format!(
                "network.positions: n_uavs + 1 entries, ground station first (got {})",
                p.len()
            ));
        }
    }
    let nodes = n.n_uavs + 1;
    if n.src >= nodes {
        v.push(format!("network.src: node id < {nodes} (got {})", n.src));
    }
    if let Some(d) = n.dst {
        if d >= nodes {
            v.push(format!("network.dst: node id < {nodes} (got {d})"));
        }
    }
    if let Some(a) = &n.apf {
        check(v, "network.apf.field", a.field.validate());
        let p = &a.params;
        if !(p.step > 0.0 && p.influence_radius > 0.0 && p.attract_gain > 0.0 && p.repel_gain >= 0.0) {
            v.push("network.apf.params: gains, step and influence radius must be positive".into());
        }
        if a.field.min_clearance(&a.start) <= 0.0 {
            v.push("network.apf.start: must lie outside every obstacle".into());
        }
    }
}
