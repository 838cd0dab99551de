//! Bundled (one double-trailer truck serving both stops) versus unbundled
//! (two single-trailer trucks, one stop each) delivery comparison.

mod render;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emissions::{load_emission_classes, EmissionRegistry};
use crate::engine::{run, LoadError, SimulationConfig, SimulationResult, World};
use crate::net_model::{set_edge_priority, NetError, Network, Route};
use crate::scenario_io::{
    parse_additional_file, parse_network_file, parse_routes_file, AdditionalFile, ParseError,
    RouteFile, StopSpec, VehicleClass, VehicleSpec, VehicleTypeSpec,
};

pub use render::{render_report, report_csv, svg_chart, timeseries_csv, travel_times_csv};

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("scenario config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("emission config: {0}")]
    Emissions(#[from] crate::emissions::EmissionError),
    #[error("unknown container stop `{0}`")]
    UnknownStop(String),
    #[error("scenario needs exactly 2 stops, got {0}")]
    StopCount(usize),
    #[error("no vehicle type of class `{0}`")]
    MissingVType(VehicleClass),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{0} did not finish: vehicles still on the road at t_max")]
    Incomplete(ScenarioLabel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ScenarioLabel {
    /// One truck with two trailers serving both stops.
    #[serde(rename = "scenario_I")]
    Bundled,
    /// Two single-trailer trucks, one stop each.
    #[serde(rename = "scenario_II")]
    Unbundled,
}

impl ScenarioLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioLabel::Bundled => "scenario_I",
            ScenarioLabel::Unbundled => "scenario_II",
        }
    }
}

impl fmt::Display for ScenarioLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// On-disk scenario config (TOML). Paths resolve relative to the file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// May be left out when the network is supplied separately.
    pub network: Option<PathBuf>,
    pub additional: PathBuf,
    pub vtypes: PathBuf,
    pub emissions: PathBuf,
    pub origin: String,
    pub destination: String,
    pub stops: Vec<String>,
    #[serde(default = "default_dwell")]
    pub dwell: f64,
    #[serde(default = "default_stagger")]
    pub stagger: f64,
    #[serde(default)]
    pub min_route_priority: i64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub priority: BTreeMap<String, i64>,
}

fn default_dwell() -> f64 {
    crate::scenario_io::DEFAULT_DWELL_S
}
fn default_stagger() -> f64 {
    10.0
}
fn default_dt() -> f64 {
    1.0
}
fn default_t_max() -> f64 {
    3600.0
}

/// Everything needed to build and run both scenarios.
#[derive(Debug, Clone)]
pub struct ScenarioSetup {
    /// Network with the configured priority overrides applied.
    pub network: Network,
    pub additional: AdditionalFile,
    pub single: VehicleTypeSpec,
    pub double: VehicleTypeSpec,
    pub registry: EmissionRegistry,
    pub origin: String,
    pub destination: String,
    pub stops: Vec<String>,
    pub dwell: f64,
    pub stagger: f64,
    pub min_route_priority: i64,
    pub sim: SimulationConfig,
}

fn read(path: &Path) -> Result<Vec<u8>, CompareError> {
    std::fs::read(path).map_err(|source| CompareError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl ScenarioSetup {
    /// Load a TOML scenario config. `network` replaces the config's own
    /// network path when given.
    pub fn from_config_file(path: &Path, network: Option<&Path>) -> Result<Self, CompareError> {
        let text = String::from_utf8(read(path)?)
            .map_err(|e| CompareError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: ScenarioConfig =
            toml::from_str(&text).map_err(|e| CompareError::Config(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(net) = network {
            cfg.network = Some(std::path::absolute(net).map_err(|source| CompareError::Io {
                path: net.to_path_buf(),
                source,
            })?);
        }
        Self::from_config(&cfg, base)
    }

    pub fn from_config(cfg: &ScenarioConfig, base: &Path) -> Result<Self, CompareError> {
        let parse_err = |p: &Path| {
            let p = p.to_path_buf();
            move |source| CompareError::Parse { path: p, source }
        };
        let net_path = base.join(
            cfg.network
                .as_ref()
                .ok_or_else(|| CompareError::Config("no network given".into()))?,
        );
        let mut network = parse_network_file(&read(&net_path)?).map_err(parse_err(&net_path))?;
        for (edge, prio) in &cfg.priority {
            network = set_edge_priority(&network, edge, *prio)?;
        }
        let add_path = base.join(&cfg.additional);
        let additional =
            parse_additional_file(&read(&add_path)?, &network).map_err(parse_err(&add_path))?;
        let vt_path = base.join(&cfg.vtypes);
        let vtypes = parse_routes_file(&read(&vt_path)?).map_err(parse_err(&vt_path))?;
        let registry = load_emission_classes(&read(&base.join(&cfg.emissions))?)?;
        if !(cfg.dt > 0.0) || !(cfg.t_max > 0.0) || cfg.stagger < 0.0 || cfg.dwell < 0.0 {
            return Err(CompareError::Config(
                "need dt > 0, t_max > 0, stagger >= 0, dwell >= 0".into(),
            ));
        }
        Self::new(
            network,
            additional,
            &vtypes,
            registry,
            ScenarioParams {
                origin: cfg.origin.clone(),
                destination: cfg.destination.clone(),
                stops: cfg.stops.clone(),
                dwell: cfg.dwell,
                stagger: cfg.stagger,
                min_route_priority: cfg.min_route_priority,
                sim: SimulationConfig {
                    dt: cfg.dt,
                    t_max: cfg.t_max,
                    seed: cfg.seed,
                    record_trajectories: true,
                },
            },
        )
    }

    pub fn new(
        network: Network,
        additional: AdditionalFile,
        vtypes: &RouteFile,
        registry: EmissionRegistry,
        params: ScenarioParams,
    ) -> Result<Self, CompareError> {
        let pick = |class: VehicleClass| {
            vtypes
                .vtypes
                .iter()
                .find(|v| v.vclass == class)
                .cloned()
                .ok_or(CompareError::MissingVType(class))
        };
        Ok(ScenarioSetup {
            single: pick(VehicleClass::TruckSingle)?,
            double: pick(VehicleClass::TruckDouble)?,
            network,
            additional,
            registry,
            origin: params.origin,
            destination: params.destination,
            stops: params.stops,
            dwell: params.dwell,
            stagger: params.stagger,
            min_route_priority: params.min_route_priority,
            sim: params.sim,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioParams {
    pub origin: String,
    pub destination: String,
    pub stops: Vec<String>,
    pub dwell: f64,
    pub stagger: f64,
    pub min_route_priority: i64,
    pub sim: SimulationConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDefinition {
    pub label: ScenarioLabel,
    pub vtypes: Vec<VehicleTypeSpec>,
    pub routes: Vec<Route>,
    pub vehicles: Vec<VehicleSpec>,
}

impl ScenarioDefinition {
    pub fn route_file(&self) -> RouteFile {
        RouteFile {
            vtypes: self.vtypes.clone(),
            vehicles: self.vehicles.clone(),
            routes: self.routes.clone(),
        }
    }

    pub fn world(&self, setup: &ScenarioSetup) -> Result<World, LoadError> {
        World::new(
            setup.network.clone(),
            self.route_file(),
            setup.additional.clone(),
            &setup.registry,
        )
    }
}

/// Route from `origin` through the edges of `stops` (in order) to
/// `destination`, shortest by length over edges the class may use.
fn route_through(
    setup: &ScenarioSetup,
    vtype: &VehicleTypeSpec,
    stops: &[&str],
) -> Result<Vec<String>, CompareError> {
    let usable = |e: &crate::net_model::Edge| {
        e.priority >= setup.min_route_priority
            && (e.allows(vtype.vclass.as_str()) || e.allows(&vtype.id))
    };
    let mut waypoints: Vec<&str> = vec![&setup.origin];
    for id in stops {
        let stop = setup
            .additional
            .stops
            .iter()
            .find(|s| s.id == *id)
            .ok_or_else(|| CompareError::UnknownStop(id.to_string()))?;
        waypoints.push(&stop.edge);
    }
    waypoints.push(&setup.destination);

    let mut route: Vec<String> = Vec::new();
    for leg in waypoints.windows(2) {
        let path = setup.network.shortest_path(leg[0], leg[1], usable)?;
        let skip = usize::from(!route.is_empty());
        route.extend(path.into_iter().skip(skip));
    }
    Ok(route)
}

/// Build the bundled or unbundled scenario. `depart_times` defaults to
/// `[0]` for the bundled truck and `[0, stagger]` for the two single trucks.
pub fn build_scenario(
    label: ScenarioLabel,
    setup: &ScenarioSetup,
    depart_times: Option<&[f64]>,
) -> Result<ScenarioDefinition, CompareError> {
    if setup.stops.len() != 2 {
        return Err(CompareError::StopCount(setup.stops.len()));
    }
    let stop = |id: &str| StopSpec {
        container_stop: id.to_string(),
        dwell: setup.dwell,
    };
    let (a, b) = (setup.stops[0].as_str(), setup.stops[1].as_str());
    match label {
        ScenarioLabel::Bundled => {
            let depart = depart_times.and_then(|d| d.first().copied()).unwrap_or(0.0);
            let route = Route {
                id: "route_bundled".into(),
                edges: route_through(setup, &setup.double, &[a, b])?,
            };
            Ok(ScenarioDefinition {
                label,
                vtypes: vec![setup.double.clone()],
                vehicles: vec![VehicleSpec {
                    id: "double".into(),
                    vtype: setup.double.id.clone(),
                    route: route.id.clone(),
                    depart,
                    stops: vec![stop(a), stop(b)],
                }],
                routes: vec![route],
            })
        }
        ScenarioLabel::Unbundled => {
            let default = [0.0, setup.stagger];
            let departs = depart_times.unwrap_or(&default);
            let mut routes = Vec::new();
            let mut vehicles = Vec::new();
            for (k, target) in [a, b].into_iter().enumerate() {
                let route = Route {
                    id: format!("route_single_{}", k + 1),
                    edges: route_through(setup, &setup.single, &[target])?,
                };
                vehicles.push(VehicleSpec {
                    id: format!("single_{}", k + 1),
                    vtype: setup.single.id.clone(),
                    route: route.id.clone(),
                    depart: departs.get(k).copied().unwrap_or(0.0),
                    stops: vec![stop(target)],
                });
                routes.push(route);
            }
            Ok(ScenarioDefinition {
                label,
                vtypes: vec![setup.single.clone()],
                routes,
                vehicles,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioTotals {
    pub co2_kg: f64,
    pub fuel_l: f64,
    /// Sum over vehicles.
    pub travel_time_s: f64,
    /// Longest single-vehicle trip.
    pub max_travel_time_s: f64,
    pub distance_m: f64,
}

impl ScenarioTotals {
    pub fn from_result(result: &SimulationResult) -> Self {
        let total = result.total();
        let times: Vec<f64> = result
            .vehicles
            .iter()
            .filter_map(|v| v.travel_time_s)
            .collect();
        ScenarioTotals {
            co2_kg: total.co2_mg * 1e-6,
            fuel_l: total.fuel_ml * 1e-3,
            travel_time_s: times.iter().sum(),
            max_travel_time_s: times.iter().copied().fold(0.0, f64::max),
            distance_m: result.vehicles.iter().map(|v| v.distance_m).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub bundled: ScenarioTotals,
    pub unbundled: ScenarioTotals,
    pub co2_reduction_pct: f64,
    pub fuel_reduction_pct: f64,
    /// Bundled total time minus the longest unbundled trip.
    pub time_delta_s: f64,
}

/// `100·(1 − bundled / unbundled)`, or 0 when there is nothing to reduce.
pub fn reduction_pct(bundled: f64, unbundled: f64) -> f64 {
    if unbundled > 0.0 {
        100.0 * (1.0 - bundled / unbundled)
    } else {
        0.0
    }
}

pub fn compare(
    bundled: &SimulationResult,
    unbundled: &SimulationResult,
) -> Result<ScenarioReport, CompareError> {
    for (label, r) in [(ScenarioLabel::Bundled, bundled), (ScenarioLabel::Unbundled, unbundled)] {
        if r.t_max_exceeded || r.vehicles.iter().any(|v| v.arrived_at.is_none()) {
            return Err(CompareError::Incomplete(label));
        }
    }
    let i = ScenarioTotals::from_result(bundled);
    let ii = ScenarioTotals::from_result(unbundled);
    Ok(ScenarioReport {
        bundled: i,
        unbundled: ii,
        co2_reduction_pct: reduction_pct(i.co2_kg, ii.co2_kg),
        fuel_reduction_pct: reduction_pct(i.fuel_l, ii.fuel_l),
        time_delta_s: i.travel_time_s - ii.max_travel_time_s,
    })
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub bundled: ScenarioDefinition,
    pub unbundled: ScenarioDefinition,
    pub bundled_result: SimulationResult,
    pub unbundled_result: SimulationResult,
    pub report: ScenarioReport,
}

/// Build both scenarios and run them side by side.
pub fn run_comparison(setup: &ScenarioSetup) -> Result<Comparison, CompareError> {
    let bundled = build_scenario(ScenarioLabel::Bundled, setup, None)?;
    let unbundled = build_scenario(ScenarioLabel::Unbundled, setup, None)?;
    let world_i = bundled.world(setup)?;
    let world_ii = unbundled.world(setup)?;
    let sim = setup.sim;
    let (bundled_result, unbundled_result) = std::thread::scope(|s| {
        let h = s.spawn(move || run(world_ii, sim));
        let r1 = run(world_i, sim);
        (r1, h.join().expect("simulation thread panicked"))
    });
    let report = compare(&bundled_result, &unbundled_result)?;
    Ok(Comparison {
        bundled,
        unbundled,
        bundled_result,
        unbundled_result,
        report,
    })
}
