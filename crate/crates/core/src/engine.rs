//! Time-discrete simulation loop.
//!
//! Each [`World::step`] runs the same phases in a fixed order:
//!
//! 1. insert vehicles whose departure time has come (unless the entry edge
//!    is blocked, in which case they wait for the next step);
//! 2. evaluate traffic-light programs at the current time;
//! 3. compute every vehicle's next speed against the pre-step snapshot;
//! 4. advance positions and dwell counters;
//! 5. sample emission rates and update accounts;
//! 6. feed the step's movements to the detectors;
//! 7. advance the clock and close finished detector windows.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::Serialize;
use thiserror::Error;

use crate::detectors::{detect_crossings, DetectorInterval, DetectorRuntime, Movement};
use crate::dynamics::{
    advance_position, constraints_ahead, next_speed, KraussParams, ObstacleKind, Occupant,
    ScheduledStop, Surroundings, VehicleState,
};
use crate::emissions::{
    load_emission_classes, CumulativeAccount, EmissionClass, EmissionError, EmissionRegistry,
};
use crate::net_model::{NetError, Network, Route};
use crate::scenario_io::{
    parse_additional_file, parse_network_file, parse_routes_file, AdditionalFile,
    ContainerStopSpec, ParseError, RouteFile, VehicleSpec, VehicleTypeSpec,
};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadError {
    #[error("network file: {0}")]
    Network(ParseError),
    #[error("route file: {0}")]
    Routes(ParseError),
    #[error("additional file: {0}")]
    Additional(ParseError),
    #[error("emission config: {0}")]
    Emissions(#[from] EmissionError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("duplicate vehicle type `{0}`")]
    DuplicateVType(String),
    #[error("duplicate route `{0}`")]
    DuplicateRoute(String),
    #[error("duplicate vehicle `{0}`")]
    DuplicateVehicle(String),
    #[error("vehicle `{vehicle}` references unknown vType `{vtype}`")]
    UnknownVType { vehicle: String, vtype: String },
    #[error("vehicle `{vehicle}` references unknown route `{route}`")]
    UnknownRoute { vehicle: String, route: String },
    #[error("vehicle `{vehicle}` references unknown container stop `{stop}`")]
    UnknownContainerStop { vehicle: String, stop: String },
    #[error("vehicle `{vehicle}`: stop `{stop}` is not on its route (in order)")]
    StopOffRoute { vehicle: String, stop: String },
    #[error("vType `{vtype}` uses unknown emission class `{class}`")]
    UnknownEmissionClass { vtype: String, class: String },
    #[error("vehicle `{vehicle}` ({vclass}) is not allowed on edge `{edge}`")]
    EdgeNotAllowed {
        vehicle: String,
        vclass: String,
        edge: String,
    },
    #[error("invalid vehicle: {0}")]
    InvalidVehicle(ParseError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub dt: f64,
    pub t_max: f64,
    pub seed: u64,
    pub record_trajectories: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            dt: 1.0,
            t_max: 3600.0,
            seed: 0,
            record_trajectories: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VehicleReport {
    pub id: String,
    pub vtype: String,
    pub departed_at: f64,
    pub arrived_at: Option<f64>,
    pub travel_time_s: Option<f64>,
    pub distance_m: f64,
    pub co2_mg: f64,
    pub fuel_ml: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    /// Start of the step.
    pub t: f64,
    pub vehicle: String,
    pub edge: String,
    pub offset: f64,
    pub speed: f64,
    pub accel: f64,
    pub co2_rate_mg_s: f64,
    pub fuel_rate_ml_s: f64,
    pub dwelling: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    /// Every vehicle that departed, sorted by id.
    pub vehicles: Vec<VehicleReport>,
    pub trajectories: Vec<TrajectoryRow>,
    /// Sorted by (detector id, begin); includes the final partial window.
    pub intervals: Vec<DetectorInterval>,
    pub t_end: f64,
    pub dt: f64,
    /// The run stopped at `t_max` with vehicles still pending or active.
    pub t_max_exceeded: bool,
}

impl SimulationResult {
    pub fn total(&self) -> CumulativeAccount {
        let mut acc = CumulativeAccount::default();
        for v in &self.vehicles {
            acc.add(&CumulativeAccount {
                co2_mg: v.co2_mg,
                fuel_ml: v.fuel_ml,
                duration_s: v.duration_s,
            });
        }
        acc
    }

    pub fn accounts_json(&self) -> String {
        accounts_json(&self.vehicles)
    }

    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("t,vehicle,edge,offset,speed,accel,co2_rate_mg_s,fuel_rate_ml_s\n");
        for r in &self.trajectories {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.t, r.vehicle, r.edge, r.offset, r.speed, r.accel, r.co2_rate_mg_s, r.fuel_rate_ml_s
            ));
        }
        out
    }
}

pub fn accounts_json(vehicles: &[VehicleReport]) -> String {
    serde_json::to_string_pretty(vehicles).expect("plain data serializes")
}

#[derive(Debug, Clone)]
struct Pending {
    seq: u64,
    depart: f64,
    state: VehicleState,
}

#[derive(Debug, Clone)]
struct Active {
    state: VehicleState,
    account: CumulativeAccount,
}

/// A loaded scenario plus its evolving simulation state.
#[derive(Debug, Clone)]
pub struct World {
    network: Network,
    vtypes: Vec<VehicleTypeSpec>,
    vtype_index: HashMap<String, usize>,
    classes: Vec<EmissionClass>,
    routes: BTreeMap<String, Route>,
    container_stops: HashMap<String, ContainerStopSpec>,
    detectors: Vec<DetectorRuntime>,
    pending: Vec<Pending>,
    active: Vec<Active>,
    finished: Vec<VehicleReport>,
    vehicle_ids: HashSet<String>,
    next_seq: u64,
    steps: u64,
    config: SimulationConfig,
    params: KraussParams,
    rng: Xoshiro256StarStar,
    signal_phases: Vec<usize>,
    trajectories: Vec<TrajectoryRow>,
}

/// Parse and cross-validate the four scenario inputs.
pub fn load_scenario(
    network: &[u8],
    routes: &[u8],
    additional: &[u8],
    emissions: &[u8],
) -> Result<World, LoadError> {
    let network = parse_network_file(network).map_err(LoadError::Network)?;
    let routes = parse_routes_file(routes).map_err(LoadError::Routes)?;
    let additional = parse_additional_file(additional, &network).map_err(LoadError::Additional)?;
    let registry = load_emission_classes(emissions)?;
    World::new(network, routes, additional, &registry)
}

impl World {
    pub fn new(
        network: Network,
        routes: RouteFile,
        additional: AdditionalFile,
        registry: &EmissionRegistry,
    ) -> Result<World, LoadError> {
        let mut world = World {
            network,
            vtypes: Vec::new(),
            vtype_index: HashMap::new(),
            classes: Vec::new(),
            routes: BTreeMap::new(),
            container_stops: HashMap::new(),
            detectors: Vec::new(),
            pending: Vec::new(),
            active: Vec::new(),
            finished: Vec::new(),
            vehicle_ids: HashSet::new(),
            next_seq: 0,
            steps: 0,
            config: SimulationConfig::default(),
            params: KraussParams::default(),
            rng: Xoshiro256StarStar::seed_from_u64(0),
            signal_phases: Vec::new(),
            trajectories: Vec::new(),
        };
        for vt in routes.vtypes {
            vt.validate().map_err(LoadError::Routes)?;
            let class = registry.get(&vt.emission_class).map_err(|_| {
                LoadError::UnknownEmissionClass {
                    vtype: vt.id.clone(),
                    class: vt.emission_class.clone(),
                }
            })?;
            if world.vtype_index.insert(vt.id.clone(), world.vtypes.len()).is_some() {
                return Err(LoadError::DuplicateVType(vt.id));
            }
            world.classes.push(class.clone());
            world.vtypes.push(vt);
        }
        for r in routes.routes {
            world.network.validate_route(&r)?;
            if world.routes.contains_key(&r.id) {
                return Err(LoadError::DuplicateRoute(r.id));
            }
            world.routes.insert(r.id.clone(), r);
        }
        for s in additional.stops {
            world.container_stops.insert(s.id.clone(), s);
        }
        let mut detectors: Vec<_> = additional.detectors.into_iter().map(DetectorRuntime::new).collect();
        detectors.sort_by(|a, b| a.spec.id.cmp(&b.spec.id));
        world.detectors = detectors;
        for v in routes.vehicles {
            world.add_vehicle(v)?;
        }
        Ok(world)
    }

    /// Apply run settings. Only meaningful before the first step.
    pub fn configure(&mut self, config: SimulationConfig) {
        self.config = config;
        self.rng = Xoshiro256StarStar::seed_from_u64(config.seed);
    }

    pub fn set_krauss(&mut self, params: KraussParams) {
        self.params = params;
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.config.dt
    }

    pub fn detector_ids(&self) -> Vec<String> {
        self.detectors.iter().map(|d| d.spec.id.clone()).collect()
    }

    pub fn container_stop_count(&self) -> usize {
        self.container_stops.len()
    }

    pub fn vtype(&self, id: &str) -> Option<&VehicleTypeSpec> {
        self.vtype_index.get(id).map(|&i| &self.vtypes[i])
    }

    pub fn route(&self, id: &str) -> Option<&Route> {
        self.routes.get(id)
    }

    /// Vehicles on the network plus those not yet inserted.
    pub fn min_expected_number(&self) -> usize {
        self.active.len() + self.pending.len()
    }

    pub fn active_vehicles(&self) -> impl Iterator<Item = &VehicleState> {
        self.active.iter().map(|a| &a.state)
    }

    /// Register a route (for vehicles added at runtime).
    pub fn add_route(&mut self, route: Route) -> Result<(), LoadError> {
        self.network.validate_route(&route)?;
        if self.routes.contains_key(&route.id) {
            return Err(LoadError::DuplicateRoute(route.id));
        }
        self.routes.insert(route.id.clone(), route);
        Ok(())
    }

    /// Schedule a vehicle for insertion once the clock reaches its departure.
    pub fn add_vehicle(&mut self, spec: VehicleSpec) -> Result<(), LoadError> {
        if !(spec.depart >= 0.0) {
            return Err(LoadError::InvalidVehicle(ParseError::NegativeDepart(spec.id)));
        }
        if self.vehicle_ids.contains(&spec.id) {
            return Err(LoadError::DuplicateVehicle(spec.id));
        }
        let vt_idx = *self
            .vtype_index
            .get(&spec.vtype)
            .ok_or_else(|| LoadError::UnknownVType {
                vehicle: spec.id.clone(),
                vtype: spec.vtype.clone(),
            })?;
        let route = self
            .routes
            .get(&spec.route)
            .ok_or_else(|| LoadError::UnknownRoute {
                vehicle: spec.id.clone(),
                route: spec.route.clone(),
            })?;
        let vclass = self.vtypes[vt_idx].vclass.as_str();
        let mut lengths = Vec::with_capacity(route.edges.len());
        for e in &route.edges {
            let edge = self.network.edge(e).ok_or_else(|| NetError::UnknownEdge(e.clone()))?;
            if !edge.allows(vclass) && !edge.allows(&self.vtypes[vt_idx].id) {
                return Err(LoadError::EdgeNotAllowed {
                    vehicle: spec.id.clone(),
                    vclass: vclass.to_string(),
                    edge: e.clone(),
                });
            }
            lengths.push(edge.length);
        }

        let mut stops = Vec::with_capacity(spec.stops.len());
        let mut cursor: Option<(usize, f64)> = None;
        for s in &spec.stops {
            if s.dwell < 0.0 {
                return Err(LoadError::InvalidVehicle(ParseError::NegativeDwell(spec.id.clone())));
            }
            let cs = self.container_stops.get(&s.container_stop).ok_or_else(|| {
                LoadError::UnknownContainerStop {
                    vehicle: spec.id.clone(),
                    stop: s.container_stop.clone(),
                }
            })?;
            let from = cursor.map(|c| c.0).unwrap_or(0);
            let idx = (from..route.edges.len())
                .find(|&j| {
                    route.edges[j] == cs.edge
                        && cursor.is_none_or(|(ci, cend)| j > ci || cs.start_pos >= cend)
                })
                .ok_or_else(|| LoadError::StopOffRoute {
                    vehicle: spec.id.clone(),
                    stop: cs.id.clone(),
                })?;
            cursor = Some((idx, cs.end_pos));
            stops.push(ScheduledStop {
                id: cs.id.clone(),
                route_index: idx,
                start_pos: cs.start_pos,
                end_pos: cs.end_pos,
                dwell: s.dwell,
            });
        }

        let state = VehicleState::new(spec.id.clone(), vt_idx, route.edges.clone(), lengths, stops);
        self.vehicle_ids.insert(spec.id);
        let pending = Pending {
            seq: self.next_seq,
            depart: spec.depart,
            state,
        };
        self.next_seq += 1;
        let at = self
            .pending
            .partition_point(|p| (p.depart, p.seq) <= (pending.depart, pending.seq));
        self.pending.insert(at, pending);
        Ok(())
    }

    fn occupants(&self) -> Vec<Occupant<'_>> {
        self.active
            .iter()
            .map(|a| Occupant {
                id: &a.state.id,
                edge: a.state.edge(),
                offset: a.state.offset,
                length: self.vtypes[a.state.vtype].length,
                speed: a.state.speed,
                decel: self.vtypes[a.state.vtype].decel,
            })
            .collect()
    }

    fn entry_blocked(&self, candidate: &VehicleState, t: f64) -> bool {
        let vt = &self.vtypes[candidate.vtype];
        let entry = candidate.edge();
        // a vehicle level with the entry point is not "ahead", so check
        // the entry edge directly
        let crowded = self.active.iter().any(|a| {
            a.state.edge() == entry
                && a.state.offset - self.vtypes[a.state.vtype].length - vt.min_gap < candidate.offset
        });
        if crowded {
            return true;
        }
        let env = Surroundings::new(&self.network, t, self.occupants());
        constraints_ahead(candidate, vt, &env, &self.params, self.config.dt)
            .iter()
            .any(|o| o.kind == ObstacleKind::Vehicle && o.gap < 0.0)
    }

    fn insert_departures(&mut self, t: f64) {
        let mut i = 0;
        while i < self.pending.len() {
            if self.pending[i].depart > t + EPS {
                break;
            }
            if self.entry_blocked(&self.pending[i].state, t) {
                i += 1;
                continue;
            }
            let mut p = self.pending.remove(i);
            p.state.departed_at = Some(t);
            self.active.push(Active {
                state: p.state,
                account: CumulativeAccount::default(),
            });
        }
    }

    /// Advance the world by one time step.
    pub fn step(&mut self) {
        let t = self.time();
        let dt = self.config.dt;
        let t_next = (self.steps + 1) as f64 * dt;

        // (1)
        self.insert_departures(t);

        // (2)
        self.signal_phases = self.network.programs().iter().map(|p| p.phase_at(t)).collect();

        // (3)
        let noises: Vec<f64> = self.active.iter().map(|_| self.rng.gen::<f64>()).collect();
        let speeds: Vec<f64> = {
            let env = Surroundings::new(&self.network, t, self.occupants());
            self.active
                .iter()
                .zip(&noises)
                .map(|(a, &noise)| {
                    let vt = &self.vtypes[a.state.vtype];
                    let params = KraussParams {
                        sigma: vt.sigma,
                        ..self.params
                    };
                    next_speed(&a.state, vt, &env, &params, dt, noise)
                })
                .collect()
        };

        // (4) + (5)
        let mut prev_keys = Vec::with_capacity(self.active.len());
        let mut rates = Vec::with_capacity(self.active.len());
        for (a, v_next) in self.active.iter_mut().zip(speeds) {
            prev_keys.push(a.state.route_key());
            let decel = self.vtypes[a.state.vtype].decel;
            advance_position(&mut a.state, v_next, dt, decel, t_next);
            let (co2, fuel) =
                self.classes[a.state.vtype].sample(a.state.speed, a.state.accel_applied);
            a.account.account_step(co2, fuel, dt);
            rates.push((co2, fuel));
            if self.config.record_trajectories {
                self.trajectories.push(TrajectoryRow {
                    t,
                    vehicle: a.state.id.clone(),
                    edge: a.state.edge().to_string(),
                    offset: a.state.offset,
                    speed: a.state.speed,
                    accel: a.state.accel_applied,
                    co2_rate_mg_s: co2,
                    fuel_rate_ml_s: fuel,
                    dwelling: a.state.is_dwelling(),
                });
            }
        }

        // (6)
        if !self.detectors.is_empty() {
            let moves: Vec<Movement> = self
                .active
                .iter()
                .zip(&prev_keys)
                .zip(&rates)
                .map(|((a, &prev), &(co2, fuel))| Movement {
                    vehicle: &a.state.id,
                    route: &a.state.route,
                    prev,
                    next: a.state.route_key(),
                    speed: a.state.speed,
                    co2_rate: co2,
                    fuel_rate: fuel,
                })
                .collect();
            let found: Vec<_> = self
                .detectors
                .iter()
                .map(|d| detect_crossings(&d.spec, t, &moves))
                .collect();
            for (d, crossings) in self.detectors.iter_mut().zip(found) {
                d.record(crossings);
            }
        }

        // (7)
        self.steps += 1;
        for d in &mut self.detectors {
            while d.flush_interval(t_next, dt).is_some() {}
        }
        let mut still = Vec::with_capacity(self.active.len());
        for a in self.active.drain(..) {
            if a.state.arrived_at.is_some() {
                self.finished.push(report(&a, &self.vtypes));
            } else {
                still.push(a);
            }
        }
        self.active = still;
    }

    /// Closed detector windows, plus the open one when `include_partial`.
    pub fn intervals(&self, include_partial: bool) -> Vec<DetectorInterval> {
        let now = self.time();
        let mut out = Vec::new();
        for d in &self.detectors {
            out.extend(d.emitted.iter().cloned());
            if include_partial {
                out.extend(d.partial_interval(now, self.config.dt));
            }
        }
        out
    }

    pub fn detector_intervals(&self, id: &str) -> Option<Vec<DetectorInterval>> {
        let d = self.detectors.iter().find(|d| d.spec.id == id)?;
        let mut out = d.emitted.clone();
        if self.min_expected_number() == 0 {
            out.extend(d.partial_interval(self.time(), self.config.dt));
        }
        Some(out)
    }

    /// Reports for every departed vehicle, sorted by id.
    pub fn vehicle_reports(&self) -> Vec<VehicleReport> {
        let mut out: Vec<VehicleReport> = self.finished.clone();
        out.extend(self.active.iter().map(|a| report(a, &self.vtypes)));
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    pub fn result(&self) -> SimulationResult {
        SimulationResult {
            vehicles: self.vehicle_reports(),
            trajectories: self.trajectories.clone(),
            intervals: self.intervals(true),
            t_end: self.time(),
            dt: self.config.dt,
            t_max_exceeded: self.min_expected_number() > 0,
        }
    }
}

fn report(a: &Active, vtypes: &[VehicleTypeSpec]) -> VehicleReport {
    let departed = a.state.departed_at.unwrap_or(0.0);
    VehicleReport {
        id: a.state.id.clone(),
        vtype: vtypes[a.state.vtype].id.clone(),
        departed_at: departed,
        arrived_at: a.state.arrived_at,
        travel_time_s: a.state.arrived_at.map(|t| t - departed),
        distance_m: a.state.odometer,
        co2_mg: a.account.co2_mg,
        fuel_ml: a.account.fuel_ml,
        duration_s: a.account.duration_s,
    }
}

/// Step `world` until no vehicle is active or pending, or `t_max` is hit.
pub fn run(mut world: World, config: SimulationConfig) -> SimulationResult {
    world.configure(config);
    while world.min_expected_number() > 0 && world.time() < config.t_max - EPS {
        world.step();
    }
    world.result()
}
