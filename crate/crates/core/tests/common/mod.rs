//! Shared generators and scenario builders for the integration tests.

#![allow(dead_code)]

use bundlesim::detectors::DetectorInterval;
use bundlesim::emissions::{load_emission_classes, EmissionRegistry};
use bundlesim::net_model::{
    build_network, Edge, LightState, Network, Node, Phase, Route, TrafficLightProgram,
};
use bundlesim::scenario_io::{
    AdditionalFile, ContainerStopSpec, DetectorSpec, RouteFile, StopSpec, VehicleClass,
    VehicleSpec, VehicleTypeSpec,
};
use bundlesim::World;
use proptest::prelude::*;

/// Linear class with a constant term plus a speed term, in mg/s and ml/s.
pub const TOY_EMISSIONS: &str = "\
class toy
co2 1000 0 0 100 0 0
fuel 0.5 0 0 0.05 0 0
";

pub fn toy_registry() -> EmissionRegistry {
    load_emission_classes(TOY_EMISSIONS.as_bytes()).unwrap()
}

pub fn vtype(id: &str, max_speed: f64, accel: f64, decel: f64, length: f64) -> VehicleTypeSpec {
    VehicleTypeSpec {
        id: id.into(),
        vclass: VehicleClass::TruckSingle,
        max_speed,
        min_speed: max_speed.min(1.0),
        accel,
        decel,
        length,
        min_gap: 2.5,
        sigma: 0.0,
        emission_class: "toy".into(),
    }
}

/// Chain of nodes `n0 → n1 → …` joined by edges `e0, e1, …`.
pub fn line_network(lengths: &[f64], speed: f64) -> Network {
    let nodes = (0..=lengths.len()).map(|i| Node::plain(format!("n{i}"))).collect();
    let edges = lengths
        .iter()
        .enumerate()
        .map(|(i, &l)| Edge::new(format!("e{i}"), format!("n{i}"), format!("n{}", i + 1), l, speed, 10))
        .collect();
    build_network(nodes, edges, vec![]).unwrap()
}

pub fn route(id: &str, edges: &[&str]) -> Route {
    Route {
        id: id.into(),
        edges: edges.iter().map(|e| e.to_string()).collect(),
    }
}

pub fn vehicle(id: &str, vtype: &str, route: &str, depart: f64) -> VehicleSpec {
    VehicleSpec {
        id: id.into(),
        vtype: vtype.into(),
        route: route.into(),
        depart,
        stops: vec![],
    }
}

pub fn world(
    network: Network,
    vtypes: Vec<VehicleTypeSpec>,
    routes: Vec<Route>,
    vehicles: Vec<VehicleSpec>,
    additional: AdditionalFile,
) -> World {
    World::new(network, RouteFile { vtypes, vehicles, routes }, additional, &toy_registry()).unwrap()
}

// ---- file-content strategies ----

/// Identifier body: no whitespace (ids appear in space-separated lists),
/// with XML-special and non-ASCII characters to exercise escaping.
fn suffix() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_.:#/&<>\"'äß-]{0,5}"
}

fn unique_id(prefix: &str, i: usize, s: &str) -> String {
    format!("{prefix}{i}~{s}")
}

fn light_state(k: u8) -> LightState {
    match k % 3 {
        0 => LightState::Green,
        1 => LightState::Yellow,
        _ => LightState::Red,
    }
}

type NodeSeed = (bool, String, Option<f64>, Option<f64>);
type EdgeSeed = (usize, usize, f64, f64, i64, Vec<bool>, String);
type ProgramSeed = (f64, Vec<(f64, Vec<u8>)>);

fn assemble(nodes: Vec<NodeSeed>, edges: Vec<EdgeSeed>, programs: Vec<ProgramSeed>) -> Network {
    let n = nodes.len();
    let node_ids: Vec<String> = nodes.iter().enumerate().map(|(i, s)| unique_id("n", i, &s.1)).collect();
    let tls_ids: Vec<String> = nodes.iter().enumerate().map(|(i, s)| unique_id("tl", i, &s.1)).collect();
    let built_nodes: Vec<Node> = nodes
        .iter()
        .enumerate()
        .map(|(i, (tl, _, x, y))| {
            let mut node = if *tl {
                Node::traffic_light(node_ids[i].clone(), tls_ids[i].clone())
            } else {
                Node::plain(node_ids[i].clone())
            };
            node.x = *x;
            node.y = *y;
            node
        })
        .collect();
    const CLASSES: [&str; 3] = ["truck_single", "truck_double", "passenger"];
    let mut to_node = Vec::new();
    let built_edges: Vec<Edge> = edges
        .iter()
        .enumerate()
        .map(|(k, (from, hop, length, speed, prio, allow, s))| {
            let to = (from + hop) % n;
            to_node.push(to);
            let mut e = Edge::new(unique_id("e", k, s), node_ids[*from].clone(), node_ids[to].clone(), *length, *speed, *prio);
            e.allowed = CLASSES.iter().zip(allow).filter(|(_, &a)| a).map(|(c, _)| c.to_string()).collect();
            e
        })
        .collect();
    let built_programs: Vec<TrafficLightProgram> = nodes
        .iter()
        .enumerate()
        .filter(|(_, s)| s.0)
        .map(|(i, _)| {
            let controlled: Vec<String> = built_edges
                .iter()
                .zip(&to_node)
                .filter(|(_, &t)| t == i)
                .map(|(e, _)| e.id.clone())
                .collect();
            let (offset, phases) = &programs[i];
            TrafficLightProgram {
                id: tls_ids[i].clone(),
                offset: *offset,
                phases: phases
                    .iter()
                    .map(|(d, ks)| Phase {
                        duration: *d,
                        states: (0..controlled.len()).map(|j| light_state(ks[j % ks.len()])).collect(),
                    })
                    .collect(),
                controlled,
            }
        })
        .collect();
    build_network(built_nodes, built_edges, built_programs).expect("generated network is valid")
}

/// Random valid networks, traffic-light programs included.
pub fn network() -> impl Strategy<Value = Network> {
    (2usize..7, 1usize..10).prop_flat_map(|(n, m)| {
        let nodes = prop::collection::vec(
            (any::<bool>(), suffix(), prop::option::of(-1e6..1e6f64), prop::option::of(-1e6..1e6f64)),
            n,
        );
        let edges = prop::collection::vec(
            (0..n, 1..n, 0.1..5000.0f64, 0.5..50.0f64, 0i64..20, prop::collection::vec(any::<bool>(), 3), suffix()),
            m,
        );
        let programs = prop::collection::vec(
            (0.0..120.0f64, prop::collection::vec((0.5..90.0f64, prop::collection::vec(any::<u8>(), 1..4)), 1..5)),
            n,
        );
        (nodes, edges, programs).prop_map(|(a, b, c)| assemble(a, b, c))
    })
}

fn vtype_strategy(i: usize) -> impl Strategy<Value = VehicleTypeSpec> {
    (
        suffix(),
        any::<bool>(),
        0.5..40.0f64,
        0.01..=1.0f64,
        (0.1..5.0f64, 0.1..9.0f64, 1.0..30.0f64, 0.1..5.0f64),
        0.0..=1.0f64,
        "[A-Za-z0-9/_]{1,12}",
    )
        .prop_map(move |(s, double, max, frac, (accel, decel, length, min_gap), sigma, class)| VehicleTypeSpec {
            id: unique_id("vt", i, &s),
            vclass: if double { VehicleClass::TruckDouble } else { VehicleClass::TruckSingle },
            max_speed: max,
            min_speed: max * frac,
            accel,
            decel,
            length,
            min_gap,
            sigma,
            emission_class: class,
        })
}

/// Random syntactically valid route files. Cross references are arbitrary;
/// they are only resolved when a scenario is loaded.
pub fn route_file() -> impl Strategy<Value = RouteFile> {
    let vtypes = (0usize..4).prop_flat_map(|k| (0..k).map(vtype_strategy).collect::<Vec<_>>());
    let routes = prop::collection::vec((suffix(), prop::collection::vec(suffix(), 1..5)), 0..4).prop_map(|rs| {
        rs.into_iter()
            .enumerate()
            .map(|(i, (s, es))| Route {
                id: unique_id("r", i, &s),
                edges: es.iter().enumerate().map(|(j, e)| unique_id("e", j, e)).collect(),
            })
            .collect::<Vec<_>>()
    });
    let vehicles = prop::collection::vec(
        (suffix(), suffix(), suffix(), 0.0..1e5f64, prop::collection::vec((suffix(), 0.0..1000.0f64), 0..3)),
        0..6,
    )
    .prop_map(|vs| {
        vs.into_iter()
            .enumerate()
            .map(|(i, (s, t, r, depart, stops))| VehicleSpec {
                id: unique_id("v", i, &s),
                vtype: format!("vt{t}"),
                route: format!("r{r}"),
                depart,
                stops: stops
                    .into_iter()
                    .map(|(c, dwell)| StopSpec { container_stop: format!("cs{c}"), dwell })
                    .collect(),
            })
            .collect::<Vec<_>>()
    });
    (vtypes, routes, vehicles).prop_map(|(vtypes, routes, vehicles)| RouteFile { vtypes, vehicles, routes })
}

/// A random network with a valid additional file placed on it.
pub fn network_and_additional() -> impl Strategy<Value = (Network, AdditionalFile)> {
    network().prop_flat_map(|net| {
        let m = net.edges().len();
        let detectors = prop::collection::vec((suffix(), 0..m, 0.0..=1.0f64, 0.1..900.0f64), 0..5);
        let stops = prop::collection::vec((suffix(), 0..m, 0.0..1.0f64, 0.0..1.0f64), 0..4);
        (Just(net), detectors, stops).prop_map(|(net, ds, ss)| {
            let edges = net.edges();
            let detectors = ds
                .into_iter()
                .enumerate()
                .map(|(i, (s, e, f, freq))| DetectorSpec {
                    id: unique_id("d", i, &s),
                    edge: edges[e].id.clone(),
                    pos: edges[e].length * f,
                    freq,
                })
                .collect();
            let stops = ss
                .into_iter()
                .enumerate()
                .map(|(i, (s, e, a, b))| {
                    let len = edges[e].length;
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    let (start, end) = if lo < hi { (lo * len, hi * len) } else { (0.0, len) };
                    ContainerStopSpec {
                        id: unique_id("cs", i, &s),
                        edge: edges[e].id.clone(),
                        start_pos: start,
                        end_pos: if end > start { end } else { len },
                    }
                })
                .filter(|c| c.start_pos < c.end_pos)
                .collect();
            (net, AdditionalFile { detectors, stops })
        })
    })
}

/// Random valid detector output, sorted by `(id, begin)`.
pub fn detector_output() -> impl Strategy<Value = Vec<DetectorInterval>> {
    prop::collection::vec(
        (suffix(), 1.0..600.0f64, prop::collection::vec((0u64..50, 0.0..40.0f64, 0.0..1e7f64, 0.0..1e4f64, any::<bool>()), 0..6)),
        0..4,
    )
    .prop_map(|ds| {
        let mut out = Vec::new();
        for (i, (s, freq, windows)) in ds.into_iter().enumerate() {
            let id = unique_id("d", i, &s);
            let count = windows.len();
            for (k, (n, speed, co2, fuel, partial)) in windows.into_iter().enumerate() {
                let begin = k as f64 * freq;
                let end = if partial && k + 1 == count { begin + freq / 2.0 } else { begin + freq };
                out.push(if n == 0 {
                    DetectorInterval { id: id.clone(), begin, end, n_veh: 0, mean_speed: -1.0, co2_mg: 0.0, fuel_ml: 0.0 }
                } else {
                    DetectorInterval { id: id.clone(), begin, end, n_veh: n, mean_speed: speed, co2_mg: co2, fuel_ml: fuel }
                });
            }
        }
        out.sort_by(|a, b| a.id.cmp(&b.id).then(a.begin.total_cmp(&b.begin)));
        out
    })
}
