mod common;

use std::collections::HashMap;

use bundlesim::compare::{
    build_scenario, compare, reduction_pct, render_report, run_comparison, CompareError, ScenarioLabel,
    ScenarioSetup,
};
use bundlesim::engine::VehicleReport;
use bundlesim::net_model::route_length;
use bundlesim::scenario_io::{parse_routes_file, VehicleClass};
use bundlesim::{reference, SimulationResult};

fn report(id: &str, co2_mg: f64, fuel_ml: f64, time: f64, distance: f64) -> VehicleReport {
    VehicleReport {
        id: id.into(),
        vtype: "t".into(),
        departed_at: 0.0,
        arrived_at: Some(time),
        travel_time_s: Some(time),
        distance_m: distance,
        co2_mg,
        fuel_ml,
        duration_s: time,
    }
}

fn result(vehicles: Vec<VehicleReport>) -> SimulationResult {
    SimulationResult {
        vehicles,
        trajectories: vec![],
        intervals: vec![],
        t_end: 0.0,
        dt: 1.0,
        t_max_exceeded: false,
    }
}

#[test]
fn scenario_shapes() {
    let setup = reference::setup().unwrap();
    let one = build_scenario(ScenarioLabel::Bundled, &setup, None).unwrap();
    assert_eq!(one.vehicles.len(), 1);
    assert_eq!(one.vtypes[0].vclass, VehicleClass::TruckDouble);
    let stops: Vec<_> = one.vehicles[0].stops.iter().map(|s| s.container_stop.as_str()).collect();
    assert_eq!(stops, ["spar_university", "spar_dornach"]);

    let two = build_scenario(ScenarioLabel::Unbundled, &setup, None).unwrap();
    assert_eq!(two.vehicles.len(), 2);
    assert!(two.vehicles.iter().all(|v| v.stops.len() == 1));
    assert_eq!(two.vtypes[0].vclass, VehicleClass::TruckSingle);
    assert_eq!(two.routes[0].edges[0], two.routes[1].edges[0]);
    assert_eq!(two.vehicles[1].depart - two.vehicles[0].depart, 10.0);

    // city segment of the bundled route: from the first city edge up to the motorway
    let net = &setup.network;
    let city: f64 = one.routes[0].edges[1..one.routes[0].edges.len() - 1]
        .iter()
        .map(|e| net.edge(e).unwrap().length)
        .sum();
    assert!((city - 1950.0).abs() <= 20.0, "{city}");
    assert!(net.programs().iter().any(|p| p.controlled.iter().any(|c| one.routes[0].edges.contains(c))));

    let mut bad = setup.clone();
    bad.stops[1] = "nowhere".into();
    assert!(matches!(
        build_scenario(ScenarioLabel::Bundled, &bad, None),
        Err(CompareError::UnknownStop(s)) if s == "nowhere"
    ));
    bad.stops.pop();
    assert!(matches!(build_scenario(ScenarioLabel::Unbundled, &bad, None), Err(CompareError::StopCount(1))));
    let mut cut = setup.clone();
    cut.origin = "x_s".into();
    assert!(matches!(build_scenario(ScenarioLabel::Bundled, &cut, None), Err(CompareError::Net(_))));
}

#[test]
fn reduction_arithmetic() {
    assert_eq!(reduction_pct(3.0, 3.0), 0.0);
    assert_eq!(reduction_pct(2.0, 4.0), 50.0);
    assert!((reduction_pct(1262.0, 1171.0 + 1098.0) - 44.38).abs() < 0.005);
    assert_eq!(reduction_pct(1.0, 0.0), 0.0);

    let i = result(vec![report("a", 2e6, 2e3, 500.0, 4000.0)]);
    let ii = result(vec![report("b", 2e6, 1e3, 300.0, 4000.0), report("c", 2e6, 1e3, 350.0, 4000.0)]);
    let r = compare(&i, &ii).unwrap();
    assert_eq!(r.co2_reduction_pct, 50.0);
    assert_eq!(r.fuel_reduction_pct, 0.0);
    assert_eq!(r.time_delta_s, 150.0);
    assert_eq!((r.bundled.co2_kg, r.unbundled.fuel_l), (2.0, 2.0));
    assert_eq!(r.unbundled.travel_time_s, 650.0);

    let mut unfinished = ii.clone();
    unfinished.t_max_exceeded = true;
    assert!(matches!(compare(&i, &unfinished), Err(CompareError::Incomplete(ScenarioLabel::Unbundled))));
}

#[test]
fn reference_comparison_invariants() {
    let setup = reference::setup().unwrap();
    let c = run_comparison(&setup).unwrap();
    let r = &c.report;
    assert!(r.bundled.co2_kg < r.unbundled.co2_kg);
    assert!(r.bundled.fuel_l < r.unbundled.fuel_l);
    assert!(r.bundled.distance_m < r.unbundled.distance_m);
    assert!(r.bundled.travel_time_s > r.unbundled.max_travel_time_s);
    let legs: f64 = c.unbundled.routes.iter().map(|rt| route_length(&setup.network, rt).unwrap()).sum();
    assert!((r.unbundled.distance_m - legs).abs() < 1e-6);
    let one = route_length(&setup.network, &c.bundled.routes[0]).unwrap();
    assert!((r.bundled.distance_m - one).abs() < 1e-6);
}

#[test]
fn rendered_files() {
    let setup = reference::setup().unwrap();
    let c = run_comparison(&setup).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = render_report(&c, dir.path()).unwrap();
    assert_eq!(written.len(), 9);

    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(lines[0], ["scenario", "co2_kg", "fuel_l", "travel_time_s", "distance_m"]);
    assert_eq!(lines.len(), 4);
    assert_eq!((lines[1][0], lines[2][0], lines[3][0]), ("scenario_I", "scenario_II", "reduction"));
    let f = |s: &str| s.parse::<f64>().unwrap();
    let (co2_pct, fuel_pct) = (f(lines[3][1]), f(lines[3][2]));
    assert!((0.0..=100.0).contains(&co2_pct) && (0.0..=100.0).contains(&fuel_pct));
    assert!((reduction_pct(f(lines[1][1]), f(lines[2][1])) - co2_pct).abs() < 1e-9);
    assert!((reduction_pct(f(lines[1][2]), f(lines[2][2])) - fuel_pct).abs() < 1e-9);

    for name in ["co2_timeseries.csv", "fuel_timeseries.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,vehicle,rate"));
        let mut last: HashMap<String, f64> = HashMap::new();
        for l in lines {
            let cols: Vec<&str> = l.split(',').collect();
            let t = f(cols[0]);
            if let Some(prev) = last.insert(cols[1].to_string(), t) {
                assert!(t > prev, "{name}: {l}");
            }
            assert!(f(cols[2]) >= 0.0);
        }
        assert_eq!(last.len(), 3);
    }

    let svg = std::fs::read_to_string(dir.path().join("comparison.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let lines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
    assert_eq!(lines, 6);

    let routes = std::fs::read(dir.path().join("scenario_II.rou.xml")).unwrap();
    assert_eq!(parse_routes_file(&routes).unwrap(), c.unbundled.route_file());
}

#[test]
fn one_step_totals() {
    // a vehicle that arrives within one step: total = rate · dt
    use common::*;
    use bundlesim::scenario_io::AdditionalFile;
    let w = world(
        line_network(&[1.0], 10.0),
        vec![vtype("t", 10.0, 2.0, 4.0, 5.0)],
        vec![route("r", &["e0"])],
        vec![vehicle("a", "t", "r", 0.0)],
        AdditionalFile::default(),
    );
    let r = bundlesim::run(w, bundlesim::SimulationConfig::default());
    let v = &r.vehicles[0];
    assert_eq!(v.duration_s, 1.0);
    assert_eq!(v.co2_mg, 1000.0 + 100.0 * 2.0);
    let report = compare(&r, &r).unwrap();
    assert_eq!(report.bundled.co2_kg, v.co2_mg * 1e-6);
}

#[test]
fn config_file_with_network_override() {
    let dir = tempfile::tempdir().unwrap();
    let data = reference::data_dir();
    let cfg = reference::SCENARIO.replace("network = \"linz_reference.net.xml\"\n", "");
    let cfg = cfg
        .replace("\"linz_reference.add.xml\"", &format!("{:?}", data.join("linz_reference.add.xml")))
        .replace("\"trucks.rou.xml\"", &format!("{:?}", data.join("trucks.rou.xml")))
        .replace("\"hbefa3_surrogate.emissions\"", &format!("{:?}", data.join("hbefa3_surrogate.emissions")));
    let path = dir.path().join("scenario.toml");
    std::fs::write(&path, cfg).unwrap();
    assert!(matches!(ScenarioSetup::from_config_file(&path, None), Err(CompareError::Config(_))));
    let fast = ScenarioSetup::from_config_file(&path, Some(&data.join("linz_reference_60kmh.net.xml"))).unwrap();
    assert_eq!(fast.network.edge("c3").unwrap().speed_limit, 16.67);
    assert_eq!(fast.network.edge("s_uni").unwrap().priority, 10);
    let c = run_comparison(&fast).unwrap();
    assert!(c.report.co2_reduction_pct > 0.0);

    std::fs::write(&path, "network = 3").unwrap();
    assert!(matches!(ScenarioSetup::from_config_file(&path, None), Err(CompareError::Config(_))));
}
