//! Report files for a finished comparison: summary CSV, per-vehicle rate
//! time series, a two-panel SVG chart, detector output and route files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{Comparison, ScenarioLabel, ScenarioReport};
use crate::emissions::Quantity;
use crate::engine::SimulationResult;
use crate::scenario_io::{write_detector_output, write_routes_file};

pub fn report_csv(report: &ScenarioReport) -> String {
    let mut out = String::from("scenario,co2_kg,fuel_l,travel_time_s,distance_m\n");
    for (label, t) in [
        (ScenarioLabel::Bundled, &report.bundled),
        (ScenarioLabel::Unbundled, &report.unbundled),
    ] {
        writeln!(out, "{label},{},{},{},{}", t.co2_kg, t.fuel_l, t.travel_time_s, t.distance_m).unwrap();
    }
    writeln!(
        out,
        "reduction,{},{},{}",
        report.co2_reduction_pct, report.fuel_reduction_pct, report.time_delta_s
    )
    .unwrap();
    out
}

fn series<'a>(
    runs: &'a [(ScenarioLabel, &'a SimulationResult)],
    quantity: Quantity,
) -> impl Iterator<Item = (f64, String, f64)> + 'a {
    runs.iter().flat_map(move |(label, r)| {
        r.trajectories.iter().map(move |row| {
            let rate = match quantity {
                Quantity::Co2 => row.co2_rate_mg_s,
                Quantity::Fuel => row.fuel_rate_ml_s,
            };
            (row.t, format!("{label}/{}", row.vehicle), rate)
        })
    })
}

/// `t,vehicle,rate` rows (mg/s or ml/s), vehicle ids prefixed by scenario.
pub fn timeseries_csv(runs: &[(ScenarioLabel, &SimulationResult)], quantity: Quantity) -> String {
    let mut out = String::from("t,vehicle,rate\n");
    for (t, v, rate) in series(runs, quantity) {
        writeln!(out, "{t},{v},{rate}").unwrap();
    }
    out
}

pub fn travel_times_csv(runs: &[(ScenarioLabel, &SimulationResult)]) -> String {
    let mut out = String::from("scenario,vehicle,departed_at,arrived_at,travel_time_s,distance_m\n");
    for (label, r) in runs {
        for v in &r.vehicles {
            let opt = |x: Option<f64>| x.map(|x| x.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{label},{},{},{},{},{}",
                v.id,
                v.departed_at,
                opt(v.arrived_at),
                opt(v.travel_time_s),
                v.distance_m
            )
            .unwrap();
        }
    }
    out
}

const WIDTH: f64 = 900.0;
const PANEL_H: f64 = 280.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 40.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f <= 1.0 { 1.0 } else if f <= 2.0 { 2.0 } else if f <= 5.0 { 5.0 } else { 10.0 };
    nice * mag
}

/// Rates over time for every vehicle of both scenarios: CO₂ on top, fuel below.
pub fn svg_chart(runs: &[(ScenarioLabel, &SimulationResult)]) -> String {
    let t_max = runs
        .iter()
        .flat_map(|(_, r)| r.trajectories.iter().map(|row| row.t))
        .fold(1.0, f64::max);
    let mut vehicles: Vec<String> = Vec::new();
    for (_, v, _) in series(runs, Quantity::Co2) {
        if !vehicles.contains(&v) {
            vehicles.push(v);
        }
    }
    let height = 2.0 * PANEL_H;
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{WIDTH}" height="{height}" fill="white"/>"#).unwrap();

    for (panel, (quantity, title)) in [(Quantity::Co2, "CO2 emission rate [mg/s]"), (Quantity::Fuel, "Fuel consumption rate [ml/s]")]
        .into_iter()
        .enumerate()
    {
        let top = panel as f64 * PANEL_H + MARGIN_T;
        let bottom = top + plot_h;
        let y_max = series(runs, quantity).map(|(_, _, r)| r).fold(0.0, f64::max).max(1e-9) * 1.05;
        let sx = |t: f64| MARGIN_L + t / t_max * plot_w;
        let sy = |r: f64| bottom - r / y_max * plot_h;

        writeln!(svg, r#"<text x="{MARGIN_L}" y="{:.2}" font-size="14">{title}</text>"#, top - 12.0).unwrap();
        writeln!(
            svg,
            r#"<rect x="{MARGIN_L}" y="{top:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
        )
        .unwrap();
        let step = nice_step(y_max);
        let mut y = 0.0;
        while y <= y_max {
            writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{MARGIN_L}" y2="{:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{y}</text>"##,
                MARGIN_L - 5.0, sy(y), sy(y), MARGIN_L - 8.0, sy(y) + 4.0
            )
            .unwrap();
            y += step;
        }
        let step = nice_step(t_max);
        let mut t = 0.0;
        while t <= t_max {
            writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{bottom:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#,
                sx(t), sx(t), bottom + 5.0, sx(t), bottom + 18.0
            )
            .unwrap();
            t += step;
        }
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time [s]</text>"#,
            MARGIN_L + plot_w / 2.0,
            bottom + 34.0
        )
        .unwrap();

        for (k, v) in vehicles.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let points: Vec<String> = series(runs, quantity)
                .filter(|(_, id, _)| id == v)
                .map(|(t, _, r)| format!("{:.2},{:.2}", sx(t), sy(r)))
                .collect();
            writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                points.join(" ")
            )
            .unwrap();
            let ly = top + 10.0 + 18.0 * k as f64;
            let lx = WIDTH - MARGIN_R + 15.0;
            writeln!(
                svg,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{v}</text>"#,
                lx + 20.0, lx + 25.0, ly + 4.0
            )
            .unwrap();
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Write every output file of `comparison` into `out_dir` and return the
/// paths written, in write order.
pub fn render_report(comparison: &Comparison, out_dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let runs = [
        (ScenarioLabel::Bundled, &comparison.bundled_result),
        (ScenarioLabel::Unbundled, &comparison.unbundled_result),
    ];
    let mut files: Vec<(String, Vec<u8>)> = vec![
        ("report.csv".into(), report_csv(&comparison.report).into_bytes()),
        ("co2_timeseries.csv".into(), timeseries_csv(&runs, Quantity::Co2).into_bytes()),
        ("fuel_timeseries.csv".into(), timeseries_csv(&runs, Quantity::Fuel).into_bytes()),
        ("travel_times.csv".into(), travel_times_csv(&runs).into_bytes()),
        ("comparison.svg".into(), svg_chart(&runs).into_bytes()),
    ];
    for (def, result) in [
        (&comparison.bundled, &comparison.bundled_result),
        (&comparison.unbundled, &comparison.unbundled_result),
    ] {
        let label = def.label;
        let detectors = write_detector_output(&result.intervals)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
        files.push((format!("detectors_{label}.xml"), detectors));
        files.push((format!("{label}.rou.xml"), write_routes_file(&def.route_file())));
    }
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, bytes)?;
        written.push(path);
    }
    Ok(written)
}
