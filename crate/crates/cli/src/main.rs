// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bundlesim::compare::{render_report, run_comparison, ScenarioSetup};
use bundlesim::control_server::{ScenarioPaths, Server};
use bundlesim::net_model::Route;
use bundlesim::scenario_io::{generate_route_file, parse_network_file, write_detector_output, GenSpec};
use bundlesim::{run, SimulationConfig};

#[derive(Parser)]
#[command(name = "bundlesim", version, about = "Bundled vs. unbundled truck delivery simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario to completion and write accounts and detector output.
    Simulate(SimulateArgs),
    /// Run the bundled and unbundled scenarios and write the comparison report.
    Compare(CompareArgs),
    /// Generate a seeded route file of single- and double-trailer trucks.
    GenRoutes(GenRoutesArgs),
    /// Serve the TCP control protocol.
    Serve(ServeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    routes: PathBuf,
    #[arg(long)]
    additional: PathBuf,
    #[arg(long)]
    emissions: PathBuf,
    /// Step length, seconds.
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop after this many simulated seconds.
    #[arg(long, default_value_t = 3600.0)]
    t_max: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write trajectory.csv.
    #[arg(long)]
    trajectory: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    net: PathBuf,
    /// TOML scenario config; its paths resolve relative to the file.
    #[arg(long)]
    scenario_config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenRoutesArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    steps: u64,
    #[arg(long)]
    p_single: f64,
    #[arg(long)]
    p_double: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// First edge of the route (default: first edge of the network file).
    #[arg(long)]
    from: Option<String>,
    /// Last edge of the route (default: last edge of the network file).
    #[arg(long)]
    to: Option<String>,
    #[arg(long, default_value = "r0")]
    route_id: String,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "BUNDLESIM_PORT")]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, requires_all = ["routes", "additional", "emissions"])]
    net: Option<PathBuf>,
    #[arg(long, requires = "net")]
    routes: Option<PathBuf>,
    #[arg(long, requires = "net")]
    additional: Option<PathBuf>,
    #[arg(long, requires = "net")]
    emissions: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    if !(a.dt > 0.0) || !(a.t_max > 0.0) {
        bail!("--dt and --t-max must be positive");
    }
    let world = ScenarioPaths {
        net: a.net,
        routes: a.routes,
        additional: a.additional,
        emissions: a.emissions,
    }
    .load()
    .map_err(anyhow::Error::msg)?;
    let config = SimulationConfig {
        dt: a.dt,
        t_max: a.t_max,
        seed: a.seed,
        record_trajectories: a.trajectory,
    };
    let result = run(world, config);
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write(&a.out.join("accounts.json"), result.accounts_json())?;
    write(&a.out.join("detectors.xml"), write_detector_output(&result.intervals)?)?;
    if a.trajectory {
        write(&a.out.join("trajectory.csv"), result.trajectory_csv())?;
    }
    let total = result.total();
    println!(
        "t_end {} s, {} vehicles, CO2 {:.4} kg, fuel {:.4} L",
        result.t_end,
        result.vehicles.len(),
        total.co2_mg * 1e-6,
        total.fuel_ml * 1e-3
    );
    if result.t_max_exceeded {
        eprintln!("warning: t_max reached with vehicles still on the road");
    }
    Ok(())
}

fn compare(a: CompareArgs) -> Result<()> {
    let setup = ScenarioSetup::from_config_file(&a.scenario_config, Some(&a.net))?;
    let comparison = run_comparison(&setup)?;
    render_report(&comparison, &a.out).with_context(|| format!("writing to {}", a.out.display()))?;
    let r = &comparison.report;
    for (name, t) in [("scenario_I", &r.bundled), ("scenario_II", &r.unbundled)] {
        println!(
            "{name}: CO2 {:.4} kg, fuel {:.4} L, time {} s (max {} s), distance {:.1} m",
            t.co2_kg, t.fuel_l, t.travel_time_s, t.max_travel_time_s, t.distance_m
        );
    }
    println!(
        "reduction: CO2 {:.2} %, fuel {:.2} %, time delta {} s",
        r.co2_reduction_pct, r.fuel_reduction_pct, r.time_delta_s
    );
    Ok(())
}

fn gen_routes(a: GenRoutesArgs) -> Result<()> {
    let bytes = std::fs::read(&a.net).with_context(|| format!("reading {}", a.net.display()))?;
    let network = parse_network_file(&bytes).with_context(|| a.net.display().to_string())?;
    let edges = network.edges();
    let from = a.from.unwrap_or_else(|| edges[0].id.clone());
    let to = a.to.unwrap_or_else(|| edges[edges.len() - 1].id.clone());
    let path = network.shortest_path(&from, &to, |e| e.allows("truck_single") && e.allows("truck_double"))?;
    let spec = GenSpec {
        n_steps: a.steps,
        p_single: a.p_single,
        p_double: a.p_double,
        seed: a.seed,
        route: Route { id: a.route_id, edges: path },
    };
    write(&a.out, generate_route_file(&spec, &network)?)
}

fn serve(a: ServeArgs) -> Result<()> {
    if !(a.dt > 0.0) {
        bail!("--dt must be positive");
    }
    let preload = match (a.net, a.routes, a.additional, a.emissions) {
        (Some(net), Some(routes), Some(additional), Some(emissions)) => {
            let mut world = ScenarioPaths { net, routes, additional, emissions }
                .load()
                .map_err(anyhow::Error::msg)?;
            world.configure(SimulationConfig { dt: a.dt, seed: a.seed, ..SimulationConfig::default() });
            Some(world)
        }
        _ => None,
    };
    let server = Server::bind((a.host.as_str(), a.port), preload)
        .with_context(|| format!("binding {}:{}", a.host, a.port))?;
    eprintln!("listening on {}", server.local_addr()?);
    server.serve()?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Compare(a) => compare(a),
        Command::GenRoutes(a) => gen_routes(a),
        Command::Serve(a) => serve(a),
    }
}
