//! Seeded route-file generation: per time step, one uniform draw decides
//! whether a single-trailer truck departs and a second, independent draw
//! decides whether a double-trailer truck departs.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use super::{write_routes_file, ParseError, RouteFile, VehicleSpec, VehicleTypeSpec};
use crate::net_model::{Network, Route};

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub n_steps: u64,
    pub p_single: f64,
    pub p_double: f64,
    pub seed: u64,
    /// Route every generated vehicle follows.
    pub route: Route,
}

/// The generator stream: xoshiro256** seeded through SplitMix64
/// (`seed_from_u64`), uniforms from the top 53 bits of each output.
pub(crate) fn generator(seed: u64) -> Xoshiro256StarStar {
    Xoshiro256StarStar::seed_from_u64(seed)
}

pub fn generate_route_file(spec: &GenSpec, network: &Network) -> Result<Vec<u8>, ParseError> {
    for p in [spec.p_single, spec.p_double] {
        if !(0.0..=1.0).contains(&p) {
            return Err(ParseError::InvalidProbability(p));
        }
    }
    network.validate_route(&spec.route)?;

    let single = VehicleTypeSpec::reference_single();
    let double = VehicleTypeSpec::reference_double();
    let mut rng = generator(spec.seed);
    let mut vehicles = Vec::new();
    let mut veh_nr: u64 = 0;
    for step in 0..spec.n_steps {
        let emit_single = rng.gen::<f64>() < spec.p_single;
        let emit_double = rng.gen::<f64>() < spec.p_double;
        for (emit, vt) in [(emit_single, &single), (emit_double, &double)] {
            if emit {
                vehicles.push(VehicleSpec {
                    id: veh_nr.to_string(),
                    vtype: vt.id.clone(),
                    route: spec.route.id.clone(),
                    depart: step as f64,
                    stops: Vec::new(),
                });
                veh_nr += 1;
            }
        }
    }
    Ok(write_routes_file(&RouteFile {
        vtypes: vec![single, double],
        vehicles,
        routes: vec![spec.route.clone()],
    }))
}
